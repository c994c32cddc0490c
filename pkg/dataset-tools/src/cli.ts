#!/usr/bin/env node
/** convert-svhn --in <mat> --out <dir> [--expect-sha256 <hex>] */

import { convertSvhn } from "./svhn";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near ${flag}`);
    }
    out.set(flag.slice(2), argv[i + 1]);
  }
  return out;
}

export function main(argv: string[]): number {
  try {
    // accept both `convert-svhn --in ...` and a bare `--in ...`
    const rest = argv[0] === "convert-svhn" ? argv.slice(1) : argv;
    const args = parseArgs(rest);
    const inPath = args.get("in");
    const outDir = args.get("out");
    if (!inPath || !outDir) {
      throw new Error("usage: convert-svhn --in <mat> --out <dir> [--expect-sha256 <hex>]");
    }
    const manifest = convertSvhn(inPath, outDir, args.get("expect-sha256"));
    console.log(
      `converted ${manifest.source}: ${manifest.n} images, ` +
        `${manifest.class_count} classes -> ${outDir}`
    );
    return 0;
  } catch (err) {
    const msg = err instanceof Error ? err.message : String(err);
    console.error(`error: ${msg.replace(/\s+/g, " ")}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
