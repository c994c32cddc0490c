/**
 * SVHN cropped-digit conversion: X [32,32,3,N] uint8 and y [N,1] from the
 * MATLAB container become a CTNS f32 image tensor [N,3,32,32] scaled to
 * [0,1] (im plane zero) and a CTNS label tensor, plus a manifest. SVHN
 * stores digit "0" as class 10; labels are remapped to [0,10).
 */

import * as crypto from "crypto";
import * as fs from "fs";
import * as path from "path";

import { encodeCtns } from "./ctns";
import { parseMat } from "./mat";

export interface ConversionManifest {
  source: string;
  sha256: string;
  images: string;
  labels: string;
  n: number;
  class_count: number;
  scaling: string;
}

const H = 32;
const W = 32;
const C = 3;

export function convertSvhn(
  inPath: string,
  outDir: string,
  expectSha256?: string
): ConversionManifest {
  const raw = fs.readFileSync(inPath);
  const digest = crypto.createHash("sha256").update(raw).digest("hex");
  if (expectSha256 && digest !== expectSha256.toLowerCase()) {
    throw new Error(
      `checksum mismatch for ${inPath}: have ${digest}, expected ${expectSha256}`
    );
  }
  const vars = parseMat(raw);
  const x = vars.get("X");
  const y = vars.get("y");
  if (!x || !y) {
    throw new Error(
      `missing variables in ${inPath}: need X and y, found [${[...vars.keys()]}]`
    );
  }
  if (x.dims.length !== 4 || x.dims[0] !== H || x.dims[1] !== W || x.dims[2] !== C) {
    throw new Error(`X has dims [${x.dims}], expected [${H},${W},${C},N]`);
  }
  const n = x.dims[3];
  const yCount = y.dims.reduce((a, b) => a * b, 1);
  if (yCount !== n) {
    throw new Error(`y holds ${yCount} labels for ${n} images`);
  }

  // (h, w, c, n) column-major -> (n, c, h, w) row-major, scaled to [0,1]
  const re = new Float32Array(n * C * H * W);
  const src = x.data;
  for (let nn = 0; nn < n; nn++) {
    for (let c = 0; c < C; c++) {
      for (let h = 0; h < H; h++) {
        for (let w = 0; w < W; w++) {
          const srcIdx = h + H * w + H * W * c + H * W * C * nn;
          const dstIdx = ((nn * C + c) * H + h) * W + w;
          re[dstIdx] = src[srcIdx] / 255;
        }
      }
    }
  }

  const labels = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    const v = y.data[i];
    if (!Number.isInteger(v) || v < 1 || v > 10) {
      throw new Error(`label ${v} at index ${i} outside the SVHN range 1..10`);
    }
    labels[i] = v === 10 ? 0 : v;
  }

  fs.mkdirSync(outDir, { recursive: true });
  const imagesPath = path.join(outDir, "images.ctns");
  const labelsPath = path.join(outDir, "labels.ctns");
  fs.writeFileSync(
    imagesPath,
    encodeCtns({
      dtype: "f32",
      shape: [n, C, H, W],
      re,
      im: new Float32Array(re.length),
    })
  );
  fs.writeFileSync(
    labelsPath,
    encodeCtns({ dtype: "f32", shape: [n], re: labels, im: new Float32Array(n) })
  );

  const manifest: ConversionManifest = {
    source: path.basename(inPath),
    sha256: digest,
    images: "images.ctns",
    labels: "labels.ctns",
    n,
    class_count: 10,
    scaling: "uint8/255 -> f32 in [0,1]",
  };
  fs.writeFileSync(
    path.join(outDir, "manifest.json"),
    JSON.stringify(manifest, null, 2) + "\n"
  );
  return manifest;
}
