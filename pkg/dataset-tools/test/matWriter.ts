/**
 * Synthetic MATLAB level-5 writer used by the tests: numeric arrays only,
 * optional zlib compression, small-element name encoding for short names
 * (matching what MATLAB itself emits for variables like "X" and "y").
 */

import * as zlib from "zlib";

const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_DOUBLE = 9;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;

export const MX_DOUBLE_CLASS = 6;
export const MX_UINT8_CLASS = 9;

function align8(buf: Buffer): Buffer {
  const pad = (8 - (buf.length % 8)) % 8;
  return pad ? Buffer.concat([buf, Buffer.alloc(pad)]) : buf;
}

function fullElement(type: number, data: Buffer): Buffer {
  const tag = Buffer.alloc(8);
  tag.writeUInt32LE(type, 0);
  tag.writeUInt32LE(data.length, 4);
  return align8(Buffer.concat([tag, data]));
}

function smallElement(type: number, data: Buffer): Buffer {
  if (data.length > 4) {
    throw new Error("small elements hold at most 4 bytes");
  }
  const out = Buffer.alloc(8);
  out.writeUInt16LE(type, 0);
  out.writeUInt16LE(data.length, 2);
  data.copy(out, 4);
  return out;
}

export interface SyntheticVar {
  name: string;
  dims: number[];
  classId: number;
  /** values in column-major order */
  values: number[] | Uint8Array | Float64Array;
}

export function buildMatrixElement(v: SyntheticVar): Buffer {
  const flags = Buffer.alloc(8);
  flags.writeUInt32LE(v.classId, 0); // no complex/global/logical flags
  const flagsEl = fullElement(MI_UINT32, flags);

  const dims = Buffer.alloc(4 * v.dims.length);
  v.dims.forEach((d, i) => dims.writeInt32LE(d, 4 * i));
  const dimsEl = fullElement(MI_INT32, dims);

  const nameBuf = Buffer.from(v.name, "ascii");
  const nameEl =
    nameBuf.length <= 4 ? smallElement(MI_INT8, nameBuf) : fullElement(MI_INT8, nameBuf);

  let dataEl: Buffer;
  if (v.classId === MX_UINT8_CLASS) {
    dataEl = fullElement(MI_UINT8, Buffer.from(Uint8Array.from(v.values as any)));
  } else {
    const d = Buffer.alloc(8 * v.values.length);
    Array.from(v.values as any, Number).forEach((x, i) => d.writeDoubleLE(x, 8 * i));
    dataEl = fullElement(MI_DOUBLE, d);
  }
  const body = Buffer.concat([flagsEl, dimsEl, nameEl, dataEl]);
  return fullElement(MI_MATRIX, body);
}

export function writeMat(vars: SyntheticVar[], compress = false): Buffer {
  const header = Buffer.alloc(128);
  header.write("MATLAB 5.0 MAT-file, synthetic test container", 0, "ascii");
  header.writeUInt16LE(0x0100, 124);
  header.write("IM", 126, "ascii");
  const elements = vars.map((v) => {
    const el = buildMatrixElement(v);
    if (!compress) {
      return el;
    }
    const deflated = zlib.deflateSync(el);
    const tag = Buffer.alloc(8);
    tag.writeUInt32LE(MI_COMPRESSED, 0);
    tag.writeUInt32LE(deflated.length, 4);
    const pad = (8 - (deflated.length % 8)) % 8;
    return Buffer.concat([tag, deflated, Buffer.alloc(pad)]);
  });
  return Buffer.concat([header, ...elements]);
}

/** Column-major SVHN-style pixel cube [32,32,3,N]. */
export function pixelCube(
  n: number,
  fill: (h: number, w: number, c: number, img: number) => number
): Uint8Array {
  const data = new Uint8Array(32 * 32 * 3 * n);
  for (let img = 0; img < n; img++) {
    for (let c = 0; c < 3; c++) {
      for (let w = 0; w < 32; w++) {
        for (let h = 0; h < 32; h++) {
          data[h + 32 * w + 1024 * c + 3072 * img] = fill(h, w, c, img);
        }
      }
    }
  }
  return data;
}
