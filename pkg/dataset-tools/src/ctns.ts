/**
 * CTNS tensor container: magic "CTNS", u8 version=1, u8 dtype (0=f32, 1=f64),
 * u8 rank, little-endian u32 extents, then the full re plane followed by the
 * full im plane as little-endian IEEE-754.
 */

export interface CtnsTensor {
  dtype: "f32" | "f64";
  shape: number[];
  re: Float32Array | Float64Array;
  im: Float32Array | Float64Array;
}

const MAGIC = Buffer.from("CTNS", "ascii");

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeCtns(tensor: CtnsTensor): Buffer {
  const { dtype, shape, re, im } = tensor;
  const count = elementCount(shape);
  if (re.length !== count || im.length !== count) {
    throw new Error(
      `plane length ${re.length}/${im.length} does not match shape [${shape}] (${count})`
    );
  }
  if (shape.length > 255) {
    throw new Error(`rank ${shape.length} exceeds the CTNS limit of 255`);
  }
  const itemSize = dtype === "f32" ? 4 : 8;
  const header = Buffer.alloc(7 + 4 * shape.length);
  MAGIC.copy(header, 0);
  header.writeUInt8(1, 4);
  header.writeUInt8(dtype === "f32" ? 0 : 1, 5);
  header.writeUInt8(shape.length, 6);
  shape.forEach((extent, i) => {
    if (extent < 0 || extent >= 2 ** 32) {
      throw new Error(`extent ${extent} does not fit in u32`);
    }
    header.writeUInt32LE(extent, 7 + 4 * i);
  });
  const planes = Buffer.alloc(2 * count * itemSize);
  const view = new DataView(planes.buffer, planes.byteOffset);
  for (let i = 0; i < count; i++) {
    if (dtype === "f32") {
      view.setFloat32(i * 4, re[i], true);
      view.setFloat32((count + i) * 4, im[i], true);
    } else {
      view.setFloat64(i * 8, re[i], true);
      view.setFloat64((count + i) * 8, im[i], true);
    }
  }
  return Buffer.concat([header, planes]);
}

export function decodeCtns(raw: Buffer): CtnsTensor {
  if (raw.length < 7 || !raw.subarray(0, 4).equals(MAGIC)) {
    throw new Error("not a CTNS container (bad magic)");
  }
  const version = raw.readUInt8(4);
  if (version !== 1) {
    throw new Error(`unsupported CTNS version ${version}`);
  }
  const dtypeCode = raw.readUInt8(5);
  if (dtypeCode !== 0 && dtypeCode !== 1) {
    throw new Error(`unknown CTNS dtype code ${dtypeCode}`);
  }
  const dtype = dtypeCode === 0 ? "f32" : "f64";
  const rank = raw.readUInt8(6);
  const shape: number[] = [];
  for (let i = 0; i < rank; i++) {
    shape.push(raw.readUInt32LE(7 + 4 * i));
  }
  const count = elementCount(shape);
  const itemSize = dtype === "f32" ? 4 : 8;
  const offset = 7 + 4 * rank;
  if (raw.length !== offset + 2 * count * itemSize) {
    throw new Error(
      `payload size mismatch: have ${raw.length} bytes, shape [${shape}] needs ` +
        `${offset + 2 * count * itemSize}`
    );
  }
  const view = new DataView(raw.buffer, raw.byteOffset + offset);
  const re = dtype === "f32" ? new Float32Array(count) : new Float64Array(count);
  const im = dtype === "f32" ? new Float32Array(count) : new Float64Array(count);
  for (let i = 0; i < count; i++) {
    if (dtype === "f32") {
      re[i] = view.getFloat32(i * 4, true);
      im[i] = view.getFloat32((count + i) * 4, true);
    } else {
      re[i] = view.getFloat64(i * 8, true);
      im[i] = view.getFloat64((count + i) * 8, true);
    }
  }
  return { dtype, shape, re, im };
}
