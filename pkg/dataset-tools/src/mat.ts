/**
 * Minimal MATLAB level-5 .mat reader: enough to pull numeric N-d arrays out
 * of the cropped-digit SVHN containers. Handles zlib-compressed elements,
 * the small-data-element format, and numeric data stored in a narrower type
 * than the array class. Values come back as Float64Array in MATLAB's
 * column-major order alongside the dimension list.
 */

import * as zlib from "zlib";

export interface MatVariable {
  name: string;
  dims: number[];
  classId: number;
  data: Float64Array;
}

// data type tags
const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT16 = 3;
const MI_UINT16 = 4;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_INT64 = 12;
const MI_UINT64 = 13;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;
const MI_UTF8 = 16;

const NUMERIC_CLASS_MIN = 6; // mxDOUBLE_CLASS
const NUMERIC_CLASS_MAX = 13; // mxUINT32_CLASS

interface Element {
  type: number;
  data: Buffer;
}

function align8(n: number): number {
  return (n + 7) & ~7;
}

function readElement(buf: Buffer, pos: number): { element: Element; next: number } {
  if (pos + 8 > buf.length) {
    throw new Error(`truncated element tag at offset ${pos}`);
  }
  const word = buf.readUInt32LE(pos);
  const smallBytes = word >>> 16;
  if (smallBytes !== 0) {
    // small data element: type and length packed into one word
    const type = word & 0xffff;
    if (smallBytes > 4) {
      throw new Error(`small element at ${pos} claims ${smallBytes} bytes`);
    }
    return {
      element: { type, data: buf.subarray(pos + 4, pos + 4 + smallBytes) },
      next: pos + 8,
    };
  }
  const type = word;
  const nbytes = buf.readUInt32LE(pos + 4);
  if (pos + 8 + nbytes > buf.length) {
    throw new Error(`element at ${pos} overruns the file (${nbytes} bytes)`);
  }
  return {
    element: { type, data: buf.subarray(pos + 8, pos + 8 + nbytes) },
    next: pos + 8 + align8(nbytes),
  };
}

function numericToFloat64(type: number, data: Buffer): Float64Array {
  const len = data.length;
  const copy = Buffer.from(data); // own buffer for aligned typed-array views
  switch (type) {
    case MI_INT8:
      return Float64Array.from(new Int8Array(copy.buffer, copy.byteOffset, len));
    case MI_UINT8:
    case MI_UTF8:
      return Float64Array.from(new Uint8Array(copy.buffer, copy.byteOffset, len));
    case MI_INT16:
      return Float64Array.from(new Int16Array(copy.buffer, copy.byteOffset, len / 2));
    case MI_UINT16:
      return Float64Array.from(new Uint16Array(copy.buffer, copy.byteOffset, len / 2));
    case MI_INT32:
      return Float64Array.from(new Int32Array(copy.buffer, copy.byteOffset, len / 4));
    case MI_UINT32:
      return Float64Array.from(new Uint32Array(copy.buffer, copy.byteOffset, len / 4));
    case MI_SINGLE:
      return Float64Array.from(new Float32Array(copy.buffer, copy.byteOffset, len / 4));
    case MI_DOUBLE:
      return Float64Array.from(new Float64Array(copy.buffer, copy.byteOffset, len / 8));
    case MI_INT64:
      return Float64Array.from(
        new BigInt64Array(copy.buffer, copy.byteOffset, len / 8), (v) => Number(v)
      );
    case MI_UINT64:
      return Float64Array.from(
        new BigUint64Array(copy.buffer, copy.byteOffset, len / 8), (v) => Number(v)
      );
    default:
      throw new Error(`unsupported numeric data type ${type}`);
  }
}

function parseMatrix(data: Buffer): MatVariable | null {
  let pos = 0;
  const flagsEl = readElement(data, pos);
  if (flagsEl.element.type !== MI_UINT32 || flagsEl.element.data.length < 8) {
    throw new Error("matrix element does not start with array flags");
  }
  const flagsWord = flagsEl.element.data.readUInt32LE(0);
  const classId = flagsWord & 0xff;
  const complexFlag = ((flagsWord >>> 8) & 0x08) !== 0;
  pos = flagsEl.next;

  const dimsEl = readElement(data, pos);
  if (dimsEl.element.type !== MI_INT32) {
    throw new Error("matrix dimensions subelement missing");
  }
  const dims: number[] = [];
  for (let i = 0; i < dimsEl.element.data.length / 4; i++) {
    dims.push(dimsEl.element.data.readInt32LE(i * 4));
  }
  pos = dimsEl.next;

  const nameEl = readElement(data, pos);
  if (nameEl.element.type !== MI_INT8) {
    throw new Error("matrix name subelement missing");
  }
  const name = nameEl.element.data.toString("ascii");
  pos = nameEl.next;

  if (classId < NUMERIC_CLASS_MIN || classId > NUMERIC_CLASS_MAX) {
    return null; // cell/struct/char arrays are not needed here
  }
  const realEl = readElement(data, pos);
  const values = numericToFloat64(realEl.element.type, realEl.element.data);
  if (complexFlag) {
    throw new Error(`variable ${name}: complex .mat arrays are not supported`);
  }
  const expected = dims.reduce((a, b) => a * b, 1);
  if (values.length !== expected) {
    throw new Error(
      `variable ${name}: ${values.length} values but dims [${dims}] need ${expected}`
    );
  }
  return { name, dims, classId, data: values };
}

export function parseMat(buf: Buffer): Map<string, MatVariable> {
  if (buf.length < 128) {
    throw new Error("file too short for a level-5 .mat header");
  }
  const endian = buf.toString("ascii", 126, 128);
  if (endian !== "IM") {
    throw new Error(
      endian === "MI"
        ? "big-endian .mat files are not supported"
        : "not a level-5 .mat file (bad endian indicator)"
    );
  }
  const vars = new Map<string, MatVariable>();
  let pos = 128;
  while (pos + 8 <= buf.length) {
    const { element, next } = readElement(buf, pos);
    let matrixBuf: Buffer | null = null;
    if (element.type === MI_COMPRESSED) {
      const inflated = zlib.inflateSync(element.data);
      const inner = readElement(inflated, 0);
      if (inner.element.type === MI_MATRIX) {
        matrixBuf = inner.element.data;
      }
    } else if (element.type === MI_MATRIX) {
      matrixBuf = element.data;
    }
    if (matrixBuf !== null) {
      const variable = parseMatrix(matrixBuf);
      if (variable) {
        vars.set(variable.name, variable);
      }
    }
    pos = next;
  }
  return vars;
}
