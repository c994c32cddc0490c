import { describe, expect, it } from "vitest";

import { parseMat } from "../src/mat";
import { MX_DOUBLE_CLASS, MX_UINT8_CLASS, writeMat } from "./matWriter";

describe("level-5 .mat parsing", () => {
  it("reads an uncompressed uint8 array with a short (small-element) name", () => {
    const buf = writeMat([
      { name: "X", dims: [2, 3], classId: MX_UINT8_CLASS, values: [1, 2, 3, 4, 5, 6] },
    ]);
    const vars = parseMat(buf);
    const x = vars.get("X")!;
    expect(x.dims).toEqual([2, 3]);
    expect(Array.from(x.data)).toEqual([1, 2, 3, 4, 5, 6]);
  });

  it("reads zlib-compressed elements", () => {
    const buf = writeMat(
      [{ name: "y", dims: [4, 1], classId: MX_DOUBLE_CLASS, values: [10, 1, 2, 3] }],
      true
    );
    const vars = parseMat(buf);
    expect(Array.from(vars.get("y")!.data)).toEqual([10, 1, 2, 3]);
  });

  it("reads several variables, long names included", () => {
    const buf = writeMat([
      { name: "X", dims: [1, 2], classId: MX_UINT8_CLASS, values: [7, 8] },
      { name: "extra_meta", dims: [1, 1], classId: MX_DOUBLE_CLASS, values: [3.5] },
    ]);
    const vars = parseMat(buf);
    expect([...vars.keys()].sort()).toEqual(["X", "extra_meta"]);
    expect(vars.get("extra_meta")!.data[0]).toBe(3.5);
  });

  it("rejects non-mat files", () => {
    expect(() => parseMat(Buffer.alloc(200))).toThrow(/endian/);
    expect(() => parseMat(Buffer.alloc(10))).toThrow(/too short/);
  });

  it("keeps column-major order", () => {
    // values [1,2,3,4] with dims [2,2] mean the matrix [[1,3],[2,4]]
    const buf = writeMat([
      { name: "m", dims: [2, 2], classId: MX_DOUBLE_CLASS, values: [1, 2, 3, 4] },
    ]);
    const m = parseMat(buf).get("m")!;
    expect(m.data[1]).toBe(2); // (row 1, col 0) in column-major
  });
});
