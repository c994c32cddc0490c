"""Split-plane complex tensors: arithmetic, unary ops, and the CTNS file format.

Run: python3 demos/01_complex_tensors.py
"""

import tempfile

import numpy as np

from fccnn import ComplexTensor, read_ctns, write_ctns

# A complex tensor stores two real planes; the im plane defaults to zero.
z = ComplexTensor(np.array([1.0, 3.0, 0.0]), np.array([1.0, 4.0, 1.0]))
w = ComplexTensor(np.array([1.0, 0.0, 0.0]), np.array([-1.0, 2.0, 1.0]))

print("z          =", z.to_complex())
print("w          =", w.to_complex())
print("z * w      =", (z * w).to_complex())       # (1+i)(1-i) = 2
print("conj(z)    =", z.conj().to_complex())
print("|z|        =", z.abs().re)                  # 3-4-5 triangle at index 1
print("arg(z)     =", z.arg().re, "(arg 0 := 0)")

# Real-embedded tensors behave exactly like real arrays.
a = ComplexTensor(np.array([2.0, -3.0]))
b = ComplexTensor(np.array([5.0, 7.0]))
print("real mul   =", (a * b).re, "im stays", (a * b).im)

# Round-trip through the CTNS container (magic, version, dtype, extents,
# re plane then im plane, little-endian).
with tempfile.NamedTemporaryFile(suffix=".ctns") as fh:
    write_ctns(z.reshape((3, 1)), fh.name)
    back = read_ctns(fh.name)
    print("ctns round trip:", back.shape, np.array_equal(back.re[:, 0], z.re))
