"""Reverse-mode autograd over complex parameters, and the finite-difference
verification suite that keeps every backward rule honest.

Run: python3 demos/02_autograd_and_gradcheck.py
"""

import numpy as np

from fccnn import Parameter, Tape, backward
from fccnn.ctensor import ComplexTensor
from fccnn.gradcheck_suite import run_suite

# Gradients are stored as (dE/dW_R, dE/dW_I) pairs: the partials of a real
# scalar loss with respect to each plane. E = |w|^2 at w = 3+4i gives (6, 8).
w = Parameter("w", ComplexTensor(np.asarray(3.0), np.asarray(4.0), dtype="f64"))
tape = Tape()
node = tape.param(w)
loss = tape.real(tape.sum(tape.mul(node, tape.conj(node))))
grads = backward(tape, loss)
print("E = |w|^2 at 3+4i  ->  dE/dw_R =", float(grads["w"][0]),
      " dE/dw_I =", float(grads["w"][1]))

# The suite below perturbs every real coordinate of every parameter of every
# layer primitive and compares against central differences.
print("\nfinite-difference check, 3 random points per primitive:")
for name, err in run_suite(points=3):
    print(f"  {name:<28} max rel err {err:.2e}")
