"""The complex one-hot code, the per-component hinge, and the epoch-driven
threshold gate that stops penalizing confident correct samples.

Run: python3 demos/04_hinge_loss_and_gating.py
"""

import numpy as np

from fccnn import HingeState, encode_one_hot, gate_error, hinge_error, loss, predict_class
from fccnn.ctensor import ComplexTensor

labels = np.array([0, 1, 2])
codes = encode_one_hot(labels, 3)
print("codes for labels", labels.tolist())
print(codes.codes.to_complex())

# Predictions: row 0 confident+correct, row 1 weak+correct, row 2 wrong.
yhat = ComplexTensor(
    np.array([[1.8, -1.6, -1.2], [-0.4, 0.3, -0.2], [0.5, -0.3, -0.9]]),
    np.array([[0.9, -0.2, 0.1], [0.2, 0.4, -0.1], [0.3, 0.1, -0.5]]),
    dtype="f64",
)
print("\npredicted classes:", predict_class(yhat), "(argmax of the real parts)")

e = hinge_error(codes, yhat)
print("hinge error magnitudes:\n", np.hypot(e.re, e.im).round(3))

for epoch in (0, 10, 40):
    state = HingeState(epoch=epoch)
    gated = gate_error(e, labels, yhat, state)
    print(
        f"epoch {epoch:>2}: e_thr {state.e_thr:.3f}  e_M {gated.e_M:.3f}  "
        f"loss {loss(gated.e):.4f}  "
        f"(gate {'zeroes correct rows' if gated.e_M < state.e_thr else 'keeps everything'})"
    )
print("\nmisclassified rows always keep their error, whatever the epoch.")
