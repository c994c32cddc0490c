"""Complex one-hot targets, the gated complex hinge loss, and the
real-component prediction rule.

The margin test is applied independently per (sample, class) component.
The epoch-driven threshold gate zeroes the error rows of correctly
predicted samples once the batch-max error magnitude drops below the
threshold; misclassified samples always keep their error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ctensor import ComplexTensor

DECAY_RATE = 0.05


def error_threshold(epoch: int, decay_rate: float = DECAY_RATE) -> float:
    """exp(-decay_rate * epoch); equals 1 at epoch 0 and decays strictly."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return math.exp(-decay_rate * epoch)


@dataclass
class HingeState:
    """Epoch counter plus the current gate threshold, advanced once per epoch."""

    epoch: int = 0
    decay_rate: float = DECAY_RATE
    e_thr: float = field(init=False)

    def __post_init__(self):
        self.e_thr = error_threshold(self.epoch, self.decay_rate)

    def advance(self) -> None:
        self.epoch += 1
        self.e_thr = error_threshold(self.epoch, self.decay_rate)


@dataclass(frozen=True)
class ComplexOneHot:
    """[N,K] code matrix: 1+1i at the true class, -1-1i elsewhere."""

    codes: ComplexTensor


@dataclass(frozen=True)
class HingeError:
    """Gated error tensor plus the batch-max magnitude it was gated with."""

    e: ComplexTensor
    e_M: float


def encode_one_hot(labels, num_classes: int, dtype: str = "f32") -> ComplexOneHot:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError(f"labels must be 1-d, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        bad = labels[(labels < 0) | (labels >= num_classes)][0]
        raise ValueError(f"label {bad} out of range [0, {num_classes})")
    n = labels.shape[0]
    re = np.full((n, num_classes), -1.0)
    re[np.arange(n), labels] = 1.0
    codes = ComplexTensor(re, re.copy(), dtype=dtype)
    return ComplexOneHot(codes)


def margin_mask(codes: ComplexTensor, yhat: ComplexTensor) -> np.ndarray:
    """1 where the hinge is active (Re(y)*Re(yhat) <= 1), else 0."""
    if codes.shape != yhat.shape:
        raise ValueError(f"shape mismatch: codes {codes.shape} vs yhat {yhat.shape}")
    return (codes.re * yhat.re <= 1.0).astype(yhat.np_dtype)


def hinge_error(y: ComplexOneHot, yhat: ComplexTensor) -> ComplexTensor:
    """Per component: 0 if Re(y)*Re(yhat) > 1, else y - yhat."""
    codes = y.codes
    mask = margin_mask(codes, yhat)
    return ComplexTensor._wrap(
        (codes.re - yhat.re) * mask, (codes.im - yhat.im) * mask
    )


def predict_class(yhat: ComplexTensor) -> np.ndarray:
    """Argmax over the real components; ties break to the lowest index."""
    if yhat.re.ndim != 2:
        raise ValueError(f"expected [N,K] predictions, got shape {yhat.shape}")
    return np.argmax(yhat.re, axis=1)


def gate_mask(
    e: ComplexTensor,
    labels,
    yhat: ComplexTensor,
    state: HingeState,
    mode: str = "sample",
) -> tuple[np.ndarray, float]:
    """Per-component 0/1 keep-mask for the threshold gate, plus e_M.

    e_M is the max of |e| over the whole batch. When e_M < e_thr the error
    of correctly handled entries is dropped; when e_M > e_thr (and at the
    measure-zero tie) everything is kept. `mode` picks what "correct" means:
    'sample' (default) drops whole rows whose argmax prediction matches the
    label; 'component' drops margin-satisfied components (already zero in e,
    so gating changes nothing under that reading).
    """
    labels = np.asarray(labels)
    mags = np.hypot(e.re, e.im)
    e_M = float(mags.max()) if mags.size else 0.0
    mask = np.ones(e.shape, dtype=e.np_dtype)
    if e_M < state.e_thr:
        if mode == "sample":
            correct = predict_class(yhat) == labels
            mask[correct, :] = 0.0
        elif mode == "component":
            # "correct" read per component: margin satisfied. Those entries
            # are already zero in e, so this mode keeps e unchanged in effect.
            code_re = np.full(yhat.shape, -1.0, dtype=yhat.np_dtype)
            code_re[np.arange(yhat.shape[0]), labels] = 1.0
            mask = (code_re * yhat.re <= 1.0).astype(yhat.np_dtype)
        else:
            raise ValueError(f"unknown gate mode {mode!r}")
    return mask, e_M


def gate_error(
    e: ComplexTensor,
    labels,
    yhat: ComplexTensor,
    state: HingeState,
    mode: str = "sample",
) -> HingeError:
    """Apply the epoch-threshold gate to a hinge error tensor."""
    mask, e_M = gate_mask(e, labels, yhat, state, mode)
    return HingeError(ComplexTensor._wrap(e.re * mask, e.im * mask), e_M)


def loss(e: ComplexTensor) -> float:
    """E = (1/2n) e^H e summed over all components, n = number of samples."""
    if e.re.ndim != 2:
        raise ValueError(f"expected [N,K] error tensor, got shape {e.shape}")
    n = e.shape[0]
    if n == 0:
        return 0.0
    total = float(np.sum(e.re.astype(np.float64) ** 2 + e.im.astype(np.float64) ** 2))
    return total / (2.0 * n)
