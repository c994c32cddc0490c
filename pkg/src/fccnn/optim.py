"""AdamW over complex parameters, treating each as two real coordinate planes.

Per-real-coordinate second moments keep complex and real models on the same
optimizer code path; bias correction is included. Decoupled weight decay is
applied to weights but not to parameters named `*.bias`.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .autograd import Parameter
from .ctensor import ComplexTensor, read_ctns, write_ctns


class AdamW:
    def __init__(
        self,
        params,
        lr: float = 0.001,
        beta1: float = 0.99,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.1,
    ):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._v: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for p in self.params:
            dt = p.value.np_dtype
            shape = p.value.shape
            self._m[p.name] = (np.zeros(shape, dt), np.zeros(shape, dt))
            self._v[p.name] = (np.zeros(shape, dt), np.zeros(shape, dt))

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def _decays(self, p: Parameter) -> bool:
        return not p.name.endswith(".bias")

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p in self.params:
            if not (np.all(np.isfinite(p.grad_re)) and np.all(np.isfinite(p.grad_im))):
                raise ValueError(f"non-finite gradient for parameter {p.name}")
            wd = self.weight_decay if self._decays(p) else 0.0
            m_re, m_im = self._m[p.name]
            v_re, v_im = self._v[p.name]
            new_re = self._update_plane(p.value.re, p.grad_re, m_re, v_re, wd, bc1, bc2)
            new_im = self._update_plane(p.value.im, p.grad_im, m_im, v_im, wd, bc1, bc2)
            p.set_value(ComplexTensor._wrap(new_re, new_im))

    def _update_plane(self, x, g, m, v, wd, bc1, bc2):
        m *= self.beta1
        m += (1.0 - self.beta1) * g
        v *= self.beta2
        v += (1.0 - self.beta2) * g * g
        m_hat = m / bc1
        v_hat = v / bc2
        step = m_hat / (np.sqrt(v_hat) + self.eps)
        if wd:
            step = step + wd * x
        return x - self.lr * step

    # ---- resumable state ---------------------------------------------------

    def save_state(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        meta = {
            "step": self.t,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "weight_decay": self.weight_decay,
            "params": [p.name for p in self.params],
        }
        with open(os.path.join(out_dir, "optimizer.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
        for p in self.params:
            safe = p.name.replace("/", "_")
            m_re, m_im = self._m[p.name]
            v_re, v_im = self._v[p.name]
            write_ctns(ComplexTensor._wrap(m_re.copy(), m_im.copy()),
                       os.path.join(out_dir, f"{safe}.m.ctns"))
            write_ctns(ComplexTensor._wrap(v_re.copy(), v_im.copy()),
                       os.path.join(out_dir, f"{safe}.v.ctns"))

    def load_state(self, state_dir) -> None:
        with open(os.path.join(state_dir, "optimizer.json")) as fh:
            meta = json.load(fh)
        if set(meta["params"]) != {p.name for p in self.params}:
            raise ValueError(
                f"optimizer state parameters {meta['params']} do not match "
                f"{[p.name for p in self.params]}"
            )
        self.t = int(meta["step"])
        for key in ("lr", "beta1", "beta2", "eps", "weight_decay"):
            setattr(self, key, float(meta[key]))
        for p in self.params:
            safe = p.name.replace("/", "_")
            m = read_ctns(os.path.join(state_dir, f"{safe}.m.ctns"))
            v = read_ctns(os.path.join(state_dir, f"{safe}.v.ctns"))
            if m.shape != p.value.shape:
                raise ValueError(f"state shape {m.shape} != parameter {p.value.shape}")
            dt = p.value.np_dtype
            self._m[p.name] = (m.re.astype(dt), m.im.astype(dt))
            self._v[p.name] = (v.re.astype(dt), v.im.astype(dt))
