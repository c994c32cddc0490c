"""Reverse-mode automatic differentiation over complex tensors.

Gradients are stored as the pair (dE/dW_R, dE/dW_I): the partials of a real
scalar loss with respect to the real and imaginary planes treated as
independent real variables. The conjugate Wirtinger derivative is the same
thing packaged as dE/dW~ = (dE/dW_R + i dE/dW_I)/2, so the two conventions
differ only by a constant factor that the learning rate absorbs.

The tape is rebuilt on every forward pass (define-by-run). Each recorded
entry holds the op name, its input and output nodes, and a closure over
whatever forward values its backward rule needs.
"""

from __future__ import annotations

import numpy as np

from . import nn, objective
from .ctensor import ComplexTensor


class Parameter:
    """A named trainable tensor plus its accumulated split-plane gradient."""

    def __init__(self, name: str, value: ComplexTensor, trainable: bool = True):
        self.name = name
        self.value = value
        self.trainable = trainable
        self.grad_re = np.zeros(value.shape, value.np_dtype)
        self.grad_im = np.zeros(value.shape, value.np_dtype)

    def zero_grad(self) -> None:
        self.grad_re[...] = 0.0
        self.grad_im[...] = 0.0

    def set_value(self, value: ComplexTensor) -> None:
        """Whole-tensor replacement; the only sanctioned mutation."""
        if value.shape != self.value.shape:
            raise ValueError(
                f"parameter {self.name}: shape {value.shape} != {self.value.shape}"
            )
        if value.dtype != self.value.dtype:
            self.grad_re = self.grad_re.astype(value.np_dtype)
            self.grad_im = self.grad_im.astype(value.np_dtype)
        self.value = value

    def astype(self, dtype: str) -> "Parameter":
        p = Parameter(self.name, self.value.astype(dtype), self.trainable)
        return p

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape}, trainable={self.trainable})"


class Node:
    """A value produced on a tape."""

    __slots__ = ("value", "id")

    def __init__(self, value: ComplexTensor, node_id: int):
        self.value = value
        self.id = node_id


class _Entry:
    __slots__ = ("op", "out", "inputs", "backward")

    def __init__(self, op, out, inputs, backward):
        self.op = op
        self.out = out
        self.inputs = inputs
        self.backward = backward


class Tape:
    """Define-by-run record of primitive applications, in topological order."""

    def __init__(self):
        self._entries: list[_Entry] = []
        self._next_id = 0
        self._param_nodes: dict[int, Node] = {}
        self._params: dict[int, Parameter] = {}

    def _new_node(self, value: ComplexTensor) -> Node:
        node = Node(value, self._next_id)
        self._next_id += 1
        return node

    def leaf(self, value: ComplexTensor) -> Node:
        """A constant input; no gradient is kept for it."""
        return self._new_node(value)

    def param(self, p: Parameter) -> Node:
        """Leaf node bound to a parameter (one node per parameter per tape)."""
        node = self._param_nodes.get(id(p))
        if node is None:
            node = self._new_node(p.value)
            self._param_nodes[id(p)] = node
            self._params[node.id] = p
        return node

    def apply(self, op: str, inputs: tuple, out_value: ComplexTensor, backward) -> Node:
        """Record one primitive. `backward(g_re, g_im)` must return one
        (g_re, g_im) pair per input (either array may be None for zero)."""
        out = self._new_node(out_value)
        assert all(n.id < out.id for n in inputs), "tape would contain a cycle"
        self._entries.append(_Entry(op, out, tuple(inputs), backward))
        return out

    # ---- elementwise / shape primitives -------------------------------

    def add(self, a: Node, b: Node) -> Node:
        def bwd(gre, gim):
            return ((gre, gim), (gre, gim))

        return self.apply("add", (a, b), a.value + b.value, bwd)

    def sub(self, a: Node, b: Node) -> Node:
        def bwd(gre, gim):
            return ((gre, gim), (None if gre is None else -gre, None if gim is None else -gim))

        return self.apply("sub", (a, b), a.value - b.value, bwd)

    def mul(self, a: Node, b: Node) -> Node:
        ar, ai = a.value.re, a.value.im
        br, bi = b.value.re, b.value.im

        def bwd(gre, gim):
            ga = (gre * br + gim * bi, -gre * bi + gim * br)
            gb = (gre * ar + gim * ai, -gre * ai + gim * ar)
            return (ga, gb)

        return self.apply("mul", (a, b), a.value * b.value, bwd)

    def conj(self, a: Node) -> Node:
        def bwd(gre, gim):
            return ((gre, None if gim is None else -gim),)

        return self.apply("conj", (a,), a.value.conj(), bwd)

    def abs(self, a: Node) -> Node:
        ar, ai = a.value.re, a.value.im
        out = a.value.abs()
        r = out.re
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0).astype(r.dtype)

        def bwd(gre, gim):
            # output im plane is constant zero; its cotangent is discarded
            return ((gre * ar * inv, gre * ai * inv),)

        return self.apply("abs", (a,), out, bwd)

    def real(self, a: Node) -> Node:
        out = ComplexTensor._wrap(a.value.re.copy(), np.zeros_like(a.value.im))

        def bwd(gre, gim):
            return ((gre, None),)

        return self.apply("real", (a,), out, bwd)

    def scale(self, a: Node, factor: float) -> Node:
        f = a.value.np_dtype(factor)

        def bwd(gre, gim):
            return ((gre * f, gim * f),)

        return self.apply("scale", (a,), a.value.scale_by_real(factor), bwd)

    def reshape(self, a: Node, new_shape) -> Node:
        old_shape = a.value.shape

        def bwd(gre, gim):
            return (
                (
                    None if gre is None else gre.reshape(old_shape),
                    None if gim is None else gim.reshape(old_shape),
                ),
            )

        return self.apply("reshape", (a,), a.value.reshape(new_shape), bwd)

    def sum(self, a: Node) -> Node:
        shape = a.value.shape
        dt = a.value.np_dtype
        out = ComplexTensor._wrap(
            np.asarray(a.value.re.sum(), dtype=dt), np.asarray(a.value.im.sum(), dtype=dt)
        )

        def bwd(gre, gim):
            return (
                (
                    None if gre is None else np.broadcast_to(gre, shape).astype(dt),
                    None if gim is None else np.broadcast_to(gim, shape).astype(dt),
                ),
            )

        return self.apply("sum", (a,), out, bwd)

    # ---- layers ---------------------------------------------------------

    def conv2d(
        self,
        x: Node,
        spec: nn.Conv2dSpec,
        weight: Node,
        bias: Node | None = None,
    ) -> Node:
        xv, wv = x.value, weight.value
        bv = bias.value if bias is not None else None
        nn._check_conv_args(xv, spec, wv, bv)
        out_re, out_im, ctx = nn.complex_conv2d_ctx(xv, spec, wv)
        if bv is not None:
            out_re = out_re + bv.re[None, :, None, None]
            out_im = out_im + bv.im[None, :, None, None]
        out = ComplexTensor._wrap(out_re, out_im)
        inputs = (x, weight) if bias is None else (x, weight, bias)

        def bwd(gre, gim):
            gxr, gxi, gwr, gwi = nn.complex_conv2d_backward(ctx, gre, gim)
            grads = [(gxr, gxi), (gwr, gwi)]
            if bias is not None:
                grads.append((gre.sum(axis=(0, 2, 3)), gim.sum(axis=(0, 2, 3))))
            return tuple(grads)

        return self.apply("conv2d", inputs, out, bwd)

    def linear(
        self, x: Node, spec: nn.LinearSpec, weight: Node, bias: Node | None = None
    ) -> Node:
        xv, wv = x.value, weight.value
        bv = bias.value if bias is not None else None
        out = nn.complex_linear(xv, spec, wv, bv)
        xr, xi, wr, wi = xv.re, xv.im, wv.re, wv.im
        inputs = (x, weight) if bias is None else (x, weight, bias)

        def bwd(gre, gim):
            gx = (gre @ wr + gim @ wi, -gre @ wi + gim @ wr)
            gw = (gre.T @ xr + gim.T @ xi, -gre.T @ xi + gim.T @ xr)
            grads = [gx, gw]
            if bias is not None:
                grads.append((gre.sum(axis=0), gim.sum(axis=0)))
            return tuple(grads)

        return self.apply("linear", inputs, out, bwd)

    def cardioid(self, z: Node) -> Node:
        zv = z.value
        u, v, du_dx, du_dy, dv_dx, dv_dy = nn.cardioid_with_partials(zv.re, zv.im)
        out = ComplexTensor._wrap(u, v)

        def bwd(gre, gim):
            return ((gre * du_dx + gim * dv_dx, gre * du_dy + gim * dv_dy),)

        return self.apply("cardioid", (z,), out, bwd)

    def crelu(self, z: Node) -> Node:
        zv = z.value
        mask_re = (zv.re > 0).astype(zv.np_dtype)
        mask_im = (zv.im > 0).astype(zv.np_dtype)

        def bwd(gre, gim):
            return ((gre * mask_re, gim * mask_im),)

        return self.apply("crelu", (z,), nn.crelu(zv), bwd)

    def relu(self, x: Node) -> Node:
        xv = x.value
        out = nn.relu(xv)
        mask = (xv.re > 0).astype(xv.np_dtype)

        def bwd(gre, gim):
            return ((gre * mask, None),)

        return self.apply("relu", (x,), out, bwd)

    # ---- loss pipeline ---------------------------------------------------

    def hinge_error(self, codes: ComplexTensor, yhat: Node) -> Node:
        """Margin-gated error y - yhat against constant target codes."""
        mask = objective.margin_mask(codes, yhat.value)
        out = ComplexTensor._wrap(
            (codes.re - yhat.value.re) * mask, (codes.im - yhat.value.im) * mask
        )

        def bwd(gre, gim):
            return ((-gre * mask, -gim * mask),)

        return self.apply("hinge_error", (yhat,), out, bwd)

    def gate(self, e: Node, mask: np.ndarray) -> Node:
        """Multiply by a constant 0/1 keep-mask (no gradient through the
        threshold comparison or e_M)."""
        mask = mask.astype(e.value.np_dtype)
        out = ComplexTensor._wrap(e.value.re * mask, e.value.im * mask)

        def bwd(gre, gim):
            return ((gre * mask, gim * mask),)

        return self.apply("gate", (e,), out, bwd)

    def quadratic_loss(self, e: Node) -> Node:
        """(1/2n) e^H e as a real scalar node, n = rows of e."""
        ev = e.value
        if ev.re.ndim != 2:
            raise ValueError(f"quadratic_loss expects [N,K], got {ev.shape}")
        n = max(ev.shape[0], 1)
        dt = ev.np_dtype
        total = (ev.re.astype(np.float64) ** 2 + ev.im.astype(np.float64) ** 2).sum()
        out = ComplexTensor._wrap(
            np.asarray(total / (2.0 * n), dtype=dt), np.asarray(0.0, dtype=dt)
        )
        inv_n = dt(1.0 / n)

        def bwd(gre, gim):
            return (((gre * inv_n) * ev.re, (gre * inv_n) * ev.im),)

        return self.apply("quadratic_loss", (e,), out, bwd)


def backward(tape: Tape, terminal: Node) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Accumulate (dE/dW_R, dE/dW_I) into every trainable parameter on the
    tape; returns this pass's contribution keyed by parameter name."""
    value = terminal.value
    if value.shape != ():
        raise ValueError(f"terminal must be scalar, got shape {value.shape}")
    if np.any(value.im != 0):
        raise ValueError("terminal must be a real scalar (im plane is nonzero)")
    grads: dict[int, list] = {
        terminal.id: [np.ones((), value.np_dtype), np.zeros((), value.np_dtype)]
    }
    for entry in reversed(tape._entries):
        g = grads.pop(entry.out.id, None)
        if g is None:
            continue
        out_v = entry.out.value
        gre_in = np.zeros(out_v.shape, out_v.np_dtype) if g[0] is None else g[0]
        gim_in = np.zeros(out_v.shape, out_v.np_dtype) if g[1] is None else g[1]
        contribs = entry.backward(gre_in, gim_in)
        for node, contrib in zip(entry.inputs, contribs):
            if contrib is None:
                continue
            gre, gim = contrib
            slot = grads.get(node.id)
            if slot is None:
                grads[node.id] = [gre, gim]
            else:
                if gre is not None:
                    slot[0] = gre if slot[0] is None else slot[0] + gre
                if gim is not None:
                    slot[1] = gim if slot[1] is None else slot[1] + gim
    result = {}
    for node_id, p in tape._params.items():
        g = grads.get(node_id)
        if g is None or not p.trainable:
            continue
        gre = np.zeros(p.value.shape, p.value.np_dtype) if g[0] is None else np.asarray(g[0])
        gim = np.zeros(p.value.shape, p.value.np_dtype) if g[1] is None else np.asarray(g[1])
        gre = gre.reshape(p.value.shape)
        gim = gim.reshape(p.value.shape)
        p.grad_re += gre
        p.grad_im += gim
        result[p.name] = (gre, gim)
    return result


def _eval_loss(build) -> float:
    tape = Tape()
    out = build(tape)
    v = out.value
    if v.shape != () or np.any(v.im != 0):
        raise ValueError("grad_check target must produce a real scalar")
    return float(v.re)


def grad_check(build, params, eps: float = 1e-5) -> float:
    """Central-difference check of every real coordinate of every parameter.

    `build(tape)` must construct the loss and return its terminal node using
    only f64 values. Returns max |analytic - numeric| / max(1, |numeric|).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    params = list(params)
    for p in params:
        if p.value.dtype != "f64":
            raise ValueError(f"grad_check requires f64 parameters, {p.name} is {p.value.dtype}")
        p.zero_grad()
    tape = Tape()
    out = build(tape)
    backward(tape, out)
    worst = 0.0
    for p in params:
        if not p.trainable:
            continue
        base = p.value
        for plane_name, plane, analytic in (
            ("re", base.re, p.grad_re),
            ("im", base.im, p.grad_im),
        ):
            flat = plane.ravel()
            for idx in range(flat.size):
                plus = flat.copy()
                plus[idx] += eps
                p.set_value(_rebuild(base, plane_name, plus))
                f_plus = _eval_loss(build)
                minus = flat.copy()
                minus[idx] -= eps
                p.set_value(_rebuild(base, plane_name, minus))
                f_minus = _eval_loss(build)
                p.set_value(base)
                if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                    raise ValueError(
                        f"non-finite loss while perturbing {p.name}.{plane_name}[{idx}]"
                    )
                numeric = (f_plus - f_minus) / (2.0 * eps)
                err = abs(float(analytic.ravel()[idx]) - numeric) / max(1.0, abs(numeric))
                worst = max(worst, err)
    return worst


def _rebuild(base: ComplexTensor, plane_name: str, flat: np.ndarray) -> ComplexTensor:
    plane = flat.reshape(base.shape)
    if plane_name == "re":
        return ComplexTensor._wrap(plane, base.im.copy())
    return ComplexTensor._wrap(base.re.copy(), plane)
