"""Finite-difference verification of every layer and loss primitive.

Each case draws random f64 points away from the non-differentiable loci
(activation kinks, hinge margins, the gate threshold) and compares analytic
gradients against central differences for every real coordinate.
"""

from __future__ import annotations

import numpy as np

from . import objective
from .autograd import Parameter, grad_check
from .ctensor import ComplexTensor
from .nn import Conv2dSpec, LinearSpec

TOLERANCE = 1e-4
EPS = 1e-5


def _rand_tensor(rng, shape, lo=-1.0, hi=1.0) -> ComplexTensor:
    return ComplexTensor(rng.uniform(lo, hi, shape), rng.uniform(lo, hi, shape), dtype="f64")


def _rand_away_from_origin(rng, shape, min_mag=0.05) -> ComplexTensor:
    while True:
        t = _rand_tensor(rng, shape)
        if np.hypot(t.re, t.im).min() > min_mag:
            return t


def _rand_away_from_axes(rng, shape, margin=1e-2) -> ComplexTensor:
    while True:
        t = _rand_tensor(rng, shape)
        if min(np.abs(t.re).min(), np.abs(t.im).min()) > margin:
            return t


def _abs_square_sum(tape, node):
    """Real scalar sum of |out|^2; smooth in both planes."""
    return tape.real(tape.sum(tape.mul(node, tape.conj(node))))


def _conv_case(spec: Conv2dSpec, x_shape):
    def make(rng):
        x = Parameter("x", _rand_tensor(rng, x_shape))
        w = Parameter("w", _rand_tensor(rng, spec.weight_shape))
        params = [x, w]
        bias = None
        if spec.bias:
            bias = Parameter("b", _rand_tensor(rng, (spec.out_channels,)))
            params.append(bias)

        def build(tape):
            out = tape.conv2d(
                tape.param(x), spec, tape.param(w),
                None if bias is None else tape.param(bias),
            )
            return _abs_square_sum(tape, out)

        return build, params

    return make


def _linear_case(spec: LinearSpec, x_shape):
    def make(rng):
        x = Parameter("x", _rand_tensor(rng, x_shape))
        w = Parameter("w", _rand_tensor(rng, spec.weight_shape))
        b = Parameter("b", _rand_tensor(rng, (spec.out_features,)))

        def build(tape):
            out = tape.linear(tape.param(x), spec, tape.param(w), tape.param(b))
            return _abs_square_sum(tape, out)

        return build, [x, w, b]

    return make


def _cardioid_case(shape):
    def make(rng):
        z = Parameter("z", _rand_away_from_origin(rng, shape))

        def build(tape):
            return _abs_square_sum(tape, tape.cardioid(tape.param(z)))

        return build, [z]

    return make


def _crelu_case(shape):
    def make(rng):
        z = Parameter("z", _rand_away_from_axes(rng, shape))

        def build(tape):
            return _abs_square_sum(tape, tape.crelu(tape.param(z)))

        return build, [z]

    return make


def _relu_case(shape):
    # relu rejects nonzero im planes, so route through real(); the im
    # coordinates then have exactly zero analytic and numeric gradients
    def make(rng):
        while True:
            re = rng.uniform(-1, 1, shape)
            if np.abs(re).min() > 1e-2:
                break
        x = Parameter("x", ComplexTensor(re.astype(np.float64)))

        def build(tape):
            return _abs_square_sum(tape, tape.relu(tape.real(tape.param(x))))

        return build, [x]

    return make


def _hinge_gate_loss_case(n=4, k=3):
    def make(rng):
        labels = rng.integers(0, k, n)
        codes = objective.encode_one_hot(labels, k, dtype="f64").codes
        # epoch alternates so both gate branches appear across points
        epoch = int(rng.integers(0, 2)) * 40
        state = objective.HingeState(epoch=epoch)
        while True:
            yhat = Parameter("yhat", _rand_tensor(rng, (n, k), -2.0, 2.0))
            margins = np.abs(codes.re * yhat.value.re - 1.0)
            if margins.min() < 1e-2:
                continue
            sorted_re = np.sort(yhat.value.re, axis=1)
            if (sorted_re[:, -1] - sorted_re[:, -2]).min() < 1e-3:
                continue
            e = objective.hinge_error(objective.ComplexOneHot(codes), yhat.value)
            e_m = float(np.hypot(e.re, e.im).max())
            if abs(e_m - state.e_thr) < 1e-2:
                continue
            break

        def build(tape):
            e_node = tape.hinge_error(codes, tape.param(yhat))
            mask, _ = objective.gate_mask(e_node.value, labels, yhat.value, state)
            return tape.quadratic_loss(tape.gate(e_node, mask))

        return build, [yhat]

    return make


CASES = [
    ("conv 3x3/s2/p1 groups=1", _conv_case(Conv2dSpec(3, 4, (3, 3), stride=2, padding=1), (2, 3, 7, 7))),
    ("conv 3x3/s1 groups=2", _conv_case(Conv2dSpec(4, 6, (3, 3), stride=1, groups=2), (2, 4, 6, 6))),
    ("conv depthwise 3x3/s2", _conv_case(Conv2dSpec(4, 8, (3, 3), stride=2, groups=4, padding=1), (2, 4, 5, 5))),
    ("linear with bias", _linear_case(LinearSpec(5, 4), (3, 5))),
    ("cardioid", _cardioid_case((3, 4))),
    ("crelu", _crelu_case((3, 4))),
    ("relu", _relu_case((3, 4))),
    ("hinge->gate->loss", _hinge_gate_loss_case()),
]


def run_case(make, points: int, case_index: int) -> float:
    worst = 0.0
    for point in range(points):
        rng = np.random.default_rng([7, case_index, point])
        build, params = make(rng)
        worst = max(worst, grad_check(build, params, eps=EPS))
    return worst


def run_suite(points: int = 10, verbose: bool = False):
    results = []
    for i, (name, make) in enumerate(CASES):
        err = run_case(make, points, i)
        results.append((name, err))
        if verbose:
            status = "ok" if err < TOLERANCE else "FAIL"
            print(f"{name:<28} max rel err {err:.3e}  {status}")
    return results
