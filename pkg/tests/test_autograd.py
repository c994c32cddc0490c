import numpy as np
import pytest

from fccnn.autograd import Parameter, Tape, backward, grad_check
from fccnn.ctensor import ComplexTensor
from fccnn.nn import Conv2dSpec


def scalar_param(re, im, name="w"):
    return Parameter(name, ComplexTensor(np.asarray(re, float), np.asarray(im, float), dtype="f64"))


class TestBackwardExamples:
    def test_modulus_squared(self):
        # E = Re(w * conj(w)) = wR^2 + wI^2 at w = 3+4i -> grad (6, 8)
        w = scalar_param(3.0, 4.0)
        tape = Tape()
        node = tape.param(w)
        loss = tape.real(tape.sum(tape.mul(node, tape.conj(node))))
        grads = backward(tape, loss)
        assert grads["w"][0] == pytest.approx(6.0)
        assert grads["w"][1] == pytest.approx(8.0)

    def test_real_projection(self):
        w = scalar_param(-2.7, 11.0)
        tape = Tape()
        loss = tape.sum(tape.real(tape.param(w)))
        grads = backward(tape, loss)
        assert grads["w"][0] == pytest.approx(1.0)
        assert grads["w"][1] == pytest.approx(0.0)

    def test_cardioid_modulus_fd(self):
        # E = |cardioid(w)|^2 at w = 1+0i, against central differences
        w = scalar_param(1.0, 0.0)

        def build(tape):
            f = tape.cardioid(tape.param(w))
            return tape.real(tape.sum(tape.mul(f, tape.conj(f))))

        assert grad_check(build, [w], eps=1e-6) < 1e-6

    def test_constant_has_zero_gradient(self):
        w = scalar_param(1.0, 2.0)
        const = ComplexTensor(np.asarray(5.0), np.asarray(0.0), dtype="f64")

        def build(tape):
            tape.param(w)  # on the tape but unused by the loss
            return tape.real(tape.leaf(const))

        assert grad_check(build, [w], eps=1e-5) == 0.0


class TestTapeContracts:
    def test_terminal_must_be_scalar(self):
        w = scalar_param([1.0, 2.0], [0.0, 0.0])
        tape = Tape()
        node = tape.real(tape.param(w))
        with pytest.raises(ValueError, match="scalar"):
            backward(tape, node)

    def test_terminal_must_be_real(self):
        w = scalar_param(1.0, 2.0)
        tape = Tape()
        node = tape.sum(tape.param(w))
        with pytest.raises(ValueError, match="real scalar"):
            backward(tape, node)

    def test_param_node_reused(self):
        w = scalar_param(1.0, 2.0)
        tape = Tape()
        assert tape.param(w) is tape.param(w)


class TestGradientProperties:
    def _loss_fn(self, w):
        def build(tape):
            node = tape.param(w)
            return tape.real(tape.sum(tape.mul(node, tape.conj(node))))

        return build

    def test_linearity_in_scale(self, rng):
        w = Parameter("w", ComplexTensor(rng.normal(size=4), rng.normal(size=4), dtype="f64"))
        build = self._loss_fn(w)
        tape = Tape()
        g1 = backward(tape, build(tape))["w"]
        w.zero_grad()
        alpha = 3.5

        tape = Tape()
        scaled = tape.scale(build(tape), alpha)
        g2 = backward(tape, scaled)["w"]
        np.testing.assert_allclose(g2[0], alpha * g1[0], rtol=1e-12)
        np.testing.assert_allclose(g2[1], alpha * g1[1], rtol=1e-12)

    def test_accumulation_without_zero_grad(self, rng):
        w = Parameter("w", ComplexTensor(rng.normal(size=4), rng.normal(size=4), dtype="f64"))
        build = self._loss_fn(w)
        tape = Tape()
        backward(tape, build(tape))
        once_re = w.grad_re.copy()
        tape = Tape()
        backward(tape, build(tape))
        np.testing.assert_array_equal(w.grad_re, 2.0 * once_re)

    def test_zero_grad(self, rng):
        w = Parameter("w", ComplexTensor(rng.normal(size=4), rng.normal(size=4), dtype="f64"))
        build = self._loss_fn(w)
        tape = Tape()
        backward(tape, build(tape))
        w.zero_grad()
        assert np.all(w.grad_re == 0) and np.all(w.grad_im == 0)

    def test_nontrainable_gradient_discarded(self, rng):
        w = Parameter("w", ComplexTensor(rng.normal(size=4), rng.normal(size=4), dtype="f64"),
                      trainable=False)
        build = self._loss_fn(w)
        tape = Tape()
        grads = backward(tape, build(tape))
        assert grads == {}
        assert np.all(w.grad_re == 0)

    def test_real_embedding_matches_real_backprop(self, rng):
        # conv + relu + sum on im==0 data: grad_im stays 0 and grad_re equals
        # the same computation done in plain real numpy
        spec = Conv2dSpec(2, 3, (3, 3), stride=1, padding=1)
        x_re = rng.normal(size=(1, 2, 5, 5))
        w_re = rng.normal(size=spec.weight_shape)
        w = Parameter("w", ComplexTensor(w_re, dtype="f64"))
        x = ComplexTensor(x_re, dtype="f64")

        tape = Tape()
        out = tape.relu(tape.conv2d(tape.leaf(x), spec, tape.param(w)))
        grads = backward(tape, tape.real(tape.sum(out)))
        assert np.all(grads["w"][1] == 0)

        # independent real-valued finite difference on one coordinate
        from fccnn.nn import real_conv2d

        def f(wmat):
            return np.maximum(real_conv2d(x_re, wmat, spec), 0.0).sum()

        eps = 1e-6
        bump = np.zeros_like(w_re)
        bump[0, 0, 0, 0] = eps
        numeric = (f(w_re + bump) - f(w_re - bump)) / (2 * eps)
        assert grads["w"][0][0, 0, 0, 0] == pytest.approx(numeric, rel=1e-5)


class TestGradCheckHarness:
    def test_requires_f64(self):
        w = Parameter("w", ComplexTensor([1.0], [1.0], dtype="f32"))

        def build(tape):
            return tape.real(tape.sum(tape.param(w)))

        with pytest.raises(ValueError, match="f64"):
            grad_check(build, [w])

    def test_rejects_bad_eps(self):
        w = scalar_param(1.0, 0.0)
        with pytest.raises(ValueError, match="eps"):
            grad_check(lambda tape: tape.real(tape.param(w)), [w], eps=0.0)

    def test_nonfinite_loss_identifies_coordinate(self):
        w = scalar_param(0.0, 0.0)

        def build(tape):
            # a custom primitive whose value is always inf
            out = tape.real(tape.sum(tape.param(w)))
            inf = ComplexTensor(np.asarray(np.inf), np.asarray(0.0), dtype="f64")
            return tape.apply("make_inf", (out,), inf, lambda gre, gim: ((gre, gim),))

        with pytest.raises(ValueError, match=r"w\.re\[0\]"):
            grad_check(build, [w], eps=1e-5)
