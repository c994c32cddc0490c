"""Complex-valued layer primitives.

A complex convolution (WR + i WI) * (IR + i II) expands into four real
grouped cross-correlations combined as (WR*IR - WI*II) + i(WR*II + WI*IR).
Two real-convolution paths are provided: a direct offset-summation loop and
an im2col/matmul path; they must agree to 1e-5 relative. A 3-convolution
Karatsuba combine is available behind the same contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .ctensor import ComplexTensor

DEFAULT_CONV_PATH = "im2col"


@dataclass(frozen=True)
class Conv2dSpec:
    in_channels: int
    out_channels: int
    kernel: tuple[int, int]
    stride: int = 1
    groups: int = 1
    padding: int = 0
    bias: bool = False

    def __post_init__(self):
        if self.in_channels % self.groups or self.out_channels % self.groups:
            raise ValueError(
                f"channels ({self.in_channels}->{self.out_channels}) must divide "
                f"evenly into {self.groups} groups"
            )
        if self.stride < 1 or self.padding < 0:
            raise ValueError(f"bad stride/padding: {self.stride}/{self.padding}")

    @property
    def weight_shape(self) -> tuple[int, int, int, int]:
        return (self.out_channels, self.in_channels // self.groups, *self.kernel)

    def out_hw(self, h: int, w: int) -> tuple[int, int]:
        kh, kw = self.kernel
        if h + 2 * self.padding < kh or w + 2 * self.padding < kw:
            raise ValueError(
                f"spatial extent {h}x{w} (padding {self.padding}) smaller than "
                f"kernel {kh}x{kw}"
            )
        oh = (h + 2 * self.padding - kh) // self.stride + 1
        ow = (w + 2 * self.padding - kw) // self.stride + 1
        return oh, ow


@dataclass(frozen=True)
class LinearSpec:
    in_features: int
    out_features: int
    bias: bool = True

    @property
    def weight_shape(self) -> tuple[int, int]:
        return (self.out_features, self.in_features)


def _pad2d(x: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))


def _windows(xp: np.ndarray, kh: int, kw: int, stride: int, oh: int, ow: int):
    """Read-only [N,C,oh,ow,kh,kw] view of all kernel windows."""
    n, c = xp.shape[:2]
    s0, s1, s2, s3 = xp.strides
    return as_strided(
        xp,
        shape=(n, c, oh, ow, kh, kw),
        strides=(s0, s1, s2 * stride, s3 * stride, s2, s3),
        writeable=False,
    )


def _real_conv_direct(x, w, spec: Conv2dSpec, oh, ow):
    n = x.shape[0]
    kh, kw = spec.kernel
    s = spec.stride
    cg = spec.in_channels // spec.groups
    og = spec.out_channels // spec.groups
    xp = _pad2d(x, spec.padding)
    out = np.zeros((n, spec.out_channels, oh, ow), dtype=x.dtype)
    for g in range(spec.groups):
        xg = xp[:, g * cg : (g + 1) * cg]
        wg = w[g * og : (g + 1) * og]
        acc = out[:, g * og : (g + 1) * og]
        for i in range(kh):
            for j in range(kw):
                patch = xg[:, :, i : i + s * oh : s, j : j + s * ow : s]
                acc += np.einsum("nchw,oc->nohw", patch, wg[:, :, i, j])
    return out


def _grouped_cols(x, spec: Conv2dSpec, oh, ow):
    """im2col with the group axis leading: [g, N*oh*ow, cg*kh*kw]."""
    n = x.shape[0]
    kh, kw = spec.kernel
    g = spec.groups
    cg = spec.in_channels // g
    xp = _pad2d(x, spec.padding)
    win = _windows(xp, kh, kw, spec.stride, oh, ow)
    win = win.reshape(n, g, cg, oh, ow, kh, kw)
    return np.ascontiguousarray(win.transpose(1, 0, 3, 4, 2, 5, 6)).reshape(
        g, n * oh * ow, cg * kh * kw
    )


def _cols_to_nchw(prod, n, oh, ow, out_channels):
    """[g, N*oh*ow, og] -> [N, g*og, oh, ow] (group-major channel order)."""
    g = prod.shape[0]
    og = prod.shape[2]
    return np.ascontiguousarray(
        prod.reshape(g, n, oh, ow, og).transpose(1, 0, 4, 2, 3)
    ).reshape(n, out_channels, oh, ow)


def _nchw_to_cols(y, groups):
    """[N, g*og, oh, ow] -> [g, N*oh*ow, og]."""
    n, o, oh, ow = y.shape
    og = o // groups
    return np.ascontiguousarray(
        y.reshape(n, groups, og, oh, ow).transpose(1, 0, 3, 4, 2)
    ).reshape(groups, n * oh * ow, og)


def _scatter_cols(t, x_shape, spec: Conv2dSpec, oh, ow):
    """Adjoint of _grouped_cols: scatter-add [g, N*oh*ow, cg*kh*kw] back
    into an input-shaped array."""
    n, c, h, wd = x_shape
    kh, kw = spec.kernel
    s = spec.stride
    p = spec.padding
    g = spec.groups
    cg = c // g
    t = t.reshape(g, n, oh, ow, cg, kh, kw).transpose(1, 0, 4, 2, 3, 5, 6)
    t = t.reshape(n, c, oh, ow, kh, kw)
    gxp = np.zeros((n, c, h + 2 * p, wd + 2 * p), dtype=t.dtype)
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += t[:, :, :, :, i, j]
    if p:
        return np.ascontiguousarray(gxp[:, :, p:-p, p:-p])
    return gxp


def _real_conv_im2col(x, w, spec: Conv2dSpec, oh, ow):
    n = x.shape[0]
    cols = _grouped_cols(x, spec, oh, ow)
    og = spec.out_channels // spec.groups
    wmat = w.reshape(spec.groups, og, -1)
    prod = cols @ wmat.transpose(0, 2, 1)
    return _cols_to_nchw(prod, n, oh, ow, spec.out_channels)


def real_conv2d(x: np.ndarray, w: np.ndarray, spec: Conv2dSpec, path: str | None = None):
    """Grouped strided real cross-correlation, NCHW layout."""
    oh, ow = spec.out_hw(x.shape[2], x.shape[3])
    path = path or DEFAULT_CONV_PATH
    if path == "direct":
        return _real_conv_direct(x, w, spec, oh, ow)
    if path == "im2col":
        return _real_conv_im2col(x, w, spec, oh, ow)
    raise ValueError(f"unknown conv path {path!r}")


class ConvContext:
    """Forward-pass buffers a complex convolution backward needs."""

    __slots__ = ("spec", "x_shape", "oh", "ow", "cols_re", "cols_im", "w_re", "w_im")

    def __init__(self, spec, x_shape, oh, ow, cols_re, cols_im, w_re, w_im):
        self.spec = spec
        self.x_shape = x_shape
        self.oh = oh
        self.ow = ow
        self.cols_re = cols_re
        self.cols_im = cols_im
        self.w_re = w_re
        self.w_im = w_im


def complex_conv2d_ctx(x: ComplexTensor, spec: Conv2dSpec, weight: ComplexTensor):
    """Fused complex forward via two batched-group GEMMs; returns the output
    planes plus the context for the backward pass."""
    oh, ow = spec.out_hw(x.shape[2], x.shape[3])
    n = x.shape[0]
    og = spec.out_channels // spec.groups
    cols_re = _grouped_cols(x.re, spec, oh, ow)
    cols_im = _grouped_cols(x.im, spec, oh, ow)
    w_re = weight.re.reshape(spec.groups, og, -1)
    w_im = weight.im.reshape(spec.groups, og, -1)
    wcat = np.concatenate([w_re, w_im], axis=1).transpose(0, 2, 1)  # [g, K, 2og]
    p_re = cols_re @ wcat  # [.., :og] = xR*wR, [.., og:] = xR*wI
    p_im = cols_im @ wcat
    out_re = _cols_to_nchw(p_re[:, :, :og] - p_im[:, :, og:], n, oh, ow, spec.out_channels)
    out_im = _cols_to_nchw(p_re[:, :, og:] + p_im[:, :, :og], n, oh, ow, spec.out_channels)
    ctx = ConvContext(spec, x.re.shape, oh, ow, cols_re, cols_im, w_re, w_im)
    return out_re, out_im, ctx


def complex_conv2d_backward(ctx: ConvContext, gy_re, gy_im):
    """Input and weight gradients of the fused complex convolution."""
    spec = ctx.spec
    gyr = _nchw_to_cols(gy_re, spec.groups)
    gyi = _nchw_to_cols(gy_im, spec.groups)
    wcat = np.concatenate([ctx.w_re, ctx.w_im], axis=2)  # [g, og, 2K]
    k = ctx.w_re.shape[2]
    u = gyr @ wcat  # [.., :K] = gyR*wR, [.., K:] = gyR*wI
    v = gyi @ wcat
    gx_re = _scatter_cols(u[:, :, :k] + v[:, :, k:], ctx.x_shape, spec, ctx.oh, ctx.ow)
    gx_im = _scatter_cols(v[:, :, :k] - u[:, :, k:], ctx.x_shape, spec, ctx.oh, ctx.ow)
    gycat = np.concatenate(
        [gyr.transpose(0, 2, 1), gyi.transpose(0, 2, 1)], axis=1
    )  # [g, 2og, N*oh*ow]
    og = ctx.w_re.shape[1]
    a = gycat @ ctx.cols_re  # [.., :og] = gyR.xR, [.., og:] = gyI.xR
    b = gycat @ ctx.cols_im
    gw_re = (a[:, :og] + b[:, og:]).reshape(spec.weight_shape)
    gw_im = (a[:, og:] - b[:, :og]).reshape(spec.weight_shape)
    return gx_re, gx_im, gw_re, gw_im


def _check_conv_args(x: ComplexTensor, spec: Conv2dSpec, weight: ComplexTensor, bias):
    if x.re.ndim != 4:
        raise ValueError(f"conv2d expects [N,C,H,W] input, got shape {x.shape}")
    if x.shape[1] != spec.in_channels:
        raise ValueError(
            f"conv2d: input has {x.shape[1]} channels, spec expects {spec.in_channels}"
        )
    if weight.shape != spec.weight_shape:
        raise ValueError(
            f"conv2d: weight shape {weight.shape} != spec shape {spec.weight_shape}"
        )
    if spec.bias and bias is None:
        raise ValueError("conv2d: spec requires a bias tensor")
    if bias is not None and bias.shape != (spec.out_channels,):
        raise ValueError(
            f"conv2d: bias shape {bias.shape} != ({spec.out_channels},)"
        )


def complex_conv2d(
    input: ComplexTensor,
    spec: Conv2dSpec,
    weight: ComplexTensor,
    bias: ComplexTensor | None = None,
    path: str | None = None,
    karatsuba: bool = False,
) -> ComplexTensor:
    """(WR*IR - WI*II) + i(WR*II + WI*IR), each * a real grouped strided
    cross-correlation. `karatsuba=True` uses the 3-convolution combine."""
    _check_conv_args(input, spec, weight, bias)
    xr, xi, wr, wi = input.re, input.im, weight.re, weight.im
    path = path or DEFAULT_CONV_PATH
    if karatsuba:
        t1 = real_conv2d(xr, wr, spec, path)
        t2 = real_conv2d(xi, wi, spec, path)
        t3 = real_conv2d(xr + xi, wr + wi, spec, path)
        out_re = t1 - t2
        out_im = t3 - t1 - t2
    elif path == "im2col":
        out_re, out_im, _ = complex_conv2d_ctx(input, spec, weight)
    else:
        out_re = real_conv2d(xr, wr, spec, path) - real_conv2d(xi, wi, spec, path)
        out_im = real_conv2d(xr, wi, spec, path) + real_conv2d(xi, wr, spec, path)
    if bias is not None:
        out_re = out_re + bias.re[None, :, None, None]
        out_im = out_im + bias.im[None, :, None, None]
    return ComplexTensor._wrap(out_re, out_im)


def complex_linear(
    input: ComplexTensor,
    spec: LinearSpec,
    weight: ComplexTensor,
    bias: ComplexTensor | None = None,
) -> ComplexTensor:
    """out[n,k] = sum_f weight[k,f] * input[n,f] + bias[k], complex arithmetic."""
    if input.re.ndim != 2 or input.shape[1] != spec.in_features:
        raise ValueError(
            f"linear: input shape {input.shape} incompatible with "
            f"in_features={spec.in_features}"
        )
    if weight.shape != spec.weight_shape:
        raise ValueError(
            f"linear: weight shape {weight.shape} != {spec.weight_shape}"
        )
    xr, xi, wr, wi = input.re, input.im, weight.re, weight.im
    out_re = xr @ wr.T - xi @ wi.T
    out_im = xr @ wi.T + xi @ wr.T
    if spec.bias:
        if bias is None:
            raise ValueError("linear: spec requires a bias tensor")
        out_re = out_re + bias.re[None, :]
        out_im = out_im + bias.im[None, :]
    return ComplexTensor._wrap(out_re, out_im)


def _cardioid_scale_inv(re: np.ndarray, im: np.ndarray):
    """Scale factor 1/2 (1 + cos(arg z)) via (1 + x/r)/2, plus 1/r; both 0 at
    z=0 so the origin and its partials stay finite."""
    r = np.hypot(re, im)
    nonzero = (r > 0).astype(re.dtype)
    inv = nonzero / np.where(r > 0, r, 1.0)
    scale = 0.5 * (nonzero + re * inv)
    return scale, inv


def cardioid(z: ComplexTensor) -> ComplexTensor:
    """f(z) = 1/2 (1 + cos(arg z)) * z: phase kept, magnitude scaled; f(0)=0."""
    scale, _ = _cardioid_scale_inv(z.re, z.im)
    return ComplexTensor._wrap(scale * z.re, scale * z.im)


def cardioid_with_partials(re: np.ndarray, im: np.ndarray):
    """Forward planes plus the partials of u = s(x,y) x, v = s(x,y) y with
    respect to (x, y), sharing temporaries; everything is 0 at z=0.

    Returns (u, v, du_dx, du_dy, dv_dx, dv_dy).
    """
    x, y = re, im
    scale, inv = _cardioid_scale_inv(x, y)
    t = y * (0.5 * inv * inv * inv)  # y / (2 r^3)
    xt = x * t
    xyt = xt * y
    du_dx = scale + xyt
    du_dy = -x * xt
    dv_dx = y * y * t
    dv_dy = scale - xyt
    return scale * x, scale * y, du_dx, du_dy, dv_dx, dv_dy


def cardioid_partials(re: np.ndarray, im: np.ndarray):
    """Partials of the cardioid map w.r.t. (x, y); all zero at z=0."""
    return cardioid_with_partials(re, im)[2:]


def crelu(z: ComplexTensor) -> ComplexTensor:
    """ReLU on the real and imaginary parts separately."""
    return ComplexTensor._wrap(np.maximum(z.re, 0), np.maximum(z.im, 0))


def relu(x: ComplexTensor) -> ComplexTensor:
    """Real ReLU; rejects inputs that carry imaginary content."""
    if np.any(x.im != 0):
        raise ValueError("relu is a real-model primitive; input has nonzero im plane")
    return ComplexTensor._wrap(np.maximum(x.re, 0), np.zeros_like(x.im))
