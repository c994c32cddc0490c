import numpy as np
import pytest


def naive_real_conv2d(x, w, stride=1, padding=0, groups=1):
    """Independent direct-summation real cross-correlation oracle.

    Deliberately plain loops over every index; kept free of the library's
    convolution code so the two can disagree.
    """
    n, c, h, wd = x.shape
    o, cg, kh, kw = w.shape
    assert c % groups == 0 and o % groups == 0 and cg == c // groups
    if padding:
        padded = np.zeros((n, c, h + 2 * padding, wd + 2 * padding), dtype=x.dtype)
        padded[:, :, padding:-padding, padding:-padding] = x
        x = padded
        h, wd = h + 2 * padding, wd + 2 * padding
    oh = (h - kh) // stride + 1
    ow = (wd - kw) // stride + 1
    og = o // groups
    out = np.zeros((n, o, oh, ow), dtype=np.float64)
    for b in range(n):
        for oc in range(o):
            g = oc // og
            for y in range(oh):
                for xx in range(ow):
                    acc = 0.0
                    for ic in range(cg):
                        for i in range(kh):
                            for j in range(kw):
                                acc += (
                                    float(x[b, g * cg + ic, y * stride + i, xx * stride + j])
                                    * float(w[oc, ic, i, j])
                                )
                    out[b, oc, y, xx] = acc
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
