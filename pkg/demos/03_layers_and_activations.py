"""The layer zoo: complex convolution (grouped/strided/depthwise), the linear
head, and how cardioid differs from CReLU across the complex plane.

Run: python3 demos/03_layers_and_activations.py
"""

import numpy as np

from fccnn import Conv2dSpec, cardioid, complex_conv2d, crelu
from fccnn.ctensor import ComplexTensor

rng = np.random.default_rng(0)

# The backbone's first layer: 3 -> 32 channels, 3x3 kernel, stride 2, pad 1.
spec = Conv2dSpec(3, 32, (3, 3), stride=2, padding=1)
x = ComplexTensor(rng.uniform(0, 1, (1, 3, 32, 32)).astype(np.float32))
w = ComplexTensor(
    rng.uniform(-0.2, 0.2, spec.weight_shape).astype(np.float32),
    rng.uniform(-0.2, 0.2, spec.weight_shape).astype(np.float32),
)
out = complex_conv2d(x, spec, w)
print("conv1:", x.shape, "->", out.shape)

# A depthwise-style grouped convolution acting as learnable pooling:
pool = Conv2dSpec(64, 128, (4, 4), stride=2, groups=64)
feat = ComplexTensor(rng.normal(size=(1, 64, 4, 4)).astype(np.float32),
                     rng.normal(size=(1, 64, 4, 4)).astype(np.float32))
wp = ComplexTensor(rng.normal(size=pool.weight_shape).astype(np.float32),
                   rng.normal(size=pool.weight_shape).astype(np.float32))
print("depthwise pool:", feat.shape, "->", complex_conv2d(feat, pool, wp).shape)

# Activations on a sweep of unit-magnitude inputs around the circle.
theta = np.linspace(-np.pi, np.pi, 9)[:-1]
z = ComplexTensor(np.cos(theta), np.sin(theta), dtype="f64")
card = cardioid(z)
cr = crelu(z)
print("\nphase sweep (degrees -> output magnitude):")
print("  angle   |cardioid|  |crelu|")
for t, cm, rm in zip(
    np.degrees(theta), np.hypot(card.re, card.im), np.hypot(cr.re, cr.im)
):
    print(f"  {t:6.0f}   {cm:9.3f}  {rm:7.3f}")
print("cardioid stays alive in every quadrant; crelu kills the third.")
