"""
Wavelet subbands of a single image
==================================

The benchmark looks at images through one level of a biorthogonal
wavelet transform. This script takes one synthetic image apart into
its four subbands and puts it back together.
"""

import numpy as np

from hybridgen import XgcSurrogateConfig, synth_xgc
from hybridgen.wavelet import dwt2, idwt2, subband_len

# one 28x28 surrogate image
data = synth_xgc(XgcSurrogateConfig(n_nodes=1, height=28, width=28, seed=42))
image = data.values[0]

coeffs = dwt2(image)
print("image:", image.shape)
for name in ("ll", "lh", "hl", "hh"):
    band = getattr(coeffs, name)
    print(f"  {name.upper()} subband: {band.shape} ({band.size} coefficients)")

# the benchmark feature vector keeps LL, LH and HL and drops HH
o = subband_len(28)
print("per-image feature length:", 3 * o * o)

back = idwt2(coeffs)
print("perfect reconstruction error:", float(np.abs(back - image).max()))

# the transform is linear, so subbands of a sum are sums of subbands
other = synth_xgc(XgcSurrogateConfig(n_nodes=1, height=28, width=28, seed=7)).values[0]
lhs = dwt2(image + other).ll
rhs = dwt2(image).ll + dwt2(other).ll
print("linearity check (LL):", float(np.abs(lhs - rhs).max()))
