"""
PCA basis: reconstruction error against dimension
=================================================

Project surrogate images onto uncentered principal components and
watch the reconstruction error fall as the basis grows.
"""

import numpy as np

from hybridgen import XgcSurrogateConfig, synth_xgc
from hybridgen.linear import fit_pca, pca_project, pca_reconstruct

data = synth_xgc(XgcSurrogateConfig(n_nodes=400, height=16, width=16, seed=0))
flat = data.flat()
norm = float(np.linalg.norm(flat))
print(f"{flat.shape[0]} images, {flat.shape[1]} pixels each")

for d in (5, 10, 20, 50, 100, 200):
    basis = fit_pca(flat, d=d)
    coeffs = pca_project(basis, flat)
    recon = pca_reconstruct(basis, coeffs.values)
    rel = float(np.linalg.norm(recon - flat)) / norm
    # eigenvalue mass tells the same story from the spectrum side
    spectrum = basis.eigenvalues
    captured = float(spectrum[:d].sum() / spectrum.sum())
    print(f"d={d:4d}  relative error {rel:.5f}  spectrum mass {captured:.5f}")

# smooth images leave the data matrix rank-deficient, and a request
# beyond the effective rank is refused rather than silently padded
from hybridgen import RankError

try:
    fit_pca(flat, d=flat.shape[1])
except RankError as exc:
    print("full-dimension request refused:", exc)

spectrum = fit_pca(flat, d=1).eigenvalues
rank = int(np.sum(spectrum > spectrum[0] * 1e-12))
full = fit_pca(flat, d=rank)
recon = pca_reconstruct(full, pca_project(full, flat).values)
rel = float(np.linalg.norm(recon - flat)) / norm
print(f"relative error at the effective rank ({rank}): {rel:.2e}")
