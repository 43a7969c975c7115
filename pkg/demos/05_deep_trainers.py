"""
Deep trainers on a coefficient file
===================================

The trainer package never sees images or bases, only coefficient
containers. This script projects surrogate images with the pipeline,
hands the file to the flow trainer, and pulls generated coefficients
back through the basis.
"""

import csv
import tempfile
from pathlib import Path

import numpy as np

from coeff_trainers import NfConfig, generate, nf_logpdf, train_nf
from hybridgen import XgcSurrogateConfig, read_coeffs, synth_xgc, write_coeffs
from hybridgen.linear import fit_pca, pca_project, pca_reconstruct

work = Path(tempfile.mkdtemp(prefix="trainers_demo_"))

data = synth_xgc(XgcSurrogateConfig(n_nodes=800, height=16, width=16, seed=4))
flat = data.flat()
basis = fit_pca(flat, d=36)
coeffs = pca_project(basis, flat, dataset_id="demo")
write_coeffs(coeffs, work / "coeffs.hgmc")
print("coefficient file:", coeffs.values.shape)

# likelihood training; the per-epoch NLL log lands next to the weights
result = train_nf(work / "coeffs.hgmc", NfConfig(epochs=8, seed=0), work / "ckpt")
with open(work / "ckpt" / "nll.csv", encoding="utf-8") as fh:
    nll = [float(row["mean_nll"]) for row in csv.DictReader(fh)]
print("mean NLL per epoch:", [round(v, 2) for v in nll])

generate(work / "ckpt", 800, 9, work / "gen.hgmc")
drawn = read_coeffs(work / "gen.hgmc")
print("generated:", drawn.values.shape, "tagged", drawn.basis_id)

# the flow's density is exact, so generated samples can be scored directly
lp = nf_logpdf(work / "ckpt", drawn.values)
print("logpdf of generated coefficients: mean %.3f, all finite: %s"
      % (lp.mean(), bool(np.isfinite(lp).all())))

images = pca_reconstruct(basis, drawn.values).reshape(-1, 16, 16)
print("reconstructed images:", images.shape)
print("real  mean/std: %.3f / %.3f" % (flat.mean(), flat.std()))
print("drawn mean/std: %.3f / %.3f" % (images.mean(), images.std()))
