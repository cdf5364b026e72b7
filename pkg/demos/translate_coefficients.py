"""A two-input FLM sub-network is a plain separable Fourier expansion in disguise.

Build one sub-network by hand, convert it to sine/cosine product coefficients
and evaluate both forms on the same points.
"""
import numpy as np

from flm import FlmModel, SubNetwork, eval_separable, sign_matrix, to_separable_md

print(sign_matrix(3).rows)

# one frequency vector, two cosine neurons (signs (+,+) and (+,-))
sub = SubNetwork(n=np.array([1.5, 2.0]), A=np.array([0.7, -0.3]), b=np.array([0.4, 1.1]))
block = to_separable_md(sub)
print("separable coefficients a_1..a_4:", block.a)

X = np.random.default_rng(0).uniform(-np.pi, np.pi, (5, 2))
direct = FlmModel.from_subnets([sub])(X)
print("network  :", direct)
print("expansion:", eval_separable(block, X))
print("max diff :", np.abs(direct - eval_separable(block, X)).max())
