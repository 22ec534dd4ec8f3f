# %% [markdown]
# # Factorizing the histogram matrix
#
# Stack histograms as columns of V and factorize V ~ W H with
# multiplicative updates. Columns of H are the compact representation;
# unseen histograms are projected onto the frozen basis W.

# %%
import numpy as np

from histretrieval import nmf_factorize, nmf_project, reconstruction_error

rng = np.random.default_rng(0)
W_true = rng.random((40, 4))
H_true = rng.random((4, 30))
V = W_true @ H_true
V /= V.sum(axis=0, keepdims=True)

W, H, trace = nmf_factorize(V, 4, max_iters=500, tol=1e-10, seed=1)
print("sweeps:", len(trace) - 1)
print("relative residual:", trace[-1] / np.sum(V ** 2))
assert all(b <= a + 1e-10 for a, b in zip(trace, trace[1:]))

# %%
# projecting a training column lands close to its fitted coefficients
c = nmf_project(V[:, 0], W, max_iters=500, tol=1e-10)
print("projection residual:", reconstruction_error(V[:, 0], W, c))
print("training residual:  ", reconstruction_error(V[:, 0], W, H[:, 0]))
