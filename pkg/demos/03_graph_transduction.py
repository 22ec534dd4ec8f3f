# %% [markdown]
# # Contextual similarity by graph transduction
#
# Two tight clusters on a line plus a query sitting in the first one. The
# query's score is diffused through a kNN graph; cluster-mates light up,
# the other cluster stays at zero because no walk reaches the query.

# %%
import numpy as np

from histretrieval import baseline_cosine_scores, build_graph, rank, transduce

rng = np.random.default_rng(0)
cluster_a = rng.normal([1.0, 0.0], 0.05, size=(6, 2))
cluster_b = rng.normal([0.0, 1.0], 0.05, size=(6, 2))
query = np.array([1.02, 0.01])
nodes = np.vstack([query, cluster_a, cluster_b])

P = build_graph(nodes, k=3)
for T in (1, 5, 20):
    f = transduce(P, T)
    print(f"T={T:2d}", np.round(f[1:], 3))

# %%
print("contextual ranking:", rank(transduce(P, 20)).tolist())
print("cosine ranking:    ", rank(baseline_cosine_scores(query, nodes[1:])).tolist())
