"""End-to-end training and querying on top of the individual stages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, quantize_image, train_codebook
from .config import PipelineConfig
from .context import baseline_cosine_scores, contextual_scores, rank
from .factorization import nmf_factorize, nmf_project, project_columns
from .ingest import ImageRecord, LabeledDataset, extract_patches
from .model import RetrievalModel


@dataclass
class TrainResult:
    model: RetrievalModel
    kmeans_objective: list[float]
    nmf_objective: list[float]


def train(dataset: LabeledDataset, config: PipelineConfig) -> TrainResult:
    descriptors = [extract_patches(r, config.patch_size, config.stride)
                   for r in dataset.records]
    codebook = train_codebook(np.vstack(descriptors), config.codebook_k,
                              seed=config.seed, max_iters=config.kmeans_max_iters)
    V = np.column_stack([quantize_image(d, codebook) for d in descriptors])
    W, _, trace = nmf_factorize(V, config.nmf_rank, config.nmf_max_iters,
                                config.nmf_tol, seed=config.seed)
    # stored database coefficients come from the same projection queries use
    db = project_columns(V, W, config.nmf_max_iters, config.nmf_tol, config.seed)
    model = RetrievalModel(codebook=codebook.centroids, basis=W, coefficients=db,
                           ids=[r.id for r in dataset.records], config=config)
    return TrainResult(model, codebook.objective, trace)


def encode(model: RetrievalModel, image: ImageRecord) -> np.ndarray:
    """Coefficient vector of an image under the model's codebook and basis."""
    cfg = model.config
    h = quantize_image(extract_patches(image, cfg.patch_size, cfg.stride),
                       Codebook(model.codebook))
    return nmf_project(h, model.basis, cfg.nmf_max_iters, cfg.nmf_tol, seed=cfg.seed)


def query(model: RetrievalModel, image: ImageRecord, top_n: int | None = None,
          baseline: bool = False) -> list[tuple[int, str, float]]:
    """Ranked ``(rank, record_id, score)`` triples, best first, rank from 1."""
    cfg = model.config
    c = encode(model, image)
    db = model.coefficients.T
    if baseline:
        f = baseline_cosine_scores(c, db)
    else:
        k = min(cfg.graph_k, db.shape[0])
        f = contextual_scores(c, db, k=k, sigma=cfg.sigma, T=cfg.transduce_iters)
    order = rank(f)
    if top_n is not None:
        order = order[:top_n]
    return [(r + 1, model.ids[i - 1], float(f[i])) for r, i in enumerate(order)]
