"""Cross-validated retrieval evaluation, ROC analysis and a synthetic corpus."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codebook import quantize_image, train_codebook
from .config import PipelineConfig
from .context import baseline_cosine_scores, contextual_scores
from .errors import DegenerateLabels, TooManyFolds
from .factorization import nmf_factorize, nmf_project, project_columns
from .ingest import LabeledDataset, extract_patches, write_pgm

log = logging.getLogger(__name__)

METHODS = ("contextual", "baseline")


@dataclass
class FoldAssignment:
    fold_of: np.ndarray
    folds: int
    seed: int

    def members(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    @property
    def sizes(self) -> list[int]:
        return np.bincount(self.fold_of, minlength=self.folds).tolist()


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass
class EvalReport:
    method: str
    per_fold_auc: list[float]
    per_fold_macro_auc: list[float]
    config: PipelineConfig
    fold_sizes: list[int] = field(default_factory=list)
    rocs: list[RocCurve] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.per_fold_auc))

    @property
    def std_auc(self) -> float:
        return float(np.std(self.per_fold_auc))

    @property
    def mean_macro_auc(self) -> float:
        return float(np.nanmean(self.per_fold_macro_auc))


def make_folds(n: int, folds: int = 10, seed: int = 0) -> FoldAssignment:
    """Deal a seeded random permutation of 0..n-1 round-robin into folds."""
    if n < 1 or folds < 1:
        raise ValueError("n and folds must be positive")
    if folds > n:
        raise TooManyFolds(f"{folds} folds for {n} records")
    perm = np.random.default_rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.arange(n) % folds
    return FoldAssignment(fold_of=fold_of, folds=folds, seed=seed)


def roc_curve(scores, labels) -> RocCurve:
    """ROC by sweeping a threshold over the distinct scores, highest first.

    ``labels`` are truthy for relevant items. Tied scores move together, so
    the trapezoidal AUC equals the Mann-Whitney statistic with ties
    counted as one half.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and of equal length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need both classes, got {n_pos} relevant / {n_neg} irrelevant")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.r_[0, np.cumsum(y)[ends]]
    fp = np.r_[0, ends + 1 - tp[1:]]
    # trapezoid on integer counts, one rounding at the end
    area2 = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = area2 / (2 * n_pos * n_neg)
    thresholds = np.r_[np.inf, s[ends]]
    return RocCurve(fpr=fp / n_neg, tpr=tp / n_pos, thresholds=thresholds, auc=auc)


def _query_auc(scores, labels) -> float:
    try:
        return roc_curve(scores, labels).auc
    except DegenerateLabels:
        return float("nan")


def extract_all(dataset: LabeledDataset, config: PipelineConfig) -> list[np.ndarray]:
    return [extract_patches(r, config.patch_size, config.stride) for r in dataset.records]


def run_cross_validation(dataset: LabeledDataset, config: PipelineConfig,
                         descriptors: list[np.ndarray] | None = None
                         ) -> tuple[EvalReport, EvalReport]:
    """K-fold retrieval experiment; returns the (contextual, baseline) reports.

    Each fold trains its own codebook and basis on the remaining folds; the
    held-out images query the training images only. Both sides are encoded
    by projecting their histograms onto the fold's frozen basis.
    """
    n = len(dataset)
    labels = dataset.labels
    if descriptors is None:
        descriptors = extract_all(dataset, config)
    assignment = make_folds(n, config.folds, config.seed)
    reports = {m: EvalReport(method=m, per_fold_auc=[], per_fold_macro_auc=[],
                             config=config, fold_sizes=assignment.sizes)
               for m in METHODS}
    warnings = list(dataset.warnings)

    for fold in range(config.folds):
        test = assignment.members(fold)
        train = np.flatnonzero(assignment.fold_of != fold)
        missing = set(labels[test]) - set(labels[train])
        if missing:
            names = ", ".join(dataset.classes[c] for c in sorted(missing))
            warnings.append(f"fold {fold}: training set has no images of class {names}")

        codebook = train_codebook(np.vstack([descriptors[i] for i in train]),
                                  config.codebook_k, seed=config.seed,
                                  max_iters=config.kmeans_max_iters)
        V = np.column_stack([quantize_image(descriptors[i], codebook) for i in train])
        W, H, trace = nmf_factorize(V, config.nmf_rank, config.nmf_max_iters,
                                    config.nmf_tol, seed=config.seed)
        # database and queries go through the same projection
        db = project_columns(V, W, config.nmf_max_iters, config.nmf_tol, config.seed).T
        log.info("fold %d: kmeans %d iters, nmf %d sweeps, residual %.6g",
                 fold, codebook.n_iter, len(trace) - 1, trace[-1])

        pooled = {m: [] for m in METHODS}
        macro = {m: [] for m in METHODS}
        rel_all = []
        for q in test:
            h = quantize_image(descriptors[q], codebook)
            c = nmf_project(h, W, config.nmf_max_iters, config.nmf_tol, seed=config.seed)
            rel = labels[train] == labels[q]
            rel_all.append(rel)
            scored = {
                "contextual": contextual_scores(c, db, k=config.graph_k,
                                                sigma=config.sigma,
                                                T=config.transduce_iters)[1:],
                "baseline": baseline_cosine_scores(c, db)[1:],
            }
            for m in METHODS:
                pooled[m].append(scored[m])
                macro[m].append(_query_auc(scored[m], rel))

        rel_all = np.concatenate(rel_all)
        for m in METHODS:
            try:
                roc = roc_curve(np.concatenate(pooled[m]), rel_all)
            except DegenerateLabels as exc:
                raise DegenerateLabels(f"fold {fold}: {exc}") from None
            reports[m].rocs.append(roc)
            reports[m].per_fold_auc.append(roc.auc)
            vals = np.asarray(macro[m])
            reports[m].per_fold_macro_auc.append(
                float(np.nanmean(vals)) if np.any(~np.isnan(vals)) else float("nan"))

    for m in METHODS:
        reports[m].warnings = warnings
    return reports["contextual"], reports["baseline"]


def _fmt(x: float) -> str:
    return repr(float(x))


def report_csv(reports) -> str:
    """CSV with one row per (fold, method) followed by one mean row per method."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "method", "auc", "macro_auc"])
    for r in reports:
        for f, (a, ma) in enumerate(zip(r.per_fold_auc, r.per_fold_macro_auc)):
            w.writerow([f, r.method, _fmt(a), _fmt(ma)])
    for r in reports:
        w.writerow(["mean", r.method, _fmt(r.mean_auc), _fmt(r.mean_macro_auc)])
    return buf.getvalue()


def roc_csv(roc: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "fpr", "tpr"])
    for t, x, y in zip(roc.thresholds, roc.fpr, roc.tpr):
        w.writerow([_fmt(t), _fmt(x), _fmt(y)])
    return buf.getvalue()


def write_report(reports, out) -> list[Path]:
    """Write the summary CSV to ``out`` and per-fold ROC CSVs beside it."""
    out = Path(out)
    out.write_text(report_csv(reports))
    written = [out]
    for r in reports:
        for f, roc in enumerate(r.rocs):
            p = out.with_name(f"{out.stem}_roc_{r.method}_fold{f}.csv")
            p.write_text(roc_csv(roc))
            written.append(p)
    return written


def class_name(c: int, classes: int) -> str:
    return f"class{c:0{len(str(max(classes - 1, 1)))}d}"


def grating(c: int, classes: int, size: int) -> np.ndarray:
    """Noise-free sinusoidal grating for class c, intensities in [0, 255]."""
    theta = c * np.pi / classes
    freq = 0.1 + 0.02 * (c % 5)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    phase = 2 * np.pi * freq * (x * np.cos(theta) + y * np.sin(theta))
    return 127.5 + 127.5 * np.sin(phase)


def generate_synthetic_corpus(out, classes: int = 40, per_class: int = 50,
                              image_size: int = 64, noise_sigma: float = 0.05,
                              seed: int = 0) -> list[Path]:
    """Write ``classes`` x ``per_class`` noisy gratings as PGM files.

    Class c has orientation c*pi/classes and frequency 0.1 + 0.02*(c mod 5)
    cycles per pixel; Gaussian noise of std noise_sigma*255 is added before
    rounding and clamping to [0, 255].
    """
    if classes < 1 or per_class < 1 or image_size < 1:
        raise ValueError("classes, per_class and image_size must be positive")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    out = Path(out)
    rng = np.random.default_rng(seed)
    width = len(str(per_class - 1))
    paths = []
    for c in range(classes):
        d = out / class_name(c, classes)
        d.mkdir(parents=True, exist_ok=True)
        base = grating(c, classes, image_size)
        for i in range(per_class):
            img = base + rng.normal(0.0, noise_sigma * 255.0, base.shape)
            img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
            p = d / f"{i:0{width}d}.pgm"
            write_pgm(p, img)
            paths.append(p)
    return paths
