"""Pipeline configuration and its flat ``key=value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import BadConfig


@dataclass(frozen=True)
class PipelineConfig:
    patch_size: int = 8
    stride: int = 4
    codebook_k: int = 200
    kmeans_max_iters: int = 100
    nmf_rank: int = 50
    nmf_max_iters: int = 200
    nmf_tol: float = 1e-6
    graph_k: int = 10
    transduce_iters: int = 20
    sigma_mode: str = "auto"
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        for name in ("patch_size", "stride", "codebook_k", "kmeans_max_iters",
                     "nmf_rank", "nmf_max_iters", "graph_k", "transduce_iters"):
            if getattr(self, name) < 1:
                raise BadConfig(f"{name} must be positive, got {getattr(self, name)}")
        if not self.nmf_tol > 0:
            raise BadConfig(f"nmf_tol must be positive, got {self.nmf_tol}")
        if self.nmf_rank > self.codebook_k:
            raise BadConfig(
                f"nmf_rank ({self.nmf_rank}) must not exceed codebook_k ({self.codebook_k})")
        if self.folds < 2:
            raise BadConfig(f"folds must be at least 2, got {self.folds}")
        self.sigma  # validates sigma_mode

    @property
    def sigma(self):
        """``"auto"`` or the fixed bandwidth as a float."""
        mode = self.sigma_mode.strip()
        if mode == "auto":
            return "auto"
        value = mode
        if mode.startswith("fixed(") and mode.endswith(")"):
            value = mode[len("fixed("):-1]
        try:
            s = float(value)
        except ValueError:
            raise BadConfig(f"sigma_mode must be 'auto' or a positive number, got {mode!r}") from None
        if not s > 0:
            raise BadConfig(f"fixed sigma must be positive, got {s}")
        return s

    def replace(self, **changes) -> PipelineConfig:
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n"
                       for f in dataclasses.fields(self))


def _convert(name: str, raw: str, typ):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
    except ValueError:
        raise BadConfig(f"{name}: cannot parse {raw!r} as {typ.__name__}") from None
    return raw


def parse_config(text: str) -> PipelineConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment, unknown keys are errors."""
    types = {f.name: {"int": int, "float": float, "str": str}[f.type]
             for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise BadConfig(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise BadConfig(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, types[key])
    return PipelineConfig(**values)


def load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return parse_config(Path(path).read_text())
