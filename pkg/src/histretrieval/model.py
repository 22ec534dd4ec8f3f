"""Trained retrieval model and its binary container.

Layout (all integers little-endian)::

    b"HSKM"  u32 version  u32 section count
    per section:
        u16 name length, UTF-8 name
        matrix sections:  u64 rows, u64 cols, rows*cols f64 (row-major)
        string sections:  u64 count, then per string u32 length + UTF-8 bytes

``ids`` and ``config`` are string sections (the config as ``key=value``
lines); ``codebook``, ``basis`` and ``coefficients`` are matrices.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, parse_config
from .errors import BadConfig, ModelLoadError

MAGIC = b"HSKM"
FORMAT_VERSION = 1
MATRIX_SECTIONS = ("codebook", "basis", "coefficients")
STRING_SECTIONS = ("ids", "config")


@dataclass(eq=False)
class RetrievalModel:
    codebook: np.ndarray      # K x D
    basis: np.ndarray         # K x R
    coefficients: np.ndarray  # R x N
    ids: list[str]
    config: PipelineConfig

    def __post_init__(self):
        K, D = self.codebook.shape
        if self.basis.shape[0] != K:
            raise ValueError(f"basis has {self.basis.shape[0]} rows, codebook has {K} words")
        if self.coefficients.shape[0] != self.basis.shape[1]:
            raise ValueError("coefficient rows do not match basis rank")
        if self.coefficients.shape[1] != len(self.ids):
            raise ValueError("coefficient columns do not match the number of ids")
        if D != self.config.patch_size ** 2:
            raise ValueError(f"codebook dimension {D} does not match patch_size "
                             f"{self.config.patch_size}")


def _matrix_bytes(name: str, M: np.ndarray) -> bytes:
    M = np.ascontiguousarray(M, dtype="<f8")
    rows, cols = M.shape
    enc = name.encode()
    return struct.pack("<H", len(enc)) + enc + struct.pack("<QQ", rows, cols) + M.tobytes()


def _strings_bytes(name: str, items: list[str]) -> bytes:
    enc = name.encode()
    out = [struct.pack("<H", len(enc)), enc, struct.pack("<Q", len(items))]
    for s in items:
        b = s.encode()
        out += [struct.pack("<I", len(b)), b]
    return b"".join(out)


def dumps(model: RetrievalModel) -> bytes:
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, 5)]
    parts.append(_matrix_bytes("codebook", model.codebook))
    parts.append(_matrix_bytes("basis", model.basis))
    parts.append(_matrix_bytes("coefficients", model.coefficients))
    parts.append(_strings_bytes("ids", model.ids))
    parts.append(_strings_bytes("config", model.config.to_text().splitlines()))
    return b"".join(parts)


def save_model(model: RetrievalModel, path) -> None:
    Path(path).write_bytes(dumps(model))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelLoadError("model file is truncated")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(data: bytes) -> RetrievalModel:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise ModelLoadError("bad magic: not an HSKM model file")
    version, count = r.unpack("<II")
    if version != FORMAT_VERSION:
        raise ModelLoadError(f"unsupported format version {version}")
    sections = {}
    for _ in range(count):
        (n,) = r.unpack("<H")
        try:
            name = r.take(n).decode()
        except UnicodeDecodeError:
            raise ModelLoadError("section name is not UTF-8") from None
        if name in MATRIX_SECTIONS:
            rows, cols = r.unpack("<QQ")
            payload = r.take(8 * rows * cols)
            sections[name] = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
        elif name in STRING_SECTIONS:
            (m,) = r.unpack("<Q")
            items = []
            for _ in range(m):
                (ln,) = r.unpack("<I")
                try:
                    items.append(r.take(ln).decode())
                except UnicodeDecodeError:
                    raise ModelLoadError(f"{name}: string is not UTF-8") from None
            sections[name] = items
        else:
            raise ModelLoadError(f"unknown section {name!r}")
    if r.pos != len(data):
        raise ModelLoadError("trailing bytes after the last section")
    missing = [s for s in MATRIX_SECTIONS + STRING_SECTIONS if s not in sections]
    if missing:
        raise ModelLoadError(f"missing sections: {', '.join(missing)}")
    try:
        config = parse_config("\n".join(sections["config"]))
        return RetrievalModel(codebook=sections["codebook"], basis=sections["basis"],
                              coefficients=sections["coefficients"],
                              ids=sections["ids"], config=config)
    except (BadConfig, ValueError) as exc:
        raise ModelLoadError(f"inconsistent model: {exc}") from None


def load_model(path) -> RetrievalModel:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelLoadError(f"cannot read model: {exc}") from None
    return loads(data)
