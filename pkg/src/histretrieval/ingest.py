"""Grayscale PGM loading, corpus scanning and dense patch descriptors."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDataset, MalformedImage, PatchTooLarge

IMAGE_EXTENSIONS = (".pgm",)
_WHITESPACE = b" \t\n\r\x0b\x0c"
_STD_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class ImageRecord:
    """One grayscale image. ``pixels`` has shape (height, width), dtype uint8."""

    id: str
    class_label: str
    pixels: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width):
            raise MalformedImage(
                f"{self.id}: pixel grid {self.pixels.shape} does not match "
                f"{self.height}x{self.width}")


@dataclass
class LabeledDataset:
    records: list[ImageRecord]
    classes: list[str]
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def labels(self) -> np.ndarray:
        """Integer class index of every record, aligned with ``records``."""
        index = {c: i for i, c in enumerate(self.classes)}
        return np.array([index[r.class_label] for r in self.records], dtype=np.int64)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # header tokens are separated by whitespace; '#' starts a comment to end of line
    n = len(data)
    while pos < n:
        if data[pos] in _WHITESPACE:
            pos += 1
        elif data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedImage("truncated PGM header")
    return data[start:pos], pos


def decode_pgm(data: bytes, name: str = "<bytes>") -> np.ndarray:
    """Decode a binary 8-bit PGM (P5) payload into a (height, width) uint8 array."""
    if data[:2] != b"P5":
        raise MalformedImage(f"{name}: bad magic {data[:2]!r}, expected b'P5'")
    pos = 2
    values = []
    try:
        for _ in range(3):
            tok, pos = _read_token(data, pos)
            values.append(int(tok))
    except (MalformedImage, ValueError) as exc:
        raise MalformedImage(f"{name}: unreadable header ({exc})") from None
    width, height, maxval = values
    if width <= 0 or height <= 0:
        raise MalformedImage(f"{name}: non-positive size {width}x{height}")
    if maxval != 255:
        raise MalformedImage(f"{name}: maxval {maxval} is not 255")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise MalformedImage(f"{name}: missing separator after maxval")
    pos += 1
    size = width * height
    payload = data[pos:pos + size]
    if len(payload) != size:
        raise MalformedImage(
            f"{name}: truncated payload ({len(payload)} of {size} bytes)")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(pixels: np.ndarray) -> bytes:
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError("expected a 2-D grayscale array")
    if pixels.dtype != np.uint8:
        if pixels.min() < 0 or pixels.max() > 255:
            raise ValueError("pixel values must lie in [0, 255]")
        pixels = pixels.astype(np.uint8)
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(pixels).tobytes()


def write_pgm(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm(pixels))


def load_image(path, root=None, class_label: str | None = None) -> ImageRecord:
    """Read a P5 PGM file.

    The record id is ``path`` relative to ``root`` (posix separators) when a
    root is given, otherwise the path as passed. The class label defaults to
    the name of the parent directory.
    """
    path = Path(path)
    data = path.read_bytes()  # FileNotFoundError propagates
    pixels = decode_pgm(data, str(path))
    if root is not None:
        rec_id = path.relative_to(root).as_posix()
    else:
        rec_id = path.as_posix()
    if class_label is None:
        class_label = path.parent.name
    h, w = pixels.shape
    return ImageRecord(id=rec_id, class_label=class_label, pixels=pixels,
                       width=w, height=h)


def patch_grid_shape(width: int, height: int, patch_size: int, stride: int) -> tuple[int, int]:
    """Number of patch positions along (y, x)."""
    return (height - patch_size) // stride + 1, (width - patch_size) // stride + 1


def extract_patches(image: ImageRecord | np.ndarray, patch_size: int = 8,
                    stride: int = 4) -> np.ndarray:
    """Dense contrast-normalised patches on a regular grid.

    Returns an array of shape (n_patches, patch_size**2), rows ordered
    row-major over the grid positions. Each row is the patch scaled to
    [0, 1], mean-subtracted and divided by (std + 1e-8).
    """
    pixels = image.pixels if isinstance(image, ImageRecord) else np.asarray(image)
    if patch_size < 1 or stride < 1:
        raise ValueError("patch_size and stride must be positive")
    h, w = pixels.shape
    if patch_size > min(h, w):
        raise PatchTooLarge(f"patch_size {patch_size} exceeds image extent {w}x{h}")
    x = pixels.astype(np.float64) / 255.0
    windows = np.lib.stride_tricks.sliding_window_view(x, (patch_size, patch_size))
    windows = windows[::stride, ::stride]
    patches = windows.reshape(-1, patch_size * patch_size)
    mean = patches.mean(axis=1, keepdims=True)
    centered = patches - mean
    std = np.sqrt(np.mean(centered ** 2, axis=1, keepdims=True))
    return centered / (std + _STD_EPS)


def _is_hidden(name: str) -> bool:
    return name.startswith(".")


def scan_dataset(root) -> LabeledDataset:
    """Load every ``<root>/<class>/<image>.pgm`` into a deterministic dataset.

    Hidden entries and files with other extensions are skipped. Unreadable
    images are skipped with a warning; a corpus with no readable image raises
    EmptyDataset.
    """
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"{root} is not a directory")
    records = []
    warnings = []
    for class_dir in sorted(os.scandir(root), key=lambda e: e.name):
        if _is_hidden(class_dir.name) or not class_dir.is_dir():
            continue
        for entry in sorted(os.scandir(class_dir.path), key=lambda e: e.name):
            if _is_hidden(entry.name) or not entry.is_file():
                continue
            if os.path.splitext(entry.name)[1].lower() not in IMAGE_EXTENSIONS:
                continue
            try:
                records.append(load_image(entry.path, root=root,
                                          class_label=class_dir.name))
            except MalformedImage as exc:
                warnings.append(f"skipped unreadable image: {exc}")
    if not records:
        raise EmptyDataset(f"no readable images under {root}")
    records.sort(key=lambda r: r.id)
    classes = sorted({r.class_label for r in records})
    if len(classes) < 2:
        warnings.append(
            f"single class {classes[0]!r}: retrieval evaluation needs at least 2 classes")
    return LabeledDataset(records=records, classes=classes, warnings=warnings)
