import numpy as np
import pytest

from histretrieval.ingest import write_pgm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_corpus(tmp_path):
    """a/1.pgm, a/2.pgm, b/1.pgm plus files the scanner must ignore."""
    root = tmp_path / "corpus"
    g = np.random.default_rng(0)
    for rel in ("a/1.pgm", "a/2.pgm", "b/1.pgm"):
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(p, g.integers(0, 256, (16, 16), dtype=np.uint8))
    (root / "a" / ".hidden.pgm").write_bytes(b"P5\n1 1\n255\n\x00")
    (root / "a" / "notes.txt").write_text("not an image")
    (root / ".cache").mkdir()
    write_pgm(root / ".cache" / "x.pgm", np.zeros((8, 8), np.uint8))
    (root / "stray.pgm").write_bytes(b"P5\n1 1\n255\n\x00")
    return root


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
