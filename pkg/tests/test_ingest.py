import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from histretrieval.errors import EmptyDataset, MalformedImage, PatchTooLarge
from histretrieval.evaluation import generate_synthetic_corpus
from histretrieval.ingest import (ImageRecord, decode_pgm, encode_pgm,
                                  extract_patches, load_image, scan_dataset,
                                  write_pgm)


def test_load_hand_written_2x2(tmp_path):
    p = tmp_path / "img.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    rec = load_image(p, root=tmp_path)
    assert (rec.width, rec.height) == (2, 2)
    assert rec.pixels.ravel().tolist() == [0, 255, 128, 64]
    assert rec.id == "img.pgm"


def test_header_with_comment_and_tabs():
    data = b"P5 # made by hand\n3\t1\r\n255\n" + bytes([1, 2, 3])
    assert decode_pgm(data).tolist() == [[1, 2, 3]]


@pytest.mark.parametrize("data", [
    b"P6\n2 2\n255\n" + bytes(12),          # colour
    b"P2\n1 1\n255\n0",                     # ASCII grey
    b"P5\n2 2\n65535\n" + bytes(8),         # 16-bit
    b"P5\n2 2\n15\n" + bytes(4),            # maxval != 255
    b"P5\n2 2\n255\n" + bytes(3),           # truncated payload
    b"P5\n2 x\n255\n" + bytes(4),           # junk size
    b"P5\n2 2\n255",                        # no separator byte
    b"",
])
def test_malformed_images_rejected(data):
    with pytest.raises(MalformedImage):
        decode_pgm(data)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_generator_round_trip(tmp_path):
    generate_synthetic_corpus(tmp_path, classes=1, per_class=1, image_size=64,
                              noise_sigma=0.1, seed=1)
    (path,) = tmp_path.rglob("*.pgm")
    rec = load_image(path, root=tmp_path)
    assert rec.pixels.size == 4096
    assert encode_pgm(rec.pixels) == path.read_bytes()


def test_pgm_encode_decode_identity(rng):
    img = rng.integers(0, 256, (7, 11), dtype=np.uint8)
    assert np.array_equal(decode_pgm(encode_pgm(img)), img)


def _record(pixels):
    pixels = np.asarray(pixels, dtype=np.uint8)
    return ImageRecord("x", "c", pixels, pixels.shape[1], pixels.shape[0])


def test_single_full_frame_patch(rng):
    d = extract_patches(_record(rng.integers(0, 256, (8, 8))), 8, 1)
    assert d.shape == (1, 64)


def test_patch_count_64_stride_4(rng):
    d = extract_patches(_record(rng.integers(0, 256, (64, 64))), 8, 4)
    assert d.shape == (225, 64)


def test_constant_patch_is_zero():
    d = extract_patches(_record(np.full((8, 8), 77)), 8, 1)
    assert np.all(d == 0)


def test_patch_too_large():
    with pytest.raises(PatchTooLarge):
        extract_patches(_record(np.zeros((6, 10))), 8, 1)


def test_patch_values_and_order():
    # brute-force reference: explicit loops over the grid
    img = np.arange(12 * 10, dtype=np.uint8).reshape(12, 10) * 2
    p, s = 4, 3
    got = extract_patches(_record(img), p, s)
    ref = []
    for y in range(0, 12 - p + 1, s):
        for x in range(0, 10 - p + 1, s):
            v = img[y:y + p, x:x + p].astype(float).ravel() / 255
            ref.append((v - v.mean()) / (v.std() + 1e-8))
    np.testing.assert_allclose(got, np.array(ref), rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(w=st.integers(1, 40), h=st.integers(1, 40), p=st.integers(1, 12),
       s=st.integers(1, 9), seed=st.integers(0, 2**31))
def test_patch_count_formula(w, h, p, s, seed):
    img = np.random.default_rng(seed).integers(0, 256, (h, w))
    if p > min(w, h):
        with pytest.raises(PatchTooLarge):
            extract_patches(_record(img), p, s)
        return
    d = extract_patches(_record(img), p, s)
    assert d.shape == (((w - p) // s + 1) * ((h - p) // s + 1), p * p)
    assert np.all(np.isfinite(d))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), p=st.integers(2, 10))
def test_descriptor_normalisation(seed, p):
    img = np.random.default_rng(seed).integers(0, 256, (24, 24))
    d = extract_patches(_record(img), p, 2)
    raw = np.lib.stride_tricks.sliding_window_view(img / 255.0, (p, p))[::2, ::2]
    raw_std = raw.reshape(d.shape).std(axis=1)
    ok = raw_std >= 1e-2
    assert np.all(np.abs(d.mean(axis=1)) < 1e-9)
    assert np.all(np.abs(d[ok].std(axis=1) - 1) < 1e-6)


def test_scan_tiny_corpus(tiny_corpus):
    ds = scan_dataset(tiny_corpus)
    assert [r.id for r in ds.records] == ["a/1.pgm", "a/2.pgm", "b/1.pgm"]
    assert ds.classes == ["a", "b"]
    assert [r.class_label for r in ds.records] == ["a", "a", "b"]
    assert ds.labels.tolist() == [0, 0, 1]
    assert ds.warnings == []


def test_scan_deterministic(tiny_corpus):
    a = scan_dataset(tiny_corpus)
    b = scan_dataset(tiny_corpus)
    assert [r.id for r in a.records] == [r.id for r in b.records]


def test_scan_skips_malformed(tiny_corpus):
    (tiny_corpus / "b" / "bad.pgm").write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    ds = scan_dataset(tiny_corpus)
    assert len(ds) == 3
    assert any("bad.pgm" in w for w in ds.warnings)


def test_scan_empty(tmp_path):
    with pytest.raises(EmptyDataset):
        scan_dataset(tmp_path)


def test_scan_single_class_warns(tmp_path):
    (tmp_path / "only").mkdir()
    write_pgm(tmp_path / "only" / "1.pgm", np.zeros((8, 8), np.uint8))
    ds = scan_dataset(tmp_path)
    assert ds.classes == ["only"]
    assert any("single class" in w for w in ds.warnings)
