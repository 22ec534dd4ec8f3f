import numpy as np
import pytest

from histretrieval.cli import main
from histretrieval.config import PipelineConfig
from histretrieval.evaluation import generate_synthetic_corpus
from histretrieval.model import load_model


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "data"
    generate_synthetic_corpus(root, classes=2, per_class=30, image_size=64,
                              noise_sigma=0.05, seed=3)
    return root


@pytest.fixture(scope="module")
def noiseless(tmp_path_factory):
    root = tmp_path_factory.mktemp("clean") / "data"
    generate_synthetic_corpus(root, classes=3, per_class=6, image_size=32,
                              noise_sigma=0.0, seed=0)
    return root


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text("codebook_k=20\nnmf_rank=5\ngraph_k=4\nkmeans_max_iters=30\n")
    return p


def test_train_default_config_round_trip(corpus, tmp_path, capsys):
    out = tmp_path / "m.hskm"
    assert main(["train", "--data", str(corpus), "--model", str(out)]) == 0
    m = load_model(out)
    cfg = PipelineConfig()
    assert m.config == cfg
    assert m.codebook.shape == (cfg.codebook_k, cfg.patch_size ** 2)
    assert m.basis.shape == (cfg.codebook_k, cfg.nmf_rank)
    assert m.coefficients.shape == (cfg.nmf_rank, 60)
    assert len(m.ids) == 60

    # objective traces on stderr as iter,objective
    err = capsys.readouterr().err.splitlines()
    for label in ("kmeans", "nmf"):
        start = err.index(f"# {label}") + 2
        values = []
        for line in err[start:]:
            if line.startswith("#"):
                break
            i, v = line.split(",")
            values.append(float(v))
        assert len(values) >= 2
        assert np.all(np.diff(values) <= 1e-10 + 1e-9 * np.abs(values[:-1]))


def test_train_twice_bit_identical(noiseless, small_cfg, tmp_path):
    a, b = tmp_path / "a.hskm", tmp_path / "b.hskm"
    for p in (a, b):
        assert main(["train", "--data", str(noiseless), "--config", str(small_cfg),
                     "--model", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_train_bad_config(noiseless, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("codebook_k=10\nnmf_rank=20\n")
    assert main(["train", "--data", str(noiseless), "--config", str(cfg),
                 "--model", str(tmp_path / "m")]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("BadConfig")


def test_train_empty_dataset(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["train", "--data", str(tmp_path / "empty"), "--model", str(tmp_path / "m")]) == 3


@pytest.fixture
def clean_model(noiseless, small_cfg, tmp_path):
    out = tmp_path / "clean.hskm"
    assert main(["train", "--data", str(noiseless), "--config", str(small_cfg),
                 "--model", str(out)]) == 0
    return out


@pytest.mark.parametrize("baseline", [False, True])
def test_query_database_image(noiseless, clean_model, capsys, baseline):
    capsys.readouterr()
    img = noiseless / "class1" / "2.pgm"
    args = ["query", "--model", str(clean_model), "--image", str(img), "--top", "3"]
    assert main(args + (["--baseline"] if baseline else [])) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    r, rec_id, score = lines[0].split(",")
    assert r == "1" and rec_id.startswith("class1/")
    assert 0 <= float(score) <= 1


def test_query_top_exceeds_database(noiseless, clean_model, capsys):
    capsys.readouterr()
    assert main(["query", "--model", str(clean_model), "--image",
                 str(noiseless / "class0" / "0.pgm"), "--top", "1000"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [int(l.split(",")[0]) for l in lines] == list(range(1, 19))


def test_query_corrupt_model(noiseless, tmp_path, capsys):
    bad = tmp_path / "bad.hskm"
    bad.write_bytes(b"NOPE" + bytes(20))
    assert main(["query", "--model", str(bad), "--image",
                 str(noiseless / "class0" / "0.pgm")]) == 3
    assert capsys.readouterr().err.startswith("ModelLoadError")


def test_query_malformed_image(clean_model, tmp_path):
    img = tmp_path / "x.pgm"
    img.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    assert main(["query", "--model", str(clean_model), "--image", str(img)]) == 3


def test_evaluate_csv_shape_and_determinism(noiseless, tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("codebook_k=20\nnmf_rank=5\ngraph_k=4\nkmeans_max_iters=30\nfolds=10\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["evaluate", "--data", str(noiseless), "--config", str(cfg),
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = [l.split(",") for l in a.read_text().splitlines()]
    assert rows[0] == ["fold", "method", "auc", "macro_auc"]
    assert sum(r[1] == "contextual" and r[0] != "mean" for r in rows) == 10
    assert sum(r[1] == "baseline" and r[0] != "mean" for r in rows) == 10
    assert [r[:2] for r in rows if r[0] == "mean"] == [["mean", "contextual"], ["mean", "baseline"]]
    assert (tmp_path / "a_roc_baseline_fold9.csv").exists()


def test_evaluate_folds_one_rejected(noiseless, tmp_path):
    cfg = tmp_path / "f.cfg"
    cfg.write_text("folds=1\n")
    assert main(["evaluate", "--data", str(noiseless), "--config", str(cfg),
                 "--out", str(tmp_path / "r.csv")]) == 2


def test_evaluate_single_class(tmp_path):
    generate_synthetic_corpus(tmp_path / "one", 1, 4, 16, 0.1, seed=0)
    assert main(["evaluate", "--data", str(tmp_path / "one"),
                 "--out", str(tmp_path / "r.csv")]) == 3


def test_synth(tmp_path):
    out = tmp_path / "s"
    assert main(["synth", "--out", str(out), "--classes", "3", "--per-class", "2",
                 "--size", "16", "--noise", "0.1", "--seed", "4"]) == 0
    assert len(list(out.rglob("*.pgm"))) == 6


def test_synth_bad_arguments(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--classes", "0"]) == 2
    assert main(["synth", "--out", str(tmp_path), "--noise", "-1"]) == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
