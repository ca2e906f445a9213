import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from litclust.cli import main
from litclust.corpus import Corpus, Document, save_jsonl

DATA = Path(__file__).parent / "data"

TOPIC_GENES = ["brca1", "tp53", "her2", "esr1"]


def gene_corpus(seed=0, docs_per_topic=25):
    """Planted 4-topic corpus with topic-specific gene mentions."""
    rng = np.random.default_rng(seed)
    docs = []
    for t in range(4):
        vocab = [f"topic{t}term{i:02d}" for i in range(20)]
        for j in range(docs_per_topic):
            words = list(rng.choice(vocab, size=20))
            words += [TOPIC_GENES[t], TOPIC_GENES[t]]
            docs.append(
                Document(id=f"d{t}{j:03d}", text=" ".join(words), label=f"class{t}")
            )
    return Corpus(docs)


@pytest.fixture()
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    save_jsonl(gene_corpus(), tmp_path / "corpus.jsonl")
    config = {
        "corpus": "corpus.jsonl",
        "dictionary": str(DATA / "dictionary_10.json"),
        "out": "out",
        "seed": 3,
        "restarts": 3,
    }
    (tmp_path / "config.json").write_text(json.dumps(config), encoding="utf-8")
    return tmp_path


def run_cli(*argv):
    return main(list(argv))


class TestIngest:
    def test_writes_canonical_corpus_and_manifest(self, workspace, capsys):
        assert run_cli("ingest", "--config", "config.json") == 0
        out = workspace / "out"
        assert (out / "corpus.jsonl").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert "corpus.jsonl" in manifest["artifacts"]
        assert manifest["seed"] == 3

    def test_missing_corpus_exits_2_without_artifacts(self, workspace, capsys):
        code = run_cli("ingest", "--corpus", "nope.jsonl", "--out", "fresh")
        assert code == 2
        assert not (workspace / "fresh").exists()

    def test_json_output_mode(self, workspace, capsys):
        assert run_cli("ingest", "--config", "config.json", "--json") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["command"] == "ingest"
        assert payload["documents"] == 100

    def test_pubmed_xml_ingest(self, workspace):
        code = run_cli(
            "ingest",
            "--corpus", str(DATA / "pubmed_two_records.xml"),
            "--corpus-format", "pubmed_xml",
            "--out", "xmlout",
        )
        assert code == 0
        lines = (workspace / "xmlout" / "corpus.jsonl").read_text().splitlines()
        assert len(lines) == 2


class TestStages:
    def test_vectorize_artifacts(self, workspace):
        assert run_cli("vectorize", "--config", "config.json") == 0
        out = workspace / "out"
        for name in ("counts.mtx", "weights.mtx", "vocabulary.tsv"):
            assert (out / name).exists()

    def test_embed_artifact(self, workspace):
        assert run_cli("embed", "--config", "config.json") == 0
        lines = (workspace / "out" / "embedding.tsv").read_text().splitlines()
        assert len(lines) == 100
        assert len(lines[0].split("\t")) == 16  # id + 15 dims

    def test_cluster_then_evaluate_staged(self, workspace, capsys):
        assert run_cli("cluster", "--config", "config.json") == 0
        assert (workspace / "out" / "assignments.tsv").exists()
        assert run_cli("evaluate", "--config", "config.json", "--json") == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert payload["v_measure"] >= 0.95
        metrics = json.loads((workspace / "out" / "metrics.json").read_text())
        assert metrics["v_measure"] == pytest.approx(payload["v_measure"])

    def test_evaluate_standalone_matches_staged(self, workspace, capsys):
        run_cli("cluster", "--config", "config.json")
        run_cli("evaluate", "--config", "config.json")
        staged = (workspace / "out" / "metrics.json").read_text()
        run_cli("evaluate", "--config", "config.json", "--out", "solo")
        solo = (workspace / "solo" / "metrics.json").read_text()
        assert solo == staged

    def test_flag_overrides_config(self, workspace, capsys):
        assert run_cli("cluster", "--config", "config.json", "--k", "2", "--json") == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert payload["k"] == 2

    def test_rerun_manifest_identical(self, workspace):
        run_cli("evaluate", "--config", "config.json")
        first = (workspace / "out" / "manifest.json").read_bytes()
        run_cli("evaluate", "--config", "config.json")
        assert (workspace / "out" / "manifest.json").read_bytes() == first


class TestProbeExport:
    def test_probe_writes_report_and_network(self, workspace, capsys):
        run_cli("cluster", "--config", "config.json")
        assert run_cli("probe", "--config", "config.json", "--json") == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert payload["clusters"] == 4
        out = workspace / "out"
        assert (out / "probe_report.json").exists()
        assert (out / "network.graphml").exists()
        report = json.loads((out / "probe_report.json").read_text())
        assert set(report["entity_globals"]) == {"brca1", "tp53", "erbb2", "esr1"}

    def test_probe_molecular_mode(self, workspace):
        run_cli("cluster", "--config", "config.json")
        code = run_cli("probe", "--config", "config.json", "--mode", "molecular")
        assert code == 0

    def test_export_reformats_report(self, workspace):
        run_cli("cluster", "--config", "config.json")
        run_cli("probe", "--config", "config.json")
        assert run_cli("export", "--config", "config.json", "--format", "dot") == 0
        dot = (workspace / "out" / "network.dot").read_bytes()
        assert dot.startswith(b"graph clusters {")

    def test_probe_without_dictionary_exits_2(self, workspace):
        assert run_cli("probe", "--corpus", "corpus.jsonl") == 2


class TestSweepCommand:
    def sweep_config(self, workspace, **sweep_overrides):
        config = json.loads((workspace / "config.json").read_text())
        config["sweep"] = {
            "d_values": [0.5],
            "r_values": [5],
            "n_values": [5, 10],
            "k_values": [2, 4],
            "budget": 4,
            **sweep_overrides,
        }
        (workspace / "config.json").write_text(json.dumps(config))

    def test_budgeted_sweep_artifacts(self, workspace):
        self.sweep_config(workspace)
        assert run_cli("sweep", "--config", "config.json") == 0
        out = workspace / "out"
        rows = [json.loads(l) for l in (out / "rows.jsonl").read_text().splitlines()]
        assert len(rows) == 4
        report = (out / "report.md").read_text()
        assert report.startswith("| D | R | N | K |")
        curve = (out / "vk_curve.tsv").read_text().splitlines()
        assert curve[0] == "k\tv_measure"
        assert len(curve) == 3  # header + k in {2, 4}

    def test_budget_extension_reuses_checkpoint(self, workspace):
        self.sweep_config(workspace, budget=2)
        assert run_cli("sweep", "--config", "config.json") == 0
        first_two = (workspace / "out" / "rows.jsonl").read_text().splitlines()
        self.sweep_config(workspace, budget=4)
        assert run_cli("sweep", "--config", "config.json") == 0
        all_four = (workspace / "out" / "rows.jsonl").read_text().splitlines()
        assert len(first_two) == 2
        assert len(all_four) == 4
        assert all_four[:2] == first_two

    def test_stale_checkpoint_from_other_seed_rejected(self, workspace):
        self.sweep_config(workspace)
        assert run_cli("sweep", "--config", "config.json") == 0
        assert run_cli("sweep", "--config", "config.json", "--seed", "99") == 2
        # A fresh output directory is fine.
        assert run_cli("sweep", "--config", "config.json", "--seed", "99",
                       "--out", "out2") == 0


class TestComposition:
    def test_staged_metrics_equal_sweep_row(self, workspace):
        """cluster + evaluate at fixed parameters reproduce the sweep's
        numbers for the same combination and seed."""
        config = json.loads((workspace / "config.json").read_text())
        config.update(
            {"restarts": 1, "n_dims": 10, "out": "staged",
             "sweep": {"d_values": [0.5], "r_values": [5], "n_values": [10],
                        "k_values": [4], "restarts": 1}}
        )
        (workspace / "config.json").write_text(json.dumps(config))
        assert run_cli("cluster", "--config", "config.json") == 0
        assert run_cli("evaluate", "--config", "config.json") == 0
        staged = json.loads((workspace / "staged" / "metrics.json").read_text())

        assert run_cli("sweep", "--config", "config.json", "--out", "swept") == 0
        rows = [
            json.loads(l)
            for l in (workspace / "swept" / "rows.jsonl").read_text().splitlines()
        ]
        row = next(r for r in rows if (r["d"], r["r"], r["n"], r["k"]) == (0.5, 5, 10, 4))
        assert row["v_measure"] == pytest.approx(staged["v_measure"], abs=1e-12)
        assert row["homogeneity"] == pytest.approx(staged["homogeneity"], abs=1e-12)
        assert row["completeness"] == pytest.approx(staged["completeness"], abs=1e-12)


class TestExitCodes:
    def test_invalid_config_json(self, workspace):
        (workspace / "bad.json").write_text("{oops", encoding="utf-8")
        assert run_cli("ingest", "--config", "bad.json") == 2

    def test_unknown_config_key(self, workspace):
        (workspace / "bad.json").write_text('{"bogus_key": 1}', encoding="utf-8")
        assert run_cli("ingest", "--config", "bad.json", "--corpus", "corpus.jsonl") == 2

    @pytest.mark.parametrize(
        "key,value",
        [
            ("network_format", "gexf"),
            ("probe_mode", "fuzzy"),
            ("corpus_format", "parquet"),
            ("k", "four"),
            ("d", "half"),
            ("sweep", [1, 2]),
        ],
    )
    def test_bad_config_values_exit_2(self, workspace, key, value):
        config = json.loads((workspace / "config.json").read_text())
        config[key] = value
        (workspace / "bad.json").write_text(json.dumps(config), encoding="utf-8")
        assert run_cli("ingest", "--config", "bad.json") == 2

    def test_explicit_missing_assignments_exit_3(self, workspace):
        code = run_cli(
            "evaluate", "--config", "config.json", "--assignments", "absent.tsv"
        )
        assert code == 3

    def test_data_error_exit_3(self, workspace):
        unlabeled = Corpus([Document(id="a", text="some words here"),
                            Document(id="b", text="other words there")])
        save_jsonl(unlabeled, workspace / "unlabeled.jsonl")
        code = run_cli(
            "evaluate", "--corpus", "unlabeled.jsonl", "--out", "u",
            "--d", "0.1", "--n-dims", "1", "--k", "2", "--allow-out-of-bounds",
        )
        assert code == 3

    def test_compute_error_exit_4(self, workspace):
        code = run_cli(
            "cluster", "--config", "config.json", "--k", "500",
            "--allow-out-of-bounds", "--out", "big",
        )
        assert code == 4


def test_end_to_end_determinism(tmp_path, monkeypatch):
    """Same config, two fresh directories: byte-identical artifacts."""
    outputs = []
    for run in ("one", "two"):
        root = tmp_path / run
        root.mkdir()
        monkeypatch.chdir(root)
        save_jsonl(gene_corpus(), root / "corpus.jsonl")
        config = {
            "corpus": "corpus.jsonl",
            "dictionary": str(DATA / "dictionary_10.json"),
            "out": "out",
            "seed": 9,
            "restarts": 2,
        }
        (root / "config.json").write_text(json.dumps(config), encoding="utf-8")
        for command in ("ingest", "vectorize", "embed", "cluster", "evaluate", "probe"):
            assert main([command, "--config", "config.json"]) == 0
        outputs.append(root / "out")
    for name in ("manifest.json", "metrics.json", "network.graphml",
                  "assignments.tsv", "embedding.tsv", "weights.mtx"):
        a = (outputs[0] / name).read_bytes()
        b = (outputs[1] / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_config_defaults_are_baseline_preset():
    from litclust.cli import PipelineConfig
    from litclust.sweep import BASELINE_PRESET

    cfg = PipelineConfig()
    assert cfg.d == BASELINE_PRESET["d"]
    assert cfg.r == BASELINE_PRESET["r"]
    assert cfg.n_dims == BASELINE_PRESET["n_dims"]
    assert cfg.k == BASELINE_PRESET["k"]


def test_probe_full_flag_grammar(workspace):
    run_cli("cluster", "--config", "config.json")
    code = run_cli(
        "probe",
        "--corpus", "corpus.jsonl",
        "--assignments", "out/assignments.tsv",
        "--dict", str(DATA / "dictionary_10.json"),
        "--mode", "gene",
        "--top", "5",
        "--format", "graphml",
        "--out", "out",
    )
    assert code == 0
    assert (workspace / "out" / "network.graphml").exists()


def test_module_entrypoint_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "litclust", "--help"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    assert "ingest" in proc.stdout
    assert "sweep" in proc.stdout
