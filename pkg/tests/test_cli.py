"""CLI tests: document parsing, exit codes, determinism, explain."""

import json
from pathlib import Path

import pytest

from regfman.cli import explain, main

DOCS = Path(__file__).resolve().parent.parent / "docs" / "tasks"


def run_doc(tmp_path, doc, argv_extra=(), name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "report.json"
    code = main(["run", str(path), "--out", str(out), *argv_extra])
    report = json.loads(out.read_text(encoding="utf-8")) if out.exists() else None
    return code, report


def spectrum_doc(task="verify-fmanifold", **kwargs):
    doc = {
        "schema": "regfman-doc/1",
        "task": task,
        "settings": {"order": 3, "tolerance": 1e-9},
        "payload": {"spectrum": [{"re": 0.0, "im": 0.0, "size": 2}]},
    }
    doc.update(kwargs)
    return doc


class TestRun:
    def test_verify_fmanifold_passes(self, tmp_path):
        code, report = run_doc(tmp_path, spectrum_doc())
        assert code == 0
        assert report["pass"] is True
        assert report["task"] == "verify-fmanifold"
        assert all(v["pass"] for v in report["verdicts"].values())

    def test_every_example_document(self, tmp_path):
        for doc_path in sorted(DOCS.glob("*.json")):
            out = tmp_path / (doc_path.stem + ".report.json")
            code = main(["run", str(doc_path), "--out", str(out)])
            assert code == 0, doc_path
            report = json.loads(out.read_text(encoding="utf-8"))
            assert report["pass"] is True

    def test_failing_metric_exits_1(self, tmp_path):
        doc = spectrum_doc(task="verify-frobenius")
        # eta0 = t1 is not a Frobenius metric
        doc["payload"]["eta"] = [
            [
                [[[0, 1], [1.0, 0.0]]],
                [[[0, 0], [1.0, 0.0]]],
            ]
        ]
        code, report = run_doc(tmp_path, doc)
        assert code == 1
        assert report["pass"] is False
        assert report["verdicts"]["frobenius"]["pass"] is False
        # the oracle must agree with the chain verdict
        assert report["verdicts"]["oracle_agrees"]["pass"] is True

    def test_malformed_multi_index_exits_2(self, tmp_path, capsys):
        doc = spectrum_doc(task="verify-frobenius")
        doc["payload"]["eta"] = [[[[[0], [1.0, 0.0]]], []]]  # wrong index length
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        code = main(["run", str(path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "payload/eta" in err

    def test_unknown_task_exits_2(self, tmp_path, capsys):
        code, _ = run_doc(tmp_path, spectrum_doc(task="bogus"))
        assert code == 2
        assert "unknown task" in capsys.readouterr().err

    def test_repeated_eigenvalue_exits_2(self, tmp_path, capsys):
        doc = spectrum_doc()
        doc["payload"]["spectrum"] = [
            {"re": 1.0, "im": 0.0, "size": 1},
            {"re": 1.0, "im": 0.0, "size": 1},
        ]
        code, _ = run_doc(tmp_path, doc)
        assert code == 2

    def test_determinism(self, tmp_path):
        doc = spectrum_doc(task="extend-metric")
        doc["payload"] = {
            "spectrum": [{"re": 0.0, "im": 0.0, "size": 2}],
            "gram": [[0.0, 1.0], [1.0, 0.0]],
            "skew": [[-0.5, 0.0], [0.0, 0.5]],
            "weight": [3.0, 0.0],
        }
        path = tmp_path / "doc.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["run", str(path), "--out", str(out_a)]) == 0
        assert main(["run", str(path), "--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_settings_echo_round_trip(self, tmp_path):
        code, report = run_doc(tmp_path, spectrum_doc(), argv_extra=["--order", "4"])
        assert code == 0
        assert report["settings"]["order"] == 4
        # re-run with the echoed settings: same verdicts
        doc = spectrum_doc()
        doc["settings"] = report["settings"]
        code2, report2 = run_doc(tmp_path, doc, name="again.json")
        assert code2 == 0
        assert report2["verdicts"] == report["verdicts"]

    def test_env_tolerance_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("REGFMAN_TOL", "1e-3")
        doc = spectrum_doc()
        del doc["settings"]["tolerance"]
        code, report = run_doc(tmp_path, doc)
        assert code == 0
        assert report["settings"]["tolerance"] == pytest.approx(1e-3)

    def test_stdin_input(self, tmp_path, capsys, monkeypatch):
        import io

        doc = spectrum_doc()
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(doc)))
        code = main(["run", "-"])
        assert code == 0
        out = capsys.readouterr().out
        assert json.loads(out)["pass"] is True

    def test_provenance_surfaces_clustering(self, tmp_path):
        _, report = run_doc(tmp_path, spectrum_doc())
        assert "eigenvalue_clustering" in report["provenance"]

    def test_explicit_model_round_trip(self, tmp_path):
        # serialize a canonical model through standard-model, feed it back
        # as an explicit model payload
        doc = spectrum_doc(task="standard-model")
        code, report = run_doc(tmp_path, doc)
        assert code == 0
        explicit = {
            "schema": "regfman-doc/1",
            "task": "verify-fmanifold",
            "settings": {"order": 3, "tolerance": 1e-9},
            "payload": {"model": report["model"]},
        }
        code2, report2 = run_doc(tmp_path, explicit, name="explicit.json")
        assert code2 == 0
        assert report2["pass"] is True

    def test_potential_payload(self, tmp_path):
        doc = spectrum_doc(task="verify-frobenius")
        # H = t0 t1 + t1 + t1^2/2: eta = (t1 + 1 + ..., t0 + 1 + t1)?
        # use H = t1 + t1^2/2 -> eta = (0, 1 + t1): the flat family
        doc["payload"]["potential"] = [
            [[0, 1], [1.0, 0.0]],
            [[0, 2], [0.5, 0.0]],
        ]
        code, report = run_doc(tmp_path, doc)
        assert code == 0
        assert report["verdicts"]["frobenius"]["pass"] is True

    def test_germ_iso_mismatch_exits_2(self, tmp_path, capsys):
        doc = {
            "schema": "regfman-doc/1",
            "task": "germ-iso",
            "settings": {"order": 3},
            "payload": {
                "model_a": {"spectrum": [{"re": 0.0, "im": 0.0, "size": 2}]},
                "model_b": {"spectrum": [{"re": 1.0, "im": 0.0, "size": 2}]},
            },
        }
        code, _ = run_doc(tmp_path, doc)
        assert code == 2
        assert "conjugate" in capsys.readouterr().err


class TestExplain:
    def test_known_tasks(self):
        text = explain("verify-frobenius")
        assert "darboux_egoroff" in text
        text = explain("extend-metric")
        assert "origin_match" in text

    def test_unknown_task(self):
        from regfman.errors import DocumentError

        with pytest.raises(DocumentError):
            explain("bogus")

    def test_cli_explain_exit_codes(self, capsys):
        assert main(["explain", "symmetries"]) == 0
        assert main(["explain", "bogus"]) == 2
