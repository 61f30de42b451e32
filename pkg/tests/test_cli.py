"""CLI contract tests: subcommands, exit codes, report determinism."""

import json

import pytest

from selink.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, detect_ypq, main
from selink.cone import ConeSpec, orthant_cone, ypq_cone


@pytest.fixture()
def y21_file(tmp_path):
    path = tmp_path / "y21.json"
    assert main(["ypq", "2", "1", "-o", str(path)]) == EXIT_OK
    return str(path)


@pytest.fixture()
def orthant_file(tmp_path):
    path = tmp_path / "orthant.json"
    cone = orthant_cone(3)
    path.write_text(json.dumps({"dim": 3, "normals": [list(n) for n in cone.normals]}))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestValidateCommand:
    def test_orthant_ok(self, capsys, orthant_file):
        code, out = run(capsys, ["validate", orthant_file])
        assert code == EXIT_OK
        assert json.loads(out)["validation"]["passed"]

    def test_y21_ok(self, capsys, y21_file):
        code, out = run(capsys, ["validate", y21_file])
        assert code == EXIT_OK

    def test_non_primitive_fails_with_witness(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 3, "normals": [[2, 4, 6], [0, 1, 0], [0, 0, 1]]}))
        code, out = run(capsys, ["validate", str(path)])
        assert code == EXIT_FAIL
        report = json.loads(out)
        checks = {c["name"]: c for c in report["validation"]["checks"]}
        assert not checks["primitive"]["passed"]
        assert checks["primitive"]["witness"]["normal"] == [2, 4, 6]

    def test_parse_error_exit_2(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, out = run(capsys, ["validate", str(path)])
        assert code == EXIT_INPUT

    def test_schema_error_exit_2(self, capsys, tmp_path):
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"dim": 3}))
        code, _ = run(capsys, ["validate", str(path)])
        assert code == EXIT_INPUT

    def test_missing_file_exit_2(self, capsys):
        code, _ = run(capsys, ["validate", "/nonexistent/cone.json"])
        assert code == EXIT_INPUT


class TestYpqCommand:
    def test_writes_y21(self, capsys):
        code, out = run(capsys, ["ypq", "2", "1"])
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["normals"] == [[1, 0, 0], [1, 0, 1], [1, 2, 2], [1, 1, 0]]
        assert payload["name"] == "Y(2,1)"

    def test_writes_y32(self, capsys):
        code, out = run(capsys, ["ypq", "3", "2"])
        assert json.loads(out)["normals"] == [[1, 0, 0], [1, 0, 1], [1, 3, 3], [1, 1, 0]]

    def test_rejects_non_coprime(self, capsys):
        code, _ = run(capsys, ["ypq", "2", "2"])
        assert code == EXIT_INPUT


class TestDetect:
    def test_round_trip_all_small_pairs(self):
        import math

        for p in range(2, 8):
            for q in range(1, p):
                if math.gcd(p, q) != 1:
                    continue
                assert detect_ypq(ypq_cone(p, q)) == (p, q)

    def test_orthant_not_detected(self):
        assert detect_ypq(orthant_cone(3)) is None

    def test_permuted_normals_detected(self):
        cone = ypq_cone(3, 1)
        permuted = ConeSpec(3, tuple(reversed(cone.normals)))
        assert detect_ypq(permuted) == (3, 1)


class TestPipelineCommand:
    def test_y21_closed_form_passes(self, capsys, y21_file):
        code, out = run(
            capsys, ["pipeline", y21_file, "--reeb", "closed", "--samples", "500", "--seed", "7"]
        )
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["verification"]["passed"]
        assert report["classification"]["quotient"] == "torus"
        assert report["deck_group"]["flow_agreement"] is True
        table = report["deck_group"]["published_table_agreement"]
        assert table is not None and table["agree"] is False
        assert report["flat_special"] is None

    def test_orthant_defaults_include_flat_check(self, capsys, orthant_file):
        code, out = run(capsys, ["pipeline", orthant_file, "--samples", "100"])
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["flat_special"]["passed"]
        assert report["reeb"]["provenance"] == "minimized"

    def test_tolerance_below_float_floor_fails(self, capsys, y21_file):
        code, out = run(
            capsys,
            ["pipeline", y21_file, "--reeb", "closed", "--samples", "100", "--tol", "1e-15"],
        )
        assert code == EXIT_FAIL
        report = json.loads(out)
        assert not report["verification"]["passed"]

    def test_closed_form_rejected_off_family(self, capsys, orthant_file):
        code, _ = run(capsys, ["pipeline", orthant_file, "--reeb", "closed"])
        assert code == EXIT_INPUT

    def test_invalid_cone_partial_report(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "normals": [[1, 0], [-1, 0]]}))
        code, out = run(capsys, ["pipeline", str(path)])
        assert code == EXIT_FAIL
        report = json.loads(out)
        assert not report["validation"]["passed"]
        assert "verification" not in report

    def test_byte_determinism(self, capsys, y21_file):
        argv = ["pipeline", y21_file, "--reeb", "closed", "--samples", "120", "--seed", "5"]
        _, first = run(capsys, argv)
        _, second = run(capsys, argv)
        assert first == second

    def test_worker_env_does_not_change_bytes(self, capsys, y21_file, monkeypatch):
        argv = ["pipeline", y21_file, "--reeb", "closed", "--samples", "80", "--seed", "5"]
        _, first = run(capsys, argv)
        monkeypatch.setenv("SELINK_WORKERS", "4")
        _, second = run(capsys, argv)
        assert first == second

    def test_bad_worker_env_exit_2(self, capsys, y21_file, monkeypatch):
        monkeypatch.setenv("SELINK_WORKERS", "zero")
        code, _ = run(capsys, ["pipeline", y21_file])
        assert code == EXIT_INPUT

    def test_dump_samples(self, capsys, y21_file, tmp_path):
        dump = tmp_path / "samples.json"
        code, _ = run(
            capsys,
            [
                "pipeline",
                y21_file,
                "--reeb",
                "closed",
                "--samples",
                "50",
                "--dump-samples",
                str(dump),
            ],
        )
        assert code == EXIT_OK
        payload = json.loads(dump.read_text())
        assert payload["count"] == 50
        assert len(payload["points"]) == 50
        assert max(payload["residuals"]) < 1e-10
