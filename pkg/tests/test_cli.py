import json

import pytest

from gpbose.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    Report,
    emit_report,
    main,
    parse_config,
    validate,
)
from gpbose.errors import ParseError, ValidationError

DETERMINISM_RUNS = [
    ["bogo", "dispersion", "--a", "0.3", "--shells", "6"],
    ["bogo", "spectrum", "--a", "0.1", "--zeta", "130"],
    ["oracle", "random-pairs", "--count", "3", "--nmax", "30", "--seed", "7"],
    ["scatter", "dyson", "--trials", "5", "--seed", "3", "--grid_points", "1024"],
    ["scatter", "length", "--potential", "square-well", "--V0", "4", "--R", "0.5", "--profile", "true"],
    ["ideal", "sweep", "--rho", "1", "--beta_min", "0.05", "--beta_max", "0.3", "--n_beta", "4", "--L", "4"],
    ["gp-min", "torus", "--dim", "2", "--n", "16", "--a", "0.2", "--seed", "5"],
    ["tdgp", "evolve", "--n", "32", "--X", "6", "--coupling", "5", "--n_steps", "20", "--stride", "10",
     "--release", "true"],
]


def files_of(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_minimal_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "scatter", "potential": "hard-core", "R": 0.5}))
    cfg = parse_config(path)
    assert cfg.command == "scatter" and cfg.action == "length" and cfg.parameters["R"] == 0.5


def test_key_value_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# bogoliubov energy\ncommand = bogo\naction = energy\nN = 100\na = 0.1  # length\n")
    cfg = parse_config(path)
    assert cfg.parameters["N"] == 100 and cfg.parameters["a"] == 0.1


def test_validation_collects_every_violation():
    with pytest.raises(ValidationError) as err:
        validate({"command": "scatter", "potential": "hard-core", "R": -1.0, "foo": 3, "grid_points": "x"})
    keys = {k for k, _ in err.value.violations}
    assert keys == {"R", "foo", "grid_points"}


def test_missing_and_cross_field_errors():
    with pytest.raises(ValidationError) as err:
        validate({"command": "scatter", "potential": "square-well", "R": 1.0})
    assert [k for k, _ in err.value.violations] == ["V0"]
    with pytest.raises(ValidationError):
        validate({"command": "oracle", "action": "pair", "D": 1.0, "B": 2.0})


def test_parse_errors_carry_location(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("command = bogo\nthis line is broken\n")
    with pytest.raises(ParseError) as err:
        parse_config(bad)
    assert err.value.line == 2
    dup = tmp_path / "dup.cfg"
    dup.write_text("command = bogo\na = 1\na = 2\n")
    with pytest.raises(ParseError) as err:
        parse_config(dup)
    assert err.value.key == "a"
    js = tmp_path / "bad.json"
    js.write_text('{"command": "bogo",\n "a": }')
    with pytest.raises(ParseError) as err:
        parse_config(js)
    assert err.value.line == 2


def test_exit_codes(tmp_path, capsys):
    assert main(["scatter", "--potential", "hard-core", "--R", "-1", "--output_dir", str(tmp_path)]) == EXIT_CONFIG
    out = tmp_path / "num"
    code = main(["bogo", "spectrum", "--a", "0", "--zeta", "1e4", "--mode_budget", "10", "--output_dir", str(out)])
    assert code == EXIT_NUMERICAL
    assert json.loads((out / "error.json").read_text())["type"] == "ThresholdTooLarge"
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["bogo", "dispersion", "--a", "0", "--output_dir", str(blocker / "sub")]) == EXIT_IO
    capsys.readouterr()


def test_dispersion_csv_free(tmp_path):
    assert main(["bogo", "dispersion", "--a", "0", "--shells", "3", "--output_dir", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "dispersion.csv").read_text().splitlines()
    assert rows[0] == "abs_p,eps" and len(rows) == 4
    vals = [tuple(map(float, r.split(","))) for r in rows[1:]]
    assert all(e == pytest.approx(p * p, rel=1e-15) for p, e in vals)
    assert [p for p, _ in vals] == sorted(p for p, _ in vals)


def test_oracle_pair_json(tmp_path):
    assert main(["oracle", "pair", "--D", "50", "--B", "10", "--nmax", "60", "--output_dir", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "result.json").read_text())
    assert abs(res["gap_exact"] - res["eps_symplectic"]) == pytest.approx(abs(res["gap_difference"]))
    assert abs(res["gap_difference"]) <= 1e-6


def test_manifest_and_env_override(tmp_path, monkeypatch):
    target = tmp_path / "env"
    monkeypatch.setenv("GPBOSE_OUTPUT_DIR", str(target))
    assert main(["bogo", "depletion", "--a", "0.1", "--output_dir", str(tmp_path / "ignored")]) == 0
    manifest = json.loads((target / "manifest.json").read_text())
    assert manifest["config"]["parameters"]["a"] == 0.1
    assert len(manifest["config_sha256"]) == 64
    assert "fock.identity" in manifest["tolerances"] and "numpy" in manifest["versions"]
    assert manifest["files"] == ["result.json"]
    # the manifest is enough to repeat the run
    cfg = manifest["config"]
    again = validate({"command": cfg["command"], "action": cfg["action"], "seed": cfg["seed"],
                      **cfg["parameters"]})
    assert again.sha256() == manifest["config_sha256"]


def test_empty_report_writes_manifest_only(tmp_path):
    cfg = validate({"command": "bogo", "a": 0.0, "output_dir": str(tmp_path)})
    manifest = emit_report(cfg, Report(tmp_path))
    assert manifest["files"] == [] and [p.name for p in tmp_path.iterdir()] == ["manifest.json"]


def test_tdgp_manifest_lists_snapshots(tmp_path):
    args = DETERMINISM_RUNS[-1] + ["--output_dir", str(tmp_path)]
    assert main(args) == 0
    res = json.loads((tmp_path / "result.json").read_text())
    assert [s["time"] for s in res["snapshots"]] == pytest.approx([0.0, 0.01, 0.02])
    listed = json.loads((tmp_path / "manifest.json").read_text())["files"]
    assert all(s["file"] in listed for s in res["snapshots"])


@pytest.mark.parametrize("args", DETERMINISM_RUNS, ids=lambda a: "-".join(a[:2]))
def test_byte_identical_reruns(tmp_path, args, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--output_dir", str(first)]) == 0
    assert main(args + ["--output_dir", str(second)]) == 0
    capsys.readouterr()
    assert files_of(first) == files_of(second)


def test_flags_override_config_file(tmp_path, capsys):
    path = tmp_path / "e.cfg"
    path.write_text("command = bogo\naction = depletion\na = 0.1\n")
    out = tmp_path / "out"
    assert main(["--config", str(path), "--a", "0.2", "--output_dir", str(out)]) == EXIT_OK
    assert json.loads((out / "manifest.json").read_text())["config"]["parameters"]["a"] == 0.2
    capsys.readouterr()
