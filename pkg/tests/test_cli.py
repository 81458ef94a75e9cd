import csv
import json
from pathlib import Path

import numpy as np
import pytest

from specflow.cli import run

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "specflow" / "configs"


def read_json(outdir, name="result.json"):
    with open(Path(outdir) / name) as fh:
        return json.load(fh)


def test_index_tanh_family(tmp_path):
    rc = run(["index", "--config", str(CONFIGS / "tanh_scalar.json"),
              "--out", str(tmp_path)])
    assert rc == 0
    assert read_json(tmp_path)["index"] == -1


def test_index_symbol_pair(tmp_path):
    rc = run(["index", "--config", str(CONFIGS / "mult2_pair.json"),
              "--out", str(tmp_path)])
    assert rc == 0
    assert read_json(tmp_path)["index"] == -2


def test_flow_writes_crossings(tmp_path):
    rc = run(["flow", "--config", str(CONFIGS / "tanh_scalar.json"),
              "--out", str(tmp_path)])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["cross"] == 1 and payload["index"] == -1
    with open(tmp_path / "crossings.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert abs(float(rows[0]["rho_j"])) < 1e-6
    assert rows[0]["contribution"] == "1"


def test_roots_command(tmp_path, symbol_config):
    rc = run(["roots", "--config", str(symbol_config), "--out", str(tmp_path),
              "--box", "-1.9", "1.9", "-6", "6"])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["total_count"] == 2
    res = sorted(r["re"] for r in payload["roots"])
    assert res == pytest.approx([-0.8060634335, 1.7092753594], abs=1e-8)


@pytest.fixture
def symbol_config(tmp_path_factory):
    cfg = {
        "n": 1, "eta": 1.95,
        "kernel": {"family": "exponential", "a": 2.0, "M": [[1.0]]},
        "shifts": [{"xi": 0.0, "A": [[-2.0]]}],
    }
    path = tmp_path_factory.mktemp("cfg") / "cubic.json"
    path.write_text(json.dumps(cfg))
    return path


def test_shock_command(tmp_path):
    rc = run(["shock", "--config", str(CONFIGS / "shock_scalar.json"),
              "--out", str(tmp_path), "--eps", "1e-3"])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["jump"][0] / 1e-3 == pytest.approx(
        payload["jump_leading_order"][0], rel=1e-3)
    with open(tmp_path / "profile.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "u1"]
    assert len(rows) > 1000


def test_shock_zero_speed_command(tmp_path):
    rc = run(["shock", "--config", str(CONFIGS / "shock_zero_speed.json"),
              "--out", str(tmp_path), "--eps", "1e-3"])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["M"] == pytest.approx(np.sqrt(np.pi) / 2, rel=1e-8)
    assert (payload["a_j0"] - payload["b_j0"]) / 1e-3 == pytest.approx(
        payload["M"], rel=1e-3)


def test_edge_command(tmp_path):
    rc = run(["edge", "--config", str(CONFIGS / "schrodinger_well.json"),
              "--out", str(tmp_path), "--eps", "0.04,0.02"])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["M_squared"] == pytest.approx(np.pi / 4, rel=1e-10)
    assert payload["intercept"] == pytest.approx(np.pi / 4, rel=0.02)


def test_specmap_small_grid(tmp_path):
    rc = run(["specmap", "--config", str(CONFIGS / "neuralfield.json"),
              "--out", str(tmp_path), "--re=1.0:2.0:3", "--im=-0.5:0.5:3",
              "--scan", "200"])
    assert rc == 0
    with open(tmp_path / "specmap.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9
    # far to the right of the spectrum every point is hyperbolic, index 0
    right = [r for r in rows if float(r["re_lambda"]) >= 1.9]
    assert right and all(r["index"] == "0" for r in right)
    # conjugate symmetry of the map for the real family
    by_point = {(round(float(r["re_lambda"]), 10),
                 round(float(r["im_lambda"]), 10)): r["index"] for r in rows}
    for (re, im), idx in by_point.items():
        assert by_point[(re, -im)] == idx


def test_specmap_jobs_deterministic(tmp_path):
    outs = []
    for jobs in (1, 2):
        out = tmp_path / f"j{jobs}"
        rc = run(["specmap", "--config", str(CONFIGS / "neuralfield.json"),
                  "--out", str(out), "--re=1.2:1.8:2", "--im=0.0:0.4:2",
                  "--jobs", str(jobs), "--scan", "200"])
        assert rc == 0
        outs.append((out / "specmap.csv").read_text())
    assert outs[0] == outs[1]


def test_missing_config_exit_code(tmp_path):
    rc = run(["index", "--config", str(tmp_path / "nope.json"),
              "--out", str(tmp_path)])
    assert rc == 2
    err = read_json(tmp_path, "error.json")
    assert err["kind"] == "configuration"


def test_invalid_schema_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"path": {"type": "mystery"}}))
    rc = run(["index", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_numerical_failure_exit_code(tmp_path):
    # family hits a crossing at the scan boundary: rejected as a
    # configuration-level error with an error report
    cfg = {"path": {"type": "rule", "n": 1, "eta": 2.0,
                    "rho_min": -0.001, "rho_max": 10.0,
                    "shift_matrix_exprs": [["tanh(rho)"]]}}
    bad = tmp_path / "boundary.json"
    bad.write_text(json.dumps(cfg))
    rc = run(["flow", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2
    assert (tmp_path / "error.json").exists()


def test_specmap_border_jump_matches_crossing_multiplicity(tmp_path):
    # scalar pencil: both limits are shifted copies of the same kernel
    # symbol, with the spectral parameter entering the zero-shift term.
    # crossing a limit's essential-spectrum border changes the index by
    # the multiplicity of the axis root that crosses there.
    import numpy as np
    from specflow.charmatrix import is_hyperbolic
    from specflow.flow import crossing_number, fredholm_index
    from specflow.kernels import exponential_kernel
    from specflow.symbols import OperatorFamily, ShiftTerm, Symbol

    def pencil(a):
        def at(lam):
            return Symbol(1, exponential_kernel(2.0, [[1.0]]),
                          (ShiftTerm(0.0, [[a + lam]]),), 1.9)
        return at

    minus_at = pencil(-0.3)    # border of this limit at lambda = -0.7
    plus_at = pencil(0.5)      # border of this limit at lambda = -1.5
    lam_left, lam_right = -0.9, -0.5
    for lam in (lam_left, lam_right):
        assert is_hyperbolic(minus_at(lam)).hyperbolic
        assert is_hyperbolic(plus_at(lam)).hyperbolic
    idx_left = fredholm_index(minus_at(lam_left), plus_at(lam_left))
    idx_right = fredholm_index(minus_at(lam_right), plus_at(lam_right))

    # transversal path of the minus limit across its border
    fam = OperatorFamily.from_rule(
        lambda rho: minus_at(lam_left + (lam_right - lam_left)
                             * 0.5 * (1 + np.tanh(rho))),
        -10.0, 10.0)
    fr = crossing_number(fam)
    assert len(fr.crossings) == 1
    assert abs(idx_right - idx_left) == fr.crossings[0].M == 1

    # locally constant between borders
    idx_left2 = fredholm_index(minus_at(-0.95), plus_at(-0.95))
    assert idx_left2 == idx_left


def test_shock_command_with_b(tmp_path):
    rc = run(["shock", "--config", str(CONFIGS / "shock_scalar.json"),
              "--out", str(tmp_path), "--eps", "1e-3", "--b", "0.001"])
    assert rc == 0
    payload = read_json(tmp_path)
    assert payload["b"] == [0.001]
