"""End-to-end checks of the python bindings against known closed forms."""

import json
import math
import os

import pytest

import fracmeas as fm


def pair_operator(N=243):
    mu0 = fm.VectorMeasure.dirac(0.0, [0.0, 0.25], 2, N)
    return fm.MarkovOperator.build(
        "H2",
        [
            (1 / 3, 0.0, [[0.1, 0.0], [0.2, 0.1]]),
            (1 / 3, 2 / 3, [[0.1, 0.0], [0.2, -0.1]]),
        ],
        mu0=mu0,
    )


def test_bounds_match_the_norm_sum():
    b = pair_operator().bounds()
    e = (1 + math.sqrt(2)) / 5
    assert abs(b["e"] - e) < 1e-12
    assert abs(b["c"] - e / 3) < 1e-12
    assert abs(b["d"] - 4 * e / 3) < 1e-12
    assert b["contracts_variation"] and b["contracts_mk"] and b["contracts_mk_star"]


def test_solve_reaches_the_atomic_fixed_point():
    mu, report = fm.solve(pair_operator(), tol=1e-8)
    assert report["metric"] == "variation"
    assert report["residual_variation"] <= 10 * report["tol"]
    assert abs(mu.eval(fm.BorelSet.point(0.0))[1] - 5 / 18) < 1e-6
    assert abs(mu.eval(fm.BorelSet.point(2 / 3))[1] + 1 / 36) < 1e-6
    # offset is a point mass here, so the full mass is the geometric series sum
    mass = mu.total_mass()
    assert abs(mass[0] - 0.0) < 1e-6


def test_apply_is_one_operator_step():
    op = pair_operator()
    mu0 = fm.VectorMeasure.dirac(0.0, [0.0, 0.25], 2, 243)
    once = op.apply(mu0)
    # H2 adds the offset back on top of both pushforward images
    assert abs(once.eval(fm.BorelSet.point(0.0))[1] - (0.25 + 0.25 * 0.1)) < 1e-12
    assert abs(once.eval(fm.BorelSet.point(2 / 3))[1] + 0.25 * 0.1) < 1e-12


def test_dipole_norms():
    d = fm.VectorMeasure.zero(1)
    d.set_atom(0.0, [1.0])
    d.set_atom(1.0, [-1.0])
    n = fm.norms(d)
    assert abs(n["mk"] - 2 / 3) < 1e-2
    assert abs(n["mk_star"] - 1.0) < 1e-2
    assert n["variation"] == 2.0
    assert n["certified_small_instance"] is True
    assert abs(fm.mk_norm(d, 1e-3) - n["mk"]) < 1e-9
    assert abs(fm.mk_star_norm(d, 1e-3) - 1.0) < 1e-2


def test_mk_star_rejects_nonzero_mass():
    mu = fm.VectorMeasure.dirac(0.5, [1.0], 1)
    with pytest.raises(ValueError):
        fm.mk_star_norm(mu, 1e-3)


def test_refusal_surfaces_as_the_typed_exception():
    op = fm.MarkovOperator.build(
        "H1",
        [(1 / 3, 0.0, [[2.0]]), (1 / 3, 2 / 3, [[-1.0]])],
        v=[1.0],
    )
    with pytest.raises(fm.SolverRefusal):
        fm.solve(op)


def test_matrix_exp_and_operator_norm():
    e = fm.matrix_exp([[0.0, 1.0], [0.0, 0.0]])
    assert e == [[1.0, 1.0], [0.0, 1.0]]
    assert abs(fm.operator_norm([[3.0, 0.0], [0.0, -4.0]]) - 4.0) < 1e-10


def test_measure_json_round_trip():
    mu = fm.VectorMeasure.dirac(0.25, [1.5, -2.5], 2)
    back = fm.VectorMeasure.from_json(mu.to_json())
    assert back.eval(fm.BorelSet.point(0.25)) == [1.5, -2.5]
    assert back.n == 2


def test_verify_filter():
    ok, rows = fm.verify("truncation-tail")
    assert ok
    assert rows and all(r["pass"] for r in rows)
    assert all("truncation-tail" in r["criterion"] for r in rows)


def test_run_config(tmp_path):
    cfg = tmp_path / "dipole.json"
    cfg.write_text(
        json.dumps(
            {
                "name": "py-dipole",
                "kind": "norms",
                "measure": {
                    "n": 1,
                    "atoms": [{"t": 0, "v": [1]}, {"t": 1, "v": [-1]}],
                },
                "expect_norms": {"mk": "2/3", "variation": 2, "tol": 1e-2},
            }
        )
    )
    out = tmp_path / "out"
    assert fm.run_config(str(cfg), str(out)) == 0
    report = json.loads((out / "py-dipole" / "report.json").read_text())
    assert report["pass"] is True
    assert os.path.exists(out / "py-dipole" / "measure.csv")
