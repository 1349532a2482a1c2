import math
import pathlib

import numpy as np
import pytest

import semflow

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_config_round_trip():
    c = semflow.default_config("channel_cylinder")
    c.order = 5
    c.re = 0.1 + 0.2
    again = semflow.parse_config(c.to_toml())
    assert again == c
    assert again.kind == "channel_cylinder"


def test_bad_config_raises_input_error():
    with pytest.raises(semflow.InputError, match="flow.order"):
        semflow.parse_config("case = 'cavity'\n[flow]\norder = 1\n")


def test_reference_nodes_count():
    for p in (1, 3, 6):
        assert semflow.reference_nodes(p).shape == ((p + 1) * (p + 2) // 2, 2)
    g = semflow.gll_points(4)
    assert g[0] == -1.0 and g[-1] == 1.0 and abs(g[2]) < 1e-15


def test_curved_perimeter():
    c = semflow.default_config("channel_cylinder")
    c.refinements = 1
    straight = semflow.boundary_length(c, 6, curved=False)
    curved = semflow.boundary_length(c, 6)
    assert abs(curved - math.pi * 0.5 * 2) < 1e-12
    assert straight < curved


def test_poiseuille_solution_is_exact():
    c = semflow.load_config(ROOT / "configs" / "poiseuille.toml")
    s = semflow.solve(c)
    assert s.result["converged"]
    y = s.nodes[:, 1]
    assert np.max(np.abs(s.u[:, 0] - (1 - y**2))) < 1e-10
    vals = s.sample(np.array([[1.5, 0.0], [10.0, 0.0]]))
    assert abs(vals[0, 0] - 1.0) < 1e-10
    assert np.isnan(vals[1, 0])


def test_run_case_writes_artifacts(tmp_path):
    c = semflow.default_config("cavity")
    c.re = 10
    c.order = 2
    c.refinements = 0
    mesh = semflow.build_mesh(c)
    assert mesh.stats()["elements"] == 2 * 64 * 64
    c = semflow.parse_config("case = 'cavity'\n[mesh]\nn = 4\n[flow]\norder = 2\nre = 10\n")
    r = semflow.run_case(c, tmp_path)
    assert r["status"] == 0
    assert (tmp_path / "midline_u.csv").exists()
    assert (tmp_path / "fields.vtk").exists()


def test_single_point_sweep_speedup_is_one():
    c = semflow.parse_config(
        "case = 'poiseuille'\n[sweep]\nrefinements = [0]\norders = [2]\ntolerances = [1e-8]\nmetric = 'l2'\nrepeat = 1\n"
    )
    s = semflow.sweep(c)
    assert len(s["records"]) == 1
    row = s["table"][0]
    assert row["reachable"] and row["entries"][0][3] == 1.0
