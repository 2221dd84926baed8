import math

import numpy as np
import pytest

import kkhol


@pytest.fixture(scope="module")
def counterflow():
    return kkhol.make_counterflow_texture(kkhol.GridChart(32, 32))


def test_chart():
    c = kkhol.GridChart(16, 8)
    assert (c.n_kx, c.n_ky, c.size) == (16, 8, 128)
    assert c.hx == pytest.approx(2 * math.pi / 16)
    with pytest.raises(ValueError):
        kkhol.GridChart(2, 2)


def test_chern_numbers(counterflow):
    assert kkhol.chern_number(counterflow, "plus")[0] == 1
    assert kkhol.chern_number(counterflow, "minus")[0] == -1
    qwz = kkhol.make_qwz_texture(kkhol.GridChart(32, 32), 1.0)
    assert kkhol.chern_number(qwz, "plus")[0] == -1
    with pytest.raises(ValueError):
        kkhol.make_qwz_texture(kkhol.GridChart(16, 16), 2.0)


def test_fields_are_numpy(counterflow):
    a = counterflow.a("plus")
    assert a.shape == (32 * 32, 2)
    np.testing.assert_array_equal(counterflow.a("minus"), -a)
    np.testing.assert_allclose(counterflow.f("plus"), 1 / (2 * math.pi))


def test_metric_and_connection(counterflow):
    g = kkhol.assemble_metric(counterflow, 1.0)
    assert g.g.shape == (1024, 4, 4)
    np.testing.assert_allclose(g.g, np.transpose(g.g, (0, 2, 1)))
    assert kkhol.check_submersion(g) < 1e-12
    lc = kkhol.christoffel(g)
    assert lc.gamma.shape == (1024, 4, 4, 4)
    assert lc.gamma[0, 0, 1, 2] == pytest.approx(-1 / (4 * math.pi), abs=1e-12)
    assert kkhol.metric_compatibility_residual(lc, g) < 1e-12
    with pytest.raises(ValueError):
        kkhol.assemble_metric(counterflow, 1.5)


def test_curvature_span(counterflow):
    g = kkhol.assemble_metric(counterflow, 1.0)
    t = kkhol.torsion_form(counterflow, "pulled-back", 1.0)
    conn = kkhol.connection_with_torsion(kkhol.christoffel(g), t, g)
    r = kkhol.riemann_curvature(conn, g, "adapted")
    assert r.r.shape == (1024, 4, 4, 4, 4)
    np.testing.assert_array_equal(r.r, -np.swapaxes(r.r, 3, 4))
    assert kkhol.offdiag_span_dim(r)["all_points_dim"] == 2


def test_cohomology(counterflow):
    c = kkhol.period_matrix(kkhol.torsion_form(counterflow, "theta"))
    assert (c["c_plus"], c["c_minus"], c["r"]) == (pytest.approx(1.0), pytest.approx(-1.0), 1)
    assert kkhol.r_sharp(counterflow, 1.0) == (1, 0)
    with pytest.raises(ValueError):
        kkhol.period_matrix(kkhol.torsion_form(counterflow, "pulled-back"))
    n = kkhol.parallel_form_nullity(kkhol.assemble_metric(counterflow, 0.0))
    assert n["nullity_fibre_oneforms"] == 2


def test_berry_phases(counterflow):
    v = kkhol.berry_phase_vector(counterflow, "gamma1", "circle:3,3,1")
    assert v["raw"][2] == pytest.approx(0.5)
    assert v["raw"][3] == pytest.approx(-0.5)


def test_run_certify():
    d = kkhol.run_certify("texture = counterflow\ngrid = 16\nepsilon = [0.5, 1.0]\n")
    assert d["verdict"] == "certified"
    assert d["measured_offdiag_dim"] == [2, 2]
    assert d["r_sharp"] == 1
    assert "[certificate]" in d["report"]
    with pytest.raises(ValueError):
        kkhol.run_certify("texture = nothing\n")
