# SPDX-License-Identifier: Apache-2.0
import csv
import io
import math

import numpy as np
import pytest

import rcomp


def test_fixture_entries():
    h = rcomp.fixture_p2()
    assert h.shape == (4, 4)
    assert h[0, 0] == pytest.approx(0.2328 - 0.0868j)
    assert h[3, 3] == pytest.approx(-0.2692 - 0.6244j)


def test_closed_forms():
    assert rcomp.nu_update(1.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert rcomp.nu_update(2.0, 4.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert rcomp.scalar_min(1.7, 0.3, 2.2) == pytest.approx(rcomp.nu_update(1.7, 0.3, 2.2), rel=1e-9)
    assert rcomp.lambda_update_p2(4.0, 1.0) == 2.0
    with pytest.raises(rcomp.InfeasibleUser):
        rcomp.nu_update(0.0, 1.0, 1.0)


def test_numerics_roundtrip():
    c = rcomp.exp_correlation(0.5, 3)
    r = rcomp.psd_sqrt(c)
    np.testing.assert_allclose(r @ r, c, atol=1e-12)
    np.testing.assert_allclose(rcomp.hermitian_inverse(c) @ c, np.eye(3), atol=1e-12)


def test_algorithm1_matches_oracle():
    rng = np.random.default_rng(5)
    f = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    r = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    p = np.array([1.0, 2.0, 0.5])
    st = rcomp.algorithm1(f, r, p, max_iter=200000)
    pg = rcomp.pg_dual_p1(f, r, p)
    assert st["objective_trace"][-1] == pytest.approx(pg["value"], rel=1e-6)
    assert all(b <= a + 1e-10 for a, b in zip(st["objective_trace"], st["objective_trace"][1:]))


def test_small_p1_sweep():
    text = rcomp.p1_sweep("fig3", {"trials": "1", "noise_grid": "1.0, 0.1"})
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2
    for row in rows:
        assert 0.0 < float(row["robust_sum_amse"]) <= 4.0
        assert float(row["robust_sum_amse"]) <= float(row["naive_sum_amse"])


def test_verify_gaps():
    gap1, gap2, text = rcomp.verify({"trials": "3"})
    assert gap1 <= 1e-5 and gap2 <= 1e-5
    assert text.startswith("instance,")


def test_config_errors():
    with pytest.raises(rcomp.ConfigError):
        rcomp.p1_sweep("fig3", {"bogus": "1"})
    with pytest.raises(rcomp.ConfigError):
        rcomp.p1_sweep("nowhere")


def test_noise_and_snr():
    assert rcomp.thermal_noise_power() == pytest.approx(6.549e-14, rel=1e-3)
    assert math.isclose(rcomp.cell_edge_snr_db(), 18.14, abs_tol=0.01)
