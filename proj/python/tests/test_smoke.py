import math
import os
from pathlib import Path

import pytest

import locmix

SOURCE = Path(os.environ.get("LOCMIX_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_thouless_law_iid():
    lam, energy = 0.1, 1.0
    k = math.acos(energy / 2)
    est = locmix.lyapunov(locmix.Process.bernoulli(1), energy, lam, steps=400_000, replicas=4)
    pred = locmix.gamma_thouless(lam, k, 1.0)
    assert abs(est["gamma"] / pred - 1) < 0.05
    assert len(est["per_replica"]) == 4


def test_markov_density_closed_form():
    a = 1 - 2 * 0.3
    for k in (0.0, 1.0, math.pi):
        exact = locmix.exact_density(locmix.Process.markov(0.3, 2), k)
        assert exact == pytest.approx((1 - a * a) / (1 - 2 * a * math.cos(k) + a * a), rel=1e-12)
    assert locmix.exact_density(locmix.Process.intermittent(0.3, 1), 1.0) is None


def test_densities_are_normalized():
    for d in (locmix.density_band_edge(1.0, 0.0), locmix.density_band_center(0.0, 1.0, 1.0)):
        h = math.pi / len(d["rho"])
        assert sum(d["rho"]) * h == pytest.approx(1.0, rel=1e-10)
        assert min(d["rho"]) > 0


def test_band_center_predictor_below_naive():
    lam = 0.1
    assert locmix.gamma_band_center(lam, 0.0, 1.0, 1.0) < lam * lam / 8


def test_free_moments_ballistic():
    times = [1.0, 4.0, 16.0]
    m = locmix.moments(locmix.Process.bernoulli(1), 0.0, 801, 2.0, times)
    factor = 4 - 164 * math.exp(-8)
    for t, v in zip(times, m["values"]):
        assert v == pytest.approx(factor * t * t, rel=1e-6)


def test_errors_map_to_python():
    with pytest.raises(locmix.ConfigError):
        locmix.run_config(str(SOURCE / "configs" / "bad_empty_energies.ini"))
    with pytest.raises(locmix.ConfigError):
        locmix.density_band_edge(0.0, 0.0)


def test_run_config(tmp_path):
    out = locmix.run_config(str(SOURCE / "configs" / "density_band_edge.ini"), str(tmp_path))
    assert len(out["hash"]) == 16
    assert all(Path(f).exists() for f in out["files"])
    assert all(passed for _, passed, _ in out["checks"])


def test_check_subset():
    rows = locmix.check([9])
    assert [r[0] for r in rows] == [9]
    assert rows[0][2]
