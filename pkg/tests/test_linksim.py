from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import null_space

from trsdof.errors import DegenerateNullSpace, InsufficientPoints, PlanTopologyMismatch
from trsdof.linksim import (
    SIM_CSV_COLUMNS,
    draw_channels,
    estimate_slope,
    fit_slope,
    leakage_sweep,
    simulate_rates,
    zf_direction,
)
from trsdof.topology import fully_connected_topology, hierarchical_topology, make_cyclic_topology
from trsdof.trs import build_trs_plan

from .conftest import A, B

SWEEP = [30, 40, 50, 60]


def uniform(K, q):
    return fully_connected_topology([[None if k == j else q for j in range(K)] for k in range(K)])


def test_leakage_mean_at_full_quality():
    t = uniform(2, 1)
    trials = 10_000
    sweep = leakage_sweep(t, [60], trials, seed=11)
    # |e^H p|^2 is exponential with mean P^-a, so its standard deviation equals its mean
    sigma = 1e-6 / np.sqrt(trials)
    assert np.all(np.abs(sweep.mean_leakage[0] - 1e-6) < 3 * sigma)


def test_leakage_without_csit_does_not_decay():
    sweep = leakage_sweep(uniform(2, 0), SWEEP, 4000, seed=5)
    assert np.allclose(sweep.mean_leakage, 1.0, atol=0.1)
    assert abs(sweep.slope(0).slope) < 0.05


def test_leakage_slopes_follow_quality(hierarchical):
    sweep = leakage_sweep(hierarchical, SWEEP, 2000, seed=3)
    for i, (k, j) in enumerate(sweep.links):
        assert sweep.slope(i).slope == pytest.approx(-float(hierarchical.quality(k, j)), abs=0.05)


def test_draws_are_deterministic(hierarchical):
    one, two = draw_channels(hierarchical, 1e4, seed=9, trials=5), draw_channels(hierarchical, 1e4, seed=9, trials=5)
    assert np.array_equal(one.channel, two.channel)
    other = draw_channels(hierarchical, 1e4, seed=10, trials=5)
    assert not np.array_equal(one.channel, other.channel)


def test_trial_draws_do_not_depend_on_batch_size(hierarchical):
    small, large = draw_channels(hierarchical, 1e3, seed=2, trials=3), draw_channels(hierarchical, 1e3, seed=2, trials=8)
    assert np.array_equal(small.channel, large.channel[:3])


def test_direct_and_absent_links():
    t = make_cyclic_topology(5, A, B)
    draw = draw_channels(t, 1e3, seed=1, trials=4)
    assert np.all(draw.error[:, range(5), range(5), :] == 0)
    assert np.all(draw.channel[:, 0, 2, :] == 0)


def test_zf_direction_cases():
    rng = np.random.default_rng(0)
    ref = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(zf_direction([], ref), ref / np.linalg.norm(ref))
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    p = zf_direction([v], ref)
    assert abs(np.vdot(v, p)) < 1e-10 and np.isclose(np.linalg.norm(p), 1)
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    p = zf_direction([v, w], ref)
    basis = null_space(np.vstack([v.conj(), w.conj()]))[:, 0]
    assert np.isclose(abs(np.vdot(basis, p)), 1.0)


def test_zf_direction_degenerate():
    v = np.array([1, 0, 0], dtype=complex)
    with pytest.raises(DegenerateNullSpace):
        zf_direction([v, 2 * v], np.ones(3))
    with pytest.raises(DegenerateNullSpace):
        zf_direction([np.ones(2), np.array([1, -1])], np.ones(2))


def test_hierarchical_rates_increase(hierarchical):
    plan = build_trs_plan(hierarchical, range(3), [A] * 3)
    res = simulate_rates(hierarchical, plan, SWEEP, 500, seed=1)
    assert np.all(np.diff(res.aggregate) > 0)
    assert res.to_csv().splitlines()[0] == ",".join(SIM_CSV_COLUMNS)


def test_simulation_reproducible(cyclic3):
    plan = build_trs_plan(cyclic3, range(3), [A] * 3)
    one = simulate_rates(cyclic3, plan, SWEEP, 100, seed=4)
    two = simulate_rates(cyclic3, plan, SWEEP, 100, seed=4)
    assert one.to_csv() == two.to_csv()
    assert np.array_equal(one.mean_rate, two.mean_rate)


def test_perfect_csit_zero_forcing_slope():
    t = uniform(3, 1)
    res = simulate_rates(t, build_trs_plan(t, range(3), [1] * 3), SWEEP, 300, seed=2)
    report = estimate_slope(res)
    assert all(m.label == "p" for m in res.messages)
    for est in report.per_message:
        assert est.slope == pytest.approx(1.0, abs=0.1)
    assert report.aggregate.slope == pytest.approx(3.0, abs=0.3)


def test_no_csit_common_only_slope():
    t = uniform(3, 0)
    res = simulate_rates(t, build_trs_plan(t, range(3), [0] * 3), SWEEP, 300, seed=2)
    assert all(m.label != "p" for m in res.messages)
    assert estimate_slope(res).aggregate.slope == pytest.approx(1.0, abs=0.1)


def test_high_snr_slopes_approach_dof(hierarchical, cyclic3):
    # finite-SNR offsets shrink with P; far out the fitted slopes sit near the DoF
    high = [100, 120, 140, 160]
    for t, dof in ((hierarchical, 1 + B + A), (cyclic3, 1 + (B + 3 * A) / 2)):
        res = simulate_rates(t, build_trs_plan(t, range(3), [A] * 3), high, 500, seed=7)
        assert estimate_slope(res).aggregate.slope == pytest.approx(float(dof), abs=0.1)


def test_plan_must_match_topology(hierarchical, cyclic3):
    plan = build_trs_plan(cyclic3, range(3), [A] * 3)
    with pytest.raises(PlanTopologyMismatch):
        simulate_rates(hierarchical, plan, SWEEP, 100, seed=0)
    with pytest.raises(ValueError):
        simulate_rates(cyclic3, plan, SWEEP, 50, seed=0)


def test_fit_slope():
    snr = np.array([10, 20, 30, 40.0])
    log2p = snr / 10 * np.log2(10)
    est = fit_slope(snr, 1.5 * log2p + 2)
    assert est.slope == pytest.approx(1.5) and est.intercept == pytest.approx(2)
    assert est.ci95[0] == pytest.approx(1.5) and est.ci95[1] == pytest.approx(1.5)
    with pytest.raises(InsufficientPoints):
        fit_slope([10, 20], [1, 2])


def test_partial_topology_simulates():
    t = make_cyclic_topology(6, A, B)
    from trsdof.topology import effective_zfbf_topology

    plan = build_trs_plan(effective_zfbf_topology(t), range(6), [A] * 6)
    res = simulate_rates(t, plan, SWEEP, 100, seed=3)
    assert np.all(np.isfinite(res.aggregate)) and np.all(np.diff(res.aggregate) > 0)
