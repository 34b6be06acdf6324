import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedrotor.classical import (
    ClassicalEnsemble,
    EnergySeries,
    classical_energy,
    evolve_ensemble,
    grid_ensemble,
    inverse_map_step,
    island_fraction,
    map_step,
    poincare_section,
    sample_wigner_gaussian,
    transport_classify,
    uniform_theta_ensemble,
)
from kickedrotor.errors import NumericError, ParameterError
from kickedrotor.model import PhasePoint, make_schedule, marginal_points

PI = math.pi
MKR = make_schedule("MKR")
KR = make_schedule("KR")
FULL_CELL = (0.0, 2 * PI, 0.0, 2 * PI)

finite = st.floats(-50, 50, allow_nan=False)
kappas = st.floats(0, 10, allow_nan=False)
signs = st.sampled_from([1, -1])


def circ_dist(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), 2 * PI)
    return np.minimum(d, 2 * PI - d)


class TestMapStep:
    def test_substitution(self):
        p = map_step(PhasePoint(0.0, PI / 2), 3.5, 1)
        assert p.l_tilde == pytest.approx(3.5, abs=1e-15)
        assert p.theta == pytest.approx(PI / 2 + 3.5, abs=1e-15)

    def test_free_rotation(self):
        p = map_step(PhasePoint(1.3, 0.4), 0.0, -1)
        assert (p.l_tilde, p.theta) == (1.3, 0.4 + 1.3)

    def test_mkr_marginal_cycle(self):
        p = PhasePoint(PI, PI / 2)
        ls = []
        for sign in MKR.pattern:
            p = map_step(p, PI, sign)
            ls.append(p.l_tilde)
        assert ls == pytest.approx([2 * PI, 3 * PI, 4 * PI, 5 * PI], abs=1e-12)
        assert circ_dist(p.theta, PI / 2) < 1e-12

    def test_bad_sign(self):
        with pytest.raises(ParameterError):
            map_step(PhasePoint(0, 0), 1.0, 0)

    def test_nonfinite_kappa(self):
        with pytest.raises(NumericError):
            map_step(PhasePoint(0, 0), float("inf"), 1)


@given(l=finite, th=finite, kappa=kappas, sign=signs)
def test_area_preservation(l, th, kappa, sign):
    h = 1e-5

    def f(x):
        q = map_step(PhasePoint(x[0], x[1]), kappa, sign)
        return np.array([q.l_tilde, q.theta])

    x0 = np.array([l, th])
    jac = np.column_stack([(f(x0 + h * e) - f(x0 - h * e)) / (2 * h) for e in np.eye(2)])
    assert abs(np.linalg.det(jac) - 1) < 1e-8


@given(l=finite, th=finite, kappa=kappas, sign=signs)
def test_inverse_recovers_input(l, th, kappa, sign):
    back = inverse_map_step(map_step(PhasePoint(l, th), kappa, sign), kappa, sign)
    assert back.l_tilde == pytest.approx(l, abs=1e-12)
    assert back.theta == pytest.approx(th, abs=1e-12)


@pytest.mark.parametrize("l1,l2", [(0, 0), (1, 0), (-1, 0), (0, 1), (2, 1)])
def test_marginal_point_exact_gain(l1, l2):
    kappa, points = marginal_points("MKR", l1, l2)
    n = 10_000
    e = ClassicalEnsemble.from_points(points)
    out, _ = evolve_ensemble(e, MKR, kappa, n)
    drift = np.abs(out.l_tilde - e.l_tilde) - n * kappa
    assert np.all(np.abs(drift) < 1e-8)


class TestEvolveEnsemble:
    def test_zero_kappa_constant_energy(self):
        e = uniform_theta_ensemble(50, l_tilde=0.7)
        _, series = evolve_ensemble(e, MKR, 0.0, 20)
        assert np.all(series.values == series.values[0])
        assert series.values[0] == pytest.approx(0.7**2 / 2)

    def test_marginal_energy_closed_form(self):
        e = ClassicalEnsemble([PI], [PI / 2])
        _, series = evolve_ensemble(e, MKR, PI, 40)
        n = np.arange(41)
        assert series.values == pytest.approx((PI * (n + 1)) ** 2 / 2, rel=1e-12)

    def test_cardinality_and_determinism(self):
        e = sample_wigner_gaussian(1.0, 0.1, 200, seed=3)
        a, sa = evolve_ensemble(e, MKR, 3.5, 30)
        b, sb = evolve_ensemble(e, MKR, 3.5, 30)
        assert len(a) == len(e)
        assert np.array_equal(sa.values, sb.values)

    def test_start_kick_continues_pattern(self):
        e = uniform_theta_ensemble(64)
        full, s_full = evolve_ensemble(e, MKR, 3.5, 10)
        half, s1 = evolve_ensemble(e, MKR, 3.5, 3)
        rest, s2 = evolve_ensemble(half, MKR, 3.5, 7, start_kick=4)
        np.testing.assert_allclose(rest.l_tilde, full.l_tilde, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(np.concatenate([s1.values, s2.values[1:]]), s_full.values, rtol=1e-12)

    def test_empty(self):
        with pytest.raises(ParameterError):
            evolve_ensemble(ClassicalEnsemble([], []), MKR, 1.0, 1)

    def test_zero_kicks(self):
        with pytest.raises(ParameterError):
            evolve_ensemble(uniform_theta_ensemble(4), MKR, 1.0, 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), kappa=st.floats(0.5, 5))
def test_energy_permutation_invariance(seed, kappa):
    e = sample_wigner_gaussian(1.5, 0.2, 257, seed)
    perm = np.random.default_rng(seed).permutation(len(e))
    shuffled = ClassicalEnsemble(e.l_tilde[perm], e.theta[perm])
    _, a = evolve_ensemble(e, MKR, kappa, 25)
    _, b = evolve_ensemble(shuffled, MKR, kappa, 25)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(l=st.floats(-5, 5), th=st.floats(0, 2 * PI), kappa=st.floats(0, 5))
def test_two_pi_periodicity(l, th, kappa):
    # Short runs: chaotic orbits amplify the float difference between theta and theta + 2pi.
    a, _ = evolve_ensemble(ClassicalEnsemble([l], [th]), MKR, kappa, 8)
    b, _ = evolve_ensemble(ClassicalEnsemble([l], [th + 2 * PI]), MKR, kappa, 8)
    assert a.l_tilde[0] == pytest.approx(b.l_tilde[0], abs=1e-6)


class TestClassicalEnergy:
    def test_pair(self):
        assert classical_energy(ClassicalEnsemble([2, -2], [0.1, 0.2])) == 2.0

    def test_zero(self):
        assert classical_energy(uniform_theta_ensemble(10)) == 0.0

    def test_single(self):
        assert classical_energy(ClassicalEnsemble([PI], [0])) == pytest.approx(PI**2 / 2)

    def test_empty(self):
        with pytest.raises(ParameterError):
            classical_energy(ClassicalEnsemble([], []))


class TestPoincareSection:
    def test_count(self):
        pts = poincare_section(grid_ensemble(FULL_CELL, 10, 10), KR, 3.5, 500)
        assert pts.shape == (50_000, 2)
        assert np.all((pts >= 0) & (pts < 2 * PI))

    def test_marginal_period_four(self):
        pts = poincare_section(ClassicalEnsemble([PI], [PI / 2]), MKR, PI, 12)
        expected = np.array([(PI / 2, 0), (3 * PI / 2, PI), (3 * PI / 2, 0), (PI / 2, PI)] * 3)
        assert np.all(circ_dist(pts, expected) < 1e-9)

    def test_islands_near_quarter_angles(self):
        # Transporting-island points sit near theta = pi/2, 3pi/2; the standard map has none there.
        grid = grid_ensemble(FULL_CELL, 40, 40)
        _, mkr_l = grid.l_tilde, None
        from kickedrotor.classical import transport_gains

        gains = transport_gains(grid.l_tilde, grid.theta, MKR, 3.5, 1000)
        island = np.abs(np.abs(gains) - PI) < 0.05 * PI
        assert island.sum() > 0
        th = grid.theta[island]
        assert np.all(np.minimum(circ_dist(th, PI / 2), circ_dist(th, 3 * PI / 2)) < 1.2)
        kr_gains = transport_gains(grid.l_tilde, grid.theta, KR, 3.5, 1000)
        assert not np.any(np.abs(np.abs(kr_gains) - 2 * PI) < 0.1 * PI)


class TestTransport:
    def test_marginal(self):
        ok, gain = transport_classify(PhasePoint(PI, PI / 2), MKR, PI, 200)
        assert ok
        assert gain == pytest.approx(PI, abs=1e-12)

    def test_chaotic_sea(self):
        ok, gain = transport_classify(PhasePoint(0.0, 1.0), MKR, 3.5, 10_000)
        assert not ok
        assert abs(gain) < 0.1 * PI

    def test_free(self):
        ok, gain = transport_classify(PhasePoint(0.3, 2.0), MKR, 0.0, 100)
        assert (ok, gain) == (False, 0.0)

    def test_tol(self):
        with pytest.raises(ParameterError):
            transport_classify(PhasePoint(0, 0), MKR, 1.0, 100, tol=0)


class TestIslandFraction:
    def test_mkr_large_islands(self):
        assert island_fraction(FULL_CELL, 48, MKR, 3.5) > 0.01

    def test_kr_no_transport(self):
        assert island_fraction(FULL_CELL, 48, KR, 3.5) < 1e-3

    def test_free(self):
        assert island_fraction(FULL_CELL, 32, MKR, 0.0, n_kicks=50) == 0.0

    def test_degenerate(self):
        with pytest.raises(ParameterError):
            island_fraction((0, 0, 0, 1), 32, MKR, 3.5)

    def test_resolution(self):
        with pytest.raises(ParameterError):
            island_fraction(FULL_CELL, 16, MKR, 3.5)


class TestWigner:
    def test_moments(self):
        e = sample_wigner_gaussian(3 / math.sqrt(2), 0.1, 1_000_000, seed=7)
        assert np.std(e.theta) == pytest.approx(3 / math.sqrt(2), rel=0.01)
        assert np.std(e.l_tilde) == pytest.approx(0.1 * math.sqrt(2) / 6, rel=0.01)

    def test_seeded(self):
        a = sample_wigner_gaussian(1.0, 0.1, 100, seed=5)
        b = sample_wigner_gaussian(1.0, 0.1, 100, seed=5)
        assert np.array_equal(a.theta, b.theta) and np.array_equal(a.l_tilde, b.l_tilde)

    def test_single(self):
        assert len(sample_wigner_gaussian(1.0, 0.1, 1, seed=0)) == 1

    def test_sigma(self):
        with pytest.raises(ParameterError):
            sample_wigner_gaussian(0.0, 0.1, 10, seed=0)


def test_energy_series_rejects_negative():
    with pytest.raises(NumericError):
        EnergySeries([1.0, -1.0], "classical")


def test_stratified_uniform():
    e = uniform_theta_ensemble(8)
    assert np.allclose(np.diff(e.theta), 2 * PI / 8)
    assert e.seed is None
    r = uniform_theta_ensemble(8, stratified=False, seed=1)
    assert r.seed == 1 and np.all((r.theta >= 0) & (r.theta < 2 * PI))
