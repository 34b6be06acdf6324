import math

import numpy as np
import pytest
import scipy.fft

from kickedrotor.errors import NumericGuardError, ParameterError
from kickedrotor.model import make_schedule
from kickedrotor.quantum import (
    FloquetPropagator,
    QuantumState,
    delay_cycle,
    dense_kick_matrix,
    evolve_quantum,
    init_fock,
    init_gaussian,
    kick_matrix_element,
    kr_step,
    mkr_cycle,
    momentum_distribution,
    quantum_energy,
)

MKR = make_schedule("MKR")
KR = make_schedule("KR")


def bessel_series(n, x, terms=40):
    """J_n(x) from its power series; independent of scipy.special."""
    return sum((-1) ** j * (x / 2) ** (2 * j + n) / (math.factorial(j) * math.factorial(j + n)) for j in range(terms))


def random_state(rng, basis_half, support, boundary_multiplier=1, tau=0.1):
    amps = np.zeros(2 * basis_half, dtype=complex)
    sl = slice(basis_half - support, basis_half + support + 1)
    amps[sl] = rng.normal(size=2 * support + 1) + 1j * rng.normal(size=2 * support + 1)
    amps /= np.linalg.norm(amps)
    return QuantumState(amps, boundary_multiplier, tau)


def dense_step(c, m, k, tau, sign=1):
    return np.exp(-0.5j * tau * m**2) * (dense_kick_matrix(m, sign * k) @ c)


class TestBesselOracle:
    def test_series_value(self):
        assert bessel_series(1, 1.0) == pytest.approx(0.44005058574493355, abs=1e-15)

    def test_element_identity(self):
        assert kick_matrix_element(3, 3, 0.0) == 1

    def test_element_magnitude(self):
        assert abs(kick_matrix_element(1, 0, 1.0)) == pytest.approx(bessel_series(1, 1.0), abs=1e-14)
        assert kick_matrix_element(1, 0, 1.0) == pytest.approx(-1j * bessel_series(1, 1.0), abs=1e-14)

    @pytest.mark.parametrize("k", [0.3, 1.0, 5.0, 17.0, 35.0])
    def test_column_norm(self, k):
        total = sum(abs(kick_matrix_element(m, 0, k)) ** 2 for m in range(-200, 201))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestInitFock:
    def test_ground(self):
        psi = init_fock(0, 64)
        assert psi.probabilities()[psi.index_of(0)] == 1.0
        assert quantum_energy(psi) == 0.0

    def test_energy(self):
        assert quantum_energy(init_fock(5, 64, tau=0.1)) == pytest.approx(0.125, abs=1e-15)

    def test_boundary_multiplier_index(self):
        psi = init_fock(2, 64, boundary_multiplier=4, tau=0.1)
        assert psi.probabilities()[psi.index_of(8)] == 1.0
        assert quantum_energy(psi) == pytest.approx((0.2) ** 2 / 2)

    def test_out_of_grid(self):
        with pytest.raises(ParameterError):
            init_fock(64, 64)


class TestInitGaussian:
    def theta_density(self, psi):
        n = psi.amplitudes.size
        j = np.arange(n)
        x = scipy.fft.ifft(psi.amplitudes) * np.where(j % 2, -1, 1)
        half = math.pi * psi.boundary_multiplier
        theta = 2 * half * j / n
        theta = np.where(theta >= half, theta - 2 * half, theta)
        dens = np.abs(x) ** 2
        return theta, dens / dens.sum()

    def test_reference_gaussian_state(self):
        psi = init_gaussian(9.0, 2**14, 256, 0.1)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
        theta, dens = self.theta_density(psi)
        assert np.sum(dens * theta**2) == pytest.approx(4.5, rel=1e-3)
        # sampled values match exp(-theta^2/18)
        ref = np.exp(-theta**2 / 9)
        np.testing.assert_allclose(dens, ref / ref.sum(), atol=1e-15)

    def test_momentum_width(self):
        psi = init_gaussian(9.0, 2**14, 256, 0.1)
        p = psi.momenta
        sd = math.sqrt(np.sum(psi.probabilities() * p**2))
        # |C(p)|^2 ~ exp(-s p^2) for psi ~ exp(-theta^2 / (2 s))
        assert sd == pytest.approx(1 / math.sqrt(18), rel=0.01)

    def test_spatial_tail_violation(self):
        with pytest.raises(ParameterError, match="tail"):
            init_gaussian(9.0, 256, 1, 0.1)

    def test_narrow_momentum_tail(self):
        with pytest.raises(ParameterError, match="basis"):
            init_gaussian(1e-4, 64, 1, 0.1)

    def test_bad_width(self):
        with pytest.raises(ParameterError):
            init_gaussian(0.0, 64, 1, 0.1)


class TestKrStep:
    def test_free_only(self, rng):
        psi = random_state(rng, 64, 10)
        out = kr_step(psi, 0.0)
        np.testing.assert_allclose(out.probabilities(), psi.probabilities(), atol=1e-15)
        m = psi.indices
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes * np.exp(-0.05j * m**2), atol=1e-14)

    def test_single_kick_bessel(self):
        psi = init_fock(0, 64, tau=0.1)
        prop = FloquetPropagator(64, 0.1, 1.0)
        kicked = prop.kick(psi.amplitudes, 1)
        assert abs(kicked[psi.index_of(1)]) == pytest.approx(bessel_series(1, 1.0), abs=1e-14)
        assert kicked[psi.index_of(1)] == pytest.approx(-1j * bessel_series(1, 1.0), abs=1e-14)
        after = kr_step(psi, 1.0)
        assert abs(after.amplitudes[psi.index_of(1)]) == pytest.approx(bessel_series(1, 1.0), abs=1e-14)

    @pytest.mark.parametrize("k", [0.5, 2.0, 5.0])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_dense_oracle(self, rng, k, sign):
        psi = random_state(rng, 64, 8)
        m = psi.indices
        c = psi.amplitudes.copy()
        for _ in range(3):
            psi = kr_step(psi, k, sign)
            c = dense_step(c, m, k, 0.1, sign)
        assert np.max(np.abs(psi.amplitudes - c)) < 1e-10

    @pytest.mark.parametrize("M,basis_half", [(4, 64), (8, 256), (3, 96), (3, 64)])
    def test_class_split_matches_full_grid(self, rng, M, basis_half):
        # Direct kick on the full 2B-point grid of the extended domain.
        psi = random_state(rng, basis_half, basis_half // 2, boundary_multiplier=M)
        n = 2 * basis_half
        theta = 2 * math.pi * M * np.arange(n) / n
        direct = scipy.fft.fft(scipy.fft.ifft(psi.amplitudes) * np.exp(-1.7j * np.cos(theta)))
        prop = FloquetPropagator(basis_half, 0.1, 1.7, M)
        assert prop.classes == (M if n % M == 0 else 1)
        np.testing.assert_allclose(prop.kick(psi.amplitudes, 1), direct, atol=1e-13)
        rows = prop.to_classes(psi.amplitudes)
        np.testing.assert_array_equal(prop.from_classes(rows), psi.amplitudes)

    def test_evolve_matches_single_steps_extended(self, rng):
        psi = random_state(rng, 128, 20, boundary_multiplier=4)
        _, series = evolve_quantum(psi, MKR, 1.3, 6)
        for i, sign in enumerate(MKR.signs(6), start=1):
            psi = kr_step(psi, 1.3, sign)
            assert series[i] == pytest.approx(quantum_energy(psi), rel=1e-12)

    def test_sign_validation(self):
        with pytest.raises(ParameterError):
            kr_step(init_fock(0, 64), 1.0, 0)

    def test_edge_guard(self):
        with pytest.raises(NumericGuardError, match="edge"):
            kr_step(init_fock(0, 16), 20.0)

    def test_norm_long_run(self):
        psi = init_fock(0, 2**17, tau=0.1)
        out, _ = evolve_quantum(psi, KR, 35.0, 1000)
        assert abs(out.norm() - 1) < 1e-10


class TestCycles:
    def test_free_cycle(self, rng):
        psi = random_state(rng, 64, 10)
        out = mkr_cycle(psi, 0.0)
        np.testing.assert_allclose(out.probabilities(), psi.probabilities(), atol=1e-15)

    def test_mkr_cycle_dense_oracle(self):
        tau, k = 0.1, 35.0
        psi = init_fock(0, 1024, tau=tau)
        out = mkr_cycle(psi, k)
        # dense propagation on |m| <= 400; J_n(35) is negligible beyond |n| ~ 80
        m = np.arange(-400, 401)
        c = np.zeros(m.size, dtype=complex)
        c[400] = 1
        for sign in MKR.pattern:
            c = dense_step(c, m, k, tau, sign)
        e_dense = float(np.sum(np.abs(c) ** 2 * (tau * m) ** 2 / 2))
        assert quantum_energy(out) == pytest.approx(e_dense, abs=1e-10)
        np.testing.assert_allclose(out.amplitudes[1024 - 400:1024 + 401], c, atol=1e-10)

    def test_delay_equals_reversal_integer_ladder(self, rng):
        psi = random_state(rng, 2**10, 50)
        a, b = psi, psi
        for _ in range(3):
            a, b = mkr_cycle(a, 35.0), delay_cycle(b, 35.0)
        assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12

    def test_delay_free(self, rng):
        psi = random_state(rng, 64, 10)
        np.testing.assert_allclose(delay_cycle(psi, 0.0).amplitudes, mkr_cycle(psi, 0.0).amplitudes, atol=1e-13)

    def test_delay_differs_off_ladder(self, rng):
        psi = random_state(rng, 2**13, 200, boundary_multiplier=256)
        diff = np.linalg.norm(mkr_cycle(psi, 5.0).amplitudes - delay_cycle(psi, 5.0).amplitudes)
        assert diff > 1e-6


class TestObservables:
    def test_energy_superposition(self):
        amps = np.zeros(64, dtype=complex)
        amps[32 + 3] = amps[32 - 3] = 1 / math.sqrt(2)
        assert quantum_energy(QuantumState(amps, 1, 0.1)) == pytest.approx(0.045, abs=1e-15)

    def test_distribution(self, rng):
        psi = random_state(rng, 64, 10)
        d = momentum_distribution(psi)
        assert d.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
        assert momentum_distribution(init_fock(0, 64)).probabilities[64] == 1.0

    @pytest.mark.parametrize("schedule", [KR, MKR])
    def test_parity(self, schedule):
        psi, _ = evolve_quantum(init_fock(0, 2**13, tau=0.1), schedule, 35.0, 150)
        p = psi.probabilities()[1:]  # drop m = -B, which has no mirror
        assert np.max(np.abs(p - p[::-1])) < 1e-12

    def test_basis_convergence(self):
        _, e1 = evolve_quantum(init_fock(0, 2**14, tau=0.1), MKR, 35.0, 200)
        _, e2 = evolve_quantum(init_fock(0, 2**15, tau=0.1), MKR, 35.0, 200)
        np.testing.assert_allclose(e1.values[1:], e2.values[1:], rtol=1e-8)

    def test_energy_series_matches_state(self):
        psi, series = evolve_quantum(init_fock(0, 2**11, tau=0.1), MKR, 35.0, 8)
        assert series.values[-1] == pytest.approx(quantum_energy(psi), rel=1e-13)
        assert series.values[0] == 0.0
        assert len(series) == 9
