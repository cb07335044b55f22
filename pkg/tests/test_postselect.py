import math

import numpy as np
import pytest

from cavpurify import (
    PreconditionError,
    QuadratureSpec,
    SimConfig,
    UndefinedFidelityError,
    bell_vectors,
    evolve_sequential,
    fidelity_star,
    ideal_m,
    ph_asymptotics,
    project_coherent,
    project_quadrature,
    quadrature_pdf,
    success_probability,
    w2_kraus,
)

GROUND = np.array([1, 0, 0, 0], dtype=complex)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
P_SPEC = QuadratureSpec(math.pi / 2, 0.0)


def _evolved(c, nbar, gtau, pad=40, gtau2=None):
    n_f = int(nbar + 4 * math.sqrt(nbar)) + pad
    return evolve_sequential(c, math.sqrt(nbar), gtau, gtau if gtau2 is None else gtau2, n_f)


class TestIdealM:
    def test_listed_action(self):
        m = ideal_m(0.0)
        psi_minus = bell_vectors()[0]
        assert np.allclose(m @ [0, 1, 0, 0], psi_minus / math.sqrt(2))
        assert np.allclose(m @ [0, 0, 1, 0], -psi_minus / math.sqrt(2))

    def test_kernel_is_symmetric_sector(self):
        for phi in (0.0, 0.9):
            m = ideal_m(phi)
            vs = bell_vectors(phi)
            assert np.abs(m @ vs[3]).max() < 1e-14  # Psi+
            assert np.abs(m @ vs[2]).max() < 1e-14  # Phi+_phi

    def test_projector_algebra(self):
        m = ideal_m(0.4)
        assert np.abs(m @ m - m).max() < 1e-14
        assert np.abs(m - m.conj().T).max() < 1e-14
        assert np.linalg.matrix_rank(m) == 2


class TestProjectCoherent:
    def test_identity_evolution(self):
        c = np.array([0.5, 0.5j, -0.5, 0.5], dtype=complex)
        state = evolve_sequential(c, 3.0, 0.0, 0.0, 40)
        post = project_coherent(state, 3.0)
        assert np.abs(post.amplitudes - c).max() < 1e-10
        assert post.weight == pytest.approx(1.0, abs=1e-9)

    def test_weight_bounded(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            c = rng.normal(size=4) + 1j * rng.normal(size=4)
            c /= np.linalg.norm(c)
            state = _evolved(c, 25.0, 1.5, pad=30)
            assert project_coherent(state, 5.0).weight <= 1.0 + 1e-12

    def test_ground_pair_regression(self):
        # nbar = 200, g tau = 2: normalized W1 output overlaps Phi- at the
        # frozen build-time baseline 0.97853.
        state = evolve_sequential(GROUND, math.sqrt(200.0), 2.0, 2.0, 300)
        post = project_coherent(state, math.sqrt(200.0))
        phi_minus = bell_vectors()[1]
        fid = abs(np.vdot(phi_minus, post.normalized())) ** 2
        assert fid >= 0.97853
        assert fid == pytest.approx(0.978533, abs=5e-4)


class TestProjectQuadrature:
    def test_gaussian_peak_weight(self):
        state = evolve_sequential(GROUND, 3.0, 0.0, 0.0, 60)
        post = project_quadrature(state, P_SPEC)
        assert post.weight == pytest.approx(math.pi**-0.5, abs=1e-10)

    def test_weight_equals_pdf(self):
        state = _evolved(GROUND, 16.0, 2.0)
        for p in (-1.0, 0.0, 0.4, 2.5):
            w = project_quadrature(state, QuadratureSpec(math.pi / 2, p)).weight
            pdf = quadrature_pdf(state, np.array([p]))[0]
            assert abs(w - pdf) <= 1e-12


class TestQuadraturePdf:
    def test_completeness(self):
        state = _evolved(np.array([0.5, 0.5, 0.5, 0.5]), 9.0, 1.3, pad=30)
        grid = np.arange(-14.0, 14.0, 0.005)
        total = np.trapezoid(quadrature_pdf(state, grid), grid)
        assert total == pytest.approx(state.norm2(), abs=1e-6)

    def test_coherent_marginal(self):
        state = evolve_sequential(GROUND, 4.0, 0.0, 0.0, 60)
        grid = np.linspace(-3, 3, 61)
        pdf = quadrature_pdf(state, grid)
        assert np.abs(pdf - np.pi**-0.5 * np.exp(-grid**2)).max() < 1e-8

    def test_three_peaks_at_operating_point(self):
        state = _evolved(GROUND, 100.0, 2.0)
        grid = np.arange(-6.0, 6.0, 0.01)
        pdf = quadrature_pdf(state, grid)
        interior = (pdf[1:-1] > pdf[:-2]) & (pdf[1:-1] > pdf[2:])
        peaks = grid[1:-1][interior & (pdf[1:-1] > 0.02)]
        assert len(peaks) == 3
        side = math.sqrt(2.0) * 10.0 * math.sin(0.2)
        assert abs(peaks[0] + side) < 0.3
        assert abs(peaks[1]) < 0.05
        assert abs(peaks[2] - side) < 0.3

    def test_rejects_unsorted_grid(self):
        state = evolve_sequential(GROUND, 2.0, 0.0, 0.0, 20)
        with pytest.raises(PreconditionError):
            quadrature_pdf(state, np.array([1.0, 0.0]))


class TestSuccessProbability:
    def test_coherent_window_is_erf2(self):
        # converged cutoff: the [-2, 2] window integral of the untouched
        # coherent state reproduces erf(2) at the 1e-6 level
        state = evolve_sequential(GROUND, 10.0, 0.0, 0.0, 200)
        ph = success_probability(state, window=(-2.0, 2.0), dp=0.002)
        assert ph == pytest.approx(math.erf(2.0), abs=1e-6)

    def test_full_line_gives_one(self):
        state = _evolved(GROUND, 9.0, 1.0, pad=30)
        ph = success_probability(state, window=(-14.0, 14.0), dp=0.01)
        assert ph == pytest.approx(1.0, abs=1e-6)

    def test_operating_point_regression(self):
        state = _evolved(GROUND, 100.0, 2.0)
        ph = success_probability(state, window=(-2.0, 2.0), dp=0.002)
        assert 0.0 < ph < 1.0
        assert ph == pytest.approx(0.559208, abs=5e-4)  # frozen build-time value

    def test_window_validation(self):
        state = evolve_sequential(GROUND, 2.0, 0.0, 0.0, 20)
        with pytest.raises(PreconditionError):
            success_probability(state, window=(2.0, -2.0))


class TestFidelityStar:
    def test_peaks_near_gtau_two(self):
        for nbar in (10.0, 100.0):
            gts = np.arange(0.4, 4.01, 0.2)
            vals = [
                fidelity_star(_evolved(GROUND, nbar, gt), P_SPEC, GROUND, 0.0) for gt in gts
            ]
            peak = gts[int(np.argmax(vals))]
            assert 1.4 <= peak <= 2.6

    def test_small_time_limit_is_half(self):
        val = fidelity_star(_evolved(GROUND, 50.0, 0.01), P_SPEC, GROUND, 0.0)
        assert val == pytest.approx(0.5, abs=1e-3)

    def test_singlet_beats_ground_input(self):
        nbar, gt = 200.0, 2.0
        f_singlet = fidelity_star(_evolved(SINGLET, nbar, gt), P_SPEC, SINGLET, 0.0)
        f_ground = fidelity_star(_evolved(GROUND, nbar, gt), P_SPEC, GROUND, 0.0)
        assert f_singlet >= f_ground

    def test_nondecreasing_in_nbar_at_fixed_time(self):
        vals = [
            fidelity_star(_evolved(GROUND, nbar, 2.0), P_SPEC, GROUND, 0.0)
            for nbar in (10.0, 50.0, 100.0, 200.0)
        ]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_singlet_structure_survives_in_star_branch(self):
        # the W1-projected singlet stays a singlet up to the branch error
        state = _evolved(SINGLET, 100.0, 2.0)
        post = project_coherent(state, 10.0)
        overlap = abs(np.vdot(SINGLET, post.normalized())) ** 2
        assert overlap > 0.99

    def test_undefined_for_starless_input(self):
        c = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)  # c00=c11, c01=c10
        state = _evolved(c, 25.0, 2.0, pad=30)
        with pytest.raises(UndefinedFidelityError):
            fidelity_star(state, P_SPEC, c, 0.0)


class TestW2Kraus:
    def test_columns_are_projected_basis_evolutions(self):
        cfg = SimConfig(nbar=25.0, gtau1=1.5, p=0.3, n_f=80)
        chan = w2_kraus(cfg)
        spec = QuadratureSpec(cfg.resolved_theta, 0.3)
        for i in range(4):
            c = np.zeros(4, dtype=complex)
            c[i] = 1.0
            state = evolve_sequential(c, 5.0, 1.5, 1.5, 80)
            col = project_quadrature(state, spec).amplitudes
            assert np.abs(chan.kraus[:, i] - col).max() < 1e-14

    def test_matches_scaled_projector_regression(self):
        # nbar = 200, symmetric times, p = 0: the normalized Kraus matrix is
        # 0.0526 away from the phase-aligned M/sqrt(2) (frozen baseline).
        cfg = SimConfig(nbar=200.0, gtau1=2.0, p=0.0, n_f=300)
        k = w2_kraus(cfg).kraus
        target = ideal_m(0.0) / math.sqrt(2.0)
        target /= np.linalg.norm(target)
        chi = np.angle(np.vdot(target, k))
        dist = np.linalg.norm(k / np.linalg.norm(k) - np.exp(1j * chi) * target)
        assert dist == pytest.approx(0.052638, abs=5e-4)

    def test_asymmetric_times_differ(self):
        sym = w2_kraus(SimConfig(nbar=100.0, gtau1=2.0, p=0.5, n_f=180)).kraus
        asym = w2_kraus(SimConfig(nbar=100.0, gtau1=2.0, gtau2=2.2, p=0.5, n_f=180)).kraus
        assert np.abs(sym - asym).max() > 1e-3

    def test_rejects_lossy_config(self):
        with pytest.raises(PreconditionError):
            w2_kraus(SimConfig(nbar=25.0, kappa=0.01, n_f=60))


class TestPhAsymptotics:
    def test_two_readings(self):
        divided, multiplied = ph_asymptotics(GROUND, 0.0)
        gauss = math.erf(2.0)
        assert divided == pytest.approx(gauss / 0.5, abs=1e-12)  # exceeds 1
        assert multiplied == pytest.approx(gauss * 0.5, abs=1e-12)
        assert divided > 1.0

    def test_exact_integral_between_readings(self):
        state = _evolved(GROUND, 100.0, 2.0)
        exact = success_probability(state, window=(-2.0, 2.0), dp=0.002)
        _, multiplied = ph_asymptotics(GROUND, 0.0)
        assert abs(exact - multiplied) < 0.1
