import numpy as np
import pytest

from linresp import (CircleDiffeo, GridFunction, apply_transfer,
                     build_conjugate, compare_l1, constant, cosine,
                     fixed_point_residual, galerkin_matrix, idft,
                     invariant_density, sine, solve_zero_mean, sup_norm,
                     transfer_conjugacy_check, ulam_build, zeros)

from conftest import random_series


class TestApplyTransfer:
    def test_doubling_fixes_uniform(self, doubling):
        out = apply_transfer(doubling, constant(1.0), out_order=8)
        np.testing.assert_allclose(out.coeffs, constant(1.0).with_order(8).coeffs,
                                   atol=1e-12)

    def test_doubling_mode_rule(self, doubling):
        # even modes halve their frequency, odd modes die
        out = apply_transfer(doubling, cosine(2), out_order=4)
        np.testing.assert_allclose(out.coeffs, cosine(1).with_order(4).coeffs,
                                   atol=1e-12)
        assert sup_norm(apply_transfer(doubling, sine(1), out_order=4)) < 1e-12

    def test_wavy_pushforward_of_uniform(self, wavy):
        out = apply_transfer(wavy, constant(1.0), out_order=64)
        assert out.coeff(0) == pytest.approx(1.0, abs=1e-10)
        # Ulam row sums are exact bin averages of L(1)
        model = ulam_build(wavy, 2**15)
        rows = np.asarray(model.matrix.sum(axis=1)).ravel()
        assert compare_l1(rows, out) < 1e-6

    def test_grid_input_returns_grid(self, wavy):
        g = idft(constant(1.0) + cosine(1, 0.3), 256)
        out = apply_transfer(wavy, g)
        assert isinstance(out, GridFunction)
        assert out.size == 256
        series_out = apply_transfer(wavy, constant(1.0) + cosine(1, 0.3),
                                    out_order=64)
        np.testing.assert_allclose(out.samples, idft(series_out, 256).samples,
                                   atol=1e-10)

    def test_integral_preserved(self, doubling, wavy, triple):
        rng = np.random.default_rng(41)
        for circle_map in (doubling, wavy, triple):
            w = random_series(rng, 10)
            out = apply_transfer(circle_map, w, out_order=32)
            assert abs(out.coeff(0) - w.coeff(0)) < 1e-10

    def test_positivity(self, wavy):
        rng = np.random.default_rng(43)
        base = random_series(rng, 6)
        nonneg = GridFunction(idft(base, 256).samples ** 2)
        out = apply_transfer(wavy, nonneg)
        assert np.min(out.samples) > -1e-12


class TestGalerkinMatrix:
    def test_doubling_shift_structure(self, doubling):
        m = galerkin_matrix(doubling, 8)
        expected = np.zeros((17, 17))
        for j in range(-4, 5):
            expected[j + 8, 2 * j + 8] = 1.0
        np.testing.assert_allclose(m.entries, expected, atol=1e-12)

    def test_row_zero_unit(self, wavy):
        m = galerkin_matrix(wavy, 16)
        unit = np.zeros(33)
        unit[16] = 1.0
        np.testing.assert_allclose(m.entries[16], unit, atol=1e-10)

    def test_leading_eigenvalue_one(self, wavy):
        m = galerkin_matrix(wavy, 32)
        eigs = np.linalg.eigvals(m.entries)
        assert np.max(np.abs(eigs)) == pytest.approx(1.0, abs=1e-10)

    def test_matches_pointwise_application(self, wavy):
        # degree <= N/2 polynomials: matrix and pointwise route agree
        rng = np.random.default_rng(47)
        m = galerkin_matrix(wavy, 32)
        w = random_series(rng, 16)
        via_matrix = m.apply(w)
        via_points = apply_transfer(wavy, w, out_order=32)
        assert np.max(np.abs(via_matrix.coeffs - via_points.coeffs)) < 1e-8

    def test_quadrature_floor_enforced(self, doubling):
        with pytest.raises(ValueError, match="quadrature"):
            galerkin_matrix(doubling, 16, quad_size=64)

    def test_debug_serialization(self, doubling):
        m = galerkin_matrix(doubling, 4)
        data = m.to_dict()
        assert data["N"] == 4
        restored = np.array([[complex(re, im) for re, im in row]
                             for row in data["entries"]])
        np.testing.assert_array_equal(restored, m.entries)


class TestInvariantDensity:
    def test_doubling_uniform(self, doubling):
        rho = invariant_density(doubling, 16)
        np.testing.assert_allclose(rho.coeffs, constant(1.0).with_order(16).coeffs,
                                   atol=1e-12)

    def test_triple_uniform(self, triple):
        rho = invariant_density(triple, 16)
        np.testing.assert_allclose(rho.coeffs, constant(1.0).with_order(16).coeffs,
                                   atol=1e-12)

    def test_wavy_matches_ulam(self, wavy, wavy_problem):
        model = ulam_build(wavy, 2**15)
        assert compare_l1(model.stationary, wavy_problem.density) < 1e-3

    def test_pointwise_residual(self, wavy, wavy_problem):
        assert fixed_point_residual(wavy, wavy_problem.density) < 1e-9

    def test_positive_and_normalized(self, wavy_problem):
        rho = wavy_problem.density
        assert rho.coeff(0) == pytest.approx(1.0, abs=1e-12)
        assert np.min(idft(rho, 4096).samples) > 0


class TestSolveZeroMean:
    def test_doubling_odd_mode(self, doubling):
        # L kills sin(2 pi x), so the Neumann series stops immediately
        out = solve_zero_mean(doubling, sine(1), 16)
        np.testing.assert_allclose(out.coeffs, sine(1).with_order(16).coeffs,
                                   atol=1e-12)

    def test_doubling_two_term_series(self, doubling):
        out = solve_zero_mean(doubling, sine(2), 16)
        expected = sine(2) + sine(1)
        np.testing.assert_allclose(out.coeffs, expected.with_order(16).coeffs,
                                   atol=1e-12)

    def test_zero_rhs(self, wavy):
        out = solve_zero_mean(wavy, zeros(4), 16)
        assert np.all(out.coeffs == 0)

    def test_rejects_nonzero_mean(self, wavy):
        with pytest.raises(ValueError, match="mean"):
            solve_zero_mean(wavy, constant(1.0), 16)

    def test_residual_small(self, wavy, wavy_problem):
        rng = np.random.default_rng(53)
        rhs = random_series(rng, 20, zero_mean=True).with_order(64)
        v = solve_zero_mean(wavy, rhs, 64, matrix=wavy_problem.matrix)
        defect = wavy_problem.matrix.apply(v)
        np.testing.assert_allclose((v - defect).coeffs, rhs.coeffs, atol=1e-10)
        assert abs(v.coeff(0)) == 0.0

    def test_restricted_system_well_conditioned(self, wavy_problem):
        cond = wavy_problem.matrix.restricted_condition
        assert np.isfinite(cond) and cond < 1e12

    def test_near_singular_system_reported(self, doubling):
        # hand-built matrix whose restricted I - M is nearly rank one
        from linresp import TransferMatrix
        entries = np.array([[0.0, 0.0, -1.0],
                            [0.0, 1.0, 0.0],
                            [-1.0, 0.0, -1e-13]], dtype=complex)
        shaky = TransferMatrix(entries, 1, 8)
        assert shaky.restricted_condition > 1e12
        with pytest.warns(RuntimeWarning, match="condition"):
            solve_zero_mean(doubling, sine(1, 1e-15), 1, matrix=shaky)


class TestConjugacy:
    def test_identity_diffeo(self, doubling):
        w = constant(1.0) + cosine(1, 0.5)
        residual = transfer_conjugacy_check(doubling, CircleDiffeo.identity(), w)
        assert residual < 1e-12

    def test_small_diffeo_on_wavy(self, wavy):
        h = CircleDiffeo(sine(1, 0.05 / (2 * np.pi)))
        w = constant(1.0) + cosine(1, 0.5)
        assert transfer_conjugacy_check(wavy, h, w) < 1e-8

    def test_density_conjugacy_gives_uniform(self, wavy, wavy_problem):
        # h = integral of rho conjugates to a map preserving Lebesgue
        h = CircleDiffeo.from_density(wavy_problem.density)
        assert transfer_conjugacy_check(wavy, h, wavy_problem.density) < 1e-8
        conj = build_conjugate(wavy, h)
        out = apply_transfer(conj, constant(1.0), out_order=64)
        assert sup_norm(out - constant(1.0)) < 1e-8
