import numpy as np
import pytest

from sdc_dae.linalg import (SingularMatrixError, Spectrum, eigenvalues,
                            lu_solve, spectral_radius, unpivoted_lu)


class TestLuSolve:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        assert np.array_equal(lu_solve(np.eye(3), b), b)

    def test_diagonal(self):
        x = lu_solve(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 8.0]))
        assert np.allclose(x, [1.0, 2.0], atol=1e-14)

    def test_random_residual(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
        b = rng.standard_normal(8)
        x = lu_solve(A, b)
        norm_A = np.max(np.sum(np.abs(A), axis=1))
        assert np.max(np.abs(A @ x - b)) <= 1e-10 * (norm_A * np.max(np.abs(x))
                                                     + np.max(np.abs(b)))

    def test_singular_names_pivot(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularMatrixError) as exc:
            lu_solve(A, np.array([1.0, 1.0]))
        assert exc.value.pivot_index == 1

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            lu_solve(np.ones((2, 3)), np.ones(2))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            lu_solve(np.eye(3), np.ones(2))


class TestUnpivotedLu:
    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        L, U = unpivoted_lu(A)
        assert np.allclose(L @ U, A, atol=1e-12)
        assert np.allclose(np.diag(L), 1.0)
        assert np.allclose(np.triu(L, 1), 0.0)
        assert np.allclose(np.tril(U, -1), 0.0)

    def test_zero_pivot_raises(self):
        with pytest.raises(SingularMatrixError):
            unpivoted_lu(np.array([[0.0, 1.0], [1.0, 0.0]]))


class TestEigenvalues:
    def test_diagonal(self):
        spec = eigenvalues(np.diag([1.0, -4.0, 0.5]))
        assert np.allclose(sorted(spec.eigenvalues.real), [-4.0, 0.5, 1.0], atol=1e-12)
        assert np.allclose(spec.eigenvalues.imag, 0.0, atol=1e-12)
        assert spec.spectral_radius == pytest.approx(4.0, abs=1e-12)

    def test_rotation(self):
        spec = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert np.allclose(sorted(spec.eigenvalues.imag), [-1.0, 1.0], atol=1e-12)
        assert spec.spectral_radius == pytest.approx(1.0, abs=1e-12)

    def test_companion_roots(self):
        # companion matrix of x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        C = np.array([[6.0, -11.0, 6.0],
                      [1.0, 0.0, 0.0],
                      [0.0, 1.0, 0.0]])
        spec = eigenvalues(C)
        assert np.allclose(sorted(spec.eigenvalues.real), [1.0, 2.0, 3.0], atol=1e-9)

    def test_matches_characteristic_polynomial(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            A = rng.standard_normal((4, 4))
            got = np.sort_complex(eigenvalues(A).eigenvalues)
            want = np.sort_complex(np.roots(np.poly(A)))
            assert np.max(np.abs(got - want)) <= 1e-8

    def test_permutation_similarity_invariance(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((6, 6))
        P = np.eye(6)[rng.permutation(6)]
        assert abs(spectral_radius(A) - spectral_radius(P @ A @ P.T)) <= 1e-10

    def test_conjugate_pairing(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((8, 8))
        ev = eigenvalues(A).eigenvalues
        for lam in ev:
            if abs(lam.imag) > 1e-12:
                assert np.min(np.abs(ev - lam.conjugate())) <= 1e-10

    def test_deterministic_ordering(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((7, 7))
        e1 = eigenvalues(A).eigenvalues
        e2 = eigenvalues(A.copy()).eigenvalues
        assert np.array_equal(e1, e2)
        mods = np.abs(e1)
        assert np.all(np.diff(mods) <= 1e-12)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            eigenvalues(np.eye(65))

    def test_spectrum_radius_consistent(self):
        spec = Spectrum(eigenvalues=np.array([1 + 1j, -2.0 + 0j]))
        assert spec.spectral_radius == pytest.approx(2.0)
