import numpy as np
import pytest
import scipy.sparse as sp

from pauli_susy.lattice import Grid, LatticeOperator, frobenius_norm, identity
from pauli_susy.spectral import (
    SpectrumError,
    analyze_spectrum,
    check_degeneracy_law,
    cluster_degeneracies,
    degeneracy_divisor,
    eigen_pairs,
    eigen_spectrum,
    pairing_residual,
)
from pauli_susy.susy import build_hamiltonian, build_q0, certify


def jacobi_eigenvalues(a, sweeps=60):
    """Cyclic complex Jacobi rotations; an eigensolver independent of LAPACK."""
    a = np.array(a, dtype=complex)
    n = len(a)
    for _ in range(sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < 1e-14 * np.linalg.norm(a):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                phase = apq / abs(apq)
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * abs(apq), aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
    return np.sort(np.diag(a).real)


class TestEigenSpectrum:
    def test_free_three_cubed(self, free):
        g = Grid.cubic(3, 1.0)
        ev = eigen_spectrum(build_hamiltonian(build_q0(g, free)))
        assert len(ev) == g.dim
        # tensor sum of the three-point p^2 spectrum {0, 1/2, 1/2}
        one_d = np.array([0.0, 0.5, 0.5])
        expected = np.sort(np.repeat((one_d[:, None, None] + one_d[None, :, None] + one_d[None, None, :]).ravel(), 2))
        np.testing.assert_allclose(ev, expected, atol=1e-14)
        distinct = sorted({round(v, 10) for v in ev})
        assert distinct == [0.0, 0.5, 1.0, 1.5]

    def test_identity(self, grid3):
        np.testing.assert_array_equal(eigen_spectrum(identity(grid3)), np.ones(grid3.dim))

    def test_diagonal(self):
        op = LatticeOperator(sp.diags_array(np.arange(10, 0, -1).astype(complex)), hermitian=True)
        np.testing.assert_allclose(eigen_spectrum(op), np.arange(1, 11), atol=1e-14)

    def test_non_hermitian_rejected(self):
        op = LatticeOperator(np.array([[0, 1], [0, 0]], dtype=complex))
        with pytest.raises(SpectrumError):
            eigen_spectrum(op)

    def test_matches_jacobi_oracle(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        h = m + m.conj().T
        np.testing.assert_allclose(eigen_spectrum(LatticeOperator(h)), jacobi_eigenvalues(h), atol=1e-10)

    def test_residual_contract(self, grid5, octopole):
        h = build_hamiltonian(build_q0(grid5, octopole))
        w, v = eigen_pairs(h)
        dense = h.toarray()
        res = np.linalg.norm(dense @ v - v * w, axis=0)
        assert np.max(res) <= 1e-10 * np.linalg.norm(dense, 2)


class TestClustering:
    def test_exact_ties(self):
        r = cluster_degeneracies([0, 0.5, 0.5, 0.5, 0.5, 1.0], 1e-8, 1e-8)
        assert r.zero_modes == 1
        assert [(c.energy, c.mult) for c in r.clusters] == [(0.5, 4), (1.0, 1)]

    def test_empty(self):
        r = cluster_degeneracies([])
        assert r.zero_modes == 0 and r.clusters == []

    def test_below_tolerance(self):
        r = cluster_degeneracies([1.0, 1.0 + 1e-12])
        assert r.multiplicities == [2]

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            cluster_degeneracies([1.0, 0.0])

    def test_invariants(self, grid5, solenoid):
        r = cluster_degeneracies(eigen_spectrum(build_hamiltonian(build_q0(grid5, solenoid))))
        assert sum(r.multiplicities) + r.zero_modes == grid5.dim
        energies = [c.energy for c in r.clusters]
        assert all(a < b for a, b in zip(energies, energies[1:]))


class TestDegeneracyLaw:
    def test_divisor(self):
        assert [degeneracy_divisor(n) for n in (1, 2, 3, 4)] == [1, 2, 2, 4]

    def test_n1_always_true(self):
        r = cluster_degeneracies([0.3, 0.7, 0.7, 1.1])
        assert check_degeneracy_law(r, 1)

    def test_detects_violation(self):
        r = cluster_degeneracies([0.3, 0.3, 0.7, 0.7, 0.7])
        assert not check_degeneracy_law(r, 2)
        out = r.to_json()
        assert [c["divisible"] for c in out["clusters"]] == [True, False]
        assert out["pass"] is False

    def test_free_five_cubed(self, grid5, free):
        r = analyze_spectrum(build_hamiltonian(build_q0(grid5, free)), 4)
        assert r.law_satisfied and all(m % 4 == 0 for m in r.multiplicities)

    def test_solenoid_seven_cubed(self, grid7, solenoid):
        r = analyze_spectrum(build_hamiltonian(build_q0(grid7, solenoid)), 2)
        assert r.law_satisfied

    def test_zero_modes_exempt(self):
        r = cluster_degeneracies([0.0, 2.0, 2.0, 2.0, 2.0])
        assert r.zero_modes == 1 and check_degeneracy_law(r, 4)

    def test_json_schema(self):
        r = cluster_degeneracies([0.0, 1.0, 1.0])
        check_degeneracy_law(r, 2)
        out = r.to_json()
        assert {"zero_modes", "clusters", "N", "pass"} <= set(out)
        assert set(out["clusters"][0]) >= {"energy", "mult", "divisible"}


class TestPairing:
    @pytest.mark.parametrize("m", [3, 5])
    @pytest.mark.parametrize("name", ["free", "wire", "solenoid", "octopole"])
    def test_h_is_q0_squared(self, m, name, request):
        spec = request.getfixturevalue(name)
        q0 = build_q0(Grid.cubic(m), spec)
        assert pairing_residual(q0, build_hamiltonian(q0)) <= 1e-9

    def test_involutions_preserve_spectrum(self, grid5, octopole):
        cert = certify(octopole, grid5)
        h = cert.supercharges.hamiltonian
        ev = eigen_spectrum(h)
        for t in cert.supercharges.ts:
            conj = t.op @ h @ t.op
            conj.hermitian = True
            np.testing.assert_allclose(eigen_spectrum(conj), ev, atol=1e-12 * frobenius_norm(h))
