"""Spectrum of H, degenerate-level clustering and the SUSY degeneracy law."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeOperator, frobenius_norm

DENSE_EIG_LIMIT = 8192
DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_ZERO_TOL = 1e-8
HERMITIAN_TOL = 1e-12


class SpectrumError(ValueError):
    pass


def _dense_hermitian(h: LatticeOperator) -> np.ndarray:
    if h.dim > DENSE_EIG_LIMIT:
        raise SpectrumError(f"dimension {h.dim} exceeds the dense eigensolver limit {DENSE_EIG_LIMIT}")
    asym = frobenius_norm(h - h.adjoint())
    if asym > HERMITIAN_TOL * max(frobenius_norm(h), 1.0):
        raise SpectrumError(f"operator is not Hermitian (||H - H^dagger||_F = {asym:.3g})")
    return h.toarray()


def eigen_spectrum(h: LatticeOperator) -> np.ndarray:
    """All eigenvalues of a Hermitian operator, ascending (LAPACK ``heevd``)."""
    return np.linalg.eigvalsh(_dense_hermitian(h))


def eigen_pairs(h: LatticeOperator) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(_dense_hermitian(h))


def degeneracy_divisor(n_supercharges: int) -> int:
    """Guaranteed multiplicity ``2^[N/2]`` of every non-zero level."""
    if n_supercharges < 1:
        raise ValueError("N must be at least 1")
    return 2 ** (n_supercharges // 2)


@dataclass(frozen=True)
class Cluster:
    energy: float
    mult: int


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    clusters: list[Cluster]
    zero_modes: int
    cluster_rel_tol: float = DEFAULT_CLUSTER_TOL
    zero_tol: float = DEFAULT_ZERO_TOL
    n_supercharges: int | None = None
    law_satisfied: bool | None = None
    extra: dict = field(default_factory=dict)

    @property
    def multiplicities(self) -> list[int]:
        return [c.mult for c in self.clusters]

    def to_json(self) -> dict:
        div = degeneracy_divisor(self.n_supercharges) if self.n_supercharges else 1
        out = {
            "zero_modes": self.zero_modes,
            "clusters": [
                {"energy": c.energy, "mult": c.mult, "divisible": c.mult % div == 0, "equal": c.mult == div}
                for c in self.clusters
            ],
            "N": self.n_supercharges,
            "divisor": div,
            "cluster_rel_tol": self.cluster_rel_tol,
            "zero_tol": self.zero_tol,
            "pass": bool(self.law_satisfied),
        }
        out.update(self.extra)
        return out


def cluster_degeneracies(
    eigs, cluster_rel_tol: float = DEFAULT_CLUSTER_TOL, zero_tol: float = DEFAULT_ZERO_TOL
) -> SpectrumReport:
    """Group sorted eigenvalues into levels.

    ``|E| <= zero_tol * scale`` counts as a zero mode; otherwise a value joins
    the running cluster when its gap to the previous value is at most
    ``cluster_rel_tol * scale``.  ``scale = max(1, max |E|)``.
    """
    e = np.asarray(eigs, dtype=float)
    if e.size and np.any(np.diff(e) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    if e.size == 0:
        return SpectrumReport(e, [], 0, cluster_rel_tol, zero_tol)
    scale = max(1.0, float(np.max(np.abs(e))))
    zero = np.abs(e) <= zero_tol * scale
    groups: list[list[float]] = []
    prev = None
    for v in e[~zero]:
        if prev is not None and v - prev <= cluster_rel_tol * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
        prev = v
    clusters = [Cluster(float(np.mean(g)), len(g)) for g in groups]
    return SpectrumReport(e, clusters, int(zero.sum()), cluster_rel_tol, zero_tol)


def check_degeneracy_law(report: SpectrumReport, n_supercharges: int) -> bool:
    """Every non-zero level has multiplicity divisible by ``2^[N/2]``; zero modes are exempt."""
    div = degeneracy_divisor(n_supercharges)
    ok = all(c.mult % div == 0 for c in report.clusters)
    report.n_supercharges = n_supercharges
    report.law_satisfied = ok
    return ok


def analyze_spectrum(
    h: LatticeOperator,
    n_supercharges: int,
    cluster_rel_tol: float = DEFAULT_CLUSTER_TOL,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> SpectrumReport:
    report = cluster_degeneracies(eigen_spectrum(h), cluster_rel_tol, zero_tol)
    check_degeneracy_law(report, n_supercharges)
    return report


def pairing_residual(q0: LatticeOperator, h: LatticeOperator) -> float:
    """``max |eig(H) - sort(eig(Q0)^2)| / ||H||_2``."""
    e_h = eigen_spectrum(h)
    e_q = np.sort(eigen_spectrum(q0) ** 2)
    norm = max(float(np.max(np.abs(e_h))), np.finfo(float).tiny)
    return float(np.max(np.abs(e_h - e_q)) / norm)
