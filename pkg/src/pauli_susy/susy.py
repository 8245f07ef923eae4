"""Supercharges of the lattice Pauli Hamiltonian.

``Q0 = sum_i sigma_i (x) (p_i - A_i)`` and ``H = Q0 @ Q0``.  Extra supercharges
come from involutions ``T = sigma_i (x) G`` (``G`` a reflection, a pi-rotation
or the full inversion) that anticommute with ``Q0`` and with each other; each
such ``T`` gives ``Q = i T Q0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .fielddsl import VectorPotentialSpec, evaluate_points
from .lattice import (
    FULL_INVERSION,
    Grid,
    LatticeOperator,
    SymmetryKind,
    anticommutator,
    commutator,
    frobenius_norm,
    max_abs_entry,
    momentum_op,
    momentum_orbital,
    multiplication_op,
    orbital_symmetry,
    pauli,
    potential_orbital,
    reflection,
    rotation_pi,
    tensor,
)

DEFAULT_ADMISSIBILITY_TOL = 1e-10
DEFAULT_ALGEBRA_TOL = 1e-12
ORBITAL_KINDS: tuple[SymmetryKind, ...] = (
    reflection(0),
    reflection(1),
    reflection(2),
    rotation_pi(0),
    rotation_pi(1),
    rotation_pi(2),
    FULL_INVERSION,
)
_KIND_RANK = {"reflection": 0, "rotation_pi": 1, "full_inversion": 2}


def build_q0(g: Grid, field: VectorPotentialSpec) -> LatticeOperator:
    """Discretized ``sigma . (p - A)``; raises ``ExprDomainError`` if A is undefined on the grid."""
    total = None
    for axis in range(3):
        kinetic = momentum_orbital(g, axis) - potential_orbital(g, field.components[axis], field.params)
        term = tensor(pauli(axis + 1), kinetic)
        total = term if total is None else total + term
    return LatticeOperator(total, hermitian=True, label="Q0")


def build_hamiltonian(q0: LatticeOperator) -> LatticeOperator:
    h = q0 @ q0
    h.hermitian = True
    h.label = "H"
    return h


@dataclass
class CandidateT:
    spin: int
    orbital: SymmetryKind
    op: LatticeOperator
    involution_residual: float
    q0_residual: float | None = None

    @property
    def name(self) -> str:
        return f"(sigma_{self.spin}, {self.orbital.name})"

    @property
    def sort_key(self) -> tuple:
        axis = -1 if self.orbital.axis is None else self.orbital.axis
        return (_KIND_RANK[self.orbital.kind], self.spin, axis)

    @property
    def is_diagonal_reflection(self) -> bool:
        return self.orbital.kind == "reflection" and self.orbital.axis == self.spin - 1

    def to_json(self) -> dict:
        return {"spin": self.spin, "orbital": self.orbital.name, "residual_q0": self.q0_residual}


def make_candidate(g: Grid, spin: int, orbital: SymmetryKind) -> CandidateT:
    op = LatticeOperator(
        tensor(pauli(spin), orbital_symmetry(g, orbital)),
        hermitian=True,
        signed_permutation=True,
        label=f"sigma_{spin} (x) {orbital.name}",
    )
    return CandidateT(spin, orbital, op, involution_residual(op))


def involution_residual(op: LatticeOperator) -> float:
    """Largest entry of ``T^2 - Id``; exactly zero for a signed permutation (x) Pauli."""
    return max_abs_entry(op @ op - identity_like(op))


def enumerate_candidates(g: Grid) -> list[CandidateT]:
    """All 21 products ``sigma_i (x) G`` with axis-aligned ``G``."""
    return [make_candidate(g, s, kind) for s in (1, 2, 3) for kind in ORBITAL_KINDS]


def admissibility(c: CandidateT, q0: LatticeOperator, tol: float = DEFAULT_ADMISSIBILITY_TOL) -> tuple[bool, float]:
    """``||{T, Q0}||_F / ||Q0||_F`` and whether it is within ``tol``."""
    residual = frobenius_norm(anticommutator(c.op, q0)) / frobenius_norm(q0)
    c.q0_residual = residual
    return residual <= tol, residual


def _pair_residual(a: CandidateT, b: CandidateT) -> float:
    return frobenius_norm(anticommutator(a.op, b.op)) / math.sqrt(a.op.dim)


def max_compatible_set(
    candidates: Sequence[CandidateT], tol: float = DEFAULT_ADMISSIBILITY_TOL
) -> list[CandidateT]:
    """Largest subset whose members pairwise anticommute.

    Exhaustive over maximal cliques of the compatibility graph.  Ties prefer
    sets with fewer non-reflection members, then the lexicographically smallest
    list of ``(kind, spin, axis)`` keys.  The result is sorted by that key.
    """
    nodes = sorted(candidates, key=lambda c: c.sort_key)
    n = len(nodes)
    if n == 0:
        return []
    adj = [set() for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if _pair_residual(nodes[i], nodes[j]) <= tol:
            adj[i].add(j)
            adj[j].add(i)

    best: list[int] = []
    best_key = None

    def key(clique: list[int]):
        members = sorted(nodes[k].sort_key for k in clique)
        return (-len(clique), sum(1 for m in members if m[0] != 0), members)

    def expand(r: list[int], p: set[int], x: set[int]):
        nonlocal best, best_key
        if not p and not x:
            k = key(r)
            if best_key is None or k < best_key:
                best, best_key = sorted(r), k
            return
        if best_key is not None and len(r) + len(p) < -best_key[0]:
            return
        for v in sorted(p):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand([], set(range(n)), set())
    return [nodes[k] for k in best]


@dataclass
class SuperchargeSet:
    q0: LatticeOperator
    ts: list[CandidateT]
    qs: list[LatticeOperator]
    hamiltonian: LatticeOperator

    @property
    def n_supercharges(self) -> int:
        return len(self.ts) + 1

    @property
    def all_charges(self) -> list[LatticeOperator]:
        return [self.q0, *self.qs]


def assemble_supercharges(q0: LatticeOperator, ts: Sequence[CandidateT], hamiltonian: LatticeOperator | None = None) -> SuperchargeSet:
    qs = []
    for j, t in enumerate(ts, start=1):
        q = (t.op @ q0) * 1j
        q.hermitian = True
        q.label = f"Q{j}"
        qs.append(q)
    h = hamiltonian if hamiltonian is not None else build_hamiltonian(q0)
    return SuperchargeSet(q0, list(ts), qs, h)


@dataclass
class AlgebraReport:
    n_supercharges: int
    ts: list[dict]
    pairs: list[dict]
    clifford: list[dict]
    commutators: list[dict]
    hermiticity: list[dict]
    tol: float

    @property
    def residuals(self) -> list[float]:
        out = []
        for group in (self.ts, self.pairs, self.clifford, self.commutators, self.hermiticity):
            for row in group:
                out.extend(v for k, v in row.items() if k.startswith("residual") and v is not None)
        return out

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals)

    def to_json(self) -> dict:
        return {
            "N": self.n_supercharges,
            "ts": self.ts,
            "pairs": self.pairs,
            "clifford": self.clifford,
            "commutators": self.commutators,
            "hermiticity": self.hermiticity,
            "max_residual": self.max_residual,
            "pass": self.passed,
            "tol": self.tol,
        }


def verify_superalgebra(s: SuperchargeSet, tol: float = DEFAULT_ALGEBRA_TOL) -> AlgebraReport:
    """Residuals of every superalgebra relation, relative to ``||H||``, ``||Q0||`` or ``||Id||``."""
    h = s.hamiltonian
    h_norm = frobenius_norm(h)
    q0_norm = frobenius_norm(s.q0)
    id_norm = math.sqrt(h.dim)
    eye = identity_like(h)
    charges = s.all_charges

    pairs = []
    for i, j in itertools.combinations_with_replacement(range(len(charges)), 2):
        diff = anticommutator(charges[i], charges[j])
        if i == j:
            diff = diff - h * 2.0
        pairs.append({"i": i, "j": j, "residual": frobenius_norm(diff) / h_norm})

    ts = []
    for t in s.ts:
        r = frobenius_norm(anticommutator(t.op, s.q0)) / q0_norm
        t.q0_residual = r
        ts.append({"spin": t.spin, "orbital": t.orbital.name, "residual_q0": r})

    clifford = []
    for i, j in itertools.combinations_with_replacement(range(len(s.ts)), 2):
        diff = anticommutator(s.ts[i].op, s.ts[j].op)
        if i == j:
            diff = diff - eye * 2.0
        clifford.append({"i": i + 1, "j": j + 1, "residual": frobenius_norm(diff) / id_norm})

    commutators = []
    for j, t in enumerate(s.ts, start=1):
        commutators.append({"op": f"T{j}", "residual": frobenius_norm(commutator(h, t.op)) / h_norm})
    for j, q in enumerate(charges):
        commutators.append({"op": f"Q{j}", "residual": frobenius_norm(commutator(h, q)) / h_norm})

    hermiticity = [
        {"op": f"Q{j}", "residual": frobenius_norm(q - q.adjoint()) / q0_norm}
        for j, q in enumerate(charges)
    ]
    return AlgebraReport(s.n_supercharges, ts, pairs, clifford, commutators, hermiticity, tol)


def identity_like(op: LatticeOperator) -> LatticeOperator:
    return LatticeOperator(sp.identity(op.dim, dtype=np.complex128, format="csr"), True, True)


# ------------------------------------------------------------------ pipeline


@dataclass
class Certification:
    """Outcome of the full lattice search for one field on one grid."""

    field: VectorPotentialSpec
    grid: Grid
    candidates: list[CandidateT]
    admissible: list[CandidateT]
    supercharges: SuperchargeSet
    report: AlgebraReport
    adm_tol: float

    @property
    def n_supercharges(self) -> int:
        return self.supercharges.n_supercharges

    def selected_names(self) -> list[tuple[int, str]]:
        return [(t.spin, t.orbital.name) for t in self.supercharges.ts]

    def to_json(self) -> dict:
        out = {
            "field": self.field.to_json(),
            "grid": self.grid.to_json(),
            "tol_adm": self.adm_tol,
            "candidates": [
                {
                    "spin": c.spin,
                    "orbital": c.orbital.name,
                    "involution": c.involution_residual,
                    "residual_q0": c.q0_residual,
                    "admissible": c in self.admissible,
                }
                for c in self.candidates
            ],
        }
        out.update(self.report.to_json())
        return out


def certify(
    field: VectorPotentialSpec,
    grid: Grid = Grid(),
    adm_tol: float = DEFAULT_ADMISSIBILITY_TOL,
    algebra_tol: float = DEFAULT_ALGEBRA_TOL,
) -> Certification:
    """Build Q0, search all candidate involutions and verify the resulting superalgebra."""
    q0 = build_q0(grid, field)
    candidates = enumerate_candidates(grid)
    admissible = [c for c in candidates if admissibility(c, q0, adm_tol)[0]]
    chosen = max_compatible_set(admissible, adm_tol)
    charges = assemble_supercharges(q0, chosen)
    report = verify_superalgebra(charges, algebra_tol)
    return Certification(field, grid, candidates, admissible, charges, report, adm_tol)


# ------------------------------------------------------- discretization check


def gaussian_state(g: Grid, width: float = 0.4, spinor: Sequence[complex] = (1.0, 0.0)) -> np.ndarray:
    """Discretely normalized Gaussian centred at the origin, times a fixed spinor."""
    r2 = np.sum(g.coordinates() ** 2, axis=1)
    phi = np.exp(-r2 / (2 * width**2))
    chi = np.asarray(spinor, dtype=np.complex128)
    psi = np.kron(chi, phi)
    return psi / np.linalg.norm(psi)


def magnetic_field(g: Grid, field: VectorPotentialSpec) -> np.ndarray:
    """``curl A`` at the grid sites by central differences of the exact A."""
    pts = g.coordinates()
    deriv = np.empty((3, 3, len(pts)))  # deriv[j, k] = d A_j / d x_k
    for k in range(3):
        step = np.zeros(3)
        step[k] = g.spacing[k]
        for j, comp in enumerate(field.components):
            fwd = evaluate_points(comp, pts + step, field.params)
            bwd = evaluate_points(comp, pts - step, field.params)
            deriv[j, k] = (fwd - bwd) / (2 * g.spacing[k])
    return np.stack(
        [deriv[2, 1] - deriv[1, 2], deriv[0, 2] - deriv[2, 0], deriv[1, 0] - deriv[0, 1]]
    )


def pauli_hamiltonian(g: Grid, field: VectorPotentialSpec) -> LatticeOperator:
    """``sum_i (p_i - A_i)^2 - sigma . B`` assembled independently of ``Q0``."""
    total = None
    for axis in range(3):
        pi = momentum_op(g, axis) - multiplication_op(g, field.components[axis], field.params)
        term = pi @ pi
        total = term if total is None else total + term
    b = magnetic_field(g, field)
    for k in range(3):
        zeeman = LatticeOperator(tensor(pauli(k + 1), sp.diags_array(b[k].astype(np.complex128))))
        total = total - zeeman
    total.hermitian = True
    return total


def pauli_consistency_check(
    g: Grid, field: VectorPotentialSpec, state: np.ndarray | None = None
) -> float:
    """``||(Q0^2 - H_pauli) psi||_2`` for a smooth normalized ``psi``; O(h^2) as h -> 0."""
    if state is None:
        state = gaussian_state(g)
    h = build_hamiltonian(build_q0(g, field))
    diff = h - pauli_hamiltonian(g, field)
    return float(np.linalg.norm(diff.apply(state)))
