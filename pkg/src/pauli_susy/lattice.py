"""Spinor lattice Hilbert space and the operators acting on it.

The state space is ``C^2 (x) C^D`` with ``D = Mx*My*Mz`` orbital sites.  A
basis index is ``spin * D + (ix * My + iy) * Mz + iz``.  Coordinates are
symmetric about the origin so every coordinate reflection is an exact
permutation of sites.

Units are fixed to hbar = 1, e/c = 1, 2m = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .fielddsl import Expr, ExprDomainError, evaluate_points

BOUNDARY_CONDITIONS = ("dirichlet", "periodic")
DEFAULT_POINTS = (7, 7, 7)
DEFAULT_SPACING = (0.5, 0.5, 0.5)
DENSE_LIMIT = 4096


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    points: tuple[int, int, int] = DEFAULT_POINTS
    spacing: tuple[float, float, float] = DEFAULT_SPACING
    bc: str = "dirichlet"

    def __post_init__(self):
        pts = tuple(int(m) for m in self.points)
        hs = tuple(float(h) for h in self.spacing)
        if len(pts) != 3 or len(hs) != 3:
            raise ValueError("grid needs three point counts and three spacings")
        for m in pts:
            if m < 3 or m % 2 == 0:
                raise ValueError(f"points per axis must be odd and >= 3, got {m}")
        for h in hs:
            if not h > 0:
                raise ValueError(f"spacing must be positive, got {h}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "spacing", hs)

    @classmethod
    def cubic(cls, m: int, h: float = 0.5, bc: str = "dirichlet") -> "Grid":
        return cls((m, m, m), (h, h, h), bc)

    @property
    def orbital_dim(self) -> int:
        mx, my, mz = self.points
        return mx * my * mz

    @property
    def dim(self) -> int:
        return 2 * self.orbital_dim

    def axis_coords(self, axis: int) -> np.ndarray:
        m, h = self.points[axis], self.spacing[axis]
        return (np.arange(m) - (m - 1) / 2) * h

    def coordinates(self) -> np.ndarray:
        """``(D, 3)`` array of site coordinates in basis order."""
        xs, ys, zs = np.meshgrid(*(self.axis_coords(k) for k in range(3)), indexing="ij")
        return np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)

    def to_json(self) -> dict:
        return {"points": list(self.points), "spacing": list(self.spacing), "bc": self.bc}


class LatticeOperator:
    """Complex linear operator on the spinor lattice, stored as CSR.

    Instances are treated as immutable; every operation returns a new one.
    """

    __slots__ = ("mat", "hermitian", "signed_permutation", "label")

    def __init__(self, mat, hermitian: bool | None = None, signed_permutation: bool = False, label: str = ""):
        m = sp.csr_array(mat, dtype=np.complex128)
        m.sum_duplicates()
        self.mat = m
        self.hermitian = hermitian
        self.signed_permutation = signed_permutation
        self.label = label

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.mat.shape

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.mat.data))

    def toarray(self) -> np.ndarray:
        return self.mat.toarray()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.mat @ np.asarray(vec, dtype=np.complex128)

    def _check(self, other: "LatticeOperator") -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"operator shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        herm = True if (self.hermitian and other.hermitian) else None
        return LatticeOperator(self.mat + other.mat, hermitian=herm)

    def __sub__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        herm = True if (self.hermitian and other.hermitian) else None
        return LatticeOperator(self.mat - other.mat, hermitian=herm)

    def __neg__(self) -> "LatticeOperator":
        return LatticeOperator(-self.mat, self.hermitian, self.signed_permutation)

    def __matmul__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return LatticeOperator(self.mat @ other.mat)

    def __mul__(self, c: complex) -> "LatticeOperator":
        herm = self.hermitian if np.isreal(c) else None
        return LatticeOperator(self.mat * c, hermitian=herm)

    __rmul__ = __mul__

    def adjoint(self) -> "LatticeOperator":
        return LatticeOperator(self.mat.conj().T, self.hermitian, self.signed_permutation)

    def __repr__(self) -> str:
        name = f" {self.label}" if self.label else ""
        return f"<LatticeOperator{name} dim={self.dim} nnz={self.nnz}>"


# ------------------------------------------------------------------ op algebra


def add(a: LatticeOperator, b: LatticeOperator) -> LatticeOperator:
    return a + b


def scale(a: LatticeOperator, c: complex) -> LatticeOperator:
    return a * c


def compose(a: LatticeOperator, b: LatticeOperator) -> LatticeOperator:
    return a @ b


def adjoint(a: LatticeOperator) -> LatticeOperator:
    return a.adjoint()


def commutator(a: LatticeOperator, b: LatticeOperator) -> LatticeOperator:
    return a @ b - b @ a


def anticommutator(a: LatticeOperator, b: LatticeOperator) -> LatticeOperator:
    return a @ b + b @ a


def frobenius_norm(a: LatticeOperator) -> float:
    return float(np.sqrt(np.sum(np.abs(a.mat.data) ** 2)))


def max_abs_entry(a: LatticeOperator) -> float:
    return float(np.max(np.abs(a.mat.data))) if a.mat.data.size else 0.0


def identity(g: Grid) -> LatticeOperator:
    return LatticeOperator(sp.identity(g.dim, dtype=np.complex128, format="csr"), True, True, "Id")


# ---------------------------------------------------------------- spin factor

_PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    2: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    3: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli(i: int) -> np.ndarray:
    """Pauli matrix ``sigma_i`` for ``i`` in 1..3 (0 gives the identity)."""
    if i == 0:
        return np.eye(2, dtype=np.complex128)
    if i not in _PAULI:
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {i}")
    return _PAULI[i].copy()


def _orbital_identity(g: Grid):
    return sp.identity(g.orbital_dim, dtype=np.complex128, format="csr")


def tensor(spin: np.ndarray, orbital) -> sp.csr_array:
    return sp.csr_array(sp.kron(sp.csr_array(spin), sp.csr_array(orbital), format="csr"))


def embed_spin(s: np.ndarray, g: Grid) -> LatticeOperator:
    s = np.asarray(s, dtype=np.complex128)
    herm = bool(np.array_equal(s, s.conj().T))
    return LatticeOperator(tensor(s, _orbital_identity(g)), hermitian=herm)


def embed_orbital(orbital, g: Grid, **flags) -> LatticeOperator:
    return LatticeOperator(tensor(np.eye(2), orbital), **flags)


# ------------------------------------------------------------- orbital factors


def _along_axis(one_d, axis: int, g: Grid):
    """``one_d`` acting on ``axis``, identity on the other two."""
    factors = [sp.identity(m, dtype=np.complex128, format="csr") for m in g.points]
    factors[axis] = sp.csr_array(one_d)
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def _shift(m: int, periodic: bool):
    """Forward shift ``(S psi)_n = psi_{n+1}``."""
    rows = np.arange(m - 1)
    cols = rows + 1
    if periodic:
        rows = np.append(rows, m - 1)
        cols = np.append(cols, 0)
    return sp.csr_array((np.ones(len(rows), dtype=np.complex128), (rows, cols)), shape=(m, m))


def momentum_1d(m: int, h: float, bc: str = "dirichlet"):
    """Central difference ``-i (S+ - S-) / 2h`` on ``m`` points."""
    s_plus = _shift(m, bc == "periodic")
    return (s_plus - s_plus.T) * (-1j / (2 * h))


def momentum_orbital(g: Grid, axis: int):
    """Orbital factor of :func:`momentum_op` as a sparse ``D x D`` matrix."""
    return _along_axis(momentum_1d(g.points[axis], g.spacing[axis], g.bc), axis, g)


def momentum_op(g: Grid, axis: int) -> LatticeOperator:
    return embed_orbital(momentum_orbital(g, axis), g, hermitian=True, label=f"p_{'xyz'[axis]}")


def potential_orbital(g: Grid, e: Expr, params: Mapping[str, float] | None = None):
    values = evaluate_points(e, g.coordinates(), params)
    return sp.diags_array(values.astype(np.complex128), format="csr")


def multiplication_op(
    g: Grid, e: Expr, params: Mapping[str, float] | None = None, label: str = ""
) -> LatticeOperator:
    """Diagonal operator ``psi(r) -> e(r) psi(r)``.

    Raises :class:`ExprDomainError` naming the grid point where ``e`` is undefined.
    """
    return embed_orbital(potential_orbital(g, e, params), g, hermitian=True, label=label)


def field_values(g: Grid, e: Expr, params: Mapping[str, float] | None = None) -> np.ndarray:
    return evaluate_points(e, g.coordinates(), params)


SYMMETRY_KINDS = ("reflection", "rotation_pi", "full_inversion")


@dataclass(frozen=True, order=True)
class SymmetryKind:
    """Coordinate-axis involution: reflection ``I_k``, rotation ``R_k(pi)`` or inversion ``I``."""

    kind: str
    axis: int | None = None  # 0-based; None for full inversion

    def __post_init__(self):
        if self.kind not in SYMMETRY_KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if (self.kind == "full_inversion") != (self.axis is None):
            raise ValueError("full inversion takes no axis; the others need one")
        if self.axis is not None and self.axis not in (0, 1, 2):
            raise ValueError(f"axis must be 0, 1 or 2, got {self.axis}")

    @property
    def flipped_axes(self) -> tuple[int, ...]:
        if self.kind == "reflection":
            return (self.axis,)
        if self.kind == "rotation_pi":
            return tuple(k for k in range(3) if k != self.axis)
        return (0, 1, 2)

    @property
    def name(self) -> str:
        if self.kind == "full_inversion":
            return "I"
        axis = "xyz"[self.axis]
        return f"I_{axis}" if self.kind == "reflection" else f"R_{axis}(pi)"

    @classmethod
    def parse(cls, name: str) -> "SymmetryKind":
        if name == "I":
            return cls("full_inversion")
        if name.startswith("I_") and name[2:] in ("x", "y", "z"):
            return cls("reflection", "xyz".index(name[2:]))
        if name.startswith("R_") and name.endswith("(pi)") and name[2:-4] in ("x", "y", "z"):
            return cls("rotation_pi", "xyz".index(name[2:-4]))
        raise ValueError(f"unrecognised symmetry name {name!r}")


def reflection(axis: int) -> SymmetryKind:
    return SymmetryKind("reflection", axis)


def rotation_pi(axis: int) -> SymmetryKind:
    return SymmetryKind("rotation_pi", axis)


FULL_INVERSION = SymmetryKind("full_inversion")


def _flip(m: int):
    idx = np.arange(m)
    return sp.csr_array((np.ones(m, dtype=np.complex128), (idx, idx[::-1])), shape=(m, m))


def orbital_symmetry(g: Grid, kind: SymmetryKind):
    factors = [
        _flip(m) if k in kind.flipped_axes else sp.identity(m, dtype=np.complex128, format="csr")
        for k, m in enumerate(g.points)
    ]
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def symmetry_op(g: Grid, kind: SymmetryKind) -> LatticeOperator:
    return embed_orbital(
        orbital_symmetry(g, kind), g, hermitian=True, signed_permutation=True, label=kind.name
    )


# ------------------------------------------------------------------- triplet I/O


def dump_triplets(op: LatticeOperator, fh) -> None:
    """Write ``dim N nnz K`` then one ``row col re im`` line per nonzero."""
    coo = op.mat.tocoo()
    keep = coo.data != 0
    rows, cols, data = coo.row[keep], coo.col[keep], coo.data[keep]
    order = np.lexsort((cols, rows))
    fh.write(f"dim {op.dim} nnz {len(order)}\n")
    for k in order:
        v = data[k]
        fh.write(f"{rows[k]} {cols[k]} {float(v.real):.17g} {float(v.imag):.17g}\n")


def load_triplets(lines: Iterable[str]) -> LatticeOperator:
    it = iter(lines)
    header = next(it).split()
    if len(header) != 4 or header[0] != "dim" or header[2] != "nnz":
        raise ValueError("triplet file must start with 'dim N nnz K'")
    n, nnz = int(header[1]), int(header[3])
    rows, cols, vals = [], [], []
    for line in it:
        if not line.strip():
            continue
        r, c, re_, im = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(complex(float(re_), float(im)))
    if len(vals) != nnz:
        raise ValueError(f"header announces {nnz} entries, found {len(vals)}")
    return LatticeOperator(sp.csr_array((np.array(vals, dtype=np.complex128), (rows, cols)), shape=(n, n)))


__all__: Sequence[str] = (
    "Grid",
    "LatticeOperator",
    "SymmetryKind",
    "ExprDomainError",
    "add",
    "adjoint",
    "anticommutator",
    "commutator",
    "compose",
    "embed_spin",
    "frobenius_norm",
    "identity",
    "max_abs_entry",
    "momentum_op",
    "multiplication_op",
    "pauli",
    "reflection",
    "rotation_pi",
    "FULL_INVERSION",
    "scale",
    "symmetry_op",
    "dump_triplets",
    "load_triplets",
)
