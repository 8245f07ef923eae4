"""Built-in magnetic field configurations.

The closed forms are concrete choices matching verbal descriptions of four
classic configurations.  Amplitudes and sizes are arbitrary defaults.
Singular potentials are softened with ``delta^2`` inside even combinations so
no reflection parity is disturbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .fielddsl import VectorPotentialSpec

DEFAULTS: dict[str, dict[str, float]] = {
    "free": {},
    "solenoid": {"b": 1.0, "w": 1.0, "l": 1.0},
    "wire": {"c1": 1.0, "delta": 0.1},
    "octopole": {"a": 1.0, "mu": 1.0, "delta": 0.1},
}
EXPECTED_N = {"free": 4, "solenoid": 2, "wire": 3, "octopole": 4}
NOTES = {
    "free": "zero vector potential",
    "solenoid": "Gaussian flux tube along z, even under z -> -z",
    "wire": "straight current along z, log potential regularized on the axis",
    "octopole": "four z-oriented dipoles at (+-a, +-a, 0), neighbours opposite",
}
POSITIVE = {"w", "l", "a", "delta"}


class UnknownFieldError(KeyError):
    pass


@dataclass(frozen=True)
class NamedField:
    spec: VectorPotentialSpec
    expected_N: int
    note: str

    @property
    def name(self) -> str:
        return self.spec.name

    def to_json(self) -> dict:
        out = self.spec.to_json()
        out["expected_N"] = self.expected_N
        return out


def _octopole_components() -> tuple[str, str, str]:
    # going around the square the dipole signs alternate: sign = sgn(x_j) * sgn(y_j)
    sources = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
    ax, ay = [], []
    for sx, sy in sources:
        s = sx * sy
        dx = f"(x{'-' if sx > 0 else '+'}a)"
        dy = f"(y{'-' if sy > 0 else '+'}a)"
        den = f"({dx}^2+{dy}^2+z^2+delta^2)^1.5"
        # A = mu * s * (z_hat x (r - r_j)) / |r - r_j|^3
        ax.append(f"{'-' if s > 0 else '+'}mu*{dy}/{den}")
        ay.append(f"{'+' if s > 0 else '-'}mu*{dx}/{den}")
    return ("".join(ax).lstrip("+"), "".join(ay).lstrip("+"), "0")


COMPONENTS: dict[str, tuple[str, str, str]] = {
    "free": ("0", "0", "0"),
    "solenoid": (
        "-y*b*exp(-(x^2+y^2)/w^2-z^2/l^2)",
        "x*b*exp(-(x^2+y^2)/w^2-z^2/l^2)",
        "0",
    ),
    "wire": ("0", "0", "-c1*ln(x^2+y^2+delta^2)"),
    "octopole": _octopole_components(),
}


def names() -> list[str]:
    return list(COMPONENTS)


def builtin(name: str, params: Mapping[str, float] | None = None) -> NamedField:
    """Field ``name`` with ``params`` overriding the defaults."""
    if name not in COMPONENTS:
        raise UnknownFieldError(f"unknown builtin field {name!r}; choose from {names()}")
    merged = dict(DEFAULTS[name])
    for key, value in (params or {}).items():
        if key not in merged:
            raise ValueError(f"field {name!r} has no parameter {key!r}")
        merged[key] = float(value)
    for key, value in merged.items():
        if key in POSITIVE and not value > 0:
            raise ValueError(f"parameter {key!r} must be positive, got {value}")
    spec = VectorPotentialSpec.from_strings(name, COMPONENTS[name], merged)
    return NamedField(spec, EXPECTED_N[name], NOTES[name])


def all_builtins() -> list[NamedField]:
    return [builtin(n) for n in names()]
