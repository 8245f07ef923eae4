"""Scalar expression language for vector-potential components.

Expressions are real-valued functions of the coordinates ``x, y, z`` and of
named parameters.  The grammar, from loosest to tightest binding::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Besides parsing and evaluation the module classifies how a component behaves
under a coordinate reflection ``x_k -> -x_k`` and, from that, predicts which
diagonal involutions ``sigma_k (x) I_k`` anticommute with the supercharge.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

COORDINATES = ("x", "y", "z")
FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^")

DEFAULT_SEED = 0xC1F0
DEFAULT_SAMPLES = 128
DEFAULT_BOX = 2.0
DEFAULT_PARITY_TOL = 1e-9
MAX_RESAMPLE_FACTOR = 16


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, text: str, offset: int, expected: Sequence[str] = ()):
        self.text = text
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifierError(ExprSyntaxError):
    pass


class UnknownFunctionError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError):
    """Raised when a subexpression is undefined at the evaluation point."""

    def __init__(self, message: str, subexpr: "Expr", point=None):
        self.subexpr = subexpr
        self.point = point
        where = f" at {tuple(point)}" if point is not None else ""
        super().__init__(f"{message} in '{to_string(subexpr)}'{where}")


class SamplingError(ExprError):
    pass


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Const | Var | Neg | Call | BinOp


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Const, Var)):
        return ()
    if isinstance(e, Neg):
        return (e.operand,)
    if isinstance(e, Call):
        return (e.arg,)
    return (e.left, e.right)


def free_names(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    out: set[str] = set()
    for c in children(e):
        out |= free_names(c)
    return out


# ------------------------------------------------------------------------ printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _UNARY_PREC
    return 5


def to_string(e: Expr) -> str:
    """Print ``e`` so that :func:`parse` rebuilds the same tree."""
    if isinstance(e, Const):
        text = repr(float(e.value))
        return f"({text})" if e.value < 0 or text.startswith("-") else text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.operand)
        # "-x^2" already means -(x^2); anything looser needs parentheses
        if _prec(e.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left, right = to_string(e.left), to_string(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < _UNARY_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


# ------------------------------------------------------------------------- parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, names: frozenset[str]):
        self.text = text
        self.names = names
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _fail(self, expected: Sequence[str]):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", self.text, t.pos, expected)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self._fail(["operator", "end of input"])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self._advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self._advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self._advance().text
            operand = self.unary()
            return Neg(operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self._advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Const(float(t.text))
        if t.kind == "ident":
            self._advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownFunctionError(
                        f"unknown function {t.text!r}", self.text, t.pos, FUNCTIONS
                    )
                self._advance()
                arg = self.expr()
                self._expect(")")
                return Call(t.text, arg)
            if t.text not in self.names:
                raise UnknownIdentifierError(
                    f"unknown identifier {t.text!r}", self.text, t.pos, sorted(self.names)
                )
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        self._fail(["number", "identifier", "'('", "'-'"])

    def _expect(self, text: str) -> None:
        if self.tok.kind == "op" and self.tok.text == text:
            self._advance()
        else:
            self._fail([repr(text)])


def parse(text: str, params: Sequence[str] | Mapping[str, float] = ()) -> Expr:
    """Parse ``text`` into an expression tree.

    ``params`` lists the parameter names allowed besides ``x, y, z``.
    """
    names = frozenset(COORDINATES) | frozenset(params)
    return _Parser(text, names).parse()


# ---------------------------------------------------------------------- evaluation


def _int_exponent(value: float) -> int | None:
    if math.isfinite(value) and value == math.floor(value) and abs(value) <= 1 << 20:
        return int(value)
    return None


def _ipow(base, n: int):
    # left-to-right repeated multiplication keeps (-x)^2 == x^2 bit for bit
    if n == 0:
        return base * 0 + 1.0
    result = base
    for _ in range(abs(n) - 1):
        result = result * base
    return 1.0 / result if n < 0 else result


def evaluate(e: Expr, point: Sequence[float], params: Mapping[str, float] | None = None) -> float:
    """Evaluate ``e`` at ``point = (x, y, z)``.

    Raises :class:`ExprDomainError` for ln/sqrt of a negative number, ln 0,
    division by zero, non-integer powers of a non-positive base, or any
    non-finite intermediate.
    """
    env = dict(params or {})
    env.update(zip(COORDINATES, (float(v) for v in point)))
    return _eval(e, env, point)


def _eval(e: Expr, env: Mapping[str, float], point) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"unbound parameter {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env, point)
    if isinstance(e, Call):
        a = _eval(e.arg, env, point)
        if e.func == "ln":
            if a <= 0:
                raise ExprDomainError("logarithm of non-positive value", e, point)
            r = math.log(a)
        elif e.func == "sqrt":
            if a < 0:
                raise ExprDomainError("square root of negative value", e, point)
            r = math.sqrt(a)
        elif e.func == "exp":
            if a > 709.0:
                raise ExprDomainError("exponential overflow", e, point)
            r = math.exp(a)
        elif e.func == "sin":
            r = math.sin(a)
        elif e.func == "cos":
            r = math.cos(a)
        else:
            r = abs(a)
        return r
    a = _eval(e.left, env, point)
    b = _eval(e.right, env, point)
    if e.op == "+":
        r = a + b
    elif e.op == "-":
        r = a - b
    elif e.op == "*":
        r = a * b
    elif e.op == "/":
        if b == 0:
            raise ExprDomainError("division by zero", e, point)
        r = a / b
    else:
        n = _int_exponent(b)
        if n is not None:
            if a == 0 and n < 0:
                raise ExprDomainError("division by zero", e, point)
            r = _ipow(a, n)
        else:
            if a <= 0:
                raise ExprDomainError("non-integer power of non-positive base", e, point)
            r = a**b
    if not math.isfinite(r):
        raise ExprDomainError("non-finite value", e, point)
    return r


def evaluate_points(
    e: Expr, points: np.ndarray, params: Mapping[str, float] | None = None
) -> np.ndarray:
    """Vectorized :func:`evaluate` over an ``(n, 3)`` array of points.

    Agrees with the scalar path to within an ulp or so (numpy's transcendental
    kernels may round differently from ``math``).  On a domain error the first
    offending point is reported.
    """
    points = np.asarray(points, dtype=float)
    env = {k: np.full(len(points), float(v)) for k, v in (params or {}).items()}
    env.update({c: points[:, i] for i, c in enumerate(COORDINATES)})
    return _veval(e, env, points)


def _first_bad(mask: np.ndarray, points: np.ndarray):
    idx = int(np.flatnonzero(mask)[0])
    return tuple(float(v) for v in points[idx])


def _veval(e: Expr, env, points: np.ndarray) -> np.ndarray:
    n = len(points)
    if isinstance(e, Const):
        return np.full(n, e.value)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"unbound parameter {e.name!r}") from None
    if isinstance(e, Neg):
        return -_veval(e.operand, env, points)
    with np.errstate(all="ignore"):
        if isinstance(e, Call):
            a = _veval(e.arg, env, points)
            if e.func == "ln":
                bad = a <= 0
                if bad.any():
                    raise ExprDomainError("logarithm of non-positive value", e, _first_bad(bad, points))
                r = np.log(a)
            elif e.func == "sqrt":
                bad = a < 0
                if bad.any():
                    raise ExprDomainError("square root of negative value", e, _first_bad(bad, points))
                r = np.sqrt(a)
            elif e.func == "exp":
                bad = a > 709.0
                if bad.any():
                    raise ExprDomainError("exponential overflow", e, _first_bad(bad, points))
                r = np.exp(a)
            elif e.func == "sin":
                r = np.sin(a)
            elif e.func == "cos":
                r = np.cos(a)
            else:
                r = np.abs(a)
        else:
            a = _veval(e.left, env, points)
            b = _veval(e.right, env, points)
            if e.op == "+":
                r = a + b
            elif e.op == "-":
                r = a - b
            elif e.op == "*":
                r = a * b
            elif e.op == "/":
                bad = b == 0
                if bad.any():
                    raise ExprDomainError("division by zero", e, _first_bad(bad, points))
                r = a / b
            else:
                r = _vpow(e, a, b, points)
    bad = ~np.isfinite(r)
    if bad.any():
        raise ExprDomainError("non-finite value", e, _first_bad(bad, points))
    return r


def _vpow(e: BinOp, a: np.ndarray, b: np.ndarray, points: np.ndarray) -> np.ndarray:
    r = np.empty_like(a)
    integral = np.isfinite(b) & (b == np.floor(b)) & (np.abs(b) <= 1 << 20)
    for n in np.unique(b[integral]):
        mask = integral & (b == n)
        if n < 0 and (a[mask] == 0).any():
            raise ExprDomainError("division by zero", e, _first_bad(mask & (a == 0), points))
        r[mask] = _ipow(a[mask], int(n))
    rest = ~integral
    if rest.any():
        bad = rest & (a <= 0)
        if bad.any():
            raise ExprDomainError("non-integer power of non-positive base", e, _first_bad(bad, points))
        r[rest] = a[rest] ** b[rest]
    return r


# -------------------------------------------------------------------- field specs


@dataclass(frozen=True)
class VectorPotentialSpec:
    """Three component expressions ``(A_x, A_y, A_z)`` plus parameter values."""

    name: str
    components: tuple[Expr, Expr, Expr]
    params: Mapping[str, float] = field(default_factory=dict)
    sources: tuple[str, str, str] | None = None

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a vector potential has exactly three components")
        clash = set(self.params) & (set(COORDINATES) | set(FUNCTIONS))
        if clash:
            raise ValueError(f"parameter names collide with reserved names: {sorted(clash)}")
        object.__setattr__(self, "params", dict(self.params))
        for c in self.components:
            unbound = free_names(c) - set(COORDINATES) - set(self.params)
            if unbound:
                raise ValueError(f"unbound parameters {sorted(unbound)} in field {self.name!r}")

    @classmethod
    def from_strings(
        cls, name: str, components: Sequence[str], params: Mapping[str, float] | None = None
    ) -> "VectorPotentialSpec":
        params = {k: float(v) for k, v in (params or {}).items()}
        if len(components) != 3:
            raise ValueError("a vector potential has exactly three components")
        exprs = tuple(parse(s, params) for s in components)
        return cls(name, exprs, params, tuple(components))

    def strings(self) -> tuple[str, str, str]:
        if self.sources is not None:
            return self.sources
        return tuple(to_string(c) for c in self.components)

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "A": list(self.strings())}


def load_field(path: str | Path) -> VectorPotentialSpec:
    """Read a field definition file ``{"name", "params", "A": [Ax, Ay, Az]}``."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return field_from_json(payload)


def field_from_json(payload: Mapping) -> VectorPotentialSpec:
    if not isinstance(payload, Mapping) or "A" not in payload:
        raise ValueError("field definition must be an object with an 'A' entry")
    return VectorPotentialSpec.from_strings(
        str(payload.get("name", "field")), list(payload["A"]), payload.get("params", {})
    )


# ------------------------------------------------------------------------- parity


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"
    ZERO = "zero"
    NONE = "none"


@dataclass(frozen=True)
class Sampler:
    count: int = DEFAULT_SAMPLES
    box: float = DEFAULT_BOX
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.count < 16:
            raise ValueError("parity sampling needs at least 16 points")
        if not self.box > 0:
            raise ValueError("sampling box half-width must be positive")


def _reflect(point: np.ndarray, axis: int) -> np.ndarray:
    q = point.copy()
    q[axis] = -q[axis]
    return q


def _sample_pairs(e: Expr, axis: int, sampler: Sampler, params) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(sampler.seed)
    values, mirrored = [], []
    failures = 0
    budget = MAX_RESAMPLE_FACTOR * sampler.count
    while len(values) < sampler.count:
        p = rng.uniform(-sampler.box, sampler.box, size=3)
        try:
            v = evaluate(e, p, params)
            w = evaluate(e, _reflect(p, axis), params)
        except ExprDomainError as exc:
            failures += 1
            if failures > budget:
                raise SamplingError(
                    f"gave up after {failures} domain errors while sampling '{to_string(e)}'"
                ) from exc
            continue
        values.append(v)
        mirrored.append(w)
    return np.array(values), np.array(mirrored)


def component_parity(
    e: Expr,
    axis: int,
    sampler: Sampler = Sampler(),
    tol: float = DEFAULT_PARITY_TOL,
    params: Mapping[str, float] | None = None,
) -> tuple[Parity, float]:
    """Parity verdict of ``e`` under ``x_axis -> -x_axis`` and the deviation behind it.

    ``axis`` is 0-based.  Deviations are relative to ``max(1, max |e|)``.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    v, w = _sample_pairs(e, axis, sampler, params)
    scale = max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(w))))
    dev_zero = float(np.max(np.abs(v))) / scale
    dev_even = float(np.max(np.abs(w - v))) / scale
    dev_odd = float(np.max(np.abs(w + v))) / scale
    if dev_zero <= tol:
        return Parity.ZERO, dev_zero
    if dev_even <= tol:
        return Parity.EVEN, dev_even
    if dev_odd <= tol:
        return Parity.ODD, dev_odd
    return Parity.NONE, min(dev_even, dev_odd)


def parity_of_component(
    e: Expr,
    axis: int,
    sampler: Sampler = Sampler(),
    tol: float = DEFAULT_PARITY_TOL,
    params: Mapping[str, float] | None = None,
) -> Parity:
    return component_parity(e, axis, sampler, tol, params)[0]


@dataclass(frozen=True)
class ParitySignature:
    """Verdicts indexed ``[component][axis]`` (both 0-based)."""

    verdicts: tuple[tuple[Parity, Parity, Parity], ...]
    max_deviation: float

    def __getitem__(self, key: tuple[int, int]) -> Parity:
        j, k = key
        return self.verdicts[j][k]

    def to_json(self) -> dict:
        return {
            f"A{c}": {a: self.verdicts[j][k].value for k, a in enumerate(COORDINATES)}
            for j, c in enumerate(COORDINATES)
        }


def parity_signature(
    spec: VectorPotentialSpec, sampler: Sampler = Sampler(), tol: float = DEFAULT_PARITY_TOL
) -> ParitySignature:
    rows = []
    worst = 0.0
    for comp in spec.components:
        row = []
        for axis in range(3):
            verdict, dev = component_parity(comp, axis, sampler, tol, spec.params)
            row.append(verdict)
            if verdict is not Parity.NONE:
                worst = max(worst, dev)
        rows.append(tuple(row))
    return ParitySignature(tuple(rows), worst)


def axis_admissible(sig: ParitySignature, axis: int) -> bool:
    """Whether ``sigma_axis (x) I_axis`` anticommutes with the supercharge.

    Requires the potential to transform like the momentum under the
    reflection: ``A_axis`` odd (or zero), every other component even (or zero).
    """
    for j in range(3):
        wanted = Parity.ODD if j == axis else Parity.EVEN
        if sig[j, axis] not in (wanted, Parity.ZERO):
            return False
    return True


@dataclass(frozen=True)
class Prediction:
    axes: tuple[int, ...]  # 1-based
    signature: ParitySignature

    @property
    def n_supercharges(self) -> int:
        return len(self.axes) + 1

    def to_json(self) -> dict:
        return {
            "axes": list(self.axes),
            "N": self.n_supercharges,
            "parity": self.signature.to_json(),
            "max_deviation": self.signature.max_deviation,
        }


def predict_supercharges(
    spec: VectorPotentialSpec, sampler: Sampler = Sampler(), tol: float = DEFAULT_PARITY_TOL
) -> Prediction:
    sig = parity_signature(spec, sampler, tol)
    axes = tuple(k + 1 for k in range(3) if axis_admissible(sig, k))
    return Prediction(axes, sig)
