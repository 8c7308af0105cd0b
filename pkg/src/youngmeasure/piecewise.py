"""Piecewise functions built from strictly monotone and constant pieces.

Interval endpoints are exact fractions, so partition checks and the
masses derived from piece lengths carry no rounding.  Each piece owns its
half-open domain ``[lo, hi)``; boundary points between pieces belong to
the piece on the right.  The left end of the whole domain is not part of
the (open) domain, so :meth:`PiecewiseFunction.eval` rejects it.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .expr import Expr, ExprDomainError, ExprError, as_expr, differentiate, evaluate, lambdify, render

DEFAULT_SAMPLES = 64
EPS_DER = 1e-12
# relative bisection tolerance used by default and by density evaluation
DEFAULT_REL_TOL = 1e-12
FINE_REL_TOL = 2.0**-52

Number = Union[int, float, str, Fraction]


class PiecewiseError(ValueError):
    pass


class ValidationError(PiecewiseError):
    pass


class OverlapError(ValidationError):
    def __init__(self, i, j, lo, hi):
        self.pieces = (i, j)
        self.overlap = (lo, hi)
        super().__init__(f"pieces {i} and {j} overlap on ]{lo}, {hi}[")


class GapError(ValidationError):
    def __init__(self, lo, hi):
        self.gap = (lo, hi)
        super().__init__(f"subinterval ]{lo}, {hi}[ is not covered by any piece")


class MonotonicityError(ValidationError):
    def __init__(self, index, x, derivative, direction):
        self.index, self.x, self.derivative = index, x, derivative
        super().__init__(
            f"piece {index} declared {direction} but its derivative is "
            f"{derivative:.6g} at x = {x:.6g}"
        )


class UnboundedValueError(ValidationError):
    def __init__(self, index, detail):
        self.index = index
        super().__init__(f"piece {index} is not finite on its closed domain: {detail}")


class OutOfDomainError(PiecewiseError):
    pass


class ImageError(PiecewiseError):
    pass


class SingularityError(PiecewiseError):
    """The inverse derivative blows up: |u'| is below EPS_DER at the preimage."""


def to_fraction(v: Number) -> Fraction:
    """Exact conversion of ints, floats, Fractions and strings like "2/3"."""
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(v, float) and not math.isfinite(v):
        raise ValueError(f"non-finite number {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {v!r}") from exc
    return Fraction(v)


@dataclass(frozen=True)
class Interval:
    """Bounded real interval ]lo, hi[ with lo < hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_fraction(self.lo), to_fraction(self.hi)
        if not lo < hi:
            raise ValidationError(f"empty interval: lo={lo} must be below hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self):
        return f"]{self.lo}, {self.hi}["


class Piece:
    domain: Interval

    @property
    def bounds(self):
        return float(self.domain.lo), float(self.domain.hi)


@dataclass(frozen=True)
class ConstantPiece(Piece):
    domain: Interval
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_fraction(self.value))

    def image(self) -> float:
        return float(self.value)

    def eval(self, x):
        v = float(self.value)
        return np.full(np.shape(x), v) if isinstance(x, np.ndarray) else v


@dataclass(frozen=True)
class MonotonePiece(Piece):
    domain: Interval
    expr: Expr
    increasing: bool

    def __post_init__(self):
        object.__setattr__(self, "expr", as_expr(self.expr))

    @property
    def direction(self) -> str:
        return "increasing" if self.increasing else "decreasing"

    @cached_property
    def derivative(self) -> Expr:
        return differentiate(self.expr)

    @cached_property
    def fn(self):
        return lambdify(self.expr)

    @cached_property
    def derivative_fn(self):
        return lambdify(self.derivative)

    @cached_property
    def end_values(self):
        """Values at the closed domain endpoints (lo, hi)."""
        lo, hi = self.bounds
        return evaluate(self.expr, lo), evaluate(self.expr, hi)

    def image(self):
        """Closed image interval as a (lo, hi) float pair."""
        a, b = self.end_values
        return (a, b) if self.increasing else (b, a)

    def eval(self, x):
        return evaluate(self.expr, x)

    def invert(self, y, tol_x=None):
        return invert(self, y, tol_x)


@dataclass(frozen=True)
class PiecewiseFunction:
    omega: Interval
    pieces: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.pieces:
            raise ValidationError("a piecewise function needs at least one piece")
        ordered = tuple(sorted(self.pieces, key=lambda p: p.domain.lo))
        object.__setattr__(self, "pieces", ordered)

    @cached_property
    def _los(self):
        return [float(p.domain.lo) for p in self.pieces]

    @cached_property
    def k_range(self):
        """Smallest closed interval holding every piece image, as (lo, hi)."""
        lows, highs = [], []
        for p in self.pieces:
            img = p.image()
            if isinstance(img, tuple):
                lows.append(img[0])
                highs.append(img[1])
            else:
                lows.append(img)
                highs.append(img)
        return min(lows), max(highs)

    @property
    def omega_length(self) -> Fraction:
        return self.omega.length

    def eval(self, x: float) -> float:
        return eval_at(self, x)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        lo, hi = float(self.omega.lo), float(self.omega.hi)
        xs = np.asarray(xs, dtype=float)
        if np.any((xs <= lo) | (xs >= hi)):
            raise OutOfDomainError(f"points outside {self.omega}")
        idx = np.searchsorted(np.array(self._los), xs, side="right") - 1
        out = np.empty_like(xs)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = self.pieces[i].eval(xs[sel])
        return out


def eval_at(pf: PiecewiseFunction, x: float) -> float:
    """Value of the piece whose half-open domain holds `x`."""
    x = float(x)
    if not float(pf.omega.lo) < x < float(pf.omega.hi):
        raise OutOfDomainError(f"x = {x!r} is outside {pf.omega}")
    i = bisect.bisect_right(pf._los, x) - 1
    return float(pf.pieces[i].eval(x))


def image(piece: Piece):
    """Closed image (lo, hi) of a monotone piece; the value of a constant one."""
    return piece.image()


def validate(pf: PiecewiseFunction, samples_per_piece: int = DEFAULT_SAMPLES) -> PiecewiseFunction:
    """Check the partition and monotonicity conditions; raise on failure.

    Returns `pf` so builders can chain.
    """
    if samples_per_piece < 1:
        raise ValueError("samples_per_piece must be positive")
    pieces = pf.pieces
    omega = pf.omega
    first, last = pieces[0].domain, pieces[-1].domain
    if first.lo < omega.lo or last.hi > omega.hi:
        raise ValidationError(f"pieces extend outside {omega}")
    if first.lo > omega.lo:
        raise GapError(omega.lo, first.lo)
    for i in range(len(pieces) - 1):
        a, b = pieces[i].domain, pieces[i + 1].domain
        if b.lo < a.hi:
            raise OverlapError(i, i + 1, b.lo, min(a.hi, b.hi))
        if b.lo > a.hi:
            raise GapError(a.hi, b.lo)
    if last.hi < omega.hi:
        raise GapError(last.hi, omega.hi)
    for i, p in enumerate(pieces):
        if isinstance(p, MonotonePiece):
            _check_monotone(i, p, samples_per_piece)
    return pf


def _check_monotone(index, p: MonotonePiece, samples):
    lo, hi = p.bounds
    xs = lo + (hi - lo) * np.arange(1, samples + 1) / (samples + 1)
    try:
        a, b = p.end_values
        evaluate(p.expr, xs)
        d = evaluate(p.derivative, xs)
        d_ends = evaluate(p.derivative, np.array([lo, hi]))
    except ExprDomainError as exc:
        raise UnboundedValueError(index, str(exc)) from exc
    sign = 1.0 if p.increasing else -1.0
    signed = sign * d
    if np.any(signed <= 0):
        j = int(np.argmin(signed))
        raise MonotonicityError(index, float(xs[j]), float(d[j]), p.direction)
    # one-sided: the derivative may vanish at an endpoint, up to rounding
    signed_ends = sign * d_ends
    if np.any(signed_ends < -EPS_DER * max(1.0, float(np.max(np.abs(d))))):
        j = int(np.argmin(signed_ends))
        raise MonotonicityError(index, (lo, hi)[j], float(d_ends[j]), p.direction)
    if not sign * (b - a) > 0:
        raise MonotonicityError(index, hi, 0.0, p.direction)


# -- inversion ----------------------------------------------------------------


def _bisect(p: MonotonePiece, y, tol_x):
    """Vectorised bisection of p.expr(x) = y over the closed piece domain."""
    lo, hi = p.bounds
    width = hi - lo
    if tol_x is None:
        tol_x = DEFAULT_REL_TOL * width
    if not tol_x > 0:
        raise ValueError("tol_x must be positive")
    steps = max(0, math.ceil(math.log2(width / tol_x)))
    y = np.asarray(y, dtype=float)
    a = np.full(y.shape, lo)
    b = np.full(y.shape, hi)
    fn = p.fn
    with np.errstate(all="ignore"):
        for _ in range(min(steps, 64)):
            m = 0.5 * (a + b)
            below = fn(m) < y
            if not p.increasing:
                below = ~below
            a = np.where(below, m, a)
            b = np.where(below, b, m)
    return 0.5 * (a + b)


def _check_in_image(p, y):
    ilo, ihi = p.image()
    y = np.asarray(y, dtype=float)
    bad = (y < ilo) | (y > ihi)
    if np.any(bad):
        v = float(y[bad].flat[0]) if y.ndim else float(y)
        raise ImageError(f"y = {v!r} is outside the image [{ilo!r}, {ihi!r}]")


def invert(p: MonotonePiece, y, tol_x=None):
    """Preimage of `y` under a monotone piece, by bisection.

    Uses at most ceil(log2(|domain| / tol_x)) halvings; `tol_x` defaults
    to 1e-12 times the domain length.  Accepts a float or an array.
    """
    _check_in_image(p, y)
    x = _bisect(p, y, tol_x)
    return x if isinstance(y, np.ndarray) else float(x)


def inverse_derivative_magnitude(p: MonotonePiece, y, tol_x=None):
    """|(u^-1)'(y)| = 1 / |u'(u^-1(y))|; float or array in, same out."""
    if tol_x is None:
        tol_x = FINE_REL_TOL * (p.bounds[1] - p.bounds[0])
    _check_in_image(p, y)
    x = np.atleast_1d(_bisect(p, y, tol_x))
    # an endpoint value is hit exactly at its endpoint; bisection would stop
    # anywhere on the rounding plateau around a flat extremum
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    (dlo, dhi), (vlo, vhi) = p.bounds, p.end_values
    x = np.where(ya == vlo, dlo, np.where(ya == vhi, dhi, x))
    d = np.abs(evaluate(p.derivative, x))
    if np.any(d < EPS_DER):
        j = int(np.argmin(d))
        raise SingularityError(
            f"|u'| = {d[j]:.3g} at x = {x[j]!r}: density is singular there"
        )
    out = 1.0 / d
    return out if isinstance(y, np.ndarray) else float(out[0])


# -- JSON ---------------------------------------------------------------------


def number_to_json(v: Fraction):
    """Ints stay ints, exactly representable values become floats, the rest "p/q"."""
    v = Fraction(v)
    if v.denominator == 1:
        return v.numerator
    f = float(v)
    if Fraction(f) == v:
        return f
    return f"{v.numerator}/{v.denominator}"


def to_json(pf: PiecewiseFunction) -> dict:
    pieces = []
    for p in pf.pieces:
        item = {"interval": [number_to_json(p.domain.lo), number_to_json(p.domain.hi)]}
        if isinstance(p, ConstantPiece):
            item["const"] = number_to_json(p.value)
        else:
            item["expr"] = render(p.expr)
            item["monotone"] = "inc" if p.increasing else "dec"
        pieces.append(item)
    return {
        "omega": [number_to_json(pf.omega.lo), number_to_json(pf.omega.hi)],
        "pieces": pieces,
    }


class SchemaError(PiecewiseError):
    pass


def _interval_from(raw, where):
    if not isinstance(raw, Sequence) or isinstance(raw, str) or len(raw) != 2:
        raise SchemaError(f"{where}: expected a two-element [lo, hi] list")
    try:
        return Interval(to_fraction(raw[0]), to_fraction(raw[1]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def from_json(doc: dict) -> PiecewiseFunction:
    """Build (without validating) a piecewise function from the JSON schema.

    Expression errors propagate as :class:`ExprError`; structural problems
    raise :class:`SchemaError`.
    """
    if not isinstance(doc, dict) or "omega" not in doc or "pieces" not in doc:
        raise SchemaError("expected an object with 'omega' and 'pieces'")
    omega = _interval_from(doc["omega"], "omega")
    raw_pieces = doc["pieces"]
    if not isinstance(raw_pieces, list) or not raw_pieces:
        raise SchemaError("'pieces' must be a nonempty list")
    pieces = []
    for i, item in enumerate(raw_pieces):
        where = f"pieces[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: expected an object")
        dom = _interval_from(item.get("interval"), where + ".interval")
        if "const" in item:
            try:
                pieces.append(ConstantPiece(dom, to_fraction(item["const"])))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{where}.const: {exc}") from exc
        elif "expr" in item:
            mono = item.get("monotone")
            if mono not in ("inc", "dec"):
                raise SchemaError(f"{where}.monotone must be 'inc' or 'dec'")
            try:
                e = as_expr(item["expr"])
            except ExprError as exc:
                raise SchemaError(f"{where}.expr: {exc}") from exc
            pieces.append(MonotonePiece(dom, e, mono == "inc"))
        else:
            raise SchemaError(f"{where}: needs either 'const' or 'expr'")
    return PiecewiseFunction(omega, tuple(pieces))
