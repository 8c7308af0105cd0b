"""Fast-oscillating sequences and the worked example families.

A generator ``u`` on ]0,1[ with values in [0,1] produces the sequence
member ``u(c*x - (k-1))`` on ](k-1)/c, k/c], k = 1..c.  Every copy is a
pushforward of the same uniform measure, so the Young measure of the
dilated function equals that of the generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .expr import Const, Var, add, as_expr, mul, parse, sub, substitute
from .piecewise import (
    ConstantPiece,
    Interval,
    MonotonePiece,
    PiecewiseFunction,
    ValidationError,
    to_fraction,
    validate,
)

UNIT = Interval(0, 1)


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class OscillationSpec:
    generator: PiecewiseFunction
    c: int

    def __post_init__(self):
        if isinstance(self.c, bool) or not isinstance(self.c, int) or self.c < 1:
            raise ParameterError(f"dilation count must be a positive integer, got {self.c!r}")
        g = self.generator
        if g.omega != UNIT:
            raise ValidationError(f"generator must live on ]0, 1[, not {g.omega}")
        klo, khi = g.k_range
        if klo < 0 or khi > 1:
            raise ValidationError(f"generator values must lie in [0, 1], got [{klo!r}, {khi!r}]")


def _compose(piece, x_scale, x_shift, domain, v_scale=Fraction(1), v_shift=Fraction(0)):
    """Piece on `domain` whose value at x is v_scale*piece(x_scale*x + x_shift) + v_shift."""
    if isinstance(piece, ConstantPiece):
        return ConstantPiece(domain, v_scale * piece.value + v_shift)
    name = _var_name(piece.expr)
    inner = add(mul(Const(x_scale), Var(name)), Const(x_shift))
    body = substitute(piece.expr, inner)
    body = add(mul(Const(v_scale), body), Const(v_shift))
    increasing = piece.increasing if (x_scale > 0) == (v_scale > 0) else not piece.increasing
    return MonotonePiece(domain, body, increasing)


def _var_name(e):
    if isinstance(e, Var):
        return e.name
    for c in e.children():
        n = _var_name(c)
        if n:
            return n
    return None


def dilate(spec: OscillationSpec) -> PiecewiseFunction:
    """The c-fold oscillating copy of the generator on ]0,1[."""
    c = spec.c
    pieces = []
    for k in range(c):
        for p in spec.generator.pieces:
            dom = Interval((p.domain.lo + k) / c, (p.domain.hi + k) / c)
            pieces.append(_compose(p, Fraction(c), Fraction(-k), dom))
    return validate(PiecewiseFunction(UNIT, tuple(pieces)))


def rescale(pf: PiecewiseFunction, new_omega: Interval, new_k: Interval, old_k=None) -> PiecewiseFunction:
    """Map the domain affinely onto `new_omega` and the values from `old_k`
    (default: the function's own range) onto `new_k`."""
    if not isinstance(new_omega, Interval) or not isinstance(new_k, Interval):
        raise ParameterError("targets must be nondegenerate intervals")
    if old_k is None:
        klo, khi = pf.k_range
        if not klo < khi:
            raise ParameterError("function range is a single point; pass old_k explicitly")
        old_k = Interval(klo, khi)
    om = pf.omega
    x_scale = om.length / new_omega.length
    x_shift = om.lo - new_omega.lo * x_scale
    v_scale = new_k.length / old_k.length
    v_shift = new_k.lo - old_k.lo * v_scale
    pieces = []
    for p in pf.pieces:
        dom = Interval(
            new_omega.lo + (p.domain.lo - om.lo) / x_scale,
            new_omega.lo + (p.domain.hi - om.lo) / x_scale,
        )
        pieces.append(_compose(p, x_scale, x_shift, dom, v_scale, v_shift))
    return validate(PiecewiseFunction(new_omega, tuple(pieces)))


# -- example families ------------------------------------------------------------


def _positive_int(params, name, default):
    v = params.get(name, default)
    try:
        f = to_fraction(v)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a positive integer") from exc
    if f.denominator != 1 or f < 1:
        raise ParameterError(f"{name} must be a positive integer, got {v!r}")
    return int(f)


def _real(params, name, default, positive=False):
    v = params.get(name, default)
    try:
        f = to_fraction(v)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a finite number") from exc
    if positive and f <= 0:
        raise ParameterError(f"{name} must be positive, got {v!r}")
    return f


def _line(slope, intercept):
    return add(mul(Const(slope), Var("x")), Const(intercept))


def teeth(a=1, b=1, n=1) -> PiecewiseFunction:
    """Symmetric sawtooth on ]0,a[ with n teeth of height b."""
    a, b = to_fraction(a), to_fraction(b)
    s = 2 * n * b / a
    pieces = []
    for k in range(n):
        x0, xm, x1 = a * k / n, a * (2 * k + 1) / (2 * n), a * (k + 1) / n
        pieces.append(MonotonePiece(Interval(x0, xm), _line(s, -2 * b * k), True))
        pieces.append(MonotonePiece(Interval(xm, x1), _line(-s, 2 * b * (k + 1)), False))
    return validate(PiecewiseFunction(Interval(0, a), tuple(pieces)))


def tooth() -> PiecewiseFunction:
    """The four-segment tooth with slopes 3, 3/2, -3/2, -3 on ]0,1[."""
    F = Fraction
    spec = [
        ((0, F(1, 6)), "3*x", True),
        ((F(1, 6), F(1, 2)), "3/2*x + 1/4", True),
        ((F(1, 2), F(5, 6)), "-3/2*x + 7/4", False),
        ((F(5, 6), 1), "-3*x + 3", False),
    ]
    pieces = [MonotonePiece(Interval(*d), parse(e), inc) for d, e, inc in spec]
    return validate(PiecewiseFunction(UNIT, tuple(pieces)))


def sine(n=1) -> PiecewiseFunction:
    """sin(2*pi*n*x) on ]0,1[ split at its critical points (2k+1)/(4n)."""
    e = parse("sin(2*pi*x)") if n == 1 else parse(f"sin(2*pi*{n}*x)")
    cuts = [Fraction(0)] + [Fraction(2 * k + 1, 4 * n) for k in range(2 * n)] + [Fraction(1)]
    pieces = [
        MonotonePiece(Interval(cuts[i], cuts[i + 1]), e, i % 2 == 0)
        for i in range(len(cuts) - 1)
    ]
    return validate(PiecewiseFunction(UNIT, tuple(pieces)))


def two_values(a=1, b=2, n=1) -> PiecewiseFunction:
    """a on the first third and b on the rest of each of n cells of ]0,2[."""
    a, b = to_fraction(a), to_fraction(b)
    pieces = []
    for k in range(n):
        x0 = Fraction(2 * k, n)
        xm = x0 + Fraction(2, 3 * n)
        x1 = Fraction(2 * (k + 1), n)
        pieces.append(ConstantPiece(Interval(x0, xm), a))
        pieces.append(ConstantPiece(Interval(xm, x1), b))
    return validate(PiecewiseFunction(Interval(0, 2), tuple(pieces)))


def nonperiodic(n=1, k_max=100) -> PiecewiseFunction:
    """Alternating ramps on ](k-1)/(n+k-1), k/(n+k)[, k = 1..k_max, then 0.

    Every ramp sweeps [0,1]; the truncated tail [k_max/(n+k_max), 1[ is a
    constant-0 piece and becomes an atom of weight n/(n+k_max).
    """
    pieces = []
    for k in range(1, k_max + 1):
        dom = Interval(Fraction(k - 1, n + k - 1), Fraction(k, n + k))
        if k % 2:
            # (x(n+k-1) - k + 1)(n+k)/n
            s = Fraction((n + k - 1) * (n + k), n)
            body = _line(s, Fraction((1 - k) * (n + k), n))
            pieces.append(MonotonePiece(dom, body, True))
        else:
            # (k - x(n+k))(n+k-1)/n
            s = Fraction((n + k) * (n + k - 1), n)
            body = _line(-s, Fraction(k * (n + k - 1), n))
            pieces.append(MonotonePiece(dom, body, False))
    pieces.append(ConstantPiece(Interval(Fraction(k_max, n + k_max), 1), 0))
    return validate(PiecewiseFunction(UNIT, tuple(pieces)))


EXAMPLE_DEFAULTS = {
    "a": {"a": 1, "b": 1, "n": 1},
    "b": {"n": 1},
    "c": {"n": 1},
    "d": {"a": 1, "b": 2, "n": 1},
    "e": {"n": 2, "k_max": 100},
}


def build_example(tag: str, **params) -> PiecewiseFunction:
    """Build one of the five example families a-e."""
    if tag not in EXAMPLE_DEFAULTS:
        raise ParameterError(f"unknown example {tag!r}; expected one of a, b, c, d, e")
    allowed = EXAMPLE_DEFAULTS[tag]
    extra = set(params) - set(allowed)
    if extra:
        raise ParameterError(f"example {tag} takes no parameter(s) {', '.join(sorted(extra))}")
    merged = {**allowed, **params}
    n = _positive_int(merged, "n", 1)
    if tag == "a":
        return teeth(_real(merged, "a", 1, True), _real(merged, "b", 1, True), n)
    if tag == "b":
        return tooth() if n == 1 else dilate(OscillationSpec(tooth(), n))
    if tag == "c":
        return sine(n)
    if tag == "d":
        return two_values(_real(merged, "a", 1), _real(merged, "b", 2), n)
    return nonperiodic(n, _positive_int(merged, "k_max", 100))


def weight_sum(n: int, k_max: int) -> Fraction:
    """n * sum_{k=1}^{k_max} 1/((n+k-1)(n+k)), summed term by term in exact
    rational arithmetic."""
    if n < 1 or k_max < 1:
        raise ParameterError("n and k_max must be positive")
    num, den = 0, 1
    for k in range(1, k_max + 1):
        q = (n + k - 1) * (n + k)
        num = num * q + den
        den = den * q
        g = math.gcd(num, den)
        num //= g
        den //= g
    return Fraction(n * num, den)


def identity(lo=0, hi=1) -> PiecewiseFunction:
    """u(x) = x on ]lo, hi[, whose measure is uniform on [lo, hi]."""
    return validate(PiecewiseFunction(Interval(lo, hi), (MonotonePiece(Interval(lo, hi), Var("x"), True),)))


def constant(p=0, lo=0, hi=1) -> PiecewiseFunction:
    return validate(PiecewiseFunction(Interval(lo, hi), (ConstantPiece(Interval(lo, hi), p),)))


def corpus() -> dict:
    """Named functions exercised by the verification suite."""
    return {
        "identity": identity(),
        "constant(1/3)": constant(Fraction(1, 3)),
        "a(a=2,b=3,n=2)": build_example("a", a=2, b=3, n=2),
        "b(n=1)": build_example("b"),
        "b(n=3)": build_example("b", n=3),
        "c(n=1)": build_example("c"),
        "c(n=2)": build_example("c", n=2),
        "d(a=1,b=2)": build_example("d"),
        "e(n=2,k_max=50)": build_example("e", n=2, k_max=50),
    }


def unit_generators() -> dict:
    """Corpus members moved onto ]0,1[ x [0,1], usable as oscillation generators."""
    unit = Interval(0, 1)
    return {
        "identity": identity(),
        "a(a=1,b=1,n=1)": build_example("a"),
        "b(n=1)": build_example("b"),
        "c(n=1)": rescale(build_example("c"), unit, unit),
        "d(a=1,b=2)": rescale(build_example("d"), unit, unit),
        "e(n=2,k_max=20)": build_example("e", n=2, k_max=20),
    }
