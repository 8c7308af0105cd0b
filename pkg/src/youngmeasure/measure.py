"""Explicit Young measures of piecewise functions.

The measure of ``u`` is the pushforward of normalised Lebesgue measure on
the domain.  Constant pieces give atoms with weight |I|/|Omega|; a
monotone piece ``u_i`` contributes the density
``|(u_i^-1)'(y)| / |Omega|`` on its image.  The measure does not depend on
``x``, so one object describes it.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from .expr import Expr, as_expr, evaluate, render
from .piecewise import (
    EPS_DER,
    FINE_REL_TOL,
    ConstantPiece,
    MonotonePiece,
    PiecewiseFunction,
    SingularityError,
    _bisect,
    inverse_derivative_magnitude,
    validate,
)
from .quadrature import QuadResult, integrate_density, max_panels

QUAD_TOL = 1e-10
DEFAULT_BETAS = ("1", "y", "y^2", "y^3", "sin(y)", "exp(y)")


@dataclass(frozen=True)
class Atom:
    location: float
    weight: float


@dataclass(frozen=True)
class Segment:
    piece: MonotonePiece
    support: tuple
    mass: float


@dataclass(frozen=True)
class YoungMeasure:
    atoms: tuple
    segments: tuple
    omega_length: float
    k_range: tuple
    # 1.0 except when a test deliberately corrupts the measure
    mass_scale: float = 1.0

    @property
    def total_mass(self) -> float:
        return math.fsum([a.weight for a in self.atoms] + [s.mass for s in self.segments]) * self.mass_scale


def compute(pf: PiecewiseFunction, check: bool = True) -> YoungMeasure:
    """Young measure of `pf`: one atom per distinct constant, one density
    segment per monotone piece."""
    if check:
        validate(pf)
    omega_len = pf.omega_length
    atom_weights: dict = {}
    segments = []
    for p in pf.pieces:
        share = p.domain.length / omega_len
        if isinstance(p, ConstantPiece):
            atom_weights[p.value] = atom_weights.get(p.value, Fraction(0)) + share
        else:
            segments.append(Segment(p, p.image(), float(share)))
    atoms = tuple(Atom(float(v), float(w)) for v, w in sorted(atom_weights.items()))
    return YoungMeasure(atoms, tuple(segments), float(omega_len), pf.k_range)


def perturbed(ym: YoungMeasure, delta: float) -> YoungMeasure:
    """Copy of `ym` with every mass scaled by 1 + delta (verification test hook)."""
    return dataclasses.replace(ym, mass_scale=ym.mass_scale * (1.0 + delta))


# -- density ------------------------------------------------------------------


def _segment_density(ym, seg):
    lo, hi = seg.support
    scale = ym.mass_scale / ym.omega_length

    def g(y):
        return inverse_derivative_magnitude(seg.piece, np.clip(y, lo, hi)) * scale

    return g


def _endpoint_slack(ym):
    klo, khi = ym.k_range
    return 64 * np.finfo(float).eps * max(abs(klo), abs(khi), khi - klo, 1e-300)


def density(ym: YoungMeasure, ys) -> np.ndarray:
    """Density of the absolutely continuous part at each of `ys`.

    At a support endpoint inside K a segment counts with weight 1/2, so the
    value there is the mean of the one-sided limits; at the ends of K the
    limit from inside K is used.  Endpoints are matched up to a few ulps of
    |K| since image endpoints such as sin(2*pi) carry rounding.  Atoms
    carry no density.
    """
    ys = np.asarray(ys, dtype=float)
    out = np.zeros(ys.shape)
    klo, khi = ym.k_range
    slack = _endpoint_slack(ym)
    for seg in ym.segments:
        lo, hi = seg.support
        inside = (ys >= lo - slack) & (ys <= hi + slack)
        if not np.any(inside):
            continue
        y_in = ys[inside]
        w = np.ones(y_in.shape)
        w[(np.abs(y_in - lo) <= slack) & (abs(lo - klo) > slack)] = 0.5
        w[(np.abs(y_in - hi) <= slack) & (abs(hi - khi) > slack)] = 0.5
        vals = inverse_derivative_magnitude(seg.piece, np.clip(y_in, lo, hi))
        out[inside] += w * vals
    return out * (ym.mass_scale / ym.omega_length)


def density_at(ym: YoungMeasure, y: float) -> float:
    return float(density(ym, np.array([float(y)]))[0])


# -- distribution function ----------------------------------------------------


def _atom_mass(ym, ys, strict):
    if not ym.atoms:
        return np.zeros(np.shape(ys))
    locs = np.array([a.location for a in ym.atoms])
    cum = np.concatenate([[0.0], np.cumsum([a.weight for a in ym.atoms])])
    idx = np.searchsorted(locs, ys, side="left" if strict else "right")
    return cum[idx] * ym.mass_scale


def cdf(ym: YoungMeasure, y: float) -> float:
    """nu((-inf, y]): atom weights up to y plus quadrature of the density."""
    y = float(y)
    parts = [float(_atom_mass(ym, np.array([y]), strict=False)[0])]
    for seg in ym.segments:
        lo, hi = seg.support
        if y <= lo:
            continue
        r = integrate_density(_segment_density(ym, seg), lo, min(y, hi), tol=QUAD_TOL)
        _warn_unconverged(r, "cdf")
        parts.append(r.value)
    return math.fsum(parts)


def cdf_values(ym: YoungMeasure, ys, left: bool = False) -> np.ndarray:
    """Vectorised distribution function via the antiderivative of the density.

    On a segment the density integrates to |u^-1(y) - u^-1(lo)| / |Omega|,
    so the continuous part only needs the inverse map.  With ``left=True``
    atoms located exactly at a point are excluded (the left limit).
    """
    ys = np.asarray(ys, dtype=float)
    out = _atom_mass(ym, ys, strict=left)
    for seg in ym.segments:
        lo, hi = seg.support
        p = seg.piece
        dlo, dhi = p.bounds
        mid = (ys > lo) & (ys < hi)
        frac = np.where(ys >= hi, 1.0, 0.0)
        if np.any(mid):
            x = _bisect(p, ys[mid], FINE_REL_TOL * (dhi - dlo))
            f = (x - dlo) / (dhi - dlo) if p.increasing else (dhi - x) / (dhi - dlo)
            frac[mid] = np.clip(f, 0.0, 1.0)
        out = out + seg.mass * ym.mass_scale * frac
    return out


# -- integrals ----------------------------------------------------------------


def _warn_unconverged(r: QuadResult, what):
    if not r.converged:
        warnings.warn(
            f"{what}: quadrature hit the panel cap; achieved error estimate {r.error:.3g}",
            RuntimeWarning,
            stacklevel=3,
        )


def _beta_fn(beta):
    beta = as_expr(beta)
    return lambda y: evaluate(beta, np.asarray(y, dtype=float))


def integrate(ym: YoungMeasure, beta) -> float:
    """Integral of beta against the measure (atoms exactly, density by quadrature)."""
    beta_expr = as_expr(beta)
    fn = _beta_fn(beta_expr)
    parts = [a.weight * ym.mass_scale * evaluate(beta_expr, a.location) for a in ym.atoms]
    for seg in ym.segments:
        lo, hi = seg.support
        r = integrate_density(_segment_density(ym, seg), lo, hi, beta=fn, tol=QUAD_TOL)
        _warn_unconverged(r, f"integral of {render(beta_expr)}")
        parts.append(r.value)
    return math.fsum(parts)


def _quad(f, lo, hi):
    limit = min(max_panels(), 50_000)
    value, err, *rest = sp_integrate.quad(
        f, lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=limit, full_output=1
    )
    if len(rest) >= 2 and err > QUAD_TOL:
        warnings.warn(f"quadrature did not reach {QUAD_TOL:g}: error estimate {err:.3g}", RuntimeWarning, stacklevel=3)
    return value


def pushforward_integral(pf: PiecewiseFunction, beta) -> float:
    """(1/|Omega|) times the integral of beta(u(x)) over the domain, piece by piece."""
    beta_expr = as_expr(beta)
    parts = []
    for p in pf.pieces:
        if isinstance(p, ConstantPiece):
            parts.append(float(p.domain.length) * evaluate(beta_expr, float(p.value)))
        else:
            lo, hi = p.bounds
            expr = p.expr
            parts.append(_quad(lambda x: evaluate(beta_expr, evaluate(expr, x)), lo, hi))
    return math.fsum(parts) / float(pf.omega_length)


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class Residual:
    beta: str
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass(frozen=True)
class VerificationReport:
    entries: tuple
    tolerance: float
    ks_distance: Optional[float] = None
    ks_bound: Optional[float] = None
    n_samples: Optional[int] = None

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.entries), default=0.0)

    @property
    def identity_passed(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def oracle_passed(self) -> Optional[bool]:
        if self.ks_distance is None:
            return None
        return self.ks_distance <= self.ks_bound

    @property
    def passed(self) -> bool:
        return self.identity_passed and self.oracle_passed is not False

    def to_dict(self) -> dict:
        doc = {
            "betas": [
                {"beta": e.beta, "lhs": e.lhs, "rhs": e.rhs, "residual": e.residual}
                for e in self.entries
            ],
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "identity_pass": self.identity_passed,
        }
        if self.ks_distance is not None:
            doc["oracle"] = {
                "n_samples": self.n_samples,
                "ks_distance": self.ks_distance,
                "bound": self.ks_bound,
                "pass": self.oracle_passed,
            }
        doc["pass"] = self.passed
        return doc


def verify_identity(
    pf: PiecewiseFunction,
    betas: Iterable = DEFAULT_BETAS,
    tolerance: float = 1e-8,
    ym: Optional[YoungMeasure] = None,
) -> VerificationReport:
    """Compare the integral of each beta against the measure with the
    integral of beta(u(x)) over the domain."""
    if ym is None:
        ym = compute(pf)
    entries = []
    for b in betas:
        e = as_expr(b)
        entries.append(Residual(render(e), integrate(ym, e), pushforward_integral(pf, e)))
    return VerificationReport(tuple(entries), tolerance)


# -- tables ---------------------------------------------------------------------


def format_number(v: float) -> str:
    """Shortest decimal that round-trips; integral values without a fraction part."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v.is_integer() and abs(v) < 2.0**53:
        return str(int(v))
    return repr(v)


def singular_at_end(seg: Segment) -> bool:
    lo, hi = seg.piece.bounds
    d = np.abs(evaluate(seg.piece.derivative, np.array([lo, hi])))
    return bool(np.any(d < EPS_DER))


def table_grid(ym: YoungMeasure, n: int) -> np.ndarray:
    """Uniform grid over K, pulled in by 1e-9|K| when a density is singular at an end."""
    if n < 2:
        raise ValueError("grid size must be at least 2")
    klo, khi = ym.k_range
    if any(singular_at_end(s) for s in ym.segments):
        g = 1e-9 * (khi - klo)
        klo, khi = klo + g, khi - g
    return np.linspace(klo, khi, n)


def density_table(ym: YoungMeasure, n: int):
    """Rows (y, density, cdf) over the table grid."""
    ys = table_grid(ym, n)
    try:
        dens = density(ym, ys)
    except SingularityError:
        dens = np.array([_density_or_inf(ym, y) for y in ys])
    cdfs = cdf_values(ym, ys)
    return list(zip(ys.tolist(), dens.tolist(), cdfs.tolist()))


def _density_or_inf(ym, y):
    try:
        return density_at(ym, y)
    except SingularityError:
        return math.inf


def density_csv(ym: YoungMeasure, n: int) -> str:
    lines = ["y,density,cdf"]
    for y, d, c in density_table(ym, n):
        lines.append(f"{format_number(y)},{format_number(d)},{format_number(c)}")
    return "\n".join(lines) + "\n"


def atoms_csv(ym: YoungMeasure) -> str:
    lines = ["location,weight"]
    for a in ym.atoms:
        lines.append(f"{format_number(a.location)},{format_number(a.weight * ym.mass_scale)}")
    return "\n".join(lines) + "\n"
