"""Brute-force checks that do not go through the density formula.

The empirical pushforward samples u on a deterministic midpoint grid and
sorts the values; its distribution function is compared with the computed
measure in the Kolmogorov (sup) distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import as_expr, evaluate
from .measure import YoungMeasure, _quad, cdf_values, compute, integrate
from .piecewise import ConstantPiece, PiecewiseFunction


@dataclass(frozen=True)
class EmpiricalDistribution:
    values: np.ndarray  # sorted ascending

    def __post_init__(self):
        if self.values.size < 1:
            raise ValueError("an empirical distribution needs at least one sample")

    @property
    def n(self) -> int:
        return int(self.values.size)

    def ecdf(self, ys, left=False):
        side = "left" if left else "right"
        return np.searchsorted(self.values, ys, side=side) / self.n


def midpoints(pf: PiecewiseFunction, n_samples: int) -> np.ndarray:
    lo, hi = float(pf.omega.lo), float(pf.omega.hi)
    return lo + (np.arange(n_samples) + 0.5) * ((hi - lo) / n_samples)


def empirical_pushforward(pf: PiecewiseFunction, n_samples: int) -> EmpiricalDistribution:
    """Sorted values of u at the n midpoints lo + (j + 1/2)|Omega|/n."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    values = np.sort(pf.eval_array(midpoints(pf, n_samples)), kind="stable")
    values.setflags(write=False)
    return EmpiricalDistribution(values)


def kolmogorov_distance(emp: EmpiricalDistribution, ym: YoungMeasure) -> float:
    """sup_y |F_n(y) - F(y)| for the mixed atomic/continuous F of `ym`.

    Both functions are right-continuous and F_n is constant between
    samples, so the supremum is attained at a sample value or as the left
    limit there.
    """
    v, counts = np.unique(emp.values, return_counts=True)
    at = np.cumsum(counts) / emp.n
    before = at - counts / emp.n
    f_at = cdf_values(ym, v)
    f_before = cdf_values(ym, v, left=True)
    return float(max(np.max(np.abs(at - f_at)), np.max(np.abs(before - f_before))))


def ks_bound(pf: PiecewiseFunction, n_samples: int) -> float:
    """Distance bound for the midpoint grid: each piece miscounts by at most
    one sample, so |F_n - F| <= pieces/n."""
    return len(pf.pieces) / n_samples + 1e-9


def tensor_integrals(pf: PiecewiseFunction, alpha, beta):
    """Both sides of the product-test-function comparison.

    quasi side:      (1/|Omega|) int alpha dx * int beta dnu
    elementary side: (1/|Omega|) int alpha(x) beta(u(x)) dx
    """
    alpha, beta = as_expr(alpha), as_expr(beta)
    lo, hi = float(pf.omega.lo), float(pf.omega.hi)
    omega_len = float(pf.omega_length)
    alpha_mean = _quad(lambda x: evaluate(alpha, x), lo, hi) / omega_len
    quasi = alpha_mean * integrate(compute(pf), beta)
    parts = []
    for p in pf.pieces:
        a, b = p.bounds
        if isinstance(p, ConstantPiece):
            bv = evaluate(beta, float(p.value))
            parts.append(bv * _quad(lambda x: evaluate(alpha, x), a, b))
        else:
            expr = p.expr
            parts.append(_quad(lambda x: evaluate(alpha, x) * evaluate(beta, evaluate(expr, x)), a, b))
    return quasi, math.fsum(parts) / omega_len


def oracle_report(pf: PiecewiseFunction, n_samples: int, ym: YoungMeasure = None, bound: float = None) -> dict:
    if ym is None:
        ym = compute(pf)
    d = kolmogorov_distance(empirical_pushforward(pf, n_samples), ym)
    if bound is None:
        bound = ks_bound(pf, n_samples)
    return {"n_samples": n_samples, "ks_distance": d, "bound": bound, "pass": d <= bound}
