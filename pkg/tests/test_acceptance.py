"""Acceptance checks 1-9, one PASS/FAIL line each.

Run directly (``python tests/test_acceptance.py``) or through pytest; in
both cases every check prints its verdict and measured numbers.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from youngmeasure.measure import DEFAULT_BETAS, cdf, compute, density, verify_identity
from youngmeasure.oracle import empirical_pushforward, kolmogorov_distance, tensor_integrals
from youngmeasure.oscillation import (
    OscillationSpec,
    build_example,
    corpus,
    dilate,
    identity,
    unit_generators,
    weight_sum,
)


def check_1():
    t = time.perf_counter()
    ym = compute(build_example("b"))
    ys = np.linspace(0, 1, 200)
    lower, upper = ys < 0.5, ys > 0.5
    g = density(ym, ys)
    err = max(np.max(np.abs(g[lower] - 2 / 3)), np.max(np.abs(g[upper] - 4 / 3)))
    elapsed = time.perf_counter() - t
    return err <= 1e-12 and elapsed < 1, f"max |g - 2/3 or 4/3| = {err:.2e}, {elapsed:.2f} s"


def check_2():
    t = time.perf_counter()
    pf = build_example("c")
    ym = compute(pf)
    ys = np.linspace(-0.99, 0.99, 500)
    want = 1 / (math.pi * np.sqrt(1 - ys * ys))
    rel = float(np.max(np.abs(density(ym, ys) / want - 1)))
    ks = kolmogorov_distance(empirical_pushforward(pf, 10**6), ym)
    elapsed = time.perf_counter() - t
    ok = rel <= 1e-6 and ks < 2e-3 and elapsed < 10
    return ok, f"density rel err {rel:.2e}, KS(N=1e6) {ks:.2e}, {elapsed:.2f} s"


def check_3():
    pf = build_example("d", a=1, b=2)
    ym = compute(pf)
    weights = [a.weight for a in ym.atoms]
    ok_atoms = len(weights) == 2 and abs(weights[0] - 1 / 3) <= 1e-15 and abs(weights[1] - 2 / 3) <= 1e-15
    ks = kolmogorov_distance(empirical_pushforward(pf, 6 * 10**5), ym)
    return ok_atoms and ks <= 2e-6, f"weights {weights}, KS(N=6e5) {ks:.2e}"


def check_4():
    worst = 0.0
    for a, b in ((1, 1), (2, 3), (Fraction(1, 2), 4)):
        for n in (1, 4):
            ym = compute(build_example("a", a=a, b=b, n=n))
            ys = np.linspace(0, float(b), 201)
            worst = max(worst, float(np.max(np.abs(density(ym, ys) - 1 / float(b)))))
    return worst <= 1e-12, f"max |g - 1/b| = {worst:.2e} over 6 cases"


def check_5():
    ks_grid = sorted(set(range(1, 51)) | {10**j for j in range(7)} | {999_999})
    exact = all(weight_sum(n, k) == Fraction(k, n + k) for n in range(1, 11) for k in ks_grid)
    n, k_max = 2, 10**4
    pf = build_example("e", n=n, k_max=k_max)
    ks = kolmogorov_distance(empirical_pushforward(pf, 10**6), compute(identity()))
    bound = n / (n + k_max) + 2e-3
    return exact and ks <= bound, f"telescoping exact: {exact}; KS to uniform {ks:.2e} <= {bound:.2e}"


def check_6():
    t = time.perf_counter()
    worst, checks = 0.0, 0
    for pf in corpus().values():
        rep = verify_identity(pf, DEFAULT_BETAS, 1e-8)
        worst = max(worst, rep.max_residual)
        checks += len(rep.entries)
    elapsed = time.perf_counter() - t
    return worst <= 1e-8 and elapsed < 30, f"{checks} checks, max residual {worst:.2e}, {elapsed:.2f} s"


def check_7():
    worst_g, worst_atom, same_atoms = 0.0, 0.0, True
    for pf in unit_generators().values():
        base = compute(pf)
        klo, khi = base.k_range
        ys = klo + (khi - klo) * (np.arange(200) + 0.5) / 200
        g0 = density(base, ys)
        for c in (1, 2, 3, 7, 32):
            ym = compute(dilate(OscillationSpec(pf, c)))
            worst_g = max(worst_g, float(np.max(np.abs(density(ym, ys) - g0))))
            if len(ym.atoms) != len(base.atoms):
                same_atoms = False
                continue
            for p, q in zip(ym.atoms, base.atoms):
                worst_atom = max(worst_atom, abs(p.location - q.location), abs(p.weight - q.weight))
    ok = worst_g <= 1e-9 and same_atoms and worst_atom <= 1e-12
    return ok, f"density deviation {worst_g:.2e}, atom deviation {worst_atom:.2e}"


def check_8():
    mass_err, cdf_err = 0.0, 0.0
    for pf in list(corpus().values()) + list(unit_generators().values()):
        ym = compute(pf)
        mass_err = max(mass_err, abs(ym.total_mass - 1))
        cdf_err = max(cdf_err, abs(cdf(ym, ym.k_range[1]) - 1))
    return mass_err <= 1e-12 and cdf_err <= 1e-9, f"mass err {mass_err:.2e}, cdf(k_hi) err {cdf_err:.2e}"


def check_9():
    worst = 0.0
    for pf in corpus().values():
        for beta in DEFAULT_BETAS:
            quasi, elementary = tensor_integrals(pf, "1", beta)
            worst = max(worst, abs(quasi - elementary))
    quasi, elementary = tensor_integrals(identity(), "x", "y")
    reported = abs(quasi - 0.25) <= 1e-10 and abs(elementary - 1 / 3) <= 1e-10
    return worst <= 1e-8 and reported, f"alpha=1 max gap {worst:.2e}; alpha=x, beta=y: ({quasi:.6f}, {elementary:.6f})"


CHECKS = {
    1: ("tooth density 2/3 and 4/3", check_1),
    2: ("arcsine law", check_2),
    3: ("two-value atoms", check_3),
    4: ("sawtooth density 1/b", check_4),
    5: ("nonperiodic weights and uniform limit", check_5),
    6: ("defining identity on the corpus", check_6),
    7: ("oscillation invariance", check_7),
    8: ("probability normalization", check_8),
    9: ("tensor reduction", check_9),
}


def _line(number):
    title, fn = CHECKS[number]
    ok, detail = fn()
    return ok, f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    ok, line = _line(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(n) for n in sorted(CHECKS)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
