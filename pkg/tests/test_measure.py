import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from youngmeasure.measure import (
    DEFAULT_BETAS,
    atoms_csv,
    cdf,
    cdf_values,
    compute,
    density,
    density_at,
    density_csv,
    format_number,
    integrate,
    perturbed,
    pushforward_integral,
    table_grid,
    verify_identity,
)
from youngmeasure.oscillation import build_example, constant, corpus, identity, rescale
from youngmeasure.piecewise import Interval, SingularityError, inverse_derivative_magnitude

CORPUS = corpus()
BETA_FAMILY = DEFAULT_BETAS + ("cos(y)",)


def arcsine(y):
    return 1 / (math.pi * math.sqrt(1 - y * y))


def test_step_atoms():
    ym = compute(build_example("d", a=1, b=2))
    assert [(a.location, a.weight) for a in ym.atoms] == [(1.0, 1 / 3), (2.0, 2 / 3)]
    assert ym.segments == ()


def test_constant_is_dirac():
    ym = compute(constant(Fraction(5, 2)))
    assert [(a.location, a.weight) for a in ym.atoms] == [(2.5, 1.0)]


def test_equal_constants_merge():
    from youngmeasure.piecewise import ConstantPiece, PiecewiseFunction

    pf = PiecewiseFunction(
        Interval(0, 3),
        (
            ConstantPiece(Interval(0, 1), 4),
            ConstantPiece(Interval(1, 2), 9),
            ConstantPiece(Interval(2, 3), 4),
        ),
    )
    ym = compute(pf)
    assert [(a.location, a.weight) for a in ym.atoms] == [(4.0, 2 / 3), (9.0, 1 / 3)]


def test_identity_uniform():
    ym = compute(identity())
    assert len(ym.segments) == 1
    ys = np.linspace(0, 1, 101)
    assert np.all(density(ym, ys) == 1.0)


def test_tooth_density_values():
    ym = compute(build_example("b"))
    assert density_at(ym, 0.25) == pytest.approx(2 / 3, abs=1e-14)
    assert density_at(ym, 0.75) == pytest.approx(4 / 3, abs=1e-14)


def test_sine_density_at_zero():
    ym = compute(build_example("c"))
    assert density_at(ym, 0.0) == pytest.approx(1 / math.pi, rel=1e-12)


def test_density_zero_outside():
    for pf in CORPUS.values():
        ym = compute(pf)
        klo, khi = ym.k_range
        w = max(khi - klo, 1.0)
        assert density_at(ym, klo - 0.1 * w) == 0.0
        assert density_at(ym, khi + 0.1 * w) == 0.0


def test_sine_density_singular_at_peak():
    with pytest.raises(SingularityError):
        density_at(compute(build_example("c")), 1.0)


def test_cdf_examples():
    assert cdf(compute(build_example("c")), 0.0) == pytest.approx(0.5, abs=1e-10)
    a, b = 1.0, 2.0
    assert cdf(compute(build_example("d", a=a, b=b)), (a + b) / 2) == pytest.approx(1 / 3, abs=1e-15)
    assert cdf(compute(identity()), 0.25) == pytest.approx(0.25, abs=1e-12)


def test_cdf_arcsine_closed_form():
    ym = compute(build_example("c"))
    for y in (-0.99, -0.5, 0.1, 0.7, 0.999):
        want = 0.5 + math.asin(y) / math.pi
        assert cdf(ym, y) == pytest.approx(want, abs=1e-9)
        assert cdf_values(ym, np.array([y]))[0] == pytest.approx(want, abs=1e-12)


def test_cdf_left_limit_drops_atom():
    ym = compute(build_example("d", a=1, b=2))
    at = cdf_values(ym, np.array([1.0, 2.0]))
    before = cdf_values(ym, np.array([1.0, 2.0]), left=True)
    assert at.tolist() == pytest.approx([1 / 3, 1.0])
    assert before.tolist() == pytest.approx([0.0, 1 / 3])


@pytest.mark.parametrize("name", list(CORPUS))
def test_quadrature_cdf_agrees_with_antiderivative(name):
    ym = compute(CORPUS[name])
    klo, khi = ym.k_range
    ys = np.linspace(klo, khi, 9) if khi > klo else np.array([klo])
    for y in ys:
        assert cdf(ym, y) == pytest.approx(cdf_values(ym, np.array([y]))[0], abs=1e-9)


@pytest.mark.parametrize("name", list(CORPUS))
def test_cdf_monotone(name):
    ym = compute(CORPUS[name])
    klo, khi = ym.k_range
    ys = np.linspace(klo - 0.5, khi + 0.5, 2001)
    vals = cdf_values(ym, ys)
    assert np.all(np.diff(vals) >= -1e-15)
    assert vals[0] == 0.0


@pytest.mark.parametrize("name", list(CORPUS))
def test_total_mass(name):
    ym = compute(CORPUS[name])
    assert abs(ym.total_mass - 1.0) <= 1e-12
    assert abs(cdf(ym, ym.k_range[1]) - 1.0) <= 1e-9


def test_integrate_examples():
    assert integrate(compute(identity()), "y^2") == pytest.approx(1 / 3, abs=1e-10)
    a, b = 1.5, 4.0
    ym = compute(build_example("d", a=a, b=b))
    assert integrate(ym, "y") == pytest.approx((a + 2 * b) / 3, abs=1e-14)
    assert integrate(compute(build_example("c")), "y^2") == pytest.approx(0.5, abs=1e-10)


def test_pushforward_examples():
    assert pushforward_integral(build_example("c"), "y^2") == pytest.approx(0.5, abs=1e-10)
    assert pushforward_integral(constant(2), "exp(y)") == pytest.approx(math.exp(2), rel=1e-15)
    assert pushforward_integral(identity(), "y") == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("name", list(CORPUS))
def test_defining_identity(name):
    report = verify_identity(CORPUS[name], BETA_FAMILY, 1e-8)
    assert report.passed, report.to_dict()
    assert len(report.entries) == 7


def test_verify_sine_square():
    (entry,) = verify_identity(build_example("c"), ["y^2"]).entries
    assert entry.lhs == pytest.approx(0.5, abs=1e-8)
    assert entry.rhs == pytest.approx(0.5, abs=1e-8)


def test_constant_residual_vanishes():
    report = verify_identity(constant(Fraction(1, 3)), BETA_FAMILY)
    assert report.max_residual <= 1e-15


def test_perturbation_fails():
    pf = build_example("b")
    report = verify_identity(pf, ym=perturbed(compute(pf), 0.01))
    assert not report.passed
    assert report.max_residual > 1e-3


def test_by_hand_density_sum():
    for name in ("b(n=3)", "c(n=2)", "e(n=2,k_max=50)", "a(a=2,b=3,n=2)"):
        pf = CORPUS[name]
        ym = compute(pf)
        klo, khi = ym.k_range
        ys = klo + (khi - klo) * (np.arange(1000) + 0.5) / 1000
        want = np.zeros_like(ys)
        for p in pf.pieces:
            if not hasattr(p, "expr"):
                continue
            lo, hi = p.image()
            inside = (ys > lo) & (ys < hi)
            want[inside] += inverse_derivative_magnitude(p, ys[inside])
        want /= float(pf.omega_length)
        # grid points are never image endpoints here
        assert np.allclose(density(ym, ys), want, rtol=1e-12, atol=0), name


@given(st.sampled_from(["b(n=1)", "c(n=1)", "identity", "e(n=2,k_max=50)"]), st.floats(0.25, 8.0))
def test_affine_covariance(name, s):
    pf = CORPUS[name]
    klo, khi = pf.k_range
    old_k = Interval(Fraction(klo), Fraction(khi))
    new_k = Interval(Fraction(s) * old_k.lo, Fraction(s) * old_k.hi)
    scaled = rescale(pf, pf.omega, new_k, old_k=old_k)
    ym, ym_s = compute(pf), compute(scaled)
    assert ym_s.k_range == pytest.approx((s * klo, s * khi), rel=1e-15)
    ys = s * (klo + (khi - klo) * np.linspace(0.01, 0.99, 50))
    assert np.allclose(density(ym_s, ys), density(ym, ys / s) / s, rtol=0, atol=1e-9)


def test_format_number():
    assert format_number(1.0) == "1"
    assert format_number(1 / 3) == "0.3333333333333333"
    assert format_number(float("inf")) == "inf"
    assert float(format_number(0.1 + 0.2)) == 0.1 + 0.2


def test_atoms_csv():
    text = atoms_csv(compute(build_example("d", a=1, b=2)))
    assert text == "location,weight\n1,0.3333333333333333\n2,0.6666666666666666\n"


def test_density_table_clips_singular_ends():
    ym = compute(build_example("c"))
    ys = table_grid(ym, 11)
    assert ys[0] > -1 and ys[-1] < 1
    assert ys[0] == pytest.approx(-1 + 2e-9, abs=1e-15)
    rows = density_csv(ym, 11).splitlines()
    assert rows[0] == "y,density,cdf"
    assert len(rows) == 12
    assert all(math.isfinite(float(r.split(",")[1])) for r in rows[1:])


def test_density_table_identity():
    rows = density_csv(compute(identity()), 5).splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["1"] * 5
