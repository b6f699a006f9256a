import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from racreach.stochastics import (
    DEFAULT_TAU,
    DegenerateBoundsError,
    Exponential,
    FoldedNormal,
    Uniform,
    interval_mass,
    joint_density,
    pdf,
    tighten_bounds,
)

DISTS = [FoldedNormal(0, 1), FoldedNormal(6, 3), FoldedNormal(2, 0.75), Exponential(1), Exponential(0.05), Uniform(2, 5)]


@pytest.mark.parametrize(
    "d,x,expected",
    [
        (Exponential(1), 0.0, 1.0),
        (Exponential(2), 0.0, 2.0),
        (FoldedNormal(0, 1), 0.0, 0.7978845608),
        (Uniform(2, 5), 3.0, 1 / 3),
        (Uniform(2, 5), 6.0, 0.0),
        (Exponential(1), -1.0, 0.0),
    ],
)
def test_pdf_values(d, x, expected):
    assert pdf(d, x) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize(
    "d,lo,hi,expected",
    [
        (Exponential(1), 0, 1, 1 - math.exp(-1)),
        (Uniform(2, 5), 0, 4, 2 / 3),
        (FoldedNormal(0, 1), 0, 1.959963984540054, 0.95),
        (Exponential(3), 2, 2, 0.0),
    ],
)
def test_interval_mass(d, lo, hi, expected):
    assert interval_mass(d, lo, hi) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.describe())
def test_normalisation(d):
    if isinstance(d, FoldedNormal):
        top = 60 * d.sigma + d.mu
    elif isinstance(d, Exponential):
        top = 100 / d.rate
    else:
        top = d.b
    assert interval_mass(d, 0, top) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.describe())
def test_pdf_is_derivative_of_mass(d):
    h = 1e-5
    for x in np.linspace(0.1, 10, 23):
        if isinstance(d, Uniform) and min(abs(x - d.a), abs(x - d.b)) < 2 * h:
            continue
        slope = (interval_mass(d, 0, x + h) - interval_mass(d, 0, x - h)) / (2 * h)
        assert slope == pytest.approx(d.pdf(x), abs=1e-6)


def test_pdf_array_matches_scalar():
    xs = np.array([-1.0, 0.0, 0.5, 3.0, 7.5])
    for d in DISTS:
        assert np.allclose(d.pdf_array(xs), [d.pdf(x) for x in xs])


def test_far_tail_mass_is_tiny_not_zero_or_nan():
    d = FoldedNormal(2, 0.75)
    tail = d.mass(100, math.inf)
    assert 0.0 <= tail < 1e-300 and not math.isnan(tail)
    assert 0 < FoldedNormal(0, 1).mass(9, 9.5) < 1e-18


def test_joint_density():
    assert joint_density([Exponential(1), Exponential(1)], [0, 0]) == 1.0
    assert joint_density([Exponential(1), Exponential(2)], [0, 0]) == 2.0
    assert joint_density([Exponential(1), FoldedNormal(0, 1)], [1, 0]) == pytest.approx(0.29352, abs=1e-5)
    with pytest.raises(ValueError):
        joint_density([Exponential(1)], [1, 2])


@pytest.mark.parametrize(
    "factory",
    [lambda: FoldedNormal(-1, 1), lambda: FoldedNormal(1, 0), lambda: Exponential(0), lambda: Uniform(3, 2)],
)
def test_parameter_validation(factory):
    with pytest.raises(ValueError):
        factory()


def test_sampling_agrees_with_mass():
    rng = np.random.default_rng(1)
    for d in DISTS:
        s = d.sample(rng, 200_000)
        assert (s >= 0).all()
        emp = np.mean((s >= 1) & (s <= 3))
        assert emp == pytest.approx(d.mass(1, 3), abs=5 * math.sqrt(0.25 / 200_000))


def test_tighten_examples():
    e = tighten_bounds(Exponential(1), 100)
    assert e.lo == 0 and e.hi == pytest.approx(54 * math.log(2), abs=1e-9)
    u = tighten_bounds(Uniform(2, 5), 4)
    assert (u.lo, u.hi) == (2.0, 4.0)
    f = tighten_bounds(FoldedNormal(6, 3), 12)
    assert f.lo == pytest.approx(0, abs=1e-6) and f.hi == 12


def test_tighten_errors():
    with pytest.raises(ValueError):
        tighten_bounds(Exponential(1), 10, tau=1.0)
    with pytest.raises(ValueError):
        tighten_bounds(Exponential(1), 0)
    with pytest.raises(DegenerateBoundsError):
        tighten_bounds(Uniform(5, 6), 4)


def _family():
    fn = st.builds(FoldedNormal, st.floats(0, 15), st.floats(0.1, 5))
    ex = st.builds(Exponential, st.floats(0.01, 10))
    un = st.tuples(st.floats(0, 10), st.floats(0.1, 10)).map(lambda ab: Uniform(ab[0], ab[0] + ab[1]))
    return st.one_of(fn, ex, un)


@given(_family(), st.floats(1, 80), st.sampled_from([DEFAULT_TAU, 1e-12, 1e-6]))
def test_tighten_discards_at_most_two_tau(d, t_int, tau):
    try:
        b = tighten_bounds(d, t_int, tau)
    except DegenerateBoundsError:
        assert interval_mass(d, 0, t_int) <= 2 * tau
        return
    assert 0 <= b.lo < b.hi <= t_int
    # discarded tails, so that no two numbers near one are subtracted
    assert interval_mass(d, 0, b.lo) + interval_mass(d, b.hi, t_int) <= 2 * tau


@given(st.builds(FoldedNormal, st.floats(0, 15), st.floats(0.1, 5)), st.floats(1, 80))
def test_smaller_tau_gives_wider_window(d, t_int):
    try:
        loose = tighten_bounds(d, t_int, 1e-6)
        tight = tighten_bounds(d, t_int, 1e-12)
    except DegenerateBoundsError:
        return
    assert tight.lo <= loose.lo + 1e-8 and tight.hi >= loose.hi - 1e-8
