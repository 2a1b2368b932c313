"""Source laws: masses, cdf, sampling, and the text spec round-trip."""
import math

import numpy as np
import pytest
from scipy import integrate, stats

from ajscc.dist import (
    DiscreteBoundaryGaussian,
    Uniform,
    boundary_masses,
    cdf,
    format_source_spec,
    mean,
    parse_source_spec,
    pdf_mass,
    sample,
    variance,
)


def _dbg_cases():
    return [
        DiscreteBoundaryGaussian(0.0, 1.0, 0.5, 0.3),
        DiscreteBoundaryGaussian(0.0, 1.0, 0.0, 0.3),
        DiscreteBoundaryGaussian(0.0, 2.0, 2.0, 0.5),
        DiscreteBoundaryGaussian(0.0, 1.0, -0.4, 0.6),
    ]


def test_validation():
    with pytest.raises(ValueError):
        Uniform(1.0, 1.0)
    with pytest.raises(ValueError):
        Uniform(2.0, 1.0)
    with pytest.raises(ValueError):
        DiscreteBoundaryGaussian(0.0, 1.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        DiscreteBoundaryGaussian(1.0, 0.0, 0.5, 0.1)


@pytest.mark.parametrize("dist", _dbg_cases())
def test_dbg_total_mass_is_one(dist):
    # independent oracle: numeric integral of the interior density plus the
    # two endpoint atoms must give a probability law
    interior, err = integrate.quad(
        lambda s: pdf_mass(dist, s)[0], dist.lo, dist.hi, epsabs=1e-12)
    m_lo, m_hi = boundary_masses(dist)
    assert abs(interior + m_lo + m_hi - 1.0) < 1e-9
    assert err < 1e-9


def test_dbg_masses_closed_form():
    dist = DiscreteBoundaryGaussian(0.0, 1.0, 0.5, 0.3)
    z_lo = (0.0 - 0.5) / 0.3
    z_hi = (1.0 - 0.5) / 0.3
    m_lo, m_hi = boundary_masses(dist)
    assert math.isclose(m_lo, stats.norm.cdf(z_lo), rel_tol=1e-12)
    assert math.isclose(m_hi, stats.norm.sf(z_hi), rel_tol=1e-12)


def test_boundary_masses_rejects_uniform():
    with pytest.raises(ValueError):
        boundary_masses(Uniform(0.0, 1.0))


@pytest.mark.parametrize("dist", [Uniform(0.0, 2.0)] + _dbg_cases())
def test_cdf_monotone_and_normalized(dist):
    xs = np.linspace(dist.lo - 0.5, dist.hi + 0.5, 301)
    vals = [cdf(dist, float(x)) for x in xs]
    assert vals[0] == 0.0
    assert vals[-1] == 1.0
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    # atom at lo is included from the left endpoint on
    if isinstance(dist, DiscreteBoundaryGaussian):
        m_lo, _ = boundary_masses(dist)
        assert math.isclose(cdf(dist, dist.lo), m_lo, rel_tol=0, abs_tol=1e-15)
    else:
        assert cdf(dist, dist.lo) == 0.0


@pytest.mark.parametrize("dist", _dbg_cases())
def test_cdf_matches_quadrature(dist):
    for s in (0.2, 0.5, 0.9):
        s = dist.lo + s * (dist.hi - dist.lo)
        interior, _ = integrate.quad(
            lambda u: pdf_mass(dist, u)[0], dist.lo, s, epsabs=1e-12)
        m_lo, _ = boundary_masses(dist)
        assert math.isclose(cdf(dist, s), m_lo + interior, abs_tol=1e-9)


def test_uniform_sampling_ks():
    rng = np.random.default_rng(123)
    xs = sample(Uniform(0.0, 2.0), rng, size=20000)
    assert xs.min() >= 0.0 and xs.max() <= 2.0
    pval = stats.kstest(xs, stats.uniform(loc=0.0, scale=2.0).cdf).pvalue
    assert pval > 1e-4


def test_dbg_sampling_moments_and_masses():
    rng = np.random.default_rng(321)
    n = 200_000
    for dist in _dbg_cases():
        xs = sample(dist, rng, size=n)
        assert xs.min() >= dist.lo and xs.max() <= dist.hi
        m_lo, m_hi = boundary_masses(dist)
        for target, hit in ((m_lo, xs == dist.lo), (m_hi, xs == dist.hi)):
            p_hat = float(np.mean(hit))
            sd = math.sqrt(max(target * (1 - target), 1e-12) / n)
            assert abs(p_hat - target) <= 4 * sd + 1e-9
        mu, var = mean(dist), variance(dist)
        assert abs(float(np.mean(xs)) - mu) <= 4 * math.sqrt(var / n)
        assert abs(float(np.var(xs)) - var) <= 0.05 * var


def test_moments_against_quadrature():
    for dist in _dbg_cases():
        m_lo, m_hi = boundary_masses(dist)
        m1, _ = integrate.quad(lambda s: s * pdf_mass(dist, s)[0],
                               dist.lo, dist.hi, epsabs=1e-12)
        m2, _ = integrate.quad(lambda s: s * s * pdf_mass(dist, s)[0],
                               dist.lo, dist.hi, epsabs=1e-12)
        mu = m1 + m_lo * dist.lo + m_hi * dist.hi
        ex2 = m2 + m_lo * dist.lo**2 + m_hi * dist.hi**2
        assert math.isclose(mean(dist), mu, abs_tol=1e-9)
        assert math.isclose(variance(dist), ex2 - mu * mu, abs_tol=1e-9)


def test_scalar_sample():
    rng = np.random.default_rng(5)
    x = sample(Uniform(0.0, 1.0), rng)
    assert isinstance(x, float) and 0.0 <= x <= 1.0


def test_parse_format_roundtrip():
    for text in ("uniform:0,1", "uniform:0.5,2.5", "dbg:0,1,0.5,0.3"):
        dist = parse_source_spec(text)
        again = parse_source_spec(format_source_spec(dist))
        assert dist == again


@pytest.mark.parametrize("text", [
    "gauss:0,1", "uniform:1", "uniform:2,1", "dbg:0,1,0.5", "dbg:0,1,0.5,0",
    "uniform", "", "uniform:a,b",
])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_source_spec(text)
