"""Magnetic band structure: rational fluxes, Harper bands, butterfly."""

import math
from fractions import Fraction

import numpy as np
import pytest

from fluxlattice import (
    BandSet,
    EffectiveHoppings,
    RationalFlux,
    band_count,
    butterfly,
    farey_fluxes,
    harper_bands,
)

PI = math.pi


def _hoppings(kx, ky, flux):
    sig = 2 * PI * flux.alpha
    return EffectiveHoppings(kx, ky, alpha=flux.alpha, M=1, sigma=sig, rho=PI)


# -- rational flux bookkeeping ----------------------------------------------------

def test_rational_flux_validation():
    with pytest.raises(ValueError, match="coprime"):
        RationalFlux(2, 4)
    with pytest.raises(ValueError, match=">= 1"):
        RationalFlux(1, 0)
    with pytest.raises(ValueError, match="integers"):
        RationalFlux(0.5, 2)
    assert RationalFlux(1, 3).alpha == pytest.approx(1 / 3)


def test_rational_flux_folding_and_from_float():
    f = RationalFlux(3, 4).folded()
    assert (f.p, f.q) == (-1, 4)
    g = RationalFlux.from_float(1 / 3)
    assert (g.p, g.q) == (1, 3)
    h = RationalFlux.from_float(0.5)
    assert (h.p, h.q) == (1, 2)


def test_farey_fluxes_ordering_and_coprimality():
    fluxes = farey_fluxes(5)
    alphas = [f.alpha for f in fluxes]
    assert alphas == sorted(alphas)
    assert alphas[0] == 0.0 and alphas[-1] == 1.0
    assert all(math.gcd(f.p, f.q) == 1 for f in fluxes)
    assert len(fluxes) == len(set(Fraction(f.p, f.q) for f in fluxes))
    with pytest.raises(ValueError):
        farey_fluxes(0)


# -- band structure ----------------------------------------------------------------

def test_zero_flux_single_band():
    h = _hoppings(1.0, 0.7, RationalFlux(0, 1))
    bands = harper_bands(h, RationalFlux(0, 1), k_grid=64)
    assert len(bands.intervals) == 1
    lo, hi = bands.intervals[0]
    # extremes hit on-grid at k = 0 and k = pi
    assert hi == pytest.approx(2 * (1.0 + 0.7), abs=1e-12)
    assert lo == pytest.approx(-2 * (1.0 + 0.7), abs=1e-12)


def test_half_flux_dirac_bands():
    # alpha = 1/2: E = +-2 sqrt(kx^2 cos^2 qx + ky^2 cos^2 qy)
    for kx, ky in ((1.0, 1.0), (1.0, 2.0)):
        h = _hoppings(kx, ky, RationalFlux(1, 2))
        bands = harper_bands(h, RationalFlux(1, 2), k_grid=64)
        assert len(bands.intervals) == 2
        top = bands.intervals[1]
        assert top[1] == pytest.approx(2 * math.hypot(kx, ky), abs=1e-9)
        assert top[0] == pytest.approx(0.0, abs=1e-9)
        assert bands.intervals[0][0] == pytest.approx(-top[1], abs=1e-9)
        assert bands.touching == (True,)  # Dirac points at E = 0


def test_band_count_matches_denominator():
    for p, q in ((1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (1, 5), (2, 5)):
        flux = RationalFlux(p, q)
        h = _hoppings(1.0, 1.0, flux)
        assert band_count(h, flux, k_grid=32) == q


def test_band_set_validation():
    with pytest.raises(ValueError, match="touching"):
        BandSet(((0.0, 1.0), (2.0, 3.0)), (), np.linspace(0, 2 * PI, 8))
    with pytest.raises(ValueError, match="k_grid"):
        h = _hoppings(1.0, 1.0, RationalFlux(1, 2))
        harper_bands(h, RationalFlux(1, 2), k_grid=16)


def test_total_bandwidth_shrinks_with_flux():
    # fragmented spectrum at alpha = 1/3 occupies less of the energy axis
    h0 = _hoppings(1.0, 1.0, RationalFlux(0, 1))
    b0 = harper_bands(h0, RationalFlux(0, 1), k_grid=64)
    h3 = _hoppings(1.0, 1.0, RationalFlux(1, 3))
    b3 = harper_bands(h3, RationalFlux(1, 3), k_grid=64)
    assert b3.total_bandwidth < b0.total_bandwidth


# -- butterfly ---------------------------------------------------------------------

def test_butterfly_symmetries():
    rows = butterfly(1.0, farey_fluxes(5), k_grid=32)
    by_alpha = {}
    for alpha, lo, hi in rows:
        by_alpha.setdefault(round(alpha, 12), []).append((lo, hi))
    for alpha, intervals in by_alpha.items():
        # spectrum symmetric under E -> -E
        lows = sorted(lo for lo, _ in intervals)
        highs = sorted(-hi for _, hi in intervals)
        np.testing.assert_allclose(lows, highs, atol=1e-9)
        # and under alpha -> 1 - alpha
        partner = by_alpha[round(1.0 - alpha, 12)]
        np.testing.assert_allclose(sorted(intervals), sorted(partner), atol=1e-9)


def test_butterfly_row_counts():
    rows = butterfly(1.0, farey_fluxes(3), k_grid=32)
    # 0/1, 1/3, 1/2, 2/3, 1/1 -> 1 + 3 + 2 + 3 + 1 band rows
    assert len(rows) == 10
