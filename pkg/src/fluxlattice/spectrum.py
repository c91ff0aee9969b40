"""Magnetic band structure of the effective lattice at rational flux.

At flux alpha = p/q per plaquette the effective model is periodic over a
magnetic cell of q columns; the Bloch ansatz
f[n,m] = e^{i kx n + i ky m} u[n mod q] reduces it to a q x q hermitian
eigenproblem per quasimomentum,

    E u[n] = -kappa_x e^{i kx} u[n+1] - kappa_x* e^{-i kx} u[n-1]
             - 2 |kappa_y| cos(ky + 2 pi alpha n + arg kappa_y) u[n],

(indices mod q, so q = 1 and q = 2 pick up both wrap-around couplings on
the same entry).  Sweeping (kx, ky) over [0, 2 pi / q) x [0, 2 pi)
accumulates the eigenvalue branches into exactly q bands, touching where
gaps close; collecting bands over many rationals yields the Hofstadter
butterfly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import TWO_PI
from .hopping import EffectiveHoppings

__all__ = [
    "RationalFlux",
    "BandSet",
    "harper_bands",
    "band_count",
    "butterfly",
    "farey_fluxes",
]


@dataclass(frozen=True)
class RationalFlux:
    """Flux alpha = p/q per plaquette, p and q coprime, q >= 1."""

    p: int
    q: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not isinstance(self.q, int):
            raise ValueError("p and q must be integers")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"p/q = {self.p}/{self.q} must be coprime")

    @property
    def alpha(self) -> float:
        return self.p / self.q

    def folded(self) -> "RationalFlux":
        """Equivalent flux in (-1/2, 1/2] (flux is defined modulo 1)."""
        p = self.p % self.q
        if 2 * p > self.q:
            p -= self.q
        return RationalFlux(p, self.q)

    @classmethod
    def from_float(cls, alpha: float, q_max: int = 64) -> "RationalFlux":
        """Best rational approximant with denominator <= q_max."""
        frac = Fraction(alpha).limit_denominator(q_max)
        return cls(frac.numerator, frac.denominator)


def farey_fluxes(q_max: int) -> list[RationalFlux]:
    """All reduced fractions p/q in [0, 1] with q <= q_max, ascending."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    fluxes = [RationalFlux(p, q)
              for q in range(1, q_max + 1)
              for p in range(0, q + 1)
              if math.gcd(p, q) == 1]
    fluxes.sort(key=lambda f: f.alpha)
    return fluxes


@dataclass(frozen=True)
class BandSet:
    """Sorted energy bands; touching[i] flags a point contact of bands i, i+1."""

    intervals: tuple[tuple[float, float], ...]
    touching: tuple[bool, ...]
    k_grid: int

    def __post_init__(self):
        if len(self.touching) != max(len(self.intervals) - 1, 0):
            raise ValueError("need one touching flag per adjacent band pair")

    @property
    def total_bandwidth(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


def _bloch_eigenvalues(hoppings: EffectiveHoppings, flux: RationalFlux,
                       k_grid: int) -> np.ndarray:
    q = flux.q
    alpha = flux.p / flux.q
    kx = np.arange(k_grid) * (TWO_PI / q / k_grid)
    ky = np.arange(k_grid) * (TWO_PI / k_grid)
    ay = math.atan2(hoppings.kappa_y.imag, hoppings.kappa_y.real)
    n = np.arange(q)
    diag = -2.0 * abs(hoppings.kappa_y) * np.cos(
        ky[:, None] + TWO_PI * alpha * n[None, :] + ay)  # (Ky, q)
    H = np.zeros((k_grid, k_grid, q, q), dtype=complex)
    H[:, :, n, n] = diag[None, :, :]
    hop = -hoppings.kappa_x * np.exp(1j * kx)  # (Kx,)
    for j in range(q):
        H[:, :, j, (j + 1) % q] += hop[:, None]
        H[:, :, (j + 1) % q, j] += np.conj(hop)[:, None]
    herm_defect = float(np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))))
    scale = max(abs(hoppings.kappa_x), abs(hoppings.kappa_y), 1e-300)
    if herm_defect > 1e-12 * scale:
        raise AssertionError(f"Bloch matrix not hermitian: defect {herm_defect:.3e}")
    return np.linalg.eigvalsh(H)  # (Kx, Ky, q), ascending


def harper_bands(hoppings: EffectiveHoppings, flux: RationalFlux,
                 k_grid: int = 64) -> BandSet:
    """Energy bands over the magnetic Brillouin zone.

    Eigenvalue branches (by sorted index) are accumulated into intervals;
    branches whose ranges genuinely overlap beyond the merge tolerance
    1e-6 * max|kappa| are merged, while gaps within tolerance of zero are
    kept as distinct point-touching bands.
    """
    if k_grid < 32:
        raise ValueError("k_grid must be >= 32")
    evals = _bloch_eigenvalues(hoppings, flux, k_grid)
    tol = 1e-6 * max(abs(hoppings.kappa_x), abs(hoppings.kappa_y))
    intervals: list[list[float]] = []
    touching: list[bool] = []
    for b in range(flux.q):
        lo = float(evals[..., b].min())
        hi = float(evals[..., b].max())
        if intervals:
            gap = lo - intervals[-1][1]
            if gap < -tol:
                intervals[-1][1] = max(intervals[-1][1], hi)
                continue
            touching.append(bool(abs(gap) <= tol))
        intervals.append([lo, hi])
    return BandSet(tuple((lo, hi) for lo, hi in intervals), tuple(touching), k_grid)


def band_count(hoppings: EffectiveHoppings, flux: RationalFlux,
               k_grid: int = 64) -> int:
    """Number of distinct bands (point-touching bands counted separately)."""
    return len(harper_bands(hoppings, flux, k_grid).intervals)


def butterfly(ratio: float, flux_list, k_grid: int = 64) -> np.ndarray:
    """Band intervals over many fluxes, for kappa_y / kappa_x = ratio.

    Energies are in units of kappa_x.  Returns rows (alpha, E_min, E_max),
    one per band, ordered by flux then energy — the Hofstadter-butterfly
    dataset for plotting.
    """
    rows = []
    for flux in flux_list:
        hoppings = EffectiveHoppings(
            kappa_x=1.0, kappa_y=ratio, alpha=flux.alpha,
            M=1, sigma=TWO_PI * flux.alpha, rho=math.pi)
        bands = harper_bands(hoppings, flux, k_grid)
        rows.extend((flux.alpha, lo, hi) for lo, hi in bands.intervals)
    return np.array(rows, dtype=float)
