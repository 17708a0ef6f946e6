"""Density-of-states models and exact discrete spectra.

All energies are dimensionless with k_B = 1.  Log state counts are defined
only up to an additive constant (the shell-width convention is absorbed at
normalization), so every normalized quantity downstream is unaffected by
the prefactor choices made here.

Models expose three things: ``ln_density(E)`` for the total system,
``entropy_derivatives(e)`` per particle (s, ds/de, d2s/de2), and a
``domain()`` interval outside which ``ln_density`` is -inf.  The two views
are tied together by ln_density(E) = N * s(E/N) + const.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp, polygamma, psi

from .errors import DomainError
from .numerics import LN2, central_difference

# relative step for finite-difference entropy derivatives of custom models
FD_RELATIVE_STEP = 1e-5


def _finish(energy_in, out):
    return float(out) if np.ndim(energy_in) == 0 else out


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Exact (energy level, log-degeneracy) pairs of a finite system."""

    energies: np.ndarray
    ln_degeneracies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        g = np.asarray(self.ln_degeneracies, dtype=float)
        if e.ndim != 1 or e.shape != g.shape or e.size == 0:
            raise ValueError("energies and ln_degeneracies must be equal-length 1-d arrays")
        if np.any(np.diff(e) <= 0.0):
            raise ValueError("energy levels must be strictly increasing")
        e.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "ln_degeneracies", g)

    def __len__(self):
        return self.energies.size

    @property
    def total_ln_count(self) -> float:
        """Log of the total number of states, logsumexp over degeneracies."""
        return float(logsumexp(self.ln_degeneracies))

    def positive_temperature_branch(self) -> "DiscreteSpectrum":
        """Levels below the degeneracy peak: indices k < (n_levels - 1) / 2."""
        n = len(self)
        keep = np.arange(n) < (n - 1) / 2.0
        if not np.any(keep):
            raise ValueError("spectrum too small for a positive-temperature branch")
        return DiscreteSpectrum(self.energies[keep], self.ln_degeneracies[keep])


def ising_chain_spectrum(n_particles: int, coupling: float = 1.0) -> DiscreteSpectrum:
    """Exact spectrum of the open, zero-field spin chain with nearest-neighbor coupling.

    With n sites there are n-1 bonds; k broken bonds give the level
    E_k = -J(n-1) + 2Jk with degeneracy 2 * C(n-1, k) (the 2 is the global
    spin flip).  Degeneracies are computed through log-gamma, so sizes up
    to ~1e6 sites are safe from overflow.
    """
    if n_particles < 2:
        raise ValueError("chain needs at least 2 sites")
    if coupling <= 0.0:
        raise ValueError("coupling must be positive")
    k = np.arange(n_particles, dtype=float)
    energies = -coupling * (n_particles - 1) + 2.0 * coupling * k
    ln_g = LN2 + gammaln(n_particles) - gammaln(k + 1.0) - gammaln(n_particles - k)
    return DiscreteSpectrum(energies, ln_g)


@dataclass(frozen=True)
class IdealGas:
    """Monoatomic dilute gas: state count grows as E**(3N/2).

    ``ln_prefactor`` is the E-independent additive constant; it cancels in
    every normalized distribution and is kept only for entropy evaluation.
    """

    n_particles: int
    ln_prefactor: float = 0.0
    volume_per_particle: float = 1.0
    kind: str = field(default="ideal-gas", init=False, repr=False)

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")

    @property
    def growth_exponent(self) -> float:
        return 1.5 * self.n_particles

    def domain(self):
        return (0.0, math.inf)

    def ln_density(self, energy):
        e_arr = np.asarray(energy, dtype=float)
        safe = np.where(e_arr > 0.0, e_arr, 1.0)
        out = np.where(e_arr > 0.0,
                       self.growth_exponent * np.log(safe) + self.ln_prefactor,
                       -np.inf)
        return _finish(energy, out)

    def entropy_derivatives(self, e: float):
        e = float(e)
        if e <= 0.0:
            raise DomainError("energy per particle must be positive")
        s = self.ln_density(self.n_particles * e) / self.n_particles
        return s, 1.5 / e, -1.5 / (e * e)


@dataclass(frozen=True)
class IsingChain:
    """Continuum view of the open chain: exact log-degeneracies interpolated in E.

    The bond-count index k = (E + J(n-1)) / (2J) is continued to real values
    through log-gamma, which passes exactly through every discrete level and
    is monotone on the positive-temperature half of the band.  The model
    domain is that half, [-J(n-1), 0]; the negative-temperature branch is
    only reachable through the discrete spectrum.
    """

    n_particles: int
    coupling: float = 1.0
    volume_per_particle: float = 1.0
    kind: str = field(default="ising-chain", init=False, repr=False)

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("chain needs at least 2 sites")
        if self.coupling <= 0.0:
            raise ValueError("coupling must be positive")

    @property
    def band_bottom(self) -> float:
        return -self.coupling * (self.n_particles - 1)

    def domain(self):
        return (self.band_bottom, 0.0)

    def _bond_index(self, e_arr):
        return (e_arr - self.band_bottom) / (2.0 * self.coupling)

    def ln_density(self, energy):
        e_arr = np.asarray(energy, dtype=float)
        inside = (e_arr >= self.band_bottom) & (e_arr <= 0.0)
        k = np.where(inside, self._bond_index(e_arr), 0.0)
        n = self.n_particles
        vals = LN2 + gammaln(n) - gammaln(k + 1.0) - gammaln(n - k)
        out = np.where(inside, vals, -np.inf)
        return _finish(energy, out)

    def entropy_derivatives(self, e: float):
        e = float(e)
        energy = self.n_particles * e
        if not self.band_bottom <= energy <= 0.0:
            raise DomainError("energy outside the positive-temperature band")
        n = self.n_particles
        k = self._bond_index(np.asarray(energy, dtype=float))
        two_j = 2.0 * self.coupling
        s = float(self.ln_density(energy)) / n
        d_ln_g = (psi(n - k) - psi(k + 1.0)) / two_j
        d2_ln_g = -(polygamma(1, n - k) + polygamma(1, k + 1.0)) / (two_j * two_j)
        return s, float(d_ln_g), n * float(d2_ln_g)


@dataclass(frozen=True)
class CustomEntropy:
    """User-supplied entropy per particle s(e, v) with optional analytic derivatives.

    Missing derivatives fall back to centered finite differences at a
    relative step of 1e-5, which is stable enough for the curvature terms
    entering width predictions.  The domain is given per particle.
    """

    n_particles: int
    entropy: Callable[[float, float], float]
    entropy_d1: Callable[[float, float], float] | None = None
    entropy_d2: Callable[[float, float], float] | None = None
    domain_per_particle: tuple = (0.0, math.inf)
    ln_prefactor: float = 0.0
    volume_per_particle: float = 1.0
    kind: str = field(default="custom-entropy", init=False, repr=False)

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        lo, hi = self.domain_per_particle
        if not lo < hi:
            raise ValueError("empty entropy domain")

    def domain(self):
        lo, hi = self.domain_per_particle
        return (self.n_particles * lo, self.n_particles * hi)

    def _entropy_values(self, e_arr):
        v = self.volume_per_particle
        try:
            out = np.asarray(self.entropy(e_arr, v), dtype=float)
            if out.shape == e_arr.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([self.entropy(float(t), v) for t in np.atleast_1d(e_arr)]).reshape(e_arr.shape)

    def ln_density(self, energy):
        e_arr = np.asarray(energy, dtype=float)
        lo, hi = self.domain()
        inside = (e_arr > lo) & (e_arr < hi)
        per = np.where(inside, e_arr / self.n_particles, 1.0)
        vals = self.n_particles * self._entropy_values(per) + self.ln_prefactor
        out = np.where(inside, vals, -np.inf)
        return _finish(energy, out)

    def entropy_derivatives(self, e: float):
        e = float(e)
        lo, hi = self.domain_per_particle
        if not lo < e < hi:
            raise DomainError("energy per particle outside the model domain")
        v = self.volume_per_particle
        s = float(self.entropy(e, v))
        if self.entropy_d1 is not None and self.entropy_d2 is not None:
            return s, float(self.entropy_d1(e, v)), float(self.entropy_d2(e, v))
        step = FD_RELATIVE_STEP * (abs(e) if e != 0.0 else 1.0)
        d1, d2 = central_difference(lambda t: float(self.entropy(t, v)), e, step)
        if self.entropy_d1 is not None:
            d1 = float(self.entropy_d1(e, v))
        if self.entropy_d2 is not None:
            d2 = float(self.entropy_d2(e, v))
        return s, d1, d2


@dataclass(frozen=True)
class ConcavityReport:
    """Outcome of the monotonicity / concavity grid check."""

    passed: bool
    monotone_ok: bool
    concave_ok: bool
    first_violation: float | None
    detail: str


def check_concavity_monotonicity(model, energy_range, grid_points: int = 1000) -> ConcavityReport:
    """Verify ds/de > 0 and d2s/de2 <= 0 on a grid of total energies.

    Violations are reported, never raised; the first violating total energy
    is returned alongside which condition failed there.
    """
    if grid_points < 3:
        raise ValueError("need at least 3 grid points")
    lo, hi = energy_range
    if not lo < hi:
        raise ValueError("empty energy range")
    monotone_ok = True
    concave_ok = True
    first_violation = None
    detail = "ok"
    for energy in np.linspace(lo, hi, grid_points):
        _, d1, d2 = model.entropy_derivatives(float(energy) / model.n_particles)
        bad_mono = not d1 > 0.0
        bad_conc = not d2 <= 0.0
        if bad_mono or bad_conc:
            monotone_ok = monotone_ok and not bad_mono
            concave_ok = concave_ok and not bad_conc
            if first_violation is None:
                first_violation = float(energy)
                parts = []
                if bad_mono:
                    parts.append("ds/de = %g is not positive" % d1)
                if bad_conc:
                    parts.append("d2s/de2 = %g is not <= 0" % d2)
                detail = "at E = %g: %s" % (energy, "; ".join(parts))
    return ConcavityReport(passed=monotone_ok and concave_ok,
                           monotone_ok=monotone_ok,
                           concave_ok=concave_ok,
                           first_violation=first_violation,
                           detail=detail)
