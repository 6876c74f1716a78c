"""Observables of the mixture and post-hoc analysis of sampled traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson

from .fock import MixParams
from .model import phase
from .series import TimeSeries


class AsymmetricParams(ValueError):
    """The scattered-intensity normalisation needs N1 == N2 and gamma1 == gamma2."""


class WindowTooShort(ValueError):
    pass


MIN_WINDOW_SAMPLES = 32


def _grid(rho: np.ndarray, params: MixParams) -> np.ndarray:
    d1, d2 = params.shape
    return rho.reshape(d1, d2, d1, d2)


def populations(rho: np.ndarray, params: MixParams) -> np.ndarray:
    """Diagonal P_{m1,m2;m1,m2} as a (M1+1, M2+1) real array."""
    return rho.diagonal().real.reshape(params.shape)


def excitations(rho: np.ndarray, params: MixParams) -> tuple[float, float]:
    """Mean excitation numbers <a1^dag a1>, <a2^dag a2>."""
    p = populations(rho, params)
    m1 = np.arange(params.mode1.dim)
    m2 = np.arange(params.mode2.dim)
    return float(m1 @ p.sum(axis=1)), float(m2 @ p.sum(axis=0))


def cross_coherence(rho: np.ndarray, params: MixParams) -> complex:
    """<a1^dag a2> = sum sqrt(m1) sqrt(m2+1) P_{m1-1,m2+1; m1,m2}."""
    r = _grid(rho, params)
    M1, M2 = params.mode1.cutoff, params.mode2.cutoff
    m1, m2 = np.meshgrid(np.arange(1, M1 + 1), np.arange(0, M2), indexing="ij")
    vals = r[m1 - 1, m2 + 1, m1, m2]
    return complex(np.sum(np.sqrt(m1) * np.sqrt(m2 + 1) * vals))


def intensity(rho: np.ndarray, t: float, params: MixParams, imag_tol: float = 1e-10) -> float:
    """Scattered intensity I_mix / (N gamma) of the symmetric mixture."""
    if params.mode1.atom_number != params.mode2.atom_number or params.mode1.gamma != params.mode2.gamma:
        raise AsymmetricParams("intensity normalisation requires N1 == N2 and gamma1 == gamma2")
    r = _grid(rho, params)
    M1, M2 = params.mode1.cutoff, params.mode2.cutoff
    ne1, ne2 = excitations(rho, params)
    forward = cross_coherence(rho, params)
    # <a1 a2^dag> = sum sqrt(m1+1) sqrt(m2) P_{m1+1,m2-1; m1,m2}
    m1, m2 = np.meshgrid(np.arange(0, M1), np.arange(1, M2 + 1), indexing="ij")
    backward = complex(np.sum(np.sqrt(m1 + 1) * np.sqrt(m2) * r[m1 + 1, m2 - 1, m1, m2]))
    e = np.exp(1j * phase(t, params))
    total = ne1 + ne2 + params.eta * (forward / e + backward * e)
    scale = max(1.0, abs(total))
    if abs(total.imag) > imag_tol * scale:
        raise ValueError(f"intensity has imaginary residue {total.imag:.3e}; rho not Hermitian?")
    return float(total.real)


@dataclass(frozen=True)
class ExcitationDistribution:
    ensemble: int
    probabilities: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.arange(len(self.probabilities)) @ self.probabilities)

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())


def excitation_distribution(rho: np.ndarray, ensemble: int, params: MixParams) -> ExcitationDistribution:
    """P_i = sum_n <i, n|rho|i, n> for the chosen ensemble."""
    p = populations(rho, params)
    if ensemble == 1:
        probs = p.sum(axis=1)
    elif ensemble == 2:
        probs = p.sum(axis=0)
    else:
        raise ValueError("ensemble must be 1 or 2")
    return ExcitationDistribution(ensemble, probs.copy())


def truncated_poisson(lam: float, size: int) -> np.ndarray:
    """Poisson(lam) restricted to 0..size-1 and renormalised."""
    if lam <= 0:
        return np.eye(1, size)[0]
    q = poisson.pmf(np.arange(size), lam)
    return q / q.sum()


def _matching_rate(mean: float, size: int) -> float:
    # the truncated law's mean grows monotonically from 0 to size-1 with lam
    if mean <= 0:
        return 0.0
    levels = np.arange(size)
    hi = max(1.0, 2 * mean)
    while levels @ truncated_poisson(hi, size) < mean and hi < 1e6:
        hi *= 2
    return brentq(lambda lam: levels @ truncated_poisson(lam, size) - mean, 0.0, hi, xtol=1e-15, rtol=1e-15)


def poisson_distance(dist: ExcitationDistribution) -> float:
    """Total-variation distance to the truncated Poisson law on 0..M with the same mean.

    The reference is Poisson(lam) cut at the cutoff and renormalised, with lam
    chosen so that the truncated law has the distribution's mean.
    """
    p = np.asarray(dist.probabilities, dtype=float)
    size = len(p)
    mean = min(max(dist.mean / max(dist.total, 1e-300), 0.0), size - 1 - 1e-12)
    q = truncated_poisson(_matching_rate(mean, size), size)
    return 0.5 * float(np.abs(p - q).sum())


class Oscillation(NamedTuple):
    omega: float
    amplitude: float
    resolution: float


def _windowed(series: TimeSeries, column: str, window) -> tuple[np.ndarray, np.ndarray]:
    t_a, t_b = window
    mask = series.window(t_a, t_b)
    t, y = series.t[mask], series[column][mask]
    if len(t) < MIN_WINDOW_SAMPLES:
        raise WindowTooShort(f"window [{t_a}, {t_b}] holds {len(t)} samples, need {MIN_WINDOW_SAMPLES}")
    steps = np.diff(t)
    if np.ptp(steps) > 1e-6 * steps.mean():
        raise ValueError("window samples are not uniformly spaced")
    return t, y


def dominant_frequency(series: TimeSeries, column: str, window) -> Oscillation:
    """Angular frequency of the largest Fourier peak and half peak-to-trough amplitude."""
    t, y = _windowed(series, column, window)
    dt = float(np.mean(np.diff(t)))
    n = len(y)
    bin_width = 2.0 * np.pi / (n * dt)
    resolution = 2.0 * np.pi / (t[-1] - t[0])
    amplitude = 0.5 * float(np.ptp(y))
    centred = y - y.mean()
    spectrum = np.abs(np.fft.rfft(centred))
    if len(spectrum) < 2 or spectrum[1:].max() <= 1e-12 * max(1.0, np.abs(y).max()) * n:
        return Oscillation(0.0, amplitude, resolution)
    k = 1 + int(np.argmax(spectrum[1:]))
    return Oscillation(k * bin_width, amplitude, resolution)


def synchronization_lag(series: TimeSeries, column1: str, column2: str, window) -> float:
    """Delay of column2 relative to column1 maximising their cross-correlation.

    Positive when the column2 trace lags behind column1.
    """
    t, x = _windowed(series, column1, window)
    _, y = _windowed(series, column2, window)
    dt = float(np.mean(np.diff(t)))
    x = x - x.mean()
    y = y - y.mean()
    corr = np.correlate(x, y, mode="full")
    lags = np.arange(-(len(x) - 1), len(x))
    return float(-lags[int(np.argmax(corr))] * dt)
