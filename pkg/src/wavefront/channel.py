"""Complex baseband field model: link budget, common random phase offset,
surface field samples and additive receiver noise.

Amplitude model.  The transmitter radiates EIRP watts isotropically, so the
power density at range d is EIRP / (4 pi d^2).  An ideal aperture of
physical area A_f intercepts EIRP * A_f / (4 pi d^2); with the receiver
normalization used by the front ends (matched output sqrt(A_e) * x0, with
A_e = A_f / lambda^2) that capture is reproduced exactly when the surface
field amplitude is

    A_pl = sqrt(EIRP) * lambda / (sqrt(4 pi) * d).

The amplitude is taken constant across the surface (receiver much smaller
than the range); the per-point 1/distance variation is deliberately not
modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import (
    SPEED_OF_LIGHT,
    TWO_PI,
    SourcePosition,
    SurfacePoint,
    extra_distance_exact,
)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def dbw_to_watt(dbw: float) -> float:
    return 10.0 ** (dbw / 10.0)


def watt_to_dbw(w: float) -> float:
    return 10.0 * math.log10(w)


@dataclass(frozen=True)
class LinkBudget:
    """Free-space link parameters.

    noise_power is the total complex noise variance per antenna (real and
    imaginary parts each carry half of it).
    """

    eirp: float          # W
    noise_power: float   # W
    f0: float            # Hz
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.eirp <= 0:
            raise ValueError("EIRP must be positive")
        if self.noise_power < 0:
            raise ValueError("noise power must be non-negative")
        if self.f0 <= 0:
            raise ValueError("carrier must be positive")

    @classmethod
    def from_db(cls, eirp_dbm: float, noise_dbw: float, f0: float,
                c: float = SPEED_OF_LIGHT) -> "LinkBudget":
        return cls(eirp=dbm_to_watt(eirp_dbm), noise_power=dbw_to_watt(noise_dbw),
                   f0=f0, c=c)

    @property
    def wavelength(self) -> float:
        return self.c / self.f0


def amplitude(lb: LinkBudget, d) -> Union[float, np.ndarray]:
    """Surface field amplitude A_pl at range d (aperture-capture budget)."""
    d = np.asarray(d, dtype=float) if np.ndim(d) else float(d)
    if np.any(np.asarray(d) <= 0):
        raise ValueError("range must be positive")
    return math.sqrt(lb.eirp) * lb.wavelength / (math.sqrt(4.0 * math.pi) * d)


def baseband_gain(lb: LinkBudget, p: SourcePosition) -> complex:
    """x0 = A_pl e^{-j chi}: the common complex factor of every sample."""
    return amplitude(lb, p.d) * np.exp(-1j * p.chi)


def surface_field(p: SourcePosition, s: SurfacePoint, lb: LinkBudget) -> complex:
    """Field observed at surface point s for a source at p:
    x0 * exp(-j 2 pi a / lambda), a the exact extra distance."""
    a = extra_distance_exact(p, s)
    return baseband_gain(lb, p) * np.exp(-2j * np.pi * a / lb.wavelength)


def trial_rng(seed: int, *stream) -> np.random.Generator:
    """Independent, order-insensitive random stream keyed on
    (seed, *stream); the same key always reproduces the same stream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(ss))


def complex_noise(rng: np.random.Generator, sigma2: float, n: int) -> np.ndarray:
    """n i.i.d. circularly-symmetric complex Gaussian draws, total variance
    sigma2 each."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    if sigma2 == 0.0:
        return np.zeros(n, dtype=np.complex128)
    scale = math.sqrt(sigma2 / 2.0)
    w = np.empty(n, dtype=np.complex128)
    w.real = rng.standard_normal(n)
    w.imag = rng.standard_normal(n)
    return w * scale


def add_noise(s: np.ndarray, sigma2: float,
              rng_seed: Union[int, np.random.Generator]) -> np.ndarray:
    """r = s + w with w ~ CN(0, sigma2) i.i.d. across entries.  sigma2 = 0
    returns s bit-exactly.  Passing the same integer seed reproduces the
    same vector."""
    s = np.asarray(s, dtype=np.complex128)
    if sigma2 == 0.0:
        return s.copy()
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else trial_rng(int(rng_seed))
    return s + complex_noise(rng, sigma2, s.size).reshape(s.shape)


def draw_offset(rng: np.random.Generator) -> float:
    """Per-trial carrier offset chi ~ U[0, 2 pi), shared by all antennas."""
    return float(rng.uniform(0.0, TWO_PI))


@dataclass(frozen=True)
class Snapshot:
    """One observed baseband vector with the truth that generated it."""

    r: np.ndarray
    truth: SourcePosition
    arch: str
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=np.complex128))
