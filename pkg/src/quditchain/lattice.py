"""Ring of qudits coupled by nearest-neighbour permutations.

The one-particle sector of the swap Hamiltonian is a circulant hopping
problem, so the amplitude for an excitation to travel from the sender to
the receiver is a finite Fourier sum over the ring modes.  For long rings
that sum tends to a Bessel function of the first kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ChainConfig",
    "ModeSpectrum",
    "TransferAmplitude",
    "amplitude_exact",
    "amplitude_exact_grid",
    "amplitude_bessel",
    "bessel_jn",
    "mode_spectrum",
    "unitarity_defect",
]

MODULUS_SLACK = 1e-12


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of a periodic chain of ``levels``-state sites.

    Sites are 0-indexed; ``coupling`` and ``field`` share one energy unit
    and times are measured in units of ``1/coupling``.
    """

    n_sites: int
    levels: int = 2
    coupling: float = 1.0
    field: float = 0.0
    sender: int = 0
    receiver: int = 0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"levels must be an integer >= 2, got {self.levels}")
        if not (math.isfinite(self.coupling) and self.coupling > 0):
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        if not (math.isfinite(self.field) and self.field >= 0):
            raise ValueError(f"field must be non-negative, got {self.field}")
        for name in ("sender", "receiver"):
            site = getattr(self, name)
            if int(site) != site or not 0 <= site < self.n_sites:
                raise ValueError(f"{name} must lie in [0, {self.n_sites}), got {site}")

    @classmethod
    def half_ring(cls, distance: int, **kwargs) -> "ChainConfig":
        """Ring of length ``2 * distance`` with the receiver diametrically opposite."""
        if distance < 1:
            raise ValueError("distance must be >= 1")
        return cls(n_sites=2 * distance, sender=0, receiver=distance, **kwargs)

    @property
    def displacement(self) -> int:
        """Signed receiver offset ``r - s`` reduced to ``(-N/2, N/2]``."""
        n = self.n_sites
        x = (self.receiver - self.sender) % n
        return x - n if x > n // 2 else x

    @property
    def distance(self) -> int:
        return abs(self.displacement)


@dataclass(frozen=True)
class ModeSpectrum:
    energies: np.ndarray
    field_shift: float = 0.0

    def sector(self, mu: int) -> np.ndarray:
        """Energies in the one-particle sector where the excited site sits at level ``mu``."""
        return self.energies + self.field_shift * mu


def mode_spectrum(cfg: ChainConfig) -> ModeSpectrum:
    m = np.arange(cfg.n_sites)
    energies = cfg.coupling - cfg.coupling * np.cos(2 * np.pi * m / cfg.n_sites)
    energies[0] = 0.0
    return ModeSpectrum(energies=energies, field_shift=cfg.field)


@dataclass(frozen=True)
class TransferAmplitude:
    """Complex amplitude ``f_rs(t)``; modulus and phase are derived views."""

    value: complex
    time: float

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        g = math.atan2(self.value.imag, self.value.real)
        return math.pi if g == -math.pi else g

    @classmethod
    def from_polar(cls, modulus: float, phase: float, time: float = 0.0) -> "TransferAmplitude":
        return cls(value=complex(modulus * np.exp(1j * phase)), time=time)

    def dressed(self, mu: int, field: float) -> complex:
        """Amplitude picked up by level ``mu``: ``exp(-i B mu t) f_rs``."""
        return np.exp(-1j * field * mu * self.time) * self.value


@lru_cache(maxsize=256)
def _mode_tables(n_sites: int, displacement: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(n_sites)
    cosines = np.cos(2 * np.pi * k / n_sites)
    kphase = np.exp(2j * np.pi * k * displacement / n_sites)
    cosines.flags.writeable = False
    kphase.flags.writeable = False
    return cosines, kphase


def _check_time(t) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return t


def amplitude_exact_grid(cfg: ChainConfig, times) -> np.ndarray:
    """Vectorised ``f_rs`` over an array of times."""
    times = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    cosines, kphase = _mode_tables(cfg.n_sites, cfg.displacement)
    jt = cfg.coupling * times[..., None]
    terms = np.exp(1j * jt * (cosines - 1.0)) * kphase
    return terms.sum(axis=-1) / cfg.n_sites


def amplitude_exact(cfg: ChainConfig, t: float) -> TransferAmplitude:
    t = _check_time(t)
    if t == 0.0:
        return TransferAmplitude(value=complex(cfg.displacement == 0), time=0.0)
    return TransferAmplitude(value=complex(amplitude_exact_grid(cfg, t)), time=t)


def bessel_jn(n: int, x: float) -> float:
    """Bessel function of the first kind ``J_n(x)`` for integer order.

    Uses Miller's downward recurrence normalised by
    ``J_0 + 2 * sum(J_2k) = 1``.  Accurate to about 1e-12 absolute for
    ``|n| <= 64`` and ``|x| <= 500``.
    """
    n = int(n)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if x < 0:
        x = -x
        sign *= -1.0 if n % 2 else 1.0
    if x == 0.0:
        return sign * (1.0 if n == 0 else 0.0)

    start = max(n, x) + 30.0 + 15.0 * x ** (1.0 / 3.0) + math.sqrt(40.0 * n)
    m = 2 * (int(start) // 2 + 1)
    two_over_x = 2.0 / x
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    jn = 0.0
    for k in range(m, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            jn *= 1e-250
        # j_cur now holds J_{k-1}
        if k - 1 == n:
            jn = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return sign * jn / norm


def amplitude_bessel(cfg: ChainConfig, t: float) -> TransferAmplitude:
    """Long-ring limit ``exp(-i(Jt - pi n / 2)) J_n(Jt)`` with ``n = r - s``."""
    t = _check_time(t)
    n = cfg.displacement
    jt = cfg.coupling * t
    value = np.exp(-1j * (jt - 0.5 * np.pi * n)) * bessel_jn(n, jt)
    return TransferAmplitude(value=complex(value), time=t)


def unitarity_defect(cfg: ChainConfig, t: float) -> float:
    """``|1 - sum_k |f_ks|^2|`` over every receiver site ``k``."""
    t = _check_time(t)
    total = 0.0
    for k in range(cfg.n_sites):
        row = ChainConfig(
            n_sites=cfg.n_sites,
            levels=cfg.levels,
            coupling=cfg.coupling,
            field=cfg.field,
            sender=cfg.sender,
            receiver=k,
        )
        total += amplitude_exact(row, t).modulus ** 2
    return abs(1.0 - total)
