"""Haar-averaged transfer fidelity and the two pickup strategies.

Both strategies scan a uniform time grid over ``(0, t_max]`` and refine
the best grid peaks with a golden-section search.  The vanishing-field
strategy holds a tiny fixed field; the field-tuned strategy additionally
maximises over the field at every candidate time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .lattice import ChainConfig, TransferAmplitude, amplitude_exact_grid

__all__ = [
    "HaarMoments",
    "Strategy",
    "StrategyResult",
    "VANISHING_FIELD",
    "average_fidelity",
    "average_fidelity_small_field",
    "fidelity_curve",
    "gamma_factor",
    "golden_section_max",
    "optimize",
    "optimize_field_tuned",
    "optimize_vanishing_field",
    "scaling_lhs",
    "tuned_fidelity",
]

# In units of the coupling.  Keeps B*t*d/2 small enough over t <= 400 that
# the exact average stays within 1e-6 of its zero-field limit.
VANISHING_FIELD = 1e-9

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
TIE_TOL = 1e-12
RADICAND_SLACK = 1e-12


class Strategy(str, enum.Enum):
    FIELD_TUNED = "tuned"
    VANISHING_FIELD = "vanishing"


@dataclass(frozen=True)
class HaarMoments:
    """Low-order moments of the amplitudes of a Haar-random ``d``-level state."""

    levels: int

    @property
    def m2(self) -> float:
        return 1.0 / self.levels

    @property
    def m4(self) -> float:
        d = self.levels
        return 2.0 / (d * (d + 1))

    @property
    def m22(self) -> float:
        d = self.levels
        return 1.0 / (d * (d + 1))


@dataclass(frozen=True)
class StrategyResult:
    strategy: Strategy
    levels: int
    t_opt: float
    b_opt: float
    f_avg_opt: float
    grid_step: float
    t_max: float
    amplitude: TransferAmplitude
    # |exact average - zero-field limit| at t_opt; only meaningful for the
    # vanishing-field strategy.
    limit_defect: float = 0.0


def gamma_factor(d: int, x):
    """``sin((d-1)x/2) / sin(x/2)``, evaluated as the equivalent cosine sum.

    The sum form has no removable singularities at ``x = 2 pi k`` and is
    exactly 1 for ``d = 2``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for mu in range(1, d):
        out = out + np.cos((mu - d / 2) * x)
    return out if out.ndim else float(out)


def _check_levels(d):
    if int(d) != d or d < 2:
        raise ValueError(f"number of levels must be an integer >= 2, got {d}")


def _average(modulus, phase, d, field, t):
    dd = d * (d + 1)
    g = gamma_factor(d, field * t)
    return 1 / d + 2 * modulus * np.cos(phase - d * field * t / 2) * g / dd + modulus**2 * g**2 / dd


def _average_limit(modulus, phase, d):
    dd = d * (d + 1)
    return 1 / d + 2 * (d - 1) * modulus * np.cos(phase) / dd + (d - 1) ** 2 * modulus**2 / dd


def average_fidelity(amp: TransferAmplitude, d: int, field: float, t: float | None = None) -> float:
    """Haar average of ``<psi|rho_r(t)|psi>`` for a ``d``-level input state."""
    _check_levels(d)
    if field < 0:
        raise ValueError("field must be non-negative")
    t = amp.time if t is None else t
    return float(_average(amp.modulus, amp.phase, d, field, t))


def average_fidelity_small_field(amp: TransferAmplitude, d: int) -> float:
    _check_levels(d)
    return float(_average_limit(amp.modulus, amp.phase, d))


def scaling_lhs(f_avg_opt: float, d: int) -> float:
    """Invert the zero-field average at ``cos(phase) = 1`` for the amplitude modulus."""
    _check_levels(d)
    radicand = d * (d + 1) * f_avg_opt - d
    if radicand < 0:
        if radicand < -RADICAND_SLACK:
            raise ValueError(
                f"average fidelity {f_avg_opt} is below the no-transfer value for d={d}"
            )
        radicand = 0.0
    return (math.sqrt(radicand) - 1) / (d - 1)


def golden_section_max(f, a: float, b: float, tol: float = 1e-6):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _time_grid(t_max: float, step: float) -> np.ndarray:
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValueError(f"time span must be (0, T] with T > 0, got T={t_max}")
    if not (math.isfinite(step) and step > 0):
        raise ValueError(f"time step must be positive, got {step}")
    n = int(math.floor(t_max / step + 1e-9))
    if n < 1:
        raise ValueError("time span contains no grid points")
    return step * np.arange(1, n + 1)


def _peak_candidates(values: np.ndarray, count: int) -> list[int]:
    """Indices of the largest local maxima, best first; ties go to the earliest index."""
    v = values
    left = np.concatenate(([-np.inf], v[:-1]))
    right = np.concatenate((v[1:], [-np.inf]))
    peaks = np.flatnonzero((v >= left) & (v >= right))
    order = sorted(peaks, key=lambda i: (-v[i], i))
    return order[:count]


def _refine(objective, grid: np.ndarray, values: np.ndarray, step: float, t_max: float,
            tol: float, candidates: int):
    best_t, best_f = None, -np.inf
    for i in _peak_candidates(values, candidates):
        lo = max(grid[i] - step, 1e-3 * step)
        hi = min(grid[i] + step, t_max)
        t, f = golden_section_max(objective, lo, hi, tol)
        if values[i] >= f:
            t, f = grid[i], values[i]
        if f > best_f + TIE_TOL or (abs(f - best_f) <= TIE_TOL and t < best_t):
            best_t, best_f = t, f
    return float(best_t), float(best_f)


def _amplitude(cfg: ChainConfig, t: float) -> TransferAmplitude:
    return TransferAmplitude(value=complex(amplitude_exact_grid(cfg, t)), time=float(t))


def fidelity_curve(cfg: ChainConfig, times, field: float) -> np.ndarray:
    """Exact average fidelity at fixed field over an array of times."""
    _check_levels(cfg.levels)
    times = np.asarray(times, dtype=float)
    f = amplitude_exact_grid(cfg, times)
    return _average(np.abs(f), np.angle(f), cfg.levels, field, times)


def optimize_vanishing_field(cfg: ChainConfig, t_max: float = 400.0, step: float = 0.05,
                             field: float = VANISHING_FIELD, tol: float = 1e-6,
                             candidates: int = 5) -> StrategyResult:
    d = cfg.levels
    _check_levels(d)
    b = field * cfg.coupling
    grid = _time_grid(t_max, step)
    values = fidelity_curve(cfg, grid, b)

    def objective(t):
        return float(fidelity_curve(cfg, t, b))

    t_opt, f_opt = _refine(objective, grid, values, step, t_max, tol, candidates)
    amp = _amplitude(cfg, t_opt)
    defect = abs(f_opt - average_fidelity_small_field(amp, d))
    return StrategyResult(Strategy.VANISHING_FIELD, d, t_opt, b, f_opt, step, t_max, amp, defect)


def _best_field_phase(modulus, phase, d: int, x_hi, n_scan: int):
    """Grid maximum over ``x = B t`` in ``[0, x_hi]``, vectorised over times."""
    modulus = np.atleast_1d(modulus)
    phase = np.atleast_1d(phase)
    x_hi = np.broadcast_to(np.atleast_1d(x_hi), modulus.shape)
    frac = np.linspace(0.0, 1.0, n_scan)
    x = x_hi[:, None] * frac[None, :]
    dd = d * (d + 1)
    g = gamma_factor(d, x)
    vals = 1 / d + 2 * modulus[:, None] * np.cos(phase[:, None] - d * x / 2) * g / dd \
        + modulus[:, None] ** 2 * g**2 / dd
    j = np.argmax(vals, axis=1)
    rows = np.arange(len(modulus))
    return x[rows, j], vals[rows, j], x_hi / (n_scan - 1)


def _x_upper(t, b_max):
    t = np.asarray(t, dtype=float)
    full = np.full_like(t, 2 * np.pi)
    return full if b_max is None else np.minimum(full, b_max * t)


def tuned_fidelity(cfg: ChainConfig, t: float, b_max: float | None = None,
                   tol: float = 1e-6) -> tuple[float, float]:
    """Best field and the resulting average fidelity at a fixed time ``t > 0``.

    The average depends on the field only through ``x = B t`` and is
    ``2 pi``-periodic in ``x``, so the search covers ``x`` in
    ``[0, min(2 pi, b_max t)]``: a scan followed by golden-section refinement.
    """
    d = cfg.levels
    if t <= 0:
        raise ValueError("field tuning needs t > 0")
    amp = _amplitude(cfg, t)
    x_hi = float(_x_upper(t, b_max))
    x0, v0, dx = _best_field_phase(amp.modulus, amp.phase, d, x_hi, 32 * d + 1)
    x0, v0, dx = float(x0[0]), float(v0[0]), float(dx[0])
    x, v = golden_section_max(
        lambda xx: float(_average(amp.modulus, amp.phase, d, xx / t, t)),
        max(0.0, x0 - dx), min(x_hi, x0 + dx), tol)
    if v0 >= v:
        x, v = x0, v0
    return x / t, v


def optimize_field_tuned(cfg: ChainConfig, t_max: float = 400.0, step: float = 0.05,
                         b_max: float | None = None, tol: float = 1e-6,
                         candidates: int = 5) -> StrategyResult:
    """Joint maximisation over pickup time and field ``B`` in ``[0, b_max]``."""
    d = cfg.levels
    _check_levels(d)
    if b_max is not None and not (math.isfinite(b_max) and b_max > 0):
        raise ValueError(f"field range must be [0, B_max] with B_max > 0, got {b_max}")
    grid = _time_grid(t_max, step)
    f = amplitude_exact_grid(cfg, grid)
    _, values, _ = _best_field_phase(np.abs(f), np.angle(f), d, _x_upper(grid, b_max), 32 * d + 1)

    t_opt, _ = _refine(lambda t: tuned_fidelity(cfg, t, b_max, tol)[1],
                       grid, values, step, t_max, tol, candidates)
    b_opt, f_opt = tuned_fidelity(cfg, t_opt, b_max, tol)
    amp = _amplitude(cfg, t_opt)
    return StrategyResult(Strategy.FIELD_TUNED, d, t_opt, b_opt, f_opt, step, t_max, amp)


def optimize(cfg: ChainConfig, strategy: Strategy | str, **kwargs) -> StrategyResult:
    strategy = Strategy(strategy)
    if strategy is Strategy.FIELD_TUNED:
        return optimize_field_tuned(cfg, **kwargs)
    return optimize_vanishing_field(cfg, **kwargs)
