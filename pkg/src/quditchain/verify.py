"""Oracle checks bundled for the ``verify`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .channel import (apply, build_kraus, completeness_defect, haar_average_fidelity,
                      pure_density, sample_haar)
from .entanglement import joint_state, log_negativity_closed, log_negativity_generic
from .fidelity import HaarMoments, average_fidelity, optimize_vanishing_field
from .lattice import ChainConfig, amplitude_exact, unitarity_defect


@dataclass(frozen=True)
class Check:
    name: str
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} defect={self.defect:.3e}  tol={self.tolerance:.1e}"


def _unitarity():
    return max(unitarity_defect(ChainConfig(20, levels=3), 7.3),
               unitarity_defect(ChainConfig(40, levels=2), 123.4))


def _dense_agreement(rng, pairs):
    worst = 0.0
    for _ in range(pairs):
        n = int(rng.integers(2, 129))
        cfg = ChainConfig(n, sender=int(rng.integers(n)), receiver=int(rng.integers(n)))
        t = float(rng.uniform(0, 400))
        u = oracle.propagator_dense(cfg, t)
        worst = max(worst, abs(abs(u[cfg.receiver, cfg.sender]) - amplitude_exact(cfg, t).modulus))
    return worst


def _kraus_completeness():
    cfg = ChainConfig.half_ring(4, levels=3)
    res = optimize_vanishing_field(cfg)
    return completeness_defect(build_kraus(res.amplitude, 3, res.b_opt))


def full_space_states(cfg: ChainConfig, psi_s: np.ndarray) -> np.ndarray:
    """Sender site in ``psi_s``, every other site in level 0."""
    vec = np.ones(1, dtype=complex)
    ground = np.zeros(cfg.levels, dtype=complex)
    ground[0] = 1.0
    for site in range(cfg.n_sites):
        vec = np.kron(vec, psi_s if site == cfg.sender else ground)
    return vec


def _full_space(rng, times):
    worst = 0.0
    for d in (2, 3):
        cfg = ChainConfig(4, levels=d, field=0.3, sender=0, receiver=2)
        psi = sample_haar(d, rng)
        psi0 = full_space_states(cfg, psi)
        for t in times:
            rho_full = oracle.reduced_state(oracle.evolve_full(cfg, psi0, t), cfg.receiver, 4, d)
            ks = build_kraus(amplitude_exact(cfg, t), d, cfg.field)
            worst = max(worst, float(np.abs(rho_full - apply(ks, pure_density(psi))).max()))
    return worst


def _charges(rng, times):
    cfg = ChainConfig(4, levels=3, field=0.3)
    psi0 = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    psi0 /= np.linalg.norm(psi0)
    worst = 0.0
    for t in times:
        for m in (1, 2):
            worst = max(worst, oracle.charge_defect(cfg, psi0, t, m))
    return worst


def _negativity(times):
    worst = 0.0
    for d in (2, 3, 4):
        cfg = ChainConfig(60, levels=d, sender=1, receiver=30)
        for t in times:
            amp = amplitude_exact(cfg, t)
            rho = joint_state(build_kraus(amp, d, 0.0))
            worst = max(worst, abs(log_negativity_generic(rho, d, d) - log_negativity_closed(amp, d).ln_value))
    return worst


def _haar_moments(seed, n_samples):
    """Largest deviation of the three moment estimates, in standard errors."""
    worst = 0.0
    for d in (2, 3, 4, 6):
        psi = sample_haar(d, np.random.default_rng([seed, d]), size=n_samples)
        p = np.abs(psi) ** 2
        m = HaarMoments(d)
        for sample, expected in ((p[:, 0], m.m2), (p[:, 0] ** 2, m.m4), (p[:, 0] * p[:, 1], m.m22)):
            se = sample.std(ddof=1) / math.sqrt(n_samples)
            worst = max(worst, abs(sample.mean() - expected) / se)
    return worst


def _haar_fidelity(seed, n_samples):
    worst = 0.0
    for d in (2, 3, 4):
        cfg = ChainConfig(14, levels=d, receiver=7)
        amp = amplitude_exact(cfg, 8.0)
        field = 0.05
        ks = build_kraus(amp, d, field)
        mean, se = haar_average_fidelity(ks, n_samples, seed=[seed, d])
        worst = max(worst, abs(mean - average_fidelity(amp, d, field)) / se)
    return worst


def run_checks(seed: int = 0, corrupt: bool = False, n_samples: int = 100_000) -> list[Check]:
    rng = np.random.default_rng(seed)
    times = np.linspace(0.1, 40.0, 50)
    checks = [
        Check("unitarity of transfer amplitudes", _unitarity(), 1e-10),
        Check("amplitude vs dense propagator", _dense_agreement(rng, 200), 1e-10),
        Check("Kraus completeness at optimum", _kraus_completeness(), 1e-12),
        Check("channel vs full-space evolution (N=4)", _full_space(rng, times), 1e-8),
        Check("charge conservation Q1, Q2", _charges(rng, times[::5]), 1e-10),
        Check("negativity closed form vs generic", _negativity(np.linspace(0.5, 60, 12)), 1e-10),
        Check("Haar moments (sigma)", _haar_moments(seed, n_samples), 3.0),
        Check("Haar-averaged fidelity (sigma)", _haar_fidelity(seed, n_samples), 3.0),
    ]
    if corrupt:
        checks = [Check(c.name, c.defect, -1.0) for c in checks]
    return checks
