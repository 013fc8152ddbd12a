"""Brute-force reference computations.

Everything here is deliberately naive: dense matrices and full
eigendecompositions, used to cross-check the closed forms.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .channel import KrausSet
from .entanglement import maximally_entangled
from .lattice import ChainConfig

__all__ = [
    "MAX_FULL_DIM",
    "MAX_ONE_PARTICLE",
    "basis_state",
    "charge_defect",
    "charge_operator",
    "energy",
    "evolve_full",
    "full_hamiltonian",
    "kraus_extension",
    "one_particle_hamiltonian",
    "propagator_dense",
    "reduced_state",
]

MAX_ONE_PARTICLE = 4096
MAX_SITES, MAX_LEVELS, MAX_FULL_DIM = 6, 3, 729


def one_particle_hamiltonian(cfg: ChainConfig, mu: int = 0) -> np.ndarray:
    """Swap Hamiltonian restricted to one excitation at level ``mu``.

    Diagonal ``J`` (two bonds at ``J/2``), hopping ``-J/2`` to each ring
    neighbour, plus ``B mu`` on the diagonal.
    """
    n = cfg.n_sites
    h = np.zeros((n, n))
    for i in range(n):
        h[i, i] += cfg.coupling + cfg.field * mu
        h[i, (i + 1) % n] -= cfg.coupling / 2
        h[(i + 1) % n, i] -= cfg.coupling / 2
    return h


@lru_cache(maxsize=64)
def _one_particle_eigh(n, coupling, field, mu):
    cfg = ChainConfig(n_sites=n, coupling=coupling, field=field)
    return np.linalg.eigh(one_particle_hamiltonian(cfg, mu))


def propagator_dense(cfg: ChainConfig, t: float, mu: int = 0) -> np.ndarray:
    if cfg.n_sites > MAX_ONE_PARTICLE:
        raise ValueError(f"one-particle oracle is capped at {MAX_ONE_PARTICLE} sites")
    w, v = _one_particle_eigh(cfg.n_sites, cfg.coupling, cfg.field, mu)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _check_caps(cfg: ChainConfig):
    if cfg.n_sites > MAX_SITES or cfg.levels > MAX_LEVELS:
        raise ValueError(
            f"full-space oracle is capped at {MAX_SITES} sites and {MAX_LEVELS} levels, "
            f"got N={cfg.n_sites}, d={cfg.levels}"
        )


def _digits(cfg: ChainConfig) -> np.ndarray:
    """Level of every site for every basis state; site 0 is the most significant digit."""
    n, d = cfg.n_sites, cfg.levels
    idx = np.arange(d**n)
    return np.stack([(idx // d ** (n - 1 - i)) % d for i in range(n)], axis=1)


def basis_state(cfg: ChainConfig, levels) -> np.ndarray:
    """Product basis vector with site ``i`` at ``levels[i]``."""
    _check_caps(cfg)
    levels = list(levels)
    if len(levels) != cfg.n_sites:
        raise ValueError("need one level per site")
    index = 0
    for lv in levels:
        index = index * cfg.levels + lv
    psi = np.zeros(cfg.levels**cfg.n_sites, dtype=complex)
    psi[index] = 1.0
    return psi


def full_hamiltonian(cfg: ChainConfig) -> np.ndarray:
    """``-J/2 sum_i (P_{i,i+1} - 1) + B sum_i S_z,i`` on the ring."""
    _check_caps(cfg)
    n, d = cfg.n_sites, cfg.levels
    dim = d**n
    grid = np.arange(dim).reshape((d,) * n)
    h = np.zeros((dim, dim))
    eye = np.eye(dim)
    for i in range(n):
        j = (i + 1) % n
        perm = np.swapaxes(grid, i, j).reshape(-1)
        swap = eye[perm]
        h += -cfg.coupling / 2 * (swap - eye)
    h += np.diag(cfg.field * _digits(cfg).sum(axis=1))
    return h


@lru_cache(maxsize=16)
def _full_eigh(cfg: ChainConfig):
    return np.linalg.eigh(full_hamiltonian(cfg))


def evolve_full(cfg: ChainConfig, psi0: np.ndarray, t: float) -> np.ndarray:
    _check_caps(cfg)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (cfg.levels**cfg.n_sites,):
        raise ValueError(f"state has shape {psi0.shape}, expected ({cfg.levels ** cfg.n_sites},)")
    w, v = _full_eigh(cfg)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))


def energy(cfg: ChainConfig, psi: np.ndarray) -> float:
    return float(np.real(psi.conj() @ full_hamiltonian(cfg) @ psi))


def charge_operator(cfg: ChainConfig, m: int) -> np.ndarray:
    """Diagonal of ``sum_i S_z,i^m``."""
    _check_caps(cfg)
    if not 1 <= m <= cfg.levels - 1:
        raise ValueError(f"charge order must lie in 1..{cfg.levels - 1}, got {m}")
    return (_digits(cfg).astype(float) ** m).sum(axis=1)


def charge_defect(cfg: ChainConfig, psi0: np.ndarray, t: float, m: int) -> float:
    q = charge_operator(cfg, m)
    psi_t = evolve_full(cfg, psi0, t)
    before = float(np.sum(q * np.abs(psi0) ** 2))
    after = float(np.sum(q * np.abs(psi_t) ** 2))
    return abs(after - before)


def reduced_state(psi: np.ndarray, site: int, n_sites: int, levels: int) -> np.ndarray:
    """Trace out every site but ``site``."""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} outside [0, {n_sites})")
    t = np.moveaxis(np.asarray(psi).reshape((levels,) * n_sites), site, 0).reshape(levels, -1)
    return t @ t.conj().T


def kraus_extension(ks: KrausSet) -> np.ndarray:
    """``sum_mu (I x A_mu)|ME><ME|(I x A_mu)^+`` with explicit Kronecker products."""
    d = ks.levels
    me = maximally_entangled(d)
    rho_me = np.outer(me, me.conj())
    out = np.zeros_like(rho_me)
    for a in ks.operators:
        big = np.kron(np.eye(d), a)
        out += big @ rho_me @ big.conj().T
    return out
