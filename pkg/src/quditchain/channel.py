"""Single-qudit transfer channel in Kraus form.

Density matrices and pure states are plain numpy arrays; use
:func:`check_density_matrix` to validate one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import MODULUS_SLACK, TransferAmplitude

__all__ = [
    "KrausSet",
    "apply",
    "build_kraus",
    "check_density_matrix",
    "completeness_defect",
    "haar_average_fidelity",
    "pure_density",
    "sample_haar",
    "state_fidelity",
]


@dataclass(frozen=True)
class KrausSet:
    levels: int
    operators: tuple[np.ndarray, ...] = field(repr=False)
    amplitude: TransferAmplitude
    field: float
    time: float

    def dressed(self) -> np.ndarray:
        """``f^mu = exp(-i B mu t) f_rs`` for ``mu = 0 .. d-1`` (entry 0 unused)."""
        mu = np.arange(self.levels)
        return np.exp(-1j * self.field * mu * self.time) * self.amplitude.value


def build_kraus(amp: TransferAmplitude, d: int, field: float, t: float | None = None) -> KrausSet:
    if int(d) != d or d < 2:
        raise ValueError(f"number of levels must be an integer >= 2, got {d}")
    if amp.modulus > 1 + MODULUS_SLACK:
        raise ValueError(f"transfer amplitude modulus {amp.modulus} exceeds 1")
    t = amp.time if t is None else float(t)
    mu = np.arange(1, d)
    dressed = np.exp(-1j * field * mu * t) * amp.value
    leak = math.sqrt(max(0.0, 1.0 - amp.modulus**2))

    a0 = np.zeros((d, d), dtype=complex)
    a0[0, 0] = 1.0
    a0[mu, mu] = dressed
    ops = [a0]
    for m in mu:
        a = np.zeros((d, d), dtype=complex)
        a[0, m] = leak
        ops.append(a)
    return KrausSet(levels=d, operators=tuple(ops), amplitude=amp, field=field, time=t)


def completeness_defect(ks: KrausSet) -> float:
    total = sum(a.conj().T @ a for a in ks.operators)
    return float(np.abs(total - np.eye(ks.levels)).max())


def apply(ks: KrausSet, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (ks.levels, ks.levels):
        raise ValueError(f"state of shape {rho.shape} does not match {ks.levels} levels")
    return sum(a @ rho @ a.conj().T for a in ks.operators)


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density_matrix(rho: np.ndarray, atol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and positive."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > atol:
        raise ValueError(f"density matrix is not Hermitian (defect {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise ValueError(f"density matrix trace is {tr}")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lowest:.3e}")
    return rho


def state_fidelity(psi: np.ndarray, rho: np.ndarray, squared: bool = False) -> float:
    """Overlap ``<psi|rho|psi>``.

    ``squared=True`` returns ``|<psi|rho|psi>|^2`` instead.  The Haar
    averages elsewhere in the package use the plain overlap, which is linear
    in ``rho``.
    """
    psi = np.asarray(psi, dtype=complex)
    rho = np.asarray(rho)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"state of dimension {psi.size} does not match matrix {rho.shape}")
    overlap = float(np.real(psi.conj() @ rho @ psi))
    return overlap**2 if squared else overlap


def sample_haar(d: int, rng=None, size: int | None = None) -> np.ndarray:
    """Haar-random pure state(s) from normalised complex Gaussians.

    ``rng`` is a seed or a ``numpy.random.Generator``.  With ``size`` the
    result has shape ``(size, d)``.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"number of levels must be an integer >= 2, got {d}")
    rng = np.random.default_rng(rng)
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_average_fidelity(ks: KrausSet, n_samples: int, seed=0, streams: int = 8):
    """Monte-Carlo mean and standard error of ``<psi|channel(psi)|psi>``.

    Samples are split over ``streams`` independent child seeds so the
    result does not depend on how the work is scheduled.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    children = np.random.SeedSequence(seed).spawn(streams)
    counts = [n_samples // streams + (i < n_samples % streams) for i in range(streams)]
    values = []
    for child, n in zip(children, counts):
        if n == 0:
            continue
        psi = sample_haar(ks.levels, np.random.default_rng(child), size=n)
        # <psi|A rho A^+|psi> = |<psi|A|psi>|^2 for a pure input
        f = sum(np.abs(np.einsum("ni,ij,nj->n", psi.conj(), a, psi)) ** 2 for a in ks.operators)
        values.append(f)
    values = np.concatenate(values)
    mean = math.fsum(values) / n_samples
    var = math.fsum((values - mean) ** 2) / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)
