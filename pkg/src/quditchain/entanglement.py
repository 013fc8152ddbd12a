"""Distribution of a maximally entangled pair through the chain.

One half of the pair sits on an external reference qudit that never
couples to the chain; the other half starts on the sender site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import KrausSet
from .lattice import TransferAmplitude

__all__ = [
    "NegativityResult",
    "joint_state",
    "log_negativity_closed",
    "log_negativity_generic",
    "maximally_entangled",
    "negativity_spectrum",
    "partial_transpose",
]


@dataclass(frozen=True)
class NegativityResult:
    ln_value: float
    efficiency: float
    time: float
    levels: int

    @property
    def closed_form(self) -> float:
        return self.ln_value


def maximally_entangled(d: int) -> np.ndarray:
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1 / math.sqrt(d)
    return psi


def joint_state(ks: KrausSet) -> np.ndarray:
    """State of (reference, receiver) after the chain acts on the second half."""
    d = ks.levels
    psi = maximally_entangled(d).reshape(d, d)
    rho = np.zeros((d * d, d * d), dtype=complex)
    for a in ks.operators:
        # (I x A)|psi>: act on the second index
        out = (psi @ a.T).reshape(-1)
        rho += np.outer(out, out.conj())
    return rho


def partial_transpose(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Transpose the second tensor factor."""
    r = np.asarray(rho).reshape(dim_a, dim_b, dim_a, dim_b)
    return r.transpose(0, 3, 2, 1).reshape(dim_a * dim_b, dim_a * dim_b)


def log_negativity_generic(rho: np.ndarray, dim_a: int, dim_b: int, atol: float = 1e-10) -> float:
    rho = np.asarray(rho)
    if rho.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError(f"state of shape {rho.shape} does not split as {dim_a} x {dim_b}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > atol:
        raise ValueError(f"state is not Hermitian (defect {herm:.3e})")
    pt = partial_transpose(rho, dim_a, dim_b)
    eigs = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return math.log2(math.fsum(np.abs(eigs)))


def log_negativity_closed(amp: TransferAmplitude, d: int) -> NegativityResult:
    """``log2(1 + |f|^2 (d-1))`` and its fraction of the initial ``log2 d``."""
    m2 = min(amp.modulus, 1.0) ** 2
    ln = math.log2(1 + m2 * (d - 1))
    return NegativityResult(ln_value=ln, efficiency=ln / math.log2(d), time=amp.time, levels=d)


def negativity_spectrum(amp: TransferAmplitude, d: int) -> list[tuple[float, int]]:
    """Singular values of the partially transposed joint state with multiplicities."""
    m = min(amp.modulus, 1.0)
    return [(1 / d, d), (m * m / d, (d - 1) ** 2), (m * m / d, d - 1)]
