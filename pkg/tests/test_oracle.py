import numpy as np
import pytest

from quditchain import oracle
from quditchain.channel import apply, build_kraus, pure_density, sample_haar
from quditchain.lattice import ChainConfig, amplitude_exact
from quditchain.verify import full_space_states


def test_one_particle_hamiltonian_is_circulant():
    h = oracle.one_particle_hamiltonian(ChainConfig(7, coupling=2.0))
    assert np.allclose(h, h.T)
    for k in range(7):
        np.testing.assert_array_equal(np.roll(h[0], k), h[k])
    np.testing.assert_allclose(h.sum(axis=1), 0.0, atol=1e-15)
    assert h[0, 0] == 2.0 and h[0, 1] == -1.0


def test_propagator_examples():
    cfg = ChainConfig(40)
    np.testing.assert_allclose(oracle.propagator_dense(cfg, 0.0), np.eye(40), atol=1e-12)
    u = oracle.propagator_dense(cfg, 17.3)
    np.testing.assert_allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-10)


def test_propagator_sector_phase():
    cfg = ChainConfig(9, field=0.4, receiver=3)
    u0 = oracle.propagator_dense(cfg, 5.0, mu=0)
    u2 = oracle.propagator_dense(cfg, 5.0, mu=2)
    np.testing.assert_allclose(u2, np.exp(-1j * 0.4 * 2 * 5.0) * u0, atol=1e-12)


def test_full_space_caps():
    with pytest.raises(ValueError):
        oracle.full_hamiltonian(ChainConfig(7, levels=2))
    with pytest.raises(ValueError):
        oracle.full_hamiltonian(ChainConfig(4, levels=4))
    cfg = ChainConfig(3, levels=2)
    with pytest.raises(ValueError):
        oracle.evolve_full(cfg, np.ones(4), 1.0)
    with pytest.raises(ValueError):
        oracle.charge_operator(cfg, 2)


def test_full_hamiltonian_ground_energy_and_hermiticity():
    cfg = ChainConfig(4, levels=3, field=0.5)
    h = oracle.full_hamiltonian(cfg)
    np.testing.assert_array_equal(h, h.T)
    g = oracle.basis_state(cfg, [0, 0, 0, 0])
    assert g @ h @ g == 0.0
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 1.3, 25.0])
def test_ground_state_is_stationary(t):
    cfg = ChainConfig(4, levels=3, field=0.2)
    g = oracle.basis_state(cfg, [0] * 4)
    np.testing.assert_allclose(oracle.evolve_full(cfg, g, t), g, atol=1e-12)


def test_one_particle_full_space_amplitudes():
    cfg = ChainConfig(4, levels=3, field=0.35, sender=1)
    for mu in (1, 2):
        levels = [0] * 4
        levels[1] = mu
        psi0 = oracle.basis_state(cfg, levels)
        for t in (0.7, 4.2, 13.0):
            psi = oracle.evolve_full(cfg, psi0, t)
            inside = 0.0
            for k in range(4):
                lv = [0] * 4
                lv[k] = mu
                idx = int(np.flatnonzero(oracle.basis_state(cfg, lv))[0])
                rk = ChainConfig(4, levels=3, field=0.35, sender=1, receiver=k)
                expected = np.exp(-1j * 0.35 * mu * t) * amplitude_exact(rk, t).value
                assert abs(psi[idx] - expected) <= 1e-8
                inside += abs(psi[idx]) ** 2
            assert 1 - inside <= 1e-12


def test_charge_sectors_forbid_transition():
    cfg = ChainConfig(4, levels=3, field=0.1)
    psi0 = oracle.basis_state(cfg, [1, 1, 0, 0])
    target = oracle.basis_state(cfg, [2, 0, 0, 0])
    for t in np.linspace(0, 50, 101):
        assert abs(target @ oracle.evolve_full(cfg, psi0, t)) <= 1e-12


def test_charge_defects():
    cfg = ChainConfig(4, levels=3, field=0.3)
    g = oracle.basis_state(cfg, [0] * 4)
    assert oracle.charge_defect(cfg, g, 3.0, 1) == 0.0
    rng = np.random.default_rng(8)
    psi0 = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    psi0 /= np.linalg.norm(psi0)
    for m in (1, 2):
        for t in (0.5, 9.0, 77.0):
            assert oracle.charge_defect(cfg, psi0, t, m) <= 1e-10


def test_energy_conservation():
    cfg = ChainConfig(5, levels=2, field=0.7)
    rng = np.random.default_rng(4)
    psi0 = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi0 /= np.linalg.norm(psi0)
    e0 = oracle.energy(cfg, psi0)
    for t in (1.0, 10.0, 100.0):
        assert oracle.energy(cfg, oracle.evolve_full(cfg, psi0, t)) == pytest.approx(e0, abs=1e-10)


def test_reduced_state_examples():
    cfg = ChainConfig(4, levels=3)
    g = oracle.basis_state(cfg, [0] * 4)
    rho = oracle.reduced_state(g, 2, 4, 3)
    np.testing.assert_array_equal(rho, np.diag([1, 0, 0]))
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    psi /= np.linalg.norm(psi)
    for site in range(4):
        assert np.trace(oracle.reduced_state(psi, site, 4, 3)).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        oracle.reduced_state(psi, 4, 4, 3)


@pytest.mark.parametrize("d", [2, 3])
def test_channel_matches_full_evolution(d):
    rng = np.random.default_rng(d)
    cfg = ChainConfig(4, levels=d, field=0.45, sender=3, receiver=1)
    for _ in range(5):
        psi = sample_haar(d, rng)
        psi0 = full_space_states(cfg, psi)
        for t in np.linspace(0.1, 30, 12):
            full = oracle.reduced_state(oracle.evolve_full(cfg, psi0, t), cfg.receiver, 4, d)
            ks = build_kraus(amplitude_exact(cfg, t), d, cfg.field)
            np.testing.assert_allclose(apply(ks, pure_density(psi)), full, atol=1e-8)
