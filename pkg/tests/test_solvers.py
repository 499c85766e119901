import numpy as np
import pytest

from pbsim.errors import DegenerateSteadyStateError, StepSizeError
from pbsim.hilbert import DensityMatrix, HilbertSpace, Operator, annihilation, embed, pauli_ops, product_state
from pbsim.liouvillian import CollapseChannel, build_liouvillian, one_cavity_channels, two_cavity_channels
from pbsim.models import (
    OneCavityParams,
    TwoCavityParams,
    build_one_cavity_hamiltonian,
    build_two_cavity_hamiltonian_reduced,
    jaynes_cummings_hamiltonian,
    two_cavity_time_dependent,
)
from pbsim.observables import g_n, supermode_g2
from pbsim.solvers import (
    Trajectory,
    evolve,
    evolve_periodic,
    period_propagator,
    periodic_steady_state,
    residual,
    steady_state,
)

from .helpers import random_density_matrix


def assert_physical(rho):
    m = rho.matrix
    assert np.max(np.abs(m - m.conj().T)) <= 1e-10
    assert abs(np.trace(m) - 1) <= 1e-9
    assert np.linalg.eigvalsh(m)[0] >= -1e-8


def one_cavity(n=15, **kw):
    kw.setdefault("omega_drive", 83.33)
    p = OneCavityParams(n_trunc=n, **kw)
    return build_one_cavity_hamiltonian(p), one_cavity_channels(p), p


def test_steady_state_pure_decay():
    space = HilbertSpace((2, 4), ("atom", "phonon"))
    H = Operator(space, np.zeros((8, 8)))
    b = embed(annihilation(4), space, 1)
    sm = embed(pauli_ops()[1], space, 0)
    rho = steady_state(build_liouvillian(H, [CollapseChannel(b, 0.01), CollapseChannel(sm, 1.0)]))
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-12)


def test_steady_state_degenerate_kernel():
    space = HilbertSpace((2, 3))
    L = build_liouvillian(Operator(space, np.zeros((6, 6))), [])
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(L)


def test_steady_state_residual_and_invariants():
    H, ch, _ = one_cavity()
    L = build_liouvillian(H, ch)
    rho = steady_state(L)
    assert residual(L, rho) < 1e-10
    assert_physical(rho)


@pytest.mark.parametrize("delta", [0.05, -0.2, 0.1])
def test_driven_damped_oscillator_is_coherent(delta):
    # d<b>/dt = -i delta <b> - i eps - (gamma_m/2) <b> = 0
    eps, gm = 0.01, 0.01
    H = jaynes_cummings_hamiltonian(15, delta, 0.0, eps)
    space = H.space
    b = embed(annihilation(15), space, 1)
    sm = embed(pauli_ops()[1], space, 0)
    rho = steady_state(build_liouvillian(H, [CollapseChannel(b, gm), CollapseChannel(sm, 1.0)]))
    mean_b = np.trace(b.matrix @ rho.matrix)
    alpha = -eps / (delta - 0.5j * gm)
    assert mean_b == pytest.approx(alpha, rel=1e-9)
    for n in (2, 3, 4):
        assert g_n(rho, 1, n) == pytest.approx(1.0, abs=1e-6)


def test_single_solve_fast_enough():
    import time

    H, ch, _ = one_cavity(16)  # d = 32
    L = build_liouvillian(H, ch)
    t0 = time.perf_counter()
    steady_state(L)
    assert time.perf_counter() - t0 < 1.0


def test_atom_decay_trajectory():
    sp, sm, _ = pauli_ops()
    H = Operator(sm.space, np.zeros((2, 2)))
    rho0 = DensityMatrix(sm.space, np.diag([0, 1]))
    traj = evolve(H, [CollapseChannel(sm, 1.0)], rho0, [0.0, 0.5, 1.0])
    pe = traj.expect(sp @ sm).real
    assert pe[-1] == pytest.approx(np.exp(-1.0), rel=1e-8)
    for s in traj.states:
        assert_physical(s)


def test_rk4_is_fourth_order():
    H, ch, p = one_cavity(6, delta=0.3, eps=0.2)
    d = p.space.dim
    rho0 = DensityMatrix(p.space, np.eye(d) / d)
    finals = [evolve(H, ch, rho0, [0.0, 2.0], h=h).states[-1].matrix for h in (0.2, 0.1, 0.05)]
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    assert e1 / e2 == pytest.approx(16, abs=3)


def test_steady_state_is_fixed_point():
    H, ch, p = one_cavity(10)
    rho = steady_state(build_liouvillian(H, ch))
    traj = evolve(H, ch, rho, [0.0, 1.0])
    assert np.max(np.abs(traj.states[-1].matrix - rho.matrix)) <= 1e-7


def test_initial_condition_forgotten():
    H, ch, p = one_cavity(4)
    rho_ss = steady_state(build_liouvillian(H, ch))
    rng = np.random.default_rng(11)
    t_end = 20 / p.gamma_m
    for _ in range(2):
        rho0 = random_density_matrix(rng, p.space)
        final = evolve(H, ch, rho0, [0.0, t_end], h=0.05).states[-1]
        assert np.max(np.abs(final.matrix - rho_ss.matrix)) < 1e-5


def test_trajectory_states_physical():
    H, ch, p = one_cavity(8)
    traj = evolve(H, ch, product_state(p.space, (0, 0)), np.linspace(0, 5, 11))
    assert len(traj) == 11
    for s in traj.states:
        assert_physical(s)


def test_trajectory_requires_increasing_times():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), (None, None))


def test_time_dependent_step_too_coarse():
    p = TwoCavityParams(n_trunc=3)
    Ht = two_cavity_time_dependent(p)
    rho0 = product_state(p.space, (0, 0))
    with pytest.raises(StepSizeError):
        evolve(Ht, two_cavity_channels(p), rho0, [0.0, 0.01], h=0.2 / p.omega_m)


def test_periodic_propagator_matches_vector_rk4():
    p = TwoCavityParams(n_trunc=3)
    Ht = two_cavity_time_dependent(p)
    ch = two_cavity_channels(p)
    rho0 = product_state(p.space, (0, 0))
    times = Ht.period * np.array([0, 1, 3, 4])
    direct = evolve(Ht, ch, rho0, times)
    strobe = evolve_periodic(Ht, ch, rho0, times)
    np.testing.assert_allclose(strobe.times, direct.times)
    for a, b in zip(direct.states, strobe.states):
        np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)


def test_reduced_evolution_settles_on_steady_state():
    p = TwoCavityParams(n_trunc=8)
    H = build_two_cavity_hamiltonian_reduced(p)
    ch = two_cavity_channels(p)
    traj = evolve(H, ch, product_state(p.space, (0, 0)), np.linspace(0, 100, 11))
    g_late = supermode_g2(traj.states[-1])
    g_ss = supermode_g2(steady_state(build_liouvillian(H, ch)))
    assert g_late == pytest.approx(g_ss, rel=0.02)


def test_periodic_steady_state_is_fixed_point():
    p = TwoCavityParams(n_trunc=3)
    Ht = two_cavity_time_dependent(p)
    P = period_propagator(Ht, two_cavity_channels(p))
    rho = periodic_steady_state(P, p.space)
    assert_physical(rho)
    nxt = (P @ rho.matrix.reshape(-1, order="F")).reshape(rho.matrix.shape, order="F")
    np.testing.assert_allclose(nxt, rho.matrix, atol=1e-10)
