import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmvkit.cmv import build_LM
from cmvkit.coefficients import CoefficientSchedule, builtin_schedule
from cmvkit.gz import (
    FAMILIES,
    GZState,
    gz_operator_schedule,
    gz_schedule_from_half_lattice,
    gz_transfer,
    gz_transfer_inv,
    half_lattice_seeds,
    neighbor_table,
    propagate,
    seed_linkage,
    verify_equivalence,
)
from cmvkit.opuc import cmv_basis, opuc_sequence

from conftest import random_disk, random_schedule
from oracles import gz_table


def random_z(rng):
    return np.exp(rng.uniform(-1, 1)) * np.exp(2j * np.pi * rng.random())


@given(st.integers(0, 10_000), st.integers(-6, 6))
def test_transfer_determinant_and_inverse(seed, n):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, -7, 7)
    z = random_z(rng)
    T = gz_transfer(s, n, z)
    rho = s.rho_at(n)
    # the 1/ρ prefactor enters the determinant squared
    assert abs(T.det + np.conj(rho) / rho) < 1e-13
    assert np.max(np.abs(T.matrix @ gz_transfer_inv(s, n, z).matrix - np.eye(2))) < 1e-12
    assert T.parity == ("even" if n % 2 == 0 else "odd")


def test_transfer_rejects_unimodular_and_extreme_z():
    s = CoefficientSchedule(0, [0.2, 1.0], [1, 1])
    with pytest.raises(ValueError, match="does not exist"):
        gz_transfer(s, 1, 0.5)
    with pytest.raises(ValueError, match="outside"):
        gz_transfer(s, 0, 1e-8)
    with pytest.raises(ValueError, match="outside"):
        gz_transfer_inv(s, 0, 1e7)


@pytest.mark.parametrize("K", [-2, -1, 0, 1, 2, 3])
@pytest.mark.parametrize("rotated", [False, True])
def test_neighbour_tables(rng, K, rotated):
    for _ in range(10):
        s = random_schedule(rng, -4, 5, phases=rotated)
        z = random_z(rng)
        table = neighbor_table(s, K, z)
        oracle = gz_table(s.alpha_at(K), s.rho_at(K), s.alpha_at(K + 1), s.rho_at(K + 1), z, K % 2 == 0)
        for fam in FAMILIES:
            left, right = table[fam]
            assert left.n == K - 1 and right.n == K + 1
            assert np.max(np.abs(left.vector - oracle[fam][0])) < 1e-13
            assert np.max(np.abs(right.vector - oracle[fam][1])) < 1e-13


def test_free_table_cells():
    s = CoefficientSchedule.free(0, 1)
    table = neighbor_table(s, 0, 1.0)
    expect = {"f+": (1, 1), "p+": (-1, 1), "f-": (-1, 1), "p-": (1, 1)}
    for fam, (f, g) in expect.items():
        for state in table[fam]:
            assert state.vector == pytest.approx(np.array([f, g]))


@pytest.mark.parametrize("K", [0, 1, 4, 7])
@pytest.mark.parametrize("family", FAMILIES)
def test_seed_linkage_holds_at_K(K, family):
    z = 0.3 + 1.1j
    assert seed_linkage(half_lattice_seeds(K, family, z), family, z) == 0


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown family"):
        half_lattice_seeds(0, "q+", 1.0)


@given(st.integers(0, 10_000))
def test_propagate_round_trip(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, -8, 8, radius=0.8)
    z = random_z(rng)
    start = GZState(random_disk(rng), random_disk(rng), 0)
    out = propagate(s, start, 6, z)
    back = propagate(s, out[-1], 0, z)
    assert [st_.n for st_ in out] == list(range(7))
    assert abs(back[-1].f - start.f) + abs(back[-1].g - start.g) < 1e-10


def test_propagate_direction_check():
    s = CoefficientSchedule.free(-2, 2)
    with pytest.raises(ValueError, match="left"):
        propagate(s, GZState(1, 1, 0), 2, 1.0, direction="left")


def _propagated(s, K, stop, z, family="f+"):
    states = propagate(s, half_lattice_seeds(K, family, z), stop, z)
    return np.array([x.f for x in states]), np.array([x.g for x in states])


@pytest.mark.parametrize("K", [-3, 0, 1])
def test_equivalence_passes_on_solutions(rng, K):
    for _ in range(10):
        s = random_schedule(rng, -6, 12)
        z = random_z(rng)
        f, g = _propagated(s, K, K + 10, z)
        rep = verify_equivalence(s, f, g, z, (K + 1, K + 9))
        assert rep.passed and rep.consistent
        assert rep.block_residual < 1e-11 and rep.transfer_residual < 1e-11


@pytest.mark.parametrize("where", [2, 5, 8])
def test_equivalence_fails_on_perturbation(rng, where):
    s = random_schedule(rng, -2, 14)
    z = random_z(rng)
    f, g = _propagated(s, 0, 10, z)
    f[where] += 1e-3
    rep = verify_equivalence(s, f, g, z, (1, 9))
    assert not rep.block_ok and not rep.transfer_ok and rep.consistent
    assert min(rep.block_residual, rep.transfer_residual) >= 1e-4


def test_equivalence_window_checks():
    s = CoefficientSchedule.free(-2, 6)
    with pytest.raises(ValueError, match="cover"):
        verify_equivalence(s, np.ones(3), np.ones(3), 1.0, (0, 3))
    with pytest.raises(ValueError, match="small"):
        verify_equivalence(s, np.ones(3), np.ones(3), 1.0, (2, 1))


def test_block_check_agrees_with_operator_factors(rng):
    # ζ ≡ 1: the block equations equal the plain ℒ, ℳ of the shifted schedule
    s = random_schedule(rng, -4, 12, phases=False)
    z = random_z(rng)
    f, g = _propagated(s, -2, 9, z)
    f[6] += 1e-3
    lo, hi = -1, 8
    rep = verify_equivalence(s, f, g, z, (lo, hi))
    L, M = build_LM(gz_operator_schedule(s), (lo - 1, hi + 1), rotated=False, boundary="principal_truncation")
    rows = slice(1, -1)
    block = max(
        np.max(np.abs((M.matrix @ f - z * g)[rows])),
        np.max(np.abs((L.matrix @ g - f)[rows])),
    )
    assert abs(block - rep.block_residual) < 1e-13


@pytest.mark.parametrize("rotated", [False, True])
def test_opuc_linkage(rng, rotated):
    s = random_schedule(rng, 0, 11, radius=0.8, phases=rotated)
    pairs = opuc_sequence(s, 12, "rotated" if rotated else "standard")
    shifted = gz_schedule_from_half_lattice(s)
    # rotated solutions pick up conj(Q_n), Q_n = Π_{j<n} ζ_j²
    q = np.conj(np.concatenate([[1.0], np.cumprod(s.zeta**2)]))
    for _ in range(20):
        z = np.exp(2j * np.pi * rng.random())
        states = propagate(shifted, half_lattice_seeds(0, "f+", z), 12, z)
        for st_ in states:
            n = st_.n
            assert abs(st_.f - q[n] * z * cmv_basis(pairs, n, z, alternate=True)) < 1e-10
            assert abs(st_.g - q[n] * cmv_basis(pairs, n, z)) < 1e-10


def test_schedule_relabellings():
    s = builtin_schedule("geronimus_mu", 3)
    shifted = gz_schedule_from_half_lattice(s)
    assert shifted.window == (0, 3) and shifted.alpha_at(0) == -1 and shifted.alpha_at(1) == -0.5
    op = gz_operator_schedule(CoefficientSchedule.free(-2, 2))
    assert op.window == (-3, 1)
