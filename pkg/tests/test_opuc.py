import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmvkit.cli import load_schema
from cmvkit.coefficients import BUILTINS, CoefficientSchedule, MeasureSpec, builtin_schedule, moments
from cmvkit.opuc import (
    ComplexPoly,
    cd_kernel,
    cmv_basis,
    gram_schmidt_oracle,
    monic_norm,
    opuc_sequence,
    pairing_identity,
    pairing_real_part,
    polynomial_values,
    reverse,
    rotated_reverse,
    second_kind_sequence,
    szego_backward,
    szego_forward,
)
from cmvkit.weyl import second_kind_integral

from conftest import random_disk, random_schedule

SQ3 = np.sqrt(3.0)


def geronimus_phi(n):
    k = np.arange(n + 1)
    return np.sqrt(2.0 / ((n + 1) * (n + 2))) * (k + 1)


def test_poly_evaluation_and_json():
    p = ComplexPoly([1, 2j, -3])
    assert p.degree == 2
    assert p(2.0) == 1 + 4j - 12
    data = p.to_json(4)
    jsonschema.validate(data, load_schema("polynomial"))
    assert data["degree"] == 4 and len(data["coeffs"]) == 5
    assert np.array_equal(ComplexPoly.from_json(data).padded(5), p.padded(5))


def test_reverse_conjugates_and_flips():
    p = ComplexPoly([1 + 1j, 2, 3j])
    assert np.array_equal(reverse(p, 2).coeffs, [-3j, 2, 1 - 1j])
    assert np.array_equal(reverse(p, 3).coeffs, [0, -3j, 2, 1 - 1j])
    with pytest.raises(ValueError):
        reverse(p, 1)


def test_rotated_reverse_phase():
    p = ComplexPoly([1, 2])
    zetas = [np.exp(0.3j), np.exp(0.5j)]
    assert np.allclose(rotated_reverse(p, 2, zetas).coeffs, np.exp(1.6j) * reverse(p, 2).coeffs)


@pytest.mark.parametrize("n", range(8))
def test_geronimus_mu_closed_form(n):
    s = builtin_schedule("geronimus_mu", 8)
    pair = opuc_sequence(s, 8)[n]
    assert np.max(np.abs(pair.p.padded(n + 1) - geronimus_phi(n))) < 1e-13
    assert np.max(np.abs(pair.p_star.padded(n + 1) - geronimus_phi(n)[::-1])) < 1e-13


@pytest.mark.parametrize("n", range(8))
def test_rotated_constant_phase_closed_form(n):
    zeta = np.exp(1j * np.pi / 4)
    s = builtin_schedule("geronimus_mu", 8, zeta)
    pair = opuc_sequence(s, 8, "rotated")[n]
    assert np.max(np.abs(pair.p.padded(n + 1) - zeta**n * geronimus_phi(n))) < 1e-13
    # rotated reverse carries Π ζ_j² against the conjugated phase
    assert np.max(np.abs(pair.p_star.padded(n + 1) - zeta**n * geronimus_phi(n)[::-1])) < 1e-13


def test_second_kind_frozen_values():
    s = builtin_schedule("geronimus_mu", 2)
    psi = second_kind_sequence(s, 2)[1]
    assert np.allclose(psi.p.coeffs, [-1 / SQ3, 2 / SQ3], atol=1e-15)
    assert np.allclose(psi.p_star.coeffs, [2 / SQ3, -1 / SQ3], atol=1e-15)
    assert psi.vector(0.0) == pytest.approx((-1 / SQ3, -2 / SQ3))


def test_monic_norm():
    s = builtin_schedule("geronimus_mu", 5)
    # ‖Φ_n‖² = Π (1 - 1/(j+2)²) = (n+2) / (2(n+1))
    for n in range(5):
        assert monic_norm(s, n) ** 2 == pytest.approx((n + 2) / (2 * (n + 1)), rel=1e-14)


@given(st.integers(0, 10_000), st.sampled_from(["standard", "rotated", "second_kind", "rotated_second_kind"]))
def test_forward_backward_round_trip(seed, variant):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, 0, 7, radius=0.9)
    seq = opuc_sequence(s, 8, variant)
    for n in range(8, 0, -1):
        back = szego_backward(seq[n], s.alpha[n - 1], s.zeta[n - 1], variant)
        assert np.max(np.abs(back.p.padded(n) - seq[n - 1].p.padded(n))) < 1e-11
        assert np.max(np.abs(back.p_star.padded(n) - seq[n - 1].p_star.padded(n))) < 1e-11


def test_backward_rejects_non_szego_pair():
    s = builtin_schedule("geronimus_mu", 3)
    pair = opuc_sequence(s, 2)[2]
    with pytest.raises(ValueError, match="constant term"):
        szego_backward(pair, 0.7)


def test_forward_rejects_unimodular():
    pair = opuc_sequence(builtin_schedule("lebesgue", 1), 0)[0]
    with pytest.raises(ValueError, match="split"):
        szego_forward(pair, 1.0)


@given(st.integers(0, 10_000))
def test_p_star_is_rotated_reverse(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, 0, 5)
    for pair in opuc_sequence(s, 6, "rotated"):
        expect = rotated_reverse(pair.p, pair.n, s.zeta)
        assert np.max(np.abs(pair.p_star.padded(pair.n + 1) - expect.padded(pair.n + 1))) < 1e-12


@given(st.integers(0, 10_000))
def test_rotation_multiplies_by_cumulative_phase(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, 0, 6)
    z = random_disk(rng, 1.2)
    plain = polynomial_values(s, 7, z, "standard")
    rot = polynomial_values(s, 7, z, "rotated")
    phase = np.concatenate([[1.0], np.cumprod(s.zeta)])
    assert np.max(np.abs(rot[:, 0] - phase * plain[:, 0])) < 1e-10
    assert np.max(np.abs(rot[:, 1] - np.conj(phase) * phase**2 * plain[:, 1])) < 1e-10


@pytest.mark.parametrize("name", BUILTINS)
def test_gram_schmidt_agrees_with_recursion(name):
    mom = moments(MeasureSpec.builtin(name), 16, nodes=512)
    oracle = gram_schmidt_oracle(mom, 16)
    seq = opuc_sequence(builtin_schedule(name, 16), 16)
    for n in range(17):
        assert np.max(np.abs(oracle[n].padded(n + 1) - seq[n].p.padded(n + 1))) < 1e-9


def test_gram_schmidt_detects_degenerate_moments():
    mom = np.ones(9, dtype=complex)  # unit point mass at z = 1
    with pytest.raises(ValueError, match="positive definite"):
        gram_schmidt_oracle(mom, 3)


@pytest.mark.parametrize("variant", ["standard", "rotated", "mixed", "rotated_mixed"])
def test_christoffel_darboux(rng, variant):
    for _ in range(25):
        s = random_schedule(rng, 0, 8, radius=0.7)
        xi, z = random_disk(rng, 1.0), random_disk(rng, 1.0)
        total, closed = cd_kernel(s, 7, xi, z, variant)
        assert abs(total - closed) < 1e-10


def test_christoffel_darboux_diagonal_on_circle_rejected():
    s = builtin_schedule("geronimus_mu", 4)
    with pytest.raises(ValueError, match="denominator"):
        cd_kernel(s, 2, 1j, 1j)


@pytest.mark.parametrize("rotated", [False, True])
def test_pairing_identity(rng, rotated):
    for _ in range(25):
        s = random_schedule(rng, 0, 9, radius=0.8)
        z = random_disk(rng, 1.1)
        lhs, rhs = pairing_identity(s, 9, z, rotated)
        assert abs(lhs - rhs) < 1e-10


def test_pairing_real_part_on_circle(rng):
    s = random_schedule(rng, 0, 6)
    for t in np.linspace(0, 2 * np.pi, 7):
        assert pairing_real_part(s, 6, np.exp(1j * t), rotated=True) == pytest.approx(1.0, abs=1e-12)


def test_second_kind_integral_frozen():
    s = builtin_schedule("geronimus_mu", 4)
    psi, psi_star = second_kind_integral(MeasureSpec.builtin("geronimus_mu"), s, 1, 0.25)
    assert psi == pytest.approx(-0.2886751345948129, abs=1e-12)
    assert psi_star == pytest.approx(1.0103629710818451, abs=1e-12)


@pytest.mark.parametrize("form", ["difference", "split"])
@pytest.mark.parametrize("rotated", [False, True])
def test_second_kind_integral_matches_recursion(form, rotated):
    s = builtin_schedule("geronimus_mu", 8, np.exp(0.4j))
    mu = MeasureSpec.builtin("geronimus_mu")
    z = 0.3 - 0.4j
    variant = "rotated_second_kind" if rotated else "second_kind"
    vals = polynomial_values(s, 6, z, variant)
    for n in range(1, 7):
        psi, psi_star = second_kind_integral(mu, s, n, z, rotated, form)
        assert abs(psi - vals[n, 0]) < 1e-10
        assert abs(psi_star - vals[n, 1]) < 1e-10


def test_second_kind_integral_at_degree_zero():
    # the integral gives ψ_0 = 0 where the recursion starts from 1
    s = builtin_schedule("geronimus_mu", 2)
    psi, psi_star = second_kind_integral(MeasureSpec.builtin("geronimus_mu"), s, 0, 0.5)
    assert abs(psi) < 1e-14 and psi_star == pytest.approx(1.0)


@pytest.mark.parametrize("name", BUILTINS)
def test_cmv_basis_orthonormal(name):
    s = builtin_schedule(name, 10, np.exp(0.9j))
    xi, w = MeasureSpec.builtin(name).quadrature(1024)
    pairs = opuc_sequence(s, 9, "rotated")
    for alternate in (False, True):
        chi = np.array([cmv_basis(pairs, k, xi, alternate) for k in range(10)])
        gram = (np.conj(chi) * w) @ chi.T
        assert np.max(np.abs(gram - np.eye(10))) < 1e-12
