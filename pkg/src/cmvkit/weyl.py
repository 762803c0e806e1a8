"""Carathéodory functions, second-kind integrals and ℓ² classification of Weyl solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientSchedule, MeasureSpec
from .opuc import opuc_sequence, polynomial_values

VERDICTS = ("square_summable", "divergent", "inconclusive")
MAX_NODES = 1 << 20


def _check_disk(z: complex) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise ValueError(f"|z| = {abs(z):.6g}: z must lie in the open unit disk")
    return z


def _kernel_nodes(z: complex, floor: int = 512) -> int:
    # trapezoid error for the Herglotz kernel decays like |z|^nodes
    if abs(z) < 1e-3:
        return floor
    need = int(math.ceil(math.log(1e-17) / math.log(abs(z))))
    return min(MAX_NODES, max(floor, need))


def caratheodory_from_schedule(schedule: CoefficientSchedule, z: complex) -> complex:
    """F(z) from the Schur continued fraction seeded with f = 0 past the last coefficient."""
    z = _check_disk(z)
    if not schedule.half_lattice:
        raise ValueError("expected a half-lattice schedule")
    f = 0j
    for a in schedule.alpha[::-1]:
        f = (a + z * f) / (1.0 + np.conj(a) * z * f)
    return complex((1.0 + z * f) / (1.0 - z * f))


def caratheodory(measure: MeasureSpec, z: complex, nodes: int | None = None) -> complex:
    """F(z) = ∫ (ξ + z)/(ξ - z) dμ(ξ); point masses are added exactly."""
    z = _check_disk(z)
    if measure.kind == "coefficient_defined":
        return caratheodory_from_schedule(measure.schedule, z)
    xi, w = measure.quadrature(nodes or _kernel_nodes(z))
    return complex(np.sum(w * (xi + z) / (xi - z)))


def second_kind_integral(
    measure: MeasureSpec,
    schedule: CoefficientSchedule,
    n: int,
    z: complex,
    rotated: bool = False,
    form: str = "difference",
    nodes: int | None = None,
) -> tuple[complex, complex]:
    """ψ_n(z) and ψ_n*(z) from integrals against μ.

    ``difference``: ψ = ∫ (φ(ξ) - φ(z)) K dμ and
    ψ* = ∫ (φ*(z) - φ*(ξ)) K dμ + ∫ φ* dμ, with K = (ξ + z)/(ξ - z).
    ``split``: the same after pulling out F(z), i.e.
    ψ = ∫ φ(ξ) K dμ - F φ(z) and ψ* = F φ*(z) - ∫ φ*(ξ) K dμ + ∫ φ* dμ.

    The constant ∫ φ_n* dμ = ‖Φ_n‖ (times Π ζ_j when rotated) is needed for the
    reverse component to match the recursion.  At n = 0 both forms give
    ψ_0 = 0 rather than the recursion's ψ_0 = 1.
    """
    z = _check_disk(z)
    if form not in ("difference", "split"):
        raise ValueError("form must be 'difference' or 'split'")
    if measure.kind == "coefficient_defined":
        raise ValueError("second-kind integrals need a measure with a density")
    pair = opuc_sequence(schedule, n, "rotated" if rotated else "standard")[n]
    nodes = nodes or max(_kernel_nodes(z), 8 * (n + 1))
    xi, w = measure.quadrature(nodes)
    kern = (xi + z) / (xi - z)
    p_xi, s_xi = pair.p(xi), pair.p_star(xi)
    p_z, s_z = pair.p(z), pair.p_star(z)
    mass = np.sum(w * s_xi)
    if form == "difference":
        psi = np.sum(w * (p_xi - p_z) * kern)
        psi_star = np.sum(w * (s_z - s_xi) * kern) + mass
    else:
        F = np.sum(w * kern)
        psi = np.sum(w * p_xi * kern) - F * p_z
        psi_star = F * s_z - np.sum(w * s_xi * kern) + mass
    return complex(psi), complex(psi_star)


@dataclass(frozen=True, eq=False)
class WeylSample:
    z: complex
    r: complex
    partial_sums: np.ndarray
    verdict: str
    increments: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "r": [self.r.real, self.r.imag],
            "N": int(self.partial_sums.size),
            "verdict": self.verdict,
            "partial_sums": [float(s) for s in self.partial_sums],
        }


def weyl_increments(schedule: CoefficientSchedule, z: complex, r: complex, N: int) -> np.ndarray:
    """|ψ_n + r φ_n|² + |-ψ_n* + r φ_n*|² for n = 0 .. N-1 (rotated families)."""
    z = _check_disk(z)
    if not 1 <= N <= 1024:
        raise ValueError("N must lie in [1, 1024]")
    phi = polynomial_values(schedule, N - 1, z, "rotated")
    psi = polynomial_values(schedule, N - 1, z, "rotated_second_kind")
    top = psi[:, 0] + r * phi[:, 0]
    bottom = -psi[:, 1] + r * phi[:, 1]
    return np.abs(top) ** 2 + np.abs(bottom) ** 2


def classify(increments: np.ndarray, z: complex, sum_tol: float = 1e-10, divergence_ratio: float = 0.1) -> str:
    """Verdict from the increment profile.

    square_summable: every increment over the last N/4 indices is below
    ``sum_tol·(1 - |z|)``.  divergent: the last increment is still at least
    ``divergence_ratio`` times the median of the first N/4 increments.
    """
    N = increments.size
    quarter = max(1, N // 4)
    if np.max(increments[-quarter:]) < sum_tol * (1.0 - abs(z)):
        return "square_summable"
    head = float(np.median(increments[:quarter]))
    if head > 0 and increments[-1] >= divergence_ratio * head:
        return "divergent"
    return "inconclusive"


def weyl_residual(
    schedule: CoefficientSchedule,
    z: complex,
    r: complex,
    N: int = 256,
    sum_tol: float = 1e-10,
    divergence_ratio: float = 0.1,
) -> WeylSample:
    """Partial sums of ‖(ψ_n, -ψ_n*) + r(φ_n, φ_n*)‖² and their ℓ² verdict."""
    z = _check_disk(z)
    r = complex(r)
    inc = weyl_increments(schedule, z, r, N)
    verdict = classify(inc, z, sum_tol, divergence_ratio)
    return WeylSample(z, r, np.cumsum(inc), verdict, inc)


@dataclass(frozen=True)
class InvarianceReport:
    max_abs_diff: float
    max_rel_diff: float
    verdict_rotated: str
    verdict_plain: str

    def to_json(self) -> dict:
        return {
            "max_abs_diff": self.max_abs_diff,
            "max_rel_diff": self.max_rel_diff,
            "verdict_rotated": self.verdict_rotated,
            "verdict_plain": self.verdict_plain,
        }


def rotation_invariance_check(schedule: CoefficientSchedule, z: complex, r: complex, N: int = 256) -> InvarianceReport:
    """Compare partial sums for the schedule and for the same α with ζ ≡ 1."""
    rot = weyl_residual(schedule, z, r, N)
    plain = weyl_residual(schedule.plain(), z, r, N)
    diff = np.abs(rot.partial_sums - plain.partial_sums)
    rel = diff / np.maximum(1.0, np.abs(plain.partial_sums))
    return InvarianceReport(float(np.max(diff)), float(np.max(rel)), rot.verdict, plain.verdict)


def reverse_lower_bound_gap(schedule: CoefficientSchedule, z: complex, N: int) -> float:
    """min over n < N of |ψ_n*(z)|² - (1 - |z|²); nonnegative by the GGN argument."""
    z = _check_disk(z)
    psi = polynomial_values(schedule, N - 1, z, "rotated_second_kind")
    return float(np.min(np.abs(psi[:, 1]) ** 2) - (1.0 - abs(z) ** 2))
