"""Transfer matrices for generalized eigensolutions of (rotated) extended CMV operators.

A pair of sequences (f, g) solves ℳ̃f = z g, ℒ̃g = f exactly when
``(f_{n+1}, g_{n+1}) = T_{n+1}(z) (f_n, g_n)``.  The transfer matrix T_n
carries α_n and couples sites ``n - 1`` and ``n``, one site to the left of
where Θ_n sits in the ℰ∠ factors.  :func:`gz_operator_schedule` performs
that relabelling so the block equations can be checked with the factors
of :mod:`cmvkit.cmv`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cmv import theta
from .coefficients import CoefficientSchedule
from .tolerances import tolerance

FAMILIES = ("f+", "p+", "f-", "p-")
Z_MIN, Z_MAX = 1e-6, 1e6


@dataclass(frozen=True, eq=False)
class Transfer2x2:
    n: int
    z: complex
    matrix: np.ndarray

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def __matmul__(self, vec):
        return self.matrix @ np.asarray(vec, dtype=complex)


@dataclass(frozen=True)
class GZState:
    f: complex
    g: complex
    n: int

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.f, self.g], dtype=complex)


def _check_z(z: complex) -> complex:
    z = complex(z)
    if not Z_MIN <= abs(z) <= Z_MAX:
        raise ValueError(f"|z| = {abs(z):.3g} outside [{Z_MIN:g}, {Z_MAX:g}]")
    return z


def _coeff(schedule: CoefficientSchedule, n: int) -> tuple[complex, complex]:
    a = schedule.alpha_at(n)
    r = schedule.rho_at(n)
    if r == 0:
        raise ValueError(f"|alpha_{n}| = 1: transfer matrix T_{n} does not exist")
    return a, r


def gz_transfer(schedule: CoefficientSchedule, n: int, z: complex) -> Transfer2x2:
    """T_n(z): (1/ρ_n)[[-ᾱ, z], [1/z, -α]] for even n, (1/ρ_n)[[-α, 1], [1, -ᾱ]] for odd n."""
    z = _check_z(z)
    a, r = _coeff(schedule, n)
    if n % 2 == 0:
        m = np.array([[-np.conj(a), z], [1.0 / z, -a]])
    else:
        m = np.array([[-a, 1.0], [1.0, -np.conj(a)]])
    return Transfer2x2(n, z, m / r)


def gz_transfer_inv(schedule: CoefficientSchedule, n: int, z: complex) -> Transfer2x2:
    """Inverse of T_n(z); the prefactor is 1/conj(ρ_n)."""
    z = _check_z(z)
    a, r = _coeff(schedule, n)
    if n % 2 == 0:
        m = np.array([[a, z], [1.0 / z, np.conj(a)]])
    else:
        m = np.array([[np.conj(a), 1.0], [1.0, a]])
    return Transfer2x2(n, z, m / np.conj(r))


def propagate(
    schedule: CoefficientSchedule,
    init: GZState,
    stop: int,
    z: complex,
    direction: str | None = None,
) -> list[GZState]:
    """States from ``init.n`` to ``stop`` inclusive.

    Rightward steps apply T_{n+1}; leftward steps apply T_n⁻¹.
    """
    want = "right" if stop >= init.n else "left"
    if direction is not None and direction != want:
        raise ValueError(f"stop {stop} is not to the {direction} of index {init.n}")
    v = init.vector
    out = [init]
    n = init.n
    while n != stop:
        if want == "right":
            v = gz_transfer(schedule, n + 1, z) @ v
            n += 1
        else:
            v = gz_transfer_inv(schedule, n, z) @ v
            n -= 1
        out.append(GZState(complex(v[0]), complex(v[1]), n))
    return out


def half_lattice_seeds(K: int, family: str, z: complex) -> GZState:
    """Initial vector at index K of the four half-lattice families."""
    z = _check_z(z)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    even = {"f+": (z, 1), "p+": (z, -1), "f-": (1, -1), "p-": (1, 1)}
    odd = {"f+": (1, 1), "p+": (-1, 1), "f-": (-z, 1), "p-": (z, 1)}
    f, g = (even if K % 2 == 0 else odd)[family]
    return GZState(complex(f), complex(g), K)


def seed_linkage(state: GZState, family: str, z: complex) -> complex:
    """Residual of the boundary relation the seed encodes at its own index.

    K even: f+ and p+ satisfy f = ±z g, f- and p- satisfy f = ∓g.
    K odd:  f+ and p+ satisfy f = ±g, f- and p- satisfy f = ∓z g.
    """
    sign = 1.0 if family in ("f+", "p-") else -1.0
    plus = family.endswith("+")
    scale = z if (state.n % 2 == 0) == plus else 1.0
    return complex(state.f - sign * scale * state.g)


def neighbor_table(schedule: CoefficientSchedule, K: int, z: complex) -> dict[str, tuple[GZState, GZState]]:
    """For each family, the states at K-1 (via T_K⁻¹) and K+1 (via T_{K+1})."""
    table = {}
    inv = gz_transfer_inv(schedule, K, z)
    fwd = gz_transfer(schedule, K + 1, z)
    for family in FAMILIES:
        seed = half_lattice_seeds(K, family, z)
        left = inv @ seed.vector
        right = fwd @ seed.vector
        table[family] = (
            GZState(complex(left[0]), complex(left[1]), K - 1),
            GZState(complex(right[0]), complex(right[1]), K + 1),
        )
    return table


def gz_operator_schedule(schedule: CoefficientSchedule) -> CoefficientSchedule:
    """Schedule β_m = α_{m+1} whose ℒ̃, ℳ̃ factors match the transfer recursion.

    With these factors, Θ(β_m) on sites (m, m+1) belongs to ℒ̃ for even m and
    to ℳ̃ for odd m, exactly the blocks that T_{m+1} encodes.
    """
    return CoefficientSchedule(schedule.lo - 1, schedule.alpha, schedule.zeta)


def gz_schedule_from_half_lattice(schedule: CoefficientSchedule) -> CoefficientSchedule:
    """Transfer-matrix labelling of a half-lattice schedule: α'_0 = -1, α'_n = α_{n-1}.

    Seeding K = 0 with ``f+`` then yields f_n = z·χ̃_n(z) and g_n = χ_n(z);
    with phases both carry the extra factor conj(Π_{j<n} ζ_j²).
    """
    if not schedule.half_lattice:
        raise ValueError("expected a half-lattice schedule")
    alpha = np.concatenate([[-1.0], schedule.alpha])
    zeta = np.concatenate([[1.0], schedule.zeta])
    return CoefficientSchedule(0, alpha, zeta)


@dataclass(frozen=True)
class EquivalenceReport:
    window: tuple[int, int]
    block_residual: float
    transfer_residual: float
    tol: float

    @property
    def block_ok(self) -> bool:
        return self.block_residual < self.tol

    @property
    def transfer_ok(self) -> bool:
        return self.transfer_residual < self.tol

    @property
    def passed(self) -> bool:
        return self.block_ok and self.transfer_ok

    @property
    def consistent(self) -> bool:
        """Both statements hold or both fail, as the equivalence predicts."""
        return self.block_ok == self.transfer_ok

    def to_json(self) -> dict:
        return {
            "window": list(self.window),
            "block_residual": self.block_residual,
            "transfer_residual": self.transfer_residual,
            "tolerance": self.tol,
            "passed": self.passed,
        }


def verify_equivalence(
    schedule: CoefficientSchedule,
    f: Sequence[complex],
    g: Sequence[complex],
    z: complex,
    window: tuple[int, int],
    tol: float | None = None,
    normalize: bool = False,
) -> EquivalenceReport:
    """Check ℳ̃f = z g, ℒ̃g = f on rows ``lo..hi`` and the transfer recursion.

    ``f`` and ``g`` hold the values at indices ``lo-1 .. hi+1``.  Residuals
    are absolute sup norms; with ``normalize`` they are divided by
    max(1, sup |f|, sup |g|), which suits rapidly growing solutions.
    """
    z = _check_z(z)
    lo, hi = (int(v) for v in window)
    if hi < lo:
        raise ValueError("window too small")
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    need = hi - lo + 3
    if f.shape != (need,) or g.shape != (need,):
        raise ValueError(f"sequences must cover indices {lo - 1}..{hi + 1} ({need} values)")
    schedule.require(lo, hi + 1)
    tol = tolerance("quadrature") * 0.1 if tol is None else tol
    at = lambda seq, n: seq[n - lo + 1]

    # block equations: Θ_{m+1} acts on sites (m, m+1); rows lo..hi only
    Mf = np.zeros(need, dtype=complex)
    Lg = np.zeros(need, dtype=complex)
    for m in range(lo - 1, hi + 1):
        blk = theta(schedule.alpha_at(m + 1), schedule.rho_at(m + 1)).matrix
        i = m - lo + 1
        if m % 2:
            Mf[i : i + 2] += blk @ f[i : i + 2]
        else:
            Lg[i : i + 2] += blk @ g[i : i + 2]
    rows = slice(1, need - 1)
    block = max(np.max(np.abs(Mf[rows] - z * g[rows])), np.max(np.abs(Lg[rows] - f[rows])))

    transfer = 0.0
    for n in range(lo - 1, hi + 1):
        step = gz_transfer(schedule, n + 1, z) @ np.array([at(f, n), at(g, n)])
        transfer = max(transfer, float(np.max(np.abs(step - np.array([at(f, n + 1), at(g, n + 1)])))))
    scale = max(1.0, float(np.max(np.abs(f))), float(np.max(np.abs(g)))) if normalize else 1.0
    return EquivalenceReport((lo, hi), float(block) / scale, transfer / scale, tol)
