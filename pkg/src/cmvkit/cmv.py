"""Θ-blocks, ℒℳ factors and (rotated, extended) CMV matrices on finite windows.

Index conventions: block Θ_m couples sites ``m`` and ``m + 1``; even blocks
make up ℒ and odd blocks make up ℳ.  With the half-lattice boundary value
α_{-1} = -1 the block Θ_{-1} contributes the leading ``1`` of ℳ, so the
half-lattice matrices are the restriction of the extended ones to ``k >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSchedule
from .tolerances import ToleranceBreach, tolerance

BOUNDARIES = ("half_lattice_closed", "principal_truncation", "periodic_closed")
UNITARY_BOUNDARIES = ("half_lattice_closed", "periodic_closed")
SHAPES = ("standard", "alternate")


@dataclass(frozen=True)
class ThetaBlock:
    alpha: complex
    rho: complex

    def __post_init__(self) -> None:
        norm = abs(self.alpha) ** 2 + abs(self.rho) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |rho|^2 = {norm!r}, expected 1")

    @property
    def matrix(self) -> np.ndarray:
        a, r = self.alpha, self.rho
        return np.array([[np.conj(a), r], [np.conj(r), -a]], dtype=complex)


def theta(alpha: complex, rho: complex) -> ThetaBlock:
    return ThetaBlock(complex(alpha), complex(rho))


@dataclass(frozen=True, eq=False)
class BandedUnitary:
    """Dense storage of a banded matrix indexed by ``lo .. hi``."""

    lo: int
    hi: int
    matrix: np.ndarray
    boundary: str
    variant: str

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        n = self.hi - self.lo + 1
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match window [{self.lo}, {self.hi}]")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        k = np.arange(n)
        dist = np.abs(k[:, None] - k[None, :])
        if self.boundary == "periodic_closed":
            dist = np.minimum(dist, n - dist)
        if np.any(m[dist > 2] != 0):
            raise ValueError("entries outside the five-diagonal band")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def entry(self, k: int, l: int) -> complex:
        if not (self.lo <= k <= self.hi and self.lo <= l <= self.hi):
            raise IndexError(f"({k}, {l}) outside window [{self.lo}, {self.hi}]")
        return complex(self.matrix[k - self.lo, l - self.lo])

    def block(self, lo: int, hi: int) -> np.ndarray:
        return self.matrix[lo - self.lo : hi - self.lo + 1, lo - self.lo : hi - self.lo + 1]

    def unitarity_defect(self) -> float:
        """Frobenius norm of ``A A* - I``."""
        m = self.matrix
        return float(np.linalg.norm(m @ m.conj().T - np.eye(self.size)))

    @property
    def unitary_mode(self) -> bool:
        return self.boundary in UNITARY_BOUNDARIES

    def to_json(self) -> dict:
        rows, cols = np.nonzero(self.matrix)
        entries = [
            [int(r) + self.lo, int(c) + self.lo, float(self.matrix[r, c].real), float(self.matrix[r, c].imag)]
            for r, c in zip(rows, cols)
        ]
        return {"window": [self.lo, self.hi], "variant": self.variant, "boundary": self.boundary, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "BandedUnitary":
        lo, hi = (int(v) for v in data["window"])
        m = np.zeros((hi - lo + 1, hi - lo + 1), dtype=complex)
        for k, l, re, im in data["entries"]:
            m[int(k) - lo, int(l) - lo] = complex(re, im)
        return cls(lo, hi, m, data["boundary"], data["variant"])


class _View:
    """Coefficient lookup for one window and boundary mode.

    Closed modes replace the coefficients of the two boundary blocks by a
    unimodular value (the half-lattice value α_{-1} = -1 is kept as is).
    Principal truncation reads the schedule on ``[lo - 1, hi]``; other
    indices only feed rows and columns that are cropped away.
    """

    def __init__(self, schedule, lo, hi, rotated, boundary, closure=-1.0):
        if boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary mode {boundary!r}; choose from {', '.join(BOUNDARIES)}")
        if hi < lo:
            raise ValueError("empty window")
        if abs(abs(closure) - 1.0) > 1e-12:
            raise ValueError("closure value must be unimodular")
        self.s = schedule
        self.lo, self.hi = lo, hi
        self.n = hi - lo + 1
        self.rotated = rotated
        self.boundary = boundary
        self.closure = complex(closure)
        if boundary == "periodic_closed":
            if self.n % 2:
                raise ValueError("periodic_closed needs an even window length")
            schedule.require(lo, hi)
        elif boundary == "half_lattice_closed":
            schedule.require(lo, hi - 1) if hi > lo else None
        else:
            schedule.require(lo - 1, hi)

    def _fold(self, m: int) -> int:
        return self.lo + (m - self.lo) % self.n

    def pair(self, m: int) -> tuple[complex, complex]:
        if self.boundary == "periodic_closed":
            m = self._fold(m)
        elif self.boundary == "half_lattice_closed":
            if m == self.hi:
                return self.closure, 0j
            if m == self.lo - 1:
                if m == -1 and self.s.half_lattice:
                    return self.s.alpha_at(-1), 0j
                return self.closure, 0j
        if not self.s.covers(m, m):
            # only reached for padding blocks whose entries are cropped
            return 0j, 1.0 + 0j
        a = self.s.alpha_at(m)
        r = self.s.rho_at(m)
        return a, (r if self.rotated else complex(abs(r)))

    def a(self, m: int) -> complex:
        return self.pair(m)[0]

    def r(self, m: int) -> complex:
        return self.pair(m)[1]


def _factor(view: _View, lo: int, hi: int, parity: int, wrap: bool) -> np.ndarray:
    n = hi - lo + 1
    out = np.zeros((n, n), dtype=complex)
    for m in range(lo if wrap else lo - 1, hi + 1):
        if m % 2 != parity:
            continue
        a, r = view.pair(m)
        blk = theta(a, r).matrix
        sites = (m, m + 1)
        if wrap and m == hi:
            sites = (hi, lo)
        for i, k in enumerate(sites):
            for j, l in enumerate(sites):
                if lo <= k <= hi and lo <= l <= hi:
                    out[k - lo, l - lo] += blk[i, j]
    return out


def _tag(schedule: CoefficientSchedule, lo: int, boundary: str, base: str, rotated: bool) -> str:
    family = "C" if schedule.half_lattice and lo >= 0 and boundary != "periodic_closed" else "E"
    tag = family + ("_alt" if base == "alternate" else "")
    return tag + ("_rot" if rotated else "")


def _default_window(schedule: CoefficientSchedule, window, boundary: str) -> tuple[int, int]:
    if window is not None:
        lo, hi = (int(v) for v in window)
        if hi < lo:
            raise ValueError("window must satisfy lo <= hi")
        return lo, hi
    lo, hi = schedule.window
    if boundary == "principal_truncation" and not schedule.half_lattice:
        lo += 1
    return lo, hi


def build_LM(
    schedule: CoefficientSchedule,
    window=None,
    rotated: bool = True,
    boundary: str = "half_lattice_closed",
    closure: complex = -1.0,
) -> tuple[BandedUnitary, BandedUnitary]:
    """ℒ = ⊕ Θ_{2k} and ℳ = ⊕ Θ_{2k-1} restricted to ``window``."""
    lo, hi = _default_window(schedule, window, boundary)
    view = _View(schedule, lo, hi, rotated, boundary, closure)
    wrap = boundary == "periodic_closed"
    suffix = "_rot" if rotated else ""
    L = BandedUnitary(lo, hi, _factor(view, lo, hi, 0, wrap), boundary, "L" + suffix)
    M = BandedUnitary(lo, hi, _factor(view, lo, hi, 1, wrap), boundary, "M" + suffix)
    return L, M


def _entry(a, r, k: int, l: int, alternate: bool) -> complex:
    """Closed-form entry of the infinite (rotated) CMV matrix from lookups ``a(n)``, ``r(n)``."""
    c = np.conj
    if alternate:
        if k % 2 == 0:
            n = k // 2
            table = {
                2 * n - 2: lambda: c(r(2 * n - 2) * r(2 * n - 1)),
                2 * n - 1: lambda: -a(2 * n - 2) * c(r(2 * n - 1)),
                2 * n: lambda: -c(a(2 * n)) * a(2 * n - 1),
                2 * n + 1: lambda: -a(2 * n - 1) * r(2 * n),
            }
        else:
            n = (k + 1) // 2
            table = {
                2 * n - 2: lambda: c(a(2 * n - 1) * r(2 * n - 2)),
                2 * n - 1: lambda: -c(a(2 * n - 1)) * a(2 * n - 2),
                2 * n: lambda: c(a(2 * n)) * r(2 * n - 1),
                2 * n + 1: lambda: r(2 * n) * r(2 * n - 1),
            }
        fn = table.get(l)
    else:
        if l % 2 == 0:
            n = l // 2
            table = {
                2 * n - 2: lambda: r(2 * n - 2) * r(2 * n - 1),
                2 * n - 1: lambda: -a(2 * n - 2) * r(2 * n - 1),
                2 * n: lambda: -c(a(2 * n)) * a(2 * n - 1),
                2 * n + 1: lambda: -a(2 * n - 1) * c(r(2 * n)),
            }
        else:
            n = (l + 1) // 2
            table = {
                2 * n - 2: lambda: c(a(2 * n - 1)) * r(2 * n - 2),
                2 * n - 1: lambda: -c(a(2 * n - 1)) * a(2 * n - 2),
                2 * n: lambda: c(a(2 * n)) * c(r(2 * n - 1)),
                2 * n + 1: lambda: c(r(2 * n) * r(2 * n - 1)),
            }
        fn = table.get(k)
    return complex(fn()) if fn is not None else 0j


def _shape(variant: str) -> bool:
    if variant not in SHAPES:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(SHAPES)}")
    return variant == "alternate"


def cmv_entry_direct(
    schedule: CoefficientSchedule, k: int, l: int, variant: str = "standard", rotated: bool = True
) -> complex:
    """Entry ``(k, l)`` of the infinite CMV matrix straight from the closed-form table."""
    alternate = _shape(variant)
    if abs(k - l) > 2:
        return 0j
    lo = min(k, l)
    if schedule.half_lattice and lo < 0:
        raise ValueError("half-lattice matrices are indexed from 0")
    schedule.require(lo - 1, max(k, l))

    def a(m):
        return schedule.alpha_at(m)

    def r(m):
        rho = schedule.rho_at(m)
        return rho if rotated else complex(abs(rho))

    return _entry(a, r, k, l, alternate)


def _matrix_from_entries(view: _View, lo: int, hi: int, alternate: bool) -> np.ndarray:
    n = hi - lo + 1
    out = np.zeros((n, n), dtype=complex)
    periodic = view.boundary == "periodic_closed"
    for k in range(lo, hi + 1):
        for l in range(lo, hi + 1):
            if periodic:
                # fold the N-periodic infinite matrix onto the window
                val = 0j
                for j in range(-3, 4):
                    ll = l + j * n
                    if abs(k - ll) <= 2:
                        val += _entry(view.a, view.r, k, ll, alternate)
                out[k - lo, l - lo] = val
            elif abs(k - l) <= 2:
                out[k - lo, l - lo] = _entry(view.a, view.r, k, l, alternate)
    return out


def build_cmv(
    schedule: CoefficientSchedule,
    window=None,
    variant: str = "standard",
    rotated: bool = False,
    boundary: str = "half_lattice_closed",
    closure: complex = -1.0,
) -> BandedUnitary:
    """(Alternate) CMV matrix on ``window`` assembled from the closed-form entries.

    ``principal_truncation`` is the top-left corner of the infinite matrix;
    ``half_lattice_closed`` replaces the last coefficient by ``closure``.
    """
    alternate = _shape(variant)
    lo, hi = _default_window(schedule, window, boundary)
    view = _View(schedule, lo, hi, rotated, boundary, closure)
    matrix = _matrix_from_entries(view, lo, hi, alternate)
    return BandedUnitary(lo, hi, matrix, boundary, _tag(schedule, lo, boundary, variant, rotated))


def build_extended(
    schedule: CoefficientSchedule,
    window=None,
    rotated: bool = True,
    variant: str = "standard",
    boundary: str = "half_lattice_closed",
    closure: complex = -1.0,
) -> BandedUnitary:
    """Extended operator ℰ (``standard``) or ℰ̃ (``alternate``) on a window containing 0."""
    lo, hi = _default_window(schedule, window, boundary)
    if not lo <= 0 <= hi:
        raise ValueError(f"extended window [{lo}, {hi}] must contain 0")
    return build_cmv(schedule, (lo, hi), variant, rotated, boundary, closure)


def factor_product(
    schedule: CoefficientSchedule,
    window=None,
    variant: str = "standard",
    rotated: bool = True,
    boundary: str = "half_lattice_closed",
    closure: complex = -1.0,
) -> np.ndarray:
    """ℒℳ (or ℳℒ for ``alternate``) restricted to the window, independent of the entry table."""
    alternate = _shape(variant)
    lo, hi = _default_window(schedule, window, boundary)
    if boundary == "principal_truncation":
        # pad by one site so the cropped product is exact
        view = _View(schedule, lo, hi, rotated, boundary, closure)
        L = _factor(view, lo - 1, hi + 1, 0, False)
        M = _factor(view, lo - 1, hi + 1, 1, False)
        prod = M @ L if alternate else L @ M
        return prod[1:-1, 1:-1]
    L, M = build_LM(schedule, (lo, hi), rotated, boundary, closure)
    return M.matrix @ L.matrix if alternate else L.matrix @ M.matrix


def factorization_residual(schedule: CoefficientSchedule, window=None, rotated: bool = True,
                           boundary: str = "half_lattice_closed") -> dict[str, float]:
    """Frobenius residuals of 𝒞 - ℒℳ and 𝒞̃ - ℳℒ."""
    out = {}
    for variant in SHAPES:
        built = build_cmv(schedule, window, variant, rotated, boundary)
        prod = factor_product(schedule, window, variant, rotated, boundary)
        out[variant] = float(np.linalg.norm(built.matrix - prod))
    return out


@dataclass(frozen=True, eq=False)
class Conjugators:
    """Diagonals of R, R̃ and Q = R̃² on a window.

    ``r`` is only defined for windows inside the half-lattice.
    """

    lo: int
    hi: int
    r: np.ndarray | None
    r_tilde: np.ndarray
    q: np.ndarray

    def as_tuple(self):
        return self.r, self.r_tilde, self.q


def conjugators(schedule: CoefficientSchedule, window=None) -> Conjugators:
    """R = diag(1, ζ_0, ζ_0ζ_1, ..), extended to negative sites by inverse phases."""
    lo, hi = (schedule.window if window is None else (int(window[0]), int(window[1])))
    diag = np.empty(hi - lo + 1, dtype=complex)
    for k in range(lo, hi + 1):
        if k >= 0:
            phases = [schedule.zeta_at(j) for j in range(0, k)]
            val = np.prod(phases) if phases else 1.0
        else:
            val = np.prod([np.conj(schedule.zeta_at(j)) for j in range(k, 0)])
        if abs(abs(val) - 1.0) > 1e-12:
            raise ValueError(f"phase product at site {k} is not unimodular")
        diag[k - lo] = val
    r = diag if lo >= 0 else None
    return Conjugators(lo, hi, r, diag, diag**2)


def conjugate(diag: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """``D A D^{-1}`` for ``D = diag(diag)``."""
    return diag[:, None] * matrix / diag[None, :]


def conjugation_residuals(schedule: CoefficientSchedule, window=None,
                          boundary: str = "half_lattice_closed") -> dict[str, float]:
    """Residuals of R𝒞∠R⁻¹ = 𝒞(α,|ρ|), R𝒞̃∠R⁻¹ = 𝒞̃(α,|ρ|) and Q𝒞̃∠Q⁻¹ = (𝒞∠)ᵀ."""
    rot = build_cmv(schedule, window, "standard", True, boundary)
    alt = build_cmv(schedule, window, "alternate", True, boundary)
    std = build_cmv(schedule, window, "standard", False, boundary)
    std_alt = build_cmv(schedule, window, "alternate", False, boundary)
    conj = conjugators(schedule, rot.window)
    d = conj.r_tilde
    return {
        "R_standard": float(np.linalg.norm(conjugate(d, rot.matrix) - std.matrix)),
        "R_alternate": float(np.linalg.norm(conjugate(d, alt.matrix) - std_alt.matrix)),
        "Q_transpose": float(np.linalg.norm(conjugate(conj.q, alt.matrix) - rot.matrix.T)),
    }


def _require_split(schedule: CoefficientSchedule, K: int) -> CoefficientSchedule:
    a = schedule.alpha_at(K)
    if abs(abs(a) - 1.0) > 1e-12:
        raise ValueError(f"|alpha_{K}| = {abs(a):.6g}: no split at {K}")
    if K == -1 and schedule.half_lattice:
        return schedule
    return schedule.with_alpha(K, a / abs(a))


def split_at(
    schedule: CoefficientSchedule,
    K: int,
    window=None,
    rotated: bool = True,
    boundary: str = "half_lattice_closed",
) -> tuple[BandedUnitary, BandedUnitary]:
    """Blocks of ℰ∠ on ``[lo, K]`` and ``[K+1, hi]`` when |α_K| = 1.

    Raises if any coupling across K survives.
    """
    schedule = _require_split(schedule, K)
    full = build_cmv(schedule, window, "standard", rotated, boundary)
    lo, hi = full.window
    if not lo <= K < hi:
        raise ValueError(f"split index {K} must lie in [{lo}, {hi - 1}]")
    left_n = K - lo + 1
    m = full.matrix
    leak = max(np.max(np.abs(m[:left_n, left_n:])), np.max(np.abs(m[left_n:, :left_n])))
    if leak != 0:
        raise ToleranceBreach("split decoupling", float(leak), 0.0)
    tag = full.variant
    left = BandedUnitary(lo, K, m[:left_n, :left_n], boundary, tag)
    right = BandedUnitary(K + 1, hi, m[left_n:, left_n:], boundary, tag)
    return left, right


def split_factors(
    schedule: CoefficientSchedule,
    K: int,
    window=None,
    rotated: bool = True,
    boundary: str = "half_lattice_closed",
) -> dict[str, BandedUnitary]:
    """ℒ and ℳ restricted to the two sides of a split: keys ``L-``, ``M-``, ``L+``, ``M+``.

    Θ_K is diagonal at a split, so the left factor ending at K ends with
    the 1×1 block conj(α_K) and the right one starts with -α_K.
    """
    schedule = _require_split(schedule, K)
    L, M = build_LM(schedule, window, rotated, boundary)
    lo, hi = L.window
    if not lo <= K < hi:
        raise ValueError(f"split index {K} must lie in [{lo}, {hi - 1}]")
    out = {}
    for name, fac in (("L", L), ("M", M)):
        out[name + "-"] = BandedUnitary(lo, K, fac.block(lo, K), boundary, fac.variant)
        out[name + "+"] = BandedUnitary(K + 1, hi, fac.block(K + 1, hi), boundary, fac.variant)
    return out


def apply(matrix: BandedUnitary, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (matrix.size,):
        raise ValueError(f"vector of length {v.shape} does not match window size {matrix.size}")
    return matrix.matrix @ v


def evolve(matrix: BandedUnitary, v, steps: int, return_states: bool = False, tol: float | None = None):
    """Probabilities ``|v_t|²`` for ``t = 0 .. steps`` under repeated application.

    For unitary boundary modes the norm is checked after every step.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    v = np.asarray(v, dtype=complex)
    if v.shape != (matrix.size,):
        raise ValueError(f"vector of length {v.shape} does not match window size {matrix.size}")
    tol = tolerance("quadrature") if tol is None else tol
    norm0 = float(np.linalg.norm(v))
    states = np.empty((steps + 1, matrix.size), dtype=complex)
    states[0] = v
    for t in range(1, steps + 1):
        v = matrix.matrix @ v
        states[t] = v
        if matrix.unitary_mode:
            drift = abs(float(np.linalg.norm(v)) - norm0)
            if drift > tol * max(1.0, norm0):
                raise ToleranceBreach(f"norm preservation at step {t}", drift, tol)
    probs = np.abs(states) ** 2
    return (probs, states) if return_states else probs


def walk_operator(schedule: CoefficientSchedule, window=None, rotated: bool = True,
                  boundary: str = "periodic_closed") -> BandedUnitary:
    """Split-step walk operator: the rotated extended matrix, periodic by default."""
    lo, hi = _default_window(schedule, window, boundary)
    return build_cmv(schedule, (lo, hi), "standard", rotated, boundary)
