"""Coefficient schedules, measures on the unit circle and moment extraction."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

ALPHA_SLACK = 1e-12
PHASE_SLACK = 1e-14

BUILTINS = ("lebesgue", "geronimus_mu", "geronimus_nu")


def _rho_modulus(mod_alpha):
    # roundoff in |alpha|^2 must not leave a spurious rho ~ 1e-8 at a split point
    gap = 1.0 - np.asarray(mod_alpha, dtype=float) ** 2
    return np.where(gap > 1e-15, np.sqrt(np.clip(gap, 0.0, None)), 0.0)


def rho_from_alpha(alpha: complex, zeta: complex = 1.0) -> complex:
    """Complex partner of ``alpha``: modulus (1 - |alpha|^2)^(1/2), phase of ``zeta``."""
    if abs(alpha) > 1.0 + ALPHA_SLACK:
        raise ValueError(f"|alpha| = {abs(alpha):.3g} exceeds 1")
    if abs(abs(zeta) - 1.0) > PHASE_SLACK:
        raise ValueError(f"|zeta| = {abs(zeta):.17g} is not 1")
    return complex(float(_rho_modulus(abs(alpha))) * zeta)


@dataclass(frozen=True, eq=False)
class CoefficientSchedule:
    """Verblunsky coefficients and phases over the integer window ``[lo, hi]``.

    A schedule with ``lo == 0`` is a half-lattice schedule; index -1 then
    carries the fixed boundary value ``alpha_minus_one = -1`` with rho = 0.
    Extended schedules (``lo < 0``) store index -1 like any other index.
    """

    lo: int
    alpha: np.ndarray
    zeta: np.ndarray
    alpha_minus_one: complex = -1.0
    rho: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=complex).reshape(-1)
        zeta = np.array(self.zeta, dtype=complex).reshape(-1)
        if alpha.shape != zeta.shape:
            raise ValueError("alpha and zeta must have the same length")
        if alpha.size == 0:
            raise ValueError("schedule window is empty")
        if self.lo > 0:
            raise ValueError("schedule windows start at 0 (half-lattice) or below (extended)")
        if np.any(np.abs(alpha) > 1.0 + ALPHA_SLACK):
            bad = int(np.argmax(np.abs(alpha))) + self.lo
            raise ValueError(f"|alpha[{bad}]| exceeds 1")
        if np.any(np.abs(np.abs(zeta) - 1.0) > PHASE_SLACK):
            bad = int(np.argmax(np.abs(np.abs(zeta) - 1.0))) + self.lo
            raise ValueError(f"zeta[{bad}] is not unimodular")
        if self.lo == 0 and self.alpha_minus_one != -1.0:
            raise ValueError("half-lattice schedules fix alpha[-1] = -1")
        rho = _rho_modulus(np.abs(alpha)) * zeta
        alpha.setflags(write=False)
        zeta.setflags(write=False)
        rho.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alpha_minus_one", complex(self.alpha_minus_one))

    # window bookkeeping
    @property
    def hi(self) -> int:
        return self.lo + self.alpha.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def half_lattice(self) -> bool:
        return self.lo == 0

    def __len__(self) -> int:
        return self.alpha.size

    def covers(self, lo: int, hi: int) -> bool:
        first = -1 if self.half_lattice else self.lo
        return first <= lo and hi <= self.hi

    def _slot(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(f"index {n} outside schedule window [{self.lo}, {self.hi}]")
        return n - self.lo

    # coefficient access
    def alpha_at(self, n: int) -> complex:
        if n == -1 and self.half_lattice:
            return self.alpha_minus_one
        return complex(self.alpha[self._slot(n)])

    def zeta_at(self, n: int) -> complex:
        if n == -1 and self.half_lattice:
            return 1.0 + 0j
        return complex(self.zeta[self._slot(n)])

    def rho_at(self, n: int) -> complex:
        if n == -1 and self.half_lattice:
            return 0j
        return complex(self.rho[self._slot(n)])

    def split_points(self, tol: float = ALPHA_SLACK) -> list[int]:
        """Indices with unimodular alpha, where rho vanishes and zeta is unused."""
        idx = np.nonzero(np.abs(self.alpha) >= 1.0 - tol)[0]
        return [int(i) + self.lo for i in idx]

    # derived schedules
    def plain(self) -> "CoefficientSchedule":
        """Same coefficients with every phase set to 1."""
        return CoefficientSchedule(self.lo, self.alpha, np.ones_like(self.zeta), self.alpha_minus_one)

    def with_alpha(self, n: int, value: complex) -> "CoefficientSchedule":
        alpha = np.array(self.alpha)
        alpha[self._slot(n)] = value
        return CoefficientSchedule(self.lo, alpha, self.zeta, self.alpha_minus_one)

    def with_zeta(self, zeta: complex | Sequence[complex]) -> "CoefficientSchedule":
        zeta = np.broadcast_to(np.asarray(zeta, dtype=complex), self.alpha.shape)
        return CoefficientSchedule(self.lo, self.alpha, zeta, self.alpha_minus_one)

    def truncated(self, count: int) -> "CoefficientSchedule":
        """Half-lattice schedule restricted to indices ``0 .. count-1``."""
        if not self.half_lattice:
            raise ValueError("truncation applies to half-lattice schedules")
        if count > len(self):
            raise ValueError(f"schedule has {len(self)} coefficients, {count} requested")
        return CoefficientSchedule(0, self.alpha[:count], self.zeta[:count])

    def require(self, lo: int, hi: int) -> None:
        if not self.covers(lo, hi):
            raise ValueError(
                f"schedule window [{self.lo}, {self.hi}] does not cover indices [{lo}, {hi}]"
            )

    # constructors
    @classmethod
    def from_function(
        cls,
        alpha: Callable[[int], complex],
        lo: int,
        hi: int,
        zeta: complex | Callable[[int], complex] = 1.0,
    ) -> "CoefficientSchedule":
        idx = range(lo, hi + 1)
        a = [alpha(n) for n in idx]
        z = [zeta(n) for n in idx] if callable(zeta) else [zeta] * len(a)
        return cls(lo, np.array(a, dtype=complex), np.array(z, dtype=complex))

    @classmethod
    def free(cls, lo: int, hi: int, zeta: complex = 1.0) -> "CoefficientSchedule":
        return cls.from_function(lambda n: 0.0, lo, hi, zeta)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        lo: int,
        hi: int,
        radius: float = 0.95,
        phases: bool = True,
    ) -> "CoefficientSchedule":
        """Coefficients uniform in the disk of ``radius``, phases uniform on the circle."""
        size = hi - lo + 1
        r = radius * np.sqrt(rng.random(size))
        alpha = r * np.exp(2j * np.pi * rng.random(size))
        zeta = np.exp(2j * np.pi * rng.random(size)) if phases else np.ones(size)
        return cls(lo, alpha, zeta)

    # serialisation
    def to_json(self) -> dict:
        pairs = lambda arr: [[float(c.real), float(c.imag)] for c in arr]
        return {"window": [self.lo, self.hi], "alpha": pairs(self.alpha), "zeta": pairs(self.zeta)}

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientSchedule":
        lo, hi = (int(v) for v in data["window"])
        alpha = [complex(re, im) for re, im in data["alpha"]]
        if "zeta" in data:
            zeta = [complex(re, im) for re, im in data["zeta"]]
        else:
            zeta = [1.0] * len(alpha)
        if len(alpha) != hi - lo + 1 or len(zeta) != len(alpha):
            raise ValueError(f"window [{lo}, {hi}] does not match {len(alpha)} coefficients")
        return cls(lo, np.array(alpha), np.array(zeta))


def builtin_alpha(name: str) -> Callable[[int], float]:
    if name == "lebesgue":
        return lambda n: 0.0
    if name == "geronimus_mu":
        return lambda n: -1.0 / (n + 2)
    if name == "geronimus_nu":
        return lambda n: 1.0 / (n + 2)
    raise ValueError(f"unknown builtin measure {name!r}; choose from {', '.join(BUILTINS)}")


def builtin_schedule(name: str, count: int, zeta: complex = 1.0) -> CoefficientSchedule:
    """Closed-form half-lattice schedule ``alpha_0 .. alpha_{count-1}`` of a builtin."""
    if count < 1:
        raise ValueError("count must be positive")
    return CoefficientSchedule.from_function(builtin_alpha(name), 0, count - 1, zeta)


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """Probability measure on the unit circle.

    ``kind`` is ``"builtin"``, ``"density_grid"`` or ``"coefficient_defined"``.
    Grid densities are taken with respect to normalised arc length dθ/2π on
    a uniform periodic grid (endpoint excluded); finitely many point masses
    may be attached as ``(theta, weight)`` pairs.
    """

    kind: str
    name: str | None = None
    theta: np.ndarray | None = None
    density: np.ndarray | None = None
    point_masses: tuple[tuple[float, float], ...] = ()
    schedule: CoefficientSchedule | None = None

    @classmethod
    def builtin(cls, name: str) -> "MeasureSpec":
        builtin_alpha(name)
        masses = ((0.0, 0.5),) if name == "geronimus_nu" else ()
        return cls("builtin", name=name, point_masses=masses)

    @classmethod
    def density_grid(
        cls,
        theta: Iterable[float],
        density: Iterable[float],
        point_masses: Iterable[tuple[float, float]] = (),
    ) -> "MeasureSpec":
        theta = np.asarray(list(theta), dtype=float)
        density = np.asarray(list(density), dtype=float)
        masses = tuple((float(t), float(w)) for t, w in point_masses)
        _check_grid(theta, density, masses)
        theta.setflags(write=False)
        density.setflags(write=False)
        return cls("density_grid", theta=theta, density=density, point_masses=masses)

    @classmethod
    def coefficient_defined(cls, schedule: CoefficientSchedule) -> "MeasureSpec":
        if not schedule.half_lattice:
            raise ValueError("a measure is determined by a half-lattice schedule")
        if schedule.split_points():
            raise ValueError("coefficient-defined measures need |alpha_n| < 1")
        return cls("coefficient_defined", schedule=schedule)

    @property
    def label(self) -> str:
        if self.kind == "builtin":
            return str(self.name)
        return self.kind

    def density_on(self, nodes: int) -> tuple[np.ndarray, np.ndarray]:
        """Uniform grid and density values (w.r.t. dθ/2π) of the absolutely continuous part."""
        if self.kind == "density_grid":
            return np.asarray(self.theta), np.asarray(self.density)
        if self.kind != "builtin":
            raise ValueError("coefficient-defined measures have no sampled density")
        theta = -np.pi + 2.0 * np.pi * np.arange(nodes) / nodes
        if self.name == "lebesgue":
            w = np.ones(nodes)
        elif self.name == "geronimus_mu":
            w = 1.0 - np.cos(theta)
        else:
            w = np.full(nodes, 0.5)
        return theta, w

    def quadrature(self, nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Nodes on the circle and weights summing to 1 (trapezoid plus point masses)."""
        theta, w = self.density_on(nodes or 512)
        xi = np.exp(1j * theta)
        weights = w / w.size
        if self.point_masses:
            xi = np.concatenate([xi, [cmath.exp(1j * t) for t, _ in self.point_masses]])
            weights = np.concatenate([weights, [m for _, m in self.point_masses]])
        return xi, weights


def _check_grid(theta: np.ndarray, density: np.ndarray, masses: tuple) -> None:
    if theta.ndim != 1 or theta.shape != density.shape or theta.size < 4:
        raise ValueError("theta and density must be equal-length 1-D arrays (at least 4 samples)")
    if np.any(density < 0) or any(w < 0 for _, w in masses):
        raise ValueError("density and point masses must be nonnegative")
    step = 2.0 * np.pi / theta.size
    if np.max(np.abs(np.diff(theta) - step)) > 1e-9:
        raise ValueError("theta must be a uniform periodic grid with spacing 2*pi/len(theta)")
    total = float(np.mean(density)) + sum(w for _, w in masses)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"measure is not normalised: total mass {total!r}")


def default_nodes(max_order: int) -> int:
    return max(512, 8 * max_order)


def moments(measure: MeasureSpec, max_order: int, nodes: int | None = None) -> np.ndarray:
    """Moments ``m_k = ∫ ξ^k dμ`` for ``k = -max_order .. max_order``.

    Entry ``max_order + k`` of the result holds ``m_k``.
    """
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    if measure.kind == "coefficient_defined":
        pos = _moments_from_schedule(measure.schedule, max_order)
    else:
        if measure.kind == "density_grid":
            nodes = measure.theta.size
        elif nodes is None:
            nodes = default_nodes(max_order)
        if nodes < 4 * max_order:
            raise ValueError(f"{nodes} nodes are too few for moments up to order {max_order}")
        xi, w = measure.quadrature(nodes)
        pos = np.array([np.sum(w * xi**k) for k in range(max_order + 1)], dtype=complex)
        total = pos[0].real
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"measure is not normalised: total mass {total!r}")
        pos[0] = 1.0
    return np.concatenate([np.conj(pos[:0:-1]), pos])


def _moments_from_schedule(schedule: CoefficientSchedule, max_order: int) -> np.ndarray:
    # monic Φ_n ⟂ 1 for n >= 1 determines m_n from lower moments
    if max_order > len(schedule):
        raise ValueError(f"schedule has {len(schedule)} coefficients, moments up to {max_order} need more")
    pos = np.zeros(max_order + 1, dtype=complex)
    pos[0] = 1.0
    phi = np.array([1.0 + 0j])
    phi_star = np.array([1.0 + 0j])
    for n in range(1, max_order + 1):
        a = schedule.alpha_at(n - 1)
        zphi = np.concatenate([[0.0], phi])
        padded = np.concatenate([phi_star, [0.0]])
        phi, phi_star = zphi - np.conj(a) * padded, padded - a * zphi
        # ⟨1, Φ_n⟩ = Σ_j c_j m_j = 0
        pos[n] = -np.dot(phi[:n], pos[:n])
    return pos


def toeplitz_gram(mom: np.ndarray, size: int) -> np.ndarray:
    """Gram matrix ``G[j, k] = ⟨z^j, z^k⟩ = m_{k-j}`` from a centred moment vector."""
    centre = (mom.size - 1) // 2
    if size - 1 > centre:
        raise ValueError(f"moments up to order {size - 1} required, have {centre}")
    j = np.arange(size)
    return mom[centre + j[None, :] - j[:, None]]


def verblunsky_from_measure(
    measure: MeasureSpec, count: int, nodes: int | None = None
) -> np.ndarray:
    """Recover ``alpha_0 .. alpha_{count-1}`` as ``-conj(Φ_{n+1}(0))``.

    Each monic Φ_{n+1} comes from the Toeplitz system expressing its
    orthogonality to ``1, z, .., z^n``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if measure.kind == "coefficient_defined":
        return np.array(measure.schedule.alpha[:count])
    gram = toeplitz_gram(moments(measure, count, nodes), count + 1)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ValueError("Gram matrix of monomials is singular for this measure") from None
    if np.min(np.abs(np.diag(chol))) ** 2 < 1e-13:
        raise ValueError("Gram matrix of monomials is numerically singular for this measure")
    out = np.empty(count, dtype=complex)
    for n in range(count):
        coeffs = np.linalg.solve(gram[: n + 1, : n + 1], -gram[: n + 1, n + 1])
        out[n] = -np.conj(coeffs[0])
    if np.any(np.abs(out) >= 1.0):
        raise ValueError("extracted coefficients left the unit disk; measure nearly degenerate")
    return out
