"""Orthogonal polynomials on the unit circle: standard, rotated and second kind."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coefficients import CoefficientSchedule, toeplitz_gram

VARIANTS = ("standard", "rotated", "second_kind", "rotated_second_kind")
CD_VARIANTS = ("standard", "rotated", "mixed", "rotated_mixed")


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    """Dense complex polynomial; ``coeffs[j]`` multiplies ``z**j``."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient (0 for the zero polynomial)."""
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, z):
        # Horner
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc[()] if acc.ndim == 0 else acc

    def padded(self, length: int) -> np.ndarray:
        if length < self.coeffs.size:
            tail = self.coeffs[length:]
            if np.any(tail != 0):
                raise ValueError("padding would drop nonzero coefficients")
            return np.array(self.coeffs[:length])
        return np.concatenate([self.coeffs, np.zeros(length - self.coeffs.size, dtype=complex)])

    def shift(self) -> "ComplexPoly":
        """Multiply by z."""
        return ComplexPoly(np.concatenate([[0.0], self.coeffs]))

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        size = max(self.coeffs.size, other.coeffs.size)
        return ComplexPoly(self.padded(size) + other.padded(size))

    def __sub__(self, other: "ComplexPoly") -> "ComplexPoly":
        return self + other * -1.0

    def __mul__(self, scalar: complex) -> "ComplexPoly":
        return ComplexPoly(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def to_json(self, degree: int | None = None) -> dict:
        n = self.degree if degree is None else degree
        c = self.padded(n + 1)
        return {"degree": n, "coeffs": [[float(v.real), float(v.imag)] for v in c]}

    @classmethod
    def from_json(cls, data: dict) -> "ComplexPoly":
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        if len(coeffs) != int(data["degree"]) + 1:
            raise ValueError("coefficient count does not match degree")
        return cls(np.array(coeffs))


@dataclass(frozen=True, eq=False)
class PolyPair:
    """A polynomial of formal degree ``n`` and its reverse.

    ``p_star`` is always the true reverse (rotated reverse for rotated
    kinds).  For second-kind pairs the difference-equation vector is
    ``(p, -p_star)``; see :meth:`vector`.
    """

    p: ComplexPoly
    p_star: ComplexPoly
    n: int
    kind: str = "standard"

    @property
    def sign(self) -> float:
        return -1.0 if self.kind.endswith("second_kind") else 1.0

    def __call__(self, z) -> tuple:
        return self.p(z), self.p_star(z)

    def vector(self, z) -> tuple:
        """``(p(z), ±p_star(z))`` with the sign used by the Szegő difference equation."""
        return self.p(z), self.sign * self.p_star(z)


def reverse(p: ComplexPoly, n: int) -> ComplexPoly:
    """Reverse ``p*(z) = z^n conj(p(1/conj z))``: coefficient j is conj(c_{n-j})."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if p.degree > n:
        raise ValueError(f"degree {p.degree} exceeds n = {n}")
    return ComplexPoly(np.conj(p.padded(n + 1))[::-1])


def _phase(zetas: Sequence[complex], n: int) -> complex:
    if len(zetas) < n:
        raise ValueError(f"{n} phases required, got {len(zetas)}")
    return complex(np.prod(np.asarray(zetas[:n], dtype=complex)))


def rotated_reverse(p: ComplexPoly, n: int, zetas: Sequence[complex]) -> ComplexPoly:
    """``(Π_{j<n} ζ_j²) · reverse(p, n)``."""
    return _phase(zetas, n) ** 2 * reverse(p, n)


def _check_variant(variant: str) -> tuple[bool, float]:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    return variant.startswith("rotated"), (-1.0 if variant.endswith("second_kind") else 1.0)


def _rho(alpha: complex, zeta: complex, rotated: bool) -> complex:
    a2 = abs(alpha) ** 2
    if a2 >= 1.0:
        raise ValueError("|alpha| = 1: recursion denominator vanishes (split the operator instead)")
    mod = np.sqrt(1.0 - a2)
    return complex(mod * zeta) if rotated else complex(mod)


def szego_forward(pair: PolyPair, alpha: complex, zeta: complex = 1.0, variant: str = "standard") -> PolyPair:
    """One forward Szegő step from index ``n`` to ``n + 1``.

    Rotated variants divide by conj(ρ_n); second-kind variants use -α.
    """
    rotated, sign = _check_variant(variant)
    a = sign * complex(alpha)
    rho = _rho(a, zeta, rotated)
    denom = np.conj(rho) if rotated else rho
    n = pair.n + 1
    zp = pair.p.padded(n).tolist()
    zp = np.array([0.0] + zp, dtype=complex)
    ps = pair.p_star.padded(n + 1)
    p = (zp - np.conj(a) * ps) / denom
    p_star = (ps - a * zp) / denom
    return PolyPair(ComplexPoly(p), ComplexPoly(p_star), n, variant)


def szego_backward(pair: PolyPair, alpha: complex, zeta: complex = 1.0, variant: str = "standard") -> PolyPair:
    """Inverse of :func:`szego_forward` (rotated variants divide by ρ_n itself).

    The recursion produces z·p_n; its constant term must vanish and is dropped.
    """
    rotated, sign = _check_variant(variant)
    if pair.n < 1:
        raise ValueError("cannot step below index 0")
    a = sign * complex(alpha)
    rho = _rho(a, zeta, rotated)
    n = pair.n
    p1 = pair.p.padded(n + 1)
    s1 = pair.p_star.padded(n + 1)
    zp = (p1 + np.conj(a) * s1) / rho
    ps = (s1 + a * p1) / rho
    scale = max(1.0, float(np.max(np.abs(zp))))
    if abs(zp[0]) > 1e-12 * scale:
        raise ValueError(f"z·p has nonzero constant term {zp[0]!r}; pair is not a Szegő pair")
    if abs(ps[-1]) > 1e-12 * scale:
        raise ValueError("reverse component has degree n + 1 after the backward step")
    return PolyPair(ComplexPoly(zp[1:]), ComplexPoly(ps[:-1]), n - 1, variant)


def initial_pair(variant: str = "standard") -> PolyPair:
    _check_variant(variant)
    one = ComplexPoly(np.ones(1))
    return PolyPair(one, one, 0, variant)


def opuc_sequence(schedule: CoefficientSchedule, count: int, variant: str = "standard") -> list[PolyPair]:
    """Pairs of indices ``0 .. count``; rotated pairs use the schedule's phases."""
    rotated, _ = _check_variant(variant)
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count > 0:
        schedule.require(0, count - 1)
    pair = initial_pair(variant)
    out = [pair]
    for n in range(count):
        zeta = schedule.zeta_at(n) if rotated else 1.0
        pair = szego_forward(pair, schedule.alpha_at(n), zeta, variant)
        out.append(pair)
    return out


def second_kind_sequence(schedule: CoefficientSchedule, count: int, rotated: bool = False) -> list[PolyPair]:
    return opuc_sequence(schedule, count, "rotated_second_kind" if rotated else "second_kind")


def monic_norm(schedule: CoefficientSchedule, n: int) -> float:
    """``‖Φ_n‖ = Π_{j<n} (1 - |α_j|²)^{1/2}``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    schedule.require(0, n - 1)
    return float(np.prod(np.abs(schedule.rho[:n])))


def _values(schedule: CoefficientSchedule, count: int, z: complex, variant: str) -> np.ndarray:
    """``[[p_k(z), p_k*(z)] for k = 0..count]`` via the scalar recursion."""
    rotated, sign = _check_variant(variant)
    out = np.empty((count + 1, 2), dtype=complex)
    p = q = 1.0 + 0j
    out[0] = p, q
    for k in range(count):
        a = sign * schedule.alpha_at(k)
        rho = _rho(a, schedule.zeta_at(k) if rotated else 1.0, rotated)
        d = np.conj(rho) if rotated else rho
        p, q = (z * p - np.conj(a) * q) / d, (q - a * z * p) / d
        out[k + 1] = p, q
    return out


def cd_kernel(
    schedule: CoefficientSchedule, n: int, xi: complex, z: complex, variant: str = "standard"
) -> tuple[complex, complex]:
    """Both sides of the (mixed) Christoffel–Darboux identity.

    ``standard``: Σ_{k≤n} conj(φ_k(ξ)) φ_k(z) against
    [conj(φ*_{n+1}(ξ)) φ*_{n+1}(z) - conj(φ_{n+1}(ξ)) φ_{n+1}(z)] / (1 - conj(ξ) z).
    ``mixed``: Σ conj(φ_k(ξ)) ψ_k(z) against
    [2 - conj(φ*_{n+1}(ξ)) ψ*_{n+1}(z) - conj(φ_{n+1}(ξ)) ψ_{n+1}(z)] / (1 - conj(ξ) z).
    Rotated variants use the rotated families throughout.
    """
    if variant not in CD_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(CD_VARIANTS)}")
    denom = 1.0 - np.conj(xi) * z
    if abs(denom) < 1e-14:
        raise ValueError("conj(xi)*z = 1: Christoffel-Darboux denominator vanishes")
    rotated = variant.startswith("rotated")
    mixed = variant.endswith("mixed")
    first = "rotated" if rotated else "standard"
    second = ("rotated_second_kind" if rotated else "second_kind") if mixed else first
    a = _values(schedule, n + 1, xi, first)
    b = _values(schedule, n + 1, z, second)
    total = complex(np.sum(np.conj(a[: n + 1, 0]) * b[: n + 1, 0]))
    head = 2.0 if mixed else 0.0
    sign = -1.0 if mixed else 1.0
    closed = (head + sign * np.conj(a[n + 1, 1]) * b[n + 1, 1] - np.conj(a[n + 1, 0]) * b[n + 1, 0]) / denom
    return total, complex(closed)


def pairing_identity(
    schedule: CoefficientSchedule, n: int, z: complex, rotated: bool = False
) -> tuple[complex, complex]:
    """``ψ_n* φ_n + φ_n* ψ_n`` and ``2 z^n`` (times Π ζ_j² when rotated)."""
    first = "rotated" if rotated else "standard"
    second = "rotated_second_kind" if rotated else "second_kind"
    phi = _values(schedule, n, z, first)[n]
    psi = _values(schedule, n, z, second)[n]
    lhs = psi[1] * phi[0] + phi[1] * psi[0]
    rhs = 2.0 * z**n
    if rotated and n > 0:
        rhs *= np.prod(np.asarray(schedule.zeta[:n])) ** 2
    return complex(lhs), complex(rhs)


def pairing_real_part(schedule: CoefficientSchedule, n: int, z: complex, rotated: bool = False) -> float:
    """``Re(conj(ψ_n(z)) φ_n(z))``; equals 1 on the unit circle."""
    first = "rotated" if rotated else "standard"
    second = "rotated_second_kind" if rotated else "second_kind"
    phi = _values(schedule, n, z, first)[n, 0]
    psi = _values(schedule, n, z, second)[n, 0]
    return float((np.conj(psi) * phi).real)


def polynomial_values(schedule: CoefficientSchedule, count: int, z: complex, variant: str = "standard") -> np.ndarray:
    """Values ``(p_k(z), p_k*(z))`` for ``k = 0..count``; second kinds report the true reverse."""
    if count > 0:
        schedule.require(0, count - 1)
    return _values(schedule, count, complex(z), variant)


def gram_schmidt_oracle(mom: np.ndarray, count: int) -> list[ComplexPoly]:
    """Orthonormalise ``1, z, .., z^count`` in the moment inner product.

    ``mom`` is centred as returned by :func:`cmvkit.coefficients.moments`.
    Classical Gram-Schmidt with one re-orthogonalisation pass.
    """
    size = count + 1
    gram = toeplitz_gram(np.asarray(mom, dtype=complex), size)
    if np.max(np.abs(gram - gram.conj().T)) > 1e-12:
        raise ValueError("moment matrix is not Hermitian")
    inner = lambda u, v: np.conj(u) @ gram @ v
    basis: list[np.ndarray] = []
    for k in range(size):
        v = np.zeros(size, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - inner(b, v) * b
        norm2 = inner(v, v).real
        if not norm2 > 1e-14 * gram[k, k].real:
            raise ValueError(f"moment matrix is not positive definite at size {k + 1}")
        v = v / np.sqrt(norm2)
        # positive leading coefficient
        v = v * (abs(v[k]) / v[k])
        basis.append(v)
    return [ComplexPoly(b[: k + 1]) for k, b in enumerate(basis)]


def cmv_basis(
    pairs: Sequence[PolyPair], k: int, z, alternate: bool = False
):
    """CMV Laurent basis function χ_k (or the alternate χ̃_k) at ``z``.

    χ_{2m-1} = z^{-m+1} p_{2m-1}, χ_{2m} = z^{-m} p*_{2m};
    χ̃_{2m-1} = z^{-m} p*_{2m-1}, χ̃_{2m} = z^{-m} p_{2m}.
    Rotated pairs give the rotated basis.
    """
    if k < 0 or k >= len(pairs):
        raise ValueError(f"basis index {k} needs pairs up to index {k}")
    pair = pairs[k]
    z = np.asarray(z, dtype=complex)
    if k % 2:
        m = (k + 1) // 2
        if alternate:
            return z ** (-m) * pair.p_star(z)
        return z ** (-m + 1) * pair.p(z)
    m = k // 2
    if alternate:
        return z ** (-m) * pair.p(z)
    return z ** (-m) * pair.p_star(z)
