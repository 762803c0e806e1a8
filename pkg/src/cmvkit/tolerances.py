"""Tolerance ladder shared by the library, the tests and the CLI.

Three rungs separate roundoff from discretisation error:

* ``algebraic``  -- exact identities evaluated in floating point
* ``quadrature`` -- identities that go through a trapezoid rule
* ``oracle``     -- comparisons against an independent computation

``CMVKIT_TOL`` overrides the ladder.  A bare float replaces every rung;
``algebraic=1e-12,oracle=1e-8`` replaces individual rungs.
"""

from __future__ import annotations

import os

DEFAULTS: dict[str, float] = {
    "algebraic": 1e-13,
    "quadrature": 1e-10,
    "oracle": 1e-9,
}

ENV_VAR = "CMVKIT_TOL"


def _parse(spec: str) -> dict[str, float]:
    spec = spec.strip()
    if not spec:
        return {}
    try:
        value = float(spec)
    except ValueError:
        pass
    else:
        return {key: value for key in DEFAULTS}
    out: dict[str, float] = {}
    for item in spec.split(","):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in DEFAULTS:
            raise ValueError(f"bad {ENV_VAR} entry {item!r}")
        out[key] = float(raw)
    return out


def ladder() -> dict[str, float]:
    """Current tolerance ladder with any environment override applied."""
    merged = dict(DEFAULTS)
    merged.update(_parse(os.environ.get(ENV_VAR, "")))
    for key, value in merged.items():
        if not value > 0:
            raise ValueError(f"tolerance {key} must be positive, got {value}")
    return merged


def tolerance(kind: str) -> float:
    try:
        return ladder()[kind]
    except KeyError:
        raise ValueError(f"unknown tolerance rung {kind!r}") from None


class ToleranceBreach(RuntimeError):
    """A numerical identity failed its tolerance; ``identity`` names it."""

    def __init__(self, identity: str, residual: float, tol: float) -> None:
        super().__init__(f"{identity}: residual {residual:.3e} exceeds tolerance {tol:.1e}")
        self.identity = identity
        self.residual = residual
        self.tol = tol
