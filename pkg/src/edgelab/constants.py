"""Explicit constants of the Berry-Esseen analysis and the finite-size bounds they feed."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

# Absolute prefactor C~ for the two inequality-form constants.  1 is the neutral
# default; 100 reproduces C(3, 0.01) <= 3e12 in the worked example.
DEFAULT_PREFACTOR = 1.0
WORKED_EXAMPLE_PREFACTOR = 100.0


@dataclass(frozen=True)
class ConstantSpec:
    name: str
    formula: Callable[[float, float, float], float]
    source: str
    description: str
    bound: bool = False  # True when the value is an upper bound scaled by C~


CONSTANTS = {
    c.name: c
    for c in (
        ConstantSpec("C(d,eps)", lambda d, e, p: p * d * e**-5, "Theorem: sharp edge isotropic local law",
                     "edge isotropic local-law constant", bound=True),
        ConstantSpec("C1", lambda d, e, p: 12 * d**3 * e**-2, "Proposition: overlap SDE",
                     "overlap SDE error coefficient"),
        ConstantSpec("C2", lambda d, e, p: 5 * d**2 * e**-8, "Theorem: moment evolution",
                     "second-moment error bound"),
        ConstantSpec("C3", lambda d, e, p: 12 * d**3 * e**-10, "Theorem: moment evolution",
                     "fourth-moment error bound"),
        ConstantSpec("C4", lambda d, e, p: 8 * d * e**-6, "Theorem: quantitative decorrelation",
                     "decorrelation bound constant"),
        ConstantSpec("C5", lambda d, e, p: 10 * d**2 * e**-9, "Theorem: backward stability",
                     "backward stability constant"),
        ConstantSpec("C_d", lambda d, e, p: p * d**3 * e**-10, "Theorem: Berry-Esseen bound",
                     "final Berry-Esseen constant", bound=True),
    )
}


def _check_domain(d, epsilon):
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def evaluate_constant(name: str, d: int, epsilon: float, prefactor: float = DEFAULT_PREFACTOR) -> float:
    """Value of a named constant; for ``C(d,eps)`` and ``C_d`` the bound with prefactor ``C~``."""
    _check_domain(d, epsilon)
    try:
        spec = CONSTANTS[name]
    except KeyError:
        raise ValueError(f"unknown constant {name!r}; known: {sorted(CONSTANTS)}") from None
    return float(spec.formula(d, epsilon, prefactor))


@dataclass(frozen=True)
class BerryEsseenBound:
    bound: float
    n_factor: float
    exponent: float


def berry_esseen_bound(
    n: float,
    d: int,
    epsilon: float,
    prefactor: float = DEFAULT_PREFACTOR,
    indicator: bool = False,
    constant: str = "C_d",
) -> BerryEsseenBound:
    """``C * N^{-1/6+eps}`` (or ``N^{-5/36+eps}`` for indicator test functions).

    ``epsilon = 0`` is accepted here to isolate the bare N-factor; the constant is
    then reported as infinite.
    """
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    exponent = (-5.0 / 36.0 if indicator else -1.0 / 6.0) + epsilon
    n_factor = float(n) ** exponent
    if epsilon <= 0:
        return BerryEsseenBound(float("inf"), n_factor, exponent)
    c = evaluate_constant(constant, d, epsilon, prefactor)
    return BerryEsseenBound(c * n_factor, n_factor, exponent)


def constants_table(d: int, epsilon: float, n: float | None = None, prefactor: float = DEFAULT_PREFACTOR) -> dict:
    """All constants at ``(d, eps)`` plus, when ``n`` is given, the bound N-factors."""
    rows = []
    for name, spec in CONSTANTS.items():
        rows.append(
            {
                "name": name,
                "description": spec.description,
                "value": evaluate_constant(name, d, epsilon, prefactor),
                "is_bound": spec.bound,
                "source": spec.source,
            }
        )
    out = {"d": d, "epsilon": epsilon, "prefactor": prefactor, "constants": rows}
    if n is not None:
        smooth = berry_esseen_bound(n, d, epsilon, prefactor)
        ind = berry_esseen_bound(n, d, epsilon, prefactor, indicator=True)
        out.update(
            N=n,
            smooth_n_factor=smooth.n_factor,
            smooth_bound=smooth.bound,
            indicator_n_factor=ind.n_factor,
            indicator_bound=ind.bound,
        )
    return out


def format_table(table: dict) -> str:
    lines = [f"d = {table['d']}, epsilon = {table['epsilon']}, prefactor = {table['prefactor']}"]
    width = max(len(r["name"]) for r in table["constants"])
    for r in table["constants"]:
        rel = "<=" if r["is_bound"] else "= "
        lines.append(f"  {r['name']:<{width}} {rel} {r['value']:<14.6g} {r['description']}")
    if "N" in table:
        lines.append(f"  N = {table['N']:g}")
        lines.append(f"  N^(-1/6+eps)  = {table['smooth_n_factor']:.6g}   bound = {table['smooth_bound']:.6g}")
        lines.append(f"  N^(-5/36+eps) = {table['indicator_n_factor']:.6g}   bound = {table['indicator_bound']:.6g}")
    return "\n".join(lines)


def table_json(table: dict) -> str:
    return json.dumps(table, indent=2, sort_keys=True)
