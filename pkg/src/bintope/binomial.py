"""Laurent binomial systems ``x^A = b`` and the structure of their torus solutions.

Column ``j`` of the exponent matrix is the exponent of the j-th equation, so
``x^A`` is the tuple of monomials ``x^{A[:, j]}``.  Every coordinate of ``x``
is a nonzero complex number.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Iterator, Sequence

from .intlinalg import IntMatrix, SnfResult, smith_normal_form

__all__ = [
    "BinomialSystem",
    "SolutionStructure",
    "ComponentParametrization",
    "InconsistentSystemError",
    "analyze",
    "enumerate_components",
    "evaluate_parametrization",
    "residual",
    "monomial",
    "matrix_power",
    "load_system",
    "system_from_dict",
    "system_to_dict",
]

CONSISTENCY_TOL = 1e-8
LOG_POLAR_THRESHOLD = 16


class InconsistentSystemError(RuntimeError):
    """The binomial system has no solution in the complex torus."""


def _power(z, e: int):
    """``z**e`` for a nonzero complex or exact rational ``z`` and integer ``e``."""
    if isinstance(z, Fraction):
        return z ** e
    if abs(e) > LOG_POLAR_THRESHOLD:
        return cmath.exp(e * cmath.log(z))
    return complex(z) ** e


def monomial(x: Sequence, exponent: Sequence[int]):
    """Evaluate ``x^exponent``."""
    out = 1
    for xi, e in zip(x, exponent):
        if e:
            out = out * _power(xi, e)
    return out


def matrix_power(x: Sequence, M: IntMatrix) -> list:
    """``x^M``: one monomial per column of ``M``."""
    if len(x) != M.nrows:
        raise ValueError(f"vector of length {len(x)} cannot be raised to a {M.shape} matrix")
    return [monomial(x, col) for col in M.columns()]


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


@dataclass(frozen=True)
class BinomialSystem:
    """The system ``x^A = b`` with ``A`` an n x m integer matrix."""

    exponents: IntMatrix
    rhs: tuple

    def __post_init__(self):
        if not isinstance(self.exponents, IntMatrix):
            object.__setattr__(self, "exponents", IntMatrix(self.exponents))
        rhs = tuple(Fraction(v) if _is_exact(v) else complex(v) for v in self.rhs)
        object.__setattr__(self, "rhs", rhs)
        if len(rhs) != self.exponents.ncols:
            raise ValueError(
                f"{self.exponents.ncols} exponent columns but {len(rhs)} right-hand sides"
            )
        if any(v == 0 for v in rhs):
            raise ValueError("right-hand side entries must be nonzero")

    @property
    def num_vars(self) -> int:
        return self.exponents.nrows

    @property
    def num_eqs(self) -> int:
        return self.exponents.ncols

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.rhs)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rhs: Sequence) -> "BinomialSystem":
        return cls(IntMatrix.from_columns(columns), tuple(rhs))

    @classmethod
    def from_monomial_pairs(cls, pairs) -> "BinomialSystem":
        """Build from ``(c1, alpha, c2, beta)`` meaning ``c1 x^alpha + c2 x^beta = 0``."""
        cols, rhs = [], []
        for c1, alpha, c2, beta in pairs:
            if c1 == 0 or c2 == 0:
                raise ValueError("binomial coefficients must be nonzero")
            cols.append([a - b for a, b in zip(alpha, beta)])
            if _is_exact(c1) and _is_exact(c2):
                rhs.append(-Fraction(c2) / Fraction(c1))
            else:
                rhs.append(-complex(c2) / complex(c1))
        return cls.from_columns(cols, rhs)


@dataclass(frozen=True)
class SolutionStructure:
    system: BinomialSystem
    snf: SnfResult
    consistent: bool
    rank: int
    dimension: int
    component_count: int
    rhs_powers: tuple
    zeta: tuple = field(default=())


@dataclass(frozen=True)
class ComponentParametrization:
    """The map ``t -> (torsion_point, t)^P`` onto one component."""

    indices: tuple[int, ...]
    P: IntMatrix
    torsion_point: tuple[complex, ...]

    @property
    def dimension(self) -> int:
        return self.P.nrows - len(self.torsion_point)


def _principal_root(w, d: int) -> complex:
    w = complex(w)
    return abs(w) ** (1.0 / d) * cmath.exp(1j * cmath.phase(w) / d)


def analyze(system: BinomialSystem, *, tol: float = CONSISTENCY_TOL) -> SolutionStructure:
    """Dimension, consistency and component count of ``x^A = b`` over the torus."""
    snf = smith_normal_form(system.exponents)
    r = snf.rank
    bq = tuple(matrix_power(system.rhs, snf.Q))
    consistent = True
    for v in bq[r:]:
        if isinstance(v, Fraction):
            consistent &= v == 1
        else:
            consistent &= abs(v - 1) <= tol
    count = math.prod(abs(d) for d in snf.divisors) if consistent else 0
    zeta = tuple(_principal_root(bq[j], snf.divisors[j]) for j in range(r))
    return SolutionStructure(
        system=system,
        snf=snf,
        consistent=consistent,
        rank=r,
        dimension=system.num_vars - r,
        component_count=count,
        rhs_powers=bq,
        zeta=zeta,
    )


def enumerate_components(structure: SolutionStructure) -> Iterator[ComponentParametrization]:
    """Yield one parametrization per component, indices in lexicographic order."""
    if not structure.consistent:
        raise InconsistentSystemError("system has no torus solutions")
    divisors = structure.snf.divisors
    for ks in itertools.product(*(range(abs(d)) for d in divisors)):
        yield component(structure, ks)


def component(structure: SolutionStructure, indices: Sequence[int]) -> ComponentParametrization:
    if not structure.consistent:
        raise InconsistentSystemError("system has no torus solutions")
    divisors = structure.snf.divisors
    indices = tuple(int(k) for k in indices)
    if len(indices) != len(divisors) or any(not 0 <= k < abs(d) for k, d in zip(indices, divisors)):
        raise ValueError(f"component indices {indices} out of range for divisors {divisors}")
    xi = tuple(
        cmath.exp(2j * math.pi * k / d) * z for k, d, z in zip(indices, divisors, structure.zeta)
    )
    return ComponentParametrization(indices, structure.snf.P, xi)


def evaluate_parametrization(p: ComponentParametrization, t: Sequence[complex]) -> list[complex]:
    t = [complex(v) for v in t]
    if len(t) != p.dimension:
        raise ValueError(f"expected {p.dimension} parameters, got {len(t)}")
    if any(v == 0 for v in t):
        raise ValueError("parameters must be nonzero")
    z = list(p.torsion_point) + t
    return [complex(v) for v in matrix_power(z, p.P)]


def residual(system: BinomialSystem, x: Sequence[complex]) -> float:
    """``max_j |x^{A_j} - b_j|``."""
    if any(v == 0 for v in x):
        raise ValueError("x must have nonzero coordinates")
    x = [complex(v) for v in x]
    vals = matrix_power(x, system.exponents)
    return max(abs(v - complex(b)) for v, b in zip(vals, system.rhs))


# JSON -----------------------------------------------------------------------

def _parse_number(v):
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ValueError("boolean is not a coefficient")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Number):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"cannot read coefficient {v!r}")


def system_from_dict(data: dict) -> BinomialSystem:
    n = int(data["n"])
    cols, rhs = [], []
    for k, eq in enumerate(data["equations"]):
        if "exponents" in eq:
            col = [int(v) for v in eq["exponents"]]
            b = _parse_number(eq["rhs"])
        elif {"c1", "alpha", "c2", "beta"} <= eq.keys():
            c1, c2 = _parse_number(eq["c1"]), _parse_number(eq["c2"])
            col = [int(a) - int(b) for a, b in zip(eq["alpha"], eq["beta"])]
            if len(eq["alpha"]) != n or len(eq["beta"]) != n:
                raise ValueError(f"equation {k}: monomial exponents must have length {n}")
            if c1 == 0 or c2 == 0:
                raise ValueError(f"equation {k}: coefficients must be nonzero")
            b = -c2 / c1
        else:
            raise ValueError(f"equation {k}: expected 'exponents'/'rhs' or 'c1','alpha','c2','beta'")
        if len(col) != n:
            raise ValueError(f"equation {k}: exponent length {len(col)} != n={n}")
        cols.append(col)
        rhs.append(b)
    if not cols:
        raise ValueError("system has no equations")
    return BinomialSystem.from_columns(cols, rhs)


def _number_to_json(v):
    if isinstance(v, Fraction):
        return {"re": float(v), "im": 0.0}
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def system_to_dict(system: BinomialSystem) -> dict:
    return {
        "n": system.num_vars,
        "equations": [
            {"exponents": list(col), "rhs": _number_to_json(b)}
            for col, b in zip(system.exponents.columns(), system.rhs)
        ],
    }


def load_system(path) -> BinomialSystem:
    with open(path) as fh:
        return system_from_dict(json.load(fh))
