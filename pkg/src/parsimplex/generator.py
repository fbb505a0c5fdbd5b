"""Seeded generator of dense, solvable canonical-form instances.

Construction:

* each entry of ``A`` is nonzero with probability ``density``; nonzero values
  are uniform on (0, 50);
* ``b = A @ u`` for a hidden ``u`` uniform on [0, 1]^n, so ``u`` (and ``x = 0``)
  are feasible and ``b >= 0``;
* ``c_j`` is uniform on (0, 50) when column ``j`` of ``A`` has a nonzero entry
  and 0 otherwise. Since ``A >= 0``, every variable with positive cost is
  capped by some constraint, so the problem is bounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp_model import LpProblem

__all__ = ["COEFF_HIGH", "GenSpec", "generate", "realized_density"]

COEFF_HIGH = 50.0


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    density: float = 0.9
    seed: Optional[int] = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if not 0.0 < self.density <= 1.0:
            raise ValueError(f"density must lie in (0, 1], got {self.density}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # uniform on (0, COEFF_HIGH): random() is [0, 1), so flip it to (0, 1]
    # and reject the single endpoint value 1.0
    vals = 1.0 - rng.random(size)
    vals[vals == 1.0] = 0.5
    return COEFF_HIGH * vals


def generate(spec: GenSpec) -> LpProblem:
    """Build the instance described by ``spec``; identical seeds give identical bits."""
    rng = np.random.default_rng(spec.seed)
    m, n = spec.m, spec.n
    mask = rng.random((m, n)) < spec.density
    a = np.where(mask, _open_uniform(rng, (m, n)), 0.0)
    u = rng.random(n)
    b = a @ u
    c = _open_uniform(rng, n)
    # a column with no nonzero would make a positive cost unbounded
    c[~mask.any(axis=0)] = 0.0
    return LpProblem(a, b, c, density=spec.density, seed=spec.seed)


def realized_density(problem: LpProblem) -> float:
    """Fraction of nonzero entries of ``A``."""
    if problem.a.size == 0:
        return 0.0
    return float(np.count_nonzero(problem.a)) / problem.a.size
