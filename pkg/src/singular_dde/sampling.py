"""Random valid singular solutions, for property checks and experiment scripts."""

from __future__ import annotations

import math

import numpy as np

from . import algebra
from .model import BranchIndex, Kind, ModelParams

A_RANGE = (1.0, 12.0)
K2_RANGE = (0.05, 0.95)
K1_RANGE = (0.05, 50.0)


def draw_solution(rng: np.random.Generator, kind: Kind, n_max: int = 1,
                  max_tries: int = 100_000):
    """(params, solution) with A, K2 uniform and K1 log-uniform, kept when ``construct`` succeeds.

    Rejection sampling draws K1 uniformly (in log) over the union of legs of
    the drawn (A, K2, n, m).
    """
    for _ in range(max_tries):
        A = rng.uniform(*A_RANGE)
        if A <= A_RANGE[0]:
            continue
        K2 = rng.uniform(*K2_RANGE)
        n = int(rng.integers(0, n_max + 1))
        params = ModelParams.from_ratio(A, K2=K2)
        lo = max(algebra.m_zero(params, n), 0)
        hi = max(lo, math.floor(algebra.m_star_star(params, n)) + 2)
        m = int(rng.integers(lo, hi + 1))
        K1 = float(math.exp(rng.uniform(math.log(K1_RANGE[0]), math.log(K1_RANGE[1]))))
        sol = algebra.try_construct(params, BranchIndex(n, m), kind, K1)
        if sol is not None:
            return params.with_K1(K1), sol
    raise RuntimeError(f"no valid {kind.value} solution in {max_tries} draws")
