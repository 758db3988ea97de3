"""Monte Carlo yield estimation.

Samples are generated in fixed-size blocks.  Block ``b`` draws from a
counter-based generator keyed by ``(seed, b)``, so sample ``i`` is a pure
function of ``(seed, i)`` and the result is bit-identical for any number
of worker threads.  Aggregation only sums integer counters.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import make_rng, std_normal_quantile
from .problem import DesignProblem

BLOCK_SIZE = 1 << 16
RETAIN_LIMIT = 100_000


class MonteCarloError(ValueError):
    pass


@dataclass
class MonteCarloResult:
    n_samples: int
    n_pass: int
    seed: int
    per_spec_pass: dict
    n_eval_failed: int = 0
    samples: Optional[np.ndarray] = field(default=None, repr=False)
    passed: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def yield_estimate(self) -> float:
        return self.n_pass / self.n_samples

    def to_dict(self, level: Optional[float] = None) -> dict:
        out = {
            "n_samples": self.n_samples,
            "n_pass": self.n_pass,
            "yield_estimate": self.yield_estimate,
            "seed": self.seed,
            "per_spec_pass": dict(self.per_spec_pass),
            "n_eval_failed": self.n_eval_failed,
        }
        if level is not None:
            lo, hi = confidence_interval(self, level)
            out["confidence_level"] = level
            out["ci_low"] = lo
            out["ci_high"] = hi
        return out


def draw_block(problem: DesignProblem, seed: int, block: int, size: int) -> np.ndarray:
    """Parameter matrix for one block; Fixed columns hold their value."""
    rng = make_rng(seed, block)
    X = np.empty((size, len(problem.parameters)))
    for k, p in enumerate(problem.parameters):
        X[:, k] = p.dist.sample(rng, size)
    return X


def _run_block(problem, seed, block, size, keep):
    X = draw_block(problem, seed, block, size)
    joint, per_spec, valid = problem.check_batch(X)
    counts = (
        int(joint.sum()),
        [int(m.sum()) for m in per_spec],
        int((~valid).sum()),
    )
    return counts, (X, joint) if keep else None


def run_monte_carlo(
    problem: DesignProblem,
    n: int,
    seed: int,
    threads: int = 1,
    retain: Optional[bool] = None,
) -> MonteCarloResult:
    """Estimate the fraction of samples meeting every spec.

    A sample whose parameters leave the device domain counts as a failure
    and is tallied in ``n_eval_failed``.  Retained samples (``retain``
    defaults to ``n <= 100_000``) are returned with the pass mask.
    """
    if n < 1:
        raise MonteCarloError(f"need at least one sample, got {n}")
    if not problem.specs:
        raise MonteCarloError("problem declares no specs to check")
    if threads < 1:
        raise MonteCarloError("threads must be >= 1")
    keep = n <= RETAIN_LIMIT if retain is None else retain
    blocks = [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range(math.ceil(n / BLOCK_SIZE))]

    def work(item):
        b, size = item
        return _run_block(problem, seed, b, size, keep)

    if threads == 1 or len(blocks) == 1:
        results = [work(item) for item in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))

    n_pass = sum(r[0][0] for r in results)
    per_spec = [sum(r[0][1][i] for r in results) for i in range(len(problem.specs))]
    n_failed = sum(r[0][2] for r in results)
    samples = passed = None
    if keep:
        samples = np.concatenate([r[1][0] for r in results])
        passed = np.concatenate([r[1][1] for r in results])
    return MonteCarloResult(
        n_samples=n,
        n_pass=n_pass,
        seed=seed,
        per_spec_pass={s.label: c for s, c in zip(problem.specs, per_spec)},
        n_eval_failed=n_failed,
        samples=samples,
        passed=passed,
    )


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if not 0 < level < 1:
        raise ValueError(f"confidence level must lie in (0, 1), got {level!r}")
    if trials < 1:
        raise ValueError("need at least one trial")
    z = std_normal_quantile(0.5 + level / 2)
    p = successes / trials
    z2n = z * z / trials
    denom = 1 + z2n
    centre = (p + z2n / 2) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials)) / denom
    lo = max(0.0, centre - half)
    hi = min(1.0, centre + half)
    # exact boundaries at 0 and n successes
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return lo, hi


def confidence_interval(result: MonteCarloResult, level: float = 0.95) -> tuple:
    return wilson_interval(result.n_pass, result.n_samples, level)
