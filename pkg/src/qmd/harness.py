"""Simulation study and permutation test.

Replicates and permutations are independent tasks.  Each owns a random
stream derived from ``(seed, task index)``, and results are collected by
index, so output does not depend on the number of worker processes.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .copulas import sample_scenario
from .core import PseudoSample, Sample
from .empirical import empirical_checkerboard, ranks
from .measure import zeta1_estimate, zeta1_exact


def default_threads() -> int:
    env = os.environ.get("QMD_THREADS")
    if env:
        threads = int(env)
        if threads < 1:
            raise ValueError("QMD_THREADS must be a positive integer")
        return threads
    return 1


def _run(func, tasks, threads):
    if threads is None:
        threads = default_threads()
    if threads < 1:
        raise ValueError("threads must be positive")
    if threads == 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


@dataclass(frozen=True)
class SimulationRow:
    scenario: str
    n: int
    s: float
    N: int
    replicate: int
    value: float


def _replicate(task):
    scenario, n, s_list, seed, rep = task
    sample = sample_scenario(scenario, n, seed, stream=rep)
    pseudo = ranks(sample, "midrank", seed)
    out = []
    for s in s_list:
        est = zeta1_estimate(sample, s=s, seed=seed, pseudo=pseudo)
        out.append(SimulationRow(scenario, n, est.s, est.N, rep, est.value))
    return out


def simulate(scenario: str, n_list: Sequence[int], reps: int,
             s_list: Sequence[Optional[float]] = (None,), seed: Optional[int] = 0,
             threads: Optional[int] = None):
    """Repeat the estimator on fresh scenario samples.

    Replicate ``r`` uses the sample ``sample_scenario(scenario, n, seed,
    stream=r)`` for every ``s`` in ``s_list`` (``None`` means ``1/rho``).
    Returns ``(rows, summary)`` where ``summary`` maps ``(n, s)`` to the
    quartiles ``(q1, median, q3)`` of the estimates.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    sample_scenario(scenario, 2, seed)  # fail fast on unknown names
    tasks = [(scenario, int(n), tuple(s_list), seed, r) for n in n_list for r in range(reps)]
    rows = [row for chunk in _run(_replicate, tasks, threads) for row in chunk]
    summary = {}
    for n in n_list:
        for s_val in {row.s for row in rows if row.n == n}:
            vals = np.array([row.value for row in rows if row.n == n and row.s == s_val])
            summary[(n, s_val)] = tuple(np.percentile(vals, [25, 50, 75]).tolist())
    return rows, summary


def _permutation_stat(task):
    ranks_tab, resp, preds, N, seed, b, tie_policy = task
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, b))))
    perm = rng.permutation(ranks_tab.shape[0])
    tab = ranks_tab[:, list(preds) + [resp]].copy()
    tab[:, -1] = tab[perm, -1]
    pseudo = PseudoSample(tab, tie_policy, seed, -1)
    return zeta1_exact(empirical_checkerboard(pseudo, N))


@dataclass(frozen=True)
class PermutationResult:
    statistic: float
    p_value: float
    permutations: int
    exceed: int
    n: int
    N: int
    predictors: tuple
    response: str
    seed: Optional[int]

    def as_dict(self):
        return {"statistic": self.statistic, "p_value": self.p_value,
                "permutations": self.permutations, "exceed": self.exceed,
                "n": self.n, "N": self.N, "predictors": list(self.predictors),
                "response": self.response, "seed": self.seed}


def permutation_test(sample: Sample, predictor_indices=None, permutations: int = 999,
                     s: Optional[float] = None, N: Optional[int] = None,
                     tie_policy: str = "midrank", seed: Optional[int] = 0,
                     threads: Optional[int] = None) -> PermutationResult:
    """Test independence of predictors and response by permuting the response.

    ``p = (1 + #{permuted >= observed}) / (B + 1)``.  Ranks are computed once;
    permuting the response ranks is the same as ranking the permuted column.
    """
    if permutations < 1:
        raise ValueError("need at least one permutation")
    pseudo = ranks(sample, tie_policy, seed)
    obs = zeta1_estimate(sample, predictor_indices, s=s, N=N, tie_policy=tie_policy,
                         seed=seed, pseudo=pseudo)
    tasks = [(pseudo.ranks, sample.response_index, obs.predictor_indices, obs.N, seed, b,
              tie_policy) for b in range(permutations)]
    stats = np.array(_run(_permutation_stat, tasks, threads))
    exceed = int(np.sum(stats >= obs.value - 1e-12))
    return PermutationResult(obs.value, (1 + exceed) / (permutations + 1), permutations,
                             exceed, obs.n, obs.N, obs.predictors, obs.response, seed)
