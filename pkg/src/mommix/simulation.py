"""Scenario generators and the Monte Carlo harness.

Four data-generating processes, all with X ~ N(0,1), latent memberships
P ~ Bernoulli(p) and Y = P*Y1 + (1-P)*Y2:

    gaussian_mixture          Y1 ~ N(1 + beta*X, 1)   Y2 ~ N(0, 1)
    zero_inflated_gaussian    Y1 ~ N(1 + beta*X, 1)   Y2 = 0
    exp_gaussian_mixture      Y1 = beta*X + Exp(1)    Y2 ~ N(0, 0.5^2)
    zero_inflated_exponential Y1 = beta*X + Exp(1)    Y2 = 0

Every scenario has true mu1 = 1 and component-1 noise variance 1. The
harness derives one seed per (scenario, replicate) with a counter-based
mix, so results are bitwise independent of how replicates are scheduled
across workers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics, em, moments
from .errors import InvalidBound, InvalidData, MommixError

KINDS = (
    "gaussian_mixture",
    "zero_inflated_gaussian",
    "exp_gaussian_mixture",
    "zero_inflated_exponential",
)

ESTIMATORS = ("moment", "em")

CSV_COLUMNS = (
    "scenario,n,estimator,parameter,true_value,mean_estimate,empirical_se,"
    "mean_estimated_se,coverage,relative_efficiency,failures,replicates"
)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix(z):
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replicate_seed(base_seed, scenario_index, replicate_index):
    """Counter-based per-replicate seed, stable across execution order."""
    counter = ((scenario_index << 32) | (replicate_index & 0xFFFFFFFF)) & _MASK64
    return _splitmix(_splitmix(base_seed) ^ ((counter * _GOLDEN) & _MASK64))


@dataclass(frozen=True)
class ScenarioSpec:
    """One generative configuration: kind, sample size, mixing p, slope."""

    kind: str
    n: int
    p: float
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidData(f"unknown scenario kind {self.kind!r}; one of {KINDS}")
        if self.n < 10:
            raise InvalidData(f"scenario n must be >= 10, got {self.n}")
        if not 0.0 < self.p < 1.0:
            raise InvalidData(f"scenario p must be in (0, 1), got {self.p}")


@dataclass(frozen=True)
class GeneratedData:
    """A generated dataset plus the latent pieces the estimators never see."""

    dataset: moments.Dataset
    component_one: np.ndarray
    y1: np.ndarray
    y2: np.ndarray


def generate_full(spec):
    """Generate a dataset and return the latent memberships alongside it.

    Draw order under the spec seed is fixed: X, memberships, component-1
    noise, component-2 noise (Gaussian kinds only).
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    x = rng.standard_normal(n)
    member = rng.random(n) < spec.p
    if spec.kind in ("gaussian_mixture", "zero_inflated_gaussian"):
        y1 = 1.0 + spec.beta * x + rng.standard_normal(n)
    else:
        y1 = spec.beta * x + rng.exponential(1.0, n)
    if spec.kind == "gaussian_mixture":
        y2 = rng.standard_normal(n)
    elif spec.kind == "exp_gaussian_mixture":
        y2 = 0.5 * rng.standard_normal(n)
    else:
        y2 = np.zeros(n)
    y = np.where(member, y1, y2)
    return GeneratedData(
        dataset=moments.Dataset(y=y, x=x[:, None]),
        component_one=member,
        y1=y1,
        y2=y2,
    )


def generate(spec):
    """Generate just the observable Dataset for a scenario."""
    return generate_full(spec).dataset


def efficiency_bound(sigma1_sq, p, n, var_x):
    """Oracle variance of the slope were memberships known.

    Returns sigma1_sq / ((p*n - 1) * var_x); its square root is the
    reference SE that relative efficiency divides by.
    """
    if p * n <= 1:
        raise InvalidBound(f"p*n must exceed 1, got {p * n}")
    if var_x <= 0:
        raise InvalidBound(f"var_x must be positive, got {var_x}")
    return sigma1_sq / ((p * n - 1.0) * var_x)


@dataclass(frozen=True)
class CellResult:
    """One aggregate row: a (scenario, n, estimator, parameter) cell."""

    scenario: str
    n: int
    estimator: str
    parameter: str
    true_value: float
    mean_estimate: float | None
    empirical_se: float | None
    mean_estimated_se: float | None
    coverage: float | None
    relative_efficiency: float | None
    failures: int
    replicates: int


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregated study results plus the per-replicate estimates.

    ``cells`` hold the table aggregates; ``replicate_rows`` are
    (scenario, n, estimator, replicate, seed, parameter, estimate) tuples
    for successful fits only, in fixed replicate order, which is what the
    long CSV serializes. ``replicates`` on a cell counts the successful
    fits that entered its aggregates, so coverage * replicates is always
    an integer; failures is the excluded count.
    """

    cells: tuple
    replicate_rows: tuple
    level: float
    base_seed: int
    requested_replicates: int
    estimators: tuple

    def to_csv(self):
        lines = [CSV_COLUMNS]
        for c in self.cells:
            lines.append(
                ",".join(
                    [
                        c.scenario,
                        str(c.n),
                        c.estimator,
                        c.parameter,
                        _fmt(c.true_value),
                        _fmt(c.mean_estimate),
                        _fmt(c.empirical_se),
                        _fmt(c.mean_estimated_se),
                        _fmt(c.coverage),
                        _fmt(c.relative_efficiency),
                        str(c.failures),
                        str(c.replicates),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_json(self):
        doc = {
            "level": self.level,
            "base_seed": self.base_seed,
            "replicates_requested": self.requested_replicates,
            "estimators": list(self.estimators),
            "cells": [
                {
                    "scenario": c.scenario,
                    "n": c.n,
                    "estimator": c.estimator,
                    "parameter": c.parameter,
                    "true_value": c.true_value,
                    "mean_estimate": c.mean_estimate,
                    "empirical_se": c.empirical_se,
                    "mean_estimated_se": c.mean_estimated_se,
                    "coverage": c.coverage,
                    "relative_efficiency": c.relative_efficiency,
                    "failures": c.failures,
                    "replicates": c.replicates,
                }
                for c in self.cells
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_long_csv(self):
        lines = ["scenario,n,estimator,replicate,seed,parameter,estimate"]
        for scenario, n, estimator, replicate, seed, parameter, estimate in (
            self.replicate_rows
        ):
            lines.append(
                f"{scenario},{n},{estimator},{replicate},{seed},{parameter},"
                f"{_fmt(estimate)}"
            )
        return "\n".join(lines) + "\n"


def _fmt(value):
    if value is None:
        return ""
    return repr(float(value))


def _fit_one(data, estimator, level, seed):
    if estimator == "moment":
        mf = moments.fit(data)
        summ = asymptotics.summarize(data, mf, level)
        return {
            "beta": (
                float(mf.beta[0]),
                float(summ.se_beta[0]),
                float(summ.ci_beta[0, 0]),
                float(summ.ci_beta[0, 1]),
            ),
            "p": (float(mf.p), float(summ.se_p), *map(float, summ.ci_p)),
        }
    ef = em.em_fit(data, seed=seed)
    return {"beta": (float(ef.beta[0]),), "p": (float(ef.p),)}


def _run_chunk(payload):
    kind, n, p, beta, estimators, level, base_seed, sidx, ridx_list = payload
    out = []
    for ridx in ridx_list:
        seed = replicate_seed(base_seed, sidx, ridx)
        data = generate(ScenarioSpec(kind=kind, n=n, p=p, beta=beta, seed=seed))
        record = {"seed": seed}
        for estimator in estimators:
            try:
                record[estimator] = _fit_one(data, estimator, level, seed)
            except (MommixError, np.linalg.LinAlgError) as exc:
                record[estimator] = type(exc).__name__
        out.append((sidx, ridx, record))
    return out


def _resolve_workers(threads):
    requested = threads if threads is not None else (os.cpu_count() or 1)
    cap = os.environ.get("MOMMIX_THREADS")
    if cap:
        requested = min(requested, max(1, int(cap)))
    return max(1, requested)


def run_study(specs, replicates, estimators=("moment",), level=0.95, base_seed=0,
              threads=None, chunk_size=64):
    """Run the Monte Carlo study and aggregate per-cell statistics.

    Replicate r of spec s is generated from replicate_seed(base_seed, s,
    r), fitted with each requested estimator, and failures (identifiable
    estimator errors) are counted per cell and excluded from aggregates.
    Coverage counts intervals containing the truth; relative efficiency,
    reported for the moment estimator's beta cells, divides the mean
    estimated SE by the efficiency-bound SE with the scenario ground
    truth sigma1_sq = 1 and var_x = 1.

    The result is bitwise independent of ``threads``; MOMMIX_THREADS caps
    worker parallelism.
    """
    specs = list(specs)
    if replicates < 2:
        raise InvalidData(f"replicates must be >= 2, got {replicates}")
    estimators = tuple(estimators)
    for estimator in estimators:
        if estimator not in ESTIMATORS:
            raise InvalidData(
                f"unknown estimator {estimator!r}; subset of {ESTIMATORS}"
            )
    if not 0.0 < level < 1.0:
        raise InvalidData(f"level must be in (0, 1), got {level}")

    payloads = []
    for sidx, spec in enumerate(specs):
        for start in range(0, replicates, chunk_size):
            ridx_list = tuple(range(start, min(start + chunk_size, replicates)))
            payloads.append(
                (spec.kind, spec.n, spec.p, spec.beta, estimators, level,
                 base_seed, sidx, ridx_list)
            )

    records = {}
    workers = _resolve_workers(threads)
    if workers == 1 or len(payloads) == 1:
        for payload in payloads:
            for sidx, ridx, record in _run_chunk(payload):
                records[(sidx, ridx)] = record
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_chunk, payloads):
                for sidx, ridx, record in chunk:
                    records[(sidx, ridx)] = record

    cells = []
    rows = []
    for sidx, spec in enumerate(specs):
        truth = {"beta": spec.beta, "p": spec.p}
        for estimator in estimators:
            collected = {"beta": [], "p": []}
            failures = 0
            for ridx in range(replicates):
                record = records[(sidx, ridx)]
                result = record[estimator]
                if isinstance(result, str):
                    failures += 1
                    continue
                for parameter in ("beta", "p"):
                    collected[parameter].append(result[parameter])
                    rows.append(
                        (spec.kind, spec.n, estimator, ridx, record["seed"],
                         parameter, result[parameter][0])
                    )
            for parameter in ("beta", "p"):
                cells.append(
                    _aggregate_cell(
                        spec, estimator, parameter, truth[parameter],
                        collected[parameter], failures,
                    )
                )
    return MonteCarloReport(
        cells=tuple(cells),
        replicate_rows=tuple(rows),
        level=level,
        base_seed=base_seed,
        requested_replicates=replicates,
        estimators=estimators,
    )


def _aggregate_cell(spec, estimator, parameter, truth, entries, failures):
    count = len(entries)
    mean_estimate = empirical_se = mean_estimated_se = coverage = rel_eff = None
    if count:
        ests = np.array([e[0] for e in entries])
        mean_estimate = float(ests.mean())
        if count >= 2:
            empirical_se = float(ests.std(ddof=1))
    if count and estimator == "moment":
        ses = np.array([e[1] for e in entries])
        mean_estimated_se = float(ses.mean())
        covered = sum(1 for e in entries if e[2] <= truth <= e[3])
        coverage = covered / count
        if parameter == "beta":
            bound_se = float(
                np.sqrt(efficiency_bound(1.0, spec.p, spec.n, 1.0))
            )
            rel_eff = mean_estimated_se / bound_se
    return CellResult(
        scenario=spec.kind,
        n=spec.n,
        estimator=estimator,
        parameter=parameter,
        true_value=float(truth),
        mean_estimate=mean_estimate,
        empirical_se=empirical_se,
        mean_estimated_se=mean_estimated_se,
        coverage=coverage,
        relative_efficiency=rel_eff,
        failures=failures,
        replicates=count,
    )
