"""Per-matrix metrics for any selector, plus suite aggregates and CSV export.

Three metrics per (traffic matrix, method):
  pr_u     — optimal max-utilization / achieved max-utilization (<= 1)
  pr_omega — optimal delay proxy / achieved delay proxy (<= 1)
  rd       — share of total demand belonging to the rerouted flows

ECMP is modeled as the empty selection so every method flows through the
same rerouting path. Policy selection at evaluation time is greedy: the K
highest-probability actions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .ecmp import compute_ecmp_fractions, ecmp_link_loads
from .policy import forward
from .rerouting import solve_delay_optimal, solve_optimal_all_flows, \
    solve_rerouting, evaluate_delay
from .selectors import SelectionResult, random_k, top_k, top_k_critical
from .topology import flow_of_index

METHODS = ("ecmp", "policy", "top_k", "top_k_critical", "random")
RESULT_FIELDS = ("tm_id", "method", "u_method", "u_optimal", "pr_u",
                 "omega_method", "omega_optimal", "pr_omega", "rd")


class EvaluationError(Exception):
    pass


@dataclass
class EvalRecord:
    tm_id: str
    method: str
    u_method: float
    u_optimal: float
    pr_u: float
    omega_method: float = None
    omega_optimal: float = None
    pr_omega: float = None
    rd: float = 0.0


def _ratio(optimal, achieved):
    if achieved == 0:
        return 1.0  # degenerate zero-traffic state: method trivially optimal
    if not np.isfinite(achieved):
        return 0.0
    return optimal / achieved


def policy_selection(params, tm, k):
    """Greedy evaluation-time selection: top-k probabilities, ties by id."""
    dist = forward(params, tm)
    order = np.lexsort((np.arange(dist.probs.shape[0]), -dist.probs))
    flows = tuple(flow_of_index(int(a), tm.n) for a in order[:k])
    return SelectionResult(flows=flows, method="policy")


def eval_one(topo, tm, selection, fractions=None, include_delay=True,
             u_optimal=None, delay_optimal=None):
    """Metrics for one selection on one matrix.

    The rerouting solution still minimizes max utilization; the delay
    proxy is evaluated on the loads that solution produces. Precomputed
    oracle values can be passed to avoid re-solving across methods.
    """
    if fractions is None:
        fractions = compute_ecmp_fractions(topo)
    background = ecmp_link_loads(topo, tm, fractions, exclude=selection.flows)
    sol = solve_rerouting(topo, tm, selection.flows, background)
    if u_optimal is None:
        u_optimal, _ = solve_optimal_all_flows(topo, tm)
    total = tm.total_demand()
    rerouted = sum(tm.demand[s, d] for s, d in selection.flows)
    record = EvalRecord(
        tm_id=tm.id, method=selection.method,
        u_method=sol.u, u_optimal=u_optimal,
        pr_u=_ratio(u_optimal, sol.u),
        rd=(rerouted / total) if total > 0 else 0.0)
    if include_delay:
        if delay_optimal is None:
            delay_optimal, _ = solve_delay_optimal(topo, tm)
        record.omega_method = evaluate_delay(topo, sol.link_loads)
        record.omega_optimal = delay_optimal
        record.pr_omega = _ratio(delay_optimal, record.omega_method)
    return record


def select(method, topo, tm, k, params=None, fractions=None, seed=0):
    """Dispatch a method name to its selector."""
    if method == "ecmp":
        return SelectionResult(flows=(), method="ecmp")
    if method == "policy":
        if params is None:
            raise EvaluationError("policy method requires trained parameters")
        return policy_selection(params, tm, k)
    if method == "top_k":
        return top_k(tm, k)
    if method == "top_k_critical":
        return top_k_critical(topo, tm, k, fractions=fractions)
    if method == "random":
        return random_k(tm.n * (tm.n - 1), k, seed, n=tm.n)
    raise EvaluationError(f"unknown method {method!r}")


def eval_suite(topo, matrices, methods, k, params=None, include_delay=True,
               seed=0):
    """Evaluate every method on every matrix.

    Returns (records, aggregates) where aggregates maps
    (method, metric) -> (mean, std).
    """
    if "policy" in methods and params is None:
        raise EvaluationError("policy method requires trained parameters")
    fractions = compute_ecmp_fractions(topo)
    records = []
    for tm in matrices:
        u_opt, _ = solve_optimal_all_flows(topo, tm)
        d_opt = solve_delay_optimal(topo, tm)[0] if include_delay else None
        for method in methods:
            selection = select(method, topo, tm, k, params=params,
                               fractions=fractions, seed=seed)
            records.append(eval_one(topo, tm, selection, fractions=fractions,
                                    include_delay=include_delay,
                                    u_optimal=u_opt, delay_optimal=d_opt))
    return records, aggregate(records)


def aggregate(records):
    """(method, metric) -> (mean, std) over the available records."""
    out = {}
    for metric in ("pr_u", "pr_omega", "rd"):
        by_method = {}
        for r in records:
            val = getattr(r, metric)
            if val is not None:
                by_method.setdefault(r.method, []).append(val)
        for method, vals in by_method.items():
            arr = np.array(vals)
            out[(method, metric)] = (float(arr.mean()), float(arr.std()))
    return out


def empirical_cdf(records, method, metric):
    """Sorted sample values and cumulative fractions for one method/metric."""
    vals = sorted(getattr(r, metric) for r in records
                  if r.method == method and getattr(r, metric) is not None)
    if not vals:
        return np.array([]), np.array([])
    n = len(vals)
    return np.array(vals), np.arange(1, n + 1) / n


def write_results_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_FIELDS)
        for r in records:
            w.writerow(["" if getattr(r, f) is None else
                        (getattr(r, f) if f in ("tm_id", "method")
                         else repr(float(getattr(r, f))))
                        for f in RESULT_FIELDS])


def write_cdf_csv(records, path, metrics=("pr_u", "pr_omega", "rd")):
    methods = sorted({r.method for r in records})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "metric", "x", "cdf"])
        for method in methods:
            for metric in metrics:
                xs, fs = empirical_cdf(records, method, metric)
                for x, f in zip(xs, fs):
                    w.writerow([method, metric, repr(float(x)), repr(float(f))])
