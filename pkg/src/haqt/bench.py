"""Monte Carlo benchmark harness.

Runs repeated tomography trials over a shot grid for one or both
protocols, aggregates mean infidelity with standard errors, attaches the
Gill-Massar bound and its guarantee-factor multiple, and emits a CSV
table, a JSON report with per-trial detail and a log-log figure.

Every trial draws its randomness from a stream derived from
(master_seed, protocol, N, trial), so a report is a pure function of its
spec regardless of worker count or execution order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimator import MleOptions, mle_core
from .fisher import RANK_TOL, alpha, gill_massar_bound
from .protocols import PROTOCOLS, ProtocolConfig, run_protocol
from .rng import derive_rng
from .states import (DensityMatrix, PureState, density_matrix_from_json,
                     density_matrix_to_json, infidelity, random_full_rank,
                     random_pure)

_PROTOCOL_STREAM = {"sqt": 0, "haqt": 1}
_STATE_STREAM = 0xD1CE


def slit_state(transmissivities, phases) -> PureState:
    """Pure state (1/sqrt(M)) sum_l sqrt(t_l) exp(i phi_l) |l>, the path
    state of a photon transmitted through d slits with per-slit
    transmissivity t_l and relative phase phi_l."""
    t = np.asarray(transmissivities, dtype=float)
    phi = np.asarray(phases, dtype=float)
    if t.shape != phi.shape or t.ndim != 1:
        raise ValueError("transmissivities and phases must be equal-length vectors")
    if t.min() < 0:
        raise ValueError("transmissivities must be non-negative")
    if t.max() == 0:
        raise ValueError("at least one transmissivity must be positive")
    amps = np.sqrt(t) * np.exp(1j * phi)
    return PureState(t.shape[0], amps / np.linalg.norm(amps))


def flat_phase_target(d: int) -> PureState:
    """The d-slit state with unit transmissivities, zero phase on the first
    slit and -pi/d on the rest (the d = 10 benchmark target)."""
    phases = np.full(d, -np.pi / d)
    phases[0] = 0.0
    return slit_state(np.ones(d), phases)


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one benchmark run."""

    dim: int
    protocols: tuple = PROTOCOLS
    shot_grid: tuple = (10000,)
    trials: int = 10
    master_seed: int = 0
    split_fraction: float = 0.5
    state: dict = field(default_factory=lambda: {"type": "random_full_rank"})
    mle: dict = field(default_factory=dict)
    proxy_truth: bool = False
    store_estimates: bool = False
    output_dir: str | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        protocols = tuple(self.protocols)
        if not protocols or any(p not in PROTOCOLS for p in protocols):
            raise ValueError(f"protocols must be a non-empty subset of {PROTOCOLS}")
        grid = tuple(int(n) for n in self.shot_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("shot_grid must be non-empty and strictly ascending")
        if self.proxy_truth and not self.store_estimates:
            raise ValueError("proxy_truth requires store_estimates")
        object.__setattr__(self, "protocols", protocols)
        object.__setattr__(self, "shot_grid", grid)
        self.mle_options()     # fail fast on bad estimator overrides
        self.resolve_state()   # and on a bad state description

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentSpec":
        known = {"dim", "protocols", "shot_grid", "trials", "master_seed",
                 "split_fraction", "state", "mle", "proxy_truth",
                 "store_estimates", "output_dir"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        return ExperimentSpec(**obj)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "protocols": list(self.protocols),
            "shot_grid": list(self.shot_grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "split_fraction": self.split_fraction,
            "state": self.state,
            "mle": dict(self.mle),
            "proxy_truth": self.proxy_truth,
            "store_estimates": self.store_estimates,
            "output_dir": self.output_dir,
        }

    def mle_options(self) -> MleOptions:
        return MleOptions(**self.mle)

    def resolve_state(self) -> DensityMatrix:
        """Materialize the true state; random sources are drawn once from a
        dedicated stream of the master seed."""
        kind = self.state.get("type", "random_full_rank")
        if kind == "fixed":
            return density_matrix_from_json({"dim": self.dim,
                                             "matrix": self.state["matrix"]})
        if kind == "random_full_rank":
            rng = derive_rng(self.master_seed, _STATE_STREAM)
            floor = float(self.state.get("min_eigenvalue", 0.0))
            while True:
                rho = random_full_rank(self.dim, rng)
                if np.linalg.eigvalsh(rho.matrix).min() >= floor:
                    return rho
        if kind == "random_pure":
            rng = derive_rng(self.master_seed, _STATE_STREAM)
            return random_pure(self.dim, rng).density()
        if kind == "slit":
            t = self.state["transmissivities"]
            phi = self.state["phases"]
            if len(t) != self.dim:
                raise ValueError("slit parameters must have length dim")
            if max(t) > 1.0:
                raise ValueError("slit transmissivities must lie in [0, 1]")
            return slit_state(t, phi).density()
        raise ValueError(f"unknown state source {kind!r}")


@dataclass(frozen=True)
class TrialRecord:
    protocol: str
    total_shots: int
    trial: int
    infidelity: float
    iterations: int
    converged: bool
    final_log_likelihood: float
    stage1_infidelity: float | None = None
    estimate: dict | None = None

    def to_json(self) -> dict:
        out = {
            "protocol": self.protocol,
            "N": self.total_shots,
            "trial": self.trial,
            "infidelity": self.infidelity,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_log_likelihood": self.final_log_likelihood,
        }
        if self.stage1_infidelity is not None:
            out["stage1_infidelity"] = self.stage1_infidelity
        if self.estimate is not None:
            out["estimate"] = self.estimate
        return out


@dataclass(frozen=True)
class BenchCell:
    """Aggregate over the trials of one (protocol, N) grid point."""

    protocol: str
    dim: int
    total_shots: int
    trials: int
    mean_infidelity: float
    std_error: float
    gm_bound: float
    alpha_bound: float
    bounds_applicable: bool
    records: tuple


@dataclass(frozen=True)
class BenchReport:
    spec: dict
    spec_hash: str
    cells: tuple
    versions: dict
    proxy_infidelity_to_truth: float | None = None

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "versions": self.versions,
            "proxy_infidelity_to_truth": self.proxy_infidelity_to_truth,
            "cells": [
                {
                    "protocol": c.protocol,
                    "dim": c.dim,
                    "N": c.total_shots,
                    "trials": c.trials,
                    "mean_infidelity": c.mean_infidelity,
                    "std_error": c.std_error,
                    "gm_bound": c.gm_bound,
                    "alpha_bound": c.alpha_bound,
                    "bounds_applicable": c.bounds_applicable,
                    "records": [r.to_json() for r in c.records],
                }
                for c in self.cells
            ],
        }


def spec_hash(spec: ExperimentSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _run_trial(spec_dict: dict, protocol: str, total_shots: int, trial: int):
    """One tomography trial; top-level so process pools can dispatch it."""
    spec = ExperimentSpec.from_dict(spec_dict)
    rho_true = spec.resolve_state()
    cfg = ProtocolConfig(
        dim=spec.dim,
        total_shots=total_shots,
        split_fraction=spec.split_fraction,
        mle_options=spec.mle_options(),
        seed=spec.master_seed,
    )
    rng = derive_rng(spec.master_seed, _PROTOCOL_STREAM[protocol], total_shots, trial)
    try:
        run = run_protocol(protocol, rho_true, cfg, rng)
    except Exception as exc:
        raise RuntimeError(
            f"trial failed (protocol={protocol}, N={total_shots}, trial={trial}, "
            f"seed={spec.master_seed}): {exc}") from exc
    result = run.result
    record = TrialRecord(
        protocol=protocol,
        total_shots=total_shots,
        trial=trial,
        infidelity=infidelity(rho_true, result.estimate),
        iterations=result.iterations,
        converged=result.converged,
        final_log_likelihood=result.final_log_likelihood,
        stage1_infidelity=(None if result.stage1 is None
                           else infidelity(rho_true, result.stage1.estimate)),
        estimate=(density_matrix_to_json(result.estimate)
                  if spec.store_estimates else None),
    )
    pooled = None
    if spec.proxy_truth:
        pooled = [(bs.stacked, data.counts.ravel()) for data, bs in run.runs]
    return record, pooled


def run_experiment(spec: ExperimentSpec, workers: int = 1,
                   progress=None) -> BenchReport:
    """Execute the full grid and aggregate.

    ``workers`` > 1 distributes trials over processes; the report is
    byte-identical for any worker count. ``progress`` is an optional
    callable receiving (protocol, N) as each grid point completes.
    """
    spec_dict = spec.to_dict()
    rho_true = spec.resolve_state()
    tasks = [(protocol, n, t)
             for protocol in spec.protocols
             for n in spec.shot_grid
             for t in range(spec.trials)]

    outputs: dict[tuple, tuple] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {key: pool.submit(_run_trial, spec_dict, *key) for key in tasks}
            for key, fut in futures.items():
                outputs[key] = fut.result()
    else:
        for key in tasks:
            outputs[key] = _run_trial(spec_dict, *key)

    # Optional proxy benchmark: pool every recorded outcome across all
    # trials into one high-statistics estimate and score trials against it.
    truth_for_scoring = rho_true
    proxy_gap = None
    if spec.proxy_truth:
        rows = np.concatenate([r for _, pooled in outputs.values() for r, _ in pooled])
        counts = np.concatenate([c for _, pooled in outputs.values() for _, c in pooled])
        proxy = mle_core(rows, counts, spec.mle_options(), tag="proxy").estimate
        proxy_gap = infidelity(rho_true, proxy)
        truth_for_scoring = proxy
        rescored = {}
        for key, (record, pooled) in outputs.items():
            if record.estimate is None:
                raise ValueError("proxy_truth requires store_estimates")
            est = density_matrix_from_json(record.estimate)
            rescored[key] = (TrialRecord(
                protocol=record.protocol, total_shots=record.total_shots,
                trial=record.trial,
                infidelity=infidelity(truth_for_scoring, est),
                iterations=record.iterations, converged=record.converged,
                final_log_likelihood=record.final_log_likelihood,
                stage1_infidelity=record.stage1_infidelity,
                estimate=record.estimate), pooled)
        outputs = rescored

    full_rank = bool(np.linalg.eigvalsh(rho_true.matrix).min() > RANK_TOL)
    cells = []
    for protocol in spec.protocols:
        for n in spec.shot_grid:
            records = tuple(outputs[(protocol, n, t)][0] for t in range(spec.trials))
            vals = np.array([r.infidelity for r in records])
            mean = float(vals.mean())
            sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            cells.append(BenchCell(
                protocol=protocol,
                dim=spec.dim,
                total_shots=n,
                trials=spec.trials,
                mean_infidelity=mean,
                std_error=sd / math.sqrt(len(vals)),
                gm_bound=gill_massar_bound(spec.dim, n),
                alpha_bound=alpha(spec.dim) * gill_massar_bound(spec.dim, n),
                bounds_applicable=full_rank,
                records=records,
            ))
            if progress is not None:
                progress(protocol, n)

    from . import __version__
    return BenchReport(
        spec=spec_dict,
        spec_hash=spec_hash(spec),
        cells=tuple(cells),
        versions={"haqt": __version__, "numpy": np.__version__},
        proxy_infidelity_to_truth=proxy_gap,
    )


# --- emission -----------------------------------------------------------------


def _atomic_write(path: str, payload: str | bytes) -> None:
    """Write via a sibling temp file and rename, so interrupted runs leave
    no partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(payload, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-emit-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_csv(report: BenchReport) -> str:
    lines = ["protocol,dim,N,trials,mean_infidelity,std_error,gm_bound,alpha_bound"]
    for c in report.cells:
        lines.append(",".join([
            c.protocol, str(c.dim), str(c.total_shots), str(c.trials),
            repr(float(c.mean_infidelity)), repr(float(c.std_error)),
            repr(float(c.gm_bound)), repr(float(c.alpha_bound)),
        ]))
    return "\n".join(lines) + "\n"


def emit_report(report: BenchReport, out_dir, basename: str = "report") -> dict:
    """Write <basename>.csv / .json / .svg under ``out_dir`` atomically;
    returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, f"{basename}.csv"),
        "json": os.path.join(out_dir, f"{basename}.json"),
        "svg": os.path.join(out_dir, f"{basename}.svg"),
    }
    _atomic_write(paths["csv"], report_csv(report))
    _atomic_write(paths["json"],
                  json.dumps(report.to_json(), sort_keys=True, indent=1) + "\n")
    from .plotting import render_benchmark_svg
    _atomic_write(paths["svg"], render_benchmark_svg(report))
    return paths
