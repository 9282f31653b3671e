"""Command-line interface.

Subcommands: ``bases`` (construct and verify a minimal basis set),
``simulate`` (run a tomography protocol on a simulated ensemble),
``reconstruct`` (maximum-likelihood estimate from saved count files),
``fisher`` (information matrices and accuracy bounds) and ``bench``
(Monte Carlo benchmark from a spec file).

Every randomized command derives its streams from an explicit seed
(default ``123456789``) printed in the output, so published numbers are
regenerable. Exit codes: 0 success, 1 domain error, 2 usage or file
error.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .bases import basis_set_to_json, build_basis_set, verify_basis_set
from .bench import ExperimentSpec, emit_report, run_experiment, slit_state
from .estimator import MleOptions, TAG_HAQT_FINAL, TAG_SQT, mle_reconstruct_pooled
from .fisher import alpha, cfim_haqt, gill_massar_bound, qfim, save_matrix_csv
from .measurement import load_counts, save_counts
from .protocols import PROTOCOLS, ProtocolConfig, run_protocol
from .rng import derive_rng
from .states import (DensityMatrix, eigendecompose, infidelity, load_state,
                     random_full_rank, save_state)

DEFAULT_SEED = 123456789
_PROTOCOL_STREAM = {"sqt": 0, "haqt": 1}


def _echo_err(message: str) -> None:
    click.echo(message, err=True)


def _out_path(ctx, name: str, explicit) -> str:
    if explicit:
        return str(explicit)
    return os.path.join(ctx.obj["output_dir"], name)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


@click.group()
@click.version_option(version=__version__, prog_name="haqt")
@click.option("--seed", type=click.IntRange(min=0), default=DEFAULT_SEED,
              show_default=True, help="Master seed for all randomized commands.")
@click.option("--output-dir", type=click.Path(file_okay=False),
              default=lambda: os.environ.get("HAQT_OUTPUT_DIR", "."),
              help="Default directory for output files "
                   "(env: HAQT_OUTPUT_DIR).")
@click.option("-v", "--verbose", is_flag=True, help="Print progress details.")
@click.pass_context
def main(ctx, seed, output_dir, verbose):
    """Adaptive projective tomography for qudits."""
    os.makedirs(output_dir, exist_ok=True)
    ctx.obj = {"seed": seed, "output_dir": output_dir, "verbose": verbose}


@main.command()
@click.option("--dim", type=click.IntRange(min=2), required=True,
              help="Hilbert-space dimension d.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Basis-set JSON path [default: bases_d<dim>.json].")
@click.pass_context
def bases(ctx, dim, out):
    """Construct the minimal basis set and verify its structure."""
    bs = build_basis_set(dim)
    report = verify_basis_set(bs)
    path = _out_path(ctx, f"bases_d{dim}.json", out)
    _write_json(path, basis_set_to_json(bs))
    click.echo(f"wrote {len(bs)} bases for d={dim} to {path}")
    click.echo(report.summary())
    if not report.passed:
        sys.exit(1)


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _load_state_or_exit(path):
    try:
        return load_state(path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        _echo_err(f"cannot read state file {path}: {exc}")
        sys.exit(2)


def _resolve_state(ctx, dim, state, slit_t, slit_phi) -> DensityMatrix:
    if state is not None:
        rho = _load_state_or_exit(state)
        if rho.dim != dim:
            _echo_err(f"state file has dim {rho.dim}, expected {dim}")
            sys.exit(2)
        return rho
    if (slit_t is None) != (slit_phi is None):
        _echo_err("--slit-t and --slit-phi must be given together")
        sys.exit(2)
    if slit_t is not None:
        try:
            t, phi = _parse_floats(slit_t), _parse_floats(slit_phi)
        except ValueError:
            _echo_err("slit parameters must be comma-separated numbers")
            sys.exit(2)
        if len(t) != dim or len(phi) != dim:
            _echo_err(f"slit parameters must have length {dim}")
            sys.exit(2)
        return slit_state(t, phi).density()
    return random_full_rank(dim, derive_rng(ctx.obj["seed"], 0xD1CE))


@main.command()
@click.option("--dim", type=click.IntRange(min=2), required=True)
@click.option("--protocol", type=click.Choice(PROTOCOLS), required=True)
@click.option("--shots", type=click.IntRange(min=1), required=True,
              help="Total ensemble size N.")
@click.option("--trials", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--state", type=click.Path(exists=True, dir_okay=False), default=None,
              help="True-state JSON file [default: seeded random full-rank state].")
@click.option("--slit-t", default=None,
              help="Comma-separated slit transmissivities (with --slit-phi).")
@click.option("--slit-phi", default=None,
              help="Comma-separated slit phases in radians.")
@click.option("--split", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
              default=0.5, show_default=True, help="Stage-1 ensemble share (haqt).")
@click.option("--save-counts", "save_prefix", type=click.Path(), default=None,
              help="Write trial-0 count files under this path prefix.")
@click.option("--save-state", "save_state_path", type=click.Path(dir_okay=False),
              default=None, help="Write the true state used to this JSON file.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Result JSON path [default: simulate_<protocol>.json].")
@click.pass_context
def simulate(ctx, dim, protocol, shots, trials, state, slit_t, slit_phi, split,
             save_prefix, save_state_path, out):
    """Simulate a tomography protocol and report infidelities."""
    seed = ctx.obj["seed"]
    rho_true = _resolve_state(ctx, dim, state, slit_t, slit_phi)
    if save_state_path:
        save_state(rho_true, save_state_path)
    cfg = ProtocolConfig(dim=dim, total_shots=shots, split_fraction=split, seed=seed)

    entries = []
    infidelities = []
    try:
        for trial in range(trials):
            rng = derive_rng(seed, _PROTOCOL_STREAM[protocol], shots, trial)
            run = run_protocol(protocol, rho_true, cfg, rng)
            value = infidelity(rho_true, run.result.estimate)
            infidelities.append(value)
            entries.append({"trial": trial, "infidelity": value,
                            "result": run.result.to_json()})
            if ctx.obj["verbose"]:
                _echo_err(f"trial {trial}: infidelity {value:.6e}")
            if trial == 0 and save_prefix:
                if len(run.runs) == 1:
                    data, bs = run.runs[0]
                    save_counts(data, bs, f"{save_prefix}.csv",
                                f"{save_prefix}.json", seed=seed)
                else:
                    for stage, (data, bs) in enumerate(run.runs, start=1):
                        save_counts(data, bs, f"{save_prefix}-stage{stage}.csv",
                                    f"{save_prefix}-stage{stage}.json", seed=seed)
    except ValueError as exc:
        _echo_err(f"simulation failed: {exc}")
        sys.exit(1)

    payload = {
        "protocol": protocol,
        "dim": dim,
        "shots": shots,
        "seed": seed,
        "split_fraction": split,
        "mean_infidelity": float(np.mean(infidelities)),
        "median_infidelity": float(np.median(infidelities)),
        "trials": entries,
    }
    path = _out_path(ctx, f"simulate_{protocol}.json", out)
    _write_json(path, payload)
    click.echo(f"seed {seed}: {trials} trial(s), "
               f"median infidelity {payload['median_infidelity']:.6e}, "
               f"mean {payload['mean_infidelity']:.6e}")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--counts", "counts_paths", type=click.Path(exists=True, dir_okay=False),
              multiple=True, required=True,
              help="Counts CSV (sidecar JSON expected alongside); repeatable.")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Optional true-state JSON; prints the infidelity.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Estimate JSON path [default: reconstruct.json].")
@click.pass_context
def reconstruct(ctx, counts_paths, truth, out):
    """Maximum-likelihood reconstruction from saved count files."""
    runs = []
    for csv_path in counts_paths:
        sidecar = os.path.splitext(csv_path)[0] + ".json"
        if not os.path.exists(sidecar):
            _echo_err(f"missing sidecar {sidecar}")
            sys.exit(2)
        try:
            data, bs, _ = load_counts(csv_path, sidecar)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            _echo_err(f"cannot load counts {csv_path}: {exc}")
            sys.exit(2)
        runs.append((data, bs))

    adapted = len(runs) > 1 or np.max(
        np.abs(runs[0][1].frame - np.eye(runs[0][1].dim))) > 1e-12
    tag = TAG_HAQT_FINAL if adapted else TAG_SQT
    try:
        result = mle_reconstruct_pooled(runs, MleOptions(), tag=tag)
    except ValueError as exc:
        _echo_err(f"reconstruction failed: {exc}")
        sys.exit(1)

    path = _out_path(ctx, "reconstruct.json", out)
    _write_json(path, result.to_json())
    click.echo(f"reconstructed d={runs[0][0].dim} estimate "
               f"({result.iterations} iterations, converged={result.converged})")
    if truth:
        rho = _load_state_or_exit(truth)
        click.echo(f"infidelity to truth: {infidelity(rho, result.estimate):.6e}")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--dim", type=click.IntRange(min=2), required=True)
@click.option("--shots", type=click.IntRange(min=1), default=None,
              help="Ensemble size N for the bound values.")
@click.option("--state", type=click.Path(exists=True, dir_okay=False), default=None,
              help="State JSON; computes its information matrices.")
@click.option("--out-prefix", default=None,
              help="Write <prefix>_qfim.csv and <prefix>_cfim.csv.")
@click.pass_context
def fisher(ctx, dim, shots, state, out_prefix):
    """Accuracy bounds and Fisher information matrices."""
    click.echo(f"alpha = {alpha(dim):.6f}")
    if shots:
        click.echo(f"gm_bound = {gill_massar_bound(dim, shots):.6e}  (N = {shots})")
        click.echo(f"alpha_bound = {alpha(dim) * gill_massar_bound(dim, shots):.6e}")
    if state is None:
        return
    rho = _load_state_or_exit(state)
    if rho.dim != dim:
        _echo_err(f"state file has dim {rho.dim}, expected {dim}")
        sys.exit(2)
    try:
        eig = eigendecompose(rho)
        quantum = qfim(eig)
        aligned = DensityMatrix(dim, np.diag(eig.eigenvalues).astype(complex))
        classical = cfim_haqt(aligned, build_basis_set(dim))
    except ValueError as exc:
        _echo_err(str(exc))
        sys.exit(1)
    prefix = out_prefix or os.path.join(ctx.obj["output_dir"], f"fisher_d{dim}")
    save_matrix_csv(quantum, f"{prefix}_qfim.csv")
    save_matrix_csv(classical, f"{prefix}_cfim.csv")
    click.echo(f"wrote {prefix}_qfim.csv and {prefix}_cfim.csv "
               f"(eigenbasis coordinates)")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Benchmark spec JSON file.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Output directory [default: spec output_dir or --output-dir].")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes for trials.")
@click.option("--dry-run", is_flag=True, help="Validate the spec and exit.")
@click.pass_context
def bench(ctx, spec_path, out, workers, dry_run):
    """Run a Monte Carlo benchmark from a spec file."""
    try:
        with open(spec_path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _echo_err(f"cannot read spec {spec_path}: {exc}")
        sys.exit(2)
    try:
        spec = ExperimentSpec.from_dict(raw)
    except (TypeError, ValueError, KeyError) as exc:
        _echo_err(f"invalid spec: {exc}")
        sys.exit(2)

    click.echo(f"spec: d={spec.dim} protocols={list(spec.protocols)} "
               f"N={list(spec.shot_grid)} trials={spec.trials} "
               f"state={spec.state.get('type', 'random_full_rank')} "
               f"seed={spec.master_seed}")
    if dry_run:
        click.echo("spec OK (dry run)")
        return

    progress = None
    if ctx.obj["verbose"]:
        def progress(protocol, n):
            _echo_err(f"done: {protocol} N={n}")

    try:
        report = run_experiment(spec, workers=workers, progress=progress)
    except (RuntimeError, ValueError) as exc:
        _echo_err(f"benchmark failed: {exc}")
        sys.exit(1)
    out_dir = out or spec.output_dir or ctx.obj["output_dir"]
    paths = emit_report(report, out_dir)
    for kind in ("csv", "json", "svg"):
        click.echo(f"wrote {paths[kind]}")


if __name__ == "__main__":
    main()
