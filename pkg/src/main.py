"""
Command-line entry point: ``python -m src.main <command> [options]``.

Every command writes its tables under ``--out`` next to ``<command>.manifest.json``,
which records the resolved options and the SHA-256 of each output so that
``replay`` can rerun it and check the result byte for byte.
"""
import functools
import os
from dataclasses import replace
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import click
import pandas as pd

from src import config
from src.commands import (
    SIMULATE_COLUMNS, SIMULATE_QUANTITIES, cmd_capacity, cmd_energy, cmd_outage, cmd_simulate, cmd_verify,
)
from src.logger.logger import MyLogger
from src.model.capacity import SEARCH_KINDS
from src.model.energy import ENERGY_FORMULAS, ENERGY_MODES
from src.model.errors import ReplicationError
from src.model.params import NetworkScenario, SchemeConfig
from src.model.parsing import load_scenario
from src.reporting.hashing import sha256_file
from src.reporting.manifest import RunManifest, load_manifest, manifest_filename, verify_outputs, write_manifest
from src.reporting.tables import records_frame, write_csv, write_json, write_text
from src.verification.suites import LEVELS

logger = MyLogger(config.LOG_NAME)

FOUR_COPY_SCHEMES = ("DT", "RT(4)", "CT(3)", "HT(1,1,3)")
LINK_OUTAGE_GRID = tuple(round(i / 100, 2) for i in range(0, 101))
_U64_MAX = (1 << 64) - 1


def _formula_name(cli_value: Optional[str]) -> Optional[str]:
    return None if cli_value is None else cli_value.replace("-", "_")


def common_options(func):
    """Options shared by every run command."""
    options = [
        click.option("--scenario", "scenario_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Scenario JSON file (default: the shipped scenario)."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=config.OUTPUT_DIR,
                     show_default=True, help="Directory for the data files and the manifest."),
        click.option("--seed", type=click.IntRange(0, _U64_MAX), default=config.DEFAULT_SEED, show_default=True),
        click.option("--threads", type=click.IntRange(min=1), default=config.DEFAULT_THREADS, show_default=True),
        click.option("--theta-linear", is_flag=True, default=False,
                     help="Interpret the scenario's SIR threshold as a linear ratio instead of dB."),
        click.option("--energy-formula", type=click.Choice(["literal", "charge-balance"]), default=None,
                     help="Energy accounting (default: both)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Turn domain errors into a click error message and a non-zero exit."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ReplicationError as e:
            logger.error(f"{type(e).__name__}: {e}", exc_info=True)
            raise click.ClickException(str(e))
    return wrapper


def _prepare(scenario_path: Optional[str], theta_linear: bool) -> Tuple[NetworkScenario, Optional[str], Optional[str]]:
    path = scenario_path
    if path is None and os.path.isfile(config.DEFAULT_SCENARIO_PATH):
        path = config.DEFAULT_SCENARIO_PATH
    scenario = load_scenario(path)
    if theta_linear:
        scenario = replace(scenario, theta_linear=True)
    if path is None:
        return scenario, None, None
    path = os.path.abspath(path)
    return scenario, path, sha256_file(path)


def _open_run(command: str, scenario_path: Optional[str], scenario_sha256: Optional[str], seed: int,
              parameters: Dict[str, Any]) -> RunManifest:
    return RunManifest(command=command, scenario_path=scenario_path, scenario_sha256=scenario_sha256,
                       parameters=parameters, seed=seed)


def _stamp_frame(frame: pd.DataFrame, run: RunManifest) -> pd.DataFrame:
    """Append the columns that tie every row to the manifest of its run."""
    return frame.assign(manifest=manifest_filename(run.command), run_id=run.run_id)


def _stamp_document(document: Dict[str, Any], run: RunManifest) -> Dict[str, Any]:
    return {**document, "manifest": manifest_filename(run.command), "run_id": run.run_id}


def _finish(run: RunManifest, out_dir: str, outputs: List[str]) -> None:
    write_manifest(run.with_outputs(out_dir, outputs), out_dir)
    for name in outputs:
        click.echo(os.path.join(out_dir, name))


def _common_parameters(threads: int, theta_linear: bool, energy_formula: Optional[str]) -> Dict[str, Any]:
    return {"threads": threads, "theta_linear": theta_linear, "energy_formula": energy_formula}


@click.group()
def cli():
    """Outage, capacity and lifetime analysis of LoRaWAN message replication."""
    logger.setLevel(config.LOG_LEVEL)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    logger.set_log_file(os.path.join(config.LOGS_DIR, f"run_{timestamp}.log"))


@cli.command()
@common_options
@click.option("--sf", type=int, default=7, show_default=True)
@click.option("--scheme", "schemes", multiple=True, help="DT, RT(m), CT(n) or HT(m,n,r); repeatable.")
@click.option("--link-outage", "link_outages", type=click.FloatRange(0.0, 1.0), multiple=True,
              help="Link outage grid point; repeatable (default 0, 0.01, ..., 1).")
@click.option("--devices", "device_counts", type=click.FloatRange(min=0.0), multiple=True,
              help="Average device count of the SF; sweeps these instead of a link-outage grid.")
@click.option("--optimal", "optimal_kinds", type=click.Choice(SEARCH_KINDS), multiple=True,
              help="Add the lowest-outage configuration of this kind at each device count.")
@click.option("--m-cap", type=click.IntRange(min=1), default=None)
@handle_errors
def outage(scenario_path, out_dir, seed, threads, theta_linear, energy_formula,
           sf, schemes, link_outages, device_counts, optimal_kinds, m_cap):
    """Final outage per scheme over a link-outage grid or a device-count sweep."""
    scenario, path, digest = _prepare(scenario_path, theta_linear)
    parsed = [SchemeConfig.parse(text) for text in schemes]
    if not parsed and not optimal_kinds:
        parsed = [SchemeConfig.parse(text) for text in FOUR_COPY_SCHEMES]
    grid = list(link_outages) if link_outages or device_counts else list(LINK_OUTAGE_GRID)

    parameters = {**_common_parameters(threads, theta_linear, energy_formula), "sf": sf,
                  "scheme": [s.label for s in parsed], "link_outage": grid, "devices": list(device_counts),
                  "optimal": list(optimal_kinds), "m_cap": m_cap}
    run = _open_run("outage", path, digest, seed, parameters)

    frame = cmd_outage(scenario, sf, parsed, grid, list(device_counts), list(optimal_kinds), m_cap)
    write_csv(_stamp_frame(frame, run), os.path.join(out_dir, "outage.csv"))
    _finish(run, out_dir, ["outage.csv"])


@cli.command()
@common_options
@click.option("--sf", "sfs", type=int, multiple=True, help="Spreading factor; repeatable (default: all).")
@click.option("--target", "targets", type=float, multiple=True,
              help="Reliability target; repeatable (default: the scenario's).")
@click.option("--kind", "kinds", type=click.Choice(SEARCH_KINDS), multiple=True,
              help="Scheme family to optimise; repeatable (default: all).")
@click.option("--m-cap", type=click.IntRange(min=1), default=None)
@handle_errors
def capacity(scenario_path, out_dir, seed, threads, theta_linear, energy_formula, sfs, targets, kinds, m_cap):
    """Optimal configuration and supported devices per SF, kind and target."""
    scenario, path, digest = _prepare(scenario_path, theta_linear)
    sfs = list(sfs) or list(scenario.sfs)
    targets = list(targets) or list(scenario.targets)
    kinds = list(kinds) or list(SEARCH_KINDS)

    parameters = {**_common_parameters(threads, theta_linear, energy_formula), "sf": sfs, "target": targets,
                  "kind": kinds, "m_cap": m_cap}
    run = _open_run("capacity", path, digest, seed, parameters)

    frame = cmd_capacity(scenario, sfs, targets, kinds, m_cap, threads)
    write_csv(_stamp_frame(frame, run), os.path.join(out_dir, "capacity.csv"))
    _finish(run, out_dir, ["capacity.csv"])


@cli.command()
@common_options
@click.option("--sf", "sfs", type=int, multiple=True, help="Spreading factor; repeatable (default: all).")
@click.option("--copies", type=click.IntRange(min=1), multiple=True,
              help="Copies per period; repeatable (default: 1 to the copy cap).")
@click.option("--mode", "modes", type=click.Choice(ENERGY_MODES), multiple=True,
              help="Protocol; repeatable (default: both).")
@click.option("--battery-mah", type=click.FloatRange(min=0.0, min_open=True), default=None)
@handle_errors
def energy(scenario_path, out_dir, seed, threads, theta_linear, energy_formula, sfs, copies, modes, battery_mah):
    """Average current and battery lifetime for default and modified protocols."""
    scenario, path, digest = _prepare(scenario_path, theta_linear)
    sfs = list(sfs) or list(scenario.sfs)
    copies = list(copies) or list(range(1, scenario.copy_cap + 1))
    modes = list(modes) or list(ENERGY_MODES)
    formula = _formula_name(energy_formula)
    formulas = [formula] if formula else list(ENERGY_FORMULAS)

    parameters = {**_common_parameters(threads, theta_linear, energy_formula), "sf": sfs, "copies": copies,
                  "mode": modes, "battery_mah": battery_mah}
    run = _open_run("energy", path, digest, seed, parameters)

    frame = cmd_energy(scenario, sfs, copies, modes, formulas, battery_mah)
    write_csv(_stamp_frame(frame, run), os.path.join(out_dir, "energy.csv"))
    _finish(run, out_dir, ["energy.csv"])


@cli.command()
@common_options
@click.option("--sf", type=int, default=7, show_default=True)
@click.option("--distance", "distances", type=click.FloatRange(min=0.0, min_open=True), multiple=True,
              help="Distance d1 in metres; repeatable (default: the cell radius).")
@click.option("--devices", "device_counts", type=click.FloatRange(min=0.0), multiple=True,
              help="Average device count of the SF; repeatable (default 100).")
@click.option("--copies", type=click.IntRange(min=1), multiple=True, help="Copies M; repeatable (default 1).")
@click.option("--trials", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--quantity", "quantities", type=click.Choice(SIMULATE_QUANTITIES), multiple=True,
              help="Estimated probability; repeatable (default: all).")
@handle_errors
def simulate(scenario_path, out_dir, seed, threads, theta_linear, energy_formula,
             sf, distances, device_counts, copies, trials, quantities):
    """Monte Carlo estimates of H1, Q and O_M next to their closed forms."""
    scenario, path, digest = _prepare(scenario_path, theta_linear)
    distances = list(distances) or [scenario.radius_m]
    device_counts = list(device_counts) or [100.0]
    copies = list(copies) or [1]
    quantities = list(quantities) or list(SIMULATE_QUANTITIES)

    parameters = {**_common_parameters(threads, theta_linear, energy_formula), "sf": sf, "distance": distances,
                  "devices": device_counts, "copies": copies, "trials": trials, "quantity": quantities}
    run = _open_run("simulate", path, digest, seed, parameters)

    records = cmd_simulate(scenario, sf, distances, device_counts, copies, trials, seed, quantities, threads)
    write_json(_stamp_document({"records": records}, run), os.path.join(out_dir, "simulate.json"))
    write_csv(_stamp_frame(records_frame(records, SIMULATE_COLUMNS), run), os.path.join(out_dir, "simulate.csv"))
    _finish(run, out_dir, ["simulate.csv", "simulate.json"])


@cli.command()
@common_options
@click.option("--level", "levels", type=click.Choice(LEVELS), multiple=True,
              help="Suite to run; repeatable (default: all).")
@click.option("--trials", type=click.IntRange(min=1), default=1_000_000, show_default=True,
              help="Trials per Monte Carlo point.")
@handle_errors
def verify(scenario_path, out_dir, seed, threads, theta_linear, energy_formula, levels, trials):
    """Run the agreement suites; exits non-zero naming the first failing check."""
    scenario, path, digest = _prepare(scenario_path, theta_linear)
    levels = list(levels) or list(LEVELS)

    parameters = {**_common_parameters(threads, theta_linear, energy_formula), "level": levels, "trials": trials}
    run = _open_run("verify", path, digest, seed, parameters)

    report = cmd_verify(scenario, levels, seed, trials, threads)
    write_json(_stamp_document(report.as_dict(), run), os.path.join(out_dir, "verify.json"))
    write_text(f"{report.render()}\nmanifest: {manifest_filename(run.command)} (run {run.run_id})",
               os.path.join(out_dir, "verify.txt"))
    _finish(run, out_dir, ["verify.json", "verify.txt"])
    click.echo(report.render())
    if not report.passed:
        raise click.ClickException(f"Verification failed at '{report.first_failure.name}'")


@cli.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for the rerun (default: the manifest's directory).")
@handle_errors
def replay(manifest_path, out_dir):
    """Rerun the command recorded in a manifest and check its outputs byte for byte."""
    ACTION = f"Replay {manifest_path}"
    logger.start(ACTION)
    try:
        recorded = load_manifest(manifest_path)
        target_dir = out_dir or os.path.dirname(os.path.abspath(manifest_path))
        if recorded.scenario_path is not None and os.path.isfile(recorded.scenario_path) \
                and sha256_file(recorded.scenario_path) != recorded.scenario_sha256:
            logger.warning(f"Scenario {recorded.scenario_path} changed since the recorded run")

        argv = recorded.to_argv() + ["--out", target_dir]
        logger.info(f"Running: {' '.join(argv)}")
        cli.main(args=argv, standalone_mode=False)

        mismatched = verify_outputs(recorded, target_dir)
        if mismatched:
            raise click.ClickException(f"Replay differs from the recorded run in {', '.join(mismatched)}")
        click.echo(f"Replay matches {len(recorded.outputs)} recorded outputs")
    finally:
        logger.close(ACTION)


if __name__ == "__main__":
    cli()
