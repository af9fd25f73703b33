"""
Command-Line Surface

    python main.py <subcommand> --config run.yaml [--out DIR] [--threads N] [--seed S] [--verbose]

Subcommands:
    spectrum    level structure and circuit quantities at the flux point
    onetone     steady-state transmission over drive frequency and power
    saturation  output power against input power on resonance
    twotone     probe transmission over probe frequency and pump power
    powermap    probe output over probe and pump power
    diagram     probe transmission over both drive frequencies, with line overlay
    fit         Lorentzian and flux-arc fits
    serve       HTTP service (uvicorn main:app)

Exit codes: 0 ok, 1 config error, 2 solver failure, 3 I/O error. Flagged
cells are not fatal; they are counted in the manifest.

With --threads above 1 the cells of a scan are spread over a pool of
SolverAgents, each backed by its own worker process; the maps are
identical to a serial run.
"""

import argparse
import asyncio
import logging
import sys
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import AsyncIterator, Callable, Dict, List, Optional

import numpy as np

from agents.analysis_agent import derived_report, level_spectrum, spectrum_report
from agents.pool import solver_pool
from cli import output
from cli.config import (
    REQUIRED_KEYS,
    ConfigError,
    RunConfig,
    check_subcommand,
    config_hash,
    dump_config,
    parse_config,
)
from core.config import get_settings
from core.event_bus import Event, EventBus, EventType
from simulation import __version__, circuit, fit, spectroscopy
from simulation.errors import NoPeakFoundError, SimulationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = "INFO"):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT, force=True)


@asynccontextmanager
async def scan_runner(threads: int) -> AsyncIterator[Optional[spectroscopy.CellRunner]]:
    if threads <= 1:
        yield spectroscopy.SerialRunner()
        return
    async with solver_pool(threads) as runner:
        yield runner


# ==================== SUBCOMMANDS ====================

class RunContext:
    """What a subcommand needs: config, output directory, runner, bus, manifest."""

    def __init__(self, config: RunConfig, out_dir: Path, runner, event_bus: EventBus, manifest: output.RunManifest):
        self.config = config
        self.out_dir = out_dir
        self.runner = runner
        self.event_bus = event_bus
        self.manifest = manifest

    def write(self, result, name: str) -> Path:
        path = output.write_csv(result, self.out_dir / name)
        self.manifest.add_file(path)
        return path

    def write_rows(self, name: str, fieldnames, rows) -> Path:
        path = output.write_rows(self.out_dir / name, fieldnames, rows)
        self.manifest.add_file(path)
        return path


async def run_spectrum(ctx: RunContext):
    config = ctx.config
    report = spectrum_report(config.circuit, n_levels=4, charge_cutoff=config.solver.charge_cutoff)
    rows = [
        {
            "level": n,
            "exact_GHz": report["exact"]["relative_GHz"][n],
            "asymptotic_GHz": report["asymptotic"]["relative_GHz"][n],
            "kerr_GHz": report["kerr"]["relative_GHz"][n],
        }
        for n in range(4)
    ]
    ctx.write_rows("spectrum.csv", ["level", "exact_GHz", "asymptotic_GHz", "kerr_GHz"], rows)

    derived = derived_report(config.circuit)
    ctx.write_rows("derived.csv", list(derived), [derived])
    ctx.manifest.summary.update({
        "f01_GHz": report["f01_GHz"],
        "f12_GHz": report["f12_GHz"],
        "charge_dispersion_GHz": report["charge_dispersion_GHz"],
    })


async def run_onetone(ctx: RunContext):
    config = ctx.config
    result = await spectroscopy.one_tone_map(
        config.circuit,
        config.scan.f1_GHz.values(),
        config.scan.P1_aW.values(),
        config.solver,
        ctx.runner,
        ctx.event_bus,
    )
    ctx.write(result, "onetone.csv")
    if result.grid.shape[0] == 1:
        ctx.write(output.trace_from_scan(result), "trace.csv")


async def run_saturation(ctx: RunContext):
    config = ctx.config
    curve = await spectroscopy.saturation_curve(
        config.circuit,
        config.scan.P1_aW.values(),
        config.drive.f1_GHz,
        config.solver,
        ctx.runner,
        ctx.event_bus,
    )
    ctx.write(curve.to_result(), "saturation.csv")
    ctx.manifest.summary.update({
        "f_GHz": curve.f_GHz,
        "linear_slope": curve.linear_slope,
        "plateau_aW": curve.plateau_aW,
        "plateau_kappa_c_hf": curve.plateau_units,
        "plateau_spread": curve.plateau_spread,
    })


async def run_twotone(ctx: RunContext):
    config = ctx.config
    f01, _ = circuit.resonance_frequencies(config.circuit)
    f1 = config.drive.f1_GHz if config.drive.f1_GHz is not None else f01
    result = await spectroscopy.two_tone_map(
        config.circuit,
        f1,
        config.scan.P1_aW.values(),
        config.scan.f2_GHz.values(),
        config.drive.P2_aW,
        config.solver,
        ctx.runner,
        ctx.event_bus,
        same_frequency=config.drive.same_frequency,
    )
    ctx.write(result, "twotone.csv")

    splittings = spectroscopy.autler_townes_splitting(result, config.solver.prominence_fraction)
    ctx.write_rows(
        "splitting.csv",
        ["P1_aW", "splitting_GHz"],
        [{"P1_aW": P1, "splitting_GHz": s} for P1, s in splittings],
    )

    try:
        kerr = fit.extract_kerr(result, f01, config.solver.prominence_fraction, config.circuit.Ec_GHz)
    except NoPeakFoundError as e:
        logger.warning(f"Kerr extraction skipped: {e}")
        ctx.manifest.summary["kerr"] = str(e)
        return
    ctx.write(kerr, "kerr.csv")
    ctx.manifest.summary.update({"Ec_from_peak_GHz": kerr.params["Ec"], "f_peak_GHz": kerr.extras["f_peak_GHz"]})


async def run_powermap(ctx: RunContext):
    config = ctx.config
    result = await spectroscopy.power_power_map(
        config.circuit,
        config.scan.P1_aW.values(),
        config.scan.P2_aW.values(),
        config.drive.f1_GHz,
        config.drive.f2_GHz,
        config.solver,
        ctx.runner,
        ctx.event_bus,
    )
    ctx.write(result, "powermap.csv")
    for key in ("f1_GHz", "f2_GHz", "peak_P_out_aW", "peak_P1_aW", "peak_P2_aW", "rollover"):
        if key in result.meta:
            ctx.manifest.summary[key] = result.meta[key]


async def run_diagram(ctx: RunContext):
    config = ctx.config
    f1_values = config.scan.f1_GHz.values()
    f2_values = config.scan.f2_GHz.values()
    result = await spectroscopy.energy_diagram(
        config.circuit,
        f1_values,
        f2_values,
        config.drive.P1_aW,
        config.drive.P2_aW,
        config.solver,
        ctx.runner,
        ctx.event_bus,
        same_frequency=config.drive.same_frequency,
    )
    ctx.write(result, "diagram.csv")

    window = (min(f1_values + f2_values), max(f1_values + f2_values))
    levels = level_spectrum(config.circuit, config.scan.levels_method, n_levels=4,
                            charge_cutoff=config.solver.charge_cutoff)
    lines = spectroscopy.conservation_lines(levels, window)
    ctx.write(lines, "lines.csv")

    features = spectroscopy.detect_features(result, "peak", config.solver.prominence_fraction)
    ctx.write_rows("features.csv", ["x", "y", "prominence"], [f.to_dict() for f in features])
    ctx.manifest.summary["features"] = len(features)


async def run_fit(ctx: RunContext):
    config = ctx.config
    block = config.fit
    trace = None
    if block.trace is not None:
        trace = output.read_trace(block.trace)
    elif block.synthetic is not None:
        p = config.circuit
        f01, _ = circuit.resonance_frequencies(p)
        span = block.synthetic.span_GHz
        trace = fit.synthetic_trace(
            np.linspace(f01 - span, f01 + span, block.synthetic.num),
            f01, p.kappa_c_MHz, p.kappa_i_MHz, block.kind,
            noise=block.synthetic.noise, seed=config.seed,
        )
        ctx.write(trace, "trace.csv")

    if trace is not None:
        result = fit.fit_lorentzian(trace, block.kind, block.free_scale, block.kappa_i_fixed_MHz)
        ctx.write(result, "fit.csv")
        ctx.manifest.add_file(output.write_fit_report(result, ctx.out_dir / "fit.txt"))
        ctx.manifest.summary.update({name: result.params[name] for name in ("f01", "kappa_c", "kappa_i")})

    if block.flux_points:
        arc = fit.fit_flux_arc(block.flux_points, block.Ec_fixed_GHz, block.fit_asymmetry)
        ctx.write(arc, "flux_arc.csv")
        ctx.manifest.add_file(output.write_fit_report(arc, ctx.out_dir / "flux_arc.txt"))
        ctx.manifest.summary.update({f"arc_{name}": value for name, value in arc.params.items()})


SUBCOMMANDS: Dict[str, Callable[[RunContext], object]] = {
    "spectrum": run_spectrum,
    "onetone": run_onetone,
    "saturation": run_saturation,
    "twotone": run_twotone,
    "powermap": run_powermap,
    "diagram": run_diagram,
    "fit": run_fit,
}

HELP = {
    "spectrum": "level structure and circuit quantities at the flux point",
    "onetone": "steady-state transmission over drive frequency and power",
    "saturation": "output power against input power on resonance",
    "twotone": "probe transmission over probe frequency and pump power",
    "powermap": "probe output over probe and pump power",
    "diagram": "probe transmission over both drive frequencies",
    "fit": "Lorentzian and flux-arc fits",
}


async def run_subcommand(
    name: str,
    config: RunConfig,
    out_dir: Path,
    threads: int = 1,
    event_bus: Optional[EventBus] = None,
) -> output.RunManifest:
    """
    Run one subcommand and write its data files, the echo config and the
    manifest into out_dir. Raises ConfigError, SimulationError or OSError.
    """
    if name not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {name!r}")
    check_subcommand(config, name)

    event_bus = event_bus or EventBus()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = output.RunManifest(
        subcommand=name,
        config_hash=config_hash(config, __version__),
        version=__version__,
        started=datetime.now(timezone.utc).isoformat(),
    )

    failed_cells: List[Event] = []
    unsubscribe = event_bus.subscribe(EventType.CELL_FAILED, failed_cells.append)
    logger.info(f"Running {name} into {out_dir} with {threads} thread(s)")
    try:
        async with scan_runner(threads) as runner:
            ctx = RunContext(config, out_dir, runner, event_bus, manifest)
            await SUBCOMMANDS[name](ctx)
    finally:
        unsubscribe()

    manifest.failures = len(failed_cells)
    if config.output.echo_config:
        echo = out_dir / "config_echo.yaml"
        echo.write_text(dump_config(config), encoding="utf-8")
        manifest.add_file(echo)
    manifest.finished = datetime.now(timezone.utc).isoformat()
    manifest.files.append("manifest.json")
    output.write_manifest(manifest, out_dir / "manifest.json")
    if manifest.failures:
        logger.warning(f"{name}: {manifest.failures} cells flagged")
    return manifest


# ==================== ENTRY POINT ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjres",
        description="Single-junction resonator simulator: spectra, drive maps and fits",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in REQUIRED_KEYS:
        sub = subparsers.add_parser(name, help=HELP[name])
        sub.add_argument("--config", required=True, type=Path, help="YAML run config")
        sub.add_argument("--out", type=Path, default=None, help="output directory")
        sub.add_argument("--threads", type=int, default=None, help="solver agents in the pool, one worker process each")
        sub.add_argument("--seed", type=int, default=None, help="override the config seed")
        sub.add_argument("--verbose", action="store_true", help="debug logging")

    serve = subparsers.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--verbose", action="store_true")
    return parser


def serve(host: str, port: int, log_level: str) -> int:
    import uvicorn

    uvicorn.run("main:app", host=host, port=port, log_level=log_level.lower())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    args = build_parser().parse_args(argv)
    level = "DEBUG" if args.verbose else settings.log_level
    setup_logging(level)

    if args.command == "serve":
        return serve(args.host or settings.host, args.port or settings.port, level)

    try:
        config = parse_config(args.config)
        if args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG

    out_dir = args.out or config.output.directory or settings.output_dir
    threads = args.threads if args.threads is not None else settings.threads

    try:
        manifest = asyncio.run(run_subcommand(args.command, config, out_dir, threads))
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except SimulationError as e:
        logger.error(f"Solver failure: {type(e).__name__}: {e}")
        return EXIT_SOLVER
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO

    logger.info(f"{args.command} done: {len(manifest.files)} files, {manifest.failures} flagged cells")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
