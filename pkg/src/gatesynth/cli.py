"""Command-line front end.

synth run CONFIG...      optimize and write artifacts (exit 0 reached,
                         2 not reached, 1 config/runtime error)
synth validate CONFIG... parse and validate configs
synth spectrum CONFIG    write the initial schedule's drive spectrum and
                         annotated device resonances
synth gates list         list synthesizable gate names

Output directory precedence: --out, config output_dir, $SYNTH_OUTPUT_DIR,
./runs/<config stem>. With several configs and --out, each run lands in
its own <stem> subdirectory.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_config
from .errors import GateSynthError
from .experiment import (
    EXIT_ERROR,
    annotate_spectrum,
    resolve_output_dir,
    run_experiment,
    write_resonances_csv,
)
from .gates import GateName, build_gate
from .pulses import write_spectrum_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synth", description="Microwave pulse synthesis for transmon gates."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="optimize configs and write artifacts")
    run_p.add_argument("configs", nargs="+", help="YAML config files")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel runs")

    val_p = sub.add_parser("validate", help="check configs without running")
    val_p.add_argument("configs", nargs="+", help="YAML config files")

    spec_p = sub.add_parser("spectrum", help="drive spectrum and device resonances")
    spec_p.add_argument("config", help="YAML config file")
    spec_p.add_argument("--out", default=None, help="output directory")

    gates_p = sub.add_parser("gates", help="gate catalog")
    gates_p.add_argument("action", choices=["list"])
    return parser


def _run_out_dir(path: str, override, multi: bool) -> Path | None:
    if override is None:
        return None
    return Path(override) / Path(path).stem if multi else Path(override)


def _run_one(job: tuple[str, str | None]) -> tuple[str, int, str]:
    """Run one config; returns (path, status, message). Picklable for --jobs."""
    path, out_override = job
    try:
        config = load_config(path)
        out = resolve_output_dir(path, config, override=out_override)
        outcome = run_experiment(config, out)
    except GateSynthError as exc:
        return path, EXIT_ERROR, str(exc)
    verdict = "reached" if outcome.reached else "not reached"
    return (
        path,
        outcome.status,
        f"goal {outcome.final_goal:.3e} ({verdict}, threshold "
        f"{config.optimizer.goal_threshold:.3e}) -> {outcome.out_dir}",
    )


def _cmd_run(args) -> int:
    multi = len(args.configs) > 1
    jobs = [
        (path, None if args.out is None else str(_run_out_dir(path, args.out, multi)))
        for path in args.configs
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    status = 0
    for path, code, message in results:
        stream = sys.stderr if code == EXIT_ERROR else sys.stdout
        print(f"{path}: {message}", file=stream)
        status = max(status, code)
    return status


def _cmd_validate(args) -> int:
    status = 0
    for path in args.configs:
        try:
            config = load_config(path)
        except GateSynthError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            status = EXIT_ERROR
            continue
        print(f"{path}: ok ({config.target.value}, {config.device.n_transmons} transmon(s))")
    return status


def _cmd_spectrum(args) -> int:
    try:
        config = load_config(args.config)
        out = resolve_output_dir(args.config, config, override=args.out)
        out.mkdir(parents=True, exist_ok=True)
        schedule = config.build_schedule()
        write_spectrum_csv(out / "spectrum.csv", config.device, schedule)
        rows = annotate_spectrum(config.device, schedule)
        write_resonances_csv(out / "resonances.csv", rows)
    except GateSynthError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for f, label in rows:
        print(f"{f:10.6f} GHz  {label}")
    print(f"wrote {out / 'spectrum.csv'} and {out / 'resonances.csv'}")
    return 0


def _cmd_gates(_args) -> int:
    for name in GateName:
        target = build_gate(name)
        print(f"{name.value:13s} dim={target.dimension}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "spectrum": _cmd_spectrum,
        "gates": _cmd_gates,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
