import argparse
import sys
from dataclasses import fields

from tqdm import tqdm

from .detectors import available
from .errors import ConfigError
from .harness import ExperimentConfig, SerResult, load_config, run_experiment, write_results
from .logger import configure_logging, logger


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="python -m src.main", description="MIMO detection under hardware impairments")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo SER experiment")
    sim.add_argument("--config", help="key = value configuration file")
    sim.add_argument("--log-level", default="INFO", help="DEBUG, INFO, WARNING or ERROR")
    sim.add_argument("--no-progress", action="store_true", help="hide the progress bar")
    for f in fields(ExperimentConfig):
        # Values stay strings here; load_config parses them like file entries.
        sim.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, metavar="VALUE", help=f.metadata.get("help"))

    sub.add_parser("detectors", help="list registered detectors")
    return ap


def simulate(args: argparse.Namespace) -> SerResult:
    configure_logging(args.log_level)
    overrides = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)}
    cfg = load_config(args.config, overrides=overrides)
    logger.info(
        f"{cfg.scenario} scenario, {cfg.nt}x{cfg.nr}, {cfg.frames} frames x {len(cfg.snr_db)} SNR points, seed {cfg.seed}"
    )
    with tqdm(total=cfg.frames * len(cfg.snr_db), unit="frame", disable=args.no_progress) as bar:
        result = run_experiment(cfg, progress=bar.update)
    if cfg.out:
        path = write_results(result, cfg.out, cfg.format)
        logger.info(f"results written to {path}")
    print_table(result)
    return result


def print_table(result: SerResult) -> None:
    print(f"{'snr_db':>8} " + " ".join(f"{name:>14}" for name in result.detectors))
    for snr in result.snr_points:
        print(f"{snr:>8g} " + " ".join(f"{result.ser(name, snr):>14.4e}" for name in result.detectors))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "detectors":
            for name in available():
                print(name)
        else:
            simulate(args)
    except ConfigError as e:
        print(f"[config error] {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as e:
        logger.exception("simulation failed")
        print(f"[error] {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
