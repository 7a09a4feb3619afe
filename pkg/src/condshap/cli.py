"""Command-line entry point: ``condshap run | init-config | explain``."""

import argparse
import json
import logging
import sys

from .config import CONFIG_TEMPLATE, load_config
from .errors import CondShapError, ConfigError, PipelineError

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 1, 2


def _fail(code, kind, message, stage=None):
    payload = {"error": kind, "message": message}
    if stage:
        payload["stage"] = stage
    print(json.dumps(payload), file=sys.stderr)
    return code


def _cmd_run(args):
    from .runner import run_experiment

    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    result = run_experiment(config, out_dir=args.out, threads=args.threads)
    rep = result.report
    for m in rep.ordered_methods():
        print(f"{m:>20s}  MAE {rep.overall_mae[m]:.4f}  "
              f"rho(MAE, distance) {rep.corr_mae_distance[m]:+.3f}")
    print(f"outputs written to {args.out or config.output_dir}")
    return EXIT_OK


def _cmd_init(args):
    with open(args.out, "w") as fh:
        fh.write(CONFIG_TEMPLATE)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_explain(args):
    from .runner import explain_single

    config = load_config(args.config)
    exp = explain_single(config, args.obs, args.method)
    print(json.dumps(exp.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="condshap", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log pipeline stages")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full benchmark")
    run.add_argument("--config", required=True)
    run.add_argument("--threads", type=int, default=None, help="worker threads (default: cores)")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--out", default=None, help="output directory (default: from config)")
    run.set_defaults(func=_cmd_run)

    init = sub.add_parser("init-config", help="write a commented default configuration")
    init.add_argument("--out", required=True)
    init.set_defaults(func=_cmd_init)

    ex = sub.add_parser("explain", help="explain one test observation, JSON to stdout")
    ex.add_argument("--config", required=True)
    ex.add_argument("--obs", type=int, required=True, help="test observation index")
    ex.add_argument("--method", required=True, help="configured estimator name or 'truth'")
    ex.set_defaults(func=_cmd_explain)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except PipelineError as exc:
        if isinstance(exc.cause, ConfigError):
            return _fail(EXIT_CONFIG, "config", str(exc.cause), exc.stage)
        return _fail(EXIT_PIPELINE, "pipeline", str(exc), exc.stage)
    except (CondShapError, OSError) as exc:
        return _fail(EXIT_PIPELINE, "pipeline", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
