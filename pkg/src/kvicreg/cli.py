"""Command-line entry point: ``kvicreg {train,probe,gradcheck,export-config}``.

Exit codes: 0 success, 1 validation or check failure, 2 IO or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import __version__
from .config import ConfigError, default_config, dump_config, load_config
from .data import IdxFormatError
from .encoder import EncoderError
from .kernels import KINDS

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2

logger = logging.getLogger("kvicreg")


def _config(args):
    cfg = load_config(args.config) if args.config else default_config()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_train(args) -> int:
    from .trainer import train

    cfg = _config(args)
    result = train(cfg)
    last = result.rows[-1] if result.rows else None
    if last is not None:
        print(f"step {int(last[0])}: total {last[1]:.6g}  lambda_1 {last[7]:.6g}")
    print(f"wrote {cfg.output_dir}/metrics.csv, embeddings.csv, checkpoint.kvrg")
    return EXIT_OK


def cmd_probe(args) -> int:
    from .trainer import probe_checkpoint, write_probe

    cfg = _config(args)
    result = probe_checkpoint(cfg, args.checkpoint, cfg.seed)
    path = write_probe(result, cfg.output_dir)
    print(f"test accuracy {result['test_accuracy']:.4f} "
          f"(train {result['train_accuracy']:.4f}, n_test {result['n_test']}) -> {path}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .gradcheck import run_gradcheck

    kernels = [k for k in (s.strip() for s in args.kernels.split(",")) if k]
    unknown = [k for k in kernels if k not in KINDS and k not in ("poly", "rq")]
    if unknown:
        print(f"unknown kernel {unknown[0]!r}; choose from {', '.join(KINDS)}", file=sys.stderr)
        return EXIT_FAIL
    if args.tolerance < 0:
        print("tolerance must be >= 0", file=sys.stderr)
        return EXIT_FAIL
    passed, results = run_gradcheck(kernels, args.trials, args.tolerance, args.seed or 0)
    for r in results:
        status = "ok" if r.max_rel_error <= args.tolerance else "FAIL"
        print(f"{r.kernel:<20} max_rel_error {r.max_rel_error:.3e}  trials {r.trials}  "
              f"resampled {r.resampled}  {status}")
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_export_config(args) -> int:
    dump_config(default_config(), args.path)
    print(f"wrote {args.path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kvicreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="JSON config (defaults built in)")
        p.add_argument("--seed", type=int, metavar="N", help="override the config seed")
        p.add_argument("--out", metavar="DIR", help="override the config output_dir")

    p = sub.add_parser("train", help="run self-supervised training")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("probe", help="linear-probe a trained checkpoint")
    common(p)
    p.add_argument("--checkpoint", metavar="PATH", help="default: <output_dir>/checkpoint.kvrg")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("gradcheck", help="compare analytic gradients to finite differences")
    p.add_argument("--kernels", default=",".join(KINDS), help="comma-separated kernel kinds")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--seed", type=int, metavar="N")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("export-config", help="write the fully-defaulted config template")
    p.add_argument("path")
    p.set_defaults(func=cmd_export_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, IdxFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, EncoderError, RuntimeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
