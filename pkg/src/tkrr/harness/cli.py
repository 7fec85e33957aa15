"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvariantViolation, NumericalError, TkrrError
from ..estimators import fit_tkrr
from ..kernels import Gaussian, Sinc, TensorProduct
from .config import load_config
from .experiments import run_regression, run_selection_report, run_spectra

log = logging.getLogger("tkrr")

DEFAULT_OUT_DIR = "out"


def parse_kernel_string(text: str):
    """``"sinc:c=25"``, ``"gaussian:xi=25"`` or ``"gaussian:xi=25,d=2"``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"bad kernel parameter {item!r}; expected key=value")
        try:
            params[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"kernel parameter {key!r} is not a number") from exc
    d = params.pop("d", 1.0)
    if d != int(d) or d < 1:
        raise ConfigError("kernel dimension d must be a positive integer")
    try:
        if name == "sinc" and set(params) == {"c"}:
            base = Sinc(params["c"])
        elif name == "gaussian" and set(params) == {"xi"}:
            base = Gaussian(params["xi"])
        else:
            raise ConfigError(f"unrecognised kernel {text!r}; try sinc:c=<c> or gaussian:xi=<xi>[,d=<d>]")
        return base if d == 1 else TensorProduct(base, int(d))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def read_xy_csv(path, d: int):
    """Read a CSV with header ``x_1,...,x_d,y``."""
    want = [f"x_{i}" for i in range(1, d + 1)] + ["y"]
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read data {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != want:
        raise ConfigError(f"{path}: header must be {','.join(want)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != d + 1:
        raise ConfigError(f"{path}: expected at least one row of {d + 1} values")
    return data[:, :d], data[:, d]


def _overrides(args):
    return {"output_dir": args.out_dir, "realizations": args.realizations,
            "master_seed": args.seed, "workers": args.workers}


def cmd_experiment(args):
    cfg = load_config(args.config)
    ov = _overrides(args)
    cfg = cfg.with_overrides(**ov)
    if cfg.output_dir is None:
        cfg = cfg.with_overrides(output_dir=DEFAULT_OUT_DIR)
    if args.command == "spectra":
        if cfg.experiment != "spectra":
            raise ConfigError("spectra subcommand needs experiment = 'spectra'")
        run_spectra(cfg)
    elif args.command == "regress":
        if cfg.experiment != "regression":
            raise ConfigError("regress subcommand needs experiment = 'regression'")
        run_regression(cfg)
    else:
        run_selection_report(cfg)
    log.info("wrote results to %s", cfg.output_dir)


def cmd_fit(args):
    kernel = parse_kernel_string(args.kernel)
    x, y = read_xy_csv(args.data, kernel.dim)
    if not 1 <= args.n_trunc <= x.shape[0]:
        raise ConfigError(f"--n-trunc must lie in [1, {x.shape[0]}]")
    if not args.lam > 0:
        raise ConfigError("--lam must be positive")
    model = fit_tkrr(kernel, x, y, args.n_trunc, args.lam)
    out = {
        "kernel": args.kernel,
        "n": model.n,
        "n_trunc": model.n_trunc,
        "lambda": model.lam,
        "weights": model.weights.tolist(),
        "basis_points": model.basis_points.tolist(),
    }
    text = json.dumps(out, indent=2) + "\n"
    if args.out_dir is None:
        sys.stdout.write(text)
    else:
        path = Path(args.out_dir) / "fit.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        log.info("wrote %s", path)


def build_parser():
    p = argparse.ArgumentParser(prog="tkrr", description="Truncated kernel ridge regression experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="output directory (overrides config)")

    for name, help_ in (("spectra", "Gram-matrix spectra versus the operator spectrum"),
                        ("regress", "empirical risk table"),
                        ("select", "selected truncation order and ridge parameter per sigma")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--realizations", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        sp.add_argument("--workers", type=int, default=None, help="threads over realizations")
        sp.set_defaults(func=cmd_experiment)

    fp = sub.add_parser("fit", parents=[common], help="fit TKRR to a CSV with columns x_1..x_d,y")
    fp.add_argument("--kernel", required=True, help="e.g. sinc:c=25 or gaussian:xi=25,d=2")
    fp.add_argument("--data", required=True)
    fp.add_argument("--n-trunc", type=int, required=True)
    fp.add_argument("--lam", type=float, required=True)
    fp.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except InvariantViolation as exc:
        log.error("invariant violated: %s", exc)
        return 3
    except (NumericalError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return 2
    except TkrrError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except ValueError as exc:
        # library-level argument validation: treat as a bad configuration
        log.error("config error: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
