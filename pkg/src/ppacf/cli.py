"""Command-line interface.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
degeneracy (e.g. a bin with zero mean count). ``--json-errors`` writes a
machine-readable error object to stderr as well.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field

from .acf import DEFAULT_FLOOR, autocorrelogram
from .bounds import DEFAULT_MC_DRAWS, attach_bounds
from .core import Region, bin_series, make_bin_grid
from .errors import ConfigError, InvalidArgumentError, NumericalError, PPACFError
from .experiment import run_experiment
from .figure import emit_figure
from .fileio import _open, read_events, write_autocorrelogram, write_events
from .latent import FAMILIES, LatentModelSpec
from .lgcp import SimulationDesign, default_basis, simulate_series
from .oracle import population_rho, rho_tilde

log = logging.getLogger("ppacf")

DEFAULT_SEED = 20240101
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArgumentError(f"{self.prog}: {message}")


@dataclass
class AnalysisConfig:
    """Settings for the ``acf`` subcommand; :meth:`validate` reports every
    problem at once."""

    region: tuple[float, ...] | None = None
    bins: int | None = None
    grid: tuple[int, int] | None = None
    max_lag: int | None = None
    alpha: float = 0.05
    mc_draws: int = DEFAULT_MC_DRAWS
    seed: int = DEFAULT_SEED
    floor: float | None = None
    problems: list[str] = field(default_factory=list, repr=False)

    def validate(self) -> AnalysisConfig:
        p = []
        if self.bins is not None and self.grid is not None:
            p.append("give either --bins or --grid, not both")
        if self.bins is not None and self.bins < 1:
            p.append(f"--bins must be positive (got {self.bins})")
        if self.grid is not None and (self.grid[0] < 1 or self.grid[1] < 1):
            p.append(f"--grid rows and cols must be positive (got {self.grid})")
        if self.max_lag is not None and self.max_lag < 1:
            p.append(f"--max-lag must be >= 1 (got {self.max_lag})")
        if not 0 < self.alpha < 1:
            p.append(f"--alpha must be in (0, 1) (got {self.alpha})")
        if self.mc_draws < 1000:
            p.append(f"--mc-draws must be >= 1000 (got {self.mc_draws})")
        if self.floor is not None and not self.floor > 0:
            p.append(f"--floor must be positive (got {self.floor})")
        if self.region is not None:
            if len(self.region) not in (2, 4):
                p.append("--region takes 2 (lo hi) or 4 (xlo xhi ylo yhi) numbers")
            else:
                pairs = list(zip(self.region[::2], self.region[1::2]))
                if any(not lo < hi for lo, hi in pairs):
                    p.append(f"--region bounds must satisfy lo < hi (got {self.region})")
                if self.grid is not None and len(self.region) == 2:
                    p.append("--grid needs a 2-D region")
        if p:
            raise ConfigError(p)
        return self

    def make_region(self) -> Region | None:
        if self.region is None:
            return None
        r = self.region
        return Region.interval(*r) if len(r) == 2 else Region.rectangle(*r)


def _grid_arg(text):
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _params_arg(text):
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        out[key.strip()] = float(val)
    return out


def _add_model_args(p):
    p.add_argument("--family", choices=FAMILIES, default="wn")
    p.add_argument("--a", type=float, help="autoregressive coefficient")
    p.add_argument("--b", type=float, help="moving-average coefficient")
    p.add_argument("--tau", type=int, default=5, help="seasonal period (sar1/sma1)")
    p.add_argument("--v", type=float, help="noise variance (default keeps unit latent variance)")
    p.add_argument("--params", type=_params_arg, default={},
                   help="alternative form: a=0.5,tau=5")


def _latent_from_args(args) -> LatentModelSpec:
    prm = dict(args.params)
    a = prm.get("a", args.a)
    b = prm.get("b", args.b)
    tau = int(prm.get("tau", args.tau))
    v = prm.get("v", args.v)
    fam = args.family
    problems = []
    if fam in ("ar1", "sar1") and a is None:
        problems.append(f"--a is required for {fam}")
    if fam in ("ma1", "sma1") and b is None:
        problems.append(f"--b is required for {fam}")
    if problems:
        raise ConfigError(problems)
    coeff = a if fam in ("ar1", "sar1") else (b if fam in ("ma1", "sma1") else 0.0)
    return LatentModelSpec.scalar(fam, coeff, tau=tau, v=v)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ppacf", description="Autocorrelograms for point-process time series.")
    parser.add_argument("--json-errors", action="store_true",
                        help="also report errors as JSON on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("acf", help="autocorrelogram of an event CSV")
    p.add_argument("events", help="event CSV path, or - for stdin")
    p.add_argument("--bins", type=int, help="number of bins (temporal data)")
    p.add_argument("--grid", type=_grid_arg, help="ROWSxCOLS (spatial data)")
    p.add_argument("--region", type=float, nargs="+", help="lo hi, or xlo xhi ylo yhi")
    p.add_argument("--max-lag", type=int, help="largest lag K (default min(20, n-1))")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mc-draws", type=int, default=DEFAULT_MC_DRAWS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--floor", type=float, nargs="?", const=DEFAULT_FLOOR, default=None,
                   help=f"clamp moment ratios at this value before the log (default {DEFAULT_FLOOR})")
    p.add_argument("--no-bounds", action="store_true", help="skip the Monte-Carlo bounds")
    p.add_argument("--out", default="-", help="CSV or JSON output (by extension); - for stdout")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--svg", help="also write an SVG figure here")

    p = sub.add_parser("simulate", help="simulate an event CSV from the default design")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="-")

    p = sub.add_parser("power", help="Monte-Carlo detection rates per lag")
    _add_model_args(p)
    p.add_argument("--n-list", type=_int_list, default=[100])
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--max-lag", type=int, default=10)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--mc-draws", type=int, default=DEFAULT_MC_DRAWS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("oracle", help="population autocorrelations")
    _add_model_args(p)
    p.add_argument("--max-lag", type=int, default=10)
    p.add_argument("--bins", type=int, help="also compute the binned population value")
    p.add_argument("--out", default="-")
    return parser


def _write_rows(path, header, rows):
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r[h] if not isinstance(r[h], float) else format(r[h], ".17g")
                        for h in header])


def cmd_acf(args) -> int:
    cfg = AnalysisConfig(
        region=tuple(args.region) if args.region else None, bins=args.bins, grid=args.grid,
        max_lag=args.max_lag, alpha=args.alpha, mc_draws=args.mc_draws, seed=args.seed,
        floor=args.floor,
    ).validate()
    series = read_events(args.events, cfg.make_region())
    region = series.region
    if region.dim == 1:
        if cfg.grid is not None:
            raise ConfigError(["--grid applies to spatial (x,y) events only"])
        grid = make_bin_grid(region, cfg.bins or 5)
    else:
        if cfg.bins is not None and cfg.grid is None:
            grid = make_bin_grid(region, cfg.bins)
        else:
            rows, cols = cfg.grid or (3, 3)
            grid = make_bin_grid(region, rows=rows, cols=cols)
    Y = bin_series(series, grid)
    K = cfg.max_lag if cfg.max_lag is not None else min(20, Y.n - 1)
    if Y.n < 2:
        raise InvalidArgumentError("need at least two time slices")
    acf = autocorrelogram(Y, K, floor=cfg.floor)
    if not args.no_bounds:
        acf = attach_bounds(acf, Y, cfg.alpha, cfg.mc_draws, cfg.seed)
    write_autocorrelogram(acf, args.out, args.format)
    if args.svg:
        emit_figure(acf, args.svg)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _latent_from_args(args)
    design = SimulationDesign(default_basis(), spec, args.n, args.burn_in, args.seed)
    write_events(simulate_series(design), args.out)
    return EXIT_OK


def cmd_power(args) -> int:
    spec = _latent_from_args(args)
    problems = []
    if args.replicates < 1:
        problems.append("--replicates must be >= 1")
    if not 0 < args.alpha < 1:
        problems.append("--alpha must be in (0, 1)")
    if args.mc_draws < 1000:
        problems.append("--mc-draws must be >= 1000")
    if not args.n_list or min(args.n_list) <= args.max_lag:
        problems.append("every n in --n-list must exceed --max-lag")
    if problems:
        raise ConfigError(problems)
    rows = []
    for n in args.n_list:
        design = SimulationDesign(default_basis(), spec, n)
        rep = run_experiment(design, args.bins, args.max_lag, args.replicates, args.alpha,
                             args.seed, args.mc_draws, workers=args.workers)
        log.info("n=%d: %d/%d replicates ok", n, rep.n_ok, rep.replicates)
        for row in rep.rows():
            row["failed"] = rep.n_failed
            rows.append(row)
    _write_rows(args.out, ["n", "lag", "rho_tilde", "mean_rho_hat", "mean_abs_error",
                           "exceedance", "failed"], rows)
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _latent_from_args(args)
    if args.max_lag < 1:
        raise ConfigError(["--max-lag must be >= 1"])
    lags = range(1, args.max_lag + 1)
    rows = [{"lag": k, "rho_tilde": rho_tilde(spec, k)} for k in lags]
    header = ["lag", "rho_tilde"]
    if args.bins is not None:
        basis = default_basis()
        pop = population_rho(spec, basis, make_bin_grid(basis.region, args.bins), lags)
        for r, v in zip(rows, pop):
            r["population_rho"] = float(v)
        header.append("population_rho")
    _write_rows(args.out, header, rows)
    return EXIT_OK


COMMANDS = {"acf": cmd_acf, "simulate": cmd_simulate, "power": cmd_power, "oracle": cmd_oracle}


def _report(exc, code, as_json):
    print(f"error: {exc}", file=sys.stderr)
    if as_json:
        obj = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, ConfigError):
            obj["problems"] = exc.problems
        if isinstance(exc, NumericalError) and exc.lag is not None:
            obj["lag"] = exc.lag
        print(json.dumps(obj, sort_keys=True), file=sys.stderr)
    return code


def cli_main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        return COMMANDS[args.command](args)
    except NumericalError as exc:
        return _report(exc, EXIT_NUMERICAL, as_json)
    except (InvalidArgumentError, PPACFError) as exc:
        return _report(exc, EXIT_INVALID, as_json)


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
