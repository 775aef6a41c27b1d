"""Command line front-end: ``universal-efc <subcommand> [options]``.

Every option can also be given in a plain-text configuration file passed
with ``--config``: one ``key = value`` pair per line, ``#`` starts a
comment, keys are option names with or without the leading dashes
(``half-life`` and ``half_life`` are equivalent). Command line flags win
over the file.

Exit status: 0 on success, 1 when the analysis fails (inconsistent
taxonomy, degenerate year, ...), 2 on usage or configuration errors
(unknown method, missing file, malformed input).
"""
import argparse
import sys
from pathlib import Path

from . import complexity, taxonomy
from .analysis import (PER_COUNTRY, POOLED, bootstrap_band, lagged_correlation,
                       load_indicator, write_correlation_csv)
from .errors import ConfigError, EFCError
from .imputation import FOREST, METHODS, ImputerConfig, impute
from .panel import load_panel, merge_universal, write_panel
from .progression import GLOBAL, PER_LINK, progression_network

USAGE, FAILURE = 2, 1


# ---------------------------------------------------------------------------
# option handling
# ---------------------------------------------------------------------------

def _lags(text):
    """``"0:10"`` (inclusive range), ``"0,5,10"`` or a single integer."""
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        lags = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid lag list {text!r}") from None
    if not lags:
        raise argparse.ArgumentTypeError("empty lag list")
    return lags


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


class _Options:
    """Option table of one subcommand: flag -> (type, default, help, choices)."""

    def __init__(self, parser):
        self.parser = parser
        self.options = {}
        self.required = set()

    def add(self, flag, type=str, default=None, help=None, choices=None, required=False):
        dest = flag.lstrip("-").replace("-", "_")
        kwargs = dict(dest=dest, default=None, help=help, metavar=dest.upper())
        if type is not None:
            kwargs["type"] = type
        if choices:
            kwargs["choices"] = choices
            kwargs["metavar"] = "{" + ",".join(map(str, choices)) + "}"
        if default is not None:
            kwargs["help"] = f"{help or ''} (default: {default})".strip()
        self.parser.add_argument(flag, **kwargs)
        self.options[dest] = (type, default, choices)
        if required:
            self.required.add(dest)


def read_config(path):
    """Parse a ``key = value`` file into a dict with normalised keys."""
    path = Path(path)
    out = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if not key:
            raise ConfigError(f"{path}:{n}: empty key")
        out[key] = value
    return out


def _resolve(opts, args):
    """Fill options not given on the command line from the config, then defaults."""
    config = read_config(args.config) if args.config else {}
    unknown = sorted(set(config) - set(opts.options))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {args.command}: {', '.join(unknown)}")
    for dest, (type_, default, choices) in opts.options.items():
        if getattr(args, dest) is not None:
            continue
        if dest in config:
            try:
                value = type_(config[dest]) if type_ is not None else config[dest]
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"config key {dest}: {exc}") from None
            if choices and value not in choices:
                raise ConfigError(f"config key {dest}: {value!r} not in {list(choices)}")
        else:
            value = default
        setattr(args, dest, value)
    missing = [d for d in sorted(opts.required) if getattr(args, d) is None]
    if missing:
        flags = ", ".join("--" + d.replace("_", "-") for d in missing)
        raise ConfigError(f"{args.command}: missing required option(s) {flags}")
    return args


def _note(message):
    print(message, file=sys.stderr)


def _tree(args):
    return taxonomy.parse_taxonomy(args.taxonomy)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate_taxonomy(args):
    """Check that every parent code equals the sum of its children."""
    tree = _tree(args)
    panel = load_panel(args.panel, args.format)
    report = taxonomy.check_sum_consistency(tree, panel, args.rel_tol)
    if args.out:
        report.to_csv(args.out)
    counts = report.counts()
    _note("taxonomy: {} codes, {} complete-set; checks: {}".format(
        len(tree.codes), len(tree.complete_set),
        ", ".join(f"{k}={counts.get(k, 0)}" for k in ("PASS", "FAIL", "SKIPPED"))))
    if not report.ok:
        for row in report.failures.head(10).itertuples(index=False):
            _note(f"FAIL {row.parent} {row.country} {row.year}: parent={row.parent_value!r} "
                  f"children={row.children_sum!r}")
        return FAILURE
    return 0


def cmd_impute(args):
    """Reconstruct the services complete set and merge it with goods."""
    if args.method == FOREST and args.seed is None:
        raise ConfigError("impute --method forest needs an explicit --seed")
    tree = _tree(args)
    services = load_panel(args.services, args.format)
    cfg = ImputerConfig(method=args.method, k=args.k, trees=args.trees,
                        min_leaf=args.min_leaf, seed=args.seed or 0)
    result = impute(services, tree, cfg, jobs=args.jobs)
    codes = [c for c in tree.complete_set if c in result.panel.activities]
    out = result.panel.select(activities=codes)
    if args.goods:
        out = merge_universal(load_panel(args.goods, args.format), out)
    write_panel(out, args.out, args.format)
    if args.residuals:
        result.residuals_to_csv(args.residuals)
    before = services.select(activities=codes).n_missing
    _note(f"impute[{cfg.label}]: {before} missing complete-set cells, "
          f"{len(result.residuals)} left unfilled; wrote {out.shape} panel")
    return 0


def cmd_metrics(args):
    """Yearly fitness and complexity tables."""
    panel = load_panel(args.panel, args.format)
    results = complexity.yearly_fitness(panel, args.variant, args.half_life, args.threshold,
                                        args.tol, args.max_iter)
    complexity.fitness_table(results, "fitness").to_csv(
        args.out_fitness, index=False, lineterminator="\n")
    if args.out_complexity:
        complexity.fitness_table(results, "complexity").to_csv(
            args.out_complexity, index=False, lineterminator="\n")
    bad = [r.year for r in results if not r.converged]
    _note(f"metrics[{args.variant}]: {len(results)} years"
          + (f"; not converged in {bad}" if bad else ""))
    return 0


def _binary_panels(panel, half_life, threshold):
    series = complexity.competitiveness_series(panel, complexity.RCA, half_life)
    return {y: complexity.binarize(m, threshold) for y, m in series.items()}


def cmd_network(args):
    """Validated progression network between activities."""
    panel = load_panel(args.panel, args.format)
    panels = _binary_panels(panel, args.half_life, args.threshold)
    if args.delta_min > args.delta_max:
        raise ConfigError(f"--delta-min {args.delta_min} exceeds --delta-max {args.delta_max}")
    net = progression_network(panels, (args.delta_min, args.delta_max), args.ensemble,
                              args.percentile, args.seed, args.mode, args.jobs)
    net.to_csv(args.out_edges)
    if args.out_nodes:
        tree = _tree(args)
        net.node_table(tree).to_csv(args.out_nodes, index=False, lineterminator="\n")
    _note(f"network: {len(net.activities)} activities, {int((net.weights > 0).sum())} links "
          f"over deltas {net.deltas[0]}..{net.deltas[-1]}")
    return 0


def cmd_correlate(args):
    """Lagged correlation of an indicator with a later one (fitness vs GDP)."""
    x = load_indicator(args.x)
    y = load_indicator(args.y)
    if args.bootstrap:
        if args.seed is None:
            raise ConfigError("correlate --bootstrap needs an explicit --seed")
        table = bootstrap_band(x, y, args.lags, args.bootstrap, seed=args.seed,
                               mode=args.mode, jobs=args.jobs)
    else:
        table = lagged_correlation(x, y, args.lags, args.mode)
    write_correlation_csv(table, args.out, args.mode)
    best = table.loc[table["correlation"].idxmax()] if table["correlation"].notna().any() \
        else None
    _note("correlate: " + (f"peak {best['correlation']:.3f} at lag {int(best['lag'])}"
                           if best is not None else "no defined correlation"))
    return 0


def cmd_synth(args):
    """Write the bundled synthetic dataset (goods, services, GDP)."""
    from .synthetic import universal_dataset
    goods, services, gdp = universal_dataset(seed=args.seed, n_countries=args.countries)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_panel(goods, out / "goods.csv")
    write_panel(services, out / "services.csv")
    gdp.to_csv(out / "gdp.csv", index=False, lineterminator="\n")
    _note(f"synth: goods {goods.shape}, services {services.shape} "
          f"({services.n_missing} missing) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    """Return ``(parser, {command: _Options})``."""
    parser = argparse.ArgumentParser(
        prog="universal-efc",
        description="Services reconstruction, fitness-complexity metrics and "
                    "progression networks on export panels.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    option_sets = {}

    def command(name, func, help):
        p = sub.add_parser(name, help=help, description=func.__doc__)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key = value configuration file")
        opts = option_sets[name] = _Options(p)
        return opts

    def common(opts, taxonomy_file=False, jobs=False):
        opts.add("--format", default="long", choices=("long", "matrix"),
                 help="panel CSV layout")
        if taxonomy_file:
            opts.add("--taxonomy", help="taxonomy CSV (bundled BOP tree when omitted)")
        if jobs:
            opts.add("--jobs", _positive_int, 1, "worker processes")

    s = command("validate-taxonomy", cmd_validate_taxonomy, "check parent = sum of children")
    s.add("--panel", help="services panel CSV", required=True)
    s.add("--out", help="consistency report CSV")
    s.add("--rel-tol", float, taxonomy.DEFAULT_REL_TOL, "relative tolerance")
    common(s, taxonomy_file=True)

    s = command("impute", cmd_impute, "reconstruct missing services exports")
    s.add("--services", help="services panel CSV", required=True)
    s.add("--goods", help="goods panel CSV; when given the output is the merged panel")
    s.add("--out", help="output panel CSV", required=True)
    s.add("--residuals", help="CSV of cells left unfilled")
    s.add("--method", str, "knn", "reconstruction method", choices=METHODS)
    s.add("--k", _positive_int, 5, "neighbours (knn)")
    s.add("--trees", _positive_int, 100, "trees (forest)")
    s.add("--min-leaf", _positive_int, 5, "minimum leaf size (forest)")
    s.add("--seed", int, None, "random seed (required for forest)")
    common(s, taxonomy_file=True, jobs=True)

    s = command("metrics", cmd_metrics, "yearly fitness and complexity")
    s.add("--panel", help="export panel CSV", required=True)
    s.add("--out-fitness", help="fitness table CSV", required=True)
    s.add("--out-complexity", help="complexity table CSV")
    s.add("--variant", str, "intensive", choices=("intensive", "extensive"))
    s.add("--half-life", float, None, "smoothing half-life in years (none when omitted)")
    s.add("--threshold", float, 1.0, "RCA binarisation threshold")
    s.add("--tol", float, complexity.DEFAULT_TOL, "convergence tolerance")
    s.add("--max-iter", _positive_int, complexity.DEFAULT_MAX_ITER, "iteration cap")
    common(s)

    s = command("network", cmd_network, "validated progression network")
    s.add("--panel", help="export panel CSV", required=True)
    s.add("--out-edges", help="edge list CSV", required=True)
    s.add("--out-nodes", help="node attribute CSV")
    s.add("--seed", int, help="random seed", required=True)
    s.add("--delta-min", int, 0, "smallest lag")
    s.add("--delta-max", int, 10, "largest lag")
    s.add("--ensemble", int, 1000, "null samples per year pair")
    s.add("--percentile", float, 95.0, "validation percentile")
    s.add("--mode", str, PER_LINK, "null comparison", choices=(PER_LINK, GLOBAL))
    s.add("--half-life", float, None, "RCA smoothing half-life")
    s.add("--threshold", float, 1.0, "RCA binarisation threshold")
    common(s, taxonomy_file=True, jobs=True)

    s = command("correlate", cmd_correlate, "lagged indicator correlation")
    s.add("--x", help="leading indicator CSV (country,year,value or a fitness table)",
          required=True)
    s.add("--y", help="lagging indicator CSV (e.g. GDP)", required=True)
    s.add("--out", help="correlation CSV", required=True)
    s.add("--lags", _lags, [0, 5, 10], "lags as 'lo:hi' or 'a,b,c'")
    s.add("--bootstrap", int, 0, "bootstrap replicas (0 = none)")
    s.add("--seed", int, None, "random seed (required with --bootstrap)")
    s.add("--mode", str, POOLED, "aggregation", choices=(POOLED, PER_COUNTRY))
    common(s, jobs=True)

    s = command("synth", cmd_synth, "write the synthetic demo dataset")
    s.add("--out-dir", help="output directory", required=True)
    s.add("--seed", int, help="random seed", required=True)
    s.add("--countries", _positive_int, 160, "number of countries")
    return parser, option_sets


def main(argv=None):
    """Run the command line; returns the exit status."""
    parser, option_sets = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else 0
    try:
        _resolve(option_sets[args.command], args)
        return args.func(args)
    except EFCError as exc:
        _note(f"error: {exc}")
        return exc.exit_code
    except FileNotFoundError as exc:
        _note(f"error: no such file: {exc.filename}")
        return USAGE
    except (OSError, ValueError) as exc:
        _note(f"error: {exc}")
        return USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
