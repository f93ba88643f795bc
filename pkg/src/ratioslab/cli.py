"""Command-line entry point: `ratioslab <command> ...`."""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from dataclasses import dataclass, fields
from typing import Callable, TextIO

import numpy as np

from .modular_arith import tau_series
from .numerics import resolve_threads
from .quadratic_characters import enumerate_discriminants
from .ratios_side import compare, rc_one_level_density, tau_size_for, W_DEFAULT
from .nt_density import explicit_sum_terms, nt_one_level_density
from .rmt_sim import AR_MAX_N, EnsembleSpec, histogram, ks_statistic, sample_lowest
from .special_fn import TruncationPolicy, fejer_pair
from .verify import identities_suite, special_suite

class UsageError(Exception):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class RunConfig:
    X: float | None = None
    sigma: float = 0.5
    p_max: int = 10000
    k_max: int = 20
    tail_tol: float = 1e-8
    seed: int = 0
    output_path: str | None = None
    format: str | None = None  # csv | json; None keeps each command's native format

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ConfigError(f"sigma={self.sigma} must lie in (0, 1)")
        if self.X is not None and not self.X >= 10:
            raise ConfigError(f"X={self.X} must be >= 10")
        if self.format not in (None, "csv", "json"):
            raise ConfigError("format must be csv or json")
        self.policy  # validates the truncation fields

    @property
    def policy(self) -> TruncationPolicy:
        try:
            return TruncationPolicy(self.p_max, self.k_max, self.tail_tol)
        except ValueError as e:
            raise ConfigError(str(e)) from None


# file key -> (field, parser)
_KEYS: dict[str, tuple[str, Callable]] = {
    "x": ("X", float),
    "sigma": ("sigma", float),
    "p_max": ("p_max", int),
    "k_max": ("k_max", int),
    "tail_tol": ("tail_tol", float),
    "seed": ("seed", int),
    "output_path": ("output_path", str),
    "format": ("format", str),
}


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip().lower(), val.strip()
        if not eq or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}; valid keys: {', '.join(_KEYS)}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} expects {conv.__name__}, got {val!r}") from None
    return values


def load_config(path: str | None, **overrides) -> RunConfig:
    """File values first, then non-None overrides (command-line flags win)."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values = parse_config_text(fh.read())
    valid = {f.name for f in fields(RunConfig)}
    for k, v in overrides.items():
        if k not in valid:
            raise ConfigError(f"unknown setting {k!r}")
        if v is not None:
            values[k] = v
    return RunConfig(**values)


# ---------------------------------------------------------------- serialization


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    raise TypeError(f"cannot format {type(x).__name__}")


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """Key order as given; floats with 17 significant digits."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {to_json(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if obj is None:
        return "null"
    return fmt(obj)


def csv_line(values) -> str:
    return ",".join(v if isinstance(v, str) else fmt(v) for v in values)


class _Sink:
    """'-' or None writes to stdout; anything else is a file path."""

    def __init__(self, path: str | None, stdout: TextIO):
        self.path = path
        self.stdout = stdout
        self.fh = None

    def __enter__(self) -> TextIO:
        if self.path in (None, "-"):
            return self.stdout
        self.fh = open(self.path, "w", encoding="utf-8", newline="\n")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _ensemble(text: str):
    try:
        parts = [EnsembleSpec.parse(t) for t in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    if len(parts) > 2:
        raise argparse.ArgumentTypeError("at most two factors KIND:N,KIND:N")
    return parts[0] if len(parts) == 1 else tuple(parts)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS,
                   help="worker threads (default: RATIOSLAB_THREADS, else all cores); output does not depend on it")
    g.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH",
                   help="key = value file (x, sigma, p_max, k_max, tail_tol, seed, output_path, format); flags win")
    return p


def _truncation(p: argparse.ArgumentParser):
    p.add_argument("--p-max", type=int, dest="p_max", help="largest prime in every Euler product (default 10000)")
    p.add_argument("--k-max", type=int, dest="k_max", help="largest prime-power exponent (default 20)")
    p.add_argument("--tail-tol", type=float, dest="tail_tol", help="declared truncation tolerance (default 1e-8)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(
        prog="ratioslab",
        description="One-level density of quadratic twists of the Ramanujan tau L-function: "
        "explicit formula, Ratios prediction, and random-matrix eigenangle experiments.",
        parents=[common],
    )
    sub = root.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("tau", parents=[common], help="tau(n) and tau*(n)",
                       description="Coefficients of q prod (1 - q^n)^24 and tau*(n) = tau(n) / n^(11/2). "
                       "CSV columns n,tau,tau_star.")
    p.add_argument("--n-max", type=_positive_int, required=True, dest="n_max")
    p.add_argument("--csv", metavar="PATH", help="output file, '-' for stdout (default)")

    p = sub.add_parser("disc", parents=[common], help="even fundamental discriminants up to X",
                       description="Even fundamental discriminants 0 < d <= X; CSV column d, then the summary "
                       "x_star,L,3X/pi^2 with L = log(X / 2 pi) and x_star ~ 3X/pi^2.")
    p.add_argument("--x", type=float, dest="X")
    p.add_argument("--csv", metavar="PATH", help="d rows to this file, '-' for stdout (default)")

    p = sub.add_parser("verify-special", parents=[common], help="special-function invariants",
                       description="digamma recurrence psi(s+1) = psi(s) + 1/s, Schwarz reflection of zeta, "
                       "zeta'/zeta and L(sym^2), zeta(2) = pi^2/6, Euler-product truncation of L(sym^2) "
                       "and the Fejer pair g(x) = sigma (sin(pi sigma x)/(pi sigma x))^2 <-> triangle. "
                       "Exit 2 on any failure.")
    _truncation(p)

    p = sub.add_parser("verify-identities", parents=[common], help="arithmetic and sampler identities (CI gate)",
                       description="tau multiplicativity, Hecke recursion tau(p^(k+1)) = tau(p) tau(p^k) - "
                       "p^11 tau(p^(k-1)) and |tau*(p)| <= 2; discriminant counts x_star ~ 3X/pi^2 and "
                       "#{p | d} ~ x_star/(p+1); the per-prime cancellation M(p, y) = 0; B(r; r) = 1; "
                       "dB/d alpha on the diagonal from the closed form, the five-factor log form and "
                       "numerical derivatives; the Dirichlet-sum main term X* e^{-2 pi i z}/(1 - 2 pi i z/L); "
                       "N = 1 eigenangle laws by KS. Exit 2 on any failure.")
    _truncation(p)

    def density_opts(p):
        p.add_argument("--x", type=float, dest="X")
        p.add_argument("--sigma", type=float, help="support of g_hat is (-sigma, sigma), 0 < sigma < 1 (default 0.5)")
        p.add_argument("--w", type=float, default=W_DEFAULT, help="contour shift of the remainder, 0 < w < 1/4")
        p.add_argument("--json", metavar="PATH", help="output file, '-' for stdout (default)")
        _truncation(p)

    p = sub.add_parser("density", parents=[common], help="one-level density on one side",
                       description="nt: explicit formula, D = archimedean (Re psi integral and the mean log d) "
                       "+ g(0)/2 + (1/L) int g (L'/L(sym^2) - zeta'/zeta) + the p | d correction "
                       "-(2/L) int g B'. rc: Ratios prediction with the same first four terms, the five-factor "
                       "B' and the remainder R(g; X) shifted to Re = 1 - 2w. The odd prime-power sum is "
                       "reported but is not part of the total.")
    p.add_argument("--side", choices=("nt", "rc"), default="nt")
    p.add_argument("--trace", nargs="?", const="-", metavar="PATH",
                   help="also write the per-prime-power terms of the explicit sum as CSV p,k,contribution")
    density_opts(p)

    p = sub.add_parser("compare", parents=[common], help="explicit formula vs Ratios prediction",
                       description="Both sides of the density on identical inputs; JSON keys x, sigma, nt, rc, "
                       "abs_diff, rel_diff, predicted_rate with predicted_rate = X^(-(1-sigma)/2).")
    p.add_argument("--structural-zero", action="store_true",
                   help="drop the remainder, leaving the terms that agree identically")
    density_opts(p)

    p = sub.add_parser("rmt", parents=[common], help="random-matrix eigenangle experiments",
                       description="Weyl-density samplers for unitary, so_even, so_odd and usp, lowest "
                       "eigenangle mod 2 pi, and Kronecker products (eigenangles add).")
    rsub = p.add_subparsers(dest="rmt_command", metavar="action", parser_class=_Parser)
    rsub.required = True

    def rmt_opts(q):
        q.add_argument("--count", type=_positive_int, default=10000)
        q.add_argument("--seed", type=int)
        q.add_argument("--method", choices=("auto", "accept_reject", "dpp"), default="auto",
                       help="auto: accept-reject for N <= 3, the exact determinantal sampler above")
        q.add_argument("--force", action="store_true", help=f"allow N > {AR_MAX_N}")
        q.add_argument("--exclude-zero", action="store_true", help="ignore eigenangles that are exactly 0")

    q = rsub.add_parser("sample", parents=[common], help="lowest eigenangle of one ensemble",
                        description="One lowest eigenangle in [0, 2 pi) per row.")
    q.add_argument("--kind", required=True, choices=("unitary", "so_even", "so_odd", "usp"))
    q.add_argument("--n", type=_positive_int, required=True, dest="N")
    q.add_argument("--csv", metavar="PATH", help="output file, '-' for stdout (default)")
    rmt_opts(q)

    q = rsub.add_parser("kron", parents=[common], help="lowest eigenangle of A (x) B",
                        description="Eigenangles of the Kronecker product are the pairwise sums "
                        "theta_i + phi_j mod 2 pi; one lowest angle per row.")
    q.add_argument("--a", type=_ensemble, required=True, metavar="KIND:N")
    q.add_argument("--b", type=_ensemble, required=True, metavar="KIND:N")
    q.add_argument("--csv", metavar="PATH", help="output file, '-' for stdout (default)")
    rmt_opts(q)

    q = rsub.add_parser("compare", parents=[common], help="histogram and KS of two lowest-angle laws",
                        description="Each side is KIND:N or a product KIND:N,KIND:N. CSV bin_lo,bin_hi,"
                        "count_a,count_b, then KS lines with exact zeros counted and excluded.")
    q.add_argument("--a", type=_ensemble, required=True, metavar="SPEC")
    q.add_argument("--b", type=_ensemble, required=True, metavar="SPEC")
    q.add_argument("--bins", type=_positive_int, default=50)
    q.add_argument("--upper", type=float, help="histogram range [0, upper] (default: largest sample)")
    q.add_argument("--csv", metavar="PATH", help="output file, '-' for stdout (default)")
    rmt_opts(q)
    return root


# ---------------------------------------------------------------- commands


def _config(args) -> RunConfig:
    return load_config(
        getattr(args, "config", None),
        X=getattr(args, "X", None),
        sigma=getattr(args, "sigma", None),
        p_max=getattr(args, "p_max", None),
        k_max=getattr(args, "k_max", None),
        tail_tol=getattr(args, "tail_tol", None),
        seed=getattr(args, "seed", None),
    )


def _need_x(cfg: RunConfig) -> float:
    if cfg.X is None:
        raise ConfigError("X is required (--x or 'x = ...' in the config file)")
    return cfg.X


def _cmd_tau(args, cfg, out, err) -> int:
    table = tau_series(args.n_max)
    with _Sink(args.csv or cfg.output_path, out) as fh:
        fh.write("n,tau,tau_star\n")
        star = table.star
        for n in range(1, table.n_max + 1):
            fh.write(f"{n},{table.coeffs[n - 1]},{fmt(star[n])}\n")
    return 0


def _cmd_disc(args, cfg, out, err) -> int:
    X = _need_x(cfg)
    d = enumerate_discriminants(X)
    with _Sink(args.csv or cfg.output_path, out) as fh:
        fh.write("d\n")
        fh.write("".join(f"{v}\n" for v in d.members.tolist()))
    out.write("x_star,L,3X/pi^2\n")
    out.write(csv_line([d.x_star, d.L, 3 * X / math.pi**2]) + "\n")
    return 0


def _report(checks, out) -> int:
    for c in checks:
        out.write(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}\n")
    bad = sum(not c.ok for c in checks)
    out.write(f"{len(checks) - bad}/{len(checks)} checks passed\n")
    return 0 if bad == 0 else 2


def _cmd_verify_special(args, cfg, out, err) -> int:
    pol = cfg.policy
    return _report(special_suite(tau_series(max(100_000, 2 * pol.p_max)), pol), out)


def _cmd_verify_identities(args, cfg, out, err) -> int:
    pol = cfg.policy
    return _report(identities_suite(tau_series(max(100_000, pol.p_max)), pol, args.threads), out)


def _flatten(rec: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in rec.items():
        if isinstance(v, dict):
            flat.update(_flatten(v, f"{prefix}{k}."))
        else:
            flat[prefix + k] = v
    return flat


def _write_record(path, rec: dict, cfg: RunConfig, out):
    with _Sink(path or cfg.output_path, out) as fh:
        if cfg.format == "csv":
            flat = _flatten(rec)
            fh.write(",".join(flat) + "\n" + csv_line(flat.values()) + "\n")
        else:
            fh.write(to_json(rec) + "\n")


def _table_for(X: float, pol: TruncationPolicy):
    n = tau_size_for(X, pol)
    if n > 10**6:
        raise ConfigError(f"X={X:g} needs {n} tau coefficients; the limit is 1000000")
    return tau_series(n)


def _cmd_density(args, cfg, out, err) -> int:
    X = _need_x(cfg)
    pol = cfg.policy
    tau = _table_for(X, pol)
    tf = fejer_pair(cfg.sigma)
    dset = enumerate_discriminants(X)
    if args.side == "nt":
        rec = nt_one_level_density(X, cfg.sigma, tau, pol, tf, dset)
    else:
        rec = rc_one_level_density(X, cfg.sigma, tau, pol, tf, dset, args.w)
    _write_record(args.json, rec.as_record(), cfg, out)
    if args.trace is not None:
        with _Sink(args.trace, out) as fh:
            fh.write("p,k,contribution\n")
            for p, k, c in explicit_sum_terms(dset, tau, tf):
                fh.write(csv_line([p, k, c]) + "\n")
    return 0


def _cmd_compare(args, cfg, out, err) -> int:
    X = _need_x(cfg)
    pol = cfg.policy
    tau = _table_for(X, pol)
    rep = compare(X, cfg.sigma, tau, pol, args.w, args.structural_zero, threads=args.threads)
    _write_record(args.json, rep.as_record(), cfg, out)
    return 0


def _factors(spec):
    return spec if isinstance(spec, tuple) else (spec,)


def _guard(specs, args, err):
    for s in specs:
        for f in _factors(s):
            if f.N > AR_MAX_N:
                if not args.force:
                    raise ConfigError(f"{f}: N > {AR_MAX_N} is outside the supported range; pass --force to run it")
                err.write(f"warning: {f} has N > {AR_MAX_N}; sampling cost grows quickly with N\n")
            if args.method == "accept_reject" and f.N > AR_MAX_N and f.kind != "unitary":
                raise ConfigError(f"{f}: accept-reject is limited to N <= {AR_MAX_N}; use --method dpp")


def _write_angles(path, samples, out):
    with _Sink(path, out) as fh:
        fh.write("angle\n")
        fh.write("".join(fmt(v) + "\n" for v in samples.tolist()))


def _cmd_rmt(args, cfg, out, err) -> int:
    threads = args.threads
    if args.rmt_command == "sample":
        spec = EnsembleSpec(args.kind, args.N)
        _guard([spec], args, err)
        s = sample_lowest(spec, args.count, cfg.seed, threads, args.exclude_zero, args.method)
        _write_angles(args.csv or cfg.output_path, s.samples, out)
        return 0
    if args.rmt_command == "kron":
        if isinstance(args.a, tuple) or isinstance(args.b, tuple):
            raise ConfigError("kron takes single factors KIND:N for --a and --b")
        _guard([args.a, args.b], args, err)
        s = sample_lowest((args.a, args.b), args.count, cfg.seed, threads, args.exclude_zero, args.method)
        _write_angles(args.csv or cfg.output_path, s.samples, out)
        return 0
    _guard([args.a, args.b], args, err)
    runs = {
        ex: [
            sample_lowest(spec, args.count, cfg.seed, threads, ex, args.method, stream=i).samples
            for i, spec in enumerate((args.a, args.b))
        ]
        for ex in (False, True)
    }
    a, b = runs[args.exclude_zero]
    upper = args.upper if args.upper is not None else float(max(a.max(), b.max()))
    ha = histogram(a, args.bins, upper)
    hb = histogram(b, args.bins, upper)
    with _Sink(args.csv or cfg.output_path, out) as fh:
        fh.write("bin_lo,bin_hi,count_a,count_b\n")
        for i in range(args.bins):
            fh.write(csv_line([ha.edges[i], ha.edges[i + 1], ha.counts[i], hb.counts[i]]) + "\n")
    out.write("statistic,value,n_a,n_b\n")
    for ex, label in ((False, "ks"), (True, "ks_exclude_zero")):
        a, b = runs[ex]
        out.write(csv_line([label, ks_statistic(a, b), a.size, b.size]) + "\n")
    return 0


_COMMANDS = {
    "tau": _cmd_tau,
    "disc": _cmd_disc,
    "verify-special": _cmd_verify_special,
    "verify-identities": _cmd_verify_identities,
    "density": _cmd_density,
    "compare": _cmd_compare,
    "rmt": _cmd_rmt,
}


def run_command(argv, out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Parse argv and run one command. 0 ok, 1 usage/config error, 2 verification failure."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out):  # --help goes to the caller's stream
            args = parser.parse_args(list(argv))
    except UsageError as e:
        err.write(str(e))
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        args.threads = resolve_threads(getattr(args, "threads", None))
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg, out, err)
    except (ConfigError, OSError) as e:
        err.write(f"ratioslab: error: {e}\n")
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
