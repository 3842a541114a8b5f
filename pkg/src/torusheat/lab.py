"""Command-line experiment runner.

    torusheat kernel verify|eval
    torusheat converge run
    torusheat maximal compute
    torusheat weights check|catalog|companion

Every command writes CSV (to --out or stdout) preceded by ``#`` header lines
recording the version and the fully resolved configuration.  Exit codes:
0 all checks passed, 1 a mathematical violation was detected, 2 usage or IO
error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Callable

import numpy as np

from . import __version__
from .errors import TorusHeatError
from .grid import Grid, GridFunction, evolve_torus, periodic_extension_index, read_csv, weighted_norm, write_csv
from .kernel import (
    KernelConfig,
    Representation,
    TorusPoint,
    WaveguidePoint,
    eval_waveguide,
    evaluate,
    kernel_values,
    lower_bound,
    upper_bound,
    waveguide_bounds,
)
from .maximal import (
    RadiiSet,
    TimeSet,
    check_domination,
    heat_max_op,
    local_max_op,
    naive_max_op,
    torus_max_op,
    waveguide_max_op,
)
from .weights import (
    check_Dp_T,
    check_Dp_WG,
    companion_weight_T,
    companion_weight_WG,
    parse_weight,
    remark_function,
    run_catalog,
    showcase_pair,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- parsing helpers


def _floats(text: str) -> list[float]:
    return [float(s) for s in str(text).split(",") if s.strip()]


def _ints(text: str) -> list[int]:
    return [int(s) for s in str(text).split(",") if s.strip()]


def _points(text: str) -> list[list[float]]:
    """'0.1,0.2;0.3,0.4' -> [[0.1, 0.2], [0.3, 0.4]]."""
    return [_floats(chunk) for chunk in str(text).split(";") if chunk.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict[str, str]:
    """key=value per line; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


class Output:
    """CSV sink with a configuration header."""

    def __init__(self, args: argparse.Namespace):
        self.buf = io.StringIO()
        self.path = args.out
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.buf.write(f"# torusheat {__version__}\n")
        self.buf.write(f"# command: {args.group} {args.action}\n")
        for k, v in sorted(_resolved(args).items()):
            self.buf.write(f"# {k}={v}\n")

    def row(self, *cells):
        self.writer.writerow([_cell(c) for c in cells])

    def raw(self, text: str):
        self.buf.write(text)

    def close(self):
        text = self.buf.getvalue()
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)


def _cell(c) -> str:
    if isinstance(c, (bool, np.bool_)):
        return "1" if c else "0"
    if isinstance(c, (float, np.floating)):
        return "%.17g" % c
    return str(c)


def _resolved(args: argparse.Namespace) -> dict:
    skip = {"func", "group", "action", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# --------------------------------------------------------------------------- kernel


def cmd_kernel_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    dims = _ints(args.dims)
    times = np.logspace(math.log10(args.t_min), math.log10(args.t_max), args.t_count)
    width = max(dims)
    out = Output(args)
    out.row("n", "t", *[f"x{i + 1}" for i in range(width)], "phi", "lower", "upper", "err_bound", "dual_diff", "ok")
    bad = 0
    worst_dual = 0.0
    for n in dims:
        for t in times:
            t = float(t)
            xs = rng.uniform(-0.5, 0.5, size=(args.x_samples, n))
            cfg = KernelConfig(args.tol)
            phi, err = kernel_values(xs, t, args.tol, cfg.choose(t))
            g, _ = kernel_values(xs, t, args.tol, Representation.GAUSSIAN)
            f, _ = kernel_values(xs, t, args.tol, Representation.FOURIER)
            if n == 1:
                phi0 = float(kernel_values(np.zeros((1, 1)), t, args.tol, cfg.choose(t))[0][0])
            for i, x in enumerate(xs):
                lo, hi = lower_bound(x, t), upper_bound(x, t)
                eps = err[i] + args.slack
                dual = abs(g[i] - f[i])
                worst_dual = max(worst_dual, dual)
                ok = lo - eps <= phi[i] <= hi + eps and dual <= 2 * args.tol
                if n == 1:
                    gx = math.exp(-x[0] ** 2 / (4 * t))
                    ok = ok and phi0 * gx - eps <= phi[i] <= 2 * phi0 * gx + eps
                    ok = ok and phi0 <= 1 + math.sqrt(math.pi / t) + eps
                bad += not ok
                pad = [""] * (width - n)
                out.row(n, t, *x, *pad, phi[i], lo, hi, err[i], dual, ok)
    for t in times[:: max(1, len(times) // 5)] if args.y_samples else []:
        t = float(t)
        for _ in range(args.y_samples):
            z = WaveguidePoint(rng.uniform(-0.5, 0.5), rng.uniform(-3, 3))
            kv = eval_waveguide(z, t, KernelConfig(args.tol))
            lo, hi = waveguide_bounds(z, t)
            eps = kv.error_bound + args.slack
            ok = lo - eps <= kv.value <= hi + eps
            bad += not ok
            pad = [""] * (width - 1)
            out.row("1+1", t, z.torus_part.coords[0], *pad, kv.value, lo, hi, kv.error_bound, "", ok)
    out.raw(f"# rows_failed={bad}\n# max_dual_diff={worst_dual:.3e}\n")
    out.close()
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_kernel_eval(args) -> int:
    x = _floats(args.x)
    cfg = KernelConfig(args.tol, args.switch_t, args.representation)
    out = Output(args)
    if args.y:
        z = WaveguidePoint(x, _floats(args.y))
        kv = eval_waveguide(z, args.t, cfg)
        lo, hi = waveguide_bounds(z, args.t)
    else:
        p = TorusPoint(x)
        kv = evaluate(p, args.t, cfg)
        lo, hi = lower_bound(p, args.t), upper_bound(p, args.t)
    out.row("t", "value", "err_bound", "representation", "lower", "upper")
    out.row(args.t, kv.value, kv.error_bound, kv.representation.value, lo, hi)
    out.close()
    return EXIT_OK


# --------------------------------------------------------------------------- converge


def _function_spec(text: str, n: int, seed: int) -> tuple[Callable, tuple]:
    """Return (sampler on points, declared singular points)."""
    kind, _, arg = text.partition(":")
    if kind == "cos":
        k = float(arg or 1)
        return (lambda p: np.prod(np.cos(2 * math.pi * k * p), axis=-1)), ()
    if kind == "one":
        return (lambda p: np.ones(p.shape[:-1])), ()
    if kind == "remark":
        return remark_function, ((0.0,) * n,)
    if kind == "showcase":
        _, _, f = showcase_pair()
        return f, ((0.0,) * n,)
    if kind == "bump":
        w = float(arg or 0.1)
        return (lambda p: np.exp(-np.sum(p**2, axis=-1) / (2 * w * w))), ()
    if kind == "random":
        # a random trigonometric polynomial, reproducible from the seed
        rng = np.random.default_rng(seed)
        K = int(arg or 8)
        a, b = rng.standard_normal((2, K))

        def f(p):
            x = p[..., 0]
            return sum(a[k] * np.cos(2 * math.pi * k * x) + b[k] * np.sin(2 * math.pi * k * x) for k in range(K))

        return f, ()
    raise UsageError(f"unknown function spec {text!r}")


def cmd_converge(args) -> int:
    n = args.n
    fn, sing = (None, ()) if args.f.startswith("file:") else _function_spec(args.f, n, args.seed)
    probes = _points(args.probes) if args.probes else [[0.0] * n]
    out = Output(args)

    if args.refine:
        out.row("N", "h", *[f"probe_{i + 1}_heatmax" for i in range(len(probes))])
        times = TimeSet.geometric(args.R, args.J)
        for k in _ints(args.refine):
            grid = Grid(n, 0, 2**k)
            f = GridFunction.sample(grid, fn, sing)
            hm = heat_max_op(f, times)
            vals = [hm.values[periodic_extension_index(pr, grid)] for pr in probes]
            out.row(grid.N, 1.0 / grid.N, *vals)
        out.close()
        return EXIT_OK

    if fn is None:
        f = read_csv(args.f[5:])
        grid = f.grid
    else:
        grid = Grid(n, 0, args.N)
        f = GridFunction.sample(grid, fn, sing)
    v = parse_weight(args.v, n)
    vs = GridFunction.sample(grid, v, [s.point for s in v.singularities])
    times = _floats(args.times) if args.times else [args.t_max * 2.0**-j for j in range(args.t_count)]
    idx = [periodic_extension_index(pr, grid) for pr in probes]
    out.row("t", "sup_err", "Lp_v_err", *[f"probe_{i + 1}_err" for i in range(len(probes))])
    for t in sorted(times, reverse=True):
        d = evolve_torus(f, t) - f
        err = weighted_norm(d, vs, args.p).value
        out.row(t, d.sup(), err, *[abs(d.values[i]) for i in idx])
    out.close()
    return EXIT_OK


# --------------------------------------------------------------------------- maximal


def domination_suite(N: int = 256, seed: int = 0) -> list[tuple[str, GridFunction]]:
    """Ten reproducible nonnegative test functions on T^1."""
    grid = Grid(1, 0, N)
    x = grid.axis(0)
    rng = np.random.default_rng(seed)
    fs = [
        ("uniform_noise", rng.random(N)),
        ("exponential_noise", rng.exponential(size=N)),
        ("spike", np.where(np.arange(N) == rng.integers(N), 1.0, 0.0)),
        ("interval", ((x > -0.1) & (x < 0.05)).astype(float)),
        ("seam_interval", (np.abs(x) > 0.45).astype(float)),
        ("one_plus_cos", 1 + np.cos(2 * math.pi * 3 * x)),
        ("narrow_bump", np.exp(-(x - 0.2) ** 2 / (2 * 0.01**2))),
        ("bumps", sum(np.exp(-(x - c) ** 2 / (2 * 0.03**2)) for c in rng.uniform(-0.5, 0.5, 5))),
        ("sparse_noise", rng.random(N) * (rng.random(N) < 0.1)),
        ("remark", GridFunction.sample(grid, remark_function, [(0.0,)]).values),
    ]
    return [(name, GridFunction(grid, vals)) for name, vals in fs]


def cmd_maximal(args) -> int:
    if args.check_domination:
        return _maximal_domination(args)
    if args.input:
        f = read_csv(args.input)
    elif args.random:
        rng = np.random.default_rng(args.seed)
        grid = Grid(args.n, args.m, args.random, args.Y if args.m else 0.0)
        vals = rng.standard_normal(grid.shape)
        if args.m:
            vals = vals * (_margin_mask(grid, args.radius_cap))
        f = GridFunction(grid, vals)
    else:
        raise UsageError("give --input, --random N or --check-domination")
    g = f.grid
    if args.op == "heat":
        result = heat_max_op(f, TimeSet.geometric(args.R, args.J))
        mismatch = False
    else:
        cap = min(args.radius_cap, 0.5)
        radii = RadiiSet.default(g, cap)
        if args.op == "torus":
            result = torus_max_op(f, radii)
        elif args.op == "waveguide":
            result = waveguide_max_op(f, radii)
        else:
            result = local_max_op(f, radii)
        mismatch = False
        if args.oracle:
            ref = naive_max_op(f, radii)
            mismatch = write_csv(ref) != write_csv(result)
    header = [f"torusheat {__version__}", f"command: maximal compute op={args.op}"]
    header += [f"{k}={v}" for k, v in sorted(_resolved(args).items())]
    if args.oracle and args.op != "heat":
        header.append(f"oracle_identical={0 if mismatch else 1}")
    text = write_csv(result, header=header)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_VIOLATION if mismatch else EXIT_OK


def _margin_mask(grid: Grid, margin: float) -> np.ndarray:
    mask = np.ones(grid.shape)
    for i in range(grid.dim_torus, grid.ndim):
        y = grid.axis(i)
        ok = (y + grid.Y >= margin + 1e-12) & (grid.Y - y >= margin + 1e-12)
        shape = [1] * grid.ndim
        shape[i] = grid.N
        mask = mask * ok.reshape(shape)
    return mask


def _maximal_domination(args) -> int:
    if args.input:
        suite = [(args.input, read_csv(args.input))]
    else:
        suite = domination_suite(args.suite_N, args.seed)
    out = Output(args)
    slack_buf = io.StringIO()
    sw = csv.writer(slack_buf, lineterminator="\n")
    sw.writerow(["function", "index", "x", "heat_max", "torus_max", "phi_R_f", "slack"])
    out.row("function", "constant", "min_slack", "discretization", "ok")
    bad = 0
    for name, f in suite:
        rep = check_domination(f, args.R, args.J)
        bad += not rep.ok
        out.row(name, rep.constant, rep.min_slack, rep.discretization, rep.ok)
        xs = f.grid.points().reshape(-1, f.grid.ndim)
        flat = zip(rep.heat_max.values.ravel(), rep.torus_max.values.ravel(), rep.smoothed.values.ravel(), rep.slack.values.ravel())
        for i, (hm, mt, pr, s) in enumerate(flat):
            sw.writerow([name, i, ";".join(_cell(c) for c in xs[i]), _cell(hm), _cell(mt), _cell(pr), _cell(s)])
    if args.slack_out:
        with open(args.slack_out, "w", newline="") as fh:
            fh.write(slack_buf.getvalue())
    else:
        out.raw("# per-point slack\n")
        out.raw(slack_buf.getvalue())
    out.close()
    return EXIT_VIOLATION if bad else EXIT_OK


# --------------------------------------------------------------------------- weights


def _verdict_row(out: Output, name, p, t0, v):
    out.row(name, p, t0, v.status.value, v.estimate, v.tail_bound, v.levels)


def cmd_weights_check(args) -> int:
    space = args.space or ("WG" if args.m else "T")
    m = 0 if space == "T" else max(args.m, 1)
    v = parse_weight(args.weight, args.n, m)
    out = Output(args)
    out.row("weight", "p", "t0", "status", "estimate", "tail_bound", "levels")
    if space == "T":
        verdict = check_Dp_T(v, args.p, args.t0, args.tol)
    else:
        verdict = check_Dp_WG(v, args.p, args.t0, args.tol, args.Ymax)
    _verdict_row(out, args.weight, args.p, args.t0, verdict)
    if verdict.note:
        out.raw(f"# note: {verdict.note}\n")
    out.close()
    return EXIT_OK


def cmd_weights_catalog(args) -> int:
    out = Output(args)
    out.row("weight", "space", "n", "m", "p", "t0", "expected", "status", "estimate", "tail_bound", "levels", "match")
    bad = 0
    for e, c, v in run_catalog(tol=args.tol):
        match = v.status is c.expected
        bad += not match
        out.row(e.spec, c.space, e.n, e.m, c.p, c.t0, c.expected.value, v.status.value, v.estimate, v.tail_bound, v.levels, match)
    out.raw(f"# mismatches={bad}\n")
    out.close()
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_weights_companion(args) -> int:
    v = parse_weight(args.weight, args.n, args.m)
    pts = _points(args.points)
    out = Output(args)
    width = args.n + args.m
    out.row("weight", "p", "t", *[f"z{i + 1}" for i in range(width)], "g", "u", "levels")
    for z in pts:
        if len(z) != width:
            raise UsageError(f"point {z} needs {width} coordinates")
        if args.m:
            c = companion_weight_WG(v, args.p, args.t, z, args.tol, args.Ymax)
        else:
            c = companion_weight_T(v, args.p, args.t, z, args.tol)
        out.row(args.weight, args.p, args.t, *z, c.g, c.u, c.levels)
    out.close()
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags take precedence")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--seed", type=int, default=20240601)

    parser = argparse.ArgumentParser(prog="torusheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"torusheat {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    kernel = groups.add_parser("kernel", help="heat kernel evaluation and verification")
    kact = kernel.add_subparsers(dest="action", required=True)
    p = kact.add_parser("verify", parents=[common], help="sandwich, ladder and dual-representation sweep")
    p.add_argument("--dims", default="1,2")
    p.add_argument("--t-min", type=float, default=1e-4)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-count", type=int, default=25)
    p.add_argument("--x-samples", type=int, default=50)
    p.add_argument("--y-samples", type=int, default=20, help="waveguide samples per time (T^1 x R)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--slack", type=float, default=1e-12)
    p.set_defaults(func=cmd_kernel_verify)

    p = kact.add_parser("eval", parents=[common], help="evaluate the kernel at one point")
    p.add_argument("--x", required=True, help="torus coordinates, comma separated")
    p.add_argument("--y", default="", help="euclidean coordinates for the waveguide kernel")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--switch-t", type=float, default=1 / (2 * math.pi))
    p.add_argument("--representation", choices=[r.value for r in Representation], default="auto")
    p.set_defaults(func=cmd_kernel_eval)

    conv = groups.add_parser("converge", help="pointwise convergence experiments")
    cact = conv.add_subparsers(dest="action", required=True)
    p = cact.add_parser("run", parents=[common])
    p.add_argument("--f", default="cos:1", help="cos:k | one | bump:w | random:K | remark | showcase | file:path")
    p.add_argument("--v", default="const:1", help="weight mini-language")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--times", default="", help="comma separated times (overrides --t-max/--t-count)")
    p.add_argument("--t-max", type=float, default=0.1)
    p.add_argument("--t-count", type=int, default=12)
    p.add_argument("--probes", default="", help="probe points, ';' between points")
    p.add_argument("--refine", default="", help="comma separated log2 grid sizes: heat-maximal probe under refinement")
    p.add_argument("--R", type=float, default=1 / 16)
    p.add_argument("--J", type=int, default=40)
    p.set_defaults(func=cmd_converge)

    mx = groups.add_parser("maximal", help="maximal operators")
    mact = mx.add_subparsers(dest="action", required=True)
    p = mact.add_parser("compute", parents=[common])
    p.add_argument("--input", help="GridFunction CSV")
    p.add_argument("--random", type=int, default=0, help="use a seeded random grid with this many points per axis")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--Y", type=float, default=1.0)
    p.add_argument("--op", choices=["torus", "waveguide", "heat", "local"], default="torus")
    p.add_argument("--radius-cap", type=float, default=0.5, help="ball radius cap for the local operators")
    p.add_argument("--R", type=float, default=1 / 16, help="time window for the heat maximal operator")
    p.add_argument("--J", type=int, default=40)
    p.add_argument("--oracle", action="store_true", help="compare with the naive implementation")
    p.add_argument("--check-domination", action="store_true")
    p.add_argument("--suite-N", type=int, default=256)
    p.add_argument("--slack-out", default="")
    p.set_defaults(func=cmd_maximal)

    w = groups.add_parser("weights", help="weight classes")
    wact = w.add_subparsers(dest="action", required=True)
    p = wact.add_parser("check", parents=[common])
    p.add_argument("weight")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--t0", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--space", choices=["T", "WG"], default=None)
    p.add_argument("--Ymax", type=float, default=64.0)
    p.set_defaults(func=cmd_weights_check)

    p = wact.add_parser("catalog", parents=[common])
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_weights_catalog)

    p = wact.add_parser("companion", parents=[common])
    p.add_argument("weight")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--points", default="0.0")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--Ymax", type=float, default=64.0)
    p.set_defaults(func=cmd_weights_companion)
    return parser


def _leaf_parser(parser: argparse.ArgumentParser, group: str, action: str) -> argparse.ArgumentParser:
    for a in parser._subparsers._group_actions:  # the two-level subcommand tree
        sub = a.choices[group]
        for b in sub._subparsers._group_actions:
            return b.choices[action]
    raise KeyError(group)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        leaf = _leaf_parser(parser, args.group, args.action)
        known = {a.dest: a for a in leaf._actions}
        unknown = sorted(set(conf) - set(known))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for k, v in conf.items():
            if isinstance(known[k], (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                conf[k] = _bool(v)
        leaf.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except (UsageError, OSError, TorusHeatError, ValueError) as exc:
        print(f"torusheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
