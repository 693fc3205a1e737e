"""Command line interface: ``stripelab <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 quadrature failure.  Random corpora come from numpy's PCG64 seeded through
``SeedSequence(seed).spawn(trials)``, one child stream per trial, so results
do not depend on thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import energy1d, energynd, geometry, reflection, search
from .kernels import (
    DomainError,
    ModelParams,
    QuadratureError,
    cbar_constant,
    cq_constant,
    jc_constant,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_QUAD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj, out) -> None:
    out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    cfg = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _threads() -> int:
    raw = os.environ.get("STRIPES_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"STRIPES_THREADS must be an integer, got {raw!r}")


def _ordered_map(fn, items):
    """Map in parallel up to ``STRIPES_THREADS``; results keep input order."""
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _streams(seed: int, trials: int):
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(trials)]


# --- subcommands -------------------------------------------------------------


def cmd_params(args, out):
    params = ModelParams(args.d, args.p, args.tau)
    h, e = search.find_hstar(params)
    _dump(
        {
            "d": params.d,
            "p": params.p,
            "tau": params.tau,
            "q": params.q,
            "beta": params.beta,
            "C_q": cq_constant(params),
            "Cbar_q": cbar_constant(params),
            "J_c": jc_constant(params),
            "h_star": h,
            "e_star": e,
            "length_scale": params.length_scale,
            "err_estimate": 1e-12,
        },
        out,
    )
    return EXIT_OK


def cmd_hstar(args, out):
    params = ModelParams(args.d, args.p)
    h, e = search.find_hstar(params)
    closed = search.hstar_closed_form(params)
    _dump({"h_star": h, "e_star": e, "closed_form": closed, "err_estimate": abs(h - closed)}, out)
    return EXIT_OK


def cmd_energy1d(args, out):
    pset = geometry.PeriodicSet1D.from_json(Path(args.set).read_text())
    params = ModelParams(args.d, args.p, args.tau)
    if not pset.N:
        report = energy1d.EnergyReport(0.0, 0.0, 0.0, [0.0], 0.0, 0.0)
    elif args.tau == 0:
        report = energy1d.f0(pset, params)
    else:
        report = energy1d.f_tau_1d(pset, params)
    if report.err_estimate > args.tol:
        raise QuadratureError("error estimate above tolerance", report.err_estimate)
    _dump(report.to_dict(), out)
    return EXIT_OK


def cmd_energynd(args, out):
    grid = geometry.GridSetND.from_json(Path(args.grid).read_text())
    if args.J is not None:
        params = ModelParams(grid.d, args.p, J=args.J, L=grid.L)
        report = energynd.ftilde(grid, params, args.tol)
    else:
        params = ModelParams(grid.d, args.p, args.tau, L=grid.L)
        report = energynd.f_tau(grid, params, args.tol)
    _dump(report.to_dict(), out)
    return EXIT_OK


def cmd_minimize(args, out):
    params = ModelParams(args.d, args.p)
    N, h, energy = search.minimize_f0_stripes(args.L, params)
    result = {"N": N, "h": h, "energy": energy, "err_estimate": energy1d.f0(geometry.make_stripes(h, args.L), params).err_estimate}
    if args.free:
        rng = _streams(args.seed, 1)[0]
        start = geometry.random_set(rng, args.L, max_intervals=N)
        while start.N != N:
            start = geometry.random_set(rng, args.L, max_intervals=N)
        res = search.minimize_f0_free(start, params, args.steps)
        result["free"] = {
            "initial": json.loads(start.to_json()),
            "final": json.loads(res.set.to_json()),
            "energy": res.energy,
            "converged": res.converged,
            "accepted_steps": len(res.history) - 1,
            "widths": res.set.widths.tolist(),
            "gaps": res.set.gaps.tolist(),
        }
    _dump(result, out)
    return EXIT_OK


def cmd_sweep(args, out):
    params = ModelParams(args.d, args.p)
    grid = search.log_tau_grid(args.tau_from, args.tau_to, args.per_decade)
    records = search.tau_sweep(args.L, params, grid, free=args.free)
    if args.no_timing:
        for r in records:
            r.wall_ms = 0.0
    search.write_sweep_csv(records, args.out)
    _dump({"rows": len(records), "out": str(args.out)}, out)
    return EXIT_OK


def cmd_plotdata(args, out):
    params = ModelParams(args.d, args.p)
    if args.kind == "stripes":
        h = np.linspace(args.h_min, args.h_max, args.points)
        rows = zip(h, energy1d.stripe_energy_inf(h, params))
    else:
        taus = search.log_tau_grid(args.tau_from, args.tau_to, args.per_decade)
        fit = search.scaling_fit(params, taus)
        rows = zip(fit.taus, -fit.energies)
    text = "".join(f"{a!r} {b!r}\n" for a, b in ((float(x), float(y)) for x, y in rows))
    Path(args.out).write_text(text)
    _dump({"out": str(args.out), "kind": args.kind}, out)
    return EXIT_OK


# --- verification suites -----------------------------------------------------


def _random_pset(rng):
    return geometry.random_set(rng, L=float(rng.uniform(1.0, 10.0)))


def _trial_eta(rng, params):
    pset = _random_pset(rng)
    z = float(rng.uniform(-pset.L, pset.L))
    margin = float(np.squeeze(geometry.eta_sum(pset, z) - geometry.omega(pset, z)))
    return margin, 1e-12 * pset.L


def _trial_chessboard(rng, params):
    return energy1d.chessboard_margin(_random_pset(rng), params), 1e-9


def _random_union(rng, lo, hi):
    k = int(rng.integers(0, 5))
    return np.sort(rng.uniform(lo, hi, 2 * k)).reshape(-1, 2)


def _trial_rp(rng, params):
    L1, L2 = rng.uniform(0.5, 4.0, 2)
    pair = reflection.ReflectionPair(
        _random_union(rng, 0.0, L1), _random_union(rng, L1, L1 + L2), L1, L1 + L2, float(rng.uniform(0.25, 4.0))
    )
    return reflection.rp_margin(pair), 1e-9


def _trial_laplace(rng, params):
    return -reflection.laplace_identity_residual(_random_pset(rng), params), 1e-5


def _random_grid(rng, d):
    n, L = (16, 8.0) if d == 2 else (8, 4.0)
    return geometry.random_grid(rng, d=d, n=n, L=L, density=float(rng.uniform(0.2, 0.8)))


def _trial_nonneg(rng, params):
    grid = _random_grid(rng, params.d)
    report = energynd.ftilde(grid, ModelParams(params.d, params.p, J=jc_constant(params)), tol=1.0)
    return report.total, report.err_estimate


def _trial_splitting(rng, params):
    grid = _random_grid(rng, params.d)
    report = energynd.f_tau(grid, params.with_tau(params.tau or 0.5), tol=1.0)
    directional = min(energynd.directional_bound_margins(grid, params))
    # both margins are shifted by their own tolerance, so the slack is zero
    return min(report.splitting_margin + report.err_estimate, directional + 1e-12), 0.0


def _trial_slicing(rng, params):
    grid = _random_grid(rng, params.d)
    worst = 0.0
    for axis in range(grid.d):
        lines = sum(grid.slice(axis, idx).perimeter for idx, _ in grid.lines(axis))
        worst = max(worst, abs(lines * grid.cell ** (grid.d - 1) - grid.per_axis(axis)))
    p_tau = params.with_tau(params.tau or 0.5)
    report = energynd.f_tau(grid, p_tau, tol=1.0)
    sliced = energynd.directional_terms_by_slicing(grid, p_tau)
    gap = max(abs(a - b) for a, b in zip(report.per_direction, sliced))
    return -(worst + max(0.0, gap - report.err_estimate)), 1e-12


SUITES = {
    "eta": _trial_eta,
    "chessboard": _trial_chessboard,
    "rp": _trial_rp,
    "laplace": _trial_laplace,
    "nonneg": _trial_nonneg,
    "splitting": _trial_splitting,
    "slicing": _trial_slicing,
}


def cmd_verify(args, out):
    params = ModelParams(args.d, args.p, args.tau)
    trial = SUITES[args.suite]
    results = _ordered_map(lambda rng: trial(rng, params), _streams(args.seed, args.trials))
    margins = np.array([m for m, _ in results])
    slack = np.array([s for _, s in results])
    failures = np.flatnonzero(margins < -slack)
    _dump(
        {
            "suite": args.suite,
            "trials": args.trials,
            "seed": args.seed,
            "min_margin": float(margins.min()),
            "max_tolerance": float(slack.max()),
            "failures": failures.tolist(),
        },
        out,
    )
    return EXIT_VERIFY if len(failures) else EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stripelab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file supplying option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model(sp, tau=True):
        sp.add_argument("--d", type=int, default=2)
        sp.add_argument("--p", type=float, default=5.0)
        if tau:
            sp.add_argument("--tau", type=float, default=0.0)

    sp = sub.add_parser("params", help="derived constants as JSON")
    model(sp)
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("hstar", help="optimal stripe width")
    model(sp, tau=False)
    sp.set_defaults(func=cmd_hstar)

    sp = sub.add_parser("energy1d", help="energy of a periodic 1D set")
    sp.add_argument("--set", required=True)
    model(sp)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.set_defaults(func=cmd_energy1d)

    sp = sub.add_parser("energynd", help="energy of a pixel set")
    sp.add_argument("--grid", required=True)
    sp.add_argument("--p", type=float, default=5.0)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--J", type=float)
    group.add_argument("--tau", type=float)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.set_defaults(func=cmd_energynd)

    sp = sub.add_parser("minimize", help="minimizers of the limit energy")
    sp.add_argument("--L", type=float, required=True)
    model(sp, tau=False)
    sp.add_argument("--free", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--steps", type=int, default=20000)
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("sweep-tau", help="stripe minimizers along a tau grid, as CSV")
    model(sp, tau=False)
    sp.add_argument("--L", type=float, default=10.0)
    sp.add_argument("--from", dest="tau_from", type=float, default=1e-1)
    sp.add_argument("--to", dest="tau_to", type=float, default=1e-3)
    sp.add_argument("--per-decade", type=int, default=8)
    sp.add_argument("--free", action="store_true")
    sp.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-stable output")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="randomized inequality checks")
    sp.add_argument("--suite", choices=sorted(SUITES), required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    model(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("plotdata", help="two-column text for external plotting")
    sp.add_argument("kind", choices=["stripes", "scaling"])
    model(sp, tau=False)
    sp.add_argument("--h-min", type=float, default=0.5)
    sp.add_argument("--h-max", type=float, default=6.0)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--from", dest="tau_from", type=float, default=1e-1)
    sp.add_argument("--to", dest="tau_to", type=float, default=1e-3)
    sp.add_argument("--per-decade", type=int, default=8)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plotdata)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg_parser = argparse.ArgumentParser(add_help=False)
        cfg_parser.add_argument("--config")
        pre, _ = cfg_parser.parse_known_args(argv)
        cfg = _read_config(pre.config)
        if cfg:
            for sp in parser._subparsers._group_actions[0].choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in cfg.items() if k in known})
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (DomainError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except QuadratureError as exc:
        err.write(f"quadrature failure: {exc} (achieved {exc.error_estimate:.3g})\n")
        return EXIT_QUAD


def main() -> None:
    sys.exit(run())
