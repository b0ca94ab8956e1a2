"""Command-line interface.

Every command prints a JSON document on stdout (or writes it to ``--out``).
Data files are byte-identical for identical arguments, seed and thread
count; the timestamped run manifest goes to a ``.manifest.json`` sidecar.
The thread count comes from ``LOGENERGY_THREADS`` (default: all CPUs).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds, io, minimizer, verify, wasserstein
from .geometry import GeometryError

log = logging.getLogger("logenergy")


def _sig(x: float, digits: int = 15) -> float:
    return float(f"{x:.{digits}g}")


def _emit(doc: dict, out: str | None, command: str, params: dict, seed=None) -> None:
    doc = dict(doc)
    doc["manifest"] = io.manifest(command, params, seed, timestamp=False)
    text = io.dumps(doc)
    if out:
        Path(out).write_text(text)
        _sidecar(out, command, params, seed)
    else:
        sys.stdout.write(text)


def _sidecar(path: str, command: str, params: dict, seed=None) -> None:
    Path(str(path) + ".manifest.json").write_text(io.dumps(io.manifest(command, params, seed)))


def cmd_constants(args) -> int:
    c = bounds.constants()
    doc = {k: _sig(v) for k, v in c.items()}
    doc.update({
        "u(2)": _sig(bounds.u(2.0)),
        "v(2)": _sig(bounds.v(2.0)),
        "C_tilde": _sig(bounds.c_tilde()),
        "C_BHS": _sig(bounds.c_bhs()),
        "C_lauritsen": _sig(bounds.c_lauritsen()),
    })
    _emit(doc, args.out, "constants", {})
    return 0


def cmd_bound(args) -> int:
    if args.eps is not None and not bounds.v_valid(args.eps):
        log.error("eps must lie in (0, %.10g), got %r", bounds.EPS_MAX, args.eps)
        return 2
    report = bounds.bound_report(None if args.maximize or args.eps is None else args.eps)
    _emit(report.to_dict(), args.out, "bound", {"eps": args.eps, "maximize": args.maximize})
    return 0


def cmd_verify(args) -> int:
    checks = verify.run_checks(args.samples, args.seed, io.thread_count(), sign_flip=args.inject_sign_flip)
    print(verify.format_table(checks), file=sys.stderr)
    ok = all(c.passed for c in checks)
    doc = {"passed": ok, "checks": [c.to_dict() for c in checks]}
    _emit(doc, args.out, "verify", {"samples": args.samples, "inject_sign_flip": args.inject_sign_flip},
          args.seed)
    return 0 if ok else 1


def _options(args) -> minimizer.MinimizeOptions:
    return minimizer.MinimizeOptions(max_iters=args.max_iters, grad_tol=args.grad_tol,
                                     restarts=args.restarts, seed=args.seed, init=args.init,
                                     threads=io.thread_count())


def _params(args, *names) -> dict:
    return {k: getattr(args, k) for k in names}


def cmd_minimize(args) -> int:
    opts = _options(args)
    res = minimizer.minimize_points(args.n, opts)
    params = _params(args, "n", "restarts", "init", "max_iters", "grad_tol")
    if args.out:
        io.write_points(args.out, res.points, [f"N={args.n} energy={res.energy!r}"])
        _sidecar(args.out, "minimize", params, args.seed)
    doc = {"n": args.n, "energy": res.energy, "iters": res.iters, "grad_norm": res.grad_norm,
           "converged": res.converged, "status": res.status}
    _emit(doc, args.json, "minimize", params, args.seed)
    return 0


def cmd_fit(args) -> int:
    n_list = list(range(args.nmin, args.nmax + 1, args.step))
    opts = _options(args)
    kept = {}
    curve = minimizer.energy_curve(n_list, opts, keep=kept)
    fit = minimizer.fit_clog(curve)
    params = _params(args, "nmin", "nmax", "step", "restarts", "init", "max_iters", "grad_tol")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for n, res in kept.items():
            io.write_points(out / f"points_{n:05d}.txt", res.points, [f"N={n} energy={res.energy!r}"])
    doc = {
        "curve": [{"n": n, "energy": e} for n, e in curve],
        **fit.to_dict(),
        "bracket": {"C_tilde": bounds.c_tilde(), "C_BHS": bounds.c_bhs()},
    }
    _emit(doc, args.json, "fit", params, args.seed)
    return 0


def cmd_plot_data(args) -> int:
    text = bounds.grid_csv(bounds.plot_grid(args.lo, args.hi, args.steps))
    if args.out:
        Path(args.out).write_bytes(text.encode())
        _sidecar(args.out, "plot-data", _params(args, "lo", "hi", "steps"))
    else:
        sys.stdout.write(text)
    return 0


def cmd_transport(args) -> int:
    cfg = io.read_points(args.config)
    workers = io.thread_count()
    s_gz, s_ft = np.random.SeedSequence(args.seed).spawn(2)
    check = wasserstein.gz_inequality_check(cfg, args.eps, args.samples, s_gz, workers)
    ft = wasserstein.fejes_toth_check(cfg, args.eps, args.samples, s_ft, workers)
    doc = {**check.to_dict(), "n": int(cfg.shape[0]), "eps": args.eps, "fejes_toth": ft}
    _emit(doc, args.out, "transport", {"config": str(args.config), "eps": args.eps, "samples": args.samples},
          args.seed)
    ok = check.satisfied and (ft["skipped"] or ft["satisfied"])
    return 0 if ok else 1


def _add_min_opts(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--init", choices=("spiral", "random"), default="spiral")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--grad-tol", type=float, default=None, help="default 1e-10 * N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logenergy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="closed-form constants")
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("bound", help="u, v and u+v at one eps, or the maximizer")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", type=float)
    g.add_argument("--maximize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="closed forms vs quadrature oracles")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-sign-flip", action="store_true", help="negative control: must fail")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("minimize", help="minimize the energy of N points")
    p.add_argument("--n", type=int, required=True)
    _add_min_opts(p)
    p.add_argument("--out", help="point-set file for the best configuration")
    p.add_argument("--json", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("fit", help="minimize over a range of N and fit the linear term")
    p.add_argument("--nmin", type=int, default=50)
    p.add_argument("--nmax", type=int, default=500)
    p.add_argument("--step", type=int, default=50)
    _add_min_opts(p)
    p.add_argument("--out-dir", help="directory for per-N point-set files")
    p.add_argument("--json", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot-data", help="CSV grid of eps, u, v, u+v")
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=2.19)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("transport", help="W1 witness vs 2 I(mu), and the Fejes Toth inequality")
    p.add_argument("--config", required=True)
    p.add_argument("--eps", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_transport)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GeometryError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
