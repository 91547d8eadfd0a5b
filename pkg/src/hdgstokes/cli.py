"""Batch driver: convergence studies, preconditioner comparisons, mesh info.

Subcommands: converge, precond, info, solve. All results go to CSV on
stdout or to --out; every CSV starts with a comment line embedding the
full configuration, and identical configurations (including the seed)
produce byte-identical output. Exit codes: 0 success, 1 usage error,
2 numerical failure.

Option precedence: command-line flags > --config file (key=value lines)
> defaults (tau=6, nu=1, eps=-1, tol=1e-6, overlap=1).
"""

import argparse
import sys

import numpy as np

from . import krylov, mesh, schwarz, system, verify
from .fem_space import build_dof_map

CASE_BC = {"curl_trig": "tvnf", "bubble": "nvtf", "poiseuille": "tvnf"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    p = _Parser(prog="hdgstokes")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("converge", description="manufactured-solution convergence study")
    c.add_argument("--case", choices=sorted(CASE_BC))
    c.add_argument("--bc", choices=["tvnf", "nvtf"])
    c.add_argument("--eps", type=int, choices=[-1, 1])
    c.add_argument("--tau", type=float)
    c.add_argument("--nu", type=float)
    c.add_argument("--n0", type=int)
    c.add_argument("--levels", type=int)
    c.add_argument("--out")
    c.add_argument("--config")

    q = sub.add_parser("precond", description="GMRES preconditioner comparison")
    q.add_argument("--case", choices=sorted(CASE_BC))
    q.add_argument("--bc", choices=["tvnf", "nvtf"])
    q.add_argument("--eps", type=int, choices=[-1, 1])
    q.add_argument("--tau", type=float)
    q.add_argument("--nu", type=float)
    q.add_argument("--n", type=int)
    q.add_argument("--parts")
    q.add_argument("--overlap", type=int)
    q.add_argument("--precond", choices=["ras", "mras-tvnf", "mras-nvtf", "none"])
    q.add_argument("--tol", type=float)
    q.add_argument("--max-iter", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--guess", choices=["random", "zero"])
    q.add_argument("--out")
    q.add_argument("--config")

    i = sub.add_parser("info", description="mesh and dof statistics")
    i.add_argument("--domain", choices=["unit_square", "t_shape"], default="unit_square")
    i.add_argument("--n", type=int, required=True)
    i.add_argument("--bc", choices=["tvnf", "nvtf"], default="tvnf")

    s = sub.add_parser("solve", description="solve one case, export fields")
    s.add_argument("--case", choices=sorted(CASE_BC))
    s.add_argument("--domain", default="unit_square")
    s.add_argument("--n", type=int)
    s.add_argument("--eps", type=int, choices=[-1, 1])
    s.add_argument("--tau", type=float)
    s.add_argument("--nu", type=float)
    s.add_argument("--out")
    s.add_argument("--config")
    return p


_DEFAULTS = dict(tau=6.0, nu=1.0, eps=-1, tol=1e-6, overlap=1, n0=8, levels=4,
                 seed=0, guess="random", max_iter=400, parts="uniform:2x2",
                 precond="ras")


def _merge(args, keys):
    """flags > config file > defaults; missing required keys raise UsageError."""
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"bad config line {line!r}")
                k, _, v = line.partition("=")
                cfg[k.strip()] = v.strip()
    out = {}
    for key, cast in keys.items():
        v = getattr(args, key, None)
        if v is None and key in cfg:
            v = cast(cfg[key])
        if v is None:
            v = _DEFAULTS.get(key)
        out[key] = v
    return out


def _check_case(cfg):
    if cfg["case"] is None:
        raise UsageError("--case is required")
    bc = cfg.get("bc") or CASE_BC[cfg["case"]]
    if bc != CASE_BC[cfg["case"]]:
        raise UsageError(f"case {cfg['case']} pairs with "
                         f"{CASE_BC[cfg['case']].upper()} boundary conditions, not {bc}")
    cfg["bc"] = bc
    return cfg


def _fmt(x):
    return repr(float(x))


def _config_comment(cmd, cfg):
    body = " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)
                    if k not in ("out", "config"))
    return f"# config: command={cmd} {body}\n"


def _emit(text, out):
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run_converge(cfg):
    cfg = _check_case(cfg)
    exact = verify.catalogue(cfg["case"], nu=cfg["nu"])
    T = mesh.generate("unit_square", cfg["n0"])
    reports = []
    for _ in range(cfg["levels"]):
        dm = build_dof_map(T, cfg["bc"])
        sysm = system.assemble(T, dm, nu=cfg["nu"], tau=cfg["tau"], eps=cfg["eps"],
                               f=exact.f, g=exact.g)
        x = system.solve_direct(sysm)
        reports.append(verify.error_norms(T, dm, x, exact, tau=cfg["tau"]))
        T = mesh.refine_uniform(T)
    hs = [r.h for r in reports]
    eoc_e = verify.eoc([r.err_energy for r in reports], hs)
    eoc_u = verify.eoc([r.err_l2_u for r in reports], hs)
    lines = [_config_comment("converge", cfg),
             "h,err_energy,err_h,err_l2_u,err_l2_p,eoc_energy,eoc_l2_u\n"]
    for r, se, su in zip(reports, eoc_e, eoc_u):
        lines.append(",".join(_fmt(v) for v in
                              (r.h, r.err_energy, r.err_h, r.err_l2_u,
                               r.err_l2_p, se, su)) + "\n")
    _emit("".join(lines), cfg["out"])
    return reports


def run_precond(cfg):
    cfg = _check_case(cfg)
    exact = verify.catalogue(cfg["case"], nu=cfg["nu"])
    T = mesh.generate("unit_square", cfg["n"])
    dm = build_dof_map(T, cfg["bc"])
    sysm = system.assemble(T, dm, nu=cfg["nu"], tau=cfg["tau"], eps=cfg["eps"],
                           f=exact.f, g=exact.g)
    x_ref = system.solve_direct(sysm)

    if cfg["precond"] == "none":
        apply_M, n_parts = None, 0
    else:
        parts = schwarz.decompose(T, cfg["parts"])
        dec = schwarz.build_decomposition(T, dm, parts, cfg["overlap"])
        n_parts = dec.n_parts
        if cfg["precond"] == "ras":
            pre = schwarz.build_ras(sysm.A, dec)
        else:
            pre = schwarz.build_mras(sysm, T, dec, cfg["precond"].split("-")[1])
        apply_M = pre.apply

    if cfg["guess"] == "random":
        rng = np.random.default_rng(cfg["seed"])
        x0 = rng.standard_normal(dm.n_total)
    else:
        x0 = np.zeros(dm.n_total)
    x, rep = krylov.gmres(lambda v: sysm.A @ v, sysm.rhs, x0=x0, apply_M=apply_M,
                          tol=cfg["tol"], x_ref=x_ref, max_iter=cfg["max_iter"])
    lines = [_config_comment("precond", cfg),
             "N,kind,iterations,converged\n",
             f"{n_parts},{cfg['precond']},{rep.iterations},{int(rep.converged)}\n"]
    _emit("".join(lines), cfg["out"])
    if cfg["out"]:
        krylov.write_history_csv(rep, cfg["out"] + ".history.csv", seed=cfg["seed"])
    return rep


def run_info(cfg):
    T = mesh.generate(cfg["domain"], cfg["n"])
    dm = build_dof_map(T, cfg["bc"])
    print(f"triangles={T.n_triangles} edges={T.n_edges} dofs={dm.n_total}")
    return T, dm


def run_solve(cfg):
    if cfg["domain"] != "unit_square":
        raise UsageError(
            "solve supports the unit square only: the T-shaped benchmark mixes "
            "Dirichlet inflow with TVNF outflow, which is out of scope")
    cfg = _check_case(cfg)
    exact = verify.catalogue(cfg["case"], nu=cfg["nu"])
    T = mesh.generate("unit_square", cfg["n"])
    dm = build_dof_map(T, cfg["bc"])
    sysm = system.assemble(T, dm, nu=cfg["nu"], tau=cfg["tau"], eps=cfg["eps"],
                           f=exact.f, g=exact.g)
    x = system.solve_direct(sysm)
    B = verify._batch(T)
    vd, _, pres = verify._dof_values(T, dm, x)
    centers = T.barycenters()
    uh = verify._eval_field(B, verify._mono_coeffs(B, vd), centers[:, None, :])[:, 0, :]
    lines = [_config_comment("solve", cfg), "x,y,ux,uy,p\n"]
    for c, u, p in zip(centers, uh, pres):
        lines.append(",".join(_fmt(v) for v in (c[0], c[1], u[0], u[1], p)) + "\n")
    _emit("".join(lines), cfg["out"])


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "converge":
            keys = dict(case=str, bc=str, eps=int, tau=float, nu=float, n0=int,
                        levels=int, out=str)
            run_converge(_merge(args, keys))
        elif args.command == "precond":
            keys = dict(case=str, bc=str, eps=int, tau=float, nu=float, n=int,
                        parts=str, overlap=int, precond=str, tol=float,
                        max_iter=int, seed=int, guess=str, out=str)
            cfg = _merge(args, keys)
            if cfg["n"] is None:
                raise UsageError("--n is required")
            run_precond(cfg)
        elif args.command == "info":
            run_info(dict(domain=args.domain, n=args.n, bc=args.bc))
        elif args.command == "solve":
            keys = dict(case=str, domain=str, n=int, eps=int, tau=float, nu=float,
                        out=str)
            cfg = _merge(args, keys)
            if cfg["n"] is None:
                raise UsageError("--n is required")
            run_solve(cfg)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (krylov.FactorizationError, mesh.MeshError, ValueError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
