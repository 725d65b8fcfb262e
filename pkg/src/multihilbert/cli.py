"""Command-line front end: ``multihilbert <task> --config cfg.json --out dir``.

Tasks: ``validate``, ``spectrum``, ``diagonalize``, ``rhp-check``, ``sweep``.
Exit status is 0 when every check meets its tolerance, 1 on a tolerance
violation, 2 when the configuration cannot be parsed or is invalid, and 3
on a numerical failure.  Errors are reported as JSON on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import discretize as dz
from . import exact_diag as ed
from . import rhp
from . import spectral as sp
from .errors import ConfigurationError, MultiHilbertError
from .geometry import compactify, configuration_from_dict

TASKS = ("validate", "spectrum", "diagonalize", "rhp-check", "sweep")

TOL = {
    "norm_bound": 1e-3,
    "pairing": 1e-8,
    "orthogonality": 1e-10,
    "bezout": 1e-10,
    "diag_vs_quadrature": 1e-4,
    "det": 1e-6,
    "jump": 1e-4,
    "symmetry": 1e-8,
    "resolvent_identity": 1e-8,
    "resolvent_inverse": 1e-4,
    "solve_residual": 1e-12,
}


class ConfigError(Exception):
    pass


def check(value, tol, kind="max"):
    """A reported number with the tolerance it is tested against."""
    value = float(value)
    ok = value <= tol if kind == "max" else value < tol
    return {"value": value, "tolerance": tol, "pass": bool(ok)}


def _all_pass(obj):
    if isinstance(obj, dict):
        if "pass" in obj and "tolerance" in obj:
            return obj["pass"]
        return all(_all_pass(v) for v in obj.values())
    if isinstance(obj, list):
        return all(_all_pass(v) for v in obj)
    return True


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (int, np.integer, str)):
        return str(v)
    return repr(float(v))


def _grid_params(raw):
    g = dict(raw.get("grid", {}))
    return {"panels": int(g.get("panels", 16)), "order": int(g.get("order", 8)),
            "grading": float(g.get("grading", 0.5))}


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc


def _cfg(raw):
    if "J" not in raw or "E" not in raw:
        raise ConfigError("configuration needs 'J' and 'E'")
    return configuration_from_dict(raw)


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    raise ConfigError(f"expected [re, im], got {v!r}")


# ----------------------------------------------------------------------
# tasks


def task_validate(raw, out, args):
    cfg = _cfg(raw)
    report = {
        "configuration": cfg.to_dict(),
        "endpoints": [[p if np.isfinite(p) else "inf", kind] for p, kind in cfg.endpoints],
        "n_double": cfg.n_double,
        "merged_at": list(cfg.merged_at),
    }
    _write_json(out / "report.json", _with_meta(report, raw, args))
    return report


def task_spectrum(raw, out, args):
    cfg = _cfg(raw)
    mobius = None
    if not cfg.bounded:
        # the spectrum is invariant under the unitary Mobius pull-back
        m, cfg = compactify(cfg)
        mobius = [m.a, m.b, m.c, m.d]
    gp = _grid_params(raw)
    grid = dz.build_grid(cfg, **gp)
    K = dz.assemble_K(cfg, grid)
    rep = sp.spectral_report(K)
    sp.write_column_csv(rep.singular_values, out / "svals.csv")
    sp.write_column_csv(rep.eigenvalues, out / "eigs.csv")
    lam = np.asarray(rep.eigenvalues)
    checks = {
        "norm_bound": check(np.max(np.abs(lam)) - 1.0, TOL["norm_bound"]),
        "pairing": check(rep.pairing_residual, TOL["pairing"]),
    }
    report = {
        "grid": rep.grid,
        "mobius": mobius,
        "checks": checks,
        # exponential decay is only asserted when J and E are apart
        "decay": None if rep.decay_rate is None else {
            "rate": rep.decay_rate,
            "r2": check(1.0 - rep.decay_r2, 0.01) if cfg.distance() > 0 else rep.decay_r2,
            "window": list(sp.auto_window(rep.singular_values)),
        },
        "partial_p_sums": {k: {"total": v["total"],
                               "last_increment_ratio": v["last_increment_ratio"]}
                           for k, v in rep.to_dict()["partial_p_sums"].items()},
        "histogram": rep.histogram,
        "band_count": sp.band_count(lam),
    }
    _write_json(out / "report.json", _with_meta(report, raw, args))
    return report


def _default_test_function(sys):
    """``|beta_od(x) beta_ev(x)|`` on J, zero on E; ``1 - x^2`` for b = (-1, 1)."""
    def f(x):
        x = np.asarray(x, dtype=float)
        on_J = np.searchsorted(sys.b, x, side="right") % 2 == 1
        val = np.abs(np.polyval(sys.beta_od, x) * np.polyval(sys.beta_ev, x))
        return np.where(on_J, val, 0.0)

    return f


def task_diagonalize(raw, out, args):
    if "b" not in raw:
        raise ConfigError("diagonalize needs {'b': [...]}")
    try:
        sys_ = ed.build_system(raw["b"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    rng = np.random.default_rng(args.seed)
    params = raw.get("params", {})
    bez = ed.bezout_matrix(sys_)
    _write_csv(out / "bezout.csv", [f"c{j}" for j in range(sys_.n)], bez.B.tolist())

    t = np.linspace(-20, 20, int(params.get("t_points", 1000)))
    M_in = ed.m_field(sys_, bez, "in", t)
    M_ex = ed.m_field(sys_, bez, "ex", t)
    eye = np.eye(sys_.n)
    res_in = np.max(np.abs(np.einsum("tji,tjk->tik", M_in, M_in) - eye), axis=(1, 2))
    res_ex = np.max(np.abs(np.einsum("tji,tjk->tik", M_ex, M_ex) - eye), axis=(1, 2))
    _write_csv(out / "orthogonality.csv", ["t", "residual_in", "residual_ex"],
               zip(t, res_in, res_ex))

    z = ed.random_chart_points(sys_, "ex", 100, rng)
    x = ed.random_chart_points(sys_, "in", 100, rng)
    recon = float(np.max(np.abs(bez.reconstruct(z, x) - bez.bilinear(z, x))))
    ident = ed.identity_residuals(sys_, bez, z, x)

    f = _default_test_function(sys_)
    zs = np.sort(ed.random_chart_points(sys_, "ex", int(params.get("points", 20)), rng,
                                        spread=1.5))
    diag = ed.apply_A_diag(sys_, f, zs)
    quad = ed.quadrature_apply_A(sys_, f, zs)
    rel = np.abs(diag - quad) / np.maximum(np.abs(quad), 1e-300)
    _write_csv(out / "comparison.csv", ["z", "diagonal", "quadrature", "rel_error"],
               zip(zs, diag, quad, rel))

    report = {
        "system": sys_.to_dict(),
        "bezout": bez.B.tolist(),
        "rho": bez.rho.tolist(),
        "checks": {
            "orthogonality_in": check(np.max(res_in), TOL["orthogonality"]),
            "orthogonality_ex": check(np.max(res_ex), TOL["orthogonality"]),
            "bezout_reconstruction": check(recon, TOL["bezout"]),
            "identity_cosh_sinh": check(ident["cosh_sinh"], TOL["bezout"]),
            "identity_sinh_bezout": check(ident["sinh_bezout"], TOL["bezout"]),
            "identity_kernel": check(ident["kernel"], TOL["bezout"]),
            "diag_vs_quadrature": check(np.max(rel), TOL["diag_vs_quadrature"]),
        },
    }
    _write_json(out / "report.json", _with_meta(report, raw, args))
    return report


def _probe_points(cfg, label, count):
    """Probe points spread over the parts of one set, away from endpoints."""
    parts = cfg.J.parts if label == "J" else cfg.E.parts
    pts = []
    for p, idx in zip(parts, np.array_split(np.arange(count), len(parts))):
        s = 0.1 + 0.8 * (np.arange(idx.size) + 0.5) / max(idx.size, 1)
        pts.extend(p.lo + (p.hi - p.lo) * s)
    return np.asarray(pts)


def _off_u_points(cfg, count, rng):
    lo = min(p.lo for p, _ in cfg.subintervals())
    hi = max(p.hi for p, _ in cfg.subintervals())
    span = hi - lo
    xr = rng.uniform(lo - 0.5 * span, hi + 0.5 * span, count)
    yr = rng.choice([-1.0, 1.0], count) * rng.uniform(0.05, 1.0, count) * span
    return xr + 1j * yr


def task_rhp_check(raw, out, args):
    cfg = _cfg(raw)
    gp = _grid_params(raw)
    lam = _complex(raw.get("lambda", [0.0, 2.0]))
    n_probes = int(raw.get("probes", 10))
    rng = np.random.default_rng(args.seed)
    grid = dz.build_grid(cfg, **gp)
    K = dz.assemble_K(cfg, grid)
    sol = rhp.solve_F(cfg, grid, K, lam)
    field = rhp.GammaField(sol)

    zs = _off_u_points(cfg, 20, rng)
    det = max(abs(field.det(z) - 1) for z in zs)
    probes = np.r_[_probe_points(cfg, "J", n_probes), _probe_points(cfg, "E", n_probes)]
    jumps = rhp.check_jump(field, probes)
    sym = rhp.symmetry_residuals(cfg, grid, K, lam, zs[:5])
    res = rhp.resolvent_checks(field)

    rows = []
    for path in raw.get("paths", []):
        z0, z1 = _complex(path[0]), _complex(path[1])
        for s in np.linspace(0.0, 1.0, int(path[2]) if len(path) > 2 else 50):
            z = z0 + s * (z1 - z0)
            try:
                G = field(z)
            except MultiHilbertError:
                continue
            rows.append([z.real, z.imag] + [v for e in G.ravel() for v in (e.real, e.imag)])
    _write_csv(out / "gamma_path.csv",
               ["re_z", "im_z"] + [f"{p}_{ij}" for ij in ("11", "12", "21", "22")
                                   for p in ("re", "im")], rows)

    report = {
        "lambda": [lam.real, lam.imag],
        "condition": sol.cond,
        "checks": {
            "solve_residual": check(sol.residual(), TOL["solve_residual"]),
            "det": check(det, TOL["det"]),
            "jump_extrapolated": check(max(jumps["extrapolated"]), TOL["jump"]),
            "jump_boundary": check(max(jumps["exact"]), TOL["jump"]),
            "symmetry_conjugation": check(sym["conjugation"], TOL["symmetry"]),
            "symmetry_sign": check(sym["sign"], TOL["symmetry"]),
            "resolvent_identity": check(res["identity"], TOL["resolvent_identity"]),
            "resolvent_inverse": check(res["inverse_rel"], TOL["resolvent_inverse"]),
        },
    }
    _write_json(out / "report.json", _with_meta(report, raw, args))
    return report


def task_sweep(raw, out, args):
    cfg = _cfg(raw)
    gp = _grid_params(raw)
    lams = [_complex(v) for v in raw.get("lambdas", [[0, 2], [0, 1], [2, 0], [0.5, 0.5]])]
    rng = np.random.default_rng(args.seed)
    grid = dz.build_grid(cfg, **gp)
    K = dz.assemble_K(cfg, grid)
    mu = np.linalg.eigvalsh(K.entries)
    zs = _off_u_points(cfg, 10, rng)

    def one(lam):
        sol = rhp.solve_F(cfg, grid, K, lam, eigs=mu)
        field = rhp.GammaField(sol)
        return [lam.real, lam.imag, sol.cond, max(abs(field.det(z) - 1) for z in zs)]

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        rows = list(pool.map(one, lams))
    _write_csv(out / "sweep.csv", ["re_lambda", "im_lambda", "condition", "det_residual"], rows)

    panels = raw.get("refine", [gp["panels"], 2 * gp["panels"]])
    counts, sizes = sp.refinement_counts(cfg, panels, grading=gp["grading"], order=gp["order"])
    report = {
        "checks": {f"det_{i}": check(r[3], TOL["det"]) for i, r in enumerate(rows)},
        "refinement": {"panels": list(panels), "nodes": sizes, "band_counts": counts},
    }
    _write_json(out / "report.json", _with_meta(report, raw, args))
    return report


DISPATCH = {
    "validate": task_validate,
    "spectrum": task_spectrum,
    "diagonalize": task_diagonalize,
    "rhp-check": task_rhp_check,
    "sweep": task_sweep,
}


def _with_meta(report, raw, args):
    report = dict(report)
    report["meta"] = {
        "package": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "seed": args.seed,
        "parameters": raw,
    }
    report["all_pass"] = _all_pass(report.get("checks", {}))
    return report


def _fail(code, kind, message, **extra):
    payload = {"error": kind, "message": message}
    payload.update(extra)
    print(json.dumps(payload, sort_keys=True, default=str), file=sys.stderr)
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="multihilbert", description=__doc__.splitlines()[0])
    p.add_argument("task", nargs="?", choices=TASKS,
                   help="task to run; defaults to the 'task' key of the config")
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised checks")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="workers for lambda sweeps")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _load(args.config)
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        task = args.task or raw.get("task")
        if task not in DISPATCH:
            raise ConfigError(f"unknown or missing task {task!r}; choose from {TASKS}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = DISPATCH[task](raw, out, args)
    except (ConfigError, ConfigurationError) as exc:
        return _fail(2, type(exc).__name__, str(exc))
    except MultiHilbertError as exc:
        return _fail(3, type(exc).__name__, str(exc),
                     **{k: v for k, v in vars(exc).items() if not k.startswith("_")})
    except np.linalg.LinAlgError as exc:
        return _fail(3, "LinAlgError", str(exc))
    return 0 if _all_pass(report.get("checks", {})) else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
