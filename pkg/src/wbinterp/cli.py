"""Batch command-line front end.

Every command writes JSON (and, for sweeps, CSV) under --out.  Each file
carries a manifest echoing the resolved configuration and the library
version, so identical configs reproduce identical bytes.

Exit codes: 0 success, 2 config error, 3 numeric non-convergence
(diagnostics still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .density import DEFAULT_R_GRID, default_a_grid, s_uniform_estimate
from .errors import NonConvergenceError, WBInterpError
from .schemes import (
    InterpolationScheme,
    build_scheme,
    check_admissible,
    coset_norm,
    jet_from_function,
)
from .sequences import parse_points
from .weights import parse_weight

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("density", "scheme-build", "scheme-check", "coset-norm",
            "interp-solve", "dbar-solve", "zeroset-norm", "oi-check")

DEFAULTS = {
    "weight": "standard:1",
    "p": 2.0,
    "alpha": 1.0,
    "points": None,
    "r_grid": None,
    "a_spacing": 0.3,
    "a_max": 0.95,
    "seed": 0,
    "out": ".",
    "quad_res": 24,
    "tol": 0.05,
    "scheme": None,
    "delta": 0.25,
    "eps": 0.1,
    "R": 0.9,
    "coeffs": "1",
    "grid_n": 256,
    "bump_radius": 0.8,
    "kernel_order": 3,
    "r_max": 0.999,
    "values": "1",
}


class ConfigError(Exception):
    pass


def _add_common(sp: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    sp.add_argument("--config", help="JSON file of defaults (flags override it)")
    sp.add_argument("--weight", default=S, help="standard:<a> | perturbed-standard:<a>:<amp> | "
                                                "radial-bump:<a>:<b> | zero")
    sp.add_argument("--p", type=float, default=S)
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--points", default=S, help="JSON point file or lattice:<spacing>:<r_max>")
    sp.add_argument("--r-grid", dest="r_grid", default=S, help="a:b:step")
    sp.add_argument("--a-spacing", dest="a_spacing", type=float, default=S)
    sp.add_argument("--a-max", dest="a_max", type=float, default=S)
    sp.add_argument("--seed", type=int, default=S)
    sp.add_argument("--out", default=S, help="output directory")
    sp.add_argument("--quad-res", dest="quad_res", type=int, default=S)
    sp.add_argument("--tol", type=float, default=S)
    sp.add_argument("--scheme", default=S, help="scheme JSON file")
    sp.add_argument("--delta", type=float, default=S)
    sp.add_argument("--eps", type=float, default=S)
    sp.add_argument("--R", type=float, default=S)
    sp.add_argument("--coeffs", default=S, help="comma-separated Taylor coefficients of the data function")
    sp.add_argument("--grid-n", dest="grid_n", type=int, default=S)
    sp.add_argument("--bump-radius", dest="bump_radius", type=float, default=S)
    sp.add_argument("--kernel-order", dest="kernel_order", type=int, default=S)
    sp.add_argument("--r-max", dest="r_max", type=float, default=S)
    sp.add_argument("--values", default=S, help="comma-separated values (one, or one per point)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wbinterp", description="Weighted Bergman interpolation experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key, val in vars(args).items():
        if key in DEFAULTS:
            cfg[key] = val
    cfg["command"] = args.command
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if not cfg["p"] > 0:
        raise ConfigError("p must be positive")
    if cfg["quad_res"] < 4 or cfg["grid_n"] < 16:
        raise ConfigError("resolutions are too small")
    if not 0 < cfg["r_max"] < 1:
        raise ConfigError("r_max must lie in (0, 1)")
    if cfg["kernel_order"] < 1:
        raise ConfigError("kernel order must be at least 1")


def parse_r_grid(spec) -> tuple:
    if spec is None:
        return DEFAULT_R_GRID
    if isinstance(spec, (list, tuple)):
        return tuple(float(x) for x in spec)
    try:
        a, b, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad r-grid {spec!r}; expected a:b:step") from exc
    if not (0 < a <= b < 1 and step > 0):
        raise ConfigError("r-grid must satisfy 0 < a <= b < 1 and step > 0")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return tuple(float(round(a + i * step, 12)) for i in range(n))


def _complex_list(spec) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        return np.array([complex(x) for x in spec])
    try:
        return np.array([complex(s.strip().replace(" ", "")) for s in str(spec).split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad number list {spec!r}") from exc


def _poly(cfg):
    c = _complex_list(cfg["coeffs"])
    return lambda z: np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), c)


def _manifest(cfg: dict) -> dict:
    return {"version": __version__, "config": cfg}


def _write_json(path: Path, cfg: dict, payload: dict) -> None:
    data = {"manifest": _manifest(cfg), **payload}
    path.write_text(json.dumps(data, indent=1, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _need(cfg, key):
    if cfg[key] is None:
        raise ConfigError(f"--{key.replace('_', '-')} is required for {cfg['command']}")
    return cfg[key]


def _points(cfg):
    spec = _need(cfg, "points")
    try:
        return parse_points(spec)
    except (FileNotFoundError, IsADirectoryError):
        raise
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad points spec {spec!r}: {exc}") from exc


def _weight(cfg):
    try:
        return parse_weight(cfg["weight"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _scheme(cfg):
    path = _need(cfg, "scheme")
    try:
        return InterpolationScheme.load(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed scheme JSON: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scheme file: {exc}") from exc


# --- commands -------------------------------------------------------------

def cmd_density(cfg, out: Path) -> int:
    Z = _points(cfg)
    phi = _weight(cfg)
    r_grid = parse_r_grid(cfg["r_grid"])
    a_grid = default_a_grid(cfg["a_spacing"], cfg["a_max"])
    rs = sorted(r_grid)
    if len(rs) < 2:
        raise ConfigError("the r-grid needs at least two radii")
    # the estimate uses the upper half of the grid, capped at 0.9
    r0 = min(0.9, rs[len(rs) // 2]) if rs[len(rs) // 2] < rs[-1] else rs[-2]
    rep = s_uniform_estimate(Z, phi, r_grid, a_grid, r0=r0, tol=cfg["tol"])
    header = "# manifest: " + json.dumps(_manifest(cfg), sort_keys=True)
    rep.write_csv(out / "density.csv", header=header)
    a, r = rep.argmax()
    _write_json(out / "density.json", cfg, {**rep.summary(), "argmax": {"a": a, "r": r},
                                            "n_points": len(Z)})
    return EXIT_OK


def cmd_scheme_build(cfg, out: Path) -> int:
    Z = _points(cfg)
    I = build_scheme(Z, cfg["delta"], cfg["eps"], cfg["R"])
    rep = check_admissible(I)
    _write_json(out / "scheme.json", cfg, {**I.to_json(), "report": rep.to_json()})
    return EXIT_OK


def cmd_scheme_check(cfg, out: Path) -> int:
    rep = check_admissible(_scheme(cfg))
    # a failing scheme is a result, not an error
    _write_json(out / "scheme_check.json", cfg, {"report": rep.to_json()})
    return EXIT_OK


def cmd_coset_norm(cfg, out: Path) -> int:
    I = _scheme(cfg)
    phi = _weight(cfg)
    f = _poly(cfg)
    rows, status = [], EXIT_OK
    for k, (g, cl) in enumerate(I.pairs):
        try:
            res = coset_norm(g, cl, jet_from_function(f, cl), phi, cfg["p"], cfg["alpha"],
                             quad_res=cfg["quad_res"])
        except NonConvergenceError as exc:
            # keep the best iterate as a diagnostic and report exit 3
            res = exc.best
            status = EXIT_NONCONV
        rows.append({"pair": k, "norm": res.norm, "jet_residual": res.jet_residual,
                     "iterations": res.iterations, "converged": res.converged})
    total = float(sum(r["norm"] ** cfg["p"] for r in rows))
    _write_json(out / "coset_norm.json", cfg, {"pairs": rows, "sum_norm_p": total})
    return status


def cmd_interp_solve(cfg, out: Path) -> int:
    from .analysis import solve_interpolation

    I = _scheme(cfg)
    phi = _weight(cfg)
    f = _poly(cfg)
    jets = [jet_from_function(f, cl) for cl in I.clusters]
    try:
        sol = solve_interpolation(I, jets, phi, cfg["p"], cfg["alpha"], quad_res=cfg["quad_res"],
                                  r_max=cfg["r_max"])
    except NonConvergenceError as exc:
        _write_json(out / "interp_solve.json", cfg, {"error": str(exc), "converged": False})
        return EXIT_NONCONV
    payload = sol.summary()
    payload["coeffs"] = [[c.real, c.imag] for c in sol.coeffs]
    _write_json(out / "interp_solve.json", cfg, payload)
    return EXIT_OK


def cmd_dbar_solve(cfg, out: Path) -> int:
    from .analysis import GridFunction, smooth_bump, solve_dbar

    n = cfg["grid_n"]
    bump = smooth_bump(cfg["bump_radius"])
    f = GridFunction.sample(lambda z: (1 - np.abs(z) ** 2) * bump(z), n, cfg["r_max"])
    pts = cfg["points"]
    Z = parse_points(pts) if pts else None
    res = solve_dbar(f, Z, _weight(cfg), cfg["p"], cfg["alpha"], m=cfg["kernel_order"])
    _write_json(out / "dbar_solve.json", cfg, {"rel_residual": res.rel_residual,
                                               "norm_ratio": res.norm_ratio,
                                               "kernel_order": res.kernel_order, "n": n})
    return EXIT_OK


def cmd_zeroset_norm(cfg, out: Path) -> int:
    from .products import zero_space_norm

    Z = _points(cfg)
    res = zero_space_norm(_poly(cfg), Z, _weight(cfg), cfg["p"], cfg["alpha"],
                          quad_res=cfg["quad_res"], r_max=cfg["r_max"])
    _write_json(out / "zeroset_norm.json", cfg, {"value": res.value, "norm": res.value ** (1 / cfg["p"]),
                                                 "tail_share": res.tail_share, "r_max": res.r_max})
    return EXIT_OK


def cmd_oi_check(cfg, out: Path) -> int:
    from .analysis import o_interpolation_setup

    Z = _points(cfg)
    vals = _complex_list(cfg["values"])
    if vals.size not in (1, Z.n_distinct):
        raise ConfigError("--values needs one entry or one per point")
    try:
        setup = o_interpolation_setup(Z, vals, _weight(cfg), cfg["p"], 0.0, cfg["delta"], cfg["eps"],
                                      cfg["R"], quad_res=max(cfg["quad_res"], 8))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_json(out / "oi_check.json", cfg, {**setup.summary(), "delta_a": setup.delta_a,
                                             "n_a": setup.n_a, "terms": setup.terms})
    return EXIT_OK


HANDLERS = {
    "density": cmd_density,
    "scheme-build": cmd_scheme_build,
    "scheme-check": cmd_scheme_check,
    "coset-norm": cmd_coset_norm,
    "interp-solve": cmd_interp_solve,
    "dbar-solve": cmd_dbar_solve,
    "zeroset-norm": cmd_zeroset_norm,
    "oi-check": cmd_oi_check,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[cfg["command"]](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WBInterpError, ValueError) as exc:
        # out-of-range parameters surface here from the library preconditions
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
