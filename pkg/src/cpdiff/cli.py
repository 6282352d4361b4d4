"""Command-line entry point: ``cpdiff <command> [options]``.

Every run is described by a flat configuration dict. Emitted files embed
that dict, and ``cpdiff --config FILE`` replays it (explicit flags win).

Exit status: 0 success, 2 validation error, 3 resource cap, 4 a check
failed its tolerance.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__, cps
from ._backend import BACKEND
from .comb import DenseComb, Frequency, fourier_bohr, fourier_bohr_finite, weyl_dense
from .diffraction import autocorr, autocorr_finite, poisson_check, spectrum
from .errors import QuadratureError, ResourceCapError, ToleranceError, ValidationError
from .io import points_table, read_metadata, render, spectrum_table, write_output
from .model_set import density_empirical, density_exact, model_set_points, parse_window
from .random_tiling import (
    asymptotic_profile,
    averaged_histogram,
    mean_step,
    profile_distance,
    width_scaling,
)
from .weights import make_weight

log = logging.getLogger("cpdiff")

COMMANDS = ("scheme-info", "modelset", "density", "weyl", "fourier-bohr", "autocorr",
            "diffract", "poisson-check", "randomtile")

DEFAULTS = {
    "scheme": "fibonacci",
    "window": "fibonacci",
    "weight": "gaussian",
    "weight_params": {},
    "r": 1000.0,
    "a": 0.0,
    "shift": 0.0,
    "n": 1000.0,
    "epsilon": None,
    "k": None,
    "k_dual": None,
    "z": "0,0",
    "floor": 1e-3,
    "kstar_radius": None,
    "k_radius": 3.0,
    "sigma": 1.0,
    "tol": 1e-3,
    "N": 1000,
    "M": 1000,
    "p_u": 1 / cps.TAU,
    "bins": 200,
    "seed": None,
    "detrend": True,
    "composition": "bernoulli",
    "width_fit": None,
    "format": "csv",
    "output": None,
    "threads": None,
}

CAPS = {"r": 1e7, "n": 1e7, "N": 10**8, "M": 10**7, "bins": 10**7}

EXIT_VALIDATION, EXIT_CAP, EXIT_TOLERANCE = 2, 3, 4


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _weight_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValidationError(f"weight parameter {item!r} is not key=value")
        out[key] = _parse_value(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpdiff", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="replay a config or emitted output file")
    p.add_argument("--version", action="version", version=f"cpdiff {__version__}")
    add = p.add_argument
    add("--scheme", help="'fibonacci' or a scheme JSON file")
    add("--window", help="interval:LO:HI[:open-closed], ball:C:R or 'fibonacci'")
    add("--weight", help="gaussian, bump, lorentzian, zero or tabulated")
    add("--weight-param", action="append", dest="weight_param", metavar="KEY=VALUE")
    add("--r", type=float)
    add("--a", type=float)
    add("--shift", type=float, help="window shift u")
    add("--n", type=float, help="autocorrelation ball radius")
    add("--epsilon", type=float, help="internal truncation tolerance")
    add("--k", type=float, help="direct-space frequency (asserted off L*)")
    add("--k-dual", dest="k_dual", help="frequency as dual integer coordinates 'i,j'")
    add("--z", help="difference vector as integer coordinates 'i,j'")
    add("--floor", type=float)
    add("--kstar-radius", dest="kstar_radius", type=float)
    add("--k-radius", dest="k_radius", type=float)
    add("--sigma", type=float)
    add("--tol", type=float)
    add("--N", "--tiles", dest="N", type=int)
    add("--M", "--samples", dest="M", type=int)
    add("--p-u", dest="p_u", type=float)
    add("--bins", type=int)
    add("--seed", type=int)
    add("--no-detrend", dest="detrend", action="store_const", const=False)
    add("--composition", choices=("bernoulli", "fixed"))
    add("--width-fit", dest="width_fit", help="comma-separated N values for the width fit")
    add("--format", choices=("csv", "json"))
    add("--output", "-o")
    add("--threads", type=int)
    add("--verbose", "-v", action="store_true")
    return p


def make_config(args: argparse.Namespace) -> dict:
    config = dict(DEFAULTS)
    if args.config:
        try:
            loaded = read_metadata(args.config)
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        loaded = loaded.get("config", loaded)
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        config.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            config[key] = val
    if args.weight_param:
        config["weight_params"] = _weight_params(args.weight_param)
    if args.command:
        config["command"] = args.command
    if config.get("command") not in COMMANDS:
        raise ValidationError("no command given")
    if config["threads"] is None:
        config["threads"] = int(os.environ.get("CPDIFF_THREADS", "1"))
    validate(config)
    return config


def validate(config: dict) -> None:
    for key, cap in CAPS.items():
        v = config.get(key)
        if v is not None and not (0 < v <= cap and math.isfinite(v)):
            raise ValidationError(f"{key} must lie in (0, {cap:g}]")
    if config["command"] == "randomtile" and config.get("seed") is None:
        raise ValidationError("randomtile needs --seed")
    if not 0 <= config["p_u"] <= 1:
        raise ValidationError("p_u must lie in [0, 1]")
    if config["threads"] < 1:
        raise ValidationError("threads must be at least 1")


def _scheme(config):
    name = config["scheme"]
    if name == "fibonacci":
        return cps.fibonacci_scheme()
    return cps.load_scheme(name)


def _comb(config):
    weight = make_weight(config["weight"], **config["weight_params"])
    return DenseComb(_scheme(config), weight)


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _c(v: complex) -> list:
    return [v.real, v.imag]


def run(config: dict) -> tuple[int, dict]:
    """Execute one configured command; returns (exit status, payload)."""
    cmd = config["command"]
    # the output path is not part of the experiment, so replays may write elsewhere
    recorded = {k: v for k, v in config.items() if k != "output"}
    meta = {"config": recorded, "version": __version__, "backend": BACKEND}
    status = 0
    summary: dict = {}
    log.info("running %s with backend %s", cmd, BACKEND)

    if cmd == "scheme-info":
        s = _scheme(config)
        dual = s.dual()
        cols = ["quantity", "value"]
        rows = [["d", s.d], ["m", s.m], ["covolume", s.covolume],
                ["dual_covolume", dual.covolume], ["certified", s.certified]]
        summary = {"scheme": s.to_dict(), "dual": dual.to_dict()}

    elif cmd == "modelset":
        s = _scheme(config)
        w = parse_window(config["window"]).shifted(config["shift"])
        pts = model_set_points(s, w, config["r"], config["a"])
        cols, rows = points_table(s, pts)
        summary = {"count": len(pts), "window": w.describe()}

    elif cmd == "density":
        s = _scheme(config)
        w = parse_window(config["window"]).shifted(config["shift"])
        emp = density_empirical(s, w, config["r"], config["a"])
        exact = density_exact(s, w)
        cols = ["r", "a", "shift", "empirical", "exact", "relative_error"]
        rows = [[config["r"], config["a"], config["shift"], emp, exact, abs(emp - exact) / exact]]
        summary = {"empirical": emp, "exact": exact, "window": w.describe()}

    elif cmd == "weyl":
        comb = _comb(config)
        res = weyl_dense(comb, config["r"], config["a"], config["epsilon"])
        cols = ["r", "a", "value_re", "value_im", "limit_re", "limit_im", "truncation_bound", "s"]
        rows = [[config["r"], config["a"], *_c(res.value), *_c(comb.rho), res.truncation_bound,
                 res.s]]
        summary = {"truncation_bound": res.truncation_bound, "points": res.n_points}

    elif cmd == "fourier-bohr":
        comb = _comb(config)
        if config["k_dual"] is not None:
            k = Frequency.from_dual(comb.scheme, _ints(config["k_dual"]))
        elif config["k"] is not None:
            k = Frequency.off_module([config["k"]])
        else:
            raise ValidationError("fourier-bohr needs --k-dual or --k")
        res = fourier_bohr_finite(comb, k, config["r"], config["a"], config["epsilon"])
        limit = fourier_bohr(comb, k)
        kstar = float(k.star[0]) if k.in_module else float("nan")
        cols = ["k", "kstar", "finite_re", "finite_im", "limit_re", "limit_im",
                "truncation_bound"]
        rows = [[float(k.direct[0]), kstar, *_c(res.value), *_c(limit), res.truncation_bound]]
        summary = {"in_module": k.in_module, "s": res.s, "points": res.n_points}

    elif cmd == "autocorr":
        comb = _comb(config)
        z = _ints(config["z"])
        res = autocorr_finite(comb, z, config["n"], config["epsilon"])
        closed = autocorr(comb, z)
        zpos = comb.scheme.positions(z)
        cols = ([f"z_c{i}" for i in range(len(z))]
                + ["z", "zstar", "finite_re", "finite_im", "closed_re", "closed_im",
                   "truncation_bound"])
        rows = [[*z, zpos[0], zpos[1], *_c(res.value), *_c(closed), res.truncation_bound]]
        summary = {"s": res.s, "points": res.n_points}

    elif cmd == "diffract":
        comb = _comb(config)
        spec = spectrum(comb, config["floor"], config["kstar_radius"], config["k_radius"])
        cols, rows = spectrum_table(spec)
        summary = {"peaks": len(spec), **spec.metadata}

    elif cmd == "poisson-check":
        comb = _comb(config)
        rep = poisson_check(comb, config["sigma"], config["tol"])
        cols = ["lhs_re", "lhs_im", "rhs_re", "rhs_im", "defect", "lhs_bound", "rhs_bound",
                "passed"]
        rows = [[*_c(rep.lhs), *_c(rep.rhs), rep.defect, rep.lhs_bound, rep.rhs_bound,
                 rep.passed]]
        summary = {"radii": rep.radii, "passed": rep.passed}
        status = 0 if rep.passed else EXIT_TOLERANCE

    elif cmd == "randomtile":
        print(f"sampling {config['M']} tilings of {config['N']} tiles", file=sys.stderr)
        h = averaged_histogram(config["M"], config["N"], config["p_u"], config["bins"],
                               config["seed"], config["detrend"],
                               composition=config["composition"], threads=config["threads"])
        prof = asymptotic_profile(h.centers, config["N"])
        cols = ["bin_center", "empirical_density", "profile_value"]
        rows = [list(r) for r in zip(h.centers, h.density, prof)]
        summary = {
            "l1_distance": profile_distance(h, config["N"]) if h.detrended else None,
            "u_frequency": h.u_frequency,
            "mean_step": h.final_step_mean,
            "mean_step_se": h.final_step_se,
            "predicted_mean_step": mean_step(config["p_u"]),
            "vertex_std": h.vertex_std,
            "overflow": h.overflow,
            "detrended": h.detrended,
        }
        if config["width_fit"]:
            fit = width_scaling(_ints(config["width_fit"]), config["M"], config["p_u"],
                                config["seed"], threads=config["threads"])
            summary["width_fit"] = fit

    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown command {cmd!r}")

    return status, {"metadata": meta, "columns": cols, "rows": rows, "summary": summary}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        config = make_config(args)
        status, payload = run(config)
        text = render(payload, config["format"])
        write_output(text, config["output"])
        if config["command"] == "randomtile" and config["output"] not in (None, "-"):
            summary = dict(payload, columns=None, rows=None)
            write_output(render({k: v for k, v in summary.items() if v is not None}, "json"),
                         str(config["output"]) + ".summary.json")
    except ValidationError as exc:
        print(f"cpdiff: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceCapError as exc:
        print(f"cpdiff: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ToleranceError, QuadratureError) as exc:
        print(f"cpdiff: tolerance: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    return status


if __name__ == "__main__":
    sys.exit(main())
