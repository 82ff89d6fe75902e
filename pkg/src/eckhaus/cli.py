"""Command-line front end.

Exit codes: 0 success, 1 hypothesis failure, 2 configuration error,
3 solver error, 4 spectrum error, 5 agreement error.
"""
from __future__ import annotations

import argparse
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import bloch, io
from .cgl import CGLCoefficients, cgl_coefficients
from .errors import ConfigError, EckhausError
from .turing import find_turing_point, verify_hypotheses
from .wave import solve_wave
from .zoo import BUILTINS, builtin, load_config


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("parameters are given as NAME=VALUE")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {k!r} needs a numeric value") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eckhaus", description="Turing bifurcation, cGL and Bloch-spectrum analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, numeric=True, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--model", choices=sorted(BUILTINS), help="built-in model name")
        g.add_argument("--config", type=Path, help="TOML model configuration")
        sp.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
                        help="override a built-in parameter (repeatable)")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        if numeric:
            sp.add_argument("--modes", type=int, default=16, help="Fourier truncation M")

    common(sub.add_parser("check", help="verify the structural hypotheses"), numeric=False)
    sp = sub.add_parser("cgl", help="amplitude-equation coefficients and Eckhaus bands")
    common(sp, numeric=False, required=False)
    sp.add_argument("--abc", type=_floats, help="synthetic 'Re a,Im a,Re b,Im b,Re c,Im c' instead of a model")

    sp = sub.add_parser("wave", help="compute the periodic travelling wave")
    common(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--kappa", type=float, default=0.0)

    sp = sub.add_parser("spectrum", help="Bloch sweep and stability verdict")
    common(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--kappa", type=float, default=0.0)
    sp.add_argument("--sigma-max", type=float, default=0.5)
    sp.add_argument("--convention", choices=bloch.CONVENTIONS, default="modified")

    sp = sub.add_parser("validate", help="eps-halving agreement study against the cGL predictions")
    common(sp)
    sp.add_argument("--eps", type=_floats, default=[0.04, 0.02], help="comma-separated eps values")
    sp.add_argument("--kappa", type=_floats, default=[0.0], help="comma-separated kappa values")
    return p


# ------------------------------------------------------------------ helpers

def _model(args):
    if args.config is not None:
        if args.param:
            raise ConfigError("--param only applies to built-in models")
        try:
            return load_config(args.config), str(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.model is None:
        raise ConfigError("give --model or --config")
    name = args.model
    try:
        return builtin(name, dict(args.param)), name
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


class Run:
    """Collects outputs and writes them with a manifest."""

    def __init__(self, args, source: str, params: dict):
        self.out = args.out
        self.t0 = time.perf_counter()
        self.manifest = {"command": args.command, "model": source, "model_params": dict(args.param),
                         "parameters": params, "seed": args.seed, "version": _version()}
        self.digest = io.manifest_hash(self.manifest)
        self.outputs = []

    def json(self, name, obj):
        if self.out is not None:
            body = dict(obj)
            body["manifest_sha256"] = self.digest
            self.outputs.append(str(io.atomic_write(self.out / name, io.dumps(body))))

    def csv(self, name, header, rows):
        if self.out is not None:
            self.outputs.append(str(io.atomic_write(self.out / name, io.csv_text(header, rows, self.digest))))

    def close(self):
        if self.out is not None:
            m = dict(self.manifest)
            m["manifest_sha256"] = self.digest
            m["wall_clock_s"] = time.perf_counter() - self.t0
            m["outputs"] = self.outputs
            io.atomic_write(self.out / "manifest.json", io.dumps(m))


def _pipeline(model, args, eps, kappa):
    crit = find_turing_point(model)
    cgl = cgl_coefficients(model, crit)
    prof = solve_wave(model, crit, cgl, eps, kappa, M=args.modes)
    return crit, cgl, prof


# ------------------------------------------------------------------ commands

def cmd_check(args) -> int:
    model, src = _model(args)
    rep = verify_hypotheses(model)
    run = Run(args, src, {})
    run.json("hypotheses.json", rep.to_dict())
    run.close()
    for it in rep.items:
        print(f"{it.name}: {'PASS' if it.passed else 'FAIL'}  {it.detail}")
    if rep.k_star is not None:
        print(f"k_* = {rep.k_star:.10g}")
    return 0 if rep.all_passed else 1


def _cgl_summary(cgl: CGLCoefficients):
    print(f"a = {cgl.a:.10g}\nb = {cgl.b:.10g}\nc = {cgl.c:.10g}")
    print(f"kappa_E^2 = {cgl.kappaE_sq:.10g}   kappa_E = {np.sqrt(max(cgl.kappaE_sq, 0)):.10g}")
    if cgl.has_stable_band:
        print(f"kappa_S^2 = {cgl.kappaS_sq:.10g}   kappa_S = {np.sqrt(cgl.kappaS_sq):.10g}")
        print("BFN condition holds: stable band exists")
    else:
        print(f"BFN = {cgl.bfn:.6g} <= 0: no stable band")
    if cgl.c.imag != 0:
        print(f"Im gamma = {cgl.c.imag:.10g}")


def cmd_cgl(args) -> int:
    if args.abc is not None:
        if len(args.abc) != 6:
            raise ConfigError("--abc needs six numbers")
        ar, ai, br, bi, cr, ci = args.abc
        cgl = CGLCoefficients(complex(ar, ai), complex(br, bi), complex(cr, ci))
        src, extra = "synthetic", {}
    else:
        model, src = _model(args)
        crit = find_turing_point(model)
        cgl = cgl_coefficients(model, crit)
        extra = {"critical": crit.to_dict()}
    _cgl_summary(cgl)
    run = Run(args, src, {"abc": args.abc})
    out = cgl.to_dict()
    out.update(extra)
    run.json("cgl.json", out)
    run.close()
    return 0


def cmd_wave(args) -> int:
    model, src = _model(args)
    crit, cgl, prof = _pipeline(model, args, args.eps, args.kappa)
    run = Run(args, src, {"eps": args.eps, "kappa": args.kappa, "M": args.modes})
    n = model.n
    head = ["eta"] + [f"{p}_u{j}" for j in range(n) for p in ("re", "im")]
    rows = [[eta] + [x for z in prof.mode(eta) for x in (z.real, z.imag)] for eta in range(-prof.M, prof.M + 1)]
    run.csv("wave_modes.csv", head, rows)
    xi, U = prof.sample(256)
    run.csv("wave_profile.csv", ["xi"] + [f"u{j}" for j in range(n)], [[x, *u] for x, u in zip(xi, U)])
    run.json("wave.json", {"eps": prof.eps, "kappa": prof.kappa, "k": prof.k, "mu": prof.mu, "Omega": prof.Omega,
                           "speed": prof.speed, "M": prof.M, "residual": prof.residual,
                           "alpha_measured": prof.alpha_measured, "alpha_predicted": float(cgl.alpha(args.kappa)),
                           "iterations": prof.iterations})
    run.close()
    print(f"k = {prof.k:.10g}  Omega = {prof.Omega:.10g}  residual = {prof.residual:.3e}")
    print(f"alpha measured = {prof.alpha_measured:.10g}  predicted = {float(cgl.alpha(args.kappa)):.10g}")
    return 0


SPECTRUM_HEADER = ["sigma", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "max_re_remainder"]


def cmd_spectrum(args) -> int:
    model, src = _model(args)
    if not 0 < args.sigma_max <= 0.5:
        raise ConfigError("--sigma-max must lie in (0, 1/2]")
    crit, cgl, prof = _pipeline(model, args, args.eps, args.kappa)
    grid = bloch.default_sigma_grid(args.eps, sigma_max=args.sigma_max)
    curves = bloch.bloch_sweep(model, crit, prof, grid, args.convention)
    verdict = bloch.stability_verdict(model, crit, cgl, prof, convention=args.convention, curves=curves)
    run = Run(args, src, {"eps": args.eps, "kappa": args.kappa, "M": args.modes, "sigma_max": args.sigma_max,
                          "convention": args.convention})
    rows = [[s, l1.real, l1.imag, l2.real, l2.imag, r] for s, l1, l2, r in
            zip(curves.sigma, curves.lam1, curves.lam2, curves.remainder_max_re)]
    run.csv("spectrum.csv", SPECTRUM_HEADER, rows)
    f = verdict.fit
    rec = verdict.to_dict()
    rec.update({"c1": f.c1, "c2": f.c2, "c0_1": f.c0_1, "fit_residual": f.residual, "re_c1_flag": f.re_c1_flag,
                "delta": curves.delta, "convention": args.convention})
    run.json("verdict.json", rec)
    run.close()
    print(f"verdict: {verdict.verdict}  theta = {verdict.theta:.6g}"
          + (f"  witness sigma = {verdict.witness_sigma:.6g}" if verdict.witness_sigma is not None else ""))
    print(f"c1 = {f.c1:.6g}  c2 = {f.c2:.6g}  lambda1(0) = {f.c0_1:.6g}")
    return 0


DEFECT_FLOOR = 1e-6


def halving_checks(reports):
    """First-order consistency of each defect along a decreasing eps sequence."""
    checks = []
    for big, small in zip(reports, reports[1:]):
        for key in ("c0_defect", "c1_scaled_defect", "c2_relative_defect"):
            db, ds = getattr(big, key), getattr(small, key)
            ok = ds <= DEFECT_FLOOR or bloch.scaling_consistent(db, big.eps, ds, small.eps)
            checks.append({"quantity": key, "kappa": big.kappa, "eps_large": big.eps, "eps_small": small.eps,
                           "defect_large": db, "defect_small": ds, "passed": bool(ok)})
    return checks


def cmd_validate(args) -> int:
    model, src = _model(args)
    eps_list = sorted(args.eps, reverse=True)
    if len(eps_list) < 2:
        raise ConfigError("validate needs at least two eps values")
    crit = find_turing_point(model)
    cgl = cgl_coefficients(model, crit)
    all_reports, checks = [], []
    for kappa in args.kappa:
        reps = []
        for eps in eps_list:
            prof = solve_wave(model, crit, cgl, eps, kappa, M=args.modes)
            fit = bloch.fit_expansion(bloch.bloch_sweep(model, crit, prof))
            reps.append(bloch.verify_agreement(fit, cgl, crit, eps, kappa))
        checks += halving_checks(reps)
        all_reports += reps
    ok = all(c["passed"] for c in checks)
    run = Run(args, src, {"eps": eps_list, "kappa": args.kappa, "M": args.modes})
    run.json("agreement.json", {"passed": ok, "reports": [r.to_dict() for r in all_reports], "checks": checks})
    run.close()
    for r in all_reports:
        print(f"kappa={r.kappa:g} eps={r.eps:g}: c0 defect {r.c0_defect:.3e}, Im c1 {r.im_c1:.3e} "
              f"(best {r.best_convention}), c2 rel defect {r.c2_relative_defect:.3e}")
    for c in checks:
        if not c["passed"]:
            print(f"FAIL {c['quantity']} kappa={c['kappa']:g}: {c['defect_small']:.3e} at eps={c['eps_small']:g} "
                  f"exceeds K*eps from {c['defect_large']:.3e} at eps={c['eps_large']:g}")
    print("agreement: PASS" if ok else "agreement: FAIL")
    return 0 if ok else 5


COMMANDS = {"check": cmd_check, "cgl": cmd_cgl, "wave": cmd_wave, "spectrum": cmd_spectrum,
            "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return COMMANDS[args.command](args)
    except EckhausError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
