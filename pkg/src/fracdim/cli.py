"""Command line frontend: generation, estimation, classification, verification.

Exit codes: 0 success, 1 check failure, 2 usage/input error.  Every JSON
result carries the schema tag, the seed, the sampling delta and the cell
convention, so runs are reproducible bit-identically from the same config.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import covering, dimension, geometry, qc
from .errors import FracdimError

SCHEMA = "fracdim/1"


def _json_dump(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _build_spec(args) -> geometry.CollectionSpec:
    rate = "exponential" if args.lam is not None else "polynomial"
    if rate == "polynomial" and args.p is None:
        raise FracdimError("missing --p (or --lam) for this family")
    return geometry.CollectionSpec(
        family=args.family if args.family != "concentric" else "concentric-spheres",
        rate=rate,
        p=args.p if args.p is not None else 1.0,
        lam=args.lam if args.lam is not None else 1.0,
        ambient_dim=args.d,
        c1=args.c1, c2=args.c2,
        n_max=args.n_max,
        delta=args.delta,
        include_core_ball=not args.no_core_ball,
    )


def _generate_sample(args) -> geometry.SampleSet:
    fam = args.family
    if fam in ("concentric", "concentric-spheres", "snowflake-collection"):
        return geometry.generate(_build_spec(args))
    if fam == "spiral":
        if args.p is None:
            raise FracdimError("missing --p for family spiral")
        return geometry.generate_spiral(args.p, t_max=args.t_max, delta=args.delta)
    if fam == "shell":
        if args.p is None:
            raise FracdimError("missing --p for family shell")
        spec = geometry.ShellSpec(p=args.p, u_max=args.u_max, v_max=args.v_max,
                                  delta=args.delta)
        return geometry.generate_shell(spec)
    if fam == "snowflake":
        return geometry.generate_snowflake(args.level, args.scale)
    raise FracdimError(f"unknown family {fam!r}")


def cmd_generate(args) -> int:
    S = _generate_sample(args)
    S.to_csv(args.out)
    print(f"wrote {len(S)} points (dim={S.ambient_dim}, delta={S.delta:g}) "
          f"to {args.out}")
    return 0


def _load_sample(path) -> geometry.SampleSet:
    try:
        return geometry.SampleSet.from_csv(path)
    except (OSError, ValueError) as exc:
        raise FracdimError(f"cannot read sample CSV: {exc}") from exc


def cmd_boxdim(args) -> int:
    S = _load_sample(args.input)
    fit = dimension.estimate_box_dimension(
        S, args.r_min, args.r_max, n_scales=args.n_scales,
        density_factor=args.density_factor)
    out = {
        "schema": SCHEMA,
        "estimate": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "scales": list(fit.scales_used),
        "counts": [int(c) for c in fit.counts_used],
        "delta": S.delta,
        "cell_convention": covering.CONVENTION,
        "density_factor": args.density_factor,
        "seed": None,
    }
    if args.formula_p is not None:
        out["formula_reference"] = dimension.formula_box_dim(
            args.formula_p, S.ambient_dim)
    _json_dump(out, args.out)
    return 0


def _theta_grid(args):
    if args.thetas:
        return sorted(args.thetas)
    return list(np.linspace(args.theta_min, args.theta_max, args.theta_steps))


def cmd_spectrum(args) -> int:
    S = _load_sample(args.input)
    thetas = _theta_grid(args)
    curve = dimension.estimate_spectrum_curve(
        S, thetas, args.r_min, args.r_max, n_scales=args.n_scales,
        n_centers=args.centers, seed=args.seed,
        density_factor=args.density_factor)
    reg = dimension.regularize(curve)
    theta_star = dimension.detect_phase_transition(curve, S.ambient_dim)
    out = {
        "schema": SCHEMA,
        "thetas": list(curve.thetas),
        "values": list(curve.values),
        "regularized": list(reg.values),
        "theta_star": theta_star,
        "r_squared": [f.r_squared for f in curve.fits],
        "scale_range": [args.r_min, args.r_max],
        "n_scales": args.n_scales,
        "delta": S.delta,
        "seed": args.seed,
        "cell_convention": covering.CONVENTION,
        "density_factor": args.density_factor,
    }
    if args.formula_p is not None:
        closed = dimension.closed_form_spectrum_curve(
            args.formula_p, S.ambient_dim, curve.thetas)
        out["closed_form"] = list(closed.values)
    _json_dump(out, args.out)
    if args.plot:
        try:
            _plot_spectrum(out, args.plot)
            print(f"wrote plot to {args.plot}", file=sys.stderr)
        except Exception as exc:  # plotting must not change exit semantics
            print(f"warning: plot failed: {exc}", file=sys.stderr)
    return 0


def _plot_spectrum(result: dict, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(result["thetas"], result["values"], "o-", label="estimated")
    ax1.plot(result["thetas"], result["regularized"], "--", label="regularized")
    if "closed_form" in result:
        ax1.plot(result["thetas"], result["closed_form"], ":", label="closed form")
    if result["theta_star"] is not None:
        ax1.axvline(result["theta_star"], color="gray", lw=0.8)
    ax1.set_xlabel(r"$\theta$")
    ax1.set_ylabel(r"$\dim_A^\theta$")
    ax1.legend()
    ax2.plot(result["thetas"], result["r_squared"], "s-")
    ax2.set_xlabel(r"$\theta$")
    ax2.set_ylabel(r"$R^2$ of fit")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_classify(args) -> int:
    pair = qc.ShellPair(p=args.p, q=args.q)
    result = qc.classify(pair, args.K)
    out = {
        "schema": SCHEMA,
        "p": pair.p,
        "q": pair.q,
        "K": args.K,
        "verdict": result.verdict,
        "min_dilatation": result.min_K,
    }
    if result.admissible:
        out["stretch_exponent"] = result.stretch_exponent
    else:
        out["witness"] = {
            "theta_t": result.witness.theta_t,
            "theta_t_over_K": result.witness.theta_t_over_K,
            "transition_p": result.witness.transition_p,
        }
    _json_dump(out, args.out)
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _suite_formulas():
    checks = []
    ps = [0.2, 0.5, 1.0, 1.5, 2.0, 4.0]
    thetas = np.linspace(0.05, 0.95, 19)
    for d in (2, 3):
        for p in ps:
            db = dimension.formula_box_dim(p, d)
            for th in thetas:
                sp = dimension.formula_assouad_spectrum(p, d, th)
                ub = dimension.formula_spectrum_upper_bound(db, d, th)
                checks.append(("chain dim_B <= spectrum <= d",
                               db - 1e-12 <= sp <= d + 1e-12))
                checks.append(("lemma bound dominance", sp <= ub + 1e-12))
            tstar = p / (p + 1.0)
            eps = 1e-9
            left = dimension.formula_assouad_spectrum(p, d, tstar - eps)
            right = dimension.formula_assouad_spectrum(p, d, min(tstar + eps, 1 - eps))
            checks.append(("continuity at transition",
                           abs(left - d) < 1e-6 and abs(right - d) < 1e-6))
            curve = dimension.closed_form_spectrum_curve(p, d, thetas)
            reg = dimension.regularize(curve)
            reg2 = dimension.regularize(reg)
            checks.append(("closed-form curve is fixed point of regularize",
                           np.allclose(curve.values, reg.values)))
            checks.append(("regularize idempotent",
                           np.allclose(reg.values, reg2.values)))
    d0 = math.log(4) / math.log(3)
    for p in (0.5, 1.0, 2.0):
        win = dimension.impossibility_window(p, 2, d0)
        checks.append(("impossibility window nonempty", win.theta_lo < win.theta_hi))
        checks.append(("window hi = p/(p+1)",
                       abs(win.theta_hi - p / (p + 1)) < 1e-12))
        checks.append(("bound exceeds d at midpoint", win.bound(win.midpoint) > 2))
    return checks


def _suite_covering_oracle():
    rng = np.random.default_rng(dimension.DEFAULT_SEED)
    checks = []
    for i in range(50):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 200))
        pts = rng.uniform(-2, 2, size=(n, d))
        S = geometry.SampleSet(points=pts, delta=1e-9, ambient_dim=d)
        r = float(rng.uniform(0.3, 1.5))
        fast = covering.covering_number(S, r).count
        slow = covering.brute_force_covering(S, r)
        checks.append((f"instance {i} (d={d}, n={n})", fast == slow))
    return checks


def _suite_classification():
    from fractions import Fraction

    checks = []
    grid = [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2),
            Fraction(2), Fraction(3)]
    for p in grid:
        for q in grid:
            if p < q:
                continue
            ratio = p / q
            for K in {Fraction(1), Fraction(101, 100), ratio - Fraction(1, 100),
                      ratio, ratio + Fraction(1, 100), Fraction(10)}:
                if K < 1:
                    continue
                got = qc.classify(qc.ShellPair(p=p, q=q), K).admissible
                checks.append((f"p={p} q={q} K={K}", got == (K >= ratio)))
    return checks


SUITES = {
    "formulas": _suite_formulas,
    "covering-oracle": _suite_covering_oracle,
    "classification": _suite_classification,
}


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 2
    checks = SUITES[args.suite]()
    n_fail = sum(1 for _, ok in checks if not ok)
    for name, ok in checks:
        if not ok or args.verbose:
            print(f"{'PASS' if ok else 'FAIL'}: {name}")
    print(f"suite {args.suite}: {len(checks) - n_fail}/{len(checks)} checks passed")
    if args.out:
        _json_dump({
            "schema": SCHEMA,
            "suite": args.suite,
            "passed": n_fail == 0,
            "checks": [{"name": n, "ok": bool(ok)} for n, ok in checks],
        }, args.out)
    return 0 if n_fail == 0 else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fracdim",
        description="concentric fractal collections: generation, dimension "
                    "estimation and quasiconformal shell classification")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a built-in family to CSV")
    g.add_argument("--family", required=True,
                   choices=["concentric", "concentric-spheres", "spiral",
                            "shell", "snowflake", "snowflake-collection"])
    g.add_argument("--p", type=float, default=None)
    g.add_argument("--lam", type=float, default=None,
                   help="exponential rate (radii e^(-lam n)) instead of --p")
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--c1", type=float, default=1.0)
    g.add_argument("--c2", type=float, default=1.0)
    g.add_argument("--n-max", type=int, default=10**9)
    g.add_argument("--delta", type=float, default=1e-3)
    g.add_argument("--no-core-ball", action="store_true")
    g.add_argument("--t-max", type=float, default=None)
    g.add_argument("--u-max", type=float, default=None)
    g.add_argument("--v-max", type=float, default=None)
    g.add_argument("--level", type=int, default=4)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("boxdim", help="estimate box dimension from a CSV sample")
    b.add_argument("--in", dest="input", required=True)
    b.add_argument("--r-min", type=float, required=True)
    b.add_argument("--r-max", type=float, required=True)
    b.add_argument("--n-scales", type=int, default=16)
    b.add_argument("--density-factor", type=float,
                   default=covering.DEFAULT_DENSITY_FACTOR)
    b.add_argument("--formula-p", type=float, default=None,
                   help="include the closed-form reference for this exponent")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_boxdim)

    s = sub.add_parser("spectrum", help="estimate the Assouad spectrum")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--thetas", type=float, nargs="*", default=None)
    s.add_argument("--theta-min", type=float, default=0.1)
    s.add_argument("--theta-max", type=float, default=0.8)
    s.add_argument("--theta-steps", type=int, default=8)
    s.add_argument("--r-min", type=float, required=True)
    s.add_argument("--r-max", type=float, required=True)
    s.add_argument("--n-scales", type=int, default=8)
    s.add_argument("--centers", type=int, default=dimension.DEFAULT_N_CENTERS)
    s.add_argument("--seed", type=int, default=dimension.DEFAULT_SEED)
    s.add_argument("--density-factor", type=float,
                   default=covering.DEFAULT_DENSITY_FACTOR)
    s.add_argument("--formula-p", type=float, default=None)
    s.add_argument("--plot", default=None, help="write an SVG plot here")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("classify", help="quasiconformal shell classification")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--K", type=float, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--verbose", action="store_true")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except FracdimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
