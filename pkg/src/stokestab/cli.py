"""Command-line front end: deterministic CSV/JSON/SVG emission.

Commands: resonance, coeffs, dno-dump, isola, scan, validate, hcrit. Every
command accepts --seed-check to run its module's invariant suite instead of
the normal action. All floating-point output is printed with 17 significant
digits so reruns of the same configuration are byte-identical.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields

from . import checks
from .dispersion import build_context, resonance_residual, solve_beta_star
from .stokes import build_tables
from . import dno, isola, kato, validator


def fmt(x):
    """Deterministic float formatting (17 significant digits)."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return float(fmt(obj))
    if hasattr(obj, "item"):  # numpy scalar
        return float(fmt(float(obj)))
    return obj


@dataclass
class RunConfig:
    """Flat, file-serializable bundle of every numeric knob."""

    h: float = 1.0
    eps: float = 0.01
    theta: float = 0.0
    K: int = 20
    Nx: int = 32
    Nz: int = 64
    contour_nodes: int = 64
    tol: float = 1e-12
    outdir: str = "."
    fmt: str = "csv"

    def validate(self):
        for name in ("h", "K", "Nx", "Nz", "contour_nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.fmt not in ("csv", "json", "svg"):
            raise ValueError(f"unknown output format {self.fmt!r}")
        return self

    def to_file(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for f in fields(self):
                fh.write(f"{f.name}={fmt(getattr(self, f.name))}\n")

    @classmethod
    def from_file(cls, path):
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, raw = line.partition("=")
                key = key.strip()
                if key not in types:
                    raise KeyError(f"unknown config key {key!r}")
                t = types[key]
                caster = t if isinstance(t, type) else \
                    {"float": float, "int": int, "str": str}[t]
                kwargs[key] = caster(raw.strip())
        return cls(**kwargs).validate()


def thread_cap():
    raw = os.environ.get("STOKES_ISOLA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ----------------------------------------------------------------------
# minimal SVG emission

def _svg_path(points, xmap, ymap):
    return " ".join(
        ("M" if i == 0 else "L") + f"{xmap(x):.2f},{ymap(y):.2f}"
        for i, (x, y) in enumerate(points)
    )


def write_svg(path, curves, xlabel="Re lambda", ylabel="Im lambda - center",
              width=640, height=480):
    """Hand-rolled plot: axes plus one polyline per named curve."""
    pts = [p for _, curve in curves for p in curve]
    if not pts:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    xpad = 0.05 * (xhi - xlo or 1.0)
    ypad = 0.05 * (yhi - ylo or 1.0)
    xlo, xhi = xlo - xpad, xhi + xpad
    ylo, yhi = ylo - ypad, yhi + ypad
    m = 50
    xmap = lambda x: m + (x - xlo) / (xhi - xlo) * (width - 2 * m)
    ymap = lambda y: height - m - (y - ylo) / (yhi - ylo) * (height - 2 * m)
    colors = ["#e66100", "#1f77b4", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" '
        f'y2="{height - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">{xlabel}</text>',
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 14 {height // 2})">{ylabel}</text>',
    ]
    for i, (name, curve) in enumerate(curves):
        color = colors[i % len(colors)]
        parts.append(
            f'<path d="{_svg_path(curve, xmap, ymap)}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - m - 4}" y="{m + 16 * (i + 1)}" '
            f'text-anchor="end" font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


# ----------------------------------------------------------------------
# commands

def _maybe_seed_check(args, module_names):
    if getattr(args, "seed_check", False):
        passed, failed, lines = checks.run_checks(module_names,
                                                  h=getattr(args, "h", 1.0) or 1.0)
        for line in lines:
            print(line)
        print(f"seed-check: {passed} passed, {failed} failed")
        return 0 if failed == 0 else 1
    return None


def _out(args, name):
    os.makedirs(args.outdir, exist_ok=True)
    return os.path.join(args.outdir, name)


def beta_star_asymptote(h):
    """Shallow (quadratic) or deep (exponential) resonance asymptote."""
    from .dispersion import beta_star_large_depth_limit
    if h < 1.0:
        return (4.0 / 3.0) * h * h
    binf = beta_star_large_depth_limit()
    return binf - 12.0 * math.exp(-2.0 * h) / (
        (1.0 + binf) ** -0.75 + (4.0 + binf) ** -0.75)


def cmd_resonance(args):
    rc = _maybe_seed_check(args, ["dispersion"])
    if rc is not None:
        return rc
    if args.h_min is not None and args.h_max is not None:
        grid = isola.default_h_grid(args.h_min, args.h_max, args.points)
        rows = [(h, solve_beta_star(h), beta_star_asymptote(h)) for h in grid]
        path = _out(args, "resonance.csv")
        write_csv(path, ["h", "beta_star", "asymptote"], rows)
        if args.svg:
            write_svg(_out(args, "resonance.svg"),
                      [("beta_star", [(r[0], r[1]) for r in rows]),
                       ("asymptote", [(r[0], r[2]) for r in rows])],
                      xlabel="h", ylabel="beta*")
        print(path)
        return 0
    beta = solve_beta_star(args.h, tol=args.tol)
    print(f"beta_star({fmt(args.h)}) = {fmt(beta)}  "
          f"residual = {fmt(resonance_residual(beta, args.h))}")
    return 0


def cmd_coeffs(args):
    rc = _maybe_seed_check(args, ["stokes", "kato"])
    if rc is not None:
        return rc
    ctx = build_context(args.h)
    tables = build_tables(ctx)
    payload = {"h": ctx.h, "beta_star": ctx.beta_star, "sigma": ctx.sigma}
    payload.update(tables.as_dict())
    if not args.no_kato:
        km = kato.assemble_matrix_coeffs(ctx, tables)
        payload.update(km.as_dict())
    path = _out(args, "coeffs.json")
    write_json(path, payload)
    print(path)
    return 0


def cmd_dno_dump(args):
    rc = _maybe_seed_check(args, ["dno"])
    if rc is not None:
        return rc
    ctx = build_context(args.h)
    tables = build_tables(ctx)
    beta = args.beta if args.beta is not None else ctx.beta_star
    rows = []
    for k in range(args.kmin, args.kmax + 1):
        m = dno.multiplier_coeffs(k, beta, args.h, tables)
        rows.append((k, m.A0, m.Bm1, m.Bp1, m.Cm2, m.C0, m.Cp2,
                     m.Dm3, m.Dm1, m.Dp1, m.Dp3))
    path = _out(args, "dno.csv")
    write_csv(path, ["k", "A0", "Bm1", "Bp1", "Cm2", "C0", "Cp2",
                     "Dm3", "Dm1", "Dp1", "Dp3"], rows)
    print(path)
    return 0


def cmd_isola(args):
    rc = _maybe_seed_check(args, ["isola"])
    if rc is not None:
        return rc
    ctx = build_context(args.h)
    tables = build_tables(ctx)
    km = kato.assemble_matrix_coeffs(ctx, tables)
    samples, geo = isola.isola_curve(km, args.eps, n_samples=args.samples)
    rows = []
    for theta, lp, lm in samples:
        rows.append((theta, lp.real, lp.imag, "plus"))
        rows.append((theta, lm.real, lm.imag, "minus"))
    path = _out(args, "isola.csv")
    write_csv(path, ["theta", "re_lambda", "im_lambda", "branch"], rows)
    write_json(_out(args, "isola_geometry.json"), {
        "h": args.h, "eps": args.eps,
        "center_imag": geo.center_imag,
        "semi_axis_real": geo.semi_axis_real,
        "semi_axis_imag": geo.semi_axis_imag,
        "kappa0": geo.kappa0, "kappa1": geo.kappa1,
        "b30": km.b30,
    })
    write_svg(_out(args, "isola.svg"),
              [("plus", [(lp.real, lp.imag - geo.center_imag)
                         for _, lp, _ in samples]),
               ("minus", [(lm.real, lm.imag - geo.center_imag)
                          for _, _, lm in samples])])
    print(path)
    return 0


def cmd_scan(args):
    rc = _maybe_seed_check(args, ["isola"])
    if rc is not None:
        return rc
    grid = isola.default_h_grid(args.h_min, args.h_max, args.points)
    rows = isola.scan_h(grid, args.quantity, max_workers=thread_cap())
    path = _out(args, "scan.csv")
    write_csv(path, ["h", "value", "failure"],
              [(h, "" if v is None else v, err) for h, v, err in rows])
    print(path)
    return 0


def cmd_validate(args):
    rc = _maybe_seed_check(args, ["validator"])
    if rc is not None:
        return rc
    ctx = build_context(args.h)
    tables = build_tables(ctx)
    km = kato.assemble_matrix_coeffs(ctx, tables)
    comp = validator.compare_isola(km, args.eps, n_theta=args.thetas,
                                   K=args.K, tables=tables)
    rows = [(theta, lp.real, lp.imag, np_.real, np_.imag, dist)
            for theta, lp, lm, np_, nm, dist in comp.rows]
    path = _out(args, "validate.csv")
    write_csv(path, ["theta", "pred_re", "pred_im", "num_re", "num_im",
                     "dist"], rows)
    summary = {"h": args.h, "eps": args.eps, "K": args.K,
               "max_distance": comp.max_distance,
               "ties": len(comp.ties)}
    if args.ratio_check:
        half = validator.compare_isola(km, args.eps / 2.0, n_theta=args.thetas,
                                       K=args.K, tables=tables)
        summary["max_distance_half_eps"] = half.max_distance
        summary["eps_ratio"] = comp.max_distance / half.max_distance
    write_json(_out(args, "validate_summary.json"), summary)
    print(_out(args, "validate_summary.json"))
    return 0


def cmd_hcrit(args):
    rc = _maybe_seed_check(args, ["isola"])
    if rc is not None:
        return rc
    hc = isola.find_h_crit((args.lo, args.hi), args.tol)
    write_json(_out(args, "hcrit.json"),
               {"h_crit": hc, "bracket": [args.lo, args.hi], "tol": args.tol})
    print(f"h_crit = {fmt(hc)}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="stokestab",
        description="Transverse-instability toolkit for finite-depth "
                    "small-amplitude periodic waves",
    )
    ap.add_argument("--config", help="key=value config file with defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, h=True):
        p.add_argument("--seed-check", action="store_true",
                       help="run invariant checks and report pass/fail")
        p.add_argument("--outdir", default=".")
        if h:
            p.add_argument("--h", type=float, default=1.0)

    p = sub.add_parser("resonance", help="resonant transverse parameter")
    common(p)
    p.add_argument("--h-min", type=float)
    p.add_argument("--h-max", type=float)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("coeffs", help="expansion tables and reduced-matrix "
                                      "coefficients as JSON")
    common(p)
    p.add_argument("--no-kato", action="store_true",
                   help="skip the contour pipeline (tables only)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("dno-dump", help="multiplier rows as CSV")
    common(p)
    p.add_argument("--beta", type=float, default=None,
                   help="transverse parameter (default: resonant value)")
    p.add_argument("--kmin", type=int, default=-6)
    p.add_argument("--kmax", type=int, default=6)
    p.set_defaults(func=cmd_dno_dump)

    p = sub.add_parser("isola", help="unstable eigenvalue ellipse")
    common(p)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=41)
    p.set_defaults(func=cmd_isola)

    p = sub.add_parser("scan", help="depth scan of one pipeline quantity")
    common(p, h=False)
    p.add_argument("--quantity", choices=isola.SCAN_QUANTITIES,
                   default="b30")
    p.add_argument("--h-min", type=float, default=0.1)
    p.add_argument("--h-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("validate", help="dense-operator comparison")
    common(p)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--K", type=int, default=20)
    p.add_argument("--thetas", type=int, default=9)
    p.add_argument("--ratio-check", action="store_true",
                   help="also run at eps/2 and report the distance ratio")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("hcrit", help="critical depth where b30 vanishes")
    common(p, h=False)
    p.add_argument("--lo", type=float, default=0.2)
    p.add_argument("--hi", type=float, default=0.3)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_hcrit)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        cfg = RunConfig.from_file(args.config)
        for f in fields(RunConfig):
            if hasattr(args, f.name) and getattr(args, f.name, None) is None:
                setattr(args, f.name, getattr(cfg, f.name))
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
