"""Command line front end.

Exit codes: 0 all checks passed, 1 a failed check or bad input, 2 the
classification march hit its horizon before resolving, 3 the split
outcome of the wave demo (transnormal passes, isoparametric fails),
which is that command's expected result.

Every command writes its artifacts into the --out directory with fixed
names, atomically (temp file plus rename), so a crashed run never leaves
a partial file.  With --no-timestamp the outputs are byte-reproducible.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import config, presets, surgery
from . import verify as verify_mod
from .backend import active_backend
from .errors import (
    HorizonExceeded,
    InputError,
    TransnormalLabError,
    UnsupportedDescriptor,
)
from .geometry.operators import gradient_fd, mean_curvature_level
from .transnormal import build_transnormal_function, classify, foil_census

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HORIZON = 2
EXIT_DEMO_SPLIT = 3


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write_json(args, name, payload):
    doc = {"tool": "transnormal-lab", "backend": active_backend()}
    if not args.no_timestamp:
        doc["generated_at"] = datetime.datetime.now(
            datetime.timezone.utc
        ).isoformat()
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default)
    _atomic_write(_out_path(args, name), text + "\n")


def _write_csv(args, name, columns, rows, header_lines=()):
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(
            f"{v:.12g}" if isinstance(v, float) else str(v) for v in row
        ))
    _atomic_write(_out_path(args, name), "\n".join(lines) + "\n")


def _bins_rows(table):
    cols = ("f_lo", "f_hi", "f_mean", "mean", "declared", "spread", "count")
    rows = [tuple(r.get(c, math.nan) for c in cols) for r in table]
    return cols, rows


def _build_manifold(args):
    if getattr(args, "spec", None):
        obj = presets.load_spec(args.spec)
        if isinstance(obj, dict):
            raise InputError(
                "this command takes a manifold spec; "
                "surgery specs go to the surgery command"
            )
        return obj
    if not getattr(args, "preset", None):
        raise InputError("one of --preset or --spec is required")
    if getattr(args, "perturb", 0.0):
        return presets.perturbed_variant(
            args.preset, strength=args.perturb, seed=args.seed
        )
    return presets.get_preset(args.preset)()


def _source_name(args):
    if getattr(args, "spec", None):
        return os.path.basename(args.spec)
    return args.preset


def cmd_classify(args):
    manifold = _build_manifold(args)
    kw = {"n_samples": args.samples}
    if args.tol is not None:
        kw["match_rel"] = args.tol
    if args.tmax is not None:
        kw["t_max"] = args.tmax
    name = _source_name(args)
    try:
        desc = classify(manifold, **kw)
    except HorizonExceeded as e:
        print(f"{name}: horizon {e.t_max:g} reached before resolution",
              file=sys.stderr)
        if args.out and e.partial is not None:
            _write_json(args, "descriptor.json",
                        {"descriptor": e.partial.to_json()})
        return EXIT_HORIZON
    if args.seed_grid:
        for seed in presets.seed_grid(manifold, args.seed_grid):
            other = classify(manifold, seed=seed, **kw)
            if other.type_tag != desc.type_tag:
                print(
                    f"seed grid disagreement: {other.type_tag} vs {desc.type_tag}",
                    file=sys.stderr,
                )
                return EXIT_ERROR
    payload = {"descriptor": desc.to_json()}
    if args.census:
        ts = [float(x) for x in args.census.split(",")]
        payload["census"] = foil_census(manifold, desc, ts)
    d = desc.to_json()
    print(
        f"{name}: {d['type']}  N_SR={d['N_SR']} N_S={d['N_S']} "
        f"T={d['T']} D={d['D']}"
    )
    for row in payload.get("census", ()):
        print(f"  t={row['t']:g}  {row['kind']}")
    if args.out:
        _write_json(args, "descriptor.json", payload)
    return EXIT_OK


def _profile_rows(manifold, fn, dt):
    """(t, f, declared b, measured |grad f|^2) along a normal segment.

    The leaves of every built function are horizontal, radial or fiber
    spheres, so a straight coordinate segment crossing them is a unit
    speed normal geodesic and t is the leaf-space parameter.
    """
    window = manifold.chart_window()
    # flat charts vary in y, warped ones in r, bundles along a fiber ray
    from .geometry.manifolds import WarpedProfile

    axis = 0 if isinstance(manifold, WarpedProfile) else len(window) - 1
    lo, hi = window[axis]
    span = hi - lo
    a = lo + 0.08 * span
    b = hi - 0.08 * span
    if dt is None:
        dt = (b - a) / 192.0
    ts = np.arange(a, b + 0.5 * dt, dt)
    mid = np.array([0.5 * (w[0] + w[1]) for w in window])
    P = np.tile(mid, (len(ts), 1))
    P[:, axis] = ts
    fv = np.asarray(fn(P), dtype=np.float64)
    _, n2 = gradient_fd(manifold, fn, P)
    bd = np.asarray(fn.b(fv))
    return [
        (float(t - a), float(f), float(d), float(m))
        for t, f, d, m in zip(ts, fv, bd, n2)
    ]


def cmd_function(args):
    manifold = _build_manifold(args)
    desc = classify(manifold, n_samples=args.samples)
    fn = build_transnormal_function(manifold, desc)
    name = _source_name(args)
    if fn.is_isoparametric:
        rep = verify_mod.isoparametric_report(
            manifold, fn, n_samples=args.samples, n_bins=args.bins,
            b_declared=fn.b, a_declared=fn.a,
        )
    else:
        rep = verify_mod.transnormality_report(
            manifold, fn, n_samples=args.samples, n_bins=args.bins,
            b_declared=fn.b,
        )
    b = fn.b.coefficients
    print(
        f"{name}: case {fn.case}, b(f) = {b[0]:g} + {b[1]:g} f + {b[2]:g} f^2, "
        f"{'isoparametric' if fn.is_isoparametric else 'transnormal'}; "
        f"spread {rep.max_spread:.2e} {'PASS' if rep.passed else 'FAIL'}"
    )
    if args.out:
        _write_json(args, "function.json", {
            "source": name,
            "case": fn.case,
            "b_coeffs": list(b),
            "a_coeffs": list(fn.a_coeffs) if fn.a_coeffs else None,
            "report": rep.as_dict(),
            "type": desc.type_tag,
        })
        cols, rows = _bins_rows(rep.extras["bins"])
        _write_csv(args, "profile_bins.csv", cols, rows,
                   header_lines=(f"case {fn.case}", "fitted b by level bin"))
        _write_csv(
            args, "profile.csv",
            ("t", "f", "b_declared", "grad_norm2"),
            _profile_rows(manifold, fn, args.dt),
            header_lines=(f"case {fn.case}", "normal segment through the seed"),
        )
    return EXIT_OK if rep.passed else EXIT_ERROR


def cmd_bundle(args):
    from .bundles import (
        constant_connection_holonomy,
        loop_holonomy,
        sphere_bundle_mean_curvature,
    )

    bundle = presets.build_bundle(
        rank=args.rank, omega=args.omega, mobius=args.mobius,
        base_length=args.base_length,
    )
    desc = classify(bundle)
    fn = build_transnormal_function(bundle)
    rep = verify_mod.isoparametric_report(
        bundle, fn, n_samples=args.samples, n_bins=args.bins,
        b_declared=fn.b, a_declared=fn.a,
    )
    hol_num = loop_holonomy(bundle)
    hol_exact = constant_connection_holonomy(bundle)
    hol_err = float(np.max(np.abs(hol_num - hol_exact)))
    mean_h, spread_h = sphere_bundle_mean_curvature(bundle, radius=args.radius)
    expect_h = -(args.rank - 1) / args.radius
    ok = (
        rep.passed
        and hol_err <= 1e-6
        and spread_h <= 1e-5
        and abs(mean_h - expect_h) <= 1e-5
    )
    print(
        f"rank {args.rank} bundle: {desc.type_tag}; f=|u|^2 "
        f"{'PASS' if rep.passed else 'FAIL'}; holonomy err {hol_err:.2e}; "
        f"sphere leaf H = {mean_h:+.6f} (expect {expect_h:+.6f}, "
        f"spread {spread_h:.2e})"
    )
    if args.out:
        _write_json(args, "bundle.json", {
            "rank": args.rank,
            "omega": args.omega,
            "mobius": args.mobius,
            "type": desc.type_tag,
            "report": rep.as_dict(),
            "holonomy_error": hol_err,
            "sphere_leaf_h": mean_h,
            "sphere_leaf_h_expected": expect_h,
            "sphere_leaf_h_spread": spread_h,
        })
    return EXIT_OK if ok else EXIT_ERROR


def cmd_surgery(args):
    if getattr(args, "spec", None):
        params = presets.load_spec(args.spec)
        if not isinstance(params, dict):
            raise InputError("surgery takes a spec with family \"surgery\"")
        name = _source_name(args)
    else:
        if not args.preset:
            raise InputError("one of --preset or --spec is required")
        if args.preset not in presets.SURGERY_PRESETS:
            known = ", ".join(sorted(presets.SURGERY_PRESETS))
            raise InputError(f"unknown assembly {args.preset!r}; known: {known}")
        params = presets.SURGERY_PRESETS[args.preset]
        name = args.preset
    result = surgery.run_preset(params)
    report = surgery.verify_foliation(result)
    desc = classify(result.manifold)
    fn = build_transnormal_function(result.manifold, desc)
    fn_rep = verify_mod.transnormality_report(
        result.manifold, fn, n_samples=args.samples, n_bins=args.bins,
        b_declared=fn.b,
    )
    ok = (
        report["cmc_spread"] <= 1e-6
        and report["model_mismatch"] <= 1e-5
        and report["minimal_leaf_h"] <= 1e-6
        and report["moser_ok"]
        and fn_rep.passed
    )
    print(
        f"{name}: assembled {desc.type_tag}; "
        f"moser residual {max(result.moser_residuals):.1e}; "
        f"CMC spread {report['cmc_spread']:.1e}; "
        f"minimal leaves {report['minimal_leaves'] or ('all' if report['all_minimal'] else 'none')}; "
        f"{'PASS' if ok else 'FAIL'}"
    )
    if args.out:
        payload = result.as_dict()
        payload["type"] = desc.type_tag
        payload["function_report"] = fn_rep.as_dict()
        _write_json(args, "surgery.json", payload)
        _write_csv(
            args, "warp_profile.csv",
            ("t", "profile", "warp"),
            [
                (float(t), float(r), float(r * result.fiber_density))
                for t, r in zip(result.r_grid, result.profile)
            ],
            header_lines=(f"assembled {desc.type_tag}",),
        )
    return EXIT_OK if ok else EXIT_ERROR


def cmd_wave_demo(args):
    """Radial wave on the plane: transnormal yes, isoparametric no.

    The distinguished exit code 3 reports the expected outcome, namely
    the transnormality report passing while the isoparametric one fails
    because level circles of equal f carry different mean curvature.
    """
    manifold, fn = presets.radial_wave()
    rep_t = verify_mod.transnormality_report(
        manifold, fn, n_samples=args.samples, n_bins=args.bins,
        b_declared=fn.b,
    )
    rep_i = verify_mod.isoparametric_report(
        manifold, fn, n_samples=args.samples, n_bins=args.bins,
        b_declared=fn.b,
    )
    # same level f = cos(0.1), radii a wavelength apart: H = 1/r inside
    # the first wave versus -1/r just inside the second
    two_pi = 2.0 * math.pi
    radii = (0.095, two_pi - 0.1, two_pi + 0.1)
    hs = []
    for r in radii:
        p = np.array([r, 0.0])
        f = fn(p)
        hval = mean_curvature_level(
            manifold, fn, p, b_value=float(fn.b(f)),
            b_prime=float(fn.b.derivative(f)),
        )
        hs.append(float(np.asarray(hval).ravel()[0]))
    h_gap = max(hs) - min(hs)
    split = rep_t.passed and not rep_i.passed and h_gap > 10.0
    print(
        f"radial wave: transnormal {'PASS' if rep_t.passed else 'FAIL'} "
        f"(spread {rep_t.max_spread:.2e}); "
        f"isoparametric {'FAIL' if not rep_i.passed else 'PASS'} "
        f"(laplacian spread {rep_i.extras['lap_spread']:.2e})"
    )
    print(
        "level f = cos(0.1): H = "
        + ", ".join(f"{h:+.3f} at r = {r:.3f}" for h, r in zip(hs, radii))
        + f"  (gap {h_gap:.2f})"
    )
    if args.out:
        _write_json(args, "wave_demo.json", {
            "transnormal": rep_t.as_dict(),
            "isoparametric": rep_i.as_dict(),
            "h_probe_radii": list(radii),
            "h_probe_values": hs,
            "h_gap": h_gap,
            "expected_split": bool(split),
        })
        cols, rows = _bins_rows(rep_t.extras["bins"])
        _write_csv(args, "wave_gradient_bins.csv", cols, rows,
                   header_lines=("squared gradient by level bin",))
        cols, rows = _bins_rows(rep_i.extras["lap_bins"])
        _write_csv(args, "wave_laplacian_bins.csv", cols, rows,
                   header_lines=("laplacian by level bin",))
    if split:
        return EXIT_DEMO_SPLIT
    print("unexpected outcome for the wave demo", file=sys.stderr)
    return EXIT_ERROR


def cmd_gallery(args):
    rows = []
    failed = False
    for name in presets.CLASSIFICATION_PRESETS:
        m = presets.get_preset(name)()
        desc = classify(m)
        fn = build_transnormal_function(m, desc)
        rep = verify_mod.transnormality_report(
            m, fn, n_samples=1024, n_bins=32, b_declared=fn.b
        )
        rows.append((name, desc.type_tag, fn.case, rep.passed))
        failed = failed or not rep.passed
    for name in presets.SURGERY_PRESETS:
        result = surgery.run_preset(presets.SURGERY_PRESETS[name])
        report = surgery.verify_foliation(result)
        desc = classify(result.manifold)
        ok = report["cmc_spread"] <= 1e-6 and report["moser_ok"]
        rows.append((name, desc.type_tag, "-", ok))
        failed = failed or not ok
    width = max(len(r[0]) for r in rows)
    for name, tag, case, ok in rows:
        print(f"{name:<{width}s}  {tag:<20s} case {case:<2s} "
              f"{'PASS' if ok else 'FAIL'}")
    if args.out:
        _write_json(args, "gallery.json", {
            "gallery": [
                {"name": n, "type": t, "case": c, "passed": bool(p)}
                for n, t, c, p in rows
            ]
        })
    return EXIT_ERROR if failed else EXIT_OK


def _add_common(p, preset=True):
    if preset:
        p.add_argument("--preset", help="named construction")
        p.add_argument("--spec", help="JSON file describing the input")
    p.add_argument("--samples", type=int, default=config.DEFAULT_SAMPLES)
    p.add_argument("--bins", type=int, default=config.DEFAULT_BINS)
    p.add_argument("--out", help="directory for JSON/CSV artifacts")
    p.add_argument(
        "--no-timestamp", action="store_true",
        help="omit the timestamp for byte-reproducible output",
    )


def build_parser():
    ap = argparse.ArgumentParser(
        prog="transnormal-lab",
        description="construct, classify and verify transnormal systems",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a system from its seed foil")
    _add_common(p)
    # foil cloud resolution, not report samples; matching cost is
    # quadratic in the cloud size
    p.set_defaults(samples=96)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="metric perturbation strength")
    p.add_argument("--seed", type=int, default=0, help="perturbation seed")
    p.add_argument("--tol", type=float, default=None,
                   help="relative cloud-matching tolerance")
    p.add_argument("--tmax", type=float, default=None,
                   help="marching horizon for the front")
    p.add_argument("--seed-grid", type=int, default=0, metavar="N",
                   help="cross-check the type from N alternative seeds")
    p.add_argument("--census", default="",
                   help="comma-separated leaf parameters to label")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("function", help="build and certify the normal form")
    _add_common(p)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=None,
                   help="t spacing of the exported profile curve")
    p.set_defaults(fn=cmd_function)

    p = sub.add_parser("bundle", help="verify a bundle metric end to end")
    _add_common(p, preset=False)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--omega", type=float, default=0.7,
                   help="connection strength")
    p.add_argument("--mobius", action="store_true",
                   help="flip the rank-1 transition")
    p.add_argument("--base-length", type=float, default=2.0 * np.pi)
    p.add_argument("--radius", type=float, default=1.0,
                   help="sphere leaf radius for the curvature check")
    p.set_defaults(fn=cmd_bundle)

    p = sub.add_parser("surgery", help="assemble a double-disk foliation")
    _add_common(p)
    p.set_defaults(fn=cmd_surgery)

    p = sub.add_parser(
        "wave-demo",
        help="plane radial wave: transnormal without being isoparametric",
    )
    _add_common(p, preset=False)
    p.set_defaults(fn=cmd_wave_demo)

    p = sub.add_parser("gallery", help="run every preset end to end")
    _add_common(p, preset=False)
    p.set_defaults(fn=cmd_gallery)
    return ap


def main(argv=None):
    import warnings

    # environment noise from old TBB builds, not actionable for users
    warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB")
    config.apply_thread_cap()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except HorizonExceeded as e:
        print(f"horizon limited: {e}", file=sys.stderr)
        return EXIT_HORIZON
    except (InputError, UnsupportedDescriptor, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except TransnormalLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
