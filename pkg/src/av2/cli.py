"""av2 command line: solve | orbit | check | transfer | render.

Exit codes: 0 success, 1 invalid input or unwritable output, 2 degenerate
solve or quadrature failure, 3 iteration limit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import family, qdiff, render, thurston
from .errors import Av2Error, PortraitError, QuadratureFailure
from .family import Av2Params
from .portraits import OrbitPortrait, forward_orbit
from .quadrature import QuadOpts
from .sphere import INF, point_from_json, sph_dist

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_MAX_ITER = 0, 1, 2, 3

SCHWARZIAN_THRESHOLD = 1e-5
ROUNDTRIP_THRESHOLD = 1e-10


class InputError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """'1.5', '2j', '0+6.28j' or 're,im'."""
    t = text.strip().replace(" ", "")
    if "," in t:
        re_, im_ = t.split(",", 1)
        return complex(float(re_), float(im_))
    return complex(t)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=False)


def _write_text(path: str, text: str) -> None:
    render.write_atomic(path, text.encode("utf-8"))


def _params_from_args(args) -> Av2Params:
    if getattr(args, "params", None):
        obj = _read_json(args.params)
        return Av2Params.from_json(obj)
    if args.alpha is None or args.beta is None:
        raise InputError("give --params FILE or both --alpha and --beta")
    return Av2Params(parse_complex(args.alpha), parse_complex(args.beta))


# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    obj = _read_json(args.portrait)
    portrait = OrbitPortrait.from_json(obj, name=Path(args.portrait).stem)
    if args.init in ("auto", "random"):
        init = args.init
    else:
        pos = _read_json(args.init)
        init = thurston.MarkedConfiguration.from_json(pos)
    rep = thurston.solve(portrait, init=init, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    if args.trace_out:
        _write_text(args.trace_out, thurston.trace_csv(rep.trace))
        _write_text(str(Path(args.trace_out).with_suffix(".jsonl")), thurston.trace_jsonl(rep.trace))
    if rep.converged:
        print(_dumps(rep.params.to_json()))
        if args.solution_out:
            sol = {**rep.params.to_json(), "config": rep.config.to_json()}
            _write_text(args.solution_out, _dumps(sol) + "\n")
        return EXIT_OK
    print(_dumps({"outcome": rep.outcome, "reason": rep.reason, "steps": rep.n_steps}), file=sys.stderr)
    return EXIT_DEGENERATE if rep.outcome == thurston.DEGENERATE else EXIT_MAX_ITER


def cmd_orbit(args) -> int:
    p = _params_from_args(args)
    res = forward_orbit(
        p,
        parse_complex(args.start),
        n_max=args.n,
        tol=args.tol,
        max_period=args.max_period,
        escape_radius=args.escape_radius,
    )
    print(_dumps(res.to_json()))
    return EXIT_OK


def _check_samples(rng, n: int):
    """Random probe points for one map: z in the disk |z| <= 2, w on the
    sphere minus the omitted values, branch k in [-5, 5]."""
    out = []
    for _ in range(n):
        r = 2.0 * math.sqrt(rng.uniform())
        t = rng.uniform(0, 2 * math.pi)
        z = complex(r * math.cos(t), r * math.sin(t))
        w = complex(rng.normal(), rng.normal()) * 2.0
        k = int(rng.integers(-5, 6))
        out.append((z, w, k))
    return out


def cmd_check(args) -> int:
    p = _params_from_args(args)
    rng = np.random.default_rng(args.seed)
    do_s = args.schwarzian or not args.inverse_roundtrip
    do_r = args.inverse_roundtrip or not args.schwarzian
    report = {"params": p.to_json(), "samples": args.samples, "seed": args.seed}
    ok = True
    s_worst = r_worst = 0.0
    skipped = 0
    for z, w, k in _check_samples(rng, args.samples):
        if do_s:
            try:
                s_worst = max(s_worst, family.schwarzian_residual(p, z))
            except Av2Error:
                skipped += 1
        if do_r:
            try:
                back = family.eval(p, family.inverse(p, w, k))
            except Av2Error:
                continue
            err = math.inf if back is INF else abs(back - w) / max(1.0, abs(w))
            r_worst = max(r_worst, err)
    if do_s:
        report["schwarzian_max_residual"] = s_worst
        report["schwarzian_skipped_near_pole"] = skipped
        ok &= s_worst < SCHWARZIAN_THRESHOLD
    if do_r:
        report["roundtrip_max_error"] = r_worst
        ok &= r_worst < ROUNDTRIP_THRESHOLD
    report["pass"] = bool(ok)
    print(_dumps(report))
    return EXIT_OK if ok else EXIT_DEGENERATE


def _load_transfer_input(path: str):
    obj = _read_json(path)
    if not isinstance(obj, dict) or not {"alpha", "beta", "config"} <= set(obj):
        raise InputError("transfer input needs alpha, beta and config")
    p = Av2Params.from_json({"alpha": obj["alpha"], "beta": obj["beta"]})
    cfg = obj["config"]
    pts = [point_from_json(v) for v in (cfg.values() if isinstance(cfg, dict) else cfg)]
    if not any(z is INF for z in pts):
        pts.append(INF)
    finite = [z for z in pts if z is not INF]
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            if sph_dist(finite[i], finite[j]) < 1e-12:
                raise InputError(f"marked points collide: {finite[i]} and {finite[j]}")
    return p, pts


def cmd_transfer(args) -> int:
    p, pts = _load_transfer_input(args.config)
    basis = qdiff.basis(pts)
    idx = range(len(basis)) if args.basis_index is None else [args.basis_index]
    opts = QuadOpts(rtol=args.quad_tol)
    rows = []
    for i in idx:
        if not 0 <= i < len(basis):
            raise InputError(f"basis index {i} out of range 0..{len(basis) - 1}")
        rep = qdiff.transfer_report(p, basis[i], K=args.K, quad_opts=opts)
        rows.append({"index": i, **rep.to_json(), "delta": 1.0 - rep.ratio})
    out = {
        "params": p.to_json(),
        "quad_tol": args.quad_tol,
        "ratios": rows,
        "max_ratio": max(r["ratio"] for r in rows),
        "weak_bound": 1 + 2 * args.quad_tol,
    }
    print(_dumps(out))
    return EXIT_OK


def cmd_render(args) -> int:
    spec = render.RenderSpec.from_json(_read_json(args.spec))
    threads = args.threads
    env = os.environ.get("AV2_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError as exc:
            raise InputError(f"AV2_THREADS must be an integer, got {env!r}") from exc
    data = render.render(spec, threads=threads)
    try:
        render.write_atomic(args.out, data)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror}") from exc
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_params(sp):
    sp.add_argument("--params", help="JSON file with alpha and beta")
    sp.add_argument("--alpha", default=None, help="alpha as 're,im' or a complex literal")
    sp.add_argument("--beta", default=None, help="beta as 're,im' or a complex literal")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="av2", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a portrait by pullback iteration", formatter_class=fmt)
    sp.add_argument("portrait", help="portrait JSON file")
    sp.add_argument("--tol", type=float, default=1e-11, help="convergence threshold on chordal displacement")
    sp.add_argument("--max-iter", type=int, default=500, help="iteration limit")
    sp.add_argument("--init", default="auto", help="'auto', 'random' or a configuration JSON file")
    sp.add_argument("--seed", type=int, default=0, help="seed for --init random")
    sp.add_argument("--trace-out", default=None, help="trace CSV path; a .jsonl sidecar holds configurations")
    sp.add_argument("--solution-out", default=None, help="write alpha, beta and the final configuration here")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("orbit", help="forward orbit of a point", formatter_class=fmt)
    _add_params(sp)
    sp.add_argument("--start", default="1", help="starting point")
    sp.add_argument("--n", type=int, default=200, help="maximum number of iterations")
    sp.add_argument("--tol", type=float, default=1e-9, help="cycle detection tolerance (chordal)")
    sp.add_argument("--max-period", type=int, default=None, help="longest cycle to look for (default: any)")
    sp.add_argument("--escape-radius", type=float, default=1e10, help="escape threshold on |z|")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("check", help="Schwarzian and inverse-branch identity checks", formatter_class=fmt)
    _add_params(sp)
    sp.add_argument("--schwarzian", action="store_true", help="run only the Schwarzian check")
    sp.add_argument("--inverse-roundtrip", action="store_true", help="run only the inverse round trip")
    sp.add_argument("--samples", type=int, default=1000, help="number of random probes")
    sp.add_argument("--seed", type=int, default=0, help="random seed")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("transfer", help="transfer-operator contraction ratios", formatter_class=fmt)
    sp.add_argument("config", help="JSON with alpha, beta and config (e.g. from solve --solution-out)")
    sp.add_argument("--basis-index", type=int, default=None, help="one basis differential (default: all)")
    sp.add_argument("--K", type=int, default=64, help="preimage truncation")
    sp.add_argument("--quad-tol", type=float, default=1e-2, help="relative quadrature tolerance")
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("render", help="escape-time picture of the beta plane", formatter_class=fmt)
    sp.add_argument("spec", help="render spec JSON")
    sp.add_argument("out", help="output PPM (P6)")
    sp.add_argument("--threads", type=int, default=1, help="worker threads (AV2_THREADS overrides)")
    sp.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except PortraitError as exc:
        print("invalid portrait:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INPUT
    except QuadratureFailure as exc:
        print(f"quadrature failed: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, Av2Error, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
