"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or invalid input,
3 I/O failure, 4 scan limits exceeded.
"""

import argparse
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import resources

import numpy as np

from . import _io, verify
from .classify import CASE_CODES, DEFAULT_THRESHOLDS, classify_lambda, prop1_scan
from .errors import ExpDynError, ScanLimitError
from .orbit import orbit
from .ruelle import GammaCombo, branch_sum, modulus_branch_sum, push_forward_iter
from .scan import DYNAMICAL, MODES, PARAM, ScanJob, coordinates, run_scan, worker_count
from .series import b_series, poincare_report, summability_report

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO, EXIT_LIMIT = 0, 1, 2, 3, 4

COMPLEX_GRAMMAR = ('complex numbers are written "a+bi": a real part, an imaginary part '
                   'ending in i (or j), or both, e.g. 1, -0.5, 2i, -i, 3+1i, 1e-3-2.5i')

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^\s*(?:(?P<re>[+-]?{_NUM})(?![\dij.eE]))?\s*"
    rf"(?:(?P<im>[+-]?\s*(?:{_NUM})?)[ij])?\s*$")

# config keys and their types; flags with the same dest override them
CONFIG_KEYS = {
    "horizon": int, "escape_log_threshold": float, "window_fraction": float,
    "delta": float, "cycle_tol": float, "max_period": int, "prop1_delta": float,
    "max_pixels": int, "K": int, "N": int, "workers": int,
}


def parse_complex(text):
    m = _COMPLEX_RE.match(text)
    if not text.strip() or not m or (m.group("re") is None and m.group("im") is None):
        raise argparse.ArgumentTypeError(f"cannot parse {text!r}; {COMPLEX_GRAMMAR}")
    re_part = float(m.group("re")) if m.group("re") else 0.0
    im_part = 0.0
    if m.group("im") is not None:
        s = m.group("im").replace(" ", "")
        if s in ("", "+"):
            im_part = 1.0
        elif s == "-":
            im_part = -1.0
        else:
            im_part = float(s)
    return complex(re_part, im_part)


def parse_complex_list(text):
    return [parse_complex(t) for t in text.split(";") if t.strip()]


def parse_region(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("region is re_min,re_max,im_min,im_max")
    return tuple(vals)


def parse_size(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError("size is WIDTHxHEIGHT, e.g. 200x200")
    return int(m.group(1)), int(m.group(2))


def load_config(path=None):
    """Shipped defaults, then the user's file on top."""
    text = resources.files("expdyn").joinpath("default.cfg").read_text()
    cfg = _parse_config(text, "default.cfg")
    if path:
        with open(path) as fh:
            cfg.update(_parse_config(fh.read(), path))
    return cfg


def _parse_config(text, name):
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in CONFIG_KEYS:
            raise ValueError(f"{name}:{lineno}: unknown or malformed setting {line!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ValueError(f"{name}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def _thresholds(args):
    return replace(DEFAULT_THRESHOLDS, escape_log_threshold=args.escape_log_threshold,
                   window_fraction=args.window_fraction, delta=args.delta,
                   cycle_tol=args.cycle_tol, max_period=args.max_period)


def _emit(args, text, binary=False):
    if args.out in (None, "-"):
        sys.stdout.write(text if not binary else text.decode())
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(args.out, "wb" if binary else "w", newline=None if binary else "") as fh:
        fh.write(text)


def _fmt(z):
    z = complex(z)
    return f"{z.real!r}{z.imag:+.17g}i"


# -- subcommands ------------------------------------------------------------

def cmd_orbit(args):
    rec = orbit(args.lam, args.seed, args.n, args.escape_log_threshold, args.cycle_tol,
                args.max_period)
    if args.format == "json":
        _emit(args, _io.dumps(rec.to_json(), indent=1))
    else:
        _emit(args, rec.to_csv())
    return EXIT_OK


def cmd_series(args):
    if args.kind == "poincare":
        rep = poincare_report(args.lam, args.n, args.escape_log_threshold,
                              args.window_fraction, args.delta)
    else:
        rep = summability_report(args.lam, args.a, args.n, args.escape_log_threshold,
                                 args.window_fraction, args.delta)
    _emit(args, _io.dumps(rep.to_json(), indent=1) if args.format == "json" else rep.to_csv())
    return EXIT_OK


def cmd_bseries(args):
    a = args.a if args.a is not None else complex(np.exp(args.lam))
    rep = b_series(args.lam, a, args.n, args.escape_log_threshold,
                   args.window_fraction, args.delta)
    _emit(args, _io.dumps(rep.to_json(), indent=1) if args.format == "json" else rep.to_csv())
    return EXIT_OK


def cmd_ruelle_eval(args):
    if args.combo:
        with open(args.combo) as fh:
            combo = GammaCombo.from_json(json.load(fh))
    else:
        combo = GammaCombo.gamma(args.a, args.coef)
    res = push_forward_iter(args.lam, combo, args.iterate)
    rows = []
    for z in args.z:
        exact = res.combo.evaluate(z)
        row = {"z": _io.pair(z), "closed_form": _io.pair(exact)}
        if args.iterate == 1:
            bs = branch_sum(args.lam, combo, z, args.K)
            row.update(branch_sum=_io.pair(bs), abs_difference=abs(bs - exact),
                       modulus_sum=modulus_branch_sum(args.lam, combo, z, args.K))
        rows.append(row)
    out = {"lambda": _io.pair(args.lam), "iterate": args.iterate, "K": args.K,
           "input": combo.to_json(), "result": res.combo.to_json(),
           "dropped_terms": res.combo.dropped, "evaluations": rows}
    _emit(args, _io.dumps(out, indent=1))
    return EXIT_OK


def cmd_verify(args):
    samples = args.samples or verify.DEFAULT_SAMPLES
    n = args.n if args.n is not None else args.N
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in suites:
        if name == "prop2":
            r = verify.prop2(args.lam, args.a, args.z, args.K)
        elif name == "iterate":
            r = verify.iterate(args.lam, args.a, args.z, args.iterate_K)
        elif name == "lemma5":
            r = verify.lemma5(args.lam, n, samples)
        else:
            r = verify.mobius(args.lam, args.y, n, samples)
        print("\n".join(r.lines()))
        ok &= r.passed
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_classify(args):
    rep = classify_lambda(args.lam, args.horizon, _thresholds(args))
    _emit(args, rep.dumps())
    return EXIT_OK


def _scan_job(args, mode):
    w, h = args.size
    return ScanJob(args.region, w, h, mode, args.horizon, args.lam, _thresholds(args),
                   args.max_pixels)


def cmd_scan(args):
    job = _scan_job(args, args.mode)
    result = run_scan(job, worker_count(args.workers))
    image = args.out or "scan.ppm"
    sidecar = args.csv or (re.sub(r"\.ppm$", "", image) + ".csv")
    with open(image, "wb") as fh:
        fh.write(result.ppm_bytes())
    with open(sidecar, "w", newline="") as fh:
        fh.write(result.csv_text())
    if job.mode == PARAM:
        counts = result.case_counts()
        print(" ".join(f"{k}={v}" for k, v in counts.items()))
    print(f"wrote {image} and {sidecar}")
    return EXIT_OK


def _wscan_row(task):
    lam, horizon, th = task
    rep = classify_lambda(lam, horizon, th)
    tail = complex(rep.sn_trend[-1]) if len(rep.sn_trend) else complex(math.nan)
    w = rep.w_evidence
    return (lam.real, lam.imag, CASE_CODES[rep.case], w.summable == "absolutely-convergent",
            w.min_dist_to_zero, tail.real, tail.imag)


def cmd_wscan(args):
    job = _scan_job(args, PARAM)
    job.validate()
    lams = coordinates(job).ravel()
    th = _thresholds(args)
    tasks = [(complex(l), args.horizon, th) for l in lams]
    n = worker_count(args.workers)
    if n > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(_wscan_row, tasks, chunksize=16))
    else:
        rows = [_wscan_row(t) for t in tasks]
    buf = io.StringIO()
    _io.write_csv(buf, ["re_lambda", "im_lambda", "case_code", "summable", "min_dist",
                        "re_S_tail", "im_S_tail"], rows, job.stamp())
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_prop1scan(args):
    if args.step <= 0 or args.stop < args.start:
        raise ScanLimitError("need step > 0 and stop >= start")
    count = int(round((args.stop - args.start) / args.step)) + 1
    if count > args.max_pixels:
        raise ScanLimitError(f"{count} grid points exceed the cap of {args.max_pixels}")
    grid = args.start + args.step * np.arange(count) + 1j * args.imag
    res = prop1_scan(grid, args.horizon, args.prop1_delta, _thresholds(args))
    buf = io.StringIO()
    stamp = {"horizon": args.horizon, "delta": args.prop1_delta,
             "start": args.start, "stop": args.stop, "step": args.step, "imag": args.imag}
    rows = [(e.lam.real, e.lam.imag, int(e.flagged), int(e.escaped), e.spread_log,
             e.drift) for e in res.evidence]
    _io.write_csv(buf, ["re_lambda", "im_lambda", "flagged", "escaped", "spread_log",
                        "drift"], rows, stamp)
    _emit(args, buf.getvalue())
    print(f"# flags: {len(res.flags)}", file=sys.stderr)
    for e in res.near_misses():
        print(f"# near miss lambda={_fmt(e.lam)} spread_log={e.spread_log:.4g} "
              f"band_log={e.band_log:.4g} drift={e.drift:.4g}", file=sys.stderr)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="expdyn", description=(
        "Orbits, Poincare-type series, the push-forward operator and parameter scans "
        "for f(z) = exp(lambda z)."))
    p.add_argument("--config", help="key=value settings file applied over the defaults")
    sub = p.add_subparsers(dest="command", required=True)
    C = parse_complex

    def common(sp, out_help="output file (default: stdout)"):
        sp.add_argument("--out", "-o", help=out_help)
        sp.add_argument("--escape-log-threshold", dest="escape_log_threshold", type=float)
        sp.add_argument("--window-fraction", dest="window_fraction", type=float)
        sp.add_argument("--delta", type=float, help="ratio-test margin")
        sp.add_argument("--cycle-tol", dest="cycle_tol", type=float)
        sp.add_argument("--max-period", dest="max_period", type=int)

    sp = sub.add_parser("orbit", help="orbit record with derivative cocycle")
    sp.add_argument("--lambda", dest="lam", type=C, required=True)
    sp.add_argument("--seed", type=C, default=0j)
    sp.add_argument("-n", type=int, default=50)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sp)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("series", help="Poincare or summability series report")
    sp.add_argument("--lambda", dest="lam", type=C, required=True)
    sp.add_argument("--kind", choices=("poincare", "summability"), default="poincare")
    sp.add_argument("--a", type=C, default=1 + 0j, help="base point for summability")
    sp.add_argument("-n", type=int, default=50)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sp)
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("bseries", help="partial sums of B(a)")
    sp.add_argument("--lambda", dest="lam", type=C, required=True)
    sp.add_argument("--a", type=C, help="base point (default f(1))")
    sp.add_argument("-n", type=int, default=12)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sp)
    sp.set_defaults(func=cmd_bseries)

    sp = sub.add_parser("ruelle-eval", help="closed-form push-forward vs branch sums")
    sp.add_argument("--lambda", dest="lam", type=C, required=True)
    sp.add_argument("--a", type=C, default=2 + 0j)
    sp.add_argument("--coef", type=C, default=1 + 0j)
    sp.add_argument("--combo", help="JSON file holding a combination [{coef, pole}, ...]")
    sp.add_argument("--z", type=parse_complex_list, default=[3 + 0j],
                    help='evaluation points separated by ";"')
    sp.add_argument("--iterate", type=int, default=1)
    sp.add_argument("--K", type=int)
    sp.add_argument("--out", "-o")
    sp.set_defaults(func=cmd_ruelle_eval)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", choices=verify.SUITES + ("all",))
    sp.add_argument("--lambda", dest="lam", type=C, default=1 + 0j)
    sp.add_argument("--a", type=C, default=2 + 0j)
    sp.add_argument("--z", type=C, default=3 + 0j)
    sp.add_argument("--y", type=C, default=3 + 1j)
    sp.add_argument("--K", type=int)
    sp.add_argument("--iterate-K", dest="iterate_K", type=int, default=400)
    sp.add_argument("-n", type=int, dest="n")
    sp.add_argument("--samples", type=parse_complex_list)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("classify", help="classification report for one lambda (JSON)")
    sp.add_argument("--lambda", dest="lam", type=C, required=True)
    sp.add_argument("--horizon", type=int)
    common(sp)
    sp.set_defaults(func=cmd_classify)

    for name, helptext in (("scan", "render a parameter or dynamical plane scan"),
                           ("wscan", "classification and summability evidence on a grid")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--region", type=parse_region, required=True,
                        help="re_min,re_max,im_min,im_max")
        sp.add_argument("--size", type=parse_size, required=True, help="WIDTHxHEIGHT")
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--max-pixels", dest="max_pixels", type=int)
        if name == "scan":
            sp.add_argument("--mode", choices=MODES, default=PARAM)
            sp.add_argument("--lambda", dest="lam", type=C, default=1 + 0j,
                            help=f"map parameter for {DYNAMICAL} mode")
            sp.add_argument("--csv", help="CSV sidecar path (default: image path with .csv)")
            common(sp, "image path (P6 pixmap, default scan.ppm)")
            sp.set_defaults(func=cmd_scan)
        else:
            sp.set_defaults(lam=1 + 0j)
            common(sp)
            sp.set_defaults(func=cmd_wscan)

    sp = sub.add_parser("prop1scan", help="search a lambda line for a constant-modulus derivative")
    sp.add_argument("--start", type=float, default=-3.0)
    sp.add_argument("--stop", type=float, default=3.0)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--imag", type=float, default=0.0, help="imaginary part of the line")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--band-delta", dest="prop1_delta", type=float)
    sp.add_argument("--max-pixels", dest="max_pixels", type=int)
    common(sp)
    sp.set_defaults(func=cmd_prop1scan)
    return p


def _apply_config(args, cfg):
    for key, value in cfg.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    for key in CONFIG_KEYS:
        if not hasattr(args, key):
            setattr(args, key, cfg.get(key))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _apply_config(args, cfg)
    try:
        return args.func(args)
    except ScanLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ExpDynError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
