"""Command-line front end.

Subcommands mirror the library: ``j``, ``j-multi``, ``rate``, ``annealed``,
``mc-verify``, ``interval-cost``. Every run prints a single RunReport JSON
object: command echo, a sha256 digest of the canonical inputs, outputs
(with stderr for anything stochastic), wall time, seed where applicable,
and the library version. Floats serialize via Python repr (shortest
round-trip form, at most 17 significant digits).

Exit codes: 0 success; 2 invalid input (bad flags, malformed files, domain
errors); 3 ConvergenceError.

Grid sweeps (``--grid lo:hi:n``) emit n+1 rows, endpoints inclusive, as
``x,value`` CSV or a JSON array per ``--format``. SPHINT_THREADS caps the
worker pool used to evaluate sweep points (output order is input order
either way).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, ldp, measures, randmat, spherical
from .errors import ConvergenceError, SphintError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONVERGENCE = 3


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _report(command: str, inputs: dict, outputs: dict, t0: float, seed=None, timing=True) -> dict:
    rep = {
        "command": command,
        "inputs": inputs,
        "inputs_sha256": hashlib.sha256(_canonical(inputs).encode()).hexdigest(),
        "outputs": outputs,
        "seed": seed,
        "version": __version__,
    }
    if timing:
        rep["wall_time_s"] = time.perf_counter() - t0
    return rep


def _parse_floats(text: str) -> list[float]:
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok != ""]


def _parse_grid(text: str) -> np.ndarray:
    lo, hi, n = text.split(":")
    n = int(n)
    if n < 0:
        raise ValueError("grid count must be >= 0")
    return np.linspace(float(lo), float(hi), n + 1)


def _sweep(f, xs):
    workers = int(os.environ.get("SPHINT_THREADS", "1") or "1")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(f, xs))
    return [f(x) for x in xs]


def _emit_rows(xs, vals, fmt):
    if fmt == "csv":
        print("x,value")
        for x, v in zip(xs, vals):
            print(f"{float(x)!r},{v if isinstance(v, str) else float(v)!r}")
    else:
        print(json.dumps([{"x": float(x), "value": v} for x, v in zip(xs, vals)]))


def _load_json_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_j(args) -> int:
    t0 = time.perf_counter()
    mu = measures.measure_from_spec(args.measure)
    res = spherical.j_one(mu, args.theta, args.lam)
    inputs = {"measure": mu.to_json_dict(), "theta": args.theta, "lambda": args.lam, "beta": args.beta}
    outputs = {
        "j": res.value,
        "limit_beta_over_2_j": args.beta / 2.0 * res.value,
        "v_star": None if res.v_star != res.v_star else res.v_star,
        "regime": res.regime.value,
        "normalization": "j is the tilt-normalized value; the log-Laplace limit is (beta/2)*j",
    }
    print(json.dumps(_report("j", inputs, outputs, t0, timing=args.timing)))
    return EXIT_OK


def _cmd_j_multi(args) -> int:
    t0 = time.perf_counter()
    mu = measures.measure_from_spec(args.measure)
    thetas = spherical.ThetaSpec(
        top=tuple(_parse_floats(args.thetas)), bottom=tuple(_parse_floats(args.thetas_bottom))
    )
    lambdas = spherical.OutlierSpec(
        top=tuple(_parse_floats(args.lambdas)), bottom=tuple(_parse_floats(args.lambdas_bottom))
    )
    val = spherical.j_multi(mu, thetas, lambdas)
    inputs = {
        "measure": mu.to_json_dict(),
        "thetas": list(thetas.top),
        "thetas_bottom": list(thetas.bottom),
        "lambdas": list(lambdas.top),
        "lambdas_bottom": list(lambdas.bottom),
        "beta": args.beta,
    }
    outputs = {
        "j_multi": val,
        "limit_beta_over_2_j": args.beta / 2.0 * val,
        "normalization": "j_multi is tilt-normalized; the log-Laplace limit is (beta/2)*j_multi",
    }
    print(json.dumps(_report("j-multi", inputs, outputs, t0, timing=args.timing)))
    return EXIT_OK


def _rate_fn(args):
    kind = args.kind
    if kind == "wigner":
        return lambda x: ldp.wigner_rate(x, args.beta), {"beta": args.beta}
    if kind == "wishart":
        if args.alpha is None:
            raise SphintError("rate wishart needs --alpha")
        return lambda x: ldp.wishart_rate(x, args.alpha, args.beta), {"alpha": args.alpha, "beta": args.beta}
    if kind == "perturbed-wigner":
        if args.theta is None:
            raise SphintError("rate perturbed-wigner needs --theta")
        return (
            lambda x: ldp.perturbed_wigner_rate(x, args.theta, args.beta),
            {"theta": args.theta, "beta": args.beta,
             "normalization": "scalar I_theta(x); the k-vector rate is beta * sum I_theta_i(x_i)"},
        )
    if kind == "perturbed-wishart":
        if args.gamma is None or args.alpha is None:
            raise SphintError("rate perturbed-wishart needs --gamma and --alpha")
        return (
            lambda x: ldp.perturbed_wishart_rate(x, args.gamma, args.alpha, args.beta),
            {"gamma": args.gamma, "alpha": args.alpha, "beta": args.beta,
             "normalization": "carries beta: I_alpha - (beta/4)(alpha/(1+alpha)) J - inf"},
        )
    raise SphintError(f"unknown rate kind {kind!r}")


def _cmd_rate(args) -> int:
    t0 = time.perf_counter()
    f, meta = _rate_fn(args)
    if args.grid:
        xs = _parse_grid(args.grid)
        vals = [("inf" if v == float("inf") else float(v)) for v in _sweep(f, xs)]
        _emit_rows(xs, vals, args.format)
        return EXIT_OK
    if args.x is None:
        raise SphintError("rate needs --x or --grid")
    val = f(args.x)
    inputs = {"kind": args.kind, "x": args.x, **{k: v for k, v in meta.items() if k != "normalization"}}
    outputs = {"value": val if val != float("inf") else "inf"}
    if "normalization" in meta:
        outputs["normalization"] = meta["normalization"]
    print(json.dumps(_report("rate", inputs, outputs, t0, timing=args.timing)))
    return EXIT_OK


def _cmd_annealed(args) -> int:
    t0 = time.perf_counter()
    if args.kind == "wishart":
        if args.alpha is None:
            raise SphintError("annealed wishart needs --alpha")
        val, amax = ldp.annealed_lambda_wishart(args.theta, args.alpha)
        inputs = {"kind": "wishart", "theta": args.theta, "alpha": args.alpha}
        outputs = {
            "value": val,
            "maximizer": amax,
            "normalization": "value excludes the beta/2 prefactor of the annealed limit",
        }
    else:
        if args.profile is None:
            raise SphintError("annealed profile needs --profile profile.json")
        obj = _load_json_file(args.profile)
        prof = ldp.VarianceProfile(np.asarray(obj["R"], dtype=float), np.asarray(obj["alpha"], dtype=float))
        val, psi = ldp.annealed_lambda_profile(args.theta, prof)
        inputs = {"kind": "profile", "theta": args.theta, "R": obj["R"], "alpha": obj["alpha"]}
        outputs = {
            "value": val,
            "maximizer": psi.tolist(),
            "normalization": "value excludes the beta/2 prefactor of the annealed limit",
        }
    print(json.dumps(_report("annealed", inputs, outputs, t0, timing=args.timing)))
    return EXIT_OK


def _cmd_mc_verify(args) -> int:
    t0 = time.perf_counter()
    if args.model:
        model = spherical.DiscreteModel.from_json(_load_json_file(args.model))
        if args.n is not None and args.n != model.n_total:
            raise SphintError(f"--n {args.n} does not match the model size {model.n_total}")
        n = model.n_total
        diag = np.repeat(np.asarray(model.etas), model.multiplicities)
        mu = model.bulk_measure()
        top, bottom = model.outliers()
        model_inputs = model.to_json_dict()
    elif args.measure:
        if args.n is None or not args.outliers:
            raise SphintError("--measure mode needs --n and --outliers")
        mu = measures.measure_from_spec(args.measure)
        top = tuple(sorted(_parse_floats(args.outliers), reverse=True))
        bottom = tuple(sorted(_parse_floats(args.outliers_bottom)))
        n = args.n
        nbulk = n - len(top) - len(bottom)
        if nbulk < 1:
            raise SphintError("need at least one bulk point")
        diag = np.concatenate([np.asarray(bottom), measures.quantiles(mu, nbulk), np.asarray(top)])
        model_inputs = {"measure": mu.to_json_dict(), "outliers": list(top), "outliers_bottom": list(bottom)}
    else:
        raise SphintError("mc-verify needs --model or --measure")

    th_top = tuple(sorted(_parse_floats(args.thetas), reverse=True))
    th_bot = tuple(sorted(_parse_floats(args.thetas_bottom), reverse=True))
    thetas = spherical.ThetaSpec(top=th_top, bottom=th_bot)
    if len(th_top) > len(top) or len(th_bot) > len(bottom):
        raise SphintError("more tilts than outliers on one side")
    lambdas = spherical.OutlierSpec(top=top[: len(th_top)], bottom=bottom[: len(th_bot)])

    if args.dump_matrix:
        randmat.dump_matrix(args.dump_matrix, np.diag(diag))

    cfg = randmat.MCConfig(n=n, samples=args.samples, seed=args.seed, beta=args.beta)
    est = randmat.mc_spherical(diag, thetas, cfg)
    asym = args.beta / 2.0 * spherical.j_multi(mu, thetas, lambdas)
    inputs = {
        "model": model_inputs,
        "thetas": list(th_top),
        "thetas_bottom": list(th_bot),
        "n": n,
        "samples": args.samples,
        "beta": args.beta,
        "backend": randmat.BACKEND,
    }
    outputs = {
        "estimate": est.estimate,
        "stderr": est.stderr,
        "asymptotic": asym,
        "gap": est.estimate - asym,
        "batches": est.batches,
    }
    print(json.dumps(_report("mc-verify", inputs, outputs, t0, seed=args.seed, timing=args.timing)))
    return EXIT_OK


def _cmd_interval_cost(args) -> int:
    t0 = time.perf_counter()
    obj = _load_json_file(args.spec)
    intervals = [tuple(map(float, iv)) for iv in obj["intervals"]]
    counts = [int(c) for c in obj["counts"]]
    rate_spec = obj["rate"]
    kind = rate_spec["kind"]
    beta = int(rate_spec.get("beta", 1))
    if kind == "wigner":
        rate = lambda x: ldp.wigner_rate(x, beta)
    elif kind == "wishart":
        alpha = float(rate_spec["alpha"])
        rate = lambda x: ldp.wishart_rate(x, alpha, beta)
    elif kind == "perturbed-wigner":
        theta = float(rate_spec["theta"])
        rate = lambda x: ldp.perturbed_wigner_rate(x, theta, beta)
    else:
        raise SphintError(f"unknown rate kind {kind!r} in {args.spec}")
    val = ldp.outlier_interval_cost(intervals, counts, rate)
    inputs = {"intervals": [list(iv) for iv in intervals], "counts": counts, "rate": rate_spec}
    outputs = {"cost": val}
    print(json.dumps(_report("interval-cost", inputs, outputs, t0, timing=args.timing)))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphint", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="omit wall_time_s from the report (byte-identical reruns)")
    sub = p.add_subparsers(dest="cmd", required=True)

    pj = sub.add_parser("j", help="scalar limiting spherical integral")
    pj.add_argument("--measure", required=True, help="'semicircle', 'mp:ALPHA', or a JSON file")
    pj.add_argument("--theta", type=float, required=True)
    pj.add_argument("--lambda", dest="lam", type=float, required=True)
    pj.add_argument("--beta", type=int, default=1, choices=(1, 2))
    pj.set_defaults(fn=_cmd_j)

    pm = sub.add_parser("j-multi", help="k-dimensional spherical integral (sum of scalars)")
    pm.add_argument("--measure", required=True)
    pm.add_argument("--thetas", default="", help="comma list, descending, >= 0")
    pm.add_argument("--thetas-bottom", default="", help="comma list, <= 0, descending")
    pm.add_argument("--lambdas", default="", help="comma list, descending")
    pm.add_argument("--lambdas-bottom", default="", help="comma list, ascending (smallest first)")
    pm.add_argument("--beta", type=int, default=1, choices=(1, 2))
    pm.set_defaults(fn=_cmd_j_multi)

    pr = sub.add_parser("rate", help="large-deviations rate functions")
    pr.add_argument("kind", choices=("wigner", "wishart", "perturbed-wigner", "perturbed-wishart"))
    pr.add_argument("--x", type=float)
    pr.add_argument("--grid", help="lo:hi:n sweep (emits n+1 rows, endpoints inclusive)")
    pr.add_argument("--theta", type=float)
    pr.add_argument("--gamma", type=float)
    pr.add_argument("--alpha", type=float)
    pr.add_argument("--beta", type=int, default=1, choices=(1, 2))
    pr.add_argument("--format", choices=("json", "csv"), default="csv")
    pr.set_defaults(fn=_cmd_rate)

    pa = sub.add_parser("annealed", help="annealed spherical integrals")
    pa.add_argument("kind", choices=("wishart", "profile"))
    pa.add_argument("--theta", type=float, required=True)
    pa.add_argument("--alpha", type=float)
    pa.add_argument("--profile", help="JSON file {'R': [[...]], 'alpha': [...]}")
    pa.set_defaults(fn=_cmd_annealed)

    pv = sub.add_parser("mc-verify", help="finite-N Monte-Carlo vs the asymptotic formula")
    pv.add_argument("--model", help="DiscreteModel JSON file {'etas','mult','bulk'}")
    pv.add_argument("--measure", help="bulk measure for quantile mode ('semicircle', 'mp:A', file)")
    pv.add_argument("--outliers", default="", help="top outliers (quantile mode)")
    pv.add_argument("--outliers-bottom", default="", help="bottom outliers (quantile mode)")
    pv.add_argument("--thetas", default="", help="top tilts, comma list")
    pv.add_argument("--thetas-bottom", default="")
    pv.add_argument("--n", type=int)
    pv.add_argument("--samples", type=int, required=True)
    pv.add_argument("--seed", type=int, required=True)
    pv.add_argument("--beta", type=int, default=1, choices=(1, 2))
    pv.add_argument("--dump-matrix", help="also write the sampled diagonal matrix (binary SPHI format)")
    pv.set_defaults(fn=_cmd_mc_verify)

    pi = sub.add_parser("interval-cost", help="outlier point-process interval cost")
    pi.add_argument("--spec", required=True, help="JSON file {'intervals', 'counts', 'rate'}")
    pi.set_defaults(fn=_cmd_interval_cost)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConvergenceError as exc:
        print(f"sphint: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SphintError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"sphint: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
