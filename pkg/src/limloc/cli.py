"""Command-line front end: ``limloc <command> [flags]``.

Exit statuses: 0 success, 1 a check failed, 2 usage error, 3 a rejection
budget ran out.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

from . import __version__
from .constraints import ConstraintSpec, classify
from .errors import ParameterError, RejectionBudgetError
from .localtime import occupation_estimate
from .montecarlo import THREADS_ENV, default_threads
from .paths import gen_bessel3, gen_bessel3_bridge, gen_bridge, gen_brownian

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

GENERATORS = {"bm": gen_brownian, "bridge": gen_bridge, "bessel3": gen_bessel3, "bessel3-bridge": gen_bessel3_bridge}

REGIME = {"convergent": "transient regime", "divergent": "conjectured recurrent regime"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(command, params, seed, outputs) -> str:
    return json.dumps({
        "command": command,
        "params": params,
        "seed_root": seed,
        "artifact_version": __version__,
        "outputs": [{"path": p, "sha256": _sha256(p)} for p in outputs],
    }, sort_keys=True, indent=2)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2, allow_nan=True))
        fh.write("\n")


# ---------------------------------------------------------------------------


def cmd_simulate(a) -> int:
    gen = GENERATORS[a.process]
    path = gen(a.seed, a.horizon, a.dt)
    os.makedirs(a.out, exist_ok=True)
    stem = f"{a.process}_seed{a.seed}"
    pf = os.path.join(a.out, f"{stem}_path.csv")
    lf = os.path.join(a.out, f"{stem}_localtime.csv")
    path.to_csv(pf)
    occupation_estimate(path).to_csv(lf)
    params = {"process": a.process, "horizon": a.horizon, "dt": a.dt}
    print(_manifest("simulate", params, a.seed, [pf, lf]))
    return EXIT_OK


def cmd_figure1(a) -> int:
    from .experiments import figure1

    summary = figure1(a.gamma, a.t, a.dt, a.seed, a.budget, a.out, curve_attempts=a.curve_attempts,
                      threads=a.threads)
    sp = os.path.join(a.out, "figure1_summary.json")
    _write_json(sp, summary)
    outputs = list(summary["files"]) + [sp]
    params = {"gamma": a.gamma, "t": a.t, "dt": a.dt, "budget": a.budget, "curve_attempts": a.curve_attempts}
    print(_manifest("figure1", params, a.seed, outputs))
    if any(e["status"] != "ok" for e in summary["trajectories"]):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_verify(a) -> int:
    from . import verify

    if a.n is not None and a.n < 1:
        raise UsageError("--n must be >= 1")

    def progress(res):
        print(res.line(), file=sys.stderr, flush=True)

    overall, results = verify.run_suite(a.suite, root=a.seed, n=a.n, threads=a.threads, progress=progress)
    text = verify.report_json(a.suite, a.seed, a.n, overall, results)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if overall == "inconclusive":
        print(f"warning: sample size below the floor of {verify.st.MIN_SAMPLES}; verdicts are inconclusive",
              file=sys.stderr)
    return EXIT_FAIL if overall == "fail" else EXIT_OK


def _load_constraint(text) -> ConstraintSpec:
    if os.path.exists(text):
        if text.lower().endswith(".csv"):
            return ConstraintSpec.from_csv(text)
        with open(text, encoding="utf-8") as fh:
            return ConstraintSpec.from_json(json.load(fh))
    return ConstraintSpec.from_json(json.loads(text))


def cmd_classify(a) -> int:
    try:
        f = _load_constraint(a.f)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed constraint: {exc}") from None
    c = classify(f, t_max=a.t_max)
    print(REGIME[c.verdict])
    detail = {"verdict": c.verdict, "method": c.method}
    if c.partial_integrals:
        detail["partial_integrals"] = list(c.partial_integrals)
    if c.exponent is not None:
        detail["window_decay_exponent"] = c.exponent
    print(json.dumps(detail, sort_keys=True))
    return EXIT_OK


def cmd_probe_conjecture(a) -> int:
    from .experiments import QUANTILES, probe_conjecture

    if not 0 < a.gamma < 1:
        raise UsageError("--gamma must lie in (0, 1)")
    if sorted(a.t) != a.t:
        raise UsageError("--t must be increasing")
    rows = probe_conjecture(a.gamma, a.t, a.n, a.dt, a.seed, a.budget, threads=a.threads)
    os.makedirs(a.out, exist_ok=True)
    cp = os.path.join(a.out, "probe_conjecture.csv")
    cols = ["t", "f_t", "requested", "accepted", "attempts", "partial", *QUANTILES, "max_ratio"]
    with open(cp, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(f"{r[c]:.17g}" if isinstance(r[c], float) else str(r[c]).lower() for c in cols) + "\n")
    params = {"gamma": a.gamma, "t": a.t, "n": a.n, "dt": a.dt, "budget": a.budget,
              "label": "exploratory: no pass/fail claim"}
    print(_manifest("probe-conjecture", params, a.seed, [cp]))
    return EXIT_BUDGET if any(r["partial"] for r in rows) else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="limloc", description="Brownian motion conditioned on its local time at 0.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=0):
        sp.add_argument("--seed", type=_seed, default=seed)
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")

    s = sub.add_parser("simulate", help="write one path and its local-time profile")
    s.add_argument("--process", choices=sorted(GENERATORS), required=True)
    s.add_argument("--horizon", type=_positive(float), required=True)
    s.add_argument("--dt", type=_positive(float), required=True)
    s.add_argument("--out", default=".")
    common(s)
    s.set_defaults(run=cmd_simulate)

    s = sub.add_parser("figure1", help="K_t-conditioned trajectories for several gamma")
    s.add_argument("--gamma", type=_float_list, default=[0.5, 0.9, 1.1])
    s.add_argument("--t", type=_positive(float), default=1e4)
    s.add_argument("--dt", type=_positive(float), default=0.01)
    s.add_argument("--budget", type=_positive(int), default=None,
                   help="max rejection attempts per trajectory (default: 100 / estimated acceptance)")
    s.add_argument("--curve-attempts", type=int, default=0,
                   help="attempts per point of the acceptance-rate curve at t = 1e2, 1e3, 1e4 (0: skip)")
    s.add_argument("--out", default="figure1")
    common(s)
    s.set_defaults(run=cmd_figure1)

    s = sub.add_parser("verify", help="run acceptance checks and write a JSON report")
    s.add_argument("--suite", choices=["all", "limit-laws", "scaling", "dominance", "analytics"], default="all")
    s.add_argument("--n", type=int, default=None, help="override the sample size of every check")
    s.add_argument("--out", default=None, help="report path (default: standard output)")
    from .verify import DEFAULT_ROOT
    common(s, DEFAULT_ROOT)
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("classify", help="integral test for a constraint function")
    s.add_argument("--f", required=True, help="JSON object, JSON file or CSV table with header t,f")
    s.add_argument("--t-max", type=_positive(float), default=None)
    s.set_defaults(run=cmd_classify)

    s = sub.add_parser("probe-conjecture", help="exploratory quantiles of L_t/f(t) under K_t")
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--t", type=_float_list, required=True)
    s.add_argument("--n", type=_positive(int), default=200)
    s.add_argument("--dt", type=_positive(float), default=0.01)
    s.add_argument("--budget", type=_positive(int), default=10**7)
    s.add_argument("--out", default="probe")
    common(s)
    s.set_defaults(run=cmd_probe_conjecture)
    return p


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        if getattr(a, "threads", None) is None and hasattr(a, "threads"):
            a.threads = default_threads()
        elif getattr(a, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return a.run(a)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"limloc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RejectionBudgetError as exc:
        print(f"limloc: {exc} (acceptance estimate {exc.acceptance_estimate:.3g})", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
