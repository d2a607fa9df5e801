"""Command line entry point: ``permuton <subcommand> [flags]``.

All randomness comes from ``--seed``; identical arguments give byte-identical
output. Failures print a JSON object to stderr and exit with 2 (usage),
3 (data) or 4 (budget).
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chains, copulas, indep, partitions, patterns, queues
from .data import CONCORDANT_PAIRS, TABLE1_COUNTS, TABLE1_FREQUENCIES
from .errors import BudgetError, PermutonError
from .perm import BivariateSample, Permutation, empirical_measure, ranks

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 2, 3, 4
MODELS = ("F", "H", "crp", "plancherel", "mg1", "delay")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    output: Path | None = None
    seed: int = 0
    format: str = "json"
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        common = {"command", "input", "output", "seed", "format", "func"}
        if not 0 <= ns.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        return cls(ns.command, ns.input, ns.output, ns.seed, ns.format,
                   {k: v for k, v in vars(ns).items() if k not in common})


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (Permutation, partitions.Partition)):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text, encoding="utf-8")


def _load_perm(cfg: RunConfig) -> Permutation:
    perm = cfg.options.get("perm")
    if perm:
        return Permutation.parse(perm)
    if cfg.input is None:
        raise UsageError("need --input or --perm")
    return ranks(_load_sample(cfg), ties=cfg.options.get("ties", "strict"), seed=cfg.seed)[2]


def _load_sample(cfg: RunConfig) -> BivariateSample:
    if cfg.input is None:
        raise UsageError("need --input")
    if not cfg.input.exists():
        raise PermutonError(f"{cfg.input}: no such file")
    return BivariateSample.read_csv(cfg.input)


# --- subcommands -----------------------------------------------------------

def cmd_ranks(cfg: RunConfig) -> str:
    data = _load_sample(cfg)
    px, py, pi = ranks(data, ties=cfg.options["ties"], seed=cfg.seed)
    pts, _ = empirical_measure(pi)
    if cfg.format == "csv":
        rows = ["x,y"] + [f"{a!r},{b!r}" for a, b in pts.tolist()]
        return "\n".join(rows) + "\n"
    return _dump({"n": pi.n, "pi_x": str(px), "pi_y": str(py), "pi": str(pi),
                  "rank_plot": pts.tolist()})


def _reference_block(tab: patterns.PatternTable) -> dict | None:
    if tab.k == 3:
        ref_total = sum(TABLE1_COUNTS)
        ours = tab.frequencies()
        return {
            "reference": "published city table",
            "reference_counts": dict(zip(tab.as_dict(), TABLE1_COUNTS)),
            "reference_frequencies": dict(zip(tab.as_dict(), TABLE1_FREQUENCIES)),
            "reference_total": ref_total,
            "observed_total": tab.total,
            "totals_agree": ref_total == tab.total,
            "frequency_difference": {w: round(float(o - r), 6) for w, o, r in
                                     zip(tab.as_dict(), ours, TABLE1_FREQUENCIES)},
            "note": (f"the published counts sum to {ref_total}, while binomial(n,3) = {tab.total}; "
                     "the published 312 frequency .286 differs from the 0.228 used in the published "
                     "z-statistic"),
        }
    if tab.k == 2:
        return {"reference": "published concordant pairs", "reference_concordant": CONCORDANT_PAIRS,
                "observed_concordant": tab.counts[0], "pairs": tab.total,
                "agree": tab.counts[0] == CONCORDANT_PAIRS}
    return None


def cmd_patterns(cfg: RunConfig) -> str:
    p = _load_perm(cfg)
    k = cfg.options["k"]
    if not 1 <= k <= p.n:
        raise PermutonError(f"k={k} must lie in 1..n={p.n}")
    method = cfg.options["method"]
    if method == "brute":
        tab = patterns.count_patterns_bruteforce(p, k)
    elif method == "fast" or (method == "auto" and k <= 3):
        tab = patterns.count_patterns_fast(p, k)
    else:
        tab = patterns.count_patterns(p, k)
    if cfg.format == "csv":
        rows = ["pattern,count,frequency"]
        rows += [f"{w},{c},{float(c) / tab.total if tab.total else 0.0!r}" for w, c in tab.as_dict().items()]
        return "\n".join(rows) + "\n"
    out = {"k": k, "n": tab.n, "total": tab.total, "counts": tab.as_dict(),
           "frequencies": {w: float(f) for w, f in zip(tab.as_dict(), tab.frequencies())}}
    if cfg.options["reference"]:
        block = _reference_block(tab)
        if block is None:
            raise PermutonError(f"no published reference for k={k}")
        out["comparison"] = block
    return _dump(out)


def cmd_test(cfg: RunConfig) -> str:
    method = cfg.options["method"]
    t_obs = cfg.options["t_obs"]
    if method == "pattern3" and t_obs is not None and cfg.input is None and not cfg.options["perm"]:
        if cfg.options["n"] is None:
            raise UsageError("--t-obs without data needs --n")
        report = indep.pattern3_test(None, cfg.options["sigma"], t_obs=t_obs, n=cfg.options["n"])
        return _dump(report.to_json())
    p = _load_perm(cfg)
    if method == "kendall":
        report = indep.kendall_test(p)
    elif method == "pattern3":
        report = indep.pattern3_test(p, cfg.options["sigma"], t_obs=t_obs)
    elif method == "pattern3-joint":
        report = indep.pattern3_joint_test(p)
    else:
        report = indep.pattern4_test_mc(p, m=cfg.options["m"], seed=cfg.seed)
    return _dump(report.to_json())


def _law_json(law: dict) -> dict:
    return {str(k): str(v) for k, v in sorted(law.items(), key=lambda kv: str(kv[0]))}


def _perm_summary(p: Permutation) -> dict:
    out = {"final": str(p), "kendall_counts": patterns.count_patterns_fast(p, 2).as_dict()}
    if p.n >= 3:
        out["patterns3"] = patterns.count_patterns_fast(p, 3).as_dict()
    return out


def cmd_simulate(cfg: RunConfig) -> str:
    model = cfg.options["model"]
    n = cfg.options["n"]
    seed = cfg.seed
    if n < 1:
        raise UsageError("--n must be >= 1")
    out: dict = {"model": model, "n": n, "seed": seed}
    if cfg.options["exact_enumerate"]:
        enum = {"F": chains.enumerate_F, "H": chains.enumerate_H, "crp": partitions.enumerate_crp,
                "plancherel": partitions.plancherel_marginals}.get(model)
        if enum is None:
            raise UsageError(f"--exact-enumerate is not available for {model}")
        if n > 7:
            raise BudgetError("exact enumeration is limited to n <= 7")
        law = enum(n)
        out["law"] = _law_json(law)
        out["support"] = len(law)
        out["uniform"] = len(set(law.values())) == 1
        return _dump(out)

    if model in ("F", "H", "crp") or model.startswith("copula:"):
        if model == "F":
            traj = chains.simulate_F(n, seed)
        elif model == "H":
            traj = chains.simulate_H(n, seed)
        elif model == "crp":
            traj = partitions.simulate_crp(n, seed)
        else:
            traj = chains.simulate_copula_chain(copulas.copula_by_name(model.split(":", 1)[1]), n, seed)
        out["summary"] = _perm_summary(traj.final)
        if model == "crp":
            out["summary"]["cycle_type"] = str(partitions.cycle_type(traj.final)[1])
        if cfg.format == "jsonl":
            return traj.to_jsonl()
        return _dump(out)

    if model == "plancherel":
        traj = partitions.simulate_plancherel(n, seed)
        lam = traj.final
        tc = partitions.thoma_coordinates(lam, cfg.options["thoma_length"])
        out["summary"] = {"final": str(lam), "first_row_fraction": lam.parts[0] / n,
                          "thoma_alpha": list(tc.alpha), "thoma_beta": list(tc.beta)}
        if cfg.format == "jsonl":
            return traj.to_jsonl()
        return _dump(out)

    service = queues.ServiceDist.parse(cfg.options["service"])
    if model == "delay":
        data = queues.simulate_delay_model(service, n, seed)
        if cfg.format == "csv":
            return data.to_csv()
        p = queues.trace_to_permutation(data)
        out["summary"] = _perm_summary(p) if n <= 2000 else {"inversions": patterns.count_patterns_fast(p, 2).counts[1]}
        return _dump(out)

    lam = cfg.options["lam"]
    trace = queues.simulate_mg1(lam, service, n, seed, discipline=cfg.options["discipline"])
    if cfg.format == "csv":
        return trace.to_csv()
    lhs, rhs = queues.verify_inversion_bound(trace, n) if n >= 2 else (Fraction(0), Fraction(0))
    sizes = [len(r) for r in trace.busy_periods]
    out["summary"] = {
        "lambda": lam, "service": service.label(), "discipline": trace.discipline,
        "traffic_intensity": lam * service.mean,
        "customers_simulated": trace.size, "busy_periods": len(sizes),
        "busy_period_histogram": {str(k): v for k, v in sorted(Counter(sizes).items())},
        "inversion_bound": {"t21": float(lhs), "bound": float(rhs), "t21_exact": str(lhs),
                            "bound_exact": str(rhs), "holds": lhs <= rhs},
        "dynamics_ok": trace.check_dynamics(),
    }
    return _dump(out)


def cmd_young_lattice(cfg: RunConfig) -> str:
    return partitions.young_lattice_csv(cfg.options["n"], cfg.options["weighting"])


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", type=Path, help="CSV file with header x,y")
    common.add_argument("--output", type=Path, help="write here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", default="json", choices=("json", "csv", "jsonl"))

    parser = _Parser(prog="permuton", description="Permutation patterns, limits and growth chains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ranks", parents=[common], help="rank permutations of a bivariate sample")
    p.add_argument("--ties", default="strict", choices=("strict", "random"))
    p.set_defaults(func=cmd_ranks)

    p = sub.add_parser("patterns", parents=[common], help="pattern counts of length k")
    p.add_argument("--perm", help="permutation in one-line notation, e.g. 3,1,2")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--method", default="auto", choices=("auto", "brute", "fast"))
    p.add_argument("--reference", action="store_true", help="compare with the published city values")
    p.add_argument("--ties", default="strict", choices=("strict", "random"))
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("test", parents=[common], help="independence tests")
    p.add_argument("--perm")
    p.add_argument("--method", default="kendall", choices=("kendall", "pattern3", "pattern3-joint", "pattern4"))
    p.add_argument("--sigma", default="312")
    p.add_argument("--t-obs", dest="t_obs", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=1000, help="null samples for the length-4 test")
    p.add_argument("--ties", default="strict", choices=("strict", "random"))
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", parents=[common], help="growth chains and queues")
    p.add_argument("--model", required=True,
                   help="F, H, copula:<name>, crp, plancherel, mg1 or delay")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exact-enumerate", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--service", default="exp:1")
    p.add_argument("--discipline", default="lifo-pr", choices=queues.DISCIPLINES)
    p.add_argument("--thoma-length", dest="thoma_length", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("young-lattice", parents=[common], help="Young lattice edge list as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weighting", default="atom", choices=("atom", "plancherel"))
    p.set_defaults(func=cmd_young_lattice)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig.from_args(ns)
        if ns.command == "simulate":
            m = cfg.options["model"]
            if m not in MODELS and not m.startswith("copula:"):
                raise UsageError(f"unknown model {m!r}")
        _emit(cfg, ns.func(cfg))
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except BudgetError as exc:
        return _fail("budget", str(exc), EXIT_BUDGET)
    except (PermutonError, OSError) as exc:
        return _fail("data", str(exc), EXIT_DATA)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
