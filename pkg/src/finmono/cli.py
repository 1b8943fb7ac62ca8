"""Command-line entry point.

Exit codes: 0 pass/complete, 1 criterion failure, 2 usage error, 3 budget refusal.
Output is newline-delimited JSON (default) or CSV; the first record is a
``meta`` record echoing the configuration.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from typing import Any, Iterable, TextIO

from . import __version__
from .criteria import (
    BudgetExceededError,
    CriterionReport,
    InvalidSpecError,
    SystemSpec,
    Twist,
    check_digit_criterion,
    check_digit_criterion_A,
    check_V_criterion,
    gauss_criterion,
    mellin_oracle,
    merge_reports,
)
from .finite_field import build_field, parse_field
from .proofcheck import CASE_LEMMAS, verify_base_cases, verify_case_lemma, verify_induction_assembly
from .search import search
from .traces import CO3_VARIANTS, co3_table, trace_table

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_BUDGET = 3**16
CACHE_ENV = "FINMONO_FIELD_CACHE"


@dataclass
class RunConfig:
    command: str
    p: int | None = None
    D: int | None = None
    D_min: int | None = None
    D_max: int | None = None
    d: list[int] = dc_field(default_factory=lambda: [1])
    twist: str = "quadratic"
    f_min: int = 1
    f_max: int = 1
    criterion: str = "digit"
    A: str = "0"
    field: str | None = None
    variant: str | None = None
    s0: int = 0
    t0: int = 0
    induction: list[int] = dc_field(default_factory=lambda: [5, 6])
    sample: int | None = None
    seed: int = 20190923
    cache_dir: str = "./.field-cache"
    jobs: int = 1
    format: str = "json"
    witness_cap: int = 100
    budget: int = DEFAULT_BUDGET
    force: bool = False

    def spec(self) -> SystemSpec:
        if self.p is None or self.D is None:
            raise InvalidSpecError("--p and --D are required")
        return SystemSpec(self.p, self.D, tuple(self.d), Twist(self.twist))


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 2 is contractual; keep argparse's message
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finmono", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"finmono {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp: argparse.ArgumentParser, fmt: str = "json") -> None:
        sp.add_argument("--cache-dir", default=None, help=f"field table cache (env {CACHE_ENV}, default ./.field-cache)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--format", choices=["json", "csv"], default=fmt)
        sp.add_argument("--witness-cap", type=int, default=100)
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum inner evaluations")
        sp.add_argument("--force", action="store_true", help="ignore the budget")
        sp.add_argument("--seed", type=int, default=20190923)

    def system(sp: argparse.ArgumentParser, need_D: bool = True, need_p: bool = True) -> None:
        sp.add_argument("--p", type=int, required=need_p)
        if need_D:
            sp.add_argument("--D", type=int, required=True)
        sp.add_argument("--d", type=_int_list, default=[1], help="comma-separated d_1,...,d_r (d_1 = 1)")
        sp.add_argument("--twist", choices=[t.value for t in Twist], default="quadratic")

    sp = sub.add_parser("check", help="run a finite-monodromy criterion for f in [f-min, f-max]")
    system(sp)
    sp.add_argument("--f-min", type=int, default=1)
    sp.add_argument("--f-max", type=int, required=True)
    sp.add_argument("--criterion", choices=["digit", "A", "V", "gauss"], default="digit")
    sp.add_argument("--A", default="0", help="slack for --criterion A (integer or fraction)")
    common(sp)

    sp = sub.add_parser("search", help="scan D for candidates passing all f <= f-max (r = 1)")
    system(sp, need_D=False)
    sp.add_argument("--D-min", type=int, default=2)
    sp.add_argument("--D-max", type=int, required=True)
    sp.add_argument("--f-max", type=int, required=True)
    common(sp)

    sp = sub.add_parser("traces", help="tabulate trace functions over a field")
    system(sp, need_D=False, need_p=False)
    sp.add_argument("--D", type=int, default=None)
    sp.add_argument("--field", required=True, help='field as "p^f"')
    sp.add_argument("--variant", choices=CO3_VARIANTS, default=None, help="Co3 family variant (p=3, D=23)")
    sp.add_argument("--s0", type=int, default=0, help="frozen s (element code) for variants iv, vi")
    sp.add_argument("--t0", type=int, default=0, help="frozen t (element code) for variant vi")
    common(sp, fmt="csv")

    sp = sub.add_parser("prove", help="verify the base-3 inequality: base cases, lemmas, induction")
    sp.add_argument("--f-max", type=int, default=4, help="largest base case")
    sp.add_argument("--induction", type=_int_list, default=[5, 6], help="f values for the inductive replay")
    sp.add_argument("--sample", type=int, default=None, help="sample size when 9^f exceeds the budget")
    common(sp)

    sp = sub.add_parser("mellin", help="compare brute-force Mellin transforms with Gauss-sum closed forms")
    system(sp)
    sp.add_argument("--field", required=True)
    common(sp)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cache = ns.cache_dir or os.environ.get(CACHE_ENV) or "./.field-cache"
    cfg = RunConfig(
        command=ns.command,
        cache_dir=cache,
        jobs=ns.jobs,
        format=ns.format,
        witness_cap=ns.witness_cap,
        budget=ns.budget,
        force=ns.force,
        seed=ns.seed,
    )
    for name in ("p", "D", "D_min", "D_max", "d", "twist", "f_min", "f_max", "criterion", "A",
                 "field", "variant", "s0", "t0", "induction", "sample"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


# -- output ---------------------------------------------------------------------

class Emitter:
    def __init__(self, out: TextIO, fmt: str) -> None:
        self.out = out
        self.fmt = fmt
        self._csv_header: list[str] | None = None

    def meta(self, cfg: RunConfig) -> None:
        rec = {"record": "meta", "version": __version__, "config": asdict(cfg)}
        if self.fmt == "json":
            self.emit(rec)
        else:
            self.out.write("# " + json.dumps(rec, sort_keys=True) + "\n")

    def emit(self, rec: dict[str, Any]) -> None:
        if self.fmt == "json":
            self.out.write(json.dumps(rec) + "\n")
            return
        if self._csv_header is None:
            self._csv_header = list(rec)
            csv.writer(self.out, lineterminator="\n").writerow(self._csv_header)
        row = [rec.get(k) for k in self._csv_header]
        row = [json.dumps(v) if isinstance(v, (dict, list)) else v for v in row]
        csv.writer(self.out, lineterminator="\n").writerow(row)


def _budget(cfg: RunConfig) -> int | None:
    return None if cfg.force else cfg.budget


def _emit_report(em: Emitter, report: CriterionReport) -> None:
    d = report.to_dict()
    wits = d.pop("witnesses")
    if em.fmt == "json":
        em.emit(d)
        for w in wits:
            em.emit({"record": "witness", **w})
    else:
        em.emit({"record": "verdict", "criterion": d["criterion"], "f": ",".join(map(str, d["f_checked"])),
                 "verdict": d["verdict"], "violations": d["violations"], "x": "", "lhs": "", "rhs": ""})
        for w in wits:
            em.emit({"record": "witness", "criterion": d["criterion"], "f": w["f"], "verdict": "",
                     "violations": "", "x": " ".join(map(str, w["x"])), "lhs": w["lhs"], "rhs": w["rhs"]})


def _run_check(cfg: RunConfig, em: Emitter) -> int:
    spec = cfg.spec()
    budget = _budget(cfg)
    reports = []
    for f in range(cfg.f_min, cfg.f_max + 1):
        if cfg.criterion == "digit":
            rep = check_digit_criterion(spec, f, cap=cfg.witness_cap, jobs=cfg.jobs, budget=budget)
        elif cfg.criterion == "A":
            from fractions import Fraction

            rep = check_digit_criterion_A(spec, f, Fraction(cfg.A), cap=cfg.witness_cap, jobs=cfg.jobs, budget=budget)
        elif cfg.criterion == "V":
            rep = check_V_criterion(spec, f, cap=cfg.witness_cap, budget=budget)
        else:
            K = build_field(spec.p, f, cache_dir=cfg.cache_dir)
            rep = gauss_criterion(spec, K, cap=cfg.witness_cap, budget=budget)
        reports.append(rep)
    merged = merge_reports(reports, cap=cfg.witness_cap)
    _emit_report(em, merged)
    return EXIT_OK if merged.passed else EXIT_FAIL


def _run_search(cfg: RunConfig, em: Emitter) -> int:
    assert cfg.p is not None and cfg.D_max is not None
    worst = (cfg.p**cfg.f_max - 1) * max(0, cfg.D_max - (cfg.D_min or 2) + 1)
    if not cfg.force and worst > cfg.budget:
        raise BudgetExceededError(f"search needs up to {worst} evaluations, budget is {cfg.budget}")
    survivors = search(cfg.p, range(cfg.D_min or 2, cfg.D_max + 1), cfg.twist, cfg.f_max, jobs=cfg.jobs)
    for s in survivors:
        em.emit(s.to_dict())
    return EXIT_OK


def _run_traces(cfg: RunConfig, em: Emitter, out: TextIO) -> int:
    assert cfg.field is not None
    p, f = parse_field(cfg.field)
    K = build_field(p, f, cache_dir=cfg.cache_dir)
    budget = _budget(cfg)
    if cfg.variant:
        table = co3_table(K, cfg.variant, s0=cfg.s0, t0=cfg.t0, budget=budget)
    else:
        spec = cfg.spec()
        if spec.p != p:
            raise InvalidSpecError(f"--field characteristic {p} differs from --p {spec.p}")
        table = trace_table(spec, K, budget=budget)
    if cfg.format == "csv":
        table.write_csv(out)
    else:
        for key, val in table.rows():
            em.emit({"record": "trace_row", "params": list(key), "value": val if isinstance(val, int) else str(val)})
        for key, why in table.failures:
            em.emit({"record": "trace_row", "params": list(key), "value": why})
        em.emit({"record": "verdict", "support": sorted(table.support()), "all_integral": table.all_rational(),
                 "entries": len(table.entries) + len(table.failures)})
    return EXIT_OK if not table.failures else EXIT_FAIL


def _run_prove(cfg: RunConfig, em: Emitter) -> int:
    verdicts = verify_base_cases(cfg.f_max)
    verdicts += [verify_case_lemma(lemma) for lemma in CASE_LEMMAS]
    for f in cfg.induction:
        verdicts.append(
            verify_induction_assembly(f, cfg.sample, budget=cfg.budget if not cfg.force else 9**f, seed=cfg.seed)
        )
    for v in verdicts:
        em.emit(v.to_dict())
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def _run_mellin(cfg: RunConfig, em: Emitter) -> int:
    spec = cfg.spec()
    assert cfg.field is not None
    p, f = parse_field(cfg.field)
    if p != spec.p:
        raise InvalidSpecError(f"--field characteristic {p} differs from --p {spec.p}")
    K = build_field(p, f, cache_dir=cfg.cache_dir)
    n = K.q - 1
    total = n ** (spec.r + 1)
    if not cfg.force and total * n ** (spec.r + 1) > cfg.budget:
        raise BudgetExceededError(f"Mellin comparison needs {total} transforms, too many for the budget")
    mismatches = 0
    for js in itertools.product(range(n), repeat=spec.r + 1):
        direct, closed = mellin_oracle(spec, K, js)
        if direct != closed:
            mismatches += 1
            if mismatches <= cfg.witness_cap:
                em.emit({"record": "witness", "characters": list(js), "direct": str(direct), "closed_form": str(closed)})
    em.emit({"record": "verdict", "criterion": "mellin", "spec": spec.to_dict(), "field": cfg.field,
             "tuples_checked": total, "mismatches": mismatches, "verdict": "FAIL" if mismatches else "PASS"})
    return EXIT_FAIL if mismatches else EXIT_OK


def run(cfg: RunConfig, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    em = Emitter(out, cfg.format)
    try:
        if cfg.command in ("check", "mellin") or (cfg.command == "traces" and not cfg.variant):
            cfg.spec()  # validate before the meta record is written
        if not (cfg.command == "traces" and cfg.format == "csv"):
            em.meta(cfg)  # trace CSV carries its own header comment
        if cfg.command == "check":
            return _run_check(cfg, em)
        if cfg.command == "search":
            return _run_search(cfg, em)
        if cfg.command == "traces":
            return _run_traces(cfg, em, out)
        if cfg.command == "prove":
            return _run_prove(cfg, em)
        if cfg.command == "mellin":
            return _run_mellin(cfg, em)
        err.write(f"unknown command {cfg.command}\n")
        return EXIT_USAGE
    except BudgetExceededError as exc:
        err.write(f"refused: {exc} (use --force or raise --budget)\n")
        return EXIT_BUDGET
    except (InvalidSpecError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(None if argv is None else list(argv))
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
