"""Command-line front end: experiments over fields and (x, Q) grids with CSV output.

Examples
--------
  bdh-variance field-info --field "Q(i)"
  bdh-variance phik --field quad:-1 --q-max 20 --out phik.csv
  bdh-variance constants --field Q --field cyc:5 --xs 1000,10000,100000,1000000
  bdh-variance variance --field Q --x 100000 --q-grid geometric:4 --out var.csv
  bdh-variance regress --in var.csv
  bdh-variance verify --field Q --budget quick
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .arith import euler_phi
from .dirichlet_constants import DEFAULT_XS, constant_set
from .field_catalog import build_field
from .galois_image import base_data, gq_by_generation, is_abelian, phi_k_by_formula
from .ideal_stream import norm_arrays
from .variance_engine import (
    decomposition_HJ,
    geometric_grid,
    predicted_range,
    regress_slope,
    variance_profile,
)
from .verify import verify_suite

SUBCOMMANDS = ("field-info", "phik", "constants", "variance", "verify", "regress")

SCHEMAS = {
    "field-info": ("field", "kind", "degree", "m_K", "ramified", "discriminant", "abelian", "index_mK", "error"),
    "phik": ("field", "q", "phi", "phi_K", "index", "method_agree", "error"),
    "constants": ("field", "c1", "c2", "c3", "c4", "C1", "C2", "ratio_mK", "h1", "c2_err", "c3_err", "c4_err", "error"),
    "variance": ("field", "x", "Q1", "Q2", "S", "H_opt", "J_opt", "predicted_S", "form", "residual", "runtime_s", "error"),
    "verify": ("field", "budget", "check", "passed", "measured", "tolerance", "detail", "runtime_s"),
    "regress": ("field", "x", "slope", "intercept", "r2", "n", "error"),
}

# H/J are filled in when the pairwise J sum stays below this many pairs
HJ_AUTO_PAIRS = 5_000_000


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    fields: list[str] = field(default_factory=list)
    xs: list[int] = field(default_factory=list)
    q_rule: str = "full"  # geometric | list | full
    q_k: int = 4
    q_list: list[int] = field(default_factory=list)
    q_max: int = 100
    budget: str = "quick"
    threads: int = 1
    out: Optional[str] = None
    infile: Optional[str] = None
    sequential: bool = False
    gnuplot: bool = False

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.subcommand == "regress":
            if not self.infile:
                raise ConfigError("regress needs --in")
            return
        if not self.fields:
            raise ConfigError("at least one --field is required")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.subcommand == "phik" and self.q_max < 1:
            raise ConfigError("--q-max must be >= 1")
        if self.subcommand == "constants" and 0 < len(self.xs) < 4:
            raise ConfigError("constants needs at least 4 values in --xs")
        if self.subcommand == "variance":
            if not self.xs:
                raise ConfigError("variance needs --x")
            if self.q_rule not in ("geometric", "list", "full"):
                raise ConfigError(f"unknown Q grid rule {self.q_rule!r}")
            if self.q_rule == "list" and not self.q_list:
                raise ConfigError("--q-list is empty")
            if self.q_rule == "geometric" and self.q_k < 1:
                raise ConfigError("geometric grid needs k >= 1")
        if any(x < 2 for x in self.xs):
            raise ConfigError("all x must be >= 2")
        if self.q_list and (min(self.q_list) < 1 or max(self.q_list) > min(self.xs or [0])):
            raise ConfigError("Q entries must lie in [1, min x]")
        if self.budget not in ("quick", "full"):
            raise ConfigError("budget must be quick or full")

    def q_values(self, x: int) -> list[int]:
        if self.q_rule == "full":
            return [x]
        if self.q_rule == "geometric":
            return geometric_grid(x, self.q_k)
        return sorted(set(self.q_list))


# ---------------------------------------------------------------------------
# per-subcommand runners; each returns schema-complete rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _blank(schema: str, **known) -> dict:
    row = {k: "" for k in SCHEMAS[schema]}
    row.update({k: _fmt(v) for k, v in known.items()})
    return row


def _field_info(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for desc in cfg.fields:
        try:
            F = build_field(desc)
            base = base_data(F)
            rows.append(_blank(
                "field-info", field=str(F), kind=F.kind, degree=F.degree, m_K=F.m_K,
                ramified=" ".join(map(str, sorted(F.ramified_primes))), discriminant=F.discriminant,
                abelian=is_abelian(F, base), index_mK=base.index_mK,
            ))
        except Exception as exc:
            rows.append(_blank("field-info", field=desc, error=f"{type(exc).__name__}: {exc}"))
    return rows


def _phik(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for desc in cfg.fields:
        try:
            F = build_field(desc)
            base = base_data(F)
        except Exception as exc:
            rows.append(_blank("phik", field=desc, error=f"{type(exc).__name__}: {exc}"))
            continue
        for q in range(1, cfg.q_max + 1):
            try:
                formula = phi_k_by_formula(F, q, base)
                gen = gq_by_generation(F, q).phi_K
                phi = euler_phi(q)
                rows.append(_blank("phik", field=str(F), q=q, phi=phi, phi_K=formula,
                                   index=phi // formula, method_agree=formula == gen))
            except Exception as exc:
                rows.append(_blank("phik", field=str(F), q=q, error=f"{type(exc).__name__}: {exc}"))
    return rows


def _constants(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for desc in cfg.fields:
        try:
            F = build_field(desc)
            cs = constant_set(F, cfg.xs or DEFAULT_XS, with_closed_forms=False)
            rows.append(_blank(
                "constants", field=cs.field, c1=cs.c1, c2=cs.c2, c3=cs.c3, c4=cs.c4, C1=cs.C1, C2=cs.C2,
                ratio_mK=cs.ratio_mK, h1=cs.h1, c2_err=cs.c2_err, c3_err=cs.c3_err, c4_err=cs.c4_err,
            ))
        except Exception as exc:
            rows.append(_blank("constants", field=desc, error=f"{type(exc).__name__}: {exc}"))
    return rows


def _variance(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    threads = 1 if cfg.sequential else cfg.threads
    for desc in cfg.fields:
        try:
            F = build_field(desc)
            cs = constant_set(F)
        except Exception as exc:
            rows.append(_blank("variance", field=desc, error=f"{type(exc).__name__}: {exc}"))
            continue
        for x in sorted(set(cfg.xs)):
            Qs = cfg.q_values(x)
            try:
                t0 = time.perf_counter()
                events = norm_arrays(F, x)
                prof = variance_profile(F, x, 0, max(Qs), threads, events)
                elapsed = time.perf_counter() - t0
            except Exception as exc:
                for Q in Qs:
                    rows.append(_blank("variance", field=str(F), x=x, Q1=0, Q2=Q, error=f"{type(exc).__name__}: {exc}"))
                continue
            small = len(events) * (len(events) - 1) // 2 <= HJ_AUTO_PAIRS
            for Q in Qs:
                try:
                    t1 = time.perf_counter()
                    S = prof.S(0, Q)
                    H = J = None
                    if small:
                        H, J = decomposition_HJ(F, x, 0, Q, events)
                    pred = predicted_range(F, x, 0, Q, cs)
                    runtime = elapsed + time.perf_counter() - t1
                    rows.append(_blank(
                        "variance", field=str(F), x=x, Q1=0, Q2=Q, S=S, H_opt=H, J_opt=J,
                        predicted_S=pred.value, form=pred.form, residual=S - pred.value,
                        # runtimes would break byte-identical sequential output
                        runtime_s=None if cfg.sequential else round(runtime, 3),
                    ))
                except Exception as exc:
                    rows.append(_blank("variance", field=str(F), x=x, Q1=0, Q2=Q, error=f"{type(exc).__name__}: {exc}"))
            print(f"[variance] {F} x={x} done in {elapsed:.1f}s", file=sys.stderr)
    return rows


def _verify(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for desc in cfg.fields:
        try:
            F = build_field(desc)
        except Exception as exc:
            rows.append(_blank("verify", field=desc, budget=cfg.budget, check="build_field", passed=False,
                               detail=f"{type(exc).__name__}: {exc}"))
            continue
        report = verify_suite(F, cfg.budget)
        for c in report.checks:
            rows.append(_blank(
                "verify", field=report.field, budget=cfg.budget, check=c.name, passed=c.passed,
                measured=c.measured, tolerance=c.tolerance, detail=c.detail,
                runtime_s=None if cfg.sequential else round(c.runtime_s, 3),
            ))
    return rows


def _regress(cfg: ExperimentConfig) -> list[dict]:
    groups: dict[tuple[str, int], dict[int, float]] = defaultdict(dict)
    with open(cfg.infile, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec.get("error") or rec.get("Q1", "0") not in ("0", "") or not rec.get("S"):
                continue
            groups[(rec["field"], int(rec["x"]))][int(rec["Q2"])] = float(rec["S"])
    rows = []
    for (name, x), pts in sorted(groups.items()):
        Qs = sorted(pts)
        try:
            slope, intercept, r2 = regress_slope(Qs, [pts[q] for q in Qs], x)
            rows.append(_blank("regress", field=name, x=x, slope=slope, intercept=intercept, r2=r2, n=len(Qs)))
        except Exception as exc:
            rows.append(_blank("regress", field=name, x=x, n=len(Qs), error=f"{type(exc).__name__}: {exc}"))
    return rows


RUNNERS = {
    "field-info": _field_info,
    "phik": _phik,
    "constants": _constants,
    "variance": _variance,
    "verify": _verify,
    "regress": _regress,
}


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Run a validated config; rows come back in (field, x, Q) order and are written atomically."""
    config.validate()
    # runners walk fields, x and Q in a fixed order; workers only split the q-loop
    rows = RUNNERS[config.subcommand](config)
    if config.out:
        write_csv(config.out, SCHEMAS[config.subcommand], rows)
        if config.gnuplot:
            write_gnuplot(config.out + ".dat", config.subcommand, rows)
    return rows


def write_csv(path: str, columns, rows: list[dict]) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_gnuplot(path: str, subcommand: str, rows: list[dict]) -> None:
    """Two-column blocks, one per (field, x), separated by blank lines."""
    blocks: dict[tuple, list[str]] = defaultdict(list)
    for r in rows:
        if r.get("error"):
            continue
        if subcommand == "variance" and r["S"]:
            x, Q = int(r["x"]), int(r["Q2"])
            blocks[(r["field"], x)].append(f"{math.log(Q)!r} {float(r['S']) / (x * Q)!r}")
        elif subcommand == "phik":
            blocks[(r["field"],)].append(f"{r['q']} {r['phi_K']}")
    text = "\n\n".join(f"# {' '.join(map(str, key))}\n" + "\n".join(lines) for key, lines in blocks.items())
    _atomic_write(path, text + "\n")


# ---------------------------------------------------------------------------
# argument handling


def read_config_file(path: str) -> dict[str, list[str]]:
    """key = value lines; '#' starts a comment; repeated keys accumulate."""
    out: dict[str, list[str]] = defaultdict(list)
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{n}: expected key = value")
            out[key.strip().replace("_", "-")].append(value.strip())
    return dict(out)


def _ints(text: str) -> list[int]:
    return [int(float(t)) for t in text.replace(" ", "").split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bdh-variance", description="Variance of prime ideals in progressions.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--field", action="append", help="field descriptor (repeatable)")
    ap.add_argument("--x", help="comma-separated x values")
    ap.add_argument("--xs", help="comma-separated fitting points for constants")
    grid = ap.add_mutually_exclusive_group()
    grid.add_argument("--q-grid", help="geometric:k")
    grid.add_argument("--q-list", help="comma-separated Q values")
    grid.add_argument("--q-full", action="store_true", default=None)
    ap.add_argument("--q-max", type=int)
    ap.add_argument("--budget", choices=("quick", "full"))
    ap.add_argument("--in", dest="infile")
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int)
    ap.add_argument("--sequential", action="store_true", default=None)
    ap.add_argument("--gnuplot", action="store_true", default=None)
    ap.add_argument("--config", help="key = value file; command-line flags win")
    return ap


def config_from_args(argv: Optional[list[str]] = None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    file_vals = read_config_file(args.config) if args.config else {}

    def pick(flag: str, value):
        if value is not None:
            return value
        vals = file_vals.get(flag)
        return vals[-1] if vals else None

    def truthy(v) -> bool:
        return v is True or (isinstance(v, str) and v.lower() in ("1", "true", "yes", "on"))

    cfg = ExperimentConfig(args.subcommand)
    cfg.fields = args.field if args.field else file_vals.get("field", [])
    xs = pick("x", args.x) if args.subcommand != "constants" else pick("xs", args.xs)
    cfg.xs = _ints(xs) if xs else []
    q_grid, q_list, q_full = args.q_grid, args.q_list, args.q_full
    if q_grid is None and q_list is None and q_full is None:
        q_grid, q_list, q_full = pick("q-grid", None), pick("q-list", None), pick("q-full", None)
    if q_grid:
        kind, _, k = q_grid.partition(":")
        if kind != "geometric" or not k.isdigit():
            raise ConfigError(f"bad --q-grid {q_grid!r}; expected geometric:k")
        cfg.q_rule, cfg.q_k = "geometric", int(k)
    elif q_list:
        cfg.q_rule, cfg.q_list = "list", _ints(q_list)
    else:
        cfg.q_rule = "full"
    q_max = pick("q-max", args.q_max)
    cfg.q_max = int(q_max) if q_max is not None else 100
    cfg.budget = pick("budget", args.budget) or "quick"
    cfg.infile = pick("in", args.infile)
    cfg.out = pick("out", args.out)
    threads = pick("threads", args.threads)
    cfg.threads = int(threads) if threads is not None else 1
    cfg.sequential = truthy(pick("sequential", args.sequential))
    cfg.gnuplot = truthy(pick("gnuplot", args.gnuplot))
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
        rows = run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out:
        writer = csv.DictWriter(sys.stdout, fieldnames=list(SCHEMAS[cfg.subcommand]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if cfg.subcommand == "verify":
        return 0 if all(r["passed"] == "true" for r in rows) else 1
    return 1 if any(r.get("error") for r in rows) else 0


if __name__ == "__main__":
    raise SystemExit(main())
