"""Per-field verification suite: runs the module invariants and reports pass/fail."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arith import factorize, primes_up_to
from .dirichlet_constants import (
    dirichlet_partial_sum,
    dirichlet_product,
    euler_h,
    fit_lemma_constants,
    leading_constant_c1,
    partial_sums,
    zeta,
)
from .field_catalog import FieldSpec, splitting_arrays
from .galois_image import base_data, gq_by_generation, phi_k_by_formula, phi_k_table
from .ideal_stream import equal_norm_square_sum, norm_arrays
from .variance_engine import decomposition_HJ, naive_theta_table, theta_square_sum, theta_table

BUDGETS = {
    # p_max, q_max, D_K N, equal-norm xs with tolerances, id2 x, fit xs
    "quick": dict(p_max=10_000, q_max=500, N=10_000, equal_norm=((10_000, 0.05),), id2_x=10_000,
                  fit_xs=(1_000, 3_000, 10_000, 30_000)),
    "full": dict(p_max=1_000_000, q_max=2000, N=100_000, equal_norm=((100_000, 0.05), (1_000_000, 0.02)),
                 id2_x=100_000, fit_xs=(1_000, 10_000, 100_000, 1_000_000)),
}
SPLIT_X = 3000
SPLIT_Q = 50
D_K_S = 2.5


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: str
    tolerance: str
    detail: str = ""
    runtime_s: float = 0.0


@dataclass
class VerifyReport:
    field: str
    budget: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _splitting(F: FieldSpec, cfg) -> CheckResult:
    ps = primes_up_to(cfg["p_max"])
    e, f, g, exact = splitting_arrays(F, ps)
    bad = int(np.count_nonzero(exact & (e * f * g != F.degree)))
    seen_ram = set(ps[exact & (e > 1)].tolist())
    expected = {p for p in F.ramified_primes if p <= cfg["p_max"]} - set(ps[~exact].tolist())
    ram_ok = seen_ram == expected
    if F.discriminant is not None:
        ram_ok &= set(F.ramified_primes) == set(factorize(abs(F.discriminant)) if abs(F.discriminant) > 1 else ())
    detail = f"ramified={sorted(seen_ram)}"
    return CheckResult("splitting_efg", bad == 0 and ram_ok, f"{bad} violations", "0", detail)


def _dual_phik(F: FieldSpec, cfg) -> CheckResult:
    q_max = cfg["q_max"]
    table = phi_k_table(F, q_max)
    bad = [q for q in range(1, q_max + 1) if gq_by_generation(F, q).phi_K != table[q]]
    return CheckResult("phi_K_dual_method", not bad, f"{len(bad)} mismatches", "0 (exact)",
                       f"first={bad[:5]}" if bad else f"q<={q_max}")


def _exponent_cases(F: FieldSpec, cfg) -> CheckResult:
    base = base_data(F)
    rows, bad = [], []
    for ell, loc in base.local.items():
        for alpha in range(1, loc.b + 3):
            q = ell**alpha
            if q > 100_000:
                break
            gen = gq_by_generation(F, q).phi_K
            form = phi_k_by_formula(F, q, base)
            rows.append(f"{ell}^{alpha}:{'>' if alpha > loc.b else '<='}b")
            if gen != form:
                bad.append(q)
        if not loc.constant_below_b:
            rows.append(f"phi_K not constant on {ell}^1..{ell}^{loc.b}")
    return CheckResult("exponent_vs_b", not bad, f"{len(bad)} mismatches", "0 (exact)", "; ".join(rows))


def _h1(F: FieldSpec, cfg) -> CheckResult:
    err = abs(euler_h(1.0) * zeta(6.0) / zeta(3.0) - 1.0)
    return CheckResult("h1_identity", err <= 1e-8, f"{err:.3e}", "1e-8")


def _dk_factorization(F: FieldSpec, cfg) -> CheckResult:
    N = cfg["N"]
    direct = dirichlet_partial_sum(F, D_K_S, N)
    product = dirichlet_product(F, D_K_S)
    err = abs(direct - product)
    tol = 2.0 * N**-1.5
    # the omitted tail sum_{n>N} n^(1-s)/phi_K(n) ~ c1 N^(1-s)/(s-1)
    tail = leading_constant_c1(F) * N ** (1.0 - D_K_S) / (D_K_S - 1.0)
    return CheckResult("D_K_factorization", err <= tol, f"{err:.3e}", f"{tol:.3e}",
                       f"tail asymptotic {tail:.3e}")


def _equal_norm(F: FieldSpec, cfg) -> CheckResult:
    parts, ok = [], True
    for x, tol in cfg["equal_norm"]:
        ratio = equal_norm_square_sum(F, x) / (F.degree * (x * math.log(x) - x))
        ok &= abs(ratio - 1.0) <= tol
        parts.append(f"x={x}: {ratio:.5f} (tol {tol})")
    return CheckResult("equal_norm_ratio", ok, "; ".join(parts), "see measured", f"[K:Q]={F.degree}")


def _fits(F: FieldSpec, cfg) -> CheckResult:
    c1 = leading_constant_c1(F)
    x = cfg["id2_x"]
    slope = (partial_sums(F, 2 * x)[1] - partial_sums(F, x)[1]) / math.log(2.0)
    fit = fit_lemma_constants(F, cfg["fit_xs"], c1=c1)
    ok = abs(slope - c1) <= 1e-3 and not fit.flagged
    return CheckResult(
        "id1_id2_fits", ok, f"id2 slope-c1={slope - c1:.3e}", "1e-3",
        f"c2={fit.c2:.6f} c3={fit.c3:.5f} c4={fit.c4:.5f} rms1={fit.id1_residual:.1e} rms2={fit.id2_residual:.1e}",
    )


def _theta_split(F: FieldSpec, cfg) -> CheckResult:
    ev = norm_arrays(F, SPLIT_X)
    base = base_data(F)
    worst = 0.0
    for q in range(1, SPLIT_Q + 1):
        lhs = theta_square_sum(F, SPLIT_X, q, ev, base)
        H, J = decomposition_HJ(F, SPLIT_X, q - 1, q, ev)
        worst = max(worst, abs(lhs - H - J) / lhs)
    return CheckResult("theta_square_split", worst <= 1e-9, f"{worst:.3e}", "1e-9", f"x={SPLIT_X}, q<={SPLIT_Q}")


def _oracle(F: FieldSpec, cfg) -> CheckResult:
    ev = norm_arrays(F, SPLIT_X)
    base = base_data(F)
    worst = 0.0
    for q in range(1, SPLIT_Q + 1):
        fast = theta_table(F, SPLIT_X, q, ev, base).values
        slow = naive_theta_table(F, SPLIT_X, q)
        if set(fast) != set(slow):
            return CheckResult("brute_force_oracle", False, f"class sets differ at q={q}", "exact")
        for a, v in slow.items():
            worst = max(worst, abs(fast[a] - v) / max(abs(v), 1.0))
    return CheckResult("brute_force_oracle", worst <= 1e-9, f"{worst:.3e}", "1e-9", f"x={SPLIT_X}, q<={SPLIT_Q}")


CHECKS: tuple[Callable, ...] = (
    _splitting, _dual_phik, _exponent_cases, _h1, _dk_factorization, _equal_norm, _fits, _theta_split, _oracle,
)


def verify_suite(F: FieldSpec, budget: str = "quick") -> VerifyReport:
    """Run every check in order; a failing or crashing check becomes a report entry."""
    if budget not in BUDGETS:
        raise ValueError(f"budget must be one of {sorted(BUDGETS)}")
    cfg = BUDGETS[budget]
    report = VerifyReport(str(F), budget)
    for check in CHECKS:
        t0 = time.perf_counter()
        try:
            res = check(F, cfg)
        except Exception as exc:  # noqa: BLE001 - failures are report entries
            res = CheckResult(check.__name__.lstrip("_"), False, "error", "", f"{type(exc).__name__}: {exc}")
        res.runtime_s = time.perf_counter() - t0
        report.checks.append(res)
    return report
