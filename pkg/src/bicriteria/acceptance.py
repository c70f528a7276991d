"""Acceptance suite: the guarantee of every solver checked against brute-force
ground truth on small instances.

Each criterion returns a ``Criterion`` with the measured and required values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import constraints as C
from . import continuous as cs
from . import discrete as ds
from . import functions as fn
from . import harness
from . import rounding as rd
from .core import indicator
from .multilinear import MultilinearExtension
from .oracle import brute_opt, verify_monotone, verify_submodular


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    measured: str
    required: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: measured {self.measured}; required {self.required} ({self.seconds:.1f}s)"


# ---------------------------------------------------------------- corpora


def _knapsack(n: int, rng: np.random.Generator, frac: float = 0.3) -> C.Knapsack:
    prices = np.round(0.2 + 0.8 * rng.random(n), 3)
    budget = round(float(max(prices.max(), frac * prices.sum())), 3)
    return C.Knapsack(prices, budget)


def monotone_corpus(seed: int = 0):
    """50 coverage and 20 modular objectives, alternating cardinality and
    knapsack constraints."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(70):
        n = int(rng.integers(8, 15))
        if j < 50:
            f, _ = fn.random_coverage(n, int(rng.integers(n, 2 * n)), seed * 1000 + j).build()
        else:
            f, _ = fn.Modular(tuple(float(w) for w in np.round(rng.random(n), 4))).build()
        con = C.Cardinality(n, int(rng.integers(1, 4))) if j % 2 == 0 else _knapsack(n, rng)
        out.append((f, con))
    return out


def _matroid(n: int, j: int, rng: np.random.Generator) -> C.Matroid:
    kind = j % 3
    if kind == 0:
        return C.UniformMatroid(n, int(rng.integers(1, 4)))
    if kind == 1:
        cut = sorted(int(c) for c in rng.choice(np.arange(1, n), size=2, replace=False))
        parts = [range(0, cut[0]), range(cut[0], cut[1]), range(cut[1], n)]
        return C.PartitionMatroid(n, parts, [int(rng.integers(1, 3)) for _ in parts])
    v = max(3, n // 2 + 1)
    edges = [tuple(int(a) for a in rng.choice(v, size=2, replace=False)) for _ in range(n)]
    return C.GraphicMatroid(v, edges)


def matroid_corpus(seed: int = 1):
    rng = np.random.default_rng(seed)
    out = []
    for j, (f, _) in enumerate(monotone_corpus(seed)):
        out.append((f, _matroid(f.n, j, rng)))
    return out


def nonmonotone_corpus(seed: int = 2, count: int = 30):
    """Directed cuts, undirected cuts and coverage objectives, cycling through
    cardinality, knapsack and matroid constraints."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        n = int(rng.integers(6, 10))
        kind = j % 3
        if kind == 0:
            f, _ = fn.random_graph(n, 0.4, seed * 100 + j, directed=True).build()
        elif kind == 1:
            f, _ = fn.random_graph(n, 0.4, seed * 100 + j).build()
        else:
            f, _ = fn.random_coverage(n, n + 2, seed * 100 + j).build()
        ckind = (j // 3) % 3
        if ckind == 0:
            con = C.Cardinality(n, int(rng.integers(1, 3)))
        elif ckind == 1:
            con = _knapsack(n, rng, 0.25)
        else:
            con = _matroid(n, j % 2, rng)
        out.append((f, con))
    return out


def cut_corpus(seed: int = 3, count: int = 20):
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        n = int(rng.integers(6, 12))
        f, _ = fn.random_graph(n, 0.4, seed * 100 + j).build()
        con = C.Cardinality(n, int(rng.integers(1, 4))) if j % 2 == 0 else _knapsack(n, rng, 0.25)
        out.append((f, con))
    return out


def _timed(number: int, name: str, budget: float, body: Callable[[], tuple[bool, str, str]]) -> Criterion:
    start = time.perf_counter()
    ok, measured, required = body()
    secs = time.perf_counter() - start
    if secs > budget:
        ok = False
        measured += f"; runtime {secs:.1f}s over {budget:.0f}s"
    return Criterion(number, name, ok, measured, required, secs)


# ---------------------------------------------------------------- criteria


def criterion_1() -> Criterion:
    def body():
        worst_ratio, worst_cost, violations, runs = math.inf, 0.0, 0, 0
        for f, con in monotone_corpus():
            opt = brute_opt(f, con)[1]
            for eps in (0.5, 0.25, 0.1):
                out = ds.density_greedy_monotone(f, con, eps)
                runs += 1
                k = C.as_knapsack(con)
                cost = k.cost(out.solution)
                ok = out.value >= (1 - eps) * opt and cost <= (1 + math.log(1 / eps)) * k.budget
                if isinstance(con, C.Cardinality):
                    ok &= len(out.solution) <= con.k * math.ceil(math.log(1 / eps))
                violations += not ok
                if opt > 0:
                    worst_ratio = min(worst_ratio, out.value / opt / (1 - eps))
                worst_cost = max(worst_cost, cost / k.budget / (1 + math.log(1 / eps)))
        return (violations == 0, f"{violations} violations in {runs} runs; min value/((1-eps)OPT) = {worst_ratio:.4f}; "
                f"max cost/bound = {worst_cost:.4f}", "value >= (1-eps)OPT, cost <= (1+ln 1/eps)B, |S| <= B ceil(ln 1/eps)")

    return _timed(1, "density greedy (monotone)", 30, body)


def criterion_2() -> Criterion:
    def body():
        violations, runs, worst = 0, 0, math.inf
        for f, m in matroid_corpus():
            opt = brute_opt(f, m)[1]
            for eps in (0.5, 0.25, 0.1):
                out = ds.iterative_matroid_greedy(f, m, eps)
                runs += 1
                rounds = math.ceil(math.log2(1 / eps) - 1e-12)
                ok = out.value >= (1 - eps) * opt and C.matroid_union_independent(m, rounds, out.solution)
                violations += not ok
                if opt > 0:
                    worst = min(worst, out.value / opt / (1 - eps))
        return (violations == 0, f"{violations} violations in {runs} runs; min value/((1-eps)OPT) = {worst:.4f}",
                "value >= (1-eps)OPT and union of ceil(log2 1/eps) independent sets")

    return _timed(2, "iterative matroid greedy", 30, body)


def _comb_run(f, con, eps, seed, exact_limit):
    if isinstance(con, C.Cardinality):
        return ds.warmup_cardinality(f, con.k, eps, seed, exact_limit=exact_limit)
    return ds.combinatorial_general(f, con, eps, seed, exact_limit=exact_limit)


def criterion_3(seeds: int = 200) -> Criterion:
    def body():
        hard, soft, worst = 0, 0, math.inf
        for f, con in nonmonotone_corpus():
            opt = brute_opt(f, con)[1]
            for eps in (0.25, 0.125):
                ell = math.ceil(1 / (2 * eps))
                vals = []
                for seed in range(seeds):
                    out = _comb_run(f, con, eps, seed, 0)
                    vals.append(out.value)
                    if isinstance(con, C.Knapsack):
                        hard += not C.Knapsack.cost(con, out.solution) <= 3 * ell * con.budget + 1e-9
                    else:
                        hard += not out.infeasibility <= 2 * ell
                exact = _comb_run(f, con, eps, 0, ds.EXACT_DG_LIMIT)
                hard += not exact.value >= (0.5 - eps) * opt
                mean = float(np.mean(vals))
                se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
                soft += not mean >= (0.5 - eps) * opt - 3 * se
                if opt > 0:
                    worst = min(worst, mean / opt - (0.5 - eps))
        return (hard == 0 and soft == 0,
                f"{hard} hard and {soft} mean violations; min (mean/OPT - (1/2-eps)) = {worst:.4f}",
                "mean >= (1/2-eps)OPT - 3 se; beta <= 2 ceil(1/(2eps)) or cost <= 3 ceil(1/(2eps)) B")

    return _timed(3, "combinatorial 1/2-bicriteria", 300, body)


def criterion_4() -> Criterion:
    def body():
        bad, worst = 0, math.inf
        delta = 0.05
        for f, con in cut_corpus():
            opt = brute_opt(f, con)[1]
            k = C.as_knapsack(con)
            for eps in (0.25, 0.1):
                out = ds.density_greedy_symmetric(f, con, eps, delta)
                cost = k.cost(out.solution)
                ok = out.value >= (0.5 - eps - delta) * opt
                ok &= cost <= (1 + 0.5 * math.log(1 / (2 * eps))) * k.budget + 1e-9
                ok &= out.trace["removals"] <= f.n**2 / delta
                bad += not ok
                if opt > 0:
                    worst = min(worst, out.value / opt - (0.5 - eps - delta))
        return bad == 0, f"{bad} violations; min value/OPT slack {worst:.4f}", \
            "value >= (1/2-eps-delta)OPT, cost <= (1 + ln(1/(2eps))/2)B"

    return _timed(4, "symmetric density greedy", 30, body)


def _mcg_corpus():
    rng = np.random.default_rng(5)
    out = []
    for j in range(12):
        n = int(rng.integers(6, 11))
        if j % 2:
            f, _ = fn.random_coverage(n, n + 3, 500 + j).build()
        else:
            f, _ = fn.Modular(tuple(float(w) for w in np.round(rng.random(n), 4))).build()
        kind = j % 3
        con = C.Cardinality(n, int(rng.integers(1, 4))) if kind == 0 else _knapsack(n, rng) if kind == 1 \
            else _matroid(n, j % 2, rng)
        out.append((f, con))
    return out


def criterion_5() -> Criterion:
    def body():
        bad, worst = 0, math.inf
        for f, con in _mcg_corpus():
            opt = brute_opt(f, con)[1]
            region = C.as_region(con)
            for eps in (0.25, 0.1):
                T = math.log(1 / eps)
                dt = T / 200
                out = cs.measured_continuous_greedy(MultilinearExtension(f), region, T, dt)
                ok = out.value >= (1 - eps) * opt - (5 * dt + 1e-6) * opt
                ok &= bool(region.contains(out.solution / T, tol=1e-6))
                bad += not ok
                if opt > 0:
                    worst = min(worst, out.value / opt - (1 - eps))
        return bad == 0, f"{bad} violations; min F/OPT - (1-eps) = {worst:.4f}", \
            "F(y) >= (1-eps)OPT - (5dt+1e-6)OPT, y/T in region"

    return _timed(5, "measured continuous greedy", 120, body)


def _sym_fractional_corpus():
    rng = np.random.default_rng(6)
    out = []
    for j in range(10):
        n = int(rng.integers(6, 10))
        f, _ = fn.random_graph(n, 0.5, 600 + j).build()
        if j % 2 == 0:
            con = C.Cardinality(n, int(rng.integers(1, n // 2 + 1)))
        else:
            con = _knapsack(n, rng, 0.3)
        out.append((f, con))
    return out


def criterion_6() -> Criterion:
    def body():
        bad, worst = 0, math.inf
        for f, con in _sym_fractional_corpus():
            opt = brute_opt(f, con)[1]
            k = C.as_knapsack(con)
            c = C.density(k)
            for eps in (0.25, 0.1):
                T = 0.5 * math.log(1 / (2 * eps))
                dt = T / 200
                out = cs.more_mcg(MultilinearExtension(f), C.as_region(con), T, dt)
                y = out.solution
                tol = (5 * dt + 1e-6) * max(opt, k.budget)
                ok = out.value >= (0.5 - eps) * opt - tol
                ok &= float(k.prices @ y) <= k.budget * (1 - (2 * eps) ** c) / (2 * c) + tol
                ok &= float(y.max()) <= 0.5 + 1e-12
                bad += not ok
                if opt > 0:
                    worst = min(worst, out.value / opt - (0.5 - eps))
        return bad == 0, f"{bad} violations; min F/OPT - (1/2-eps) = {worst:.4f}", \
            "F >= (1/2-eps)OPT - tol, <p,y> <= B(1-(2eps)^c)/(2c) + tol, y <= 1/2"

    return _timed(6, "half-capped measured greedy", 120, body)


def _cdg_corpus():
    rng = np.random.default_rng(7)
    out = []
    for j in range(8):
        n = int(rng.integers(5, 9))
        if j % 2:
            f, _ = fn.random_coverage(n, n + 2, 700 + j).build()
        else:
            f, _ = fn.Modular(tuple(float(w) for w in np.round(rng.random(n), 4))).build()
        prices = np.round(0.5 + 0.5 * rng.random(n), 3)
        for c in (0.5, 0.75):
            out.append((f, C.Knapsack(prices, c * float(prices.sum())), c))
    return out


def criterion_7() -> Criterion:
    def body():
        bad, worst = 0, math.inf
        dt = 1 / 200
        for f, k, c in _cdg_corpus():
            opt = brute_opt(f, k)[1]
            for eps in (0.25, 0.5):
                out = cs.continuous_double_greedy_knapsack(MultilinearExtension(f), k, eps, dt)
                cap = k.budget * C.rho(c, eps)
                ok = out.value >= (1 - eps) * opt - (5 * dt + 1e-6) * opt
                ok &= float(k.prices @ out.solution) <= cap + 1e-6
                bad += not ok
                if opt > 0:
                    worst = min(worst, out.value / opt - (1 - eps))
        return bad == 0, f"{bad} violations; min F/OPT - (1-eps) = {worst:.4f}", \
            "F(x(1)) >= (1-eps)OPT - tol and <p,x(1)> <= B rho(c,eps) + 1e-6"

    return _timed(7, "continuous double greedy (knapsack)", 120, body)


def _general_corpus():
    rng = np.random.default_rng(8)
    out = []
    for j in range(6):
        n = int(rng.integers(5, 8))
        f, _ = fn.random_graph(n, 0.5, 800 + j, directed=j % 2 == 0).build()
        kind = j % 3
        con = C.Cardinality(n, int(rng.integers(1, 3))) if kind == 0 else _knapsack(n, rng, 0.3) if kind == 1 \
            else _matroid(n, 1, rng)
        out.append((f, con))
    f, con = harness.disjoint_arcs(2)
    out.append((f, con))
    return out


def criterion_8() -> Criterion:
    def body():
        eps = 0.25
        worst_C, bad = -math.inf, 0
        for f, con in _general_corpus():
            opt = brute_opt(f, con)[1]
            region = C.as_region(con)
            out = cs.general_bicriteria(MultilinearExtension(f), region, eps, seed=0, dt=0.02)
            if opt > 0:
                worst_C = max(worst_C, (0.5 - out.value / opt) / eps)
            bad += not out.trace["certified"]
            bad += not out.trace["guide_sum_max"] <= 2 + 1e-9
        ok = bad == 0 and worst_C <= 4
        return ok, f"C = {worst_C:.4f}; {bad} certificate violations", \
            "C <= 4, r/(2(1/eps+2)) in region, ||sum g||_inf <= 2"

    return _timed(8, "general bicriteria (guided greedy + DR double greedy)", 300, body)


def criterion_9(seeds: int = 5000) -> Criterion:
    def body():
        rng = np.random.default_rng(9)
        bad_hard, bad_mean, worst = 0, 0, math.inf
        cases = []
        for j in range(3):
            n = 6
            f, _ = fn.random_coverage(n, 8, 900 + j).build() if j else fn.random_graph(n, 0.5, 900).build()
            k = _knapsack(n, rng, 0.3)
            x = cs.measured_continuous_greedy(MultilinearExtension(f), C.as_region(k), 1.0, 0.02).solution
            cases.append(("knapsack", f, k, x, None))
        f, _ = fn.random_graph(6, 0.5, 950).build()
        cases.append(("cardinality", f, C.Cardinality(6, 2), np.array([0.3, 0.5, 0.7, 0.2, 0.1, 0.6]), None))
        f, _ = fn.random_coverage(6, 8, 960).build()
        pm = C.PartitionMatroid(6, [range(0, 3), range(3, 6)], [1, 2])
        cases.append(("matroid", f, pm, np.array([0.4, 0.3, 0.3, 0.5, 0.9, 0.6]), 1.0))
        g, _ = fn.random_graph(6, 0.5, 970, directed=True).build()
        um = C.UniformMatroid(6, 1)
        cases.append(("matroid", g, um, np.array([0.5, 0.4, 0.3, 0.2, 0.35, 0.25]), 2.0))
        for kind, f, con, x, beta in cases:
            Fx = MultilinearExtension(f).eval(x)
            vals = []
            for seed in range(seeds):
                if kind == "matroid":
                    S = rd.pipage_matroid(x, beta, con, f, seed)
                    bad_hard += not C.matroid_union_independent(con, math.ceil(beta), S)
                else:
                    k = C.as_knapsack(con)
                    S = rd.pipage_knapsack(x, k, f, seed)
                    bad_hard += not k.cost(S) <= float(k.prices @ x) + k.budget + 1e-9
                    if kind == "cardinality":
                        bad_hard += not len(S) <= math.ceil(float(x.sum()) - 1e-9)
                vals.append(f(S))
            mean = float(np.mean(vals))
            se = float(np.std(vals, ddof=1) / math.sqrt(seeds))
            bad_mean += not mean >= Fx - 3 * se
            worst = min(worst, (mean - Fx) / se if se > 0 else 0.0)
        return bad_hard == 0 and bad_mean == 0, \
            f"{bad_hard} hard and {bad_mean} mean violations; min (mean - F(x))/se = {worst:.2f}", \
            "E[f(S)] >= F(x) - 3 se; cost/independence bounds on every run"

    return _timed(9, "pipage rounding", 180, body)


def criterion_10() -> Criterion:
    def body():
        grid = [round(0.05 * i, 2) for i in range(1, 20)]
        rho_gap = max(abs(C.rho_low(0.5, e) - C.rho_high(0.5, e)) for e in grid)
        # the dispatching function itself must agree with each branch on its side
        side_gap = max(
            max(abs(C.rho(c, e) - C.rho_low(c, e)) for c in (0.1, 0.25, 0.4) for e in grid),
            max(abs(C.rho(c, e) - C.rho_high(c, e)) for c in (0.6, 0.75, 0.9) for e in grid),
        )
        refs = abs(C.rho(0.25, 0.25) - 1.171573) <= 1e-6 and abs(C.rho(0.75, 0.25) - 0.833333) <= 1e-6
        h = 1e-9
        nu_gap = abs(C.nu(C.NU_KNEE) - C.nu(C.NU_KNEE + h))
        betas = np.linspace(0, C.NU_KNEE, 50)
        nu_vs_curve = max(abs(cs.multi_opt_bound(2, b) - C.nu(b)) for b in betas)
        rows = harness.sweep_curve([2, 3, 4], list(betas[::7]), empirical=False)
        sweep_gap = max(abs(r["curve"] - r["ell"] * (math.exp(-r["beta"] / r["ell"]) - math.exp(-r["beta"]))
                            / (r["ell"] - 1)) for r in rows)
        ok = rho_gap <= 1e-12 and side_gap <= 1e-12 and refs and nu_gap <= 1e-8 and nu_vs_curve <= 1e-12 \
            and sweep_gap <= 1e-12
        return ok, (f"rho gap {rho_gap:.1e}, branch dispatch gap {side_gap:.1e}, rho refs {'ok' if refs else 'off'}, "
                    f"nu gap {nu_gap:.1e}, multi-OPT vs nu {nu_vs_curve:.1e}, sweep {sweep_gap:.1e}"), \
            "all gaps <= 1e-12 (nu knee <= 1e-8 at h=1e-9)"

    return _timed(10, "closed forms", 10, body)


def criterion_11() -> Criterion:
    def body():
        fails = []
        for h, ell, i in ((1, 2, 6), (1, 3, 4), (1, 4, 3), (2, 5, 2)):
            c = h / ell
            for dp in (c / 8, c / 5):
                fam = fn.HardMonotone(h, ell, i, dp)
                f, _ = fam.build(seed=11)
                if not verify_monotone(f) or not verify_submodular(f):
                    fails.append(f"hard({h},{ell},{i},{dp:.3f})")
                if f(fam.optimal_set(11)) < 1 - 2 * dp / c - 1e-12:
                    fails.append(f"hard-opt({h},{ell},{i})")
        for k in (3, 5):
            f, _ = fn.ArcsSymmetryGap(k).build()
            if not verify_submodular(f):
                fails.append(f"arcs{k}")
        for kap in (0.0, fn.kappa_default(1.0), 1.0):
            fam = fn.KappaBlend(2, kap)
            f, _ = fam.build()
            if not verify_submodular(f) or f(0) != 0:
                fails.append(f"kappa{kap:.3f}")
            if fam.g(0b01) != 1 or fam.g(0b11) != 0 or fam.g(0) != 0:
                fails.append("kappa-g")
        return not fails, f"failures: {fails or 'none'}", "all hard instances submodular (monotone where claimed)"

    return _timed(11, "hard-instance sanity", 120, body)


def criterion_12() -> Criterion:
    def body():
        f, con = harness.disjoint_arcs(2)
        opt = brute_opt(f, con)[1]
        worst = math.inf
        ok = True
        for beta in (math.log(2), 2 * math.log(2)):
            dt = beta / 200
            out = cs.mcg_multi_opt(MultilinearExtension(f), C.as_region(con), beta, 2, dt)
            tol = (5 * dt + 1e-6) * opt
            ok &= out.value >= C.nu(beta) * opt - tol
            worst = min(worst, out.value / opt - C.nu(beta))
        return ok, f"min F/OPT - nu(beta) = {worst:.4f}", "F(y(beta)) >= nu(beta) OPT - tol"

    return _timed(12, "multi-OPT measured greedy", 60, body)


CRITERIA: dict[int, Callable[[], Criterion]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def select(selector: str | None) -> list[int]:
    """None runs everything; an empty string runs nothing; otherwise a comma
    list of criterion numbers."""
    if selector is None:
        return sorted(CRITERIA)
    picked = []
    for part in selector.split(","):
        part = part.strip()
        if not part:
            continue
        k = int(part)
        if k not in CRITERIA:
            raise ValueError(f"no criterion {k}")
        picked.append(k)
    return picked


def run_suite(selector: str | None = None) -> list[Criterion]:
    return [CRITERIA[k]() for k in select(selector)]
