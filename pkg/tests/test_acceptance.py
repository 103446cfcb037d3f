"""Acceptance criteria 1-11, each reported as one PASS/FAIL summary line."""

import math
import time

import numpy as np
import pytest

from conftest import record_acceptance
from imgm import cli
from imgm.bench import erdos_renyi_graph
from imgm.graph import write_edge_list
from imgm.instances import make_instance, new_collection
from imgm.matroid import PartitionMatroid
from imgm.oracle import (ExactObjective, brute_F, brute_F_weighted, brute_opt_coverage,
                         brute_opt_objective)
from imgm.ramp import RampConfig, ramp
from imgm.selection import (QCache, amp, amp_guarantee, amp_round, amp_search, amp_search_pm,
                            coverage, greedy, local_greedy)
from imgm.weighted import WQCache, amp_weighted, weighted_derivative

from _fixtures import exhaustive_suite, random_collection, random_graph, random_matroid

SUITE_SEED = 2024
FACTORS = {1.0: 0.5, 0.5: 0.5556, 0.25: 0.5904}


@pytest.fixture(scope="module")
def suite():
    return exhaustive_suite(SUITE_SEED, 200, n_max=10)


@pytest.fixture(scope="module")
def suite_opt(suite):
    return [brute_opt_coverage(c, m)[1] for c, m in suite]


def test_c01_multilinear_closed_form():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        c = random_collection(rng, n, int(rng.integers(0, 9)))
        x = rng.random(n)
        x[rng.random(n) < 0.1] = 0.0
        x[rng.random(n) < 0.1] = 1.0
        worst = max(worst, abs(QCache(c, x).F() - brute_F(c, x)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    record_acceptance(1, ok, f"max |F - brute_F| = {worst:.2e} over 1000 cases, {dt:.1f} s")
    assert ok


def test_c02_derivative_finite_difference():
    rng = np.random.default_rng(102)
    h = 1e-5
    t0 = time.perf_counter()
    worst = 0.0
    checks = bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        c = random_collection(rng, n, int(rng.integers(1, 12)))
        eps_s = 1.0 / int(rng.choice([1, 2, 4, 8]))
        x = rng.random(n)
        x[rng.random(n) < 0.2] = 0.0
        x[rng.random(n) < 0.2] = 1.0 - eps_s
        cache = QCache(c, x)
        i = int(rng.integers(n))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (QCache(c, xp).F() - QCache(c, xm).F()) / (2 * h)
        d = cache.derivative(i, x[i])
        bad += abs(d - fd) > 1e-4 * abs(fd) + 1e-9
        if abs(fd) > 1e-6:
            worst = max(worst, abs(d - fd) / abs(fd))
        checks += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 10
    record_acceptance(2, ok, f"{bad} of {checks} points outside rel 1e-4 (abs floor 1e-9); "
                             f"max relative error where |fd| > 1e-6: {worst:.2e}; {dt:.1f} s")
    assert ok


def test_c03_amp_guarantee(suite, suite_opt):
    t0 = time.perf_counter()
    violations, checks = 0, 0
    for (c, m), opt in zip(suite, suite_opt):
        for eps, factor in FACTORS.items():
            assert amp_guarantee(eps) == pytest.approx(factor, abs=1e-4)
            for pm in (False, None):
                res = amp(c, m, eps, use_pm=pm)
                checks += 1
                if res.coverage < amp_guarantee(eps) * opt - 1e-9:
                    violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 60
    record_acceptance(3, ok, f"{violations} violations in {checks} runs on 200 instances, "
                             f"{dt:.1f} s")
    assert ok


def test_c04_rounding():
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    bad_mono, bad_final, bad_swaps = 0, 0, 0
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        c = random_collection(rng, n, int(rng.integers(1, 16)), max_size=min(n, 4))
        m = random_matroid(rng, n)
        L = int(rng.integers(1, 9))
        eps = 1.0 / L
        bases = [m.max_weight_base(rng.random(n)) for _ in range(L)]
        y = np.zeros(n)
        for B in bases:
            y[B] += eps
        cache = QCache(c, y)
        F0 = cache.F()
        trace = []
        out, swaps = amp_round(c, m, eps, cache, bases, y=y, trace=trace)
        prev = F0
        for f in trace:
            bad_mono += f - prev < -1e-9
            prev = f
        bad_final += coverage(c, out) < F0 - 1e-9 or not m.is_base(out)
        bad_swaps += swaps > m.rank * (L - 1)
    dt = time.perf_counter() - t0
    ok = bad_mono == bad_final == bad_swaps == 0 and dt < 30
    record_acceptance(4, ok, f"decreasing swaps {bad_mono}, final below F {bad_final}, "
                             f"swap-count excess {bad_swaps}; 1000 base lists, {dt:.1f} s")
    assert ok


def test_c05_search_step_bound(suite, suite_opt):
    t0 = time.perf_counter()
    violations, checks = 0, 0
    for (c, m), opt in zip(suite, suite_opt):
        for search in (amp_search, amp_search_pm):
            for eps in (1.0, 0.5, 0.25):
                x = np.zeros(c.n)
                cache = QCache(c)
                for _ in range(round(1 / eps)):
                    F0 = cache.F()
                    B, cache = search(c, m, x, eps, cache)
                    x[B] += eps
                    checks += 1
                    violations += opt - cache.F() > (opt - F0) / (1 + eps) + 1e-9
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 60
    record_acceptance(5, ok, f"{violations} violations in {checks} search steps "
                             f"(general and partition search), {dt:.1f} s")
    assert ok


def _c06_instances(rng):
    out = []
    for g_idx in range(20):
        n = int(rng.integers(4, 8))
        g = random_graph(rng, n, int(rng.integers(3, 17)), lt=True)
        T = 2
        A = sorted(rng.choice(n, size=int(rng.integers(1, 3)), replace=False).tolist())
        out.append((g_idx, [make_instance("IM", g, k=1),
                            make_instance("RM", g, T=T, alpha=rng.uniform(0.5, 2, T)),
                            make_instance("MRIM", g, T=T, k=1),
                            make_instance("AdvIM", g, seed_set=A, kv=1, ke=1)]))
    return out


def test_c06_estimator_unbiased():
    rng = np.random.default_rng(106)
    reps, theta = 500, 200
    t0 = time.perf_counter()
    misses, checks = [], 0
    zs = []
    for g_idx, insts in _c06_instances(rng):
        for inst in insts:
            big = new_collection(inst, reps * theta, seed=int(rng.integers(2**31)))
            exact = ExactObjective(inst)
            for _ in range(10):
                S = rng.choice(inst.n, size=int(rng.integers(1, min(3, inst.n) + 1)),
                               replace=False).tolist()
                hit = np.zeros(big.theta, dtype=bool)
                for e in S:
                    hit[big.sets_containing(e)] = True
                est = inst.kappa / theta * hit.reshape(reps, theta).sum(axis=1)
                se = est.std(ddof=1) / math.sqrt(reps)
                truth = exact(S)
                checks += 1
                z = (est.mean() - truth) / se if se > 0 else 0.0
                zs.append(z)
                if abs(est.mean() - truth) > 3 * se + 1e-12:
                    misses.append((g_idx, inst.kind.value, S, round(z, 2)))
    dt = time.perf_counter() - t0
    zs = np.array(zs)
    ok = not misses and dt < 300
    record_acceptance(6, ok, f"{len(misses)} of {checks} checks outside 3 SE "
                             f"(expected {0.0027 * checks:.1f} by chance); z mean "
                             f"{zs.mean():+.3f}, z sd {zs.std():.3f}; {dt:.1f} s; "
                             f"misses {misses}")
    assert ok


def _c07_instances():
    rng = np.random.default_rng(107)
    out = []
    while len(out) < 10:
        kind = ("IM", "RM", "MRIM", "AdvIM")[len(out) % 4]
        if kind == "IM":
            g = random_graph(rng, 8, 14)
            inst = make_instance("IM", g, k=2)
        elif kind == "RM":
            g = random_graph(rng, 4, 10)
            inst = make_instance("RM", g, T=3, alpha=rng.uniform(0.5, 2, 3))
        elif kind == "MRIM":
            g = random_graph(rng, 6, 12)
            inst = make_instance("MRIM", g, T=2, k=1)
        else:
            g = random_graph(rng, 6, 7, lt=True)
            inst = make_instance("AdvIM", g, seed_set=[0], kv=1, ke=1)
        _, opt = brute_opt_objective(inst)
        if opt > 0:
            out.append((inst, opt))
    return out


def test_c07_ramp_end_to_end():
    t0 = time.perf_counter()
    target = 1 - 1 / math.e - 0.3
    counts = []
    for inst, opt in _c07_instances():
        exact = ExactObjective(inst)
        good = sum(exact(ramp(inst, RampConfig(0.3, 0.1), seed=s).result) >= target * opt
                   - 1e-12 for s in range(50))
        counts.append((inst.kind.value, good))
    dt = time.perf_counter() - t0
    ok = all(g >= 45 for _, g in counts)
    record_acceptance(7, ok, f"successes per instance (of 50): "
                             f"{', '.join(f'{k} {g}' for k, g in counts)}; {dt:.1f} s")
    assert ok


def _drift(make_cache, rng, n, coll):
    x = np.zeros(n)
    cache = make_cache(coll, x)
    for _ in range(10_000):
        i = int(rng.integers(n))
        u = rng.random()
        new = 1.0 if u < 0.2 else (0.0 if u < 0.35 else float(rng.random()))
        cache.update(i, x[i], new)
        x[i] = new
    return float(np.max(np.abs(cache.q() - make_cache(coll, x).q())))


def test_c08_cache_drift():
    rng = np.random.default_rng(108)
    coll = random_collection(rng, 12, 200, max_size=6)
    w = rng.random(12)
    w[:4] = 1.0
    d_plain = _drift(lambda c, x: QCache(c, x), rng, 12, coll)
    d_weighted = _drift(lambda c, x: WQCache(c, w, x), rng, 12, coll)
    ok = d_plain <= 1e-8 and d_weighted <= 1e-8
    record_acceptance(8, ok, f"max drift after 10^4 updates: QCache {d_plain:.1e}, "
                             f"WQCache {d_weighted:.1e}")
    assert ok


def test_c09_performance_smoke(tmp_path, capsys):
    """Informational: recorded but never fails the run."""
    g = erdos_renyi_graph(100_000, 10.0, seed=9)
    path = tmp_path / "big.txt"
    write_edge_list(g, path, with_prob=False)
    t0 = time.perf_counter()
    code = cli.main(["ramp", "--graph", str(path), "--instance", "im", "--k", "50",
                     "--eps", "0.5", "--seed", "0", "--out", str(tmp_path / "r.json")])
    t_ramp = time.perf_counter() - t0
    capsys.readouterr()
    rm = make_instance("RM", erdos_renyi_graph(2000, 5.0, seed=10), T=10)
    coll = new_collection(rm, 50_000, seed=1)
    ratios = []
    for eps in (1.0, 0.5, 0.25):
        t_amp = min(_timed(lambda: amp(coll, rm.matroid, eps, use_pm=False)) for _ in range(2))
        t_pm = min(_timed(lambda: amp(coll, rm.matroid, eps, use_pm=True)) for _ in range(2))
        ratios.append(t_amp / t_pm)
    ok = code == 0 and t_ramp < 120 and min(ratios) >= 2
    record_acceptance(9, ok, f"(informational) ramp on 100k/1M IM {t_ramp:.1f} s; AMP/AMP-PM "
                             f"time ratio at eps 1, 1/2, 1/4: "
                             f"{', '.join(f'{r:.1f}x' for r in ratios)}")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_c10_baselines(suite, suite_opt):
    local_bound = 0.46
    bad_g, bad_l, local_checks = 0, 0, 0
    for (c, m), opt in zip(suite, suite_opt):
        bad_g += greedy(c, m).coverage < 0.5 * opt
        if m.partition_view is not None:
            local_checks += 1
            bad_l += local_greedy(c, m).coverage < local_bound * opt
    rng = np.random.default_rng(110)
    mismatch = 0
    for _ in range(100):
        n = int(rng.integers(3, 15))
        c = random_collection(rng, n, int(rng.integers(1, 40)), max_size=min(n, 5))
        m = random_matroid(rng, n)
        mismatch += amp(c, m, 1.0, use_pm=False).coverage != greedy(c, m).coverage
    ok = bad_g == bad_l == mismatch == 0
    record_acceptance(10, ok, f"greedy below 0.5 opt: {bad_g}/200; local below 0.46 opt: "
                              f"{bad_l}/{local_checks}; AMP(1) vs greedy mismatches: "
                              f"{mismatch}/100")
    assert ok


def test_c11_weighted_reduction():
    rng = np.random.default_rng(111)
    diff = 0
    for _ in range(100):
        n = int(rng.integers(3, 15))
        c = random_collection(rng, n, int(rng.integers(1, 40)), max_size=min(n, 5))
        m = random_matroid(rng, n)
        eps = 1.0 / int(rng.choice([1, 2, 4]))
        diff += amp_weighted(c, m, eps, np.ones(n)).chosen != amp(c, m, eps).chosen
    h = 1e-5
    worst = 0.0
    bad = 0
    for _ in range(40):
        n = int(rng.integers(1, 11))
        c = random_collection(rng, n, int(rng.integers(1, 8)))
        x = rng.uniform(h, 1 - h, n)
        w = rng.random(n)
        cache = WQCache(c, w, x)
        i = int(rng.integers(n))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (brute_F_weighted(c, xp, w) - brute_F_weighted(c, xm, w)) / (2 * h)
        d = weighted_derivative(c, cache, x, w, i)
        bad += abs(d - fd) > 1e-4 * abs(fd) + 1e-9
        if abs(fd) > 1e-6:
            worst = max(worst, abs(d - fd) / abs(fd))
    ok = diff == 0 and bad == 0
    record_acceptance(11, ok, f"w=1 base mismatches {diff}/100; weighted derivative "
                              f"{bad}/40 outside rel 1e-4, max relative error where |fd| > 1e-6: {worst:.1e}")
    assert ok
