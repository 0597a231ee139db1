"""Acceptance criteria, one test each.

Every test records a ``criterion k: PASS|FAIL ...`` line; the lines are
printed in the pytest terminal summary and when this file is run directly.
Tolerances and sizes are the ones stated for the criteria; nothing is
relaxed to make a check pass.
"""
import math
import statistics
import time

import numpy as np
from scipy import stats

from qmd.copulas import (REFERENCE_COPULAS, c_cube, c_cube_tilde, minimum, product,
                         reference_copula, sample_scenario)
from qmd.core import CheckerboardCopula, Sample, marginalize
from qmd.empirical import ranks
from qmd.harness import simulate
from qmd.linkage import (ConditionalChain, linkage_of_empirical, rosenblatt_forward,
                         rosenblatt_inverse, sample_checkerboard)
from qmd.measure import d1, d_infty, d_p, phi_curve, zeta1_estimate, zeta1_exact
from qmd.oracle import quadrature_zeta1, riemann_d1_to_product
import helpers
from helpers import random_copula, random_linkage

N_LIST = [100, 500, 1000, 5000, 10000]


def _record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    helpers.ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def _median_time(fn, reps=20):
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t0)
    return out, statistics.median(ts)


def test_criterion_1_exact_values():
    v2, t2 = _median_time(lambda: zeta1_exact(c_cube(2)))
    v4, t4 = _median_time(lambda: zeta1_exact(c_cube(4)))
    ok = abs(v2 - 0.75) <= 1e-12 and abs(v4 - 0.875) <= 1e-12 and t2 < 1e-3 and t4 < 1e-3
    _record(1, ok, f"c_cube(2)={v2!r} ({t2 * 1e3:.3f} ms), c_cube(4)={v4!r} ({t4 * 1e3:.3f} ms)")


def test_criterion_2_minimum_closed_form():
    t0 = time.perf_counter()
    vals = {N: zeta1_exact(minimum(N)) for N in range(2, 65)}
    t_closed = time.perf_counter() - t0
    worst_formula = max(abs(v - (1 - 1 / (2 * N))) for N, v in vals.items())
    t0 = time.perf_counter()
    worst_oracle = max(abs(quadrature_zeta1(minimum(N), step=1e-6) - vals[N]) for N in vals)
    t_oracle = time.perf_counter() - t0
    ok = worst_formula <= 1e-12 and worst_oracle <= 1e-5 and t_closed < 1.0
    _record(2, ok, f"max |exact - (1-1/2N)| = {worst_formula:.1e}, max |oracle - exact| = "
                   f"{worst_oracle:.1e} (tol 1e-5); closed form {t_closed:.3f} s (< 1 s); "
                   f"brute-force oracle {t_oracle:.1f} s, timed separately")


def test_criterion_3_riemann_sandwich():
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for name in sorted(REFERENCE_COPULAS):
        dims = (2, 3) if name == "product" else (None,)
        for dim in dims:
            for N in (2, 3, 4, 8):
                cb = reference_copula(name, N, dim)
                exact = zeta1_exact(cb)
                for M in (10, 100, 1000):
                    value, _ = riemann_d1_to_product(cb, M)
                    worst = max(worst, abs(3 * value - exact) * M / 6)
                    count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 5.0
    _record(3, ok, f"{count} cases, max |3R - exact| / (6/M) = {worst:.3f} (<= 1); {elapsed:.2f} s")


def test_criterion_4_cube_convergence():
    t0 = time.perf_counter()
    _, summary = simulate("cube", N_LIST, 200, [1 / 3], seed=2024)
    elapsed = time.perf_counter() - t0
    med = [summary[(n, 1 / 3)][1] for n in N_LIST]
    last_ok = 0.70 <= med[-1] <= 0.80
    mono = all(a <= b for a, b in zip(med, med[1:]))
    below = all(m <= 0.75 for m in med)
    ok = last_ok and mono and below and elapsed < 120
    _record(4, ok, "medians " + ", ".join(f"n={n}:{m:.4f}" for n, m in zip(N_LIST, med))
            + f"; n=1e4 in [0.70,0.80]: {last_ok}; nondecreasing: {mono}; "
              f"from below: {below}; {elapsed:.1f} s")


def test_criterion_5_independence_null():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("indep_normal_exp", "noisy_chain", "double_mod"):
        rows, summary = simulate(name, N_LIST, 200, [None], seed=2024)
        nonneg = all(r.value >= 0 for r in rows)
        s_used = rows[0].s
        med = [summary[(n, s_used)][1] for n in N_LIST]
        strict = all(a > b for a, b in zip(med, med[1:]))
        ratio = med[0] / med[-1] if med[-1] > 0 else math.inf
        ok &= nonneg and strict and ratio >= 2
        parts.append(f"{name} (s={s_used:.3g}) medians "
                     + "/".join(f"{m:.3f}" for m in med)
                     + f" nonneg={nonneg} strict={strict} ratio={ratio:.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 180
    _record(5, ok, "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_6_metric_inequalities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    ys = np.linspace(0, 1, 100)
    bad = []
    for k in range(100):
        a = random_linkage(rng, 2, int(rng.integers(2, 9)))
        b = random_linkage(rng, 2, int(rng.integers(2, 9)))
        D1, Dinf, D2 = d1(a, b).value, d_infty(a, b).value, d_p(a, b, 2).value
        if not (D1 <= Dinf and Dinf <= 2 * math.sqrt(D1) + 1e-9):
            bad.append((k, "D1/Dinf"))
        if not (D2 ** 2 <= D1 and D1 <= D2 + 1e-9):
            bad.append((k, "D2/D1"))
        c = phi_curve(a, b, ys)
        if np.any(np.abs(np.diff(c)) > 2 * np.diff(ys)):
            bad.append((k, "lipschitz"))
        if np.any(phi_curve(a, product(3, 2), ys) > 2 * ys * (1 - ys) + 1e-9):
            bad.append((k, "phi bound"))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 10
    _record(6, ok, f"100 pairs, violations {bad[:5]}; {elapsed:.2f} s")


def test_criterion_7_properties():
    t0 = time.perf_counter()
    fails = []
    for name in REFERENCE_COPULAS:
        for N in range(2, 9):
            z = zeta1_exact(reference_copula(name, N))
            if not 0.0 <= z <= 1.0:
                fails.append((name, N))
    for rho in (2, 3, 4, 5):
        for N in (1, 2, 3, 7):
            if zeta1_exact(product(rho, N)) != 0.0:
                fails.append(("product", rho, N))
    rng = np.random.default_rng(7)
    for _ in range(50):
        cb = random_copula(rng, 4, int(rng.integers(2, 7)))
        order = list(rng.permutation(3))
        chain = [zeta1_exact(marginalize(cb, sorted(order[:k]) + [3])) for k in (1, 2, 3)]
        if not (chain[0] <= chain[1] <= chain[2]):
            fails.append(("gain", chain))
    s = sample_scenario("double_mod", 3000, 7)
    base = zeta1_estimate(s).value
    v = s.values.copy()
    v[:, 0] = np.exp(2 * v[:, 0])
    v[:, 1] = -v[:, 1] ** 3
    v[:, 3] = np.arctan(v[:, 3])
    v[:, 4] = 5.0 - 3.0 * v[:, 4]
    mono = zeta1_estimate(Sample(v, s.column_names, 4)).value
    order = [2, 0, 3, 1, 4]
    perm = zeta1_estimate(Sample(s.values[:, order], tuple(s.column_names[i] for i in order), 4)).value
    if mono != base:
        fails.append(("monotone", base, mono))
    if perm != base:
        fails.append(("permutation", base, perm))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 30
    _record(7, ok, f"catalog range, product zero, 50 gain chains, bitwise invariances; "
                   f"failures {fails[:3]}; {elapsed:.2f} s")


def test_criterion_8_maximal_information():
    t0 = time.perf_counter()
    worst_margin, worst_pair, detail = 0.0, 0.0, []
    ok = True
    for N in (2, 4, 8):
        cb = c_cube(N)
        for axes in ([0, 1], [0, 2], [1, 2]):
            worst_margin = max(worst_margin, zeta1_exact(marginalize(cb, axes)))
        z = zeta1_exact(cb)
        ok &= abs(z - (1 - 1 / (2 * N))) <= 1e-12 and z >= 1 - 1 / N
        worst_pair = max(worst_pair, abs(z - zeta1_exact(c_cube_tilde(N))))
        detail.append(f"N={N}: {z!r}")
    elapsed = time.perf_counter() - t0
    ok &= worst_margin <= 1e-12 and worst_pair <= 1e-12 and elapsed < 1.0
    _record(8, ok, ", ".join(detail) + f"; max bivariate {worst_margin:.1e}; "
                   f"cube vs tilde {worst_pair:.1e}; {elapsed:.3f} s")


def test_criterion_9_rosenblatt_round_trip():
    t0 = time.perf_counter()
    cb = c_cube(4)
    z = sample_checkerboard(cb, 10**5, seed=9)
    xm = marginalize(cb, [0, 1])
    r = np.random.default_rng(9).random((10**5, 2))
    u = rosenblatt_forward(xm, z[:, :2], r)
    counts = np.histogram2d(u[:, 0], u[:, 1], bins=10, range=[(0, 1), (0, 1)])[0].ravel()
    p = stats.chisquare(counts).pvalue
    back = rosenblatt_inverse(xm, u)
    err_x = np.max(np.abs(back - z[:, :2]))
    chain = ConditionalChain(cb)
    err_full = np.max(np.abs(chain.inverse(chain.forward(z)) - z))
    elapsed = time.perf_counter() - t0
    ok = p > 0.01 and err_x <= 1e-12 and err_full <= 1e-12 and elapsed < 10
    _record(9, ok, f"chi-square p = {p:.3f} (> 0.01); max |Psi(Phi(X)) - X| = {err_x:.1e} "
                   f"(X-margin), {err_full:.1e} (full); {elapsed:.2f} s")


def test_criterion_10_linkage_regression():
    t0 = time.perf_counter()
    N = 4
    # A: X1, X2 independent uniform and Y in the cell of X2, a nonproduct linkage
    cells = {(i, j, j): 1 for i in range(N) for j in range(N)}
    A = CheckerboardCopula.from_cells(cells, N, denominator=N * N)
    z = sample_checkerboard(A, 2000, seed=10)
    pseudo = ranks(Sample(z, ("X1", "X2", "Y"), 2))
    L = linkage_of_empirical(pseudo, N)
    m_emp = marginalize(L, [1, 2])
    m_A = marginalize(A, [1, 2])
    emp_uniform = bool(np.array_equal(m_emp.to_dense(), product(2, N).to_dense()))
    a_uniform = bool(np.array_equal(m_A.to_dense(), product(2, N).to_dense()))
    elapsed = time.perf_counter() - t0
    ok = emp_uniform and not a_uniform and elapsed < 1.0
    _record(10, ok, f"empirical linkage (2,3)-margin uniform: {emp_uniform}; A's (2,3)-margin "
                    f"uniform: {a_uniform} (zeta {zeta1_exact(m_A):.3f}); {elapsed:.3f} s")


if __name__ == "__main__":
    import sys
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
