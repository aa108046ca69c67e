"""Acceptance suite: twelve criteria, one test each.

Every test prints a PASS/FAIL line and records it for the summary that
pytest prints at the end of the run.
"""

import contextlib
import csv
import io as stdio
import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from capacity_ot import (
    CH,
    CH_STAR,
    Cycle,
    DistortionSpec,
    GroundSet,
    PotentialPair,
    TransportInstance,
    TransportPlan,
    additive_from_weights,
    are_comonotone,
    capacity_from_functional,
    capacity_from_values,
    check_cm,
    choquet_integral,
    choquet_quadrature,
    classical_ot_oracle,
    classify,
    distorted,
    distorted_product_plan,
    dual_objective,
    improve_plan,
    is_c_cyclically_monotone,
    is_dual_feasible,
    is_transport_plan,
    marginals,
    min_cycle_weight,
    plan_cost,
    potentials_from_monotone_set,
    push_forward,
    solve_dual,
    solve_optimal,
    support,
)
from capacity_ot import io
from capacity_ot.cli import run_command
from capacity_ot.duality import c_transform_x, c_transform_y
from capacity_ot.generate import default_corpus

import conftest
from oracles import grid_search_2x2, random_capacity, random_supermodular

REPORT_DIR = Path(__file__).resolve().parent.parent / "reports"


@contextlib.contextmanager
def criterion(num, title):
    detail = {"text": ""}
    try:
        yield detail
    except BaseException as exc:
        conftest.CRITERIA[num] = (False, title, f"{type(exc).__name__}: {str(exc).splitlines()[0][:120] if str(exc) else ''}")
        print(f"FAIL [{num}] {title}")
        raise
    conftest.CRITERIA[num] = (True, title, detail["text"])
    print(f"PASS [{num}] {title} {detail['text']}")


@pytest.fixture(scope="module")
def corpus():
    return default_corpus(seed=0)


@pytest.fixture(scope="module")
def corpus_solutions(corpus):
    return {name: solve_optimal(inst, CH_STAR) for name, inst in corpus}


def random_comonotone_pair(rng, n):
    base = rng.normal(size=n)
    order = np.argsort(base)
    f, g = np.empty(n), np.empty(n)
    f[order] = np.sort(rng.normal(size=n) * 3)
    g[order] = np.sort(rng.normal(size=n) * 3)
    ties = rng.random(n) < 0.2
    if ties.any():
        f[ties] = f[ties][0]
        g[ties] = g[ties][0]
    return f, g


def test_01_choquet_oracle_equivalence():
    with criterion(1, "sorted form equals both quadratures (1000 pairs, 1e-12)") as d:
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            mu = random_capacity(rng, n)
            f = rng.normal(size=n) * rng.choice([0.1, 1, 10])
            if rng.random() < 0.3:
                f = np.round(f, 1)
            s = choquet_integral(f, mu)
            worst = max(worst, abs(s - choquet_quadrature(f, mu)), abs(s - choquet_quadrature(f, mu, strict=True)))
        d["text"] = f"max diff {worst:.1e}"
        assert worst <= 1e-12


def test_02_functional_properties():
    with criterion(2, "positivity, monotonicity, homogeneity, calibration, translation, "
                      "comonotonic additivity, superadditivity, counterexample") as d:
        rng = np.random.default_rng(2)
        tol = 1e-9
        for _ in range(500):
            n = int(rng.integers(1, 7))
            mu = random_capacity(rng, n)
            f = rng.normal(size=n)
            assert choquet_integral(np.abs(f), mu) >= 0
            assert choquet_integral(f, mu) <= choquet_integral(f + rng.uniform(0, 1, n), mu) + tol
            a = float(rng.uniform(0, 5))
            assert abs(choquet_integral(a * f, mu) - a * choquet_integral(f, mu)) <= tol
            t = float(rng.normal() * 5)
            assert abs(choquet_integral(np.full(n, t), mu) - t) <= tol
            assert abs(choquet_integral(f + t, mu) - choquet_integral(f, mu) - t) <= tol
        worst_como = 0.0
        for _ in range(500):
            n = int(rng.integers(1, 7))
            mu = random_capacity(rng, n)
            f, g = random_comonotone_pair(rng, n)
            assert are_comonotone(f, g)
            worst_como = max(worst_como, abs(choquet_integral(f + g, mu) - choquet_integral(f, mu)
                                             - choquet_integral(g, mu)))
        assert worst_como <= tol
        worst_super = np.inf
        for _ in range(500):
            n = int(rng.integers(1, 7))
            mu = random_supermodular(rng, n)
            f, g = rng.normal(size=n), rng.normal(size=n)
            If, Ig = choquet_integral(f, mu), choquet_integral(g, mu)
            worst_super = min(worst_super,
                              choquet_integral(f + g, mu) - If - Ig,
                              choquet_integral(np.maximum(f, g), mu) + choquet_integral(np.minimum(f, g), mu) - If - Ig)
        assert worst_super >= -tol
        sq = capacity_from_values(GroundSet.of_size(2), [0, 0.25, 0.25, 1])
        lhs = choquet_integral([1, 1], sq)
        rhs = choquet_integral([1, 0], sq) + choquet_integral([0, 1], sq)
        assert (lhs, rhs) == (1.0, 0.5)
        d["text"] = f"comonotone err {worst_como:.1e}, min super slack {worst_super:.1e}"


def test_03_change_of_variables():
    with criterion(3, "push-forward change of variables (500 cases, 1e-12)") as d:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(500):
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 6))
            mu = random_capacity(rng, n)
            T = rng.integers(0, m, size=n)
            g = rng.uniform(0, 5, size=m)
            if rng.random() < 0.3:
                g = np.round(g)
            lhs = choquet_integral(g, push_forward(mu, T, GroundSet.of_size(m)))
            worst = max(worst, abs(lhs - choquet_integral(g[T], mu)))
        d["text"] = f"max diff {worst:.1e}"
        assert worst <= 1e-12


def test_04_representation_round_trip():
    with criterion(4, "capacity -> functional -> capacity (200 cases, 1e-12)") as d:
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(1, 6))
            mu = random_capacity(rng, n)
            back = capacity_from_functional(lambda chi: choquet_integral(chi, mu), mu.ground)
            worst = max(worst, float(np.max(np.abs(back.values - mu.values))))
        d["text"] = f"max diff {worst:.1e}"
        assert worst <= 1e-12


def test_05_product_plan_feasibility():
    with criterion(5, "distorted product plans are exact supermodular transport plans (100 cases)"):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            P, Q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m))
            alpha = float(rng.uniform(1, 3))
            X, Y = GroundSet.of_size(n, "x"), GroundSet.of_size(m, "y")
            pi = distorted_product_plan(P, Q, alpha, X, Y)
            mu = distorted(DistortionSpec(tuple(P), alpha=alpha), X)
            nu = distorted(DistortionSpec(tuple(Q), alpha=alpha), Y)
            check = is_transport_plan(pi, mu, nu, tol=0.0)
            assert check, check
            assert classify(pi.plan, 1e-12).supermodular


def test_06_additive_anchor():
    with criterion(6, "additive marginals: ch-star = classical = dual, ch <= classical") as d:
        rng = np.random.default_rng(6)
        worst, slowest = 0.0, 0.0
        for shape in ((2, 2), (3, 3)):
            for _ in range(50):
                n, m = shape
                X, Y = GroundSet.of_size(n, "x"), GroundSet.of_size(m, "y")
                inst = TransportInstance(X, Y, np.round(rng.uniform(0, 10, size=shape), 3),
                                         additive_from_weights(rng.dirichlet(np.ones(n)), X),
                                         additive_from_weights(rng.dirichlet(np.ones(m)), Y))
                t0 = time.perf_counter()
                star = solve_optimal(inst, CH_STAR)
                slowest = max(slowest, time.perf_counter() - t0)
                classical = classical_ot_oracle(inst)
                dual = solve_dual(inst, primal=star.cost)
                ch = solve_optimal(inst, CH)
                worst = max(worst, abs(star.cost - classical), abs(dual.dual_value - classical))
                assert abs(star.cost - classical) <= 1e-7
                assert abs(dual.dual_value - classical) <= 1e-7
                assert ch.cost <= classical + 1e-9
        d["text"] = f"max diff {worst:.1e}, slowest ch-star solve {slowest:.2f}s"
        assert slowest < 60


def test_07_grid_oracle():
    with criterion(7, "2x2 LP optimum <= grid-search optimum (10 instances, q=4)") as d:
        rng = np.random.default_rng(7)
        X, Y = GroundSet.of_size(2, "x"), GroundSet.of_size(2, "y")
        margins = [np.array(v) / 4 for v in itertools.product(range(5), repeat=2)
                   if v[0] <= 4 and v[1] <= 4]
        done, worst = 0, -np.inf
        while done < 10:
            a, b = margins[rng.integers(len(margins))], margins[rng.integers(len(margins))]
            mu_vals, nu_vals = np.array([0, a[0], a[1], 1]), np.array([0, b[0], b[1], 1])
            cost = np.round(rng.uniform(0, 10, size=(2, 2)), 2)
            inst = TransportInstance(X, Y, cost, capacity_from_values(X, mu_vals), capacity_from_values(Y, nu_vals))
            for cls, supermodular in ((CH, False), (CH_STAR, True)):
                grid = grid_search_2x2(cost, mu_vals, nu_vals, q=4, supermodular=supermodular)
                sol = solve_optimal(inst, cls)
                if not np.isfinite(grid):
                    continue  # no grid plan in this class
                assert sol.feasible and sol.cost <= grid + 1e-9
                worst = max(worst, sol.cost - grid)
            done += 1
        d["text"] = f"max (LP - grid) {worst:.2e}"


def test_08_optimal_supports_monotone(corpus, corpus_solutions):
    with criterion(8, "every ch-star optimum has a c-cyclically monotone support") as d:
        checked, worst = 0, np.inf
        for name, inst in corpus:
            sol = corpus_solutions[name]
            if not sol.feasible:
                continue
            S = support(sol.plan, 1e-9)
            w = min_cycle_weight(S, inst.cost)
            assert is_c_cyclically_monotone(S, inst.cost), name
            assert w >= -1e-7, (name, w)
            worst = min(worst, w)
            checked += 1
        assert checked >= 30
        d["text"] = f"{checked} optima, min cycle weight {worst:.3g}"


def test_09_improvement_step():
    with criterion(9, "cycle exchange lowers cost by alpha*|weight| with marginals kept") as d:
        X, Y = GroundSet.of_size(2, "x"), GroundSet.of_size(2, "y")
        anti = additive_from_weights([0, 0.5, 0.5, 0], GroundSet.product(X, Y))
        pi = TransportPlan(anti, (2, 2), CH_STAR)
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        rep = improve_plan(pi, Cycle(((0, 1), (1, 0)), (1, 0)), cost)
        assert abs(rep.cost_before - 1) <= 1e-12 and abs(rep.cost_after - 0.5) <= 1e-12
        for a, b in zip(marginals(pi), marginals(rep.gamma)):
            assert np.max(np.abs(a.values - b.values)) <= 1e-12

        rng = np.random.default_rng(9)
        done, worst = 0, 0.0
        while done < 100:
            n, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            P, Q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m))
            pi = distorted_product_plan(P, Q, float(rng.uniform(1, 3)))
            cost = np.round(rng.uniform(0, 10, size=(n, m)), 3)
            found = is_c_cyclically_monotone(support(pi), cost)
            if found:
                continue
            cyc = found.cycle
            rep = improve_plan(pi, cyc, cost)
            mu, nu = marginals(pi)
            check = is_transport_plan(rep.gamma, mu, nu, tol=1e-12)
            assert check, check
            expected = rep.alpha * cyc.weight(cost)
            assert expected < 0
            err = abs((rep.cost_after - rep.cost_before) - expected)
            worst = max(worst, err)
            assert err <= 1e-12, err
            done += 1
        d["text"] = f"max decrease error {worst:.1e}"


def _random_feasible_pairs(rng, cost, k):
    n, m = cost.shape
    for _ in range(k):
        psi = rng.uniform(-5, 10, size=m)
        phi = c_transform_x(psi, cost)
        yield PotentialPair(phi, c_transform_y(phi, cost))
        phi = rng.uniform(-5, 10, size=n)
        yield PotentialPair(phi, c_transform_y(phi, cost))


def test_10_duality(corpus, corpus_solutions):
    with criterion(10, "weak duality everywhere, zero gap on additive instances, gaps reported") as d:
        rng = np.random.default_rng(10)
        rows = []
        for name, inst in corpus:
            sol = corpus_solutions[name]
            rep = solve_dual(inst, primal=sol.cost if sol.feasible else None)
            assert is_dual_feasible(rep.pair, inst.cost)
            additive = classify(inst.mu).additive and classify(inst.nu).additive
            if sol.feasible:
                assert rep.dual_value <= sol.cost + 1e-9, name
                for pair in _random_feasible_pairs(rng, inst.cost, 25):
                    assert is_dual_feasible(pair, inst.cost)
                    assert dual_objective(pair, inst.mu, inst.nu) <= sol.cost + 1e-9, name
            if additive:
                assert abs(rep.gap) <= 1e-6, (name, rep.gap)
            rows.append({"name": name, "n": inst.shape[0], "m": inst.shape[1], "additive": additive,
                         "primal_ch_star": sol.cost if sol.feasible else "", "dual": rep.dual_value,
                         "gap": "" if rep.gap is None else rep.gap,
                         "flagged": rep.gap is not None and abs(rep.gap) > 1e-6})
        REPORT_DIR.mkdir(exist_ok=True)
        with open(REPORT_DIR / "duality_gaps.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        flagged = [r["name"] for r in rows if r["flagged"]]
        max_gap = max(abs(r["gap"]) for r in rows if r["gap"] != "")
        d["text"] = f"{len(rows)} instances, {len(flagged)} gaps flagged above 1e-6, max |gap| {max_gap:.1e}"


def test_11_cm_conditions(corpus, corpus_solutions):
    with criterion(11, "potentials on optimal supports satisfy CM1-CM3 and are dual feasible") as d:
        worst, checked, empty = 0.0, 0, 0
        for name, inst in corpus:
            sol = corpus_solutions[name]
            if not sol.feasible:
                continue
            S = support(sol.plan, 1e-9)
            if not S.points:
                empty += 1  # no point to be tight on
                continue
            assert is_c_cyclically_monotone(S, inst.cost), name
            p = potentials_from_monotone_set(S, inst.cost)
            rep = check_cm(p, S, inst.cost, tol=1e-9)
            worst = max(worst, rep.cm1, rep.cm2, rep.cm3)
            assert rep, (name, rep)
            assert is_dual_feasible(p, inst.cost, tol=1e-9)
            checked += 1
        assert checked >= 30
        d["text"] = f"{checked} supports ({empty} optima with empty support), max residual {worst:.1e}"


def _pipeline_bytes(tmp: Path) -> bytes:
    out = []
    for name, inst in default_corpus(seed=0):
        path = tmp / f"{name}.json"
        io.save_instance(inst, path)
        out.append(path.read_bytes())
        buf = stdio.StringIO()
        run_command(["solve", str(path), "--class", "ch-star"], buf, stdio.StringIO())
        out.append(buf.getvalue().encode())
        buf = stdio.StringIO()
        run_command(["dual", str(path)], buf, stdio.StringIO())
        out.append(buf.getvalue().replace(str(path), name).encode())
    return b"".join(out)


def test_12_determinism(tmp_path):
    with criterion(12, "byte-identical JSON across two runs on the full corpus") as d:
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        first, second = _pipeline_bytes(tmp_path / "a"), _pipeline_bytes(tmp_path / "b")
        assert first == second
        d["text"] = f"{len(first)} bytes"
