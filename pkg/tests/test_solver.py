import itertools
import time

import numpy as np
import pytest

from crewsched.errors import InvalidInstanceError
from crewsched.solver import (
    EQ,
    GE,
    LE,
    MAXIMIZE,
    MINIMIZE,
    InfeasibleLpError,
    IpInstance,
    LinearConstraint,
    constraint_violations,
    export_lp_text,
    lp_relax_solve,
    parse_lp_text,
    solve,
)
from crewsched.selftest import brute_force_optimum, _random_ip


def ip(num_vars, objective, sense, constraints, names=None):
    return IpInstance(num_vars, tuple(objective), sense, tuple(constraints), names)


class TestSolveBasics:
    def test_dominant_coefficient(self):
        prob = ip(2, [(0, 1.0), (1, 2.0)], MAXIMIZE, [LinearConstraint(((0, 1.0), (1, 1.0)), LE, 1.0)])
        res = solve(prob)
        assert res.status == "optimal"
        assert res.objective_value == 2.0
        assert res.values == (0, 1)

    def test_contradictory_equalities_infeasible(self):
        prob = ip(
            1,
            [(0, 1.0)],
            MAXIMIZE,
            [LinearConstraint(((0, 1.0),), EQ, 1.0), LinearConstraint(((0, 1.0),), EQ, 0.0)],
        )
        assert solve(prob).status == "infeasible"

    def test_twelve_var_knapsack_matches_enumeration(self):
        rng = np.random.default_rng(99)
        weights = rng.integers(1, 10, size=12)
        values = rng.integers(1, 10, size=12)
        cap = 25.0
        prob = ip(
            12,
            [(int(i), float(v)) for i, v in enumerate(values)],
            MAXIMIZE,
            [LinearConstraint(tuple((int(i), float(w)) for i, w in enumerate(weights)), LE, cap)],
        )
        best = max(
            sum(v * x for v, x in zip(values, vec))
            for vec in itertools.product((0, 1), repeat=12)
            if sum(w * x for w, x in zip(weights, vec)) <= cap
        )
        res = solve(prob)
        assert res.status == "optimal"
        assert res.objective_value == pytest.approx(float(best), abs=1e-9)

    def test_deterministic_across_calls(self):
        rng = np.random.default_rng(5)
        prob = _random_ip(rng)
        first = solve(prob, time_limit=30)
        second = solve(prob, time_limit=30)
        assert first.values == second.values
        assert first.objective_value == second.objective_value
        assert first.nodes_explored == second.nodes_explored

    def test_rejects_nonpositive_time_limit(self):
        prob = ip(1, [(0, 1.0)], MAXIMIZE, [])
        with pytest.raises(ValueError):
            solve(prob, time_limit=0)


class TestOracleEquivalence:
    def test_matches_brute_force_on_random_programs(self):
        rng = np.random.default_rng(2718)
        for _ in range(150):
            prob = _random_ip(rng)
            want = brute_force_optimum(prob)
            res = solve(prob, time_limit=30)
            if want is None:
                assert res.status == "infeasible"
            else:
                assert res.status == "optimal"
                assert res.objective_value == pytest.approx(want, abs=1e-9)
                assert constraint_violations(prob, res.values) == []

    def test_solution_vector_satisfies_constraints_exactly(self):
        rng = np.random.default_rng(31)
        for _ in range(60):
            prob = _random_ip(rng)
            res = solve(prob, time_limit=30)
            if res.has_solution:
                assert constraint_violations(prob, res.values) == []
                recomputed = sum(c * res.values[i] for i, c in prob.objective)
                assert abs(recomputed - res.objective_value) <= 1e-9


class TestLpRelaxation:
    def test_single_variable_scaled(self):
        prob = ip(1, [(0, 1.0)], MAXIMIZE, [LinearConstraint(((0, 2.0),), LE, 1.0)])
        bound, x = lp_relax_solve(prob)
        assert bound == pytest.approx(0.5, abs=1e-9)
        assert x[0] == pytest.approx(0.5, abs=1e-9)

    def test_no_constraints_hits_box_bound(self):
        prob = ip(1, [(0, 1.0)], MAXIMIZE, [])
        bound, x = lp_relax_solve(prob)
        assert bound == pytest.approx(1.0, abs=1e-12)
        assert x[0] == pytest.approx(1.0, abs=1e-12)

    def test_bound_dominates_integer_optimum(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            prob = _random_ip(rng)
            res = solve(prob, time_limit=30)
            if not res.has_solution:
                continue
            try:
                bound, _ = lp_relax_solve(prob)
            except InfeasibleLpError:
                pytest.fail("LP infeasible but integer program solvable")
            if prob.sense == MAXIMIZE:
                assert bound >= res.objective_value - 1e-7
            else:
                assert bound <= res.objective_value + 1e-7

    def test_integral_relaxation_matches_solver(self):
        # Interval-free assignment structure has an integral relaxation.
        prob = ip(
            4,
            [(0, 3.0), (1, 1.0), (2, 2.0), (3, 1.5)],
            MAXIMIZE,
            [
                LinearConstraint(((0, 1.0), (1, 1.0)), EQ, 1.0),
                LinearConstraint(((2, 1.0), (3, 1.0)), EQ, 1.0),
            ],
        )
        bound, x = lp_relax_solve(prob)
        res = solve(prob)
        assert bound == pytest.approx(res.objective_value, abs=1e-9)

    def test_infeasible_relaxation_signalled(self):
        prob = ip(
            1,
            [(0, 1.0)],
            MAXIMIZE,
            [LinearConstraint(((0, 1.0),), GE, 2.0)],
        )
        with pytest.raises(InfeasibleLpError):
            lp_relax_solve(prob)


class TestTimeLimits:
    def _hard_instance(self, rng, n=26):
        # Equality-loaded random program: enough branching to outlast a tiny budget.
        cons = []
        for _ in range(12):
            k = int(rng.integers(3, n + 1))
            idx = rng.choice(n, size=k, replace=False)
            coeffs = rng.integers(-9, 10, size=k)
            coeffs[coeffs == 0] = 1
            cons.append(
                LinearConstraint(
                    tuple((int(i), float(c)) for i, c in zip(idx, coeffs)),
                    LE,
                    float(rng.integers(0, 6)),
                )
            )
        obj = [(int(i), float(rng.uniform(0.1, 1.0))) for i in range(n)]
        return ip(n, obj, MAXIMIZE, cons)

    def test_timeout_reports_without_crash(self):
        rng = np.random.default_rng(17)
        prob = self._hard_instance(rng)
        res = solve(prob, time_limit=0.02)
        assert res.status in ("optimal", "feasible-incumbent", "timeout-no-incumbent", "infeasible")
        if res.status == "feasible-incumbent":
            assert res.timed_out
            assert constraint_violations(prob, res.values) == []

    def test_longer_limit_never_worse(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            prob = _random_ip(rng)
            short = solve(prob, time_limit=0.05)
            long = solve(prob, time_limit=30.0)
            if short.has_solution and long.has_solution:
                sense = 1.0 if prob.sense == MAXIMIZE else -1.0
                assert sense * long.objective_value >= sense * short.objective_value - 1e-9


class TestLpText:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            prob = _random_ip(rng)
            parsed = parse_lp_text(export_lp_text(prob))
            named = IpInstance(
                prob.num_vars,
                prob.objective,
                prob.sense,
                prob.constraints,
                tuple(prob.name_of(j) for j in range(prob.num_vars)),
            )
            assert parsed == named

    def test_structure_of_export(self):
        prob = ip(
            2,
            [(0, 1.0), (1, -2.5)],
            MINIMIZE,
            [LinearConstraint(((0, 1.0), (1, 1.0)), GE, 1.0)],
            names=("alpha", "beta"),
        )
        text = export_lp_text(prob)
        lines = text.splitlines()
        assert sum(1 for l in lines if l.strip().startswith("obj:")) == 1
        assert "Minimize" in lines
        assert " c0: 1.0 alpha + 1.0 beta >= 1.0" in text
        assert "alpha" in text and "beta" in text

    def test_synthetic_names_when_missing(self):
        prob = ip(3, [(0, 1.0)], MAXIMIZE, [])
        text = export_lp_text(prob)
        for name in ("x0", "x1", "x2"):
            assert name in text

    def test_malformed_text_rejected(self):
        from crewsched.errors import FormatError

        with pytest.raises(FormatError):
            parse_lp_text("Maximize\n obj: x0\nSubject To\n c0: x0 ?? 1\nBinaries\n x0\nEnd\n")
        with pytest.raises(FormatError):
            parse_lp_text("obj: x0\n")


class TestModelValidation:
    def test_duplicate_objective_index_rejected(self):
        with pytest.raises(InvalidInstanceError):
            ip(2, [(0, 1.0), (0, 2.0)], MAXIMIZE, [])

    def test_out_of_range_index_rejected(self):
        with pytest.raises(InvalidInstanceError):
            ip(1, [(3, 1.0)], MAXIMIZE, [])

    def test_empty_constraint_rejected(self):
        with pytest.raises(InvalidInstanceError):
            LinearConstraint((), LE, 1.0)

    def test_summary_line_mentions_all_stats(self):
        prob = ip(1, [(0, 1.0)], MAXIMIZE, [])
        line = solve(prob).summary_line()
        for token in ("status=optimal", "objective=1", "nodes=", "time="):
            assert token in line
