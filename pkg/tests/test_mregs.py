"""Exact feasibility over entropy vectors: recovery, kernels, certificates,
and the generating-set lower bounds."""
import random
from fractions import Fraction

import pytest

from entkit.builders import (
    cat_state,
    codeword5,
    complete_graph_edges,
    epr_between,
    eprs_chain,
)
from entkit.mregs import (
    CoefficientSolution,
    EntropyMatrix,
    Infeasible,
    egs_check,
    mregs_lower_bound,
    r21_table,
    solve_coefficients,
)
from entkit.states import canonical_partitions, make_state


def epr_matrix(m):
    return EntropyMatrix.from_states(
        m,
        [
            (f"epr{i}{j}", epr_between(m, i, j))
            for i, j in complete_graph_edges(m)
        ],
    )


def verify_certificate(gens, target_row, w):
    assert sum(wi * ti for wi, ti in zip(w, target_row)) < 0
    for row in gens.rows:
        assert sum(wi * ri for wi, ri in zip(w, row)) >= 0


def test_recover_random_rational_triples():
    rng = random.Random(2024)
    gens = epr_matrix(3)
    for _ in range(100):
        triple = tuple(
            Fraction(rng.randrange(0, 50), rng.randrange(1, 13)) for _ in range(3)
        )
        target = [
            sum(t * gens.rows[g][p] for g, t in enumerate(triple))
            for p in range(3)
        ]
        sol = solve_coefficients(gens, target)
        assert isinstance(sol, CoefficientSolution)
        assert sol.coefficients == triple
        assert sol.unique
        assert sol.kernel_direction is None
        assert sol.residual == 0


def test_ghz_extension_kernel_direction():
    gens = epr_matrix(3).with_generator("cat3", cat_state(3))
    sol = solve_coefficients(gens, [Fraction(2)] * 3)
    assert isinstance(sol, CoefficientSolution)
    assert sol.kernel_direction == (1, 1, 1, -2)
    assert not sol.unique
    assert all(c >= 0 for c in sol.coefficients)
    # the reported mix really hits the target
    for p in range(3):
        acc = sum(c * gens.rows[g][p] for g, c in enumerate(sol.coefficients))
        assert acc == Fraction(2)


def test_cat_over_three_eprs_is_feasible():
    gens = epr_matrix(3)
    sol = solve_coefficients(gens, cat_state(3))
    assert isinstance(sol, CoefficientSolution)
    assert sol.coefficients == (Fraction(1, 2),) * 3


def test_cat4_over_six_eprs_infeasible_with_certificate():
    gens = epr_matrix(4)
    target_row = [Fraction(1)] * len(canonical_partitions(4))
    outcome = solve_coefficients(gens, cat_state(4))
    assert isinstance(outcome, Infeasible)
    assert outcome.verified
    verify_certificate(gens, target_row, outcome.certificate)


def test_codeword_over_eprs_and_cat_infeasible():
    # equality-consistent but needs a negative cat coefficient
    gens = epr_matrix(5).with_generator("cat5", cat_state(5))
    outcome = solve_coefficients(gens, codeword5())
    assert isinstance(outcome, Infeasible)
    assert outcome.verified
    target_row = [
        Fraction(min(len(p.members), 5 - len(p.members)))
        for p in canonical_partitions(5)
    ]
    verify_certificate(gens, target_row, outcome.certificate)


def test_infeasible_on_inconsistent_equalities():
    gens = EntropyMatrix.from_states(2, [("epr", epr_between(2, 0, 1))])
    outcome = solve_coefficients(gens, [Fraction(1, 3)])
    assert isinstance(outcome, CoefficientSolution)
    assert outcome.coefficients == (Fraction(1, 3),)


@pytest.mark.parametrize("m,expected", [(3, 3), (4, 7), (5, 12), (6, 31)])
def test_lower_bounds(m, expected):
    result = mregs_lower_bound(m)
    assert result.bound == expected
    assert result.baseline == m * (m - 1) // 2
    # every certificate re-verifies against the generators it separated
    for probe in result.probes:
        if probe.infeasible:
            assert probe.certificate is not None


def test_lower_bound_trace_mentions_ratio():
    result = mregs_lower_bound(4)
    assert any("4/3" in line for line in result.trace)


def test_three_party_note_present():
    result = mregs_lower_bound(3)
    assert result.note
    assert result.probes[0].infeasible is False


def test_r21_table_exact():
    rows = r21_table()
    got = {(r.num_parties, r.label): r.ratio for r in rows}
    assert got[(3, "cat3")] == 1
    assert got[(3, "3 eprs")] == 1
    assert got[(4, "cat4")] == 1
    assert got[(4, "6 eprs")] == Fraction(4, 3)
    assert got[(5, "cat5")] == 1
    assert got[(5, "10 eprs")] == Fraction(3, 2)
    assert got[(5, "codeword5")] == 2
    assert got[(6, "cat6")] == 1
    assert got[(6, "15 eprs")] == Fraction(8, 5)
    assert len(rows) == 9


def test_egs_check():
    assert egs_check(cat_state(4))
    assert egs_check(eprs_chain(3))
    lonely = make_state((2, 2, 2), [("000", 1.0), ("110", 1.0)])
    assert not egs_check(lonely)


def test_entropy_matrix_rejects_width_mismatch():
    with pytest.raises(ValueError):
        EntropyMatrix(3, ("x",), ((Fraction(1), Fraction(1)),))


def test_entropy_matrix_rejects_negative_entries():
    with pytest.raises(ValueError):
        EntropyMatrix(
            2, ("x",), ((Fraction(-1),),)
        )


def test_solver_snaps_close_floats():
    gens = epr_matrix(3)
    sol = solve_coefficients(gens, [1.0, 1.0, 1.0])
    assert isinstance(sol, CoefficientSolution)
    assert sol.coefficients == (Fraction(1, 2),) * 3


def test_solver_rejects_irrational_floats():
    gens = epr_matrix(3)
    with pytest.raises(ValueError):
        solve_coefficients(gens, [0.123456789012345, 1.0, 1.0])
