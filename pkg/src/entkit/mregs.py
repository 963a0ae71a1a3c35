"""Exact-rational linear algebra over partial-entropy vectors.

Whether n copies of one state can asymptotically stand in for a tensor
combination of others is constrained by additivity: the combination's
entropy vector must equal the nonnegative rational mix of the generators'
vectors, partition by partition. For the standard families (EPR pairs, cat
states, the five-qubit codeword) every entry is an exact integer, so the
whole question reduces to exact linear algebra: solve for the mix, decide
uniqueness, or produce a separating certificate, a partition weighting
that is nonnegative against every generator yet negative against the
target. Counting certified-independent states gives lower bounds on how
many states a reversible generating set must contain.

Everything here works over `fractions.Fraction`; float inputs are accepted
only when they are within 1e-9 of a small rational.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence, Union

from .entropy import (
    entropy_vector,
    exact_entropy_ratio_r21,
    exact_entropy_vector,
    exact_entropy_vector_of_factors,
)
from .states import PureState, canonical_partitions, party_letters

__all__ = [
    "EntropyMatrix",
    "CoefficientSolution",
    "Infeasible",
    "solve_coefficients",
    "MregsBound",
    "ProbeResult",
    "mregs_lower_bound",
    "R21Row",
    "r21_table",
    "egs_check",
]

_FLOAT_SNAP_TOL = 1e-9


def _snap(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    fr = Fraction(float(value)).limit_denominator(1_000_000)
    if abs(fr - Fraction(float(value))) > _FLOAT_SNAP_TOL:
        raise ValueError(f"entry {value!r} is not rational within tolerance")
    return fr


def _as_row(num_parties: int, vector) -> tuple[Fraction, ...]:
    """Normalize a state / mapping / sequence to an exact partition row."""
    parts = canonical_partitions(num_parties)
    if isinstance(vector, PureState):
        exact = exact_entropy_vector(vector)
        return tuple(exact[p] for p in parts)
    if isinstance(vector, Mapping):
        row = []
        for p in parts:
            if p in vector:
                row.append(_snap(vector[p]))
            elif p.members in vector:
                row.append(_snap(vector[p.members]))
            else:
                raise ValueError(f"vector is missing partition {p.label}")
        return tuple(row)
    row = tuple(_snap(x) for x in vector)
    if len(row) != len(parts):
        raise ValueError(
            f"expected {len(parts)} entries for {num_parties} parties, got {len(row)}"
        )
    return row


@dataclass(frozen=True)
class EntropyMatrix:
    """Labeled generators with one exact entropy row each.

    Rows are ordered by the canonical partitions of `num_parties`; all
    entries must be nonnegative.
    """

    num_parties: int
    labels: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        width = len(canonical_partitions(self.num_parties))
        if len(self.labels) != len(self.rows):
            raise ValueError("need exactly one label per row")
        for label, row in zip(self.labels, self.rows):
            if len(row) != width:
                raise ValueError(f"row {label!r} has {len(row)} entries, expected {width}")
            if any(x < 0 for x in row):
                raise ValueError(f"row {label!r} has a negative entropy entry")

    @classmethod
    def from_states(
        cls, num_parties: int, entries: Sequence[tuple[str, object]]
    ) -> "EntropyMatrix":
        labels = tuple(label for label, _ in entries)
        rows = tuple(_as_row(num_parties, vec) for _, vec in entries)
        return cls(num_parties, labels, rows)

    def with_generator(self, label: str, vector) -> "EntropyMatrix":
        return EntropyMatrix(
            self.num_parties,
            self.labels + (label,),
            self.rows + (_as_row(self.num_parties, vector),),
        )

    @property
    def num_generators(self) -> int:
        return len(self.rows)

    def column_matrix(self) -> list[list[Fraction]]:
        """Equations-by-generators matrix (one row per partition)."""
        width = len(canonical_partitions(self.num_parties))
        return [
            [self.rows[g][p] for g in range(self.num_generators)]
            for p in range(width)
        ]


@dataclass(frozen=True)
class CoefficientSolution:
    """Exact nonnegative mix reproducing the target entropy vector.

    When the equality system has a kernel the mix is not unique;
    `kernel_direction` then holds a primitive integer direction of it
    (first nonzero entry positive) and `unique` reports whether the
    feasible set is nevertheless a single point.
    """

    labels: tuple[str, ...]
    coefficients: tuple[Fraction, ...]
    unique: bool
    kernel_direction: tuple[int, ...] | None
    residual: Fraction


@dataclass(frozen=True)
class Infeasible:
    """Certificate that no nonnegative mix reproduces the target.

    `certificate` weights the canonical partitions: its inner product with
    every generator row is nonnegative, with the target strictly negative,
    so no nonnegative combination of generators can equal the target.
    `verified` records an independent exact re-check of both properties.
    """

    labels: tuple[str, ...]
    certificate: tuple[Fraction, ...]
    verified: bool
    reason: str


def _eliminate(
    matrix: list[list[Fraction]], rhs: list[Fraction]
) -> tuple[list[list[Fraction]], list[Fraction], list[list[Fraction]], list[int]]:
    """Gaussian elimination with a full record of the row operations.

    Returns (reduced matrix, reduced rhs, record, pivot columns) where each
    reduced row equals record[i] applied to the original rows.
    """
    rows = [list(r) for r in matrix]
    b = list(rhs)
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    record = [
        [Fraction(int(i == j)) for j in range(n_rows)] for i in range(n_rows)
    ]
    pivots: list[int] = []
    rank = 0
    for col in range(n_cols):
        pivot = next(
            (r for r in range(rank, n_rows) if rows[r][col] != 0), None
        )
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        b[rank], b[pivot] = b[pivot], b[rank]
        record[rank], record[pivot] = record[pivot], record[rank]
        inv = Fraction(1) / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        b[rank] *= inv
        record[rank] = [x * inv for x in record[rank]]
        for r in range(n_rows):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
                b[r] -= factor * b[rank]
                record[r] = [
                    x - factor * y for x, y in zip(record[r], record[rank])
                ]
        pivots.append(col)
        rank += 1
    return rows, b, record, pivots


def _solve_exact(
    matrix: list[list[Fraction]], rhs: list[Fraction]
) -> tuple[list[Fraction], list[list[Fraction]]] | list[Fraction]:
    """Solve matrix x = rhs over the rationals.

    Returns (particular solution, kernel basis) when consistent, or the
    inconsistency certificate row w (with w.matrix = 0 and w.rhs != 0)
    otherwise.
    """
    rows, b, record, pivots = _eliminate(matrix, rhs)
    n_cols = len(matrix[0]) if matrix else 0
    rank = len(pivots)
    for r in range(rank, len(rows)):
        if b[r] != 0:
            return record[r]
    particular = [Fraction(0)] * n_cols
    for i, col in enumerate(pivots):
        particular[col] = b[i]
    free = [c for c in range(n_cols) if c not in pivots]
    kernel: list[list[Fraction]] = []
    for f_col in free:
        direction = [Fraction(0)] * n_cols
        direction[f_col] = Fraction(1)
        for i, col in enumerate(pivots):
            direction[col] = -rows[i][f_col]
        kernel.append(direction)
    return particular, kernel


def _primitive_direction(direction: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational direction to coprime integers, first nonzero > 0."""
    denominators = [x.denominator for x in direction]
    scale = 1
    for d in denominators:
        scale = scale * d // gcd(scale, d)
    ints = [int(x * scale) for x in direction]
    common = 0
    for x in ints:
        common = gcd(common, abs(x))
    if common:
        ints = [x // common for x in ints]
    first = next((x for x in ints if x != 0), 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


# A tracked inequality const + coeffs . y >= 0, carrying the nonnegative
# multipliers lam over the original inequalities it was combined from.
_Ineq = tuple[Fraction, list[Fraction], list[Fraction]]


def _fourier_motzkin(
    inequalities: list[_Ineq], keep: int | None = None
) -> tuple[list[_Ineq], list[list[_Ineq]]]:
    """Eliminate variables from a tracked inequality system.

    Eliminates every variable (or all but `keep`). Returns the final
    system and the per-stage snapshots used for back-substitution.
    """
    system = [
        (c, list(coeffs), list(lam)) for c, coeffs, lam in inequalities
    ]
    n_vars = len(system[0][1]) if system else 0
    stages: list[list[_Ineq]] = []
    order = [v for v in range(n_vars) if v != keep]
    for var in order:
        stages.append([(c, list(k), list(l)) for c, k, l in system])
        positive = [q for q in system if q[1][var] > 0]
        negative = [q for q in system if q[1][var] < 0]
        neutral = [q for q in system if q[1][var] == 0]
        merged: list[_Ineq] = list(neutral)
        for cp, kp, lp in positive:
            for cn, kn, ln in negative:
                a = kp[var]
                b = -kn[var]
                const = b * cp + a * cn
                coeffs = [b * x + a * y for x, y in zip(kp, kn)]
                lam = [b * x + a * y for x, y in zip(lp, ln)]
                merged.append((const, coeffs, lam))
        system = merged
    return system, stages


def _feasible_point(
    x0: list[Fraction], kernel: list[list[Fraction]]
) -> tuple[list[Fraction] | None, list[Fraction] | None]:
    """Find y with x0 + K y >= 0, or the certifying multipliers if none.

    Returns (y, None) on success and (None, lam) on infeasibility, where
    lam >= 0 satisfies lam . x0 < 0 and lam . K = 0.
    """
    n_gens = len(x0)
    f = len(kernel)
    inequalities: list[_Ineq] = []
    for g in range(n_gens):
        coeffs = [kernel[j][g] for j in range(f)]
        lam = [Fraction(int(i == g)) for i in range(n_gens)]
        inequalities.append((x0[g], coeffs, lam))
    final, stages = _fourier_motzkin(inequalities)
    for const, _, lam in final:
        if const < 0:
            return None, list(lam)
    order = list(range(f))
    y = [Fraction(0)] * f
    for stage_index in range(f - 1, -1, -1):
        var = order[stage_index]
        system = stages[stage_index]
        lower = None
        upper = None
        for const, coeffs, _ in system:
            a = coeffs[var]
            if a == 0:
                continue
            rest = const + sum(
                coeffs[v] * y[v] for v in range(f) if v != var and coeffs[v] != 0
            )
            bound = -rest / a
            if a > 0:
                lower = bound if lower is None else max(lower, bound)
            else:
                upper = bound if upper is None else min(upper, bound)
        if lower is not None:
            y[var] = lower
        elif upper is not None:
            y[var] = min(upper, Fraction(0))
    return y, None


def _coordinate_pinned(
    x0: list[Fraction], kernel: list[list[Fraction]], var: int
) -> bool:
    """Whether coordinate `var` of the feasible set takes a single value."""
    n_gens = len(x0)
    f = len(kernel)
    inequalities: list[_Ineq] = []
    for g in range(n_gens):
        coeffs = [kernel[j][g] for j in range(f)]
        inequalities.append((x0[g], coeffs, []))
    final, _ = _fourier_motzkin(inequalities, keep=var)
    lower = None
    upper = None
    for const, coeffs, _ in final:
        a = coeffs[var]
        if a == 0:
            continue
        bound = -const / a
        if a > 0:
            lower = bound if lower is None else max(lower, bound)
        else:
            upper = bound if upper is None else min(upper, bound)
    return lower is not None and upper is not None and lower == upper


def solve_coefficients(
    gens: EntropyMatrix, target
) -> Union[CoefficientSolution, Infeasible]:
    """Express a target entropy vector as a nonnegative mix of generators.

    Solves the per-partition equality system exactly, then decides whether
    the solution set meets the nonnegative orthant. Infeasibility of either
    kind (inconsistent equalities, or consistency only with some negative
    coefficient) is returned with a separating partition weighting, checked
    exactly before being handed back.
    """
    t = list(_as_row(gens.num_parties, target))
    matrix = gens.column_matrix()
    outcome = _solve_exact(matrix, t)
    if not isinstance(outcome, tuple):
        w = outcome
        if sum(wi * ti for wi, ti in zip(w, t)) > 0:
            w = [-x for x in w]
        return _certified_infeasible(
            gens, t, w, "the equality system itself is inconsistent"
        )
    x0, kernel = outcome
    y, lam = _feasible_point(x0, kernel)
    if y is None:
        # lift the inequality multipliers to a partition weighting
        transpose = [
            [gens.rows[g][p] for p in range(len(t))]
            for g in range(gens.num_generators)
        ]
        lifted = _solve_exact(transpose, lam)
        if not isinstance(lifted, tuple):
            raise RuntimeError("multipliers failed to lift; this is a bug")
        w = lifted[0]
        if sum(wi * ti for wi, ti in zip(w, t)) > 0:
            w = [-x for x in w]
        return _certified_infeasible(
            gens,
            t,
            w,
            "the equality system is solvable only with negative coefficients",
        )
    solution = list(x0)
    for j, direction in enumerate(kernel):
        if y[j] == 0:
            continue
        solution = [s + y[j] * d for s, d in zip(solution, direction)]
    residual = Fraction(0)
    for p in range(len(t)):
        acc = sum(
            gens.rows[g][p] * solution[g] for g in range(gens.num_generators)
        )
        residual = max(residual, abs(acc - t[p]))
    unique = not kernel or all(
        _coordinate_pinned(x0, kernel, j) for j in range(len(kernel))
    )
    direction = _primitive_direction(kernel[0]) if kernel else None
    return CoefficientSolution(
        labels=gens.labels,
        coefficients=tuple(solution),
        unique=unique,
        kernel_direction=direction,
        residual=residual,
    )


def _certified_infeasible(
    gens: EntropyMatrix, t: list[Fraction], w: list[Fraction], reason: str
) -> Infeasible:
    against_target = sum(wi * ti for wi, ti in zip(w, t))
    ok = against_target < 0
    for row in gens.rows:
        if sum(wi * ri for wi, ri in zip(w, row)) < 0:
            ok = False
            break
    return Infeasible(
        labels=gens.labels,
        certificate=tuple(w),
        verified=ok,
        reason=reason,
    )


# --- lower bounds on reversible generating sets -------------------------------


def _epr_generators(m: int) -> list[tuple[str, PureState]]:
    from .builders import epr_between

    out = []
    for i, j in itertools.combinations(range(m), 2):
        label = "epr:" + party_letters([i, j])
        out.append((label, epr_between(m, i, j)))
    return out


def _default_probes(m: int) -> list[tuple[str, PureState]]:
    from .builders import cat_state, codeword5, embedded_cat

    if m == 3:
        return [("cat3", cat_state(3))]
    if m == 4:
        return [("cat4", cat_state(4))]
    if m == 5:
        return [("cat5", cat_state(5)), ("codeword5", codeword5())]
    if m == 6:
        probes: list[tuple[str, PureState]] = []
        for members in itertools.combinations(range(6), 4):
            label = "cat4:" + party_letters(members)
            probes.append((label, embedded_cat(6, members)))
        probes.append(("cat6", cat_state(6)))
        return probes
    return [(f"cat{m}", cat_state(m))]


@dataclass(frozen=True)
class ProbeResult:
    label: str
    infeasible: bool
    certificate: tuple[Fraction, ...] | None
    reason: str


@dataclass(frozen=True)
class MregsBound:
    """Lower bound on the size of a reversible generating set.

    Every bipartite cut needs its EPR pair, giving the m(m-1)/2 baseline;
    each probe whose entropy vector cannot be written as a nonnegative mix
    of the accumulated generators forces one further member.
    """

    num_parties: int
    bound: int
    baseline: int
    probes: tuple[ProbeResult, ...]
    trace: tuple[str, ...]
    note: str = ""

    def render(self) -> str:
        lines = list(self.trace)
        if self.note:
            lines.append(f"note: {self.note}")
        lines.append(f"lower bound for {self.num_parties} parties: {self.bound}")
        return "\n".join(lines)


def mregs_lower_bound(
    m: int, probe_states: Sequence[tuple[str, PureState]] | None = None
) -> MregsBound:
    """Count how many states a reversible generating set must contain.

    Starts from the complete EPR graph and adds each probe in turn: a
    probe whose entropy vector is infeasible over the accumulated
    generators cannot be bought with them at any exchange rate, so any
    generating set needs an extra member for it (and the probe joins the
    pool). The trace records the entropy-ratio comparison that drives the
    standard probes: symmetric EPR mixes have ratio 2(m-2)/(m-1), cats sit
    at 1, the five-qubit codeword at 2.
    """
    if m < 2:
        raise ValueError("need at least two parties")
    eprs = _epr_generators(m)
    gens = EntropyMatrix.from_states(m, eprs)
    baseline = len(eprs)
    trace = [
        f"baseline: the {baseline} EPR pairs are mutually independent "
        "(each is the only generator entangling its pair of parties)"
    ]
    if m >= 3:
        epr_ratio = Fraction(2 * (m - 2), m - 1)
        comparison = (
            "symmetric EPR mixes cannot imitate them"
            if epr_ratio != 1
            else "at three parties the ratios coincide"
        )
        trace.append(
            f"complete EPR graph entropy ratio r21 = {epr_ratio}; "
            f"cat states have r21 = 1, so {comparison}"
        )
    bound = baseline
    probes = _default_probes(m) if probe_states is None else list(probe_states)
    results: list[ProbeResult] = []
    for label, state in probes:
        verdict = solve_coefficients(gens, state)
        if isinstance(verdict, Infeasible):
            if not verdict.verified:
                raise RuntimeError(
                    f"certificate for probe {label!r} failed verification"
                )
            bound += 1
            gens = gens.with_generator(label, state)
            results.append(
                ProbeResult(label, True, verdict.certificate, verdict.reason)
            )
            trace.append(
                f"probe {label}: infeasible over the accumulated set "
                f"({verdict.reason}); bound rises to {bound}"
            )
        else:
            mix = ", ".join(
                f"{lab}={coef}"
                for lab, coef in zip(verdict.labels, verdict.coefficients)
                if coef != 0
            )
            results.append(
                ProbeResult(label, False, None, f"feasible: {mix or '0'}")
            )
            trace.append(
                f"probe {label}: entropy-feasible over the accumulated set "
                f"({mix or 'zero mix'}); no increase"
            )
    note = ""
    if m == 3:
        note = (
            "entropy vectors alone cannot separate the 3-cat from EPR mixes "
            "(two cats match three pairs exactly); finer arguments are known "
            "to push the true minimum to 4"
        )
    return MregsBound(
        num_parties=m,
        bound=bound,
        baseline=baseline,
        probes=tuple(results),
        trace=tuple(trace),
        note=note,
    )


# --- the entropy-ratio table ---------------------------------------------------


@dataclass(frozen=True)
class R21Row:
    num_parties: int
    label: str
    ratio: Fraction


def r21_table() -> list[R21Row]:
    """Exact two-set versus one-set entropy ratios for the standard states.

    Cat states sit at 1 for every m; complete EPR graphs at 2(m-2)/(m-1);
    the five-qubit codeword at 2. All ratios are computed from the states
    themselves in exact arithmetic (the six-party EPR graph through
    entropy additivity over its pair factors, the rest densely).
    """
    from .builders import (
        cat_state,
        codeword5,
        complete_graph_edges,
        epr_pair,
        eprs_complete,
    )

    rows: list[R21Row] = []
    for m in (3, 4, 5, 6):
        cat_vec = exact_entropy_vector(cat_state(m))
        rows.append(
            R21Row(m, f"cat{m}", exact_entropy_ratio_r21(cat_vec, m))
        )
        edges = complete_graph_edges(m)
        if m <= 5:
            epr_vec = exact_entropy_vector(eprs_complete(m))
        else:
            factors = [
                (epr_pair(), (i, j)) for i, j in edges
            ]
            epr_vec = exact_entropy_vector_of_factors(m, factors)
        rows.append(
            R21Row(
                m,
                f"{len(edges)} eprs",
                exact_entropy_ratio_r21(epr_vec, m),
            )
        )
        if m == 5:
            code_vec = exact_entropy_vector(codeword5())
            rows.append(
                R21Row(5, "codeword5", exact_entropy_ratio_r21(code_vec, 5))
            )
    return rows


def egs_check(state: PureState, threshold: float = 1e-8) -> bool:
    """Whether every nontrivial partition of the state carries entropy.

    States passing this can, in principle, buy any entanglement pattern
    among their parties asymptotically; a zero anywhere means some cut can
    never be crossed.
    """
    vec = entropy_vector(state)
    return all(value > threshold for _, value in vec.entries())
