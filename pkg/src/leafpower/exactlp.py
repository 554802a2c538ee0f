"""Exact rational linear feasibility.

A small dense two-phase simplex (phase one only) over exact rationals.
Used for: certificate integerization, generalized-leaf-power recognition,
and triangle-order realizability.  All strict inequalities in callers are
pre-encoded as margin-1 constraints (``a < b`` becomes ``b - a >= 1``),
which loses no solutions because every system here is scale-invariant.

gmpy2.mpq is used internally for speed; the public API speaks Fraction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)

GE = ">="
LE = "<="
EQ = "=="


def _to_q(value):
    if isinstance(value, Fraction):
        return _Q(value.numerator, value.denominator)
    return _Q(value)


def _to_fraction(value) -> Fraction:
    return Fraction(value.numerator, value.denominator)


def find_feasible_point(
    num_vars: int,
    constraints: Sequence[tuple[Mapping[int, object], str, object]],
) -> list[Fraction] | None:
    """Find any point with x >= 0 satisfying all constraints, or None.

    Each constraint is ``(coeffs, rel, rhs)`` with ``coeffs`` a sparse map
    from variable index to coefficient and ``rel`` one of ``>=``, ``<=``,
    ``==``.  The returned point is a basic feasible solution (a vertex of
    the polyhedron).
    """
    rows = []
    rels = []
    rhss = []
    for coeffs, rel, rhs in constraints:
        row = [_ZERO] * num_vars
        for idx, c in coeffs.items():
            row[idx] += _to_q(c)
        rhs = _to_q(rhs)
        if rhs < 0:
            row = [-c for c in row]
            rhs = -rhs
            rel = {GE: LE, LE: GE, EQ: EQ}[rel]
        rows.append(row)
        rels.append(rel)
        rhss.append(rhs)

    m = len(rows)
    n_slack = sum(1 for r in rels if r != EQ)
    n_art = sum(1 for r in rels if r != LE)
    width = num_vars + n_slack + n_art + 1  # trailing column is the rhs

    tableau = []
    basis = []
    slack_at = num_vars
    art_at = num_vars + n_slack
    art_cols = []
    for row, rel, rhs in zip(rows, rels, rhss):
        full = row + [_ZERO] * (n_slack + n_art) + [rhs]
        if rel == LE:
            full[slack_at] = _ONE
            basis.append(slack_at)
            slack_at += 1
        elif rel == GE:
            full[slack_at] = -_ONE
            slack_at += 1
            full[art_at] = _ONE
            basis.append(art_at)
            art_cols.append(art_at)
            art_at += 1
        else:
            full[art_at] = _ONE
            basis.append(art_at)
            art_cols.append(art_at)
            art_at += 1
        tableau.append(full)

    if not art_cols:
        # every row had a slack basis; the all-zero point may still violate
        # nothing (all rhs >= 0 and rel <=), so it is feasible.
        return [Fraction(0)] * num_vars

    art_set = set(art_cols)
    # phase-1 objective row: sum of artificial rows
    obj = [_ZERO] * width
    for row, b in zip(tableau, basis):
        if b in art_set:
            for j in range(width):
                if row[j]:
                    obj[j] += row[j]
    for col in art_cols:
        obj[col] = _ZERO

    n_cols = width - 1
    enterable = [j for j in range(n_cols) if j not in art_set]
    iterations = 0
    bland_after = 50 * (m + n_cols)
    while True:
        iterations += 1
        pivot_col = -1
        if iterations <= bland_after:
            best = _ZERO
            for j in enterable:
                v = obj[j]
                if v > best:
                    best = v
                    pivot_col = j
        else:  # Bland's rule to guarantee termination
            for j in enterable:
                if obj[j] > 0:
                    pivot_col = j
                    break
        if pivot_col < 0:
            break
        pivot_row = -1
        best_ratio = None
        for i in range(m):
            a = tableau[i][pivot_col]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[pivot_row]
                ):
                    best_ratio = ratio
                    pivot_row = i
        if pivot_row < 0:
            # unbounded phase-1 column cannot happen with a bounded objective;
            # treat defensively as "cannot improve"
            enterable = [j for j in enterable if j != pivot_col]
            continue
        _pivot(tableau, obj, basis, pivot_row, pivot_col)

    if obj[-1] > 0:
        return None
    solution = [Fraction(0)] * num_vars
    for i, b in enumerate(basis):
        if b < num_vars:
            solution[b] = _to_fraction(tableau[i][-1])
    return solution


def _pivot(tableau, obj, basis, pivot_row, pivot_col):
    prow = tableau[pivot_row]
    inv = _ONE / prow[pivot_col]
    if inv != 1:
        prow = [v * inv for v in prow]
        tableau[pivot_row] = prow
    for row in tableau:
        if row is prow:
            continue
        f = row[pivot_col]
        if f:
            for j, pv in enumerate(prow):
                if pv:
                    row[j] -= f * pv
    f = obj[pivot_col]
    if f:
        for j, pv in enumerate(prow):
            if pv:
                obj[j] -= f * pv
    basis[pivot_row] = pivot_col


def rational_rank(rows: Sequence[Sequence[object]]) -> int:
    """Rank of a rational matrix by exact Gaussian elimination."""
    mat = [[_to_q(v) for v in row] for row in rows]
    rank = 0
    col = 0
    n_cols = max((len(r) for r in mat), default=0)
    while rank < len(mat) and col < n_cols:
        pivot = None
        for i in range(rank, len(mat)):
            if mat[i][col]:
                pivot = i
                break
        if pivot is None:
            col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        prow = mat[rank]
        inv = _ONE / prow[col]
        mat[rank] = prow = [v * inv for v in prow]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], prow)]
        rank += 1
        col += 1
    return rank
