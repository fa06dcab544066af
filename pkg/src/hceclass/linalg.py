"""Exact linear algebra over the rationals.

Elimination runs fraction-free on integer rows (each row is kept primitive by
dividing out its content), and only the final back-substitution produces
Fractions.  Column order is explicit so that pivot choice, and therefore the
nullspace basis, is reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Matrix = list[list[Fraction]]


def _integer_row(row: Sequence) -> list[int]:
    fr = [Fraction(v) for v in row]
    den = 1
    for v in fr:
        den = lcm(den, v.denominator)
    return [int(v * den) for v in fr]


def _primitive(row: list[int]) -> list[int]:
    g = 0
    for v in row:
        g = gcd(g, v)
    if g > 1:
        row = [v // g for v in row]
    return row


def echelon(rows: Sequence[Sequence], ncols: int,
            order: Sequence[int] | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form with pivots searched in `order` (default 0..n-1).

    Returns the nonzero reduced rows and the pivot column of each.
    """
    order = list(range(ncols)) if order is None else list(order)
    if sorted(order) != list(range(ncols)):
        raise ValueError("order must be a permutation of the columns")
    work = [_primitive(_integer_row(r)) for r in rows if any(r)]
    pivots: list[int] = []
    done = 0
    for col in order:
        piv = next((i for i in range(done, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[done], work[piv] = work[piv], work[done]
        prow = work[done]
        p = prow[col]
        for i in range(len(work)):
            if i == done or work[i][col] == 0:
                continue
            a = work[i][col]
            work[i] = _primitive([p * wi - a * pi for wi, pi in zip(work[i], prow)])
        pivots.append(col)
        done += 1
        if done == len(work):
            break
    reduced = []
    for i, col in enumerate(pivots):
        p = work[i][col]
        reduced.append([Fraction(v, p) for v in work[i]])
    return reduced, pivots


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    return len(echelon(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int,
              order: Sequence[int] | None = None) -> Matrix:
    """Basis of {v : rows·v = 0}; one vector per free column, 1 in that column.

    Vectors are returned in the order their free columns appear in `order`.
    """
    order = list(range(ncols)) if order is None else list(order)
    reduced, pivots = echelon(rows, ncols, order)
    pset = set(pivots)
    basis = []
    for free in order:
        if free in pset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One solution of A·y = b, or None when inconsistent."""
    n = len(A[0]) if A else 0
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    reduced, pivots = echelon(aug, n + 1)
    if n in pivots:
        return None
    y = [Fraction(0)] * n
    for row, pc in zip(reduced, pivots):
        y[pc] = row[n]
    return y


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = list(zip(*B))
    return [[sum((Fraction(a) * b for a, b in zip(r, c)), Fraction(0)) for c in Bt] for r in A]


def matsub(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    return [[Fraction(a) - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(A: Sequence[Sequence], q) -> Matrix:
    return [[Fraction(a) * q for a in r] for r in A]


def inverse(A: Sequence[Sequence]) -> Matrix:
    n = len(A)
    aug = [list(r) + e for r, e in zip(A, identity(n))]
    reduced, pivots = echelon(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in reduced[:n]]


def trace(A: Sequence[Sequence]) -> Fraction:
    return sum((Fraction(A[i][i]) for i in range(len(A))), Fraction(0))
