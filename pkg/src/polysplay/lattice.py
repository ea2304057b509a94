"""Exact integer and rational linear algebra used by the domain code.

Everything here works on lists of Python ints or Fractions so results are
exact.  The integer routines use unimodular column operations, which give a
saturated kernel basis and particular integer solutions in one pass.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[int]]


def column_echelon(A: Sequence[Sequence[int]], ncols: int) -> tuple[Matrix, Matrix, list[tuple[int, int]]]:
    """Column-reduce A with unimodular operations.

    Returns (H, U, pivots) with H = A U.  Each pivot (row, col) marks a column
    whose first nonzero entry sits in that row; the columns after the last
    pivot span the integer kernel of A.
    """
    H = [list(row) for row in A]
    U = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    pivots = []
    col = 0

    def swap(a, b):
        for row in H:
            row[a], row[b] = row[b], row[a]
        for row in U:
            row[a], row[b] = row[b], row[a]

    def addmul(dst, src, f):
        # column dst += f * column src
        if f == 0:
            return
        for row in H:
            row[dst] += f * row[src]
        for row in U:
            row[dst] += f * row[src]

    def negate(c):
        for row in H:
            row[c] = -row[c]
        for row in U:
            row[c] = -row[c]

    for r in range(len(H)):
        if col >= ncols:
            break
        while True:
            nz = [c for c in range(col, ncols) if H[r][c] != 0]
            if not nz:
                break
            best = min(nz, key=lambda c: abs(H[r][c]))
            if best != col:
                swap(best, col)
            if H[r][col] < 0:
                negate(col)
            done = True
            for c in range(col + 1, ncols):
                if H[r][c]:
                    addmul(c, col, -(H[r][c] // H[r][col]))
                    if H[r][c]:
                        done = False
            if done:
                pivots.append((r, col))
                col += 1
                break
    return H, U, pivots


def integer_kernel(A: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """A basis of {v in Z^n : A v = 0}; the lattice it spans is saturated."""
    if not A:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    _, U, pivots = column_echelon(A, ncols)
    start = len(pivots)
    return [[U[i][c] for i in range(ncols)] for c in range(start, ncols)]


def solve_integer(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int) -> list[int] | None:
    """Some integer x with A x = b, or None when there is none."""
    if not A:
        return [0] * ncols if not any(b) else None
    H, U, pivots = column_echelon(A, ncols)
    y = [0] * ncols
    pivot_rows = {r: c for r, c in pivots}
    for r in range(len(H)):
        acc = sum(H[r][c] * y[c] for c in range(ncols))
        rest = b[r] - acc
        if r in pivot_rows:
            c = pivot_rows[r]
            if rest % H[r][c]:
                return None
            y[c] = rest // H[r][c]
        elif rest != 0:
            return None
    return [sum(U[i][c] * y[c] for c in range(ncols)) for i in range(ncols)]


def rank(A: Sequence[Sequence[int]], ncols: int) -> int:
    if not A:
        return 0
    return len(column_echelon(A, ncols)[2])


# ----------------------------------------------------------------------
# Fourier-Motzkin


def _normalise(row: list[Fraction]) -> tuple[Fraction, ...]:
    scale = max((abs(x) for x in row), default=Fraction(0))
    if scale == 0:
        return tuple(row)
    return tuple(x / scale for x in row)


def _eliminate(system: dict, k: int, width: int, step: int) -> dict:
    """One Fourier-Motzkin step on variable k.

    system maps normalised rows to the set of input rows they came from.
    A combination built from more than step + 1 inputs is implied by the
    others (Chernikov's rule) and is dropped, which keeps the blow-up in check.
    """
    pos = [(r, h) for r, h in system.items() if r[k] > 0]
    neg = [(r, h) for r, h in system.items() if r[k] < 0]
    new = {r: h for r, h in system.items() if r[k] == 0}
    for p, hp in pos:
        for q, hq in neg:
            hist = hp | hq
            if len(hist) > step + 1:
                continue
            a, b = p[k], -q[k]
            row = _normalise([b * p[i] + a * q[i] for i in range(width + 1)])
            if row not in new or len(hist) < len(new[row]):
                new[row] = hist
    return new


def _start(rows) -> dict:
    system = {}
    for i, r in enumerate(rows):
        system.setdefault(_normalise(list(r)), frozenset({i}))
    return system


def fm_feasible(rows: Sequence[Sequence[Fraction]], nvars: int) -> list[Fraction] | None:
    """Find x with row[:n] . x >= row[n] for every row, or None if infeasible.

    Fourier-Motzkin elimination with duplicate and redundancy removal,
    followed by back substitution to produce a witness.
    """
    system = _start([Fraction(v) for v in r] for r in rows)
    stages = []
    for step, k in enumerate(range(nvars - 1, -1, -1), start=1):
        pos = [r for r in system if r[k] > 0]
        neg = [r for r in system if r[k] < 0]
        stages.append((k, pos, neg))
        system = _eliminate(system, k, nvars, step)
    # only constant rows remain: 0 >= rhs must hold
    for r in system:
        if r[nvars] > 0:
            return None
    x = [Fraction(0)] * nvars
    for k, pos, neg in reversed(stages):
        lo, hi = None, None
        for r in pos:
            rest = r[nvars] - sum(r[i] * x[i] for i in range(nvars) if i != k)
            bound = rest / r[k]
            lo = bound if lo is None else max(lo, bound)
        for r in neg:
            rest = r[nvars] - sum(r[i] * x[i] for i in range(nvars) if i != k)
            bound = rest / r[k]
            hi = bound if hi is None else min(hi, bound)
        if lo is not None and hi is not None:
            x[k] = lo if lo <= hi else None  # type: ignore[assignment]
            if x[k] is None:
                return None
        elif lo is not None:
            x[k] = lo
        elif hi is not None:
            x[k] = min(hi, Fraction(0))
        else:
            x[k] = Fraction(0)
    return x


def fm_maximum(rows: Sequence[Sequence[Fraction]], nvars: int, objective: Sequence[Fraction]) -> Fraction | None:
    """Supremum of objective . x over {x : row[:n] . x >= row[n]}.

    Returns None when the system is infeasible and raises ValueError when the
    objective is unbounded.  The objective becomes an extra variable t with
    objective . x - t >= 0; eliminating x leaves bounds on t alone.
    """
    start = [[Fraction(v) for v in r[:nvars]] + [Fraction(0), Fraction(r[nvars])] for r in rows]
    start.append([Fraction(c) for c in objective] + [Fraction(-1), Fraction(0)])
    system = _start(start)
    width = nvars + 1
    for step, k in enumerate(range(nvars - 1, -1, -1), start=1):
        system = _eliminate(system, k, width, step)
    best = None
    for r in system:
        a, rhs = r[nvars], r[width]
        if a == 0:
            if rhs > 0:
                return None
        elif a < 0:
            bound = rhs / a
            best = bound if best is None else min(best, bound)
    if best is None:
        raise ValueError("objective is unbounded")
    # lower bounds on t are always satisfiable by lowering t; only check consistency
    for r in system:
        if r[nvars] > 0 and r[width] / r[nvars] > best:
            return None
    return best


def nonnegative_combination(basis: Sequence[Sequence[int]]) -> list[int] | None:
    """Integer coefficients c != 0 with sum c_i basis_i >= 0, or None.

    The basis vectors must be linearly independent, so a nonzero c gives a
    nonzero combination.  Used for admissibility.
    """
    r = len(basis)
    if r == 0:
        return None
    n = len(basis[0])
    rows = []
    for t in range(n):
        rows.append([Fraction(basis[i][t]) for i in range(r)] + [Fraction(0)])
    # normalisation: the entries sum to at least one
    rows.append([Fraction(sum(basis[i][t] for t in range(n))) for i in range(r)] + [Fraction(1)])
    sol = fm_feasible(rows, r)
    if sol is None:
        return None
    den = 1
    for v in sol:
        den = den * v.denominator // gcd(den, v.denominator)
    coeffs = [int(v * den) for v in sol]
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        coeffs = [c // g for c in coeffs]
    return coeffs


def combine(basis: Sequence[Sequence[int]], coeffs: Sequence[int]) -> list[int]:
    n = len(basis[0]) if basis else 0
    return [sum(c * b[t] for c, b in zip(coeffs, basis)) for t in range(n)]


def brute_force_nonnegative(basis: Sequence[Sequence[int]], bound: int = 5) -> list[int] | None:
    """Search the coefficient box [-bound, bound]^r for a nonnegative nonzero combination."""
    r = len(basis)
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=r):
        if not any(coeffs):
            continue
        v = combine(basis, coeffs)
        if all(x >= 0 for x in v) and any(v):
            return list(coeffs)
    return None
