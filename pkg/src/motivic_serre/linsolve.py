"""Exact Gauss-Jordan elimination over Q for sparse affine systems."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

Row = Mapping[Hashable, Fraction]


@dataclass
class Solution:
    consistent: bool
    particular: dict          # free variables set to 0
    free: list                # free variables, in column order
    determined: dict          # variables with the same value in every solution
    rank: int
    inconsistent_row: int | None = None  # index of an equation reduced to 0 = nonzero

    @property
    def unique(self) -> bool:
        return self.consistent and not self.free


def solve(variables: Sequence[Hashable], equations: Sequence[tuple[Row, Fraction]]) -> Solution:
    """Solve ``sum_v row[v] * x_v = rhs`` for each ``(row, rhs)``."""
    col = {v: k for k, v in enumerate(variables)}
    rows = []
    for n, (coeffs, rhs) in enumerate(equations):
        r = {col[v]: Fraction(c) for v, c in coeffs.items() if c}
        rows.append((r, Fraction(rhs), n))

    pivots = []  # (column, row dict, rhs)
    bad = None
    for r, rhs, n in rows:
        r = dict(r)
        for pc, pr, prhs in pivots:
            f = r.get(pc)
            if f:
                for k, v in pr.items():
                    nv = r.get(k, 0) - f * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
                rhs -= f * prhs
        if not r:
            if rhs != 0 and bad is None:
                bad = n
            continue
        pc = min(r)
        inv = 1 / r[pc]
        r = {k: v * inv for k, v in r.items()}
        rhs *= inv
        # back-eliminate pc from existing pivot rows to stay reduced
        new_pivots = []
        for qc, qr, qrhs in pivots:
            f = qr.get(pc)
            if f:
                qr = dict(qr)
                for k, v in r.items():
                    nv = qr.get(k, 0) - f * v
                    if nv:
                        qr[k] = nv
                    else:
                        qr.pop(k, None)
                qrhs -= f * rhs
            new_pivots.append((qc, qr, qrhs))
        pivots = new_pivots + [(pc, r, rhs)]

    if bad is not None:
        return Solution(False, {}, [], {}, len(pivots), bad)

    pivot_cols = {pc for pc, _, _ in pivots}
    free = [variables[k] for k in range(len(variables)) if k not in pivot_cols]
    particular = {v: Fraction(0) for v in variables}
    determined = {}
    for pc, pr, prhs in pivots:
        particular[variables[pc]] = prhs
        if all(k == pc for k in pr):
            determined[variables[pc]] = prhs
    return Solution(True, particular, free, determined, len(pivots))
