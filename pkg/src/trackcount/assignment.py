"""Box overlap and optimal bipartite assignment.

``solve_assignment`` is a shortest-augmenting-path Hungarian solver
(O(n^3) per solve) followed by a lexicographic tie-breaking pass, so that
among all optimal assignments the one with the smallest sorted
``(row, col)`` list is returned. ``exhaustive_assignment`` enumerates every
injection and serves as a reference for small matrices.
"""

from __future__ import annotations

import itertools
import math
from typing import Literal, Sequence

import numpy as np

from .errors import ValidationError
from .model import BoundingBox

Mode = Literal["minimize", "maximize"]

#: A dense 2-D float array of finite costs (or similarities when maximizing).
CostMatrix = np.ndarray

EXHAUSTIVE_MAX_DIM = 8
_REL_TOL = 1e-12


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x_right, b.x_right) - max(a.x_left, b.x_left)
    ih = min(a.y_bottom, b.y_bottom) - max(a.y_top, b.y_top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def iou_matrix(boxes_a: Sequence[BoundingBox], boxes_b: Sequence[BoundingBox]) -> np.ndarray:
    """Pairwise IoU, shape ``(len(boxes_a), len(boxes_b))``."""
    out = np.zeros((len(boxes_a), len(boxes_b)))
    for i, a in enumerate(boxes_a):
        for j, b in enumerate(boxes_b):
            out[i, j] = iou(a, b)
    return out


def _as_cost_matrix(costs) -> np.ndarray:
    c = np.asarray(costs, dtype=float)
    if c.size == 0:
        return c.reshape(c.shape if c.ndim == 2 else (0, 0))
    if c.ndim != 2:
        raise ValidationError(f"cost matrix must be 2-D, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValidationError("cost matrix contains non-finite entries")
    return c


def _hungarian(c: list[list[float]]) -> list[int]:
    """Minimum-cost assignment of every row of a rows <= cols matrix.

    Returns ``col_of_row``. Classic potentials + shortest augmenting path.
    """
    n = len(c)
    m = len(c[0])
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j]: row (1-based) assigned to column j, 0 = free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = c[i0 - 1]
            delta = inf
            j1 = 0
            ui0 = u[i0]
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def _min_cost_pairs(c: np.ndarray, rows: list[int], cols: list[int]) -> tuple[float, list[tuple[int, int]]]:
    """Optimal min(len(rows), len(cols)) assignment on a sub-matrix."""
    if not rows or not cols:
        return 0.0, []
    sub = c[np.ix_(rows, cols)]
    if len(rows) <= len(cols):
        assign = _hungarian(sub.tolist())
        pairs = [(rows[i], cols[j]) for i, j in enumerate(assign)]
    else:
        assign = _hungarian(sub.T.tolist())
        pairs = [(rows[i], cols[j]) for j, i in enumerate(assign)]
    total = float(sum(c[r, k] for r, k in pairs))
    return total, pairs


def _tolerance(c: np.ndarray) -> float:
    k = min(c.shape)
    return _REL_TOL * max(1.0, float(np.abs(c).max()) * k)


def _to_minimization(c: np.ndarray, mode: Mode) -> np.ndarray:
    if mode == "minimize":
        return c
    if mode == "maximize":
        return c.max() - c
    raise ValidationError(f"mode must be 'minimize' or 'maximize', got {mode!r}")


def solve_assignment(costs, mode: Mode = "minimize") -> list[tuple[int, int]]:
    """Optimal one-to-one assignment of ``min(rows, cols)`` pairs.

    Among assignments whose total is optimal (to within a relative tolerance
    of 1e-12), returns the one whose sorted ``(row, col)`` list is
    lexicographically smallest.

    Args:
        costs: 2-D array of finite values.
        mode: ``"minimize"`` the total cost or ``"maximize"`` the total
            value. Maximization runs on ``max(costs) - costs``.

    Returns:
        Pairs ``(row, col)`` sorted by row. An empty matrix yields ``[]``.
    """
    c = _as_cost_matrix(costs)
    if c.size == 0:
        return []
    c = _to_minimization(c, mode)
    n_rows, n_cols = c.shape
    k = min(n_rows, n_cols)
    best, current = _min_cost_pairs(c, list(range(n_rows)), list(range(n_cols)))
    tol = _tolerance(c)

    # Lexicographic refinement: walk rows in order and give each the smallest
    # column that still admits an optimal completion.
    fixed: list[tuple[int, int]] = []
    fixed_cost = 0.0
    skipped: set[int] = set()
    used_cols: set[int] = set()
    current_col = dict(current)
    for r in range(n_rows):
        if len(fixed) == k:
            break
        later_rows = [x for x in range(r + 1, n_rows) if x not in skipped]
        chosen = None
        for col in range(n_cols):
            if col in used_cols:
                continue
            if current_col.get(r) == col:
                chosen = col
                break
            free_cols = [x for x in range(n_cols) if x not in used_cols and x != col]
            need = k - len(fixed) - 1
            if min(len(later_rows), len(free_cols)) != need:
                continue
            sub_cost, sub_pairs = _min_cost_pairs(c, later_rows, free_cols)
            if fixed_cost + c[r, col] + sub_cost <= best + tol:
                chosen = col
                current_col = dict(fixed + [(r, col)] + sub_pairs)
                break
        if chosen is None:
            if r in current_col:
                # Numerical corner: keep the solver's own choice for this row.
                chosen = current_col[r]
            else:
                skipped.add(r)
                continue
        fixed.append((r, chosen))
        fixed_cost += c[r, chosen]
        used_cols.add(chosen)
    return fixed


def assignment_total(costs, pairs: Sequence[tuple[int, int]]) -> float:
    c = np.asarray(costs, dtype=float)
    return float(sum(c[r, k] for r, k in pairs))


def exhaustive_assignment(costs, mode: Mode = "minimize") -> list[tuple[int, int]]:
    """Reference solver enumerating every injection; same contract as
    :func:`solve_assignment`. Refuses matrices larger than 8 in either
    dimension."""
    c = _as_cost_matrix(costs)
    if c.size == 0:
        return []
    if max(c.shape) > EXHAUSTIVE_MAX_DIM:
        raise ValidationError(
            f"exhaustive assignment limited to {EXHAUSTIVE_MAX_DIM}x{EXHAUSTIVE_MAX_DIM}, "
            f"got {c.shape[0]}x{c.shape[1]}"
        )
    c = _to_minimization(c, mode)
    n_rows, n_cols = c.shape
    candidates: list[tuple[float, list[tuple[int, int]]]] = []
    if n_rows <= n_cols:
        for perm in itertools.permutations(range(n_cols), n_rows):
            pairs = list(enumerate(perm))
            candidates.append((sum(c[r, k] for r, k in pairs), pairs))
    else:
        for perm in itertools.permutations(range(n_rows), n_cols):
            pairs = sorted((r, k) for k, r in enumerate(perm))
            candidates.append((sum(c[r, k] for r, k in pairs), pairs))
    best = min(total for total, _ in candidates)
    tol = _tolerance(c)
    return min(pairs for total, pairs in candidates if total <= best + tol)
