"""Dense linear assignment solver core.

Shortest-augmenting-path algorithm with dual potentials, O(n^3) on a
square cost matrix. Written with plain loops and preallocated arrays so
the exact same source runs interpreted (numpy backend) or compiled
(numba backend).
"""

import numpy as np


def lap_solve_square(cost):
    # cost: (n, n) float64, finite. Returns col_of_row, shape (n,), int64.
    n = cost.shape[0]
    u = np.zeros(n + 1, dtype=np.float64)
    v = np.zeros(n + 1, dtype=np.float64)
    # row assigned to each column; index n is the virtual start column
    row_of_col = np.full(n + 1, -1, dtype=np.int64)
    prev_col = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1, dtype=np.float64)
    used = np.empty(n + 1, dtype=np.bool_)

    for i in range(n):
        row_of_col[n] = i
        j0 = n
        for j in range(n + 1):
            minv[j] = np.inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            delta = np.inf
            j1 = -1
            for j in range(n):
                if not used[j]:
                    cur = cost[i0, j] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        prev_col[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[row_of_col[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if row_of_col[j0] == -1:
                break
        # backtrack along the alternating path, flipping assignments
        while j0 != n:
            j1 = prev_col[j0]
            row_of_col[j0] = row_of_col[j1]
            j0 = j1

    col_of_row = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        if row_of_col[j] >= 0:
            col_of_row[row_of_col[j]] = j
    return col_of_row
