"""Two-dimensional HWENO reconstruction on the 3x3 moment stencil.

Cells of the stencil are labelled 1..9 row by row from the bottom-left,
so cell 5 is the target cell. The stencil data vector has 15 entries::

    [u1 .. u9, v4, v5, v6, w2, w5, w8]

(averages of all nine cells, x-moments of the middle row, y-moments of
the middle column). Every candidate is an incomplete cubic in the local
coordinates xi = (x - x_i)/dx, eta = (y - y_j)/dy on the basis
``1, xi, eta, xi^2, xi*eta, eta^2, xi^3, eta^3``.

All tables are built once, on first use, from the defining conditions.
"""

from functools import lru_cache
from math import factorial, sqrt

import numpy as np

EPS = 1e-6
S3 = sqrt(3.0) / 6.0

# cell label -> (column offset, row offset)
CELL_OFFSETS = {k: ((k - 1) % 3 - 1, (k - 1) // 3 - 1) for k in range(1, 10)}
DATA_INDEX = {("u", k): k - 1 for k in range(1, 10)}
DATA_INDEX.update({("v", 4): 9, ("v", 5): 10, ("v", 6): 11})
DATA_INDEX.update({("w", 2): 12, ("w", 5): 13, ("w", 8): 14})

BASIS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (0, 3))

# (cells with averages, x-moment cells, y-moment cells) per candidate
CANDIDATE_STENCILS = (
    ((1, 2, 4, 5), (4, 5), (2, 5)),
    ((2, 3, 5, 6), (5, 6), (2, 5)),
    ((4, 5, 7, 8), (4, 5), (5, 8)),
    ((5, 6, 8, 9), (5, 6), (5, 8)),
    ((1, 2, 3, 4, 5, 7), (5,), (5,)),
    ((1, 2, 3, 5, 6, 9), (5,), (5,)),
    ((1, 4, 5, 7, 8, 9), (5,), (5,)),
    ((3, 5, 6, 7, 8, 9), (5,), (5,)),
)

# target points: 8 edge Gauss points then 4 interior ones
TARGETS = (
    (-0.5, -S3), (-0.5, S3),  # left edge   (u^+)
    (0.5, -S3), (0.5, S3),    # right edge  (u^-)
    (-S3, -0.5), (S3, -0.5),  # bottom edge (u^+)
    (-S3, 0.5), (S3, 0.5),    # top edge    (u^-)
    (-S3, -S3), (S3, -S3), (-S3, S3), (S3, S3),
)
X_EDGE = slice(0, 4)
Y_EDGE = slice(4, 8)
EDGE = slice(0, 8)
INTERIOR = slice(8, 12)


def _avg1(p, a):
    return ((a + 0.5) ** (p + 1) - (a - 0.5) ** (p + 1)) / (p + 1)


def _cell_avg(ex, a, b):
    px, py = ex
    return _avg1(px, a) * _avg1(py, b)


def _cell_mom_x(ex, a, b):
    px, py = ex
    return (_avg1(px + 1, a) - a * _avg1(px, a)) * _avg1(py, b)


def _cell_mom_y(ex, a, b):
    px, py = ex
    return _avg1(px, a) * (_avg1(py + 1, b) - b * _avg1(py, b))


def _conditions(stencil):
    cells, kx, ky = stencil
    rows, sel = [], []
    for k in cells:
        a, b = CELL_OFFSETS[k]
        rows.append([_cell_avg(e, a, b) for e in BASIS])
        sel.append(DATA_INDEX[("u", k)])
    for k in kx:
        a, b = CELL_OFFSETS[k]
        rows.append([_cell_mom_x(e, a, b) for e in BASIS])
        sel.append(DATA_INDEX[("v", k)])
    for k in ky:
        a, b = CELL_OFFSETS[k]
        rows.append([_cell_mom_y(e, a, b) for e in BASIS])
        sel.append(DATA_INDEX[("w", k)])
    A = np.array(rows)
    S = np.zeros((8, 15))
    S[np.arange(8), sel] = 1.0
    return A, S


def basis_values(xi, eta):
    return np.array([xi**px * eta**py for px, py in BASIS])


def exact_stencil_data(fn_moments):
    """Stencil data of a monomial-combination: ``fn_moments(kind, a, b)``."""
    d = np.zeros(15)
    for (kind, k), idx in DATA_INDEX.items():
        a, b = CELL_OFFSETS[k]
        d[idx] = fn_moments(kind, a, b)
    return d


def monomial_data(px, py):
    funcs = {"u": _cell_avg, "v": _cell_mom_x, "w": _cell_mom_y}
    return exact_stencil_data(lambda kind, a, b: funcs[kind]((px, py), a, b))


def _smoothness_matrix():
    """Q with beta = c^T Q c for coefficients c on BASIS over the unit cell."""
    n = len(BASIS)
    Q = np.zeros((n, n))
    for order in (1, 2, 3):
        for l1 in range(order + 1):
            l2 = order - l1
            # derivative of each basis monomial: (coef, exponents)
            der = []
            for px, py in BASIS:
                if px < l1 or py < l2:
                    der.append((0.0, (0, 0)))
                else:
                    c = factorial(px) / factorial(px - l1) * factorial(py) / factorial(py - l2)
                    der.append((c, (px - l1, py - l2)))
            for i, (ci, ei) in enumerate(der):
                for j, (cj, ej) in enumerate(der):
                    if ci and cj:
                        Q[i, j] += ci * cj * _cell_avg((ei[0] + ej[0], ei[1] + ej[1]), 0, 0)
    return Q


def _min_norm_weights(values, targets):
    """Minimise sum gamma^2 subject to ``values @ gamma = targets``.

    ``values`` is (n_constraints, 8); solved through the KKT normal
    equations ``gamma = V^T (V V^T)^{-1} t``.
    """
    lam = np.linalg.solve(values @ values.T, targets)
    return values.T @ lam


class Tables:
    """Precomputed candidate maps, point rows, linear weights and Q."""

    def __init__(self):
        coef_maps = []
        for st in CANDIDATE_STENCILS:
            A, S = _conditions(st)
            C = np.linalg.solve(A, S)
            resid = A @ C - S
            assert np.max(np.abs(resid)) < 1e-10, "candidate system residual too large"
            coef_maps.append(C)
        self.coef_maps = np.array(coef_maps)  # (8 cand, 8 coef, 15 data)
        phi = np.array([basis_values(x, y) for x, y in TARGETS])  # (12, 8)
        self.phi = phi
        # candidate value rows: (8 cand, 12 targets, 15 data)
        self.point_rows = np.einsum("gk,nkd->ngd", phi, self.coef_maps)

        d_x2y = monomial_data(2, 1)
        d_xy2 = monomial_data(1, 2)
        gammas = np.zeros((len(TARGETS), 8))
        for g, (x, y) in enumerate(TARGETS):
            V = np.array([
                np.ones(8),
                self.point_rows[:, g, :] @ d_x2y,
                self.point_rows[:, g, :] @ d_xy2,
            ])
            t = np.array([1.0, x * x * y, x * y * y])
            gammas[g] = _min_norm_weights(V, t)
        assert np.all(gammas > 0.0), "linear weights must be positive"
        self.gammas = gammas  # (12 targets, 8 cand)
        # fused linear reconstruction rows: (12 targets, 15 data)
        self.linear_rows = np.einsum("gn,ngd->gd", gammas, self.point_rows)
        self.Q = _smoothness_matrix()
        # beta_n = d^T B_n d with B_n = C_n^T Q C_n
        self.beta_forms = np.einsum("nki,kl,nlj->nij", self.coef_maps, self.Q, self.coef_maps)
        self._check_printed_weights()

    def _check_printed_weights(self):
        r3 = sqrt(3.0)
        printed = np.array([
            (3533 + 351 * r3) / 37040, (5727 + 351 * r3) / 37040,
            (3533 - 351 * r3) / 37040, (5727 - 351 * r3) / 37040,
            (10599 - 1867 * r3) / 111120, (17181 - 415 * r3) / 111120,
            (10599 + 1867 * r3) / 111120, (17181 + 415 * r3) / 111120,
        ])
        g = TARGETS.index((0.5, S3))
        assert np.allclose(self.gammas[g], printed, rtol=0, atol=1e-12), "weight table mismatch"
        assert np.allclose(self.gammas[INTERIOR], 0.125, rtol=0, atol=1e-12)


@lru_cache(maxsize=1)
def tables():
    return Tables()


def solve_candidates(data):
    """Coefficients of the eight candidates; ``data`` is (15, ...)."""
    return np.einsum("nkd,d...->nk...", tables().coef_maps, data)


def linear_weights_2d(target):
    """Linear weights for a target point given as (xi, eta) or its index."""
    idx = target if isinstance(target, (int, np.integer)) else _target_index(target)
    return tables().gammas[idx].copy()


def _target_index(point):
    for g, (x, y) in enumerate(TARGETS):
        if abs(x - point[0]) < 1e-12 and abs(y - point[1]) < 1e-12:
            return g
    raise ValueError(f"{point} is not one of the reconstruction points")


def smoothness_2d(coeffs):
    """beta for coefficient vectors on BASIS; ``coeffs`` is (8, ...)."""
    Q = tables().Q
    return np.einsum("k...,kl,l...->...", coeffs, Q, coeffs)


def smoothness_from_data(data):
    """beta of all eight candidates straight from stencil data: (8, ...)."""
    t = tables()
    flat = data.reshape(data.shape[0], -1)
    c = (t.coef_maps.reshape(-1, flat.shape[0]) @ flat).reshape(8, 8, -1)
    beta = np.sum(c * np.matmul(t.Q, c), axis=1)
    return beta.reshape((8,) + data.shape[1:])


def linear_values(data, targets=slice(None)):
    """Linear reconstruction at target points: (n_targets, ...)."""
    rows = tables().linear_rows[targets]
    return np.tensordot(rows, data, axes=(1, 0))


def hweno_values(data, targets=EDGE, eps=EPS):
    """Nonlinear reconstruction at the target points: (n_targets, ...)."""
    t = tables()
    beta = smoothness_from_data(data)  # (8, ...)
    rows = t.point_rows[:, targets, :]
    cand = (rows.reshape(-1, data.shape[0]) @ data.reshape(data.shape[0], -1))
    cand = cand.reshape(rows.shape[:2] + data.shape[1:])  # (8, G, ...)
    gam = t.gammas[targets].T  # (8, G)
    gam = gam.reshape(gam.shape + (1,) * (data.ndim - 1))
    raw = gam / ((beta + eps) ** 2)[:, None]
    w = raw / np.sum(raw, axis=0)
    return np.sum(w * cand, axis=0)


def reconstruct_point_2d(data, target, mode="hweno", eps=EPS):
    """Value at one target (index or (xi, eta)). Interior points are always linear."""
    g = target if isinstance(target, (int, np.integer)) else _target_index(target)
    sl = slice(g, g + 1)
    if mode == "linear" or g >= 8:
        return linear_values(data, sl)[0]
    if mode != "hweno":
        raise ValueError(f"mode must be 'hweno' or 'linear', got {mode!r}")
    return hweno_values(data, sl, eps)[0]
