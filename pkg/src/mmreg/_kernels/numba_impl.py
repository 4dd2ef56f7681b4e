"""Numba-compiled kernels (default path).

Loop-style twins of numpy_impl; arithmetic is written in the same order
so results agree bit-for-bit where no reduction reassociation is
involved, and to ~1e-12 elsewhere.
"""

import numpy as np
from numba import njit, prange

from . import lapcore
from .numpy_impl import FAST_ARC, FAST_OFFSETS

BACKEND = "numba"

lap_solve_square = njit(cache=True)(lapcore.lap_solve_square)


@njit(cache=True, parallel=True)
def pairwise_dist(a, b):
    na, c = a.shape
    nb = b.shape[0]
    out = np.empty((na, nb), dtype=np.float64)
    for i in prange(na):
        for j in range(nb):
            s = 0.0
            for k in range(c):
                d = a[i, k] - b[j, k]
                s += d * d
            out[i, j] = np.sqrt(s)
    return out


@njit(cache=True)
def sc_bin_counts(pts, r_edges, n_theta):
    n = pts.shape[0]
    n_r = r_edges.shape[0] - 1
    k = n_r * n_theta
    counts = np.zeros((n, k), dtype=np.int64)
    two_pi = 2.0 * np.pi
    dtheta = two_pi / n_theta
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            r = np.sqrt(dx * dx + dy * dy)
            rb = n_r - 1
            for e in range(1, n_r + 1):
                if r < r_edges[e]:
                    rb = e - 1
                    break
            theta = np.arctan2(dy, dx)
            if theta < 0.0:
                theta += two_pi
            tb = int(theta / dtheta)
            if tb >= n_theta:
                tb = n_theta - 1
            counts[i, rb * n_theta + tb] += 1
    return counts


@njit(cache=True)
def harris_response(gray, k):
    h, w = gray.shape
    p = np.empty((h + 2, w + 2), dtype=np.float64)
    for y in range(h + 2):
        sy = min(max(y - 1, 0), h - 1)
        for x in range(w + 2):
            sx = min(max(x - 1, 0), w - 1)
            p[y, x] = gray[sy, sx]
    gx = np.empty((h, w), dtype=np.float64)
    gy = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            gx[y, x] = (
                (p[y, x + 2] + 2.0 * p[y + 1, x + 2] + p[y + 2, x + 2])
                - (p[y, x] + 2.0 * p[y + 1, x] + p[y + 2, x])
            ) / 8.0
            gy[y, x] = (
                (p[y + 2, x] + 2.0 * p[y + 2, x + 1] + p[y + 2, x + 2])
                - (p[y, x] + 2.0 * p[y, x + 1] + p[y, x + 2])
            ) / 8.0
    sxx = _smooth3(gx * gx)
    syy = _smooth3(gy * gy)
    sxy = _smooth3(gx * gy)
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            tr = sxx[y, x] + syy[y, x]
            out[y, x] = (sxx[y, x] * syy[y, x] - sxy[y, x] * sxy[y, x]) - k * (tr * tr)
    return out


@njit(cache=True)
def _smooth3(img):
    h, w = img.shape
    q = np.empty((h + 2, w + 2), dtype=np.float64)
    for y in range(h + 2):
        sy = min(max(y - 1, 0), h - 1)
        for x in range(w + 2):
            sx = min(max(x - 1, 0), w - 1)
            q[y, x] = img[sy, sx]
    hh = np.empty((h + 2, w), dtype=np.float64)
    for y in range(h + 2):
        for x in range(w):
            hh[y, x] = (q[y, x] + 2.0 * q[y, x + 1] + q[y, x + 2]) / 4.0
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            out[y, x] = (hh[y, x] + 2.0 * hh[y + 1, x] + hh[y + 2, x]) / 4.0
    return out


@njit(cache=True)
def local_max_mask(resp, radius):
    h, w = resp.shape
    out = np.zeros((h, w), dtype=np.bool_)
    for y in range(h):
        for x in range(w):
            v = resp[y, x]
            if v <= 0.0:
                continue
            best = -np.inf
            y0 = max(y - radius, 0)
            y1 = min(y + radius, h - 1)
            x0 = max(x - radius, 0)
            x1 = min(x + radius, w - 1)
            for yy in range(y0, y1 + 1):
                for xx in range(x0, x1 + 1):
                    if resp[yy, xx] > best:
                        best = resp[yy, xx]
            if v >= best:
                out[y, x] = True
    return out


@njit(cache=True)
def _fast_scores_impl(gray, threshold, offsets, arc_len):
    h, w = gray.shape
    scores = np.zeros((h, w), dtype=np.float64)
    if h <= 6 or w <= 6:
        return scores
    d = np.empty(16, dtype=np.float64)
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = gray[y, x]
            for u in range(16):
                d[u] = gray[y + offsets[u, 1], x + offsets[u, 0]] - c
            best = -np.inf
            for start in range(16):
                mn_b = np.inf
                mn_d = np.inf
                for j in range(arc_len):
                    v = d[(start + j) % 16]
                    if v < mn_b:
                        mn_b = v
                    if -v < mn_d:
                        mn_d = -v
                if mn_b > best:
                    best = mn_b
                if mn_d > best:
                    best = mn_d
            if best > threshold:
                scores[y, x] = best
    return scores


def fast_scores(gray, threshold):
    return _fast_scores_impl(gray, threshold, FAST_OFFSETS, FAST_ARC)


@njit(cache=True)
def bilinear_sample(img, xs, ys, clamp_edges, fill):
    h, w = img.shape
    n = xs.shape[0]
    out = np.empty(n, dtype=np.float64)
    eps = 1e-9
    for i in range(n):
        x = xs[i]
        y = ys[i]
        if not clamp_edges:
            if x < -eps or x > w - 1 + eps or y < -eps or y > h - 1 + eps:
                out[i] = fill
                continue
        if x < 0.0:
            x = 0.0
        elif x > w - 1.0:
            x = w - 1.0
        if y < 0.0:
            y = 0.0
        elif y > h - 1.0:
            y = h - 1.0
        x0 = int(np.floor(x))
        y0 = int(np.floor(y))
        x1 = min(x0 + 1, w - 1)
        y1 = min(y0 + 1, h - 1)
        fx = x - x0
        fy = y - y0
        top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
        bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
        out[i] = top * (1.0 - fy) + bot * fy
    return out


@njit(cache=True, parallel=True)
def tps_eval_points(pts, ctrl, weights, affine):
    m = pts.shape[0]
    n = ctrl.shape[0]
    out = np.empty((m, 2), dtype=np.float64)
    for i in prange(m):
        px = pts[i, 0]
        py = pts[i, 1]
        ox = affine[0, 0] * px + affine[0, 1] * py + affine[0, 2]
        oy = affine[1, 0] * px + affine[1, 1] * py + affine[1, 2]
        for j in range(n):
            dx = px - ctrl[j, 0]
            dy = py - ctrl[j, 1]
            r2 = dx * dx + dy * dy
            if r2 > 0.0:
                u = 0.5 * r2 * np.log(r2)
                ox += u * weights[j, 0]
                oy += u * weights[j, 1]
        out[i, 0] = ox
        out[i, 1] = oy
    return out


@njit(cache=True)
def label_components(mask):
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int64)
    stack = np.empty(h * w, dtype=np.int64)
    nxt = 0
    for sy in range(h):
        for sx in range(w):
            if mask[sy, sx] == 0 or labels[sy, sx] != 0:
                continue
            nxt += 1
            top = 0
            stack[top] = sy * w + sx
            labels[sy, sx] = nxt
            top += 1
            while top > 0:
                top -= 1
                pos = stack[top]
                y = pos // w
                x = pos % w
                for dy in range(-1, 2):
                    for dx in range(-1, 2):
                        if dx == 0 and dy == 0:
                            continue
                        yy = y + dy
                        xx = x + dx
                        if 0 <= yy < h and 0 <= xx < w:
                            if mask[yy, xx] != 0 and labels[yy, xx] == 0:
                                labels[yy, xx] = nxt
                                stack[top] = yy * w + xx
                                top += 1
    return labels


@njit(cache=True)
def window_stats_valid(a, b, g):
    k = g.shape[0]
    oh = a.shape[0] - k + 1
    ow = a.shape[1] - k + 1
    mu_a = np.empty((oh, ow), dtype=np.float64)
    mu_b = np.empty((oh, ow), dtype=np.float64)
    e_aa = np.empty((oh, ow), dtype=np.float64)
    e_bb = np.empty((oh, ow), dtype=np.float64)
    e_ab = np.empty((oh, ow), dtype=np.float64)
    for y in range(oh):
        for x in range(ow):
            sa = 0.0
            sb = 0.0
            saa = 0.0
            sbb = 0.0
            sab = 0.0
            for i in range(k):
                for j in range(k):
                    wgt = g[i, j]
                    va = a[y + i, x + j]
                    vb = b[y + i, x + j]
                    sa += wgt * va
                    sb += wgt * vb
                    saa += wgt * va * va
                    sbb += wgt * vb * vb
                    sab += wgt * va * vb
            mu_a[y, x] = sa
            mu_b[y, x] = sb
            e_aa[y, x] = saa
            e_bb[y, x] = sbb
            e_ab[y, x] = sab
    return mu_a, mu_b, e_aa, e_bb, e_ab
