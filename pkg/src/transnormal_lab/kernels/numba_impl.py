"""Numba-compiled kernels.  Mirrors numpy_impl exactly; see codes.py for
the array format both backends consume."""

import numpy as np
from numba import njit, prange

MAX_EVENTS = 128


@njit(cache=True)
def _spline_eval(floats, off, n, x):
    # uniform knots; edge polynomials extrapolate beyond the table
    x0 = floats[off]
    dx = floats[off + 1]
    m = n - 1
    i = int(np.floor((x - x0) / dx))
    if i < 0:
        i = 0
    elif i > m - 1:
        i = m - 1
    t = x - (x0 + i * dx)
    base = off + 2
    a = floats[base + i]
    b = floats[base + m + i]
    c = floats[base + 2 * m + i]
    d = floats[base + 3 * m + i]
    return ((a * t + b) * t + c) * t + d


@njit(cache=True)
def _warp_r(ints, floats, r):
    kind = ints[2]
    if kind == 0:
        return floats[8]
    if kind == 1:
        return floats[8] * (r - floats[11])
    if kind == 2:
        return floats[8] * np.sin(floats[9] * r + floats[10])
    return _spline_eval(floats, 16, ints[6], r)


@njit(cache=True)
def _warp_s(ints, floats, th):
    kind = ints[3]
    if kind == 0:
        return floats[12]
    off = 16
    if ints[2] == 3:
        off += 2 + 4 * (ints[6] - 1)
    return _spline_eval(floats, off, ints[7], th % floats[2])


@njit(cache=True)
def _metric_into(ints, floats, p, g):
    fam = ints[0]
    d = ints[1]
    for i in range(d):
        for j in range(d):
            g[i, j] = 0.0
    if fam == 0:
        for i in range(d):
            g[i, i] = 1.0
    elif fam == 1:
        w = _warp_r(ints, floats, p[0]) * _warp_s(ints, floats, p[1])
        g[0, 0] = 1.0
        g[1, 1] = w * w
    else:
        k = ints[2]
        base = ints[3]
        if base == 0:
            for i in range(k):
                g[i, i] = 1.0
        else:
            k2 = k * k
            L = floats[0]
            cw = 0.0
            sw = 0.0
            if base == 2 and L > 0.0:
                ang = 2.0 * np.pi * p[0] / L
                cw = np.cos(ang)
                sw = np.sin(ang)
            bb = 0.0
            for i in range(k):
                bi = 0.0
                for j in range(k):
                    a = floats[1 + i * k + j]
                    a += floats[1 + k2 + i * k + j] * cw
                    a += floats[1 + 2 * k2 + i * k + j] * sw
                    bi += a * p[1 + j]
                g[0, 1 + i] = bi
                g[1 + i, 0] = bi
                g[1 + i, 1 + i] = 1.0
                bb += bi * bi
            g[0, 0] = 1.0 + bb


@njit(cache=True)
def _christoffel_into(ints, floats, p, h, order, gam):
    d = ints[1]
    if ints[0] == 0:
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    gam[k, i, j] = 0.0
        return
    dg = np.empty((d, d, d))
    ga = np.empty((d, d))
    gb = np.empty((d, d))
    pt = p.copy()
    for l in range(d):
        x = p[l]
        if order == 4:
            pt[l] = x + 2.0 * h
            _metric_into(ints, floats, pt, ga)
            for i in range(d):
                for j in range(d):
                    dg[l, i, j] = -ga[i, j]
            pt[l] = x + h
            _metric_into(ints, floats, pt, ga)
            for i in range(d):
                for j in range(d):
                    dg[l, i, j] += 8.0 * ga[i, j]
            pt[l] = x - h
            _metric_into(ints, floats, pt, ga)
            for i in range(d):
                for j in range(d):
                    dg[l, i, j] -= 8.0 * ga[i, j]
            pt[l] = x - 2.0 * h
            _metric_into(ints, floats, pt, ga)
            for i in range(d):
                for j in range(d):
                    dg[l, i, j] = (dg[l, i, j] + ga[i, j]) / (12.0 * h)
        else:
            pt[l] = x + h
            _metric_into(ints, floats, pt, ga)
            pt[l] = x - h
            _metric_into(ints, floats, pt, gb)
            for i in range(d):
                for j in range(d):
                    dg[l, i, j] = (ga[i, j] - gb[i, j]) / (2.0 * h)
        pt[l] = x
    _metric_into(ints, floats, p, ga)
    ginv = np.linalg.inv(ga)
    for k in range(d):
        for i in range(d):
            for j in range(d):
                s = 0.0
                for l in range(d):
                    s += ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                gam[k, i, j] = 0.5 * s


@njit(cache=True)
def metric_batch(ints, floats, P):
    n, d = P.shape
    out = np.empty((n, d, d))
    for i in range(n):
        _metric_into(ints, floats, P[i], out[i])
    return out


@njit(cache=True)
def christoffel_batch(ints, floats, P, h, order):
    n, d = P.shape
    out = np.empty((n, d, d, d))
    for i in range(n):
        _christoffel_into(ints, floats, P[i], h, order, out[i])
    return out


@njit(cache=True)
def _accel(ints, floats, p, v, h, order, a):
    d = p.shape[0]
    gam = np.empty((d, d, d))
    _christoffel_into(ints, floats, p, h, order, gam)
    for k in range(d):
        s = 0.0
        for i in range(d):
            for j in range(d):
                s += gam[k, i, j] * v[i] * v[j]
        a[k] = -s


@njit(cache=True)
def _quad(g, v):
    d = v.shape[0]
    s = 0.0
    for i in range(d):
        for j in range(d):
            s += v[i] * g[i, j] * v[j]
    return s


@njit(cache=True)
def _fold(ints, floats, p, v, r_prev):
    # returns (event code, crossing fraction within the step)
    lk = ints[4]
    rk = ints[5]
    r_lo = floats[0]
    r_hi = floats[1]
    r = p[0]
    if lk == 3:
        per = r_hi - r_lo
        if r < r_lo or r >= r_hi:
            p[0] = r_lo + ((r - r_lo) % per)
            return 3, 0.5
        return 0, 0.0
    if lk != 0 and r < r_lo:
        frac = 0.0
        if r != r_prev:
            frac = (r_lo - r_prev) / (r - r_prev)
        p[0] = 2.0 * r_lo - r
        p[1] = p[1] + floats[3]
        v[0] = -v[0]
        return 1, frac
    if rk != 0 and r > r_hi:
        frac = 0.0
        if r != r_prev:
            frac = (r_hi - r_prev) / (r - r_prev)
        p[0] = 2.0 * r_hi - r
        p[1] = p[1] + floats[4]
        v[0] = -v[0]
        return 2, frac
    return 0, 0.0


@njit(cache=True)
def _rk4_step(ints, floats, p, v, dt, h, order):
    d = p.shape[0]
    a1 = np.empty(d)
    a2 = np.empty(d)
    a3 = np.empty(d)
    a4 = np.empty(d)
    _accel(ints, floats, p, v, h, order, a1)
    p2 = p + 0.5 * dt * v
    v2 = v + 0.5 * dt * a1
    _accel(ints, floats, p2, v2, h, order, a2)
    p3 = p + 0.5 * dt * v2
    v3 = v + 0.5 * dt * a2
    _accel(ints, floats, p3, v3, h, order, a3)
    p4 = p + dt * v3
    v4 = v + dt * a3
    _accel(ints, floats, p4, v4, h, order, a4)
    for i in range(d):
        p[i] = p[i] + dt * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) / 6.0
        v[i] = v[i] + dt * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]) / 6.0


@njit(cache=True)
def geodesic_batch(ints, floats, P0, V0, step, n_steps, h_chr, order, record_stride):
    m, d = P0.shape
    n_rec = n_steps // record_stride + 1
    traj = np.empty((m, n_rec, d))
    vel = np.empty((m, n_rec, d))
    energy = np.empty((m, n_rec))
    events = np.zeros((m, MAX_EVENTS, 2))
    n_events = np.zeros(m, dtype=np.int64)
    g = np.empty((d, d))
    warped = ints[0] == 1
    for b in range(m):
        p = P0[b].copy()
        v = V0[b].copy()
        _metric_into(ints, floats, p, g)
        traj[b, 0] = p
        vel[b, 0] = v
        energy[b, 0] = _quad(g, v)
        rec = 1
        for s in range(n_steps):
            r_prev = p[0]
            _rk4_step(ints, floats, p, v, step, h_chr, order)
            if warped:
                code, frac = _fold(ints, floats, p, v, r_prev)
                guard = 0
                while code != 0 and guard < 8:
                    idx = n_events[b]
                    if idx < MAX_EVENTS:
                        events[b, idx, 0] = (s + frac) * step
                        events[b, idx, 1] = code
                        n_events[b] = idx + 1
                    code, frac = _fold(ints, floats, p, v, p[0])
                    guard += 1
            if (s + 1) % record_stride == 0:
                _metric_into(ints, floats, p, g)
                traj[b, rec] = p
                vel[b, rec] = v
                energy[b, rec] = _quad(g, v)
                rec += 1
    return traj, vel, energy, events, n_events


@njit(cache=True, parallel=True)
def hausdorff_directed(A, SEG):
    # max over points of min distance to any segment; inputs pre-scaled
    n = A.shape[0]
    M = SEG.shape[0]
    d = A.shape[1]
    out = np.empty(n)
    for i in prange(n):
        best = 1e300
        for j in range(M):
            ww = 0.0
            wa = 0.0
            for c in range(d):
                w = SEG[j, 1, c] - SEG[j, 0, c]
                ww += w * w
                wa += w * (A[i, c] - SEG[j, 0, c])
            t = 0.0
            if ww > 1e-300:
                t = wa / ww
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            dist = 0.0
            for c in range(d):
                diff = A[i, c] - (SEG[j, 0, c] + t * (SEG[j, 1, c] - SEG[j, 0, c]))
                dist += diff * diff
            if dist < best:
                best = dist
        out[i] = best
    return np.sqrt(np.max(out))
