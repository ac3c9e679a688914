"""Pure numpy kernels, the fallback twin of numba_impl.

Same call signatures and the same numerical conventions; vectorised over
points instead of compiled loops.
"""

import numpy as np

MAX_EVENTS = 128


def _spline_eval(floats, off, n, x):
    x = np.asarray(x, dtype=np.float64)
    x0 = floats[off]
    dx = floats[off + 1]
    m = n - 1
    i = np.floor((x - x0) / dx).astype(np.int64)
    np.clip(i, 0, m - 1, out=i)
    t = x - (x0 + i * dx)
    base = off + 2
    a = floats[base + i]
    b = floats[base + m + i]
    c = floats[base + 2 * m + i]
    d = floats[base + 3 * m + i]
    return ((a * t + b) * t + c) * t + d


def _warp_r(ints, floats, r):
    kind = ints[2]
    if kind == 0:
        return np.full_like(np.asarray(r, dtype=np.float64), floats[8])
    if kind == 1:
        return floats[8] * (r - floats[11])
    if kind == 2:
        return floats[8] * np.sin(floats[9] * r + floats[10])
    return _spline_eval(floats, 16, int(ints[6]), r)


def _warp_s(ints, floats, th):
    kind = ints[3]
    if kind == 0:
        return np.full_like(np.asarray(th, dtype=np.float64), floats[12])
    off = 16
    if ints[2] == 3:
        off += 2 + 4 * (int(ints[6]) - 1)
    return _spline_eval(floats, off, int(ints[7]), th % floats[2])


def metric_batch(ints, floats, P):
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n, d = P.shape
    fam = ints[0]
    g = np.zeros((n, d, d))
    if fam == 0:
        g[:] = np.eye(d)
    elif fam == 1:
        w = _warp_r(ints, floats, P[:, 0]) * _warp_s(ints, floats, P[:, 1])
        g[:, 0, 0] = 1.0
        g[:, 1, 1] = w * w
    else:
        k = int(ints[2])
        base = int(ints[3])
        if base == 0:
            g[:] = np.eye(d)
        else:
            k2 = k * k
            A0 = floats[1 : 1 + k2].reshape(k, k)
            A1 = floats[1 + k2 : 1 + 2 * k2].reshape(k, k)
            B1 = floats[1 + 2 * k2 : 1 + 3 * k2].reshape(k, k)
            L = floats[0]
            if base == 2 and L > 0.0:
                ang = 2.0 * np.pi * P[:, 0] / L
                A = (
                    A0[None]
                    + A1[None] * np.cos(ang)[:, None, None]
                    + B1[None] * np.sin(ang)[:, None, None]
                )
            else:
                A = np.broadcast_to(A0, (n, k, k))
            b = np.einsum("nij,nj->ni", A, P[:, 1:])
            g[:, 0, 0] = 1.0 + (b * b).sum(axis=1)
            g[:, 0, 1:] = b
            g[:, 1:, 0] = b
            idx = np.arange(1, d)
            g[:, idx, idx] = 1.0
    return g


def christoffel_batch(ints, floats, P, h, order):
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n, d = P.shape
    if ints[0] == 0:
        return np.zeros((n, d, d, d))
    dg = np.empty((n, d, d, d))
    for l in range(d):
        e = np.zeros(d)
        e[l] = 1.0
        if order == 4:
            dg[:, l] = (
                -metric_batch(ints, floats, P + 2 * h * e)
                + 8.0 * metric_batch(ints, floats, P + h * e)
                - 8.0 * metric_batch(ints, floats, P - h * e)
                + metric_batch(ints, floats, P - 2 * h * e)
            ) / (12.0 * h)
        else:
            dg[:, l] = (
                metric_batch(ints, floats, P + h * e)
                - metric_batch(ints, floats, P - h * e)
            ) / (2.0 * h)
    g = metric_batch(ints, floats, P)
    ginv = np.linalg.inv(g)
    # dg[n,a,b,c] = d_a g_bc; term[n,l,i,j] = d_i g_jl + d_j g_il - d_l g_ij
    term = (
        np.einsum("nbca->nabc", dg) + np.einsum("ncba->nabc", dg) - dg
    )
    return 0.5 * np.einsum("nkl,nlij->nkij", ginv, term)


def _accel_batch(ints, floats, P, V, h, order):
    gam = christoffel_batch(ints, floats, P, h, order)
    return -np.einsum("nkij,ni,nj->nk", gam, V, V)


def _energy_batch(ints, floats, P, V):
    g = metric_batch(ints, floats, P)
    return np.einsum("ni,nij,nj->n", V, g, V)


def _fold_batch(ints, floats, P, V, r_prev, step, s, events, n_events):
    lk = ints[4]
    rk = ints[5]
    r_lo = floats[0]
    r_hi = floats[1]
    if lk == 3:
        per = r_hi - r_lo
        out = (P[:, 0] < r_lo) | (P[:, 0] >= r_hi)
        if out.any():
            P[out, 0] = r_lo + ((P[out, 0] - r_lo) % per)
            for b in np.nonzero(out)[0]:
                idx = n_events[b]
                if idx < MAX_EVENTS:
                    events[b, idx, 0] = (s + 0.5) * step
                    events[b, idx, 1] = 3
                    n_events[b] = idx + 1
        return
    for _ in range(8):
        moved = False
        if lk != 0:
            mask = P[:, 0] < r_lo
            if mask.any():
                moved = True
                r = P[mask, 0]
                prev = r_prev[mask]
                with np.errstate(invalid="ignore", divide="ignore"):
                    frac = np.where(r != prev, (r_lo - prev) / (r - prev), 0.0)
                P[mask, 0] = 2.0 * r_lo - r
                P[mask, 1] += floats[3]
                V[mask, 0] = -V[mask, 0]
                for b, f in zip(np.nonzero(mask)[0], frac):
                    idx = n_events[b]
                    if idx < MAX_EVENTS:
                        events[b, idx, 0] = (s + f) * step
                        events[b, idx, 1] = 1
                        n_events[b] = idx + 1
        if rk != 0:
            mask = P[:, 0] > r_hi
            if mask.any():
                moved = True
                r = P[mask, 0]
                prev = r_prev[mask]
                with np.errstate(invalid="ignore", divide="ignore"):
                    frac = np.where(r != prev, (r_hi - prev) / (r - prev), 0.0)
                P[mask, 0] = 2.0 * r_hi - r
                P[mask, 1] += floats[4]
                V[mask, 0] = -V[mask, 0]
                for b, f in zip(np.nonzero(mask)[0], frac):
                    idx = n_events[b]
                    if idx < MAX_EVENTS:
                        events[b, idx, 0] = (s + f) * step
                        events[b, idx, 1] = 2
                        n_events[b] = idx + 1
        if not moved:
            break
        r_prev = P[:, 0].copy()


def geodesic_batch(ints, floats, P0, V0, step, n_steps, h_chr, order, record_stride):
    P = np.array(P0, dtype=np.float64)
    V = np.array(V0, dtype=np.float64)
    m, d = P.shape
    n_rec = n_steps // record_stride + 1
    traj = np.empty((m, n_rec, d))
    vel = np.empty((m, n_rec, d))
    energy = np.empty((m, n_rec))
    events = np.zeros((m, MAX_EVENTS, 2))
    n_events = np.zeros(m, dtype=np.int64)
    traj[:, 0] = P
    vel[:, 0] = V
    energy[:, 0] = _energy_batch(ints, floats, P, V)
    warped = ints[0] == 1
    rec = 1
    for s in range(n_steps):
        r_prev = P[:, 0].copy()
        a1 = _accel_batch(ints, floats, P, V, h_chr, order)
        P2 = P + 0.5 * step * V
        V2 = V + 0.5 * step * a1
        a2 = _accel_batch(ints, floats, P2, V2, h_chr, order)
        P3 = P + 0.5 * step * V2
        V3 = V + 0.5 * step * a2
        a3 = _accel_batch(ints, floats, P3, V3, h_chr, order)
        P4 = P + step * V3
        V4 = V + step * a3
        a4 = _accel_batch(ints, floats, P4, V4, h_chr, order)
        P = P + step * (V + 2.0 * V2 + 2.0 * V3 + V4) / 6.0
        V = V + step * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        if warped:
            _fold_batch(ints, floats, P, V, r_prev, step, s, events, n_events)
        if (s + 1) % record_stride == 0:
            traj[:, rec] = P
            vel[:, rec] = V
            energy[:, rec] = _energy_batch(ints, floats, P, V)
            rec += 1
    return traj, vel, energy, events, n_events


def hausdorff_directed(A, SEG):
    A = np.asarray(A, dtype=np.float64)
    SEG = np.asarray(SEG, dtype=np.float64)
    S = SEG[:, 0]
    W = SEG[:, 1] - S
    ww = np.maximum((W * W).sum(axis=1), 1e-300)
    AS = A[:, None, :] - S[None, :, :]
    t = np.clip((AS * W[None]).sum(axis=-1) / ww[None], 0.0, 1.0)
    D = AS - t[..., None] * W[None]
    d2 = (D * D).sum(axis=-1)
    return float(np.sqrt(d2.min(axis=1).max()))
