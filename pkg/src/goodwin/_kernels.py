"""Compiled stepping kernels for the preset curves.

State is carried in log coordinates ``z = log x``, ``w = log y`` so that
``x, y > 0`` holds structurally.  A step of length ``h`` with Brownian
increment ``dW`` applies classical RK4 to the drift (Ito correction
included) and an Euler update for the common diffusion ``sigma(y) dW``.
A step is split in two by Brownian-bridge interpolation when the
proposal leaves ``y < 1``, is not finite, or when ``h`` times the local
rate exceeds ``STIFF``.

Normals come from a counter-based hash keyed by
``(seed, path, coarse step, bridge node)`` so every path, step and split
has its own reproducible variate independent of evaluation order.
"""

import math
import os

import numba
import numpy as np
from numba import njit, prange, uint64

if "NUMBA_THREADING_LAYER" not in os.environ:
    # probing an old TBB first only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

STIFF = 0.01

# parameter vector layout
P_ALPHA, P_GAMMA, P_NU, P_PHI0, P_PHI1, P_SIG0, P_XHAT, P_YHAT, P_XC, P_YC, P_DIR = range(11)
N_PAR = 11

# event record layout
(E_STATUS, E_T_END, E_WIND_T, E_WIND_Y, E_WIND_DONE, E_LINE_T, E_LINE_Y, E_LINE_X,
 E_LINE_DONE, E_BAND_T, E_BAND_DONE, E_OUT, E_SUBSTEPS, E_MAX_DEPTH, E_Z, E_W, E_RHO) = range(17)
N_EV = 17

STATUS_OK = 0
STATUS_FAIL = 1

STOP_WIND = 1
STOP_LINE = 2
STOP_BAND = 4

_TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _mix(k):
    k = (k ^ (k >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    k = (k ^ (k >> uint64(27))) * uint64(0x94D049BB133111EB)
    return k ^ (k >> uint64(31))


@njit(cache=True)
def hash_normal(seed, path, step, node):
    """Standard normal determined by four non-negative integer keys."""
    k = _mix(uint64(seed) + uint64(0x9E3779B97F4A7C15))
    k = _mix(k ^ (uint64(path) * uint64(0xD1B54A32D192ED03)))
    k = _mix(k ^ (uint64(step) * uint64(0xABC98388FB8FAC03)))
    k1 = _mix(k ^ (uint64(node) * uint64(0x8CB92BA72F3D8DD7)))
    k2 = _mix(k1 + uint64(0x9E3779B97F4A7C15))
    u1 = (float(k1 >> uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)
    u2 = float(k2 >> uint64(11)) * (1.0 / 9007199254740992.0)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit(cache=True)
def _drift(z, w, p):
    b = -math.expm1(w)
    if not (b > 0.0):
        return math.nan, math.nan
    x = math.exp(z)
    s = p[P_SIG0] * b
    half_s2 = 0.5 * s * s
    phi = p[P_PHI1] / (b * b) + p[P_PHI0]
    kap = (1.0 - x) / p[P_NU]
    d = p[P_DIR]
    return d * (phi - p[P_ALPHA] + half_s2), d * (kap - p[P_GAMMA] + half_s2)


@njit(cache=True)
def _rate(z, w, p):
    b = -math.expm1(w)
    if not (b > 0.0):
        return math.inf
    x = math.exp(z)
    y = 1.0 - b
    phi = p[P_PHI1] / (b * b) + p[P_PHI0]
    dphi = 2.0 * p[P_PHI1] / (b * b * b)
    kap = (1.0 - x) / p[P_NU]
    return (abs(phi - p[P_ALPHA]) + abs(kap - p[P_GAMMA])
            + math.sqrt(x * y * dphi / p[P_NU]))


@njit(cache=True)
def _propose(z, w, h, dw, p):
    k1z, k1w = _drift(z, w, p)
    k2z, k2w = _drift(z + 0.5 * h * k1z, w + 0.5 * h * k1w, p)
    k3z, k3w = _drift(z + 0.5 * h * k2z, w + 0.5 * h * k2w, p)
    k4z, k4w = _drift(z + h * k3z, w + h * k3w, p)
    s = p[P_SIG0] * (-math.expm1(w))
    nz = z + h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0 + s * dw
    nw = w + h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0 + s * dw
    # theta = y/x moves by h/6 * (weighted stage values of kw - kz); the noise cancels
    g1, g2, g3, g4 = k1w - k1z, k2w - k2z, k3w - k3z, k4w - k4z
    gmin = min(min(g1, g2), min(g3, g4))
    gmax = max(max(g1, g2), max(g3, g4))
    return nz, nw, s, gmin, gmax


@njit(cache=True)
def _bridge_left(dw, h, seed, path, coarse, node):
    """Increment over the left half of a split step, given the whole-step increment."""
    zn = hash_normal(seed, path, coarse, node)
    return 0.5 * dw + 0.5 * math.sqrt(h) * zn


@njit(cache=True)
def lyap(z, w, p):
    """Closed-form Lyapunov function of the preset at ``(exp z, exp w)``."""
    x_hat = p[P_XHAT]
    y_hat = p[P_YHAT]
    x = math.exp(z)
    y = math.exp(w)
    a = 1.0 - y_hat
    b = -math.expm1(w)
    d = y - y_hat
    v1 = x_hat / p[P_NU] * _l(x / x_hat - 1.0)
    v2 = p[P_PHI1] * ((1.0 / (a * a) - 1.0) * _l(d / y_hat) + _l(-d / a) + d * d / (a * a * b))
    return v1 + v2


@njit(cache=True)
def _l(u):
    if abs(u) < 0.05:
        s = 0.0
        pw = u * u
        for k in range(2, 15):
            if k % 2 == 0:
                s += pw / k
            else:
                s -= pw / k
            pw *= u
        return s
    return u - math.log1p(u)


@njit(cache=True)
def _root_increment(seed, path, coarse, level, fine_index, dt_coarse):
    """Increment of the fine step ``fine_index`` at dyadic refinement ``level``."""
    dw = math.sqrt(dt_coarse) * hash_normal(seed, path, coarse, 0)
    h = dt_coarse
    node = 1
    for j in range(level - 1, -1, -1):
        zn = hash_normal(seed, path, coarse, node)
        left = 0.5 * dw + 0.5 * math.sqrt(h) * zn
        h *= 0.5
        if (fine_index >> j) & 1:
            dw = dw - left
            node = 2 * node + 1
        else:
            dw = left
            node = 2 * node
    return dw, node


@njit(cache=True)
def run_path(p, z0, w0, dt, n_steps, seed, path, level, max_halvings, stop_mask,
             band_v0, band_rho, line_lt, rec_stride, rec, ev):
    """Advance one path for at most ``n_steps`` base steps.

    ``rec`` (shape ``(n_rec, 7)``) receives ``t, z, w, rho, int sigma dW,
    int sigma^2 dt, dW over the stride`` every ``rec_stride`` steps;
    ``ev`` (length ``N_EV``) receives the event summary.  Returns the
    number of rows written.
    """
    stack_h = np.empty(max_halvings + 2)
    stack_dw = np.empty(max_halvings + 2)
    stack_node = np.empty(max_halvings + 2, dtype=np.int64)
    stack_depth = np.empty(max_halvings + 2, dtype=np.int64)

    noisy = p[P_SIG0] > 0.0
    xc = p[P_XC]
    yc = p[P_YC]
    z = z0
    w = w0
    x = math.exp(z)
    y = math.exp(w)
    rho = 0.0
    vx_prev = x - xc
    vy_prev = y - yc
    isdw = 0.0
    is2dt = 0.0
    dw_acc = 0.0

    g_prev = (w - z) - line_lt
    sign_prev = 0.0
    if abs(g_prev) > 1e-12:
        sign_prev = 1.0 if g_prev > 0 else -1.0
    n_cross = 0

    wind_done = False
    line_done = False
    band_done = False
    for i in range(N_EV):
        ev[i] = 0.0
    ev[E_WIND_T] = math.nan
    ev[E_LINE_T] = math.nan
    ev[E_BAND_T] = math.nan
    ev[E_WIND_Y] = math.nan
    ev[E_LINE_Y] = math.nan
    ev[E_LINE_X] = math.nan
    status = STATUS_OK
    substeps = 0
    max_depth = 0
    n_out = 0

    n_rec = 0
    if rec_stride > 0 and rec.shape[0] > 0:
        rec[0, 0] = 0.0
        rec[0, 1] = z
        rec[0, 2] = w
        rec[0, 3] = 0.0
        rec[0, 4] = 0.0
        rec[0, 5] = 0.0
        rec[0, 6] = 0.0
        n_rec = 1

    t_now = 0.0
    k = 0
    while k < n_steps:
        t0 = k * dt
        if noisy:
            coarse = k >> level
            fine = k & ((1 << level) - 1)
            dw0, node0 = _root_increment(seed, path, coarse, level, fine, dt * (1 << level))
        else:
            coarse = k
            dw0 = 0.0
            node0 = 1
        top = 0
        stack_h[0] = dt
        stack_dw[0] = dw0
        stack_node[0] = node0
        stack_depth[0] = 0
        t_sub = t0
        while top >= 0:
            h = stack_h[top]
            dw = stack_dw[top]
            node = stack_node[top]
            depth = stack_depth[top]
            top -= 1
            nz, nw, s, _, _ = _propose(z, w, h, dw, p)
            ok = math.isfinite(nz) and math.isfinite(nw) and nw < 0.0 and math.exp(nw) < 1.0
            if ok:
                r = max(_rate(z, w, p), _rate(nz, nw, p))
                ok = r * h <= STIFF
            if not ok:
                if depth >= max_halvings:
                    status = STATUS_FAIL
                    break
                if noisy:
                    left = _bridge_left(dw, h, seed, path, coarse, node)
                else:
                    left = 0.0
                # right half pushed first so the left half runs next
                top += 1
                stack_h[top] = 0.5 * h
                stack_dw[top] = dw - left
                stack_node[top] = 2 * node + 1
                stack_depth[top] = depth + 1
                top += 1
                stack_h[top] = 0.5 * h
                stack_dw[top] = left
                stack_node[top] = 2 * node
                stack_depth[top] = depth + 1
                if depth + 1 > max_depth:
                    max_depth = depth + 1
                continue

            # accepted sub-step
            substeps += 1
            isdw += s * dw
            is2dt += s * s * h
            dw_acc += dw
            t_prev = t_sub
            t_sub = t_sub + h
            y_prev = y
            x_prev = x
            z = nz
            w = nw
            x = math.exp(z)
            y = math.exp(w)
            if not (x > 0.0 and y > 0.0 and y < 1.0):
                n_out += 1

            # winding about the centre
            vx = x - xc
            vy = y - yc
            cross = vx_prev * vy - vy_prev * vx
            dot = vx_prev * vx + vy_prev * vy
            rho_prev = rho
            rho += math.atan2(cross, dot)
            vx_prev = vx
            vy_prev = vy
            if not wind_done and abs(rho) >= _TWO_PI:
                frac = (_TWO_PI - abs(rho_prev)) / (abs(rho) - abs(rho_prev))
                ev[E_WIND_T] = t_prev + frac * h
                ev[E_WIND_Y] = y_prev + frac * (y - y_prev)
                wind_done = True

            # crossings of the line log(y/x) = line_lt
            g = (w - z) - line_lt
            if not line_done:
                sg = 0.0
                if g > 0.0:
                    sg = 1.0
                elif g < 0.0:
                    sg = -1.0
                if sign_prev == 0.0:
                    if abs(g) > 1e-12:
                        sign_prev = sg
                elif sg != 0.0 and sg != sign_prev:
                    n_cross += 1
                    sign_prev = sg
                    if n_cross == 2:
                        frac = g_prev / (g_prev - g)
                        ev[E_LINE_T] = t_prev + frac * h
                        ev[E_LINE_Y] = y_prev + frac * (y - y_prev)
                        ev[E_LINE_X] = x_prev + frac * (x - x_prev)
                        line_done = True
            g_prev = g

            if (stop_mask & STOP_BAND) and not band_done:
                if abs(lyap(z, w, p) - band_v0) > band_rho:
                    ev[E_BAND_T] = t_sub
                    band_done = True

        if status == STATUS_FAIL:
            break
        k += 1
        t_now = k * dt
        if rec_stride > 0 and k % rec_stride == 0 and n_rec < rec.shape[0]:
            rec[n_rec, 0] = t_now
            rec[n_rec, 1] = z
            rec[n_rec, 2] = w
            rec[n_rec, 3] = rho
            rec[n_rec, 4] = isdw
            rec[n_rec, 5] = is2dt
            rec[n_rec, 6] = dw_acc
            dw_acc = 0.0
            n_rec += 1
        done = stop_mask != 0
        if stop_mask & STOP_WIND:
            done = done and wind_done
        if stop_mask & STOP_LINE:
            done = done and line_done
        if stop_mask & STOP_BAND:
            done = done and band_done
        if done:
            break

    ev[E_STATUS] = status
    ev[E_T_END] = t_now
    ev[E_WIND_DONE] = 1.0 if wind_done else 0.0
    ev[E_LINE_DONE] = 1.0 if line_done else 0.0
    ev[E_BAND_DONE] = 1.0 if band_done else 0.0
    ev[E_OUT] = n_out
    ev[E_SUBSTEPS] = substeps
    ev[E_MAX_DEPTH] = max_depth
    ev[E_Z] = z
    ev[E_W] = w
    ev[E_RHO] = rho
    return n_rec


@njit(cache=True, parallel=True)
def run_ensemble(p, starts, dt, n_steps, seed, path_ids, level, max_halvings, stop_mask,
                 band_v0, band_rho, line_lt):
    n = starts.shape[0]
    out = np.empty((n, N_EV))
    for i in prange(n):
        rec = np.empty((0, 7))
        ev = np.empty(N_EV)
        run_path(p, starts[i, 0], starts[i, 1], dt, n_steps, seed, path_ids[i], level,
                 max_halvings, stop_mask, band_v0, band_rho, line_lt, 0, rec, ev)
        for j in range(N_EV):
            out[i, j] = ev[j]
    return out


@njit(cache=True)
def replay_steps(p, z, w, dt, k0, n_base, seed, path, level, max_halvings, out):
    """Re-run base steps ``k0 .. k0 + n_base - 1`` of a path from ``(z, w)``.

    The sub-step sequence is the one :func:`run_path` takes, so the end
    state matches the recorded one bit for bit.  Accepted sub-steps are
    written to ``out`` as rows ``z, w, gmin, gmax`` while space lasts,
    ``gmin``/``gmax`` being the extreme stage values of the theta drift.
    Returns ``(n_sub, z, w, gmin, gmax, status)``; ``n_sub`` may exceed
    ``out.shape[0]``.
    """
    stack_h = np.empty(max_halvings + 2)
    stack_dw = np.empty(max_halvings + 2)
    stack_node = np.empty(max_halvings + 2, dtype=np.int64)
    stack_depth = np.empty(max_halvings + 2, dtype=np.int64)
    noisy = p[P_SIG0] > 0.0
    n_sub = 0
    g_lo = math.inf
    g_hi = -math.inf
    status = STATUS_OK
    for k in range(k0, k0 + n_base):
        if noisy:
            coarse = k >> level
            fine = k & ((1 << level) - 1)
            dw0, node0 = _root_increment(seed, path, coarse, level, fine, dt * (1 << level))
        else:
            coarse = k
            dw0 = 0.0
            node0 = 1
        top = 0
        stack_h[0] = dt
        stack_dw[0] = dw0
        stack_node[0] = node0
        stack_depth[0] = 0
        while top >= 0:
            h = stack_h[top]
            dw = stack_dw[top]
            node = stack_node[top]
            depth = stack_depth[top]
            top -= 1
            nz, nw, s, gmin, gmax = _propose(z, w, h, dw, p)
            ok = math.isfinite(nz) and math.isfinite(nw) and nw < 0.0 and math.exp(nw) < 1.0
            if ok:
                r = max(_rate(z, w, p), _rate(nz, nw, p))
                ok = r * h <= STIFF
            if not ok:
                if depth >= max_halvings:
                    status = STATUS_FAIL
                    break
                if noisy:
                    left = _bridge_left(dw, h, seed, path, coarse, node)
                else:
                    left = 0.0
                top += 1
                stack_h[top] = 0.5 * h
                stack_dw[top] = dw - left
                stack_node[top] = 2 * node + 1
                stack_depth[top] = depth + 1
                top += 1
                stack_h[top] = 0.5 * h
                stack_dw[top] = left
                stack_node[top] = 2 * node
                stack_depth[top] = depth + 1
                continue
            z = nz
            w = nw
            g_lo = min(g_lo, gmin)
            g_hi = max(g_hi, gmax)
            if n_sub < out.shape[0]:
                out[n_sub, 0] = z
                out[n_sub, 1] = w
                out[n_sub, 2] = gmin
                out[n_sub, 3] = gmax
            n_sub += 1
        if status == STATUS_FAIL:
            break
    return n_sub, z, w, g_lo, g_hi, status


@njit(cache=True)
def replay_intervals(p, zs, ws, dts, stride, seed, path, level, max_halvings, out):
    """Replay every recorded interval of a path from its recorded start state.

    Interval ``j`` covers ``stride`` base steps of length ``dts[j]``.
    ``out`` rows: ``gmin, gmax, z_end, w_end, status`` per interval.
    """
    buf = np.empty((0, 4))
    for j in range(zs.shape[0] - 1):
        n, z, w, g_lo, g_hi, status = replay_steps(p, zs[j], ws[j], dts[j], j * stride, stride,
                                                   seed, path, level, max_halvings, buf)
        out[j, 0] = g_lo
        out[j, 1] = g_hi
        out[j, 2] = z
        out[j, 3] = w
        out[j, 4] = status
