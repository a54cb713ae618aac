"""Hot numeric kernels with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``HPB_DISABLE_NUMBA`` is unset (or ``0``). Both paths are always
importable under their explicit names (``*_numba`` / ``*_numpy``) so that
tests and the benchmark can compare them directly.
"""
import math
import os

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("HPB_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no")
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# ---------------------------------------------------------------------------
# Dirichlet gain  sin(pi*L*x) / (L*sin(pi*x)),  x = delta*s
# ---------------------------------------------------------------------------

def dirichlet_numpy(s, L, delta):
    """Vectorised finite-array gain, exact at the removable singularities.

    The argument is reduced to ``x = delta*s - m`` with integer ``m`` so the
    ratio keeps full relative precision near the singular points; the gain
    flips sign for every unit shift of ``delta*s`` because ``L`` is even.
    """
    arr = np.asarray(s, dtype=np.float64)
    t = np.atleast_1d(arr) * delta
    m = np.rint(t)
    x = t - m
    sign = 1.0 - 2.0 * np.mod(m, 2.0)
    den = L * np.sin(np.pi * x)
    small = np.abs(den) < L * 1e-9
    out = np.sin(np.pi * L * x) / np.where(small, 1.0, den)
    if small.any():
        ell = np.arange(L) - (L - 1) / 2.0
        out[small] = np.cos(2.0 * np.pi * np.multiply.outer(x[small], ell)).sum(axis=-1) / L
    return (sign * out).reshape(arr.shape)


@_njit
def _dirichlet_scalar(s, L, delta):
    t = s * delta
    m = np.rint(t)
    x = t - m
    sign = 1.0 - 2.0 * (m % 2.0)
    den = L * math.sin(math.pi * x)
    if abs(den) < L * 1e-9:
        acc = 0.0
        for ell in range(L):
            acc += math.cos(2.0 * math.pi * x * (ell - (L - 1) / 2.0))
        return sign * acc / L
    return sign * math.sin(math.pi * L * x) / den


@_njit
def dirichlet_numba(s, L, delta):
    flat = s.ravel()
    out = np.empty(flat.size)
    for i in range(flat.size):
        out[i] = _dirichlet_scalar(flat[i], L, delta)
    return out.reshape(s.shape)


# ---------------------------------------------------------------------------
# Compact-channel path weights r[n, d] = alpha[n, d] * sum_k beta[n, k] * g
# ---------------------------------------------------------------------------

def cascade_weights_numpy(cx, cy, alpha, beta, qx, qy, L, delta):
    gx = dirichlet_numpy(cx - qx[:, None, None], L, delta)
    gy = dirichlet_numpy(cy - qy[:, None, None], L, delta)
    return alpha * np.einsum("nk,nkd->nd", beta, gx * gy)


@_njit
def cascade_weights_numba(cx, cy, alpha, beta, qx, qy, L, delta):
    N, K, D = cx.shape
    r = np.zeros((N, D), dtype=np.complex128)
    for n in range(N):
        for d in range(D):
            acc = 0j
            for k in range(K):
                g = (_dirichlet_scalar(cx[n, k, d] - qx[n], L, delta)
                     * _dirichlet_scalar(cy[n, k, d] - qy[n], L, delta))
                acc += beta[n, k] * g
            r[n, d] = alpha[n, d] * acc
    return r


# ---------------------------------------------------------------------------
# Simulated annealing over the phase gradients with reference phases fixed
# ---------------------------------------------------------------------------

def _row_numpy(cx, cy, alpha, beta, bh, amp, qx, qy, L, delta):
    gx = dirichlet_numpy(cx - qx, L, delta)
    gy = dirichlet_numpy(cy - qy, L, delta)
    r = alpha * (beta @ (gx * gy))
    return amp * (r @ bh)


def anneal_numpy(cx, cy, alpha, beta, bh, amp, vconj, Q0, steps, uniforms,
                 t0, cooling, qbar, L, delta):
    """Metropolis search over ``Q`` maximising ``||sum_n conj(v_n) H_n(q_n)||^2``.

    Proposal ``it`` perturbs coordinate ``it % (2N)`` (x-gradients first,
    then y) by ``steps[it]``; the temperature is multiplied by ``cooling``
    after every full sweep of ``2N`` proposals. Returns the best-so-far
    gradients, the best objective and the number of accepted moves.
    """
    N = cx.shape[0]
    Q = Q0.copy()
    rows = np.empty((N, bh.shape[-1]), dtype=np.complex128)
    for n in range(N):
        rows[n] = _row_numpy(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             Q[0, n], Q[1, n], L, delta)
    h = vconj @ rows
    f = float(np.real(np.vdot(h, h)))
    best_f, best_Q = f, Q.copy()
    T = t0
    accepted = 0
    sweep = 2 * N
    for it in range(steps.size):
        c = it % sweep
        axis, n = divmod(c, N)
        old = Q[axis, n]
        new = min(max(old + steps[it], -qbar), qbar)
        if axis == 0:
            row = _row_numpy(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             new, Q[1, n], L, delta)
        else:
            row = _row_numpy(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             Q[0, n], new, L, delta)
        h_new = h + vconj[n] * (row - rows[n])
        f_new = float(np.real(np.vdot(h_new, h_new)))
        if f_new >= f or (T > 0.0 and uniforms[it] < math.exp((f_new - f) / T)):
            Q[axis, n] = new
            rows[n] = row
            h = h_new
            f = f_new
            accepted += 1
            if f > best_f:
                best_f = f
                best_Q = Q.copy()
        if c == sweep - 1:
            T *= cooling
    return best_Q, best_f, accepted


@_njit
def _row_numba(cx, cy, alpha, beta, bh, amp, qx, qy, L, delta):
    K, D = cx.shape
    M = bh.shape[1]
    out = np.zeros(M, dtype=np.complex128)
    for d in range(D):
        acc = 0j
        for k in range(K):
            acc += beta[k] * (_dirichlet_scalar(cx[k, d] - qx, L, delta)
                              * _dirichlet_scalar(cy[k, d] - qy, L, delta))
        r = amp * alpha[d] * acc
        for m in range(M):
            out[m] += r * bh[d, m]
    return out


@_njit
def anneal_numba(cx, cy, alpha, beta, bh, amp, vconj, Q0, steps, uniforms,
                 t0, cooling, qbar, L, delta):
    N = cx.shape[0]
    M = bh.shape[2]
    Q = Q0.copy()
    rows = np.empty((N, M), dtype=np.complex128)
    h = np.zeros(M, dtype=np.complex128)
    for n in range(N):
        rows[n] = _row_numba(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             Q[0, n], Q[1, n], L, delta)
        h += vconj[n] * rows[n]
    f = 0.0
    for m in range(M):
        f += h[m].real ** 2 + h[m].imag ** 2
    best_f = f
    best_Q = Q.copy()
    T = t0
    accepted = 0
    sweep = 2 * N
    h_new = np.empty(M, dtype=np.complex128)
    for it in range(steps.size):
        c = it % sweep
        axis = c // N
        n = c % N
        old = Q[axis, n]
        new = min(max(old + steps[it], -qbar), qbar)
        if axis == 0:
            row = _row_numba(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             new, Q[1, n], L, delta)
        else:
            row = _row_numba(cx[n], cy[n], alpha[n], beta[n], bh[n], amp[n],
                             Q[0, n], new, L, delta)
        f_new = 0.0
        for m in range(M):
            h_new[m] = h[m] + vconj[n] * (row[m] - rows[n, m])
            f_new += h_new[m].real ** 2 + h_new[m].imag ** 2
        if f_new >= f or (T > 0.0 and uniforms[it] < math.exp((f_new - f) / T)):
            Q[axis, n] = new
            rows[n] = row
            h[:] = h_new
            f = f_new
            accepted += 1
            if f > best_f:
                best_f = f
                best_Q = Q.copy()
        if c == sweep - 1:
            T *= cooling
    return best_Q, best_f, accepted


# ---------------------------------------------------------------------------
# Exhaustive gradient grid for a single surface
# ---------------------------------------------------------------------------

def grid_objective_numpy(cx, cy, alpha, beta, bh, amp, grid, L, delta):
    """Objective ``||H(qx, qy)||^2`` on the lattice ``grid x grid`` (N = 1)."""
    gx = dirichlet_numpy(cx[:, :, None] - grid, L, delta)   # (K, D, G)
    gy = dirichlet_numpy(cy[:, :, None] - grid, L, delta)
    D = cx.shape[1]
    G = grid.size
    R = np.zeros((D, G, G), dtype=np.complex128)
    for k in range(cx.shape[0]):
        R += beta[k] * (gx[k][:, :, None] * gy[k][:, None, :])
    R *= (amp * alpha)[:, None, None]
    gram = bh @ bh.conj().T
    f = np.einsum("dxy,de,exy->xy", R, gram, R.conj(), optimize=True)
    return f.real


@_njit
def grid_objective_numba(cx, cy, alpha, beta, bh, amp, grid, L, delta):
    K, D = cx.shape
    M = bh.shape[1]
    G = grid.size
    gx = np.empty((K, D, G))
    gy = np.empty((K, D, G))
    for k in range(K):
        for d in range(D):
            for i in range(G):
                gx[k, d, i] = _dirichlet_scalar(cx[k, d] - grid[i], L, delta)
                gy[k, d, i] = _dirichlet_scalar(cy[k, d] - grid[i], L, delta)
    w = amp * alpha
    out = np.empty((G, G))
    r = np.empty(D, dtype=np.complex128)
    for ix in range(G):
        for iy in range(G):
            for d in range(D):
                acc = 0j
                for k in range(K):
                    acc += beta[k] * (gx[k, d, ix] * gy[k, d, iy])
                r[d] = w[d] * acc
            f = 0.0
            for m in range(M):
                hm = 0j
                for d in range(D):
                    hm += r[d] * bh[d, m]
                f += hm.real ** 2 + hm.imag ** 2
            out[ix, iy] = f
    return out


if USE_NUMBA:
    def dirichlet(s, L, delta):
        arr = np.asarray(s, dtype=np.float64)
        out = dirichlet_numba(np.atleast_1d(arr), int(L), float(delta))
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    cascade_weights = cascade_weights_numba
    anneal = anneal_numba
    grid_objective = grid_objective_numba
else:
    def dirichlet(s, L, delta):
        out = dirichlet_numpy(s, int(L), float(delta))
        return out if np.ndim(out) else float(out)

    cascade_weights = cascade_weights_numpy
    anneal = anneal_numpy
    grid_objective = grid_objective_numpy


def warmup():
    """Trigger JIT compilation so timed sections exclude it."""
    if not USE_NUMBA:
        return
    cx = np.zeros((1, 1, 1))
    a = np.ones((1, 1), dtype=np.complex128)
    q = np.zeros(1)
    bh = np.ones((1, 1, 1), dtype=np.complex128)
    dirichlet(np.zeros(1), 2, 0.5)
    cascade_weights_numba(cx, cx, a, a, q, q, 2, 0.5)
    anneal_numba(cx, cx, a, a, bh, np.ones(1), np.ones(1, dtype=np.complex128),
                 np.zeros((2, 1)), np.zeros(2), np.zeros(2), 1.0, 0.9, 1.0, 2, 0.5)
    grid_objective_numba(cx[0], cx[0], a[0], a[0], bh[0], 1.0, np.zeros(2), 2, 0.5)
