"""Compiled inner loops for the fixed-step integrator.

The derivative is evaluated in matrix form.  With the non-Hermitian
``K = H - (i/2) sum L^dag L`` and ``Y = -i K rho`` the Lindblad right-hand side is
``Y + Y^dag + sum_j L_j rho L_j^dag``.  ``K`` is a sum of sparse terms with
time-dependent coefficients; its entries are merged onto their union sparsity
pattern once per stage.  The jump part is a list of
``(out index, in index, weight)`` triples on the flattened density matrix.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _derivative(k_slot, k_vals, k_term, u_rows, u_cols, j_out, j_in, j_vals, j_term, coef, rho, out):
    n = rho.shape[0]
    kv = np.zeros(u_rows.size, dtype=np.complex128)
    for e in range(k_slot.size):
        kv[k_slot[e]] += coef[k_term[e]] * k_vals[e]
    out[:, :] = 0.0
    for u in range(u_rows.size):
        a = u_rows[u]
        c = u_cols[u]
        w = -1j * kv[u]
        for b in range(n):
            out[a, b] += w * rho[c, b]
    for a in range(n):
        out[a, a] = 2.0 * out[a, a].real
        for b in range(a + 1, n):
            s = out[a, b] + np.conj(out[b, a])
            out[a, b] = s
            out[b, a] = np.conj(s)
    flat_out = out.reshape(n * n)
    flat_in = rho.reshape(n * n)
    for e in range(j_out.size):
        flat_out[j_out[e]] += coef[j_term[e]] * j_vals[e] * flat_in[j_in[e]]


@njit(cache=True, fastmath=True)
def derivative(k_slot, k_vals, k_term, u_rows, u_cols, j_out, j_in, j_vals, j_term, coef, rho):
    out = np.empty_like(rho)
    _derivative(k_slot, k_vals, k_term, u_rows, u_cols, j_out, j_in, j_vals, j_term, coef, rho, out)
    return out


@njit(cache=True, fastmath=True)
def rk4_steps(k_slot, k_vals, k_term, u_rows, u_cols, j_out, j_in, j_vals, j_term, coefs, rho, dt, n):
    """Advance ``rho`` in place by ``n`` classical RK4 steps of size ``dt``.

    ``coefs`` has shape ``(2 n + 1, n_terms)``: row ``2 i`` holds the term
    coefficients at the start of step ``i`` and row ``2 i + 1`` at its midpoint.
    """
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)
    half = 0.5 * dt
    sixth = dt / 6.0
    args = (k_slot, k_vals, k_term, u_rows, u_cols, j_out, j_in, j_vals, j_term)
    r = rho.reshape(rho.size)
    t = tmp.reshape(rho.size)
    f1 = k1.reshape(rho.size)
    f2 = k2.reshape(rho.size)
    f3 = k3.reshape(rho.size)
    f4 = k4.reshape(rho.size)
    for i in range(n):
        _derivative(*args, coefs[2 * i], rho, k1)
        for q in range(r.size):
            t[q] = r[q] + half * f1[q]
        _derivative(*args, coefs[2 * i + 1], tmp, k2)
        for q in range(r.size):
            t[q] = r[q] + half * f2[q]
        _derivative(*args, coefs[2 * i + 1], tmp, k3)
        for q in range(r.size):
            t[q] = r[q] + dt * f3[q]
        _derivative(*args, coefs[2 * i + 2], tmp, k4)
        for q in range(r.size):
            r[q] += sixth * (f1[q] + 2.0 * f2[q] + 2.0 * f3[q] + f4[q])
    return rho
