"""Fused RK4 kernel for the dephasing generator with a tridiagonal Hamiltonian."""
import numba
import numpy as np


@numba.njit(cache=True)
def _stage(y, base, c, eps, up, down, gamma, sgn, nxt, acc, w):
    # f = sgn*[H, y] - gamma*offdiag(y);  nxt = base + c*f;  acc += w*f
    K, L, _ = y.shape
    for b in range(K):
        for i in range(L):
            for j in range(L):
                comm = (eps[i] - eps[j]) * y[b, i, j]
                if i + 1 < L:
                    comm += up[i] * y[b, i + 1, j]
                if i > 0:
                    comm += down[i - 1] * y[b, i - 1, j]
                if j + 1 < L:
                    comm -= y[b, i, j + 1] * down[j]
                if j > 0:
                    comm -= y[b, i, j - 1] * up[j - 1]
                f = sgn * comm
                if i != j:
                    f -= gamma * y[b, i, j]
                nxt[b, i, j] = base[b, i, j] + c * f
                acc[b, i, j] += w * f


@numba.njit(cache=True)
def rk4_tridiagonal(y0, eps, up, down, gamma, sgn, h, nsteps):
    """``nsteps`` classical RK4 steps of size ``h`` on a stack ``(K, L, L)``.

    ``sgn = -1j`` gives the Schrodinger-picture generator, ``+1j`` its adjoint
    (for real ``eps``).  ``up[i] = H[i, i+1]``, ``down[i] = H[i+1, i]``.
    """
    y = y0.copy()
    t1 = np.empty_like(y)
    t2 = np.empty_like(y)
    acc = np.empty_like(y)
    for _ in range(nsteps):
        acc[:] = y
        _stage(y, y, 0.5 * h, eps, up, down, gamma, sgn, t1, acc, h / 6.0)
        _stage(t1, y, 0.5 * h, eps, up, down, gamma, sgn, t2, acc, h / 3.0)
        _stage(t2, y, h, eps, up, down, gamma, sgn, t1, acc, h / 3.0)
        _stage(t1, y, 0.0, eps, up, down, gamma, sgn, t2, acc, h / 6.0)
        y[:] = acc
    return y
