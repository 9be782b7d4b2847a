"""Pure numpy/scipy implementation of the flow kernels.

Must stay call-compatible with the compiled ``_kernels`` extension; the
backend is chosen in :mod:`hopfsoliton._backend`.
"""

import numpy as np
from scipy.linalg import LinAlgError, solve_banded
from scipy.special import expit


def laplacian_neumann(theta, h, s_left, s_right):
    """Second difference with ghost nodes enforcing ``theta_x = s`` at both ends."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty_like(theta)
    out[1:-1] = theta[:-2] - 2.0 * theta[1:-1] + theta[2:]
    out[0] = 2.0 * (theta[1] - theta[0]) - 2.0 * h * s_left
    out[-1] = 2.0 * (theta[-2] - theta[-1]) + 2.0 * h * s_right
    return out / (h * h)


def thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[i]`` couples row ``i + 1`` to column ``i``."""
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    return solve_banded((1, 1), ab, rhs, overwrite_ab=True, check_finite=False)


def be_solve(theta_old, dt, h, s_left, s_right, tol, step_tol, maxiter):
    """Backward-Euler step of ``theta_t = theta_xx / (k (1 - k))``, ``k = sigmoid(theta)``.

    Newton is applied to the row-scaled system
    ``w(theta) (theta - theta_old) - dt L theta = 0`` with ``w = k (1 - k)``;
    the scaling keeps rows O(1) where ``1/w`` is astronomically large.

    Returns ``(theta, iterations, converged, residual)``.
    """
    theta_old = np.asarray(theta_old, dtype=np.float64)
    theta = theta_old.copy()
    n = theta.size
    c = dt / (h * h)
    lower = np.full(n - 1, -c)
    upper = np.full(n - 1, -c)
    upper[0] = -2.0 * c
    lower[-1] = -2.0 * c
    resid = np.inf
    for it in range(1, maxiter + 1):
        sig = expit(theta)
        w = sig * (1.0 - sig)
        delta = theta - theta_old
        G = w * delta - dt * laplacian_neumann(theta, h, s_left, s_right)
        resid = float(np.max(np.abs(G)))
        if not np.isfinite(resid):
            return theta, it, False, resid
        if resid <= tol:
            return theta, it - 1, True, resid
        diag = w + w * (1.0 - 2.0 * sig) * delta + 2.0 * c
        try:
            step = thomas(lower, diag, upper, -G)
        except LinAlgError:
            return theta, it, False, resid
        theta = theta + step
        if float(np.max(np.abs(step))) <= step_tol * max(1.0, float(np.max(np.abs(theta)))):
            sig = expit(theta)
            G = sig * (1.0 - sig) * (theta - theta_old) - dt * laplacian_neumann(theta, h, s_left, s_right)
            resid = float(np.max(np.abs(G)))
            return theta, it, bool(np.isfinite(resid)), resid
    return theta, maxiter, False, resid
