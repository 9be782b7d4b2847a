# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled flow kernels; mirrors hopfsoliton._kernels_py exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite

cnp.import_array()


cdef inline double _sigmoid(double t) nogil:
    cdef double e
    if t >= 0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


cdef void _laplacian(const double[::1] theta, double h, double s_left, double s_right,
                     double[::1] out) nogil:
    cdef Py_ssize_t n = theta.shape[0], i
    cdef double inv = 1.0 / (h * h)
    for i in range(1, n - 1):
        out[i] = (theta[i - 1] - 2.0 * theta[i] + theta[i + 1]) * inv
    out[0] = (2.0 * (theta[1] - theta[0]) - 2.0 * h * s_left) * inv
    out[n - 1] = (2.0 * (theta[n - 2] - theta[n - 1]) + 2.0 * h * s_right) * inv


cdef void _thomas(const double[::1] lower, double[::1] diag, const double[::1] upper,
                  double[::1] rhs, double[::1] work) nogil:
    # in-place: solution overwrites rhs; diag is clobbered
    cdef Py_ssize_t n = diag.shape[0], i
    cdef double m
    work[0] = upper[0] / diag[0]
    rhs[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * work[i - 1]
        if i < n - 1:
            work[i] = upper[i] / m
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / m
    for i in range(n - 2, -1, -1):
        rhs[i] -= work[i] * rhs[i + 1]


def laplacian_neumann(theta, double h, double s_left, double s_right):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    out = np.empty(th.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    _laplacian(th, h, s_left, s_right, o)
    return out


def thomas(lower, diag, upper, rhs):
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    d_arr = np.array(diag, dtype=np.float64)
    x_arr = np.array(rhs, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] x = x_arr
    cdef double[::1] work = np.empty(d.shape[0], dtype=np.float64)
    _thomas(lo, d, up, x, work)
    return x_arr


def be_solve(theta_old, double dt, double h, double s_left, double s_right,
             double tol, double step_tol, int maxiter):
    cdef double[::1] old = np.ascontiguousarray(theta_old, dtype=np.float64)
    cdef Py_ssize_t n = old.shape[0], i
    theta_arr = np.array(old, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] lap = np.empty(n, dtype=np.float64)
    cdef double[::1] G = np.empty(n, dtype=np.float64)
    cdef double[::1] diag = np.empty(n, dtype=np.float64)
    cdef double[::1] lower = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] upper = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] work = np.empty(n, dtype=np.float64)
    cdef double c = dt / (h * h)
    cdef double sig, w, delta, resid = 1e300, smax, tmax
    cdef int it
    for i in range(n - 1):
        lower[i] = -c
        upper[i] = -c
    upper[0] = -2.0 * c
    lower[n - 2] = -2.0 * c

    with nogil:
        for it in range(1, maxiter + 1):
            _laplacian(theta, h, s_left, s_right, lap)
            resid = 0.0
            for i in range(n):
                sig = _sigmoid(theta[i])
                w = sig * (1.0 - sig)
                delta = theta[i] - old[i]
                G[i] = -(w * delta - dt * lap[i])
                diag[i] = w + w * (1.0 - 2.0 * sig) * delta + 2.0 * c
                if fabs(G[i]) > resid or not isfinite(G[i]):
                    resid = fabs(G[i])
            if not isfinite(resid):
                with gil:
                    return theta_arr, it, False, resid
            if resid <= tol:
                with gil:
                    return theta_arr, it - 1, True, resid
            _thomas(lower, diag, upper, G, work)
            smax = 0.0
            tmax = 0.0
            for i in range(n):
                theta[i] += G[i]
                if fabs(G[i]) > smax:
                    smax = fabs(G[i])
                if fabs(theta[i]) > tmax:
                    tmax = fabs(theta[i])
            if smax <= step_tol * (tmax if tmax > 1.0 else 1.0):
                _laplacian(theta, h, s_left, s_right, lap)
                resid = 0.0
                for i in range(n):
                    sig = _sigmoid(theta[i])
                    delta = theta[i] - old[i]
                    w = fabs(sig * (1.0 - sig) * delta - dt * lap[i])
                    if w > resid or not isfinite(w):
                        resid = w
                with gil:
                    return theta_arr, it, bool(isfinite(resid)), resid
    return theta_arr, maxiter, False, resid
