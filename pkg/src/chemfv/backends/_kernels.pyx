# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil and CG kernels; same API as `reference`."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

NAME = "compiled"


cdef void _apply_laplacian(double[:, ::1] f, double hx, double hy,
                           double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t ny = f.shape[0], nx = f.shape[1], i, j
    cdef double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy)
    cdef double c, ax, ay
    for j in range(ny):
        for i in range(nx):
            c = f[j, i]
            ax = 0.0
            if i > 0:
                ax += f[j, i - 1] - c
            if i < nx - 1:
                ax += f[j, i + 1] - c
            ay = 0.0
            if j > 0:
                ay += f[j - 1, i] - c
            if j < ny - 1:
                ay += f[j + 1, i] - c
            out[j, i] = ax * ihx2 + ay * ihy2


def laplacian(double[:, ::1] f, double hx, double hy):
    out = np.empty((f.shape[0], f.shape[1]), dtype=np.float64)
    cdef double[:, ::1] out_v = out
    _apply_laplacian(f, hx, hy, out_v)
    return out


def gradient_squared(double[:, ::1] f, double hx, double hy):
    cdef Py_ssize_t ny = f.shape[0], nx = f.shape[1], i, j
    out = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double i2hx = 1.0 / (2.0 * hx), i2hy = 1.0 / (2.0 * hy)
    cdef double dx, dy
    cdef Py_ssize_t il, ir, jl, jr
    for j in range(ny):
        jl = j - 1 if j > 0 else 0
        jr = j + 1 if j < ny - 1 else ny - 1
        for i in range(nx):
            il = i - 1 if i > 0 else 0
            ir = i + 1 if i < nx - 1 else nx - 1
            dx = (f[j, ir] - f[j, il]) * i2hx
            dy = (f[jr, i] - f[jl, i]) * i2hy
            o[j, i] = dx * dx + dy * dy
    return out


def chem_flux(double[:, ::1] u, double[:, ::1] v, double chi, double k,
              double hx, double hy):
    cdef Py_ssize_t ny = u.shape[0], nx = u.shape[1], i, j
    fx = np.zeros((ny, nx + 1), dtype=np.float64)
    fy = np.zeros((ny + 1, nx), dtype=np.float64)
    cdef double[:, ::1] fxv = fx, fyv = fy
    cdef double w, max_wx = 0.0, max_wy = 0.0
    for j in range(ny):
        for i in range(nx - 1):
            w = chi * (v[j, i + 1] - v[j, i]) / hx \
                / pow(0.5 * (v[j, i] + v[j, i + 1]), k)
            fxv[j, i + 1] = w * (u[j, i] if w > 0 else u[j, i + 1])
            if fabs(w) > max_wx:
                max_wx = fabs(w)
    for j in range(ny - 1):
        for i in range(nx):
            w = chi * (v[j + 1, i] - v[j, i]) / hy \
                / pow(0.5 * (v[j, i] + v[j + 1, i]), k)
            fyv[j + 1, i] = w * (u[j, i] if w > 0 else u[j + 1, i])
            if fabs(w) > max_wy:
                max_wy = fabs(w)
    return fx, fy, max_wx, max_wy


def flux_divergence(fx, fy, double hx, double hy):
    cdef double[:, ::1] fxv = fx, fyv = fy
    cdef Py_ssize_t ny = fyv.shape[0] - 1, nx = fxv.shape[1] - 1, i, j
    out = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] o = out
    for j in range(ny):
        for i in range(nx):
            o[j, i] = (fxv[j, i + 1] - fxv[j, i]) / hx \
                + (fyv[j + 1, i] - fyv[j, i]) / hy
    return out


def cg_helmholtz(double shift, double[:, ::1] b, x0, double tol,
                 long max_iter, double hx, double hy):
    cdef Py_ssize_t ny = b.shape[0], nx = b.shape[1], i, j
    x_arr = np.zeros((ny, nx), dtype=np.float64) if x0 is None \
        else np.array(x0, dtype=np.float64, copy=True)
    r_arr = np.empty((ny, nx), dtype=np.float64)
    p_arr = np.empty((ny, nx), dtype=np.float64)
    ap_arr = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] x = x_arr, r = r_arr, p = p_arr, ap = ap_arr
    cdef double bnorm2 = 0.0, rs = 0.0, rs_new, pap, alpha, beta
    cdef long it = 0

    for j in range(ny):
        for i in range(nx):
            bnorm2 += b[j, i] * b[j, i]
    if bnorm2 == 0.0:
        return np.zeros((ny, nx), dtype=np.float64), 0, 0.0

    _apply_laplacian(x, hx, hy, ap)
    for j in range(ny):
        for i in range(nx):
            r[j, i] = b[j, i] - (shift * x[j, i] - ap[j, i])
            p[j, i] = r[j, i]
            rs += r[j, i] * r[j, i]

    cdef double target2 = tol * tol * bnorm2
    with nogil:
        while rs > target2 and it < max_iter:
            _apply_laplacian(p, hx, hy, ap)
            pap = 0.0
            for j in range(ny):
                for i in range(nx):
                    ap[j, i] = shift * p[j, i] - ap[j, i]
                    pap += p[j, i] * ap[j, i]
            alpha = rs / pap
            rs_new = 0.0
            for j in range(ny):
                for i in range(nx):
                    x[j, i] += alpha * p[j, i]
                    r[j, i] -= alpha * ap[j, i]
                    rs_new += r[j, i] * r[j, i]
            beta = rs_new / rs
            for j in range(ny):
                for i in range(nx):
                    p[j, i] = r[j, i] + beta * p[j, i]
            rs = rs_new
            it += 1
    return x_arr, it, sqrt(rs / bnorm2)
