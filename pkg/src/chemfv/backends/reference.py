"""Pure-numpy reference kernels.

All functions operate on raw (ny, nx) float64 arrays. The compiled backend
in `_kernels.pyx` exposes the same signatures; either can back the public
operators. Boundary handling is ghost-cell mirror reflection, so normal
differences at boundary faces vanish (homogeneous Neumann).
"""

import numpy as np

NAME = "reference"


def laplacian(f, hx, hy):
    """Mirrored 5-point Laplacian; boundary faces contribute zero flux."""
    lap_x = np.zeros_like(f)
    lap_x[:, 1:] += f[:, :-1] - f[:, 1:]
    lap_x[:, :-1] += f[:, 1:] - f[:, :-1]
    lap_y = np.zeros_like(f)
    lap_y[1:, :] += f[:-1, :] - f[1:, :]
    lap_y[:-1, :] += f[1:, :] - f[:-1, :]
    return lap_x / (hx * hx) + lap_y / (hy * hy)


def gradient_squared(f, hx, hy):
    """Per-cell |grad f|^2: central differences against mirror ghost cells.

    At boundary cells the mirror ghost equals the boundary cell itself, so
    the difference degenerates to a one-sided stencil over 2h.
    """
    dfdx = np.empty_like(f)
    dfdx[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * hx)
    dfdx[:, 0] = (f[:, 1] - f[:, 0]) / (2.0 * hx)
    dfdx[:, -1] = (f[:, -1] - f[:, -2]) / (2.0 * hx)
    dfdy = np.empty_like(f)
    dfdy[1:-1, :] = (f[2:, :] - f[:-2, :]) / (2.0 * hy)
    dfdy[0, :] = (f[1, :] - f[0, :]) / (2.0 * hy)
    dfdy[-1, :] = (f[-1, :] - f[-2, :]) / (2.0 * hy)
    return dfdx * dfdx + dfdy * dfdy


def chem_flux(u, v, chi, k, hx, hy):
    """Donor-cell taxis fluxes chi * u_upwind * grad(v) / v_face**k.

    Returns (fx, fy, max_wx, max_wy): fx has shape (ny, nx+1) over vertical
    faces, fy has shape (ny+1, nx) over horizontal faces; boundary faces are
    exactly zero. max_wx/max_wy are the largest face speeds per axis (for
    the caller's CFL bound).
    """
    ny, nx = u.shape
    fx = np.zeros((ny, nx + 1), dtype=np.float64)
    fy = np.zeros((ny + 1, nx), dtype=np.float64)

    # vertical faces between (j, i) and (j, i+1); w > 0 means flow in +x
    vface = 0.5 * (v[:, :-1] + v[:, 1:])
    wx = chi * (v[:, 1:] - v[:, :-1]) / hx / vface**k
    fx[:, 1:-1] = wx * np.where(wx > 0, u[:, :-1], u[:, 1:])

    # horizontal faces between (j, i) and (j+1, i); w > 0 means flow in +y
    vface = 0.5 * (v[:-1, :] + v[1:, :])
    wy = chi * (v[1:, :] - v[:-1, :]) / hy / vface**k
    fy[1:-1, :] = wy * np.where(wy > 0, u[:-1, :], u[1:, :])

    max_wx = float(np.abs(wx).max()) if wx.size else 0.0
    max_wy = float(np.abs(wy).max()) if wy.size else 0.0
    return fx, fy, max_wx, max_wy


def flux_divergence(fx, fy, hx, hy):
    """Net outflux per cell divided by cell area (conservative form)."""
    return (fx[:, 1:] - fx[:, :-1]) / hx + (fy[1:, :] - fy[:-1, :]) / hy


def cg_helmholtz(shift, b, x0, tol, max_iter, hx, hy):
    """Conjugate gradients for (shift*I - Lap) x = b with mirrored Neumann
    Laplacian. Returns (x, iterations, relative_residual). x0 may be None."""
    bnorm2 = float(np.dot(b.ravel(), b.ravel()))
    if bnorm2 == 0.0:
        return np.zeros_like(b), 0, 0.0
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.copy()
        r = b - (shift * x - laplacian(x, hx, hy))
    p = r.copy()
    rs = float(np.dot(r.ravel(), r.ravel()))
    target2 = tol * tol * bnorm2
    it = 0
    while rs > target2 and it < max_iter:
        ap = shift * p - laplacian(p, hx, hy)
        pap = float(np.dot(p.ravel(), ap.ravel()))
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.dot(r.ravel(), r.ravel()))
        p *= rs_new / rs
        p += r
        rs = rs_new
        it += 1
    return x, it, float(np.sqrt(rs / bnorm2))
