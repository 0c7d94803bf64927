"""Fused sequential kernels for the hot loops.

Everything here is compiled with numba in nopython mode, single threaded
(parallel=False), with IEEE semantics (no fastmath), so results are
bitwise reproducible and independent of thread count.  The transverse
spectral algebra stays outside (dense matmul in the callers); these
kernels own the x1 stencils and pointwise arithmetic.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = [
    "thomas_factor",
    "thomas_solve",
    "helmholtz_apply_x1",
    "poisson_residual",
    "euler_rhs_x1",
    "rhs_combine",
]


@njit(cache=True)
def thomas_factor(off: float, diag: np.ndarray, cw: np.ndarray, invd: np.ndarray):
    """LU coefficients of tridiag(off, diag[:, m], off) for every column m."""
    n1, m = diag.shape
    for j in range(m):
        invd[0, j] = 1.0 / diag[0, j]
    for i in range(1, n1):
        for j in range(m):
            cw[i, j] = off * invd[i - 1, j]
            invd[i, j] = 1.0 / (diag[i, j] - cw[i, j] * off)


@njit(cache=True)
def thomas_solve(off: float, cw: np.ndarray, invd: np.ndarray, b: np.ndarray, x: np.ndarray):
    """Solve the factored tridiagonal systems, one per column of b."""
    n1, m = b.shape
    for j in range(m):
        x[0, j] = b[0, j]
    for i in range(1, n1):
        for j in range(m):
            x[i, j] = b[i, j] - cw[i, j] * x[i - 1, j]
    for j in range(m):
        x[n1 - 1, j] = x[n1 - 1, j] * invd[n1 - 1, j]
    for i in range(n1 - 2, -1, -1):
        for j in range(m):
            x[i, j] = (x[i, j] - off * x[i + 1, j]) * invd[i, j]


@njit(cache=True)
def helmholtz_apply_x1(v, W, lap_t, inv_dx2, out):
    """out = -(lap_t + D11 v) + W * v with homogeneous Dirichlet ghosts."""
    n1, n2, n3 = v.shape
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                left = v[i - 1, j, k] if i > 0 else 0.0
                right = v[i + 1, j, k] if i < n1 - 1 else 0.0
                d11 = (left - 2.0 * v[i, j, k] + right) * inv_dx2
                out[i, j, k] = -(lap_t[i, j, k] + d11) + W[i, j, k] * v[i, j, k]


@njit(cache=True)
def poisson_residual(E, lap_t, rho, inv_dx2, bc_l, bc_r, res, W):
    """res = D11 E + lap_t + rho - exp(E); returns max |res|.

    E carries no ghosts; bc_l / bc_r are the Dirichlet ghost values.
    exp(E) is written to W for reuse by the linearized operator.
    """
    n1, n2, n3 = E.shape
    mr = 0.0
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                left = E[i - 1, j, k] if i > 0 else bc_l
                right = E[i + 1, j, k] if i < n1 - 1 else bc_r
                w = math.exp(E[i, j, k])
                W[i, j, k] = w
                r = (left - 2.0 * E[i, j, k] + right) * inv_dx2 + lap_t[i, j, k] + rho[i, j, k] - w
                res[i, j, k] = r
                mr = max(mr, abs(r))
    return mr


@njit(cache=True)
def euler_rhs_x1(Upad, Epad, bg, T, dx, eps4, dU, u_scr, u_nat, u_swap, t2s, t3):
    """x1 flux/viscous/source terms and pointwise products, one memory sweep.

    Upad: (4, N1+4, N2, N3) conserved fields (rho, m1, m2, m3) with two
    Dirichlet ghost planes per side; Epad: (N1+4, N2, N3) potential with
    ghosts; bg: (3, N1+4) static planar background (u1, rho, E of the
    shock profile).  Writes the x1 part of (drho, dm) into dU
    (4, N1, N2, N3) and prepares the inputs of the spectral transverse
    stage:

        u_scr  (3, N1+4, N2, N3): velocities (padded, for D11 stencils)
        u_nat  (3, N1, N2, N3):   velocity fluctuations about bg
        u_swap (3, N1, N3, N2):   the same, x2 axis last
        t2s    (5, N1, N3, N2):   m1 u2, m2 u2 + T drho, m3 u2, dE, m2
        t3     (5, N1, N2, N3):   m1 u3, m2 u3, m3 u3 + T drho, dE, m3

    with drho = rho - bg_rho and dE = E - bg_E.  Subtracting the planar
    background before spectral differentiation changes nothing
    mathematically (its transverse derivatives vanish identically) but
    keeps the round-off injected into the transverse modes proportional
    to the perturbation instead of the O(1) background, so decaying
    non-zero modes are measurable down to depths limited only by the
    solution itself.  Arrays with the x2 axis last make every transverse
    derivative a single contiguous last-axis matmul; the pressure
    gradient -T d2 rho (resp. -T d3 rho) is folded into the matching
    flux entry.  The fourth-difference x1 dissipation uses coefficient
    eps4 * (max |u1| + sqrt(T+1)); returns that wave speed.
    """
    nf, n1p, n2, n3 = Upad.shape
    rho = Upad[0]
    m1 = Upad[1]
    m2 = Upad[2]
    m3 = Upad[3]
    u1 = u_scr[0]
    u2 = u_scr[1]
    u3 = u_scr[2]
    umax = 0.0
    for i in range(n1p):
        for j in range(n2):
            for k in range(n3):
                ir = 1.0 / rho[i, j, k]
                v1 = m1[i, j, k] * ir
                u1[i, j, k] = v1
                u2[i, j, k] = m2[i, j, k] * ir
                u3[i, j, k] = m3[i, j, k] * ir
                umax = max(umax, abs(v1))
    aspeed = umax + math.sqrt(T + 1.0)
    c1 = 0.5 / dx
    c2 = 1.0 / (dx * dx)
    ch = eps4 * aspeed / dx
    for i in range(2, n1p - 2):
        ii = i - 2
        for j in range(n2):
            for k in range(n3):
                drho = -(m1[i + 1, j, k] - m1[i - 1, j, k]) * c1
                dm1 = (
                    -(m1[i + 1, j, k] * u1[i + 1, j, k] - m1[i - 1, j, k] * u1[i - 1, j, k]) * c1
                    - T * (rho[i + 1, j, k] - rho[i - 1, j, k]) * c1
                    + (u1[i + 1, j, k] - 2.0 * u1[i, j, k] + u1[i - 1, j, k]) * c2
                    - rho[i, j, k] * (Epad[i + 1, j, k] - Epad[i - 1, j, k]) * c1
                )
                dm2 = (
                    -(m2[i + 1, j, k] * u1[i + 1, j, k] - m2[i - 1, j, k] * u1[i - 1, j, k]) * c1
                    + (u2[i + 1, j, k] - 2.0 * u2[i, j, k] + u2[i - 1, j, k]) * c2
                )
                dm3 = (
                    -(m3[i + 1, j, k] * u1[i + 1, j, k] - m3[i - 1, j, k] * u1[i - 1, j, k]) * c1
                    + (u3[i + 1, j, k] - 2.0 * u3[i, j, k] + u3[i - 1, j, k]) * c2
                )
                for q in range(4):
                    hv = -ch * (
                        Upad[q, i + 2, j, k]
                        - 4.0 * Upad[q, i + 1, j, k]
                        + 6.0 * Upad[q, i, j, k]
                        - 4.0 * Upad[q, i - 1, j, k]
                        + Upad[q, i - 2, j, k]
                    )
                    if q == 0:
                        drho += hv
                    elif q == 1:
                        dm1 += hv
                    elif q == 2:
                        dm2 += hv
                    else:
                        dm3 += hv
                dU[0, ii, j, k] = drho
                dU[1, ii, j, k] = dm1
                dU[2, ii, j, k] = dm2
                dU[3, ii, j, k] = dm3
                du1 = u1[i, j, k] - bg[0, i]
                drho_f = rho[i, j, k] - bg[1, i]
                dE_f = Epad[i, j, k] - bg[2, i]
                trho = T * drho_f
                u_nat[0, ii, j, k] = du1
                u_nat[1, ii, j, k] = u2[i, j, k]
                u_nat[2, ii, j, k] = u3[i, j, k]
                u_swap[0, ii, k, j] = du1
                u_swap[1, ii, k, j] = u2[i, j, k]
                u_swap[2, ii, k, j] = u3[i, j, k]
                t2s[0, ii, k, j] = m1[i, j, k] * u2[i, j, k]
                t2s[1, ii, k, j] = m2[i, j, k] * u2[i, j, k] + trho
                t2s[2, ii, k, j] = m3[i, j, k] * u2[i, j, k]
                t2s[3, ii, k, j] = dE_f
                t2s[4, ii, k, j] = m2[i, j, k]
                t3[0, ii, j, k] = m1[i, j, k] * u3[i, j, k]
                t3[1, ii, j, k] = m2[i, j, k] * u3[i, j, k]
                t3[2, ii, j, k] = m3[i, j, k] * u3[i, j, k] + trho
                t3[3, ii, j, k] = dE_f
                t3[4, ii, j, k] = m3[i, j, k]
    return aspeed


@njit(cache=True)
def rhs_combine(dU, d2s, d3g, lap2s, lap3, rho):
    """Add the transverse derivative contributions to dU.

    d2s / lap2s carry x2-derivative results in swapped layout
    (..., N3, N2); d3g / lap3 are in the natural layout.
    """
    nf, n1, n2, n3 = dU.shape
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                r = rho[i, j, k]
                dU[0, i, j, k] += -(d2s[4, i, k, j] + d3g[4, i, j, k])
                dU[1, i, j, k] += (
                    -(d2s[0, i, k, j] + d3g[0, i, j, k])
                    + lap2s[0, i, k, j]
                    + lap3[0, i, j, k]
                )
                dU[2, i, j, k] += (
                    -(d2s[1, i, k, j] + d3g[1, i, j, k])
                    + lap2s[1, i, k, j]
                    + lap3[1, i, j, k]
                    - r * d2s[3, i, k, j]
                )
                dU[3, i, j, k] += (
                    -(d2s[2, i, k, j] + d3g[2, i, j, k])
                    + lap2s[2, i, k, j]
                    + lap3[2, i, j, k]
                    - r * d3g[3, i, j, k]
                )


@njit(cache=True)
def rk_stage(out, a, Ua, b, Ub, c, dU):
    """out = a*Ua + b*Ub + c*dU, fused; returns min of field 0 (density)."""
    nf, n1, n2, n3 = out.shape
    mn = 1e300
    for i in range(n1):
        for q in range(nf):
            for j in range(n2):
                for k in range(n3):
                    v = a * Ua[q, i, j, k] + b * Ub[q, i, j, k] + c * dU[q, i, j, k]
                    out[q, i, j, k] = v
                    if q == 0:
                        mn = min(mn, v)
    return mn


@njit(cache=True)
def max_speed(U):
    """max over points and components of |m_c| / rho for U = (rho, m)."""
    nf, n1, n2, n3 = U.shape
    mx = 0.0
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                ir = 1.0 / U[0, i, j, k]
                for c in range(1, 4):
                    mx = max(mx, abs(U[c, i, j, k] * ir))
    return mx
