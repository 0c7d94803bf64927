"""Measurements of everything the stability theory asserts.

Perturbation fields are obtained by subtracting the discrete profile
from the evolved state: z = rho - rho_t, w = u - u_t, H = E - E_t, and
r = m - m_t for the conservation ledger.  The transverse average splits
each field into its planar zero mode and the mean-free remainder; the
zero-mode anti-derivatives Z, R are cumulative integrals from the left
boundary, meaningful under the zero-mass condition.  Exponential decay
rates are measured by ordinary least squares on (t, log value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .errors import FrameMismatch, NonPositiveValue, WindowTooSmall
from .grid import GridSpec
from .integrator import State
from .shock import Profile

__all__ = [
    "DiagnosticsRecord",
    "DecayFit",
    "perturbation_fields",
    "antiderivative",
    "decay_fit",
    "shock_shift",
    "record",
    "csv_header",
    "csv_row",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One output-time row of norms, mode splits, and the mass ledger."""

    t: float
    Linf_z: float
    Linf_w: float
    Linf_H: float
    Linf_Ht: float
    L2_z: float
    L2_w: float
    H1_z: float
    H1_w: float
    L2_z_neq: float
    L2_w_neq: float
    H1_z_neq: float
    H1_w_neq: float
    L2_H_neq: float
    L2_Ht_neq: float
    L2_Z: float
    L2_R: float
    mass_z: float
    mass_r1: float
    mass_r2: float
    mass_r3: float
    shock_shift: float


def csv_header() -> str:
    return ",".join(f.name for f in dc_fields(DiagnosticsRecord))


def csv_row(rec: DiagnosticsRecord) -> str:
    return ",".join(f"{getattr(rec, f.name):.17g}" for f in dc_fields(DiagnosticsRecord))


def perturbation_fields(
    state: State, profile: Profile, grid: GridSpec, prev_E: np.ndarray | None = None,
    dt_out: float | None = None,
):
    """(z, w, H, Ht, r): state minus broadcast profile.

    Ht is a two-point backward difference of the stored potentials over
    the output interval (zero when no previous potential is given).
    Raises FrameMismatch unless the profile is shock-stationary, since
    the comparison assumes the wave does not move through the grid.
    """
    if profile.endstates.s != 0.0:
        raise FrameMismatch(
            f"profile moves at s = {profile.endstates.s}; expected s = 0"
        )
    rho_t = profile.rho[:, None, None]
    u_t = profile.u1[:, None, None]
    m_t = profile.m1[:, None, None]
    z = state.rho - rho_t
    w = np.empty((3,) + grid.shape)
    w[0] = state.m[0] / state.rho - u_t
    w[1] = state.m[1] / state.rho
    w[2] = state.m[2] / state.rho
    r = np.empty((3,) + grid.shape)
    r[0] = state.m[0] - m_t
    r[1] = state.m[1]
    r[2] = state.m[2]
    H = state.E - profile.E[:, None, None]
    if prev_E is None or dt_out is None or dt_out == 0.0:
        Ht = np.zeros_like(H)
    else:
        Ht = (state.E - prev_E) / dt_out
    return z, w, H, Ht, r


def antiderivative(zbar: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, float]:
    """Cumulative trapezoidal integral of a line field from the left end.

    Returns (Z, residue) with residue = Z at the right boundary, which
    should vanish for mean-free input; it is reported, never hidden.
    """
    Z = cumulative_trapezoid(zbar, dx=grid.dx1, initial=0.0)
    return Z, float(Z[-1])


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of value ~ C exp(-c t) on a time window."""

    C: float
    c: float
    r2: float
    window: tuple[float, float]
    n: int


def decay_fit(
    series, window: tuple[float, float] | None = None, min_points: int = 10
) -> DecayFit:
    """OLS on (t, log value); C = exp(intercept), c = -slope.

    A constant series has zero total variance; r2 is reported as 0 then.
    """
    arr = np.asarray(list(series), dtype=float)
    t, y = arr[:, 0], arr[:, 1]
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, y = t[keep], y[keep]
    else:
        window = (float(t[0]), float(t[-1])) if t.size else (0.0, 0.0)
    if t.size < min_points:
        raise WindowTooSmall(f"{t.size} samples in window, need >= {min_points}")
    if np.any(y <= 0.0):
        raise NonPositiveValue("log-linear fit requires positive values")
    ly = np.log(y)
    slope, intercept = np.polyfit(t, ly, 1)
    fit = slope * t + intercept
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return DecayFit(
        C=float(math.exp(intercept)),
        c=float(-slope),
        r2=float(r2),
        window=(float(t[0]), float(t[-1])),
        n=int(t.size),
    )


def _golden_min(f, a: float, b: float, tol: float = 1e-9) -> float:
    """Golden-section minimizer of a unimodal scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def shock_shift(state: State, profile: Profile, grid: GridSpec) -> float:
    """Sub-grid shift sigma minimizing || rho_bar - rho_t(. - sigma) ||_L2.

    Golden-section search over [-5 dx1, 5 dx1] with cubic interpolation
    of the profile; diagnostic only, the solution is never re-centered.
    """
    rho_bar = grid.transverse_average(state.rho)
    spline = CubicSpline(profile.xi, profile.rho)
    x = grid.x1
    lo, hi = x[0] + 5 * grid.dx1, x[-1] - 5 * grid.dx1
    core = (x > lo) & (x < hi)

    def cost(sigma):
        return float(np.sum((rho_bar[core] - spline(x[core] - sigma)) ** 2))

    return _golden_min(cost, -5.0 * grid.dx1, 5.0 * grid.dx1)


def record(
    state: State,
    profile: Profile,
    grid: GridSpec,
    prev_E: np.ndarray | None = None,
    dt_out: float | None = None,
) -> DiagnosticsRecord:
    """Compose one diagnostics row from the current state."""
    z, w, H, Ht, r = perturbation_fields(state, profile, grid, prev_E, dt_out)

    def vec_norms(v):
        reps = [grid.norms(v[c]) for c in range(3)]
        return (
            max(n.linf for n in reps),
            math.sqrt(sum(n.l2**2 for n in reps)),
            math.sqrt(sum(n.h1**2 for n in reps)),
        )

    nz = grid.norms(z)
    w_linf, w_l2, w_h1 = vec_norms(w)
    zn = grid.nonzero_part(z)
    nzn = grid.norms(zn)
    wn = np.stack([grid.nonzero_part(w[c]) for c in range(3)])
    wn_linf, wn_l2, wn_h1 = vec_norms(wn)
    Hn = grid.nonzero_part(H)
    Htn = grid.nonzero_part(Ht)

    zbar = grid.transverse_average(z)
    rbar = grid.transverse_average(r[0])
    Z, _zres = antiderivative(zbar, grid)
    R, _rres = antiderivative(rbar, grid)
    g1 = GridSpec(L=grid.L, N1=grid.N1)

    return DiagnosticsRecord(
        t=state.t,
        Linf_z=nz.linf,
        Linf_w=w_linf,
        Linf_H=grid.linf(H),
        Linf_Ht=grid.linf(Ht),
        L2_z=nz.l2,
        L2_w=w_l2,
        H1_z=nz.h1,
        H1_w=w_h1,
        L2_z_neq=nzn.l2,
        L2_w_neq=wn_l2,
        H1_z_neq=nzn.h1,
        H1_w_neq=wn_h1,
        L2_H_neq=grid.l2(Hn),
        L2_Ht_neq=grid.l2(Htn),
        L2_Z=g1.l2(Z),
        L2_R=g1.l2(R),
        mass_z=grid.integral(z),
        mass_r1=grid.integral(r[0]),
        mass_r2=grid.integral(r[1]),
        mass_r3=grid.integral(r[2]),
        shock_shift=shock_shift(state, profile, grid),
    )
