"""Explicit SSP-RK3 evolution of (rho, m) with the self-consistent potential.

The scheme is the method of lines on the slab grid: central differences
with ghost-cell Dirichlet data in x1 (values taken from the shock
profile, which equal the far-field constants up to the exponential tail
truncation), exact spectral derivatives in the periodic transverse
directions, and a small fixed fourth-difference dissipation in x1 on the
conserved fields.  The nonlinear Poisson problem is re-solved at every
Runge-Utta stage, warm-started from the previous stage potential.

Because the x1 stencils and the Dirichlet ghosts match the profile BVP
exactly, the discrete shock profile is a steady state of this integrator
up to the (tiny) fourth-difference dissipation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    ConfinementWarning,
    InvalidParam,
    NonConvergence,
    PoissonFailure,
    PositivityLoss,
)
from .grid import GridSpec
from .poisson import PoissonConfig, PrecondCache, solve_nonlinear_poisson
from .shock import Profile

__all__ = ["SolverConfig", "State", "Simulator"]


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping controls for the explicit SSP-RK3 scheme."""

    t_final: float
    dt_max: float = 0.1
    cfl_adv: float = 0.5
    cfl_visc: float = 0.25
    output_every: float = 1.0
    eps4: float = 0.01
    scheme: str = "ssprk3"
    bc: str = "dirichlet_farfield"
    poisson: PoissonConfig = field(default_factory=PoissonConfig)

    def __post_init__(self):
        if not 0 < self.cfl_adv <= 1:
            raise InvalidParam(f"cfl_adv must be in (0, 1], got {self.cfl_adv}")
        if not 0 < self.cfl_visc <= 0.5:
            raise InvalidParam(f"cfl_visc must be in (0, 0.5], got {self.cfl_visc}")
        if self.dt_max <= 0 or self.t_final < 0 or self.output_every <= 0:
            raise InvalidParam("time controls must be positive")
        if self.eps4 < 0:
            raise InvalidParam("eps4 must be >= 0")
        if self.scheme != "ssprk3":
            raise InvalidParam(f"unknown scheme {self.scheme!r}")
        if self.bc != "dirichlet_farfield":
            raise InvalidParam(f"unknown bc {self.bc!r}")


class State:
    """Instantaneous (rho, m) with the cached self-consistent potential.

    Conserved fields live in one contiguous array U of shape
    (4, N1, N2, N3) = (rho, m1, m2, m3); rho and m are views.
    """

    __slots__ = ("t", "U", "E")

    def __init__(self, t: float, U: np.ndarray, E: np.ndarray):
        self.t = float(t)
        self.U = U
        self.E = E

    @classmethod
    def from_fields(cls, t: float, rho: np.ndarray, m: np.ndarray, E: np.ndarray) -> "State":
        U = np.empty((4,) + rho.shape)
        U[0] = rho
        U[1:] = m
        return cls(t, U, E)

    @property
    def rho(self) -> np.ndarray:
        return self.U[0]

    @property
    def m(self) -> np.ndarray:
        return self.U[1:]

    def u(self) -> np.ndarray:
        return self.U[1:] / self.U[0]

    def copy(self) -> "State":
        return State(self.t, self.U.copy(), self.E.copy())


class Simulator:
    """Advances perturbed shock states in the frame of the given profile."""

    def __init__(
        self,
        grid: GridSpec,
        profile: Profile,
        cfg: SolverConfig,
    ):
        if profile.xi.size != grid.N1 or abs(profile.dxi - grid.dx1) > 1e-13 * grid.dx1:
            raise InvalidParam("profile and grid disagree on the x1 discretization")
        self.grid = grid
        self.profile = profile
        self.cfg = cfg
        self.T = profile.endstates.T
        shp = grid.shape
        n1, n2, n3 = shp
        self._Upad = np.empty((4, n1 + 4, n2, n3))
        self._Epad = np.empty((n1 + 4, n2, n3))
        self._uscr = np.empty((3, n1 + 4, n2, n3))
        self._unat = np.empty((3, n1, n2, n3))
        self._uswap = np.empty((3, n1, n3, n2))
        self._t2s = np.empty((5, n1, n3, n2))
        self._t3 = np.empty((5, n1, n2, n3))
        self._dU = np.empty((4, n1, n2, n3))
        self._d2s = np.empty((5, n1, n3, n2))
        self._d3g = np.empty((5, n1, n2, n3))
        self._lap2s = np.empty((3, n1, n3, n2))
        self._lap3 = np.empty((3, n1, n2, n3))
        self._stage = (np.empty((4, n1, n2, n3)), np.empty((4, n1, n2, n3)))
        self._D2T = np.ascontiguousarray(grid._d2mat.T)
        self._D3T = np.ascontiguousarray(grid._d3mat.T)
        self._L2T = np.ascontiguousarray(grid._lap2mat.T)
        self._L3T = np.ascontiguousarray(grid._lap3mat.T)
        self._pcache = PrecondCache(refresh=cfg.poisson.precond_refresh)
        self._ecarry = None
        # Dirichlet ghost data (two planes per side) from the profile
        grl, grr = profile.ghost_rho
        gul, gur = profile.ghost_u
        gel, ger = profile.ghost_E
        self._ghost_rho = (grl, grr)
        self._ghost_m1 = (grl * gul, grr * gur)
        self._ghost_E = (gel, ger)
        self._ebc = (float(gel[1]), float(ger[0]))
        # static planar background (u1, rho, E with ghosts) for mean-free
        # transverse differencing
        self._bg = np.empty((3, n1 + 4))
        self._bg[0] = np.concatenate([gul, profile.u1, gur])
        self._bg[1] = np.concatenate([grl, profile.rho, grr])
        self._bg[2] = np.concatenate([gel, profile.E, ger])
        self._confinement_worst = 0.0
        self._confinement_t = 0.0

    # -- spec operations ------------------------------------------------------

    def cfl_dt(self, state: State) -> float:
        """dt = min(dt_max, cfl_adv dx_min / v_max, cfl_visc dx_min^2 / mu)."""
        g = self.grid
        dxs = [g.dx1]
        if g.N2 > 1:
            dxs.append(1.0 / g.N2)
        if g.N3 > 1:
            dxs.append(1.0 / g.N3)
        dx_min = min(dxs)
        vmax = kernels.max_speed(state.U) + math.sqrt(self.T + 1.0)
        return min(
            self.cfg.dt_max,
            self.cfg.cfl_adv * dx_min / vmax,
            self.cfg.cfl_visc * dx_min**2,
        )

    def rhs(self, state: State) -> tuple[np.ndarray, np.ndarray]:
        """Semi-discrete (d rho/dt, d m/dt) for a state with current E."""
        dU = self._rhs_U(state.U, state.E)
        return dU[0].copy(), dU[1:].copy()

    def step(self, state: State, dt: float | None = None) -> State:
        """One SSP-RK3 step; the Poisson problem is re-solved per stage."""
        if dt is None:
            dt = self.cfl_dt(state)
        U0, E0 = state.U, state.E
        t = state.t
        U1, U2 = self._stage
        U3 = np.empty_like(U0)  # fresh: returned to the caller

        dU = self._rhs_U(U0, E0)
        self._guard(kernels.rk_stage(U1, 1.0, U0, 0.0, U0, dt, dU), U1, t + dt)
        E1 = self._solve_E(U1[0], E0, t + dt)

        dU = self._rhs_U(U1, E1)
        self._guard(
            kernels.rk_stage(U2, 0.75, U0, 0.25, U1, 0.25 * dt, dU), U2, t + 0.5 * dt
        )
        E2 = self._solve_E(U2[0], E1, t + 0.5 * dt)

        dU = self._rhs_U(U2, E2)
        self._guard(
            kernels.rk_stage(U3, 1.0 / 3.0, U0, 2.0 / 3.0, U2, 2.0 / 3.0 * dt, dU),
            U3,
            t + dt,
        )
        E3 = self._solve_E(U3[0], E2, t + dt)
        return State(t + dt, U3, E3)

    def run(self, state: State, on_output=None) -> State:
        """Advance to cfg.t_final, landing exactly on output times.

        on_output(state, prev_output_E) is called at t = 0 and at each
        multiple of cfg.output_every (prev_output_E is the potential at
        the previous output time, for time-difference diagnostics).
        """
        cfg = self.cfg
        prev_E = state.E.copy()
        if on_output is not None and state.t == 0.0:
            on_output(state, prev_E)
        out_idx = int(math.floor(state.t / cfg.output_every + 1e-12)) + 1
        while state.t < cfg.t_final - 1e-12:
            t_next = min(out_idx * cfg.output_every, cfg.t_final)
            dt = self.cfl_dt(state)
            if state.t + dt >= t_next - 1e-12:
                dt = t_next - state.t
            state = self.step(state, dt)
            if abs(state.t - t_next) < 1e-12:
                state.t = t_next
                self._monitor_confinement(state)
                if on_output is not None:
                    on_output(state, prev_E)
                    prev_E = state.E.copy()
                out_idx += 1
        if self._confinement_worst > 1e-8:
            warnings.warn(
                f"perturbation reached {self._confinement_worst:.2e} within 5 cells "
                f"of the x1 boundary at t={self._confinement_t:.3g}; increase L",
                ConfinementWarning,
                stacklevel=2,
            )
        return state

    # -- internals -------------------------------------------------------------

    def _rhs_U(self, U: np.ndarray, E: np.ndarray) -> np.ndarray:
        g = self.grid
        Upad, Epad = self._Upad, self._Epad
        Upad[:, 2:-2] = U
        for side, sl in ((0, slice(0, 2)), (1, slice(-2, None))):
            Upad[0, sl] = self._ghost_rho[side][:, None, None]
            Upad[1, sl] = self._ghost_m1[side][:, None, None]
            Upad[2, sl] = 0.0
            Upad[3, sl] = 0.0
            Epad[sl] = self._ghost_E[side][:, None, None]
        Epad[2:-2] = E
        kernels.euler_rhs_x1(
            Upad, Epad, self._bg, self.T, g.dx1, self.cfg.eps4,
            self._dU, self._uscr, self._unat, self._uswap, self._t2s, self._t3,
        )
        if g.N2 > 1 or g.N3 > 1:
            np.matmul(self._t2s, self._D2T, out=self._d2s)
            np.matmul(self._t3, self._D3T, out=self._d3g)
            np.matmul(self._uswap, self._L2T, out=self._lap2s)
            np.matmul(self._unat, self._L3T, out=self._lap3)
            kernels.rhs_combine(
                self._dU, self._d2s, self._d3g, self._lap2s, self._lap3, U[0]
            )
        return self._dU

    def _solve_E(self, rho: np.ndarray, warm: np.ndarray, t: float) -> np.ndarray:
        try:
            E, self._ecarry = solve_nonlinear_poisson(
                rho, warm, self._ebc, self.cfg.poisson, self.grid,
                cache=self._pcache, carry=self._ecarry, return_carry=True,
                planar_ref=self.profile.E,
            )
            return E
        except NonConvergence as exc:
            self._ecarry = None
            raise PoissonFailure(f"at t={t:.6g}: {exc}") from exc

    def _guard(self, rho_min: float, U: np.ndarray, t: float):
        if rho_min <= 0.0:
            rho = U[0]
            loc = np.unravel_index(int(np.argmin(rho)), rho.shape)
            raise PositivityLoss(t, tuple(int(i) for i in loc), rho_min)

    def _monitor_confinement(self, state: State):
        """Track perturbation amplitude within 5 cells of each x1 boundary."""
        p = self.profile
        edge = []
        for sl in (slice(0, 5), slice(-5, None)):
            dz = state.rho[sl] - p.rho[sl, None, None]
            dm = state.m[0][sl] - p.m1[sl, None, None]
            edge.append(max(float(np.max(np.abs(dz))), float(np.max(np.abs(dm)))))
        worst = max(edge)
        if worst > self._confinement_worst:
            self._confinement_worst = worst
            self._confinement_t = state.t
