"""Self-consistent electrostatic potential: -Lap(E) = rho - exp(E).

Dirichlet data in x1 (quasineutral far field E_pm = ln rho_pm on the
truncated slab), periodic transverse directions.  The engine is an exact
separable solver for (-Lap + c(x1)) v = r: transverse diagonalization in
the orthonormal real Fourier basis, then one tridiagonal solve per
transverse mode (precomputed Thomas factors).  The nonlinear problem is
solved by Newton; each linearized solve (-Lap + exp(E)) delta = r runs a
defect-correction loop preconditioned with the transverse average of
exp(E), which contracts fast because the coefficient is nearly planar.

The x1 stencil matches the time integrator's (second-order central with
ghost-cell Dirichlet), so a potential solved here is exactly the
potential the scheme's right-hand side sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidParam, NonConvergence, NonPositiveDensity, SingularMode
from .grid import GridSpec

__all__ = [
    "PoissonConfig",
    "SeparableHelmholtz",
    "PrecondCache",
    "solve_helmholtz_separable",
    "solve_nonlinear_poisson",
    "poisson_residual_norm",
    "electric_force",
]


@dataclass
class PoissonConfig:
    """Tolerances and iteration limits of the nonlinear solver."""

    tol: float = 1e-10
    max_newton: int = 25
    precond_refresh: int = 50  # rebuild the separable coefficient every N solves
    max_inner: int = 40

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParam("PoissonConfig.tol must be positive")
        if self.max_newton < 1 or self.max_inner < 1 or self.precond_refresh < 1:
            raise InvalidParam("PoissonConfig iteration limits must be >= 1")


class SeparableHelmholtz:
    """Exact solver for (-Lap + c(x1)) v = rhs on the slab.

    Dirichlet ghost values in x1 enter the zero transverse mode only (the
    boundary data are constant on the torus); all other modes see
    homogeneous conditions.
    """

    def __init__(self, grid: GridSpec, c: np.ndarray):
        c = np.asarray(c, dtype=float)
        if c.shape != (grid.N1,):
            raise InvalidParam(f"coefficient must have shape ({grid.N1},)")
        q2, lam2 = grid._eig2
        q3, lam3 = grid._eig3
        lam = (lam2[:, None] + lam3[None, :]).reshape(-1)
        if float(np.min(c)) + float(np.min(lam)) <= 0.0:
            raise SingularMode(
                f"mode symbol c_min + |k|^2 = {np.min(c) + np.min(lam):.3e} <= 0"
            )
        self.grid = grid
        self.c = c.copy()
        self._q2 = q2
        self._q3 = q3
        inv_dx2 = 1.0 / grid.dx1**2
        self._off = -inv_dx2
        self._inv_dx2 = inv_dx2
        diag = (2.0 * inv_dx2 + c)[:, None] + lam[None, :]
        self._cw = np.empty_like(diag)
        self._invd = np.empty_like(diag)
        kernels.thomas_factor(self._off, diag, self._cw, self._invd)
        self._bc_scale = np.sqrt(grid.N2 * grid.N3)

    def solve(self, rhs: np.ndarray, bc: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        g = self.grid
        rhat = np.matmul(np.matmul(self._q2.T, rhs), self._q3)
        rflat = np.ascontiguousarray(rhat.reshape(g.N1, g.N2 * g.N3))
        if bc[0] != 0.0:
            rflat[0, 0] += bc[0] * self._bc_scale * self._inv_dx2
        if bc[1] != 0.0:
            rflat[-1, 0] += bc[1] * self._bc_scale * self._inv_dx2
        vflat = np.empty_like(rflat)
        kernels.thomas_solve(self._off, self._cw, self._invd, rflat, vflat)
        vhat = vflat.reshape(g.N1, g.N2, g.N3)
        return np.matmul(np.matmul(self._q2, vhat), self._q3.T)


def solve_helmholtz_separable(
    rhs: np.ndarray,
    c: np.ndarray,
    bc: tuple[float, float],
    grid: GridSpec,
) -> np.ndarray:
    """One-shot wrapper building the factored solver and solving once."""
    return SeparableHelmholtz(grid, c).solve(np.asarray(rhs, dtype=float), bc)


@dataclass
class PrecondCache:
    """Separable preconditioner reused across nonlinear solves.

    Rebuilt when the transverse-averaged coefficient drifts by more than
    `drift_tol` (relative) or after `refresh` solves, whichever first.
    """

    refresh: int = 50
    drift_tol: float = 0.05
    solver: SeparableHelmholtz | None = field(default=None, repr=False)
    uses: int = 0

    def get(self, grid: GridSpec, c: np.ndarray) -> SeparableHelmholtz:
        stale = (
            self.solver is None
            or self.uses >= self.refresh
            or float(np.max(np.abs(c - self.solver.c)))
            > self.drift_tol * float(np.min(self.solver.c))
        )
        if stale:
            self.solver = SeparableHelmholtz(grid, c)
            self.uses = 0
        self.uses += 1
        return self.solver


def poisson_residual_norm(
    E: np.ndarray, rho: np.ndarray, bc: tuple[float, float], grid: GridSpec
) -> float:
    """Max-norm of Lap(E) + rho - exp(E) with the scheme's stencil."""
    res = np.empty_like(E)
    W = np.empty_like(E)
    lap_t = grid.lap_transverse(E)
    return float(
        kernels.poisson_residual(
            E, lap_t, rho, 1.0 / grid.dx1**2, bc[0], bc[1], res, W
        )
    )


@dataclass
class PoissonCarry:
    """End-of-solve residual state, reusable by the next warm-started solve.

    The entry residual of a solve whose guess is exactly the previous
    solution differs from the stored one only by (rho_new - rho_old), so
    the stencil and exponential need not be re-evaluated.  Valid only
    while the referenced rho array is unmodified; the time integrator's
    buffer rotation guarantees that.
    """

    E: np.ndarray
    res: np.ndarray
    W: np.ndarray
    rho: np.ndarray
    rnorm: float


def solve_nonlinear_poisson(
    rho: np.ndarray,
    E_guess: np.ndarray,
    bc: tuple[float, float],
    cfg: PoissonConfig,
    grid: GridSpec,
    cache: PrecondCache | None = None,
    carry: PoissonCarry | None = None,
    return_carry: bool = False,
    planar_ref: np.ndarray | None = None,
):
    """Newton solve of Lap(E) + rho - exp(E) = 0 (unique by monotonicity).

    Each Newton update solves (-Lap + exp(E)) delta = residual with the
    separable solver as preconditioner inside a defect-correction loop
    (inner target 0.1 * cfg.tol).  Because the preconditioner absorbs the
    planar part of exp(E) exactly, the first corrected iterate usually
    already meets the outer tolerance; the loop therefore checks the true
    nonlinear residual (the certificate that matters) before spending
    further inner iterations.

    planar_ref (a line field, e.g. the profile potential) is subtracted
    before the spectral transverse Laplacian of E; this changes nothing
    mathematically (a planar field has no transverse variation) but keeps
    the round-off injected into the non-zero modes proportional to the
    potential fluctuation instead of its O(1) planar part.
    """
    rho = np.asarray(rho, dtype=float)
    if float(np.min(rho)) <= 0.0:
        raise NonPositiveDensity(f"min(rho) = {np.min(rho):.3e} <= 0")
    if cache is None:
        cache = PrecondCache(refresh=cfg.precond_refresh)

    inv_dx2 = 1.0 / grid.dx1**2
    inner_tol = 0.1 * cfg.tol

    if planar_ref is None:
        lap_in = lambda F: F  # noqa: E731
    else:
        ref = np.asarray(planar_ref)[:, None, None]
        lap_in = lambda F: F - ref  # noqa: E731

    if carry is not None and carry.E is E_guess:
        E = E_guess.copy()
        res, W = carry.res, carry.W
        res += rho - carry.rho
        rnorm = float(np.max(np.abs(res)))
    else:
        E = np.asarray(E_guess, dtype=float).copy()
        if not np.all(np.isfinite(E)):
            raise InvalidParam("E_guess contains non-finite entries")
        res = np.empty_like(E)
        W = np.empty_like(E)
        rnorm = kernels.poisson_residual(
            E, grid.lap_transverse(lap_in(E)), rho, inv_dx2, bc[0], bc[1], res, W
        )
    res_try = np.empty_like(res)
    W_try = np.empty_like(W)
    scratch = np.empty_like(res)

    iters = 0
    while rnorm >= cfg.tol:
        if iters >= cfg.max_newton:
            raise NonConvergence(
                f"nonlinear Poisson residual {rnorm:.3e} after {iters} Newton steps"
            )
        iters += 1
        solver = cache.get(grid, W.mean(axis=(1, 2)))
        delta = solver.solve(res)
        accepted = False
        E_try = None
        rtry = np.inf
        for _ in range(cfg.max_inner):
            E_try = E + delta
            rtry = kernels.poisson_residual(
                E_try, grid.lap_transverse(lap_in(E_try)), rho, inv_dx2, bc[0], bc[1],
                res_try, W_try,
            )
            if rtry < cfg.tol:
                accepted = True
                break
            # exact linear residual of (-Lap + W) delta = res
            kernels.helmholtz_apply_x1(
                delta, W, grid.lap_transverse(delta), inv_dx2, scratch
            )
            rin = res - scratch
            if float(np.max(np.abs(rin))) < inner_tol:
                break  # linear solve converged: a genuine Newton iterate
            delta += solver.solve(rin)
        else:
            raise NonConvergence(
                "separable defect correction stalled; coefficient too far from planar"
            )
        if not accepted:
            # backtracking on the Newton step (rare: monotone problem)
            lam = 1.0
            while rtry >= rnorm and rtry >= cfg.tol and lam > 1e-6:
                lam *= 0.5
                E_try = E + lam * delta
                rtry = kernels.poisson_residual(
                    E_try, grid.lap_transverse(lap_in(E_try)), rho, inv_dx2, bc[0], bc[1],
                    res_try, W_try,
                )
            if rtry >= rnorm and rtry >= cfg.tol:
                raise NonConvergence(
                    f"Newton line search stalled at residual {rnorm:.3e}"
                )
        E, rnorm = E_try, rtry
        res, res_try = res_try, res
        W, W_try = W_try, W

    if return_carry:
        return E, PoissonCarry(E=E, res=res, W=W, rho=rho, rnorm=rnorm)
    return E


def electric_force(rho: np.ndarray, E: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Momentum source -rho * grad(E), shape (3, N1, N2, N3)."""
    return -np.asarray(rho) * grid.grad(E)
