"""Initial data: planar shock plus an admissible small perturbation.

Perturbations are periodic in x' by construction (finite sums of integer
harmonics), localized in x1 by a smooth compactly supported bump, scaled
so a discrete L2+H1 proxy of the smallness norm equals the requested
amplitude, and projected to exact zero mass by subtracting a fixed
normalized template bump (a constant shift would not be integrable on
the line; the localized template preserves the far-field decay).

The momentum components are perturbed directly (r = m - m_tilde), which
is the natural set of conserved perturbation variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadTemplate, InvalidParam, PositivityLoss, UnresolvedMode
from .grid import GridSpec
from .integrator import State
from .poisson import PoissonConfig, solve_nonlinear_poisson
from .shock import Profile

__all__ = ["PerturbSpec", "zero_mass_projection", "build_initial", "bump"]

_FIELDS = ("z", "r1", "r2", "r3")


@dataclass(frozen=True)
class PerturbSpec:
    """Shape, size and reproducibility controls of the initial perturbation.

    modes lists transverse harmonics as (k2, k3, weight); (0, 0, w) is the
    x'-independent part.  Random phases are drawn per targeted field from
    the seed, in a fixed order, so initial data are reproducible.
    """

    amplitude: float = 1e-2
    x1_width: float = 5.0
    modes: tuple[tuple[int, int, float], ...] = ((0, 0, 1.0),)
    seed: int = 0
    targets: tuple[str, ...] = ("z", "r1")

    def __post_init__(self):
        if self.amplitude < 0:
            raise InvalidParam("amplitude must be >= 0")
        if self.x1_width <= 0:
            raise InvalidParam("x1_width must be positive")
        if not self.modes:
            raise InvalidParam("at least one transverse mode is required")
        for t in self.targets:
            if t not in _FIELDS:
                raise InvalidParam(f"unknown target field {t!r}")

    def validate_modes(self, grid: GridSpec):
        for k2, k3, _w in self.modes:
            if (k2 != 0 and abs(k2) > grid.N2 // 4) or (
                k3 != 0 and abs(k3) > grid.N3 // 4
            ):
                raise UnresolvedMode(
                    f"harmonic ({k2},{k3}) not resolvable on N2={grid.N2}, N3={grid.N3}"
                )


def bump(x: np.ndarray, center: float, width: float) -> np.ndarray:
    """Smooth compactly supported mollifier, peak 1 at center, zero outside."""
    r = (np.asarray(x) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def zero_mass_projection(
    f: np.ndarray, template: np.ndarray, grid: GridSpec
) -> np.ndarray:
    """f minus (integral of f) times the broadcast unit-mass template."""
    template = np.asarray(template)
    tmass = float(template.sum() * grid.dx1)
    if abs(tmass - 1.0) > 1e-12:
        raise BadTemplate(f"template integrates to {tmass!r}, not 1")
    mass = grid.integral(f)
    return f - mass * template[:, None, None]


def build_initial(
    profile: Profile,
    spec: PerturbSpec,
    grid: GridSpec,
    poisson_cfg: PoissonConfig | None = None,
) -> State:
    """State = profile + zero-mass perturbation, with E solved.

    The x1 envelope is centered on the shock (density midpoint of the
    profile) so slow-family content interacts with the layer rather than
    the artificial boundaries.  The zero-mass template is a double-width
    bump at the same center.
    """
    spec.validate_modes(grid)
    if poisson_cfg is None:
        poisson_cfg = PoissonConfig()
    es = profile.endstates
    x1 = grid.x1

    mid = 0.5 * (es.rho_minus + es.rho_plus)
    center = float(np.interp(mid, profile.rho[::-1], x1[::-1]))
    g1 = bump(x1, center, spec.x1_width)
    template = bump(x1, center, 2.0 * spec.x1_width)
    template = template / (template.sum() * grid.dx1)

    rng = np.random.default_rng(spec.seed)
    fields = {}
    for name in _FIELDS:
        if name not in spec.targets or spec.amplitude == 0.0:
            continue
        theta = np.zeros((grid.N2, grid.N3))
        for k2, k3, w in spec.modes:
            if k2 == 0 and k3 == 0:
                theta += w
                continue
            phase = rng.uniform(0.0, 2.0 * np.pi)
            theta += w * np.cos(
                2.0 * np.pi * (k2 * grid.x2[:, None] + k3 * grid.x3[None, :]) + phase
            )
        raw = g1[:, None, None] * theta[None, :, :]
        fields[name] = zero_mass_projection(raw, template, grid)

    if fields and spec.amplitude > 0.0:
        proxy = np.sqrt(sum(grid.norms(f).h1 ** 2 for f in fields.values()))
        scale = spec.amplitude / proxy
        for name in fields:
            fields[name] = fields[name] * scale

    zero = grid.zeros()
    z0 = fields.get("z", zero)
    rho = grid.broadcast_line(profile.rho) + z0
    mn = float(np.min(rho))
    if mn <= 0.0:
        raise PositivityLoss(0.0, None, mn)
    m = np.empty((3,) + grid.shape)
    m[0] = grid.broadcast_line(profile.m1) + fields.get("r1", zero)
    m[1] = fields.get("r2", zero)
    m[2] = fields.get("r3", zero)

    gel, ger = profile.ghost_E
    E = solve_nonlinear_poisson(
        rho, np.log(rho), (float(gel[1]), float(ger[0])), poisson_cfg, grid,
        planar_ref=profile.E,
    )
    return State.from_fields(0.0, rho, m, E)
