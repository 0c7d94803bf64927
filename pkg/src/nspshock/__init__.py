"""Viscous shock waves of the compressible Navier-Stokes-Poisson system.

Construction of the planar 2-shock profile, explicit evolution of
perturbed states with the self-consistent electrostatic potential, and
measurement of the stability/decay behaviour on the slab R x T^2.
"""

from .config import RunConfig, canonical_digest, parse_config, parse_config_text
from .diagnostics import (
    DecayFit,
    DiagnosticsRecord,
    antiderivative,
    decay_fit,
    perturbation_fields,
    record,
    shock_shift,
)
from .grid import GridSpec, NormReport
from .integrator import Simulator, SolverConfig, State
from .perturbation import PerturbSpec, build_initial, bump, zero_mass_projection
from .poisson import (
    PoissonConfig,
    PrecondCache,
    SeparableHelmholtz,
    electric_force,
    poisson_residual_norm,
    solve_helmholtz_separable,
    solve_nonlinear_poisson,
)
from .shock import (
    EndStates,
    Frame,
    LaxReport,
    Profile,
    ProfileReport,
    check_lax,
    galilean_shift,
    quasineutral_profile_guess,
    solve_profile,
    solve_rankine_hugoniot,
    verify_profile,
)
from .snapshot import Snapshot, read_snapshot, write_snapshot

__version__ = "0.1.0"

__all__ = [
    "RunConfig", "canonical_digest", "parse_config", "parse_config_text",
    "DecayFit", "DiagnosticsRecord", "antiderivative", "decay_fit",
    "perturbation_fields", "record", "shock_shift",
    "GridSpec", "NormReport",
    "Simulator", "SolverConfig", "State",
    "PerturbSpec", "build_initial", "bump", "zero_mass_projection",
    "PoissonConfig", "PrecondCache", "SeparableHelmholtz", "electric_force",
    "poisson_residual_norm", "solve_helmholtz_separable", "solve_nonlinear_poisson",
    "EndStates", "Frame", "LaxReport", "Profile", "ProfileReport",
    "check_lax", "galilean_shift", "quasineutral_profile_guess",
    "solve_profile", "solve_rankine_hugoniot", "verify_profile",
    "Snapshot", "read_snapshot", "write_snapshot",
]
