"""Pseudo-spectral laboratory for the one-fluid Euler-Maxwell system.

Periodic-box simulation of the dispersive (diagonalized) formulation near
equilibrium, plus the space-time resonance analyzer: phase roots, outcome
and germ frequency sets, the separation verdict, the cutoff-symbol family,
and numerical checks of the linear decay, slow energy growth, and
scattering behavior at desk scale.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConstraintViolation, CostGuardError,
                     EmlabError, QuadratureError, SnapshotFormatError)
from .spectral import (Grid3, MultiplierSymbol, SpectralField, apply_multiplier,
                       helmholtz_P, helmholtz_Q)
from .pseudoproduct import BilinearSymbol, pseudo_product
from .norms import discrete_norm, norm_h, norm_l2, norm_lp, norm_wsp
from .model import (DiagState, EMState, PhysicalParams, Profiles,
                    constraint_residuals, diagonalize, from_profiles,
                    random_state, reconstruct, rhs_diagonal, rhs_primitive,
                    to_profiles)
from .integrators import (ExponentialStepper, IntegratorConfig,
                          PrimitiveStepper, Trajectory, run, step_exponential,
                          step_primitive)
from .resonance import (PhaseSpec, ResonanceReport,
                        enumerate_interaction_specs, find_resonances,
                        phase_bound_value, phase_eta_gradient, phase_value,
                        phase_value_radial, resonance_report,
                        verify_phase_lower_bound)
from .cutoffs import CutoffSuite, build_cutoff_suite, smoothstep, theta_bump
from .diagnostics import (DecayFit, NormSeries, RadialDatum, XNormIndices,
                          energy_growth_fit, fit_power_law,
                          kg_radial_evolution, linear_decay_experiment,
                          measure_x_components, scattering_check,
                          windowed_weight_norm)
from .snapshots import load_snapshot, save_snapshot
from .config import ExperimentConfig, load_config

__all__ = [name for name in dir() if not name.startswith("_")]
