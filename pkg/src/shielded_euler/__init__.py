"""Shielded isentropic Euler equations: equation of state, invariants, entropy, solver and studies."""

from .config import ScenarioSpec, parse_config, preset
from .entropy import EntropyEval, entropy_budget, eta_star, q_star, wkb_scaling_fit
from .eos import (PressureLaw, ShieldedEOS, convexity_residual, epd_lambda_eff,
                  nonpolytropic, polytropic, shielded_c2, shielded_pressure, shipped_laws)
from .errors import (AssumptionError, ConfigError, DomainError, NonFiniteState,
                     PositivityViolation, ShieldedEulerError)
from .invariants import (InvariantRegion, RiemannCoords, from_invariants, generator_H,
                         h_gap_study, to_invariants)
from .solver import GridState, dissipation_K, initialize, run
from .studies import delta_study, eps_study, lu_comparison, scenario_library, weak_form_residual

__version__ = "0.1.0"
