"""Single-bit (sign-of-difference) consensus: protocols, finite-time
checks, switching topologies and application drivers."""

from .errors import DomainError, ScenarioError, ScenarioParseError, ScenarioValidationError
from .graph import (
    SwitchingSchedule,
    Topology,
    has_spanning_tree,
    min_positive_weight,
    neighbors,
    topology_at,
    union,
    windowed_union_has_spanning_tree,
)
from .protocol import (
    ProtocolKind,
    linear_field,
    saturated_field,
    scalar_sign_field,
    sat,
    sgn,
    unit_vector_field,
)
from .simulator import (
    SimConfig,
    Trace,
    chattering_amplitude,
    check_bound,
    finite_time_bound,
    lyapunov_scalar,
    lyapunov_vector,
    run,
    simulate,
    step,
)
from .applications import (
    FormationSpec,
    LinearSystemModel,
    LocalObjective,
    estimation_step,
    formation_step,
    optimization_step,
    rendezvous_run,
)
from .scenario_io import Scenario, dump_scenario, load_scenario, parse_scenario, run_scenario
from .bundled import bundled_scenarios, load_bundled
from .export import emit_plots

__version__ = "0.1.0"
