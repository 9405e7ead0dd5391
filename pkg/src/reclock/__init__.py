"""Clock-reparametrization covariance experiments for classical and quantum dynamics.

A monotone map t = T(tau) relabels the evolution clock. Evolving the
Schrödinger equation in tau with the generator T'(tau) H(T(tau)) — or the
classical equations with the Hamiltonian T'H — reproduces the conventional
evolution at the relabeled instants. This package propagates both sides,
measures their phase-invariant agreement, and checks the accompanying
identities (degree-one homogeneity of the extended Lagrangian and the
momentum constraint T' pi_T + Htilde = 0).
"""

from .classical import (
    LagrangianPoint,
    Trajectory,
    check_constraint,
    check_euler_homogeneity,
    hamiltonian_t,
    hamiltonian_tau,
    homogeneous_lagrangian,
    integrate_t,
    integrate_tau,
    lagrangian_t,
    momenta_tau,
    trajectory_equivalence,
)
from .errors import (
    ClockDomainError,
    CoverageError,
    IntegrationError,
    NumericalError,
    ReclockError,
    ScenarioError,
    ValidationError,
)
from .model import (
    ClassicalState,
    ClockKind,
    DrivenHarmonicPotential,
    FreePotential,
    HarmonicPotential,
    IdentityMap,
    LinearMap,
    MovingWellPotential,
    PhysicalConstants,
    PotentialSpec,
    SinePerturbedMap,
    SmoothRampMap,
    SpatialGrid,
    TimeMap,
    Wavefunction,
    eval_potential,
    eval_timemap,
    prepare_gaussian,
)
from .quantum import (
    CovarianceReport,
    CovarianceScenario,
    EvolutionRecord,
    PropagatorConfig,
    Snapshot,
    apply_hamiltonian,
    covariance_experiment,
    expectation_energy,
    expectation_position,
    fidelity,
    position_variance,
    propagate_rescaled,
    propagate_t,
    propagate_tau,
    residual_check,
)
from .reports import emit_report, render_report
from .runner import RunSummary, Status, run_many, run_scenario
from .scenario import (
    GaussianSpec,
    OutputSpec,
    Scenario,
    ScenarioKind,
    Tolerances,
    parse_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ClassicalState",
    "ClockDomainError",
    "ClockKind",
    "CovarianceReport",
    "CovarianceScenario",
    "CoverageError",
    "DrivenHarmonicPotential",
    "EvolutionRecord",
    "FreePotential",
    "GaussianSpec",
    "HarmonicPotential",
    "IdentityMap",
    "IntegrationError",
    "LagrangianPoint",
    "LinearMap",
    "MovingWellPotential",
    "NumericalError",
    "OutputSpec",
    "PhysicalConstants",
    "PotentialSpec",
    "PropagatorConfig",
    "ReclockError",
    "RunSummary",
    "Scenario",
    "ScenarioError",
    "ScenarioKind",
    "SinePerturbedMap",
    "SmoothRampMap",
    "Snapshot",
    "SpatialGrid",
    "Status",
    "TimeMap",
    "Tolerances",
    "Trajectory",
    "ValidationError",
    "Wavefunction",
    "apply_hamiltonian",
    "check_constraint",
    "check_euler_homogeneity",
    "covariance_experiment",
    "emit_report",
    "eval_potential",
    "eval_timemap",
    "expectation_energy",
    "expectation_position",
    "fidelity",
    "hamiltonian_t",
    "hamiltonian_tau",
    "homogeneous_lagrangian",
    "integrate_t",
    "integrate_tau",
    "lagrangian_t",
    "momenta_tau",
    "parse_scenario",
    "position_variance",
    "prepare_gaussian",
    "propagate_rescaled",
    "propagate_t",
    "propagate_tau",
    "render_report",
    "residual_check",
    "run_many",
    "run_scenario",
    "trajectory_equivalence",
]
