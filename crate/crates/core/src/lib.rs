//! Four-compartment HIV/AIDS transmission model with condom-use, screening
//! and treatment interventions.
//!
//! - [`model`]: parameters, state and the vector field.
//! - [`analysis`]: `R0`, equilibria, Jacobians and local stability.
//! - [`integrate`]: fixed-step RK4 forward and backward, trajectory CSV.
//! - [`optctrl`]: Hamiltonian, costates and the forward-backward sweep.
//! - [`cli`]: scenario files and the `simulate`/`analyze`/`optimize`/`sweep` commands.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod integrate;
pub mod model;
pub mod optctrl;

pub use analysis::{
    basic_reproduction_number, dfe_stability, disease_free_equilibrium, endemic_equilibrium, endemic_stability,
    jacobian_at_dfe, EquilibriumKind, EquilibriumReport, ReproductionBreakdown, Stability, StabilityReport,
};
pub use error::{Error, Result};
pub use integrate::{
    integrate_adjoint_backward, integrate_forward, simulate, simulate_controlled, TimeGrid, Trajectory,
};
pub use model::{force_of_infection, rhs_controlled, rhs_uncontrolled, ControlVector, ModelParams, State};
pub use optctrl::{
    adjoint_rhs, characterize_controls, forward_backward_sweep, hamiltonian, objective, AdjointState, ObjectiveWeights,
    OptimalSolution, SweepOptions,
};
