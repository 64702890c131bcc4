//! Optimal intervention control: Hamiltonian, costate dynamics, pointwise
//! control characterization and the forward-backward sweep.
//!
//! The objective is `J = int_0^T (a I1 + b1 u1^2 + b2 u2^2 + b3 u3^2) dt`
//! subject to the controlled model, with controls in `[0, 1]^3`.

use crate::error::{Error, Result};
use crate::integrate::{integrate_adjoint_backward, interpolate_controls, simulate_controlled, TimeGrid, Trajectory};
use crate::model::{
    clamp_unit, force_of_infection, rhs_controlled, ControlVector, ModelParams, State, EMPTY_POPULATION_FRACTION,
};

/// Costates of `(S, I1, I2, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdjointState {
    pub lam_s: f64,
    pub lam_i1: f64,
    pub lam_i2: f64,
    pub lam_a: f64,
}

impl AdjointState {
    pub const fn new(lam_s: f64, lam_i1: f64, lam_i2: f64, lam_a: f64) -> Self {
        Self { lam_s, lam_i1, lam_i2, lam_a }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.lam_s, self.lam_i1, self.lam_i2, self.lam_a]
    }

    pub fn from_array([lam_s, lam_i1, lam_i2, lam_a]: [f64; 4]) -> Self {
        Self { lam_s, lam_i1, lam_i2, lam_a }
    }
}

/// Infection weight `a` and control cost weights `b1..b3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl ObjectiveWeights {
    pub const fn new(a: f64, b1: f64, b2: f64, b3: f64) -> Self {
        Self { a, b1, b2, b3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter { name: "a", reason: format!("must be >= 0, got {}", self.a) });
        }
        for (name, b) in [("b1", self.b1), ("b2", self.b2), ("b3", self.b3)] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {b}") });
            }
        }
        Ok(())
    }

    fn running_cost(&self, state: &State, u: &ControlVector) -> f64 {
        self.a * state.i1 + self.b1 * u.u1 * u.u1 + self.b2 * u.u2 * u.u2 + self.b3 * u.u3 * u.u3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Weight of the freshly characterized controls in the convex update.
    pub relaxation: f64,
    /// Relative sup-norm change below which the sweep stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Controls held at a fixed value and never updated.
    pub fixed_controls: [Option<f64>; 3],
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { relaxation: 0.5, tolerance: 1e-3, max_iterations: 200, fixed_controls: [None; 3] }
    }
}

impl SweepOptions {
    pub fn with_fixed(mut self, index: usize, value: f64) -> Self {
        self.fixed_controls[index] = Some(value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "relaxation",
                reason: format!("must lie in (0, 1], got {}", self.relaxation),
            });
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must be > 0, got {}", self.tolerance),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter { name: "max_iterations", reason: "must be >= 1".into() });
        }
        for pin in self.fixed_controls.iter().flatten() {
            if !(0.0..=1.0).contains(pin) {
                return Err(Error::InvalidParameter {
                    name: "fixed_controls",
                    reason: format!("pins must lie in [0, 1], got {pin}"),
                });
            }
        }
        Ok(())
    }

    fn apply_pins(&self, u: ControlVector) -> ControlVector {
        let mut arr = u.to_array();
        for (slot, pin) in arr.iter_mut().zip(self.fixed_controls) {
            if let Some(v) = pin {
                *slot = v;
            }
        }
        ControlVector::from_array(arr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    /// States, controls and costates on the solve grid.
    pub trajectory: Trajectory,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change recorded at every iteration.
    pub residuals: Vec<f64>,
}

impl OptimalSolution {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn controls(&self) -> &[ControlVector] {
        self.trajectory.controls.as_deref().expect("solution carries controls")
    }

    pub fn adjoints(&self) -> &[AdjointState] {
        self.trajectory.adjoints.as_deref().expect("solution carries adjoints")
    }
}

fn population_is_empty(state: &State, params: &ModelParams) -> bool {
    state.total() <= EMPTY_POPULATION_FRACTION * params.carrying_population()
}

pub fn hamiltonian(
    state: &State,
    adjoint: &AdjointState,
    u: &ControlVector,
    params: &ModelParams,
    weights: &ObjectiveWeights,
) -> f64 {
    let f = rhs_controlled(state, params, u).to_array();
    let lam = adjoint.to_array();
    weights.running_cost(state, u) + (0..4).map(|i| lam[i] * f[i]).sum::<f64>()
}

/// Costate derivative `-dH/dx`.
pub fn adjoint_rhs(
    state: &State,
    adjoint: &AdjointState,
    u: &ControlVector,
    params: &ModelParams,
    weights: &ObjectiveWeights,
) -> AdjointState {
    let p = params;
    let AdjointState { lam_s, lam_i1, lam_i2, lam_a } = *adjoint;
    let n = state.total();
    let bm = force_of_infection(state, p, u.u1);
    let diff = lam_s - lam_i1;
    let k = 1.0 - u.u1;
    // Incidence sensitivities; the empty-population guard zeroes them.
    let (ds, di1, di2, da) = if population_is_empty(state, p) {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let bm_s = bm * state.s;
        (
            bm - bm_s / n,
            (k * p.beta1 * p.c1 * state.s - bm_s) / n,
            (k * p.beta2 * p.c2 * state.s - bm_s) / n,
            (k * p.beta3 * p.c3 * state.s - bm_s) / n,
        )
    };
    AdjointState {
        lam_s: ds * diff + p.mu * lam_s,
        lam_i1: di1 * diff + lam_i1 * (u.u2 * p.theta + p.mu + p.delta)
            - u.u2 * p.theta * lam_i2
            - p.delta * lam_a
            - weights.a,
        lam_i2: di2 * diff + lam_i2 * (p.delta + p.mu + u.u3 * p.pi) - lam_a * (p.delta + u.u3 * p.pi),
        lam_a: da * diff + lam_a * (p.alpha + p.mu),
    }
}

/// Pointwise minimizer of the Hamiltonian over `[0, 1]^3`.
pub fn characterize_controls(
    state: &State,
    adjoint: &AdjointState,
    params: &ModelParams,
    weights: &ObjectiveWeights,
) -> ControlVector {
    let p = params;
    let n = state.total();
    let u1 = if !population_is_empty(state, p) {
        p.contact_pressure(state) * state.s * (adjoint.lam_i1 - adjoint.lam_s) / (2.0 * weights.b1 * n)
    } else {
        0.0
    };
    let u2 = p.theta * state.i1 * (adjoint.lam_i1 - adjoint.lam_i2) / (2.0 * weights.b2);
    let u3 = p.pi * state.i2 * (adjoint.lam_i2 - adjoint.lam_a) / (2.0 * weights.b3);
    ControlVector { u1: clamp_unit(u1), u2: clamp_unit(u2), u3: clamp_unit(u3) }
}

/// Composite trapezoidal approximation of the objective on the trajectory grid.
pub fn objective(trajectory: &Trajectory, weights: &ObjectiveWeights) -> Result<f64> {
    let controls = trajectory.controls.as_ref().ok_or(Error::MissingControls)?;
    let h = trajectory.grid.step();
    let values: Vec<f64> = trajectory.states.iter().zip(controls).map(|(x, u)| weights.running_cost(x, u)).collect();
    let n = values.len() - 1;
    let interior: f64 = values[1..n].iter().sum();
    Ok(h * (0.5 * values[0] + interior + 0.5 * values[n]))
}

/// `dJ/du_i` for a perturbation of `u_i` that is constant in time,
/// `int dH/du_i dt`, evaluated with the trajectory's costates.
pub fn constant_control_gradient(
    trajectory: &Trajectory,
    params: &ModelParams,
    weights: &ObjectiveWeights,
) -> Result<[f64; 3]> {
    let controls = trajectory.controls.as_ref().ok_or(Error::MissingControls)?;
    let adjoints =
        trajectory.adjoints.as_ref().ok_or_else(|| Error::InvalidState("trajectory carries no costates".into()))?;
    let p = params;
    let h = trajectory.grid.step();
    let n = trajectory.states.len() - 1;
    let mut grad = [0.0; 3];
    for (k, ((x, u), lam)) in trajectory.states.iter().zip(controls).zip(adjoints).enumerate() {
        let w = if k == 0 || k == n { 0.5 * h } else { h };
        let incidence = if population_is_empty(x, p) { 0.0 } else { p.contact_pressure(x) * x.s / x.total() };
        let dh = [
            2.0 * weights.b1 * u.u1 - incidence * (lam.lam_i1 - lam.lam_s),
            2.0 * weights.b2 * u.u2 - p.theta * x.i1 * (lam.lam_i1 - lam.lam_i2),
            2.0 * weights.b3 * u.u3 - p.pi * x.i2 * (lam.lam_i2 - lam.lam_a),
        ];
        for i in 0..3 {
            grad[i] += w * dh[i];
        }
    }
    Ok(grad)
}

/// Backward costate solve for a given forward trajectory and schedule,
/// starting from zero terminal costates.
pub fn solve_adjoint(
    params: &ModelParams,
    weights: &ObjectiveWeights,
    grid: &TimeGrid,
    states: &[State],
    controls: &[ControlVector],
) -> Result<Vec<AdjointState>> {
    integrate_adjoint_backward(
        |t, x, lam| adjoint_rhs(x, lam, &interpolate_controls(grid, controls, t), params, weights),
        AdjointState::default(),
        grid,
        states,
    )
}

fn relative_change<I: Iterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (new, old) in pairs {
        diff = diff.max((new - old).abs());
        scale = scale.max(new.abs());
    }
    diff / scale.max(1e-8)
}

struct Iterate {
    controls: Vec<ControlVector>,
    states: Trajectory,
    adjoints: Vec<AdjointState>,
}

/// Forward-backward sweep for the optimality system.
///
/// Starts from `u = 0` (pins applied), then repeats: forward state solve,
/// backward costate solve from `lambda(T) = 0`, characterization, and the
/// convex update `u <- r u_new + (1 - r) u_old`. Stops once the relative
/// sup-norm change of states, costates and controls is at most
/// `opts.tolerance`. Without convergence the iterate with the smallest
/// change is returned with `converged = false`.
pub fn forward_backward_sweep(
    params: &ModelParams,
    weights: &ObjectiveWeights,
    initial: State,
    grid: &TimeGrid,
    opts: &SweepOptions,
) -> Result<OptimalSolution> {
    params.validate()?;
    weights.validate()?;
    opts.validate()?;
    initial.validate()?;

    let solve = |controls: Vec<ControlVector>| -> Result<Iterate> {
        let states = simulate_controlled(params, initial, grid, &controls)?;
        let adjoints = solve_adjoint(params, weights, grid, &states.states, &controls)?;
        Ok(Iterate { controls, states, adjoints })
    };

    let mut current = solve(vec![opts.apply_pins(ControlVector::ZERO); grid.n_nodes()])?;
    let mut best: Option<(f64, Iterate)> = None;
    let mut residuals = Vec::new();
    let mut converged = false;
    let r = opts.relaxation;

    for _ in 0..opts.max_iterations {
        let updated: Vec<ControlVector> = current
            .states
            .states
            .iter()
            .zip(&current.adjoints)
            .zip(&current.controls)
            .map(|((x, lam), old)| {
                let fresh = characterize_controls(x, lam, params, weights).to_array();
                let old = old.to_array();
                let mixed = [0, 1, 2].map(|i| r * fresh[i] + (1.0 - r) * old[i]);
                opts.apply_pins(ControlVector::from_array(mixed))
            })
            .collect();
        let next = solve(updated)?;

        let du = relative_change(
            next.controls.iter().zip(&current.controls).flat_map(|(a, b)| a.to_array().into_iter().zip(b.to_array())),
        );
        let dx = relative_change(
            next.states
                .states
                .iter()
                .zip(&current.states.states)
                .flat_map(|(a, b)| a.to_array().into_iter().zip(b.to_array())),
        );
        let dl = relative_change(
            next.adjoints.iter().zip(&current.adjoints).flat_map(|(a, b)| a.to_array().into_iter().zip(b.to_array())),
        );
        let residual = du.max(dx).max(dl);
        residuals.push(residual);
        let previous = std::mem::replace(&mut current, next);
        drop(previous);

        if residual <= opts.tolerance {
            converged = true;
            break;
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((
                residual,
                Iterate {
                    controls: current.controls.clone(),
                    states: current.states.clone(),
                    adjoints: current.adjoints.clone(),
                },
            ));
        }
    }

    let chosen = if converged { current } else { best.map(|(_, it)| it).unwrap_or(current) };
    let trajectory = chosen.states.with_adjoints(chosen.adjoints)?;
    let objective = objective(&trajectory, weights)?;
    Ok(OptimalSolution { trajectory, objective, iterations: residuals.len(), converged, residuals })
}
