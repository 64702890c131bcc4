//! Model parameters, compartment state and the (controlled) vector field.
//!
//! The population is split into susceptibles `S`, unaware infectives `I1`,
//! aware infectives `I2` and individuals with AIDS `A`. Rates carry no unit
//! system; time units are whatever the caller uses consistently.

use crate::error::{Error, Result};

/// The twelve epidemiological constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Recruitment into the susceptible class (individuals / time).
    pub q0: f64,
    /// Per-contact transmission probability with unaware infectives.
    pub beta1: f64,
    /// Per-contact transmission probability with aware infectives.
    pub beta2: f64,
    /// Per-contact transmission probability with AIDS individuals.
    pub beta3: f64,
    /// Contact rates with the three infective classes (1 / time).
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Screening rate moving `I1` to `I2`.
    pub theta: f64,
    /// Progression of treated aware infectives to AIDS.
    pub pi: f64,
    /// Progression of untreated infectives to AIDS.
    pub delta: f64,
    /// AIDS-related death rate.
    pub alpha: f64,
    /// Natural death rate.
    pub mu: f64,
}

impl ModelParams {
    /// Field names in config order.
    pub const KEYS: [&'static str; 12] =
        ["q0", "beta1", "beta2", "beta3", "c1", "c2", "c3", "theta", "pi", "delta", "alpha", "mu"];

    /// Parameter set with `R0 < 1` (disease dies out).
    pub fn table1() -> Self {
        Self {
            q0: 2000.0,
            beta1: 0.20,
            beta2: 0.15,
            beta3: 0.12,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            theta: 0.015,
            pi: 0.6,
            delta: 0.1,
            alpha: 1.0,
            mu: 0.2,
        }
    }

    /// Parameter set with `R0 > 1` (endemic).
    pub fn table2() -> Self {
        Self {
            q0: 2000.0,
            beta1: 1.344,
            beta2: 0.15,
            beta3: 0.12,
            c1: 3.0,
            c2: 2.0,
            c3: 1.0,
            theta: 0.015,
            pi: 0.6,
            delta: 0.1,
            alpha: 1.0,
            mu: 0.02,
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "q0" => self.q0,
            "beta1" => self.beta1,
            "beta2" => self.beta2,
            "beta3" => self.beta3,
            "c1" => self.c1,
            "c2" => self.c2,
            "c3" => self.c3,
            "theta" => self.theta,
            "pi" => self.pi,
            "delta" => self.delta,
            "alpha" => self.alpha,
            "mu" => self.mu,
            _ => return None,
        })
    }

    /// Returns `false` when `key` is not a parameter name.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "q0" => &mut self.q0,
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "beta3" => &mut self.beta3,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "c3" => &mut self.c3,
            "theta" => &mut self.theta,
            "pi" => &mut self.pi,
            "delta" => &mut self.delta,
            "alpha" => &mut self.alpha,
            "mu" => &mut self.mu,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Every parameter must be finite and strictly positive, except `beta2`
    /// and `beta3` which may be zero.
    pub fn validate(&self) -> Result<()> {
        for key in Self::KEYS {
            let value = self.get(key).unwrap_or(f64::NAN);
            let key: &'static str = key;
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name: key, reason: format!("must be finite, got {value}") });
            }
            let may_be_zero = matches!(key, "beta2" | "beta3");
            if value < 0.0 || (value == 0.0 && !may_be_zero) {
                return Err(Error::InvalidParameter {
                    name: key,
                    reason: format!("must be {}, got {value}", if may_be_zero { ">= 0" } else { "> 0" }),
                });
            }
        }
        Ok(())
    }

    /// Non-fatal diagnostics. Transmission is expected to weaken as
    /// infectives become aware or progress (`beta3 <= beta2 <= beta1`),
    /// but nothing downstream depends on it.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.beta2 > self.beta1 {
            out.push(format!("beta2 ({}) exceeds beta1 ({})", self.beta2, self.beta1));
        }
        if self.beta3 > self.beta2 {
            out.push(format!("beta3 ({}) exceeds beta2 ({})", self.beta3, self.beta2));
        }
        out
    }

    /// Total population at the disease-free equilibrium, `Q0 / mu`.
    pub fn carrying_population(&self) -> f64 {
        self.q0 / self.mu
    }

    /// Prevalence-weighted contact pressure `beta1 c1 I1 + beta2 c2 I2 + beta3 c3 A`.
    pub fn contact_pressure(&self, state: &State) -> f64 {
        self.beta1 * self.c1 * state.i1 + self.beta2 * self.c2 * state.i2 + self.beta3 * self.c3 * state.a
    }
}

/// Compartment sizes. The same type is used for time derivatives, in which
/// case components may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub s: f64,
    pub i1: f64,
    pub i2: f64,
    pub a: f64,
}

impl State {
    pub const fn new(s: f64, i1: f64, i2: f64, a: f64) -> Self {
        Self { s, i1, i2, a }
    }

    pub fn total(&self) -> f64 {
        self.s + self.i1 + self.i2 + self.a
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.i1, self.i2, self.a]
    }

    pub fn from_array([s, i1, i2, a]: [f64; 4]) -> Self {
        Self { s, i1, i2, a }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// A population state must be finite and component-wise nonnegative.
    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() || self.to_array().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidState(format!("compartments must be finite and >= 0, got {self:?}")));
        }
        Ok(())
    }
}

/// Intervention intensities: condom use `u1`, screening `u2`, treatment `u3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlVector {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl ControlVector {
    pub const ZERO: Self = Self { u1: 0.0, u2: 0.0, u3: 0.0 };

    /// Builds a control, clamping each component into `[0, 1]`.
    pub fn new(u1: f64, u2: f64, u3: f64) -> Self {
        Self { u1: clamp_unit(u1), u2: clamp_unit(u2), u3: clamp_unit(u3) }
    }

    /// Screening and treatment at their nominal rates, i.e. the
    /// uncontrolled model with condom use `u1`.
    pub fn nominal(u1: f64) -> Self {
        Self::new(u1, 1.0, 1.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }

    pub fn from_array([u1, u2, u3]: [f64; 3]) -> Self {
        Self { u1, u2, u3 }
    }
}

/// `max(0, min(1, x))`; NaN maps to 0.
pub fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Populations below this fraction of `Q0/mu` are treated as empty by the
/// force of infection.
pub const EMPTY_POPULATION_FRACTION: f64 = 1e-12;

/// `beta_m = (1 - u1)(beta1 c1 I1 + beta2 c2 I2 + beta3 c3 A) / N`.
pub fn force_of_infection(state: &State, params: &ModelParams, u1: f64) -> f64 {
    let n = state.total();
    if n <= EMPTY_POPULATION_FRACTION * params.carrying_population() {
        return 0.0;
    }
    (1.0 - u1) * params.contact_pressure(state) / n
}

/// Right-hand side of the uncontrolled system with condom use `u1`.
pub fn rhs_uncontrolled(state: &State, params: &ModelParams, u1: f64) -> State {
    let p = params;
    let bm = force_of_infection(state, p, u1);
    let infection = bm * state.s;
    State {
        s: p.q0 - infection - p.mu * state.s,
        i1: infection - (p.theta + p.mu + p.delta) * state.i1,
        i2: p.theta * state.i1 - (p.delta + p.mu + p.pi) * state.i2,
        a: p.delta * state.i1 + p.delta * state.i2 + p.pi * state.i2 - (p.alpha + p.mu) * state.a,
    }
}

/// Right-hand side of the controlled system: `u2` scales screening and `u3`
/// scales treatment progression.
pub fn rhs_controlled(state: &State, params: &ModelParams, u: &ControlVector) -> State {
    let p = params;
    let bm = force_of_infection(state, p, u.u1);
    let infection = bm * state.s;
    let screening = u.u2 * p.theta;
    let treatment = u.u3 * p.pi;
    State {
        s: p.q0 - infection - p.mu * state.s,
        i1: infection - (screening + p.mu + p.delta) * state.i1,
        i2: screening * state.i1 - (p.delta + p.mu + treatment) * state.i2,
        a: p.delta * state.i1 + p.delta * state.i2 + treatment * state.i2 - (p.alpha + p.mu) * state.a,
    }
}
