//! Fixed-step classical RK4 on a uniform grid, forward for the population
//! and backward for the costates.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{rhs_controlled, rhs_uncontrolled, ControlVector, ModelParams, State};
use crate::optctrl::AdjointState;

/// Uniform grid `t0 + k h`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_final.is_finite()) || t_final <= t0 {
            return Err(Error::InvalidGrid(format!("need finite t_final > t0, got [{t0}, {t_final}]")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be >= 1".into()));
        }
        Ok(Self { t0, t_final, n_steps })
    }

    /// Grid on `[t0, t_final]` whose step is as close as possible to `h`.
    pub fn with_step(t0: f64, t_final: f64, h: f64) -> Result<Self> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {h}")));
        }
        let n = ((t_final - t0) / h).round().max(1.0) as usize;
        Self::new(t0, t_final, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        (self.t_final - self.t0) / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|k| self.node(k))
    }

    /// Same interval, twice the steps.
    pub fn refined(&self) -> Self {
        Self { n_steps: self.n_steps * 2, ..*self }
    }
}

/// Output of a forward integration, optionally decorated with the control
/// schedule and costates of an optimal-control solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<State>,
    pub controls: Option<Vec<ControlVector>>,
    pub adjoints: Option<Vec<AdjointState>>,
    /// Total mass removed by clamping negative components to zero.
    pub clamped_mass: f64,
    /// Number of component clamps performed.
    pub clamp_count: usize,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<State>) -> Result<Self> {
        check_len(grid.n_nodes(), states.len())?;
        Ok(Self { grid, states, controls: None, adjoints: None, clamped_mass: 0.0, clamp_count: 0 })
    }

    pub fn with_controls(mut self, controls: Vec<ControlVector>) -> Result<Self> {
        check_len(self.grid.n_nodes(), controls.len())?;
        self.controls = Some(controls);
        Ok(self)
    }

    pub fn with_adjoints(mut self, adjoints: Vec<AdjointState>) -> Result<Self> {
        check_len(self.grid.n_nodes(), adjoints.len())?;
        self.adjoints = Some(adjoints);
        Ok(self)
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory has at least two nodes")
    }

    /// Writes the CSV: `t,S,I1,I2,A[,u1,u2,u3][,lam_S,lam_I1,lam_I2,lam_A]`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("t,S,I1,I2,A");
        if self.controls.is_some() {
            s.push_str(",u1,u2,u3");
        }
        if self.adjoints.is_some() {
            s.push_str(",lam_S,lam_I1,lam_I2,lam_A");
        }
        s.push('\n');
        for (k, (t, state)) in self.grid.times().zip(&self.states).enumerate() {
            let mut row: Vec<f64> = vec![t];
            row.extend(state.to_array());
            if let Some(c) = &self.controls {
                row.extend(c[k].to_array());
            }
            if let Some(a) = &self.adjoints {
                row.extend(a[k].to_array());
            }
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", format_sig10(*v));
            }
            s.push('\n');
        }
        s
    }

    /// Parses a CSV written by [`Trajectory::to_csv_string`]. The grid is
    /// reconstructed from the first and last time stamps.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let has_controls = cols.contains(&"u1");
        let has_adjoints = cols.contains(&"lam_S");
        let expected = 5 + 3 * has_controls as usize + 4 * has_adjoints as usize;
        if cols.len() != expected || cols[..5] != ["t", "S", "I1", "I2", "A"] {
            return Err(Error::Csv(format!("unexpected header `{header}`")));
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut controls = Vec::new();
        let mut adjoints = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Csv(format!("row {}: {e}", lineno + 2)))?;
            if vals.len() != expected {
                return Err(Error::Csv(format!("row {}: expected {expected} columns", lineno + 2)));
            }
            times.push(vals[0]);
            states.push(State::new(vals[1], vals[2], vals[3], vals[4]));
            let mut at = 5;
            if has_controls {
                controls.push(ControlVector::from_array([vals[at], vals[at + 1], vals[at + 2]]));
                at += 3;
            }
            if has_adjoints {
                adjoints.push(AdjointState::new(vals[at], vals[at + 1], vals[at + 2], vals[at + 3]));
            }
        }
        if times.len() < 2 {
            return Err(Error::Csv("need at least two rows".into()));
        }
        let grid = TimeGrid::new(times[0], *times.last().unwrap(), times.len() - 1)?;
        let mut traj = Trajectory::new(grid, states)?;
        if has_controls {
            traj = traj.with_controls(controls)?;
        }
        if has_adjoints {
            traj = traj.with_adjoints(adjoints)?;
        }
        Ok(traj)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Formats with 10 significant digits, `%.10g` style.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn add_scaled(x: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]]
}

fn rk4_combine(x: [f64; 4], k: [[f64; 4]; 4], h: f64) -> [f64; 4] {
    let mut out = x;
    for i in 0..4 {
        out[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
    out
}

fn finite(v: [f64; 4], t: f64) -> Result<[f64; 4]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Classical RK4 forward over `grid`. `field(t, x)` is the state derivative.
///
/// Negative components produced by discretization are clamped to zero after
/// each step; the removed mass is accumulated on the returned trajectory.
pub fn integrate_forward<F>(field: F, initial: State, grid: &TimeGrid) -> Result<Trajectory>
where
    F: Fn(f64, &State) -> State,
{
    initial.validate()?;
    let h = grid.step();
    let eval = |t: f64, x: [f64; 4]| finite(field(t, &State::from_array(x)).to_array(), t);
    let mut states = Vec::with_capacity(grid.n_nodes());
    states.push(initial);
    let mut clamped_mass = 0.0;
    let mut clamp_count = 0;
    let mut x = initial.to_array();
    for k in 0..grid.n_steps() {
        let t = grid.node(k);
        let tm = t + 0.5 * h;
        let k1 = eval(t, x)?;
        let k2 = eval(tm, add_scaled(x, k1, 0.5 * h))?;
        let k3 = eval(tm, add_scaled(x, k2, 0.5 * h))?;
        let k4 = eval(grid.node(k + 1), add_scaled(x, k3, h))?;
        x = finite(rk4_combine(x, [k1, k2, k3, k4], h), grid.node(k + 1))?;
        for v in x.iter_mut() {
            if *v < 0.0 {
                clamped_mass += -*v;
                clamp_count += 1;
                *v = 0.0;
            }
        }
        states.push(State::from_array(x));
    }
    let mut traj = Trajectory::new(*grid, states)?;
    traj.clamped_mass = clamped_mass;
    traj.clamp_count = clamp_count;
    Ok(traj)
}

/// Classical RK4 backward from `terminal` at `t_final` down to `t0`.
///
/// `field(t, x, lambda)` is the costate derivative. States at half steps are
/// the average of the two neighbouring grid states.
pub fn integrate_adjoint_backward<F>(
    field: F,
    terminal: AdjointState,
    grid: &TimeGrid,
    frozen_states: &[State],
) -> Result<Vec<AdjointState>>
where
    F: Fn(f64, &State, &AdjointState) -> AdjointState,
{
    check_len(grid.n_nodes(), frozen_states.len())?;
    let h = grid.step();
    let eval = |t: f64, x: &State, lam: [f64; 4]| finite(field(t, x, &AdjointState::from_array(lam)).to_array(), t);
    let n = grid.n_steps();
    let mut out = vec![AdjointState::default(); grid.n_nodes()];
    out[n] = terminal;
    let mut lam = finite(terminal.to_array(), grid.t_final())?;
    for k in (1..=n).rev() {
        let t = grid.node(k);
        let tm = t - 0.5 * h;
        let x_hi = frozen_states[k];
        let x_lo = frozen_states[k - 1];
        let x_mid = State::from_array(add_scaled(x_hi.to_array(), x_lo.to_array(), 1.0).map(|v| 0.5 * v));
        let k1 = eval(t, &x_hi, lam)?;
        let k2 = eval(tm, &x_mid, add_scaled(lam, k1, -0.5 * h))?;
        let k3 = eval(tm, &x_mid, add_scaled(lam, k2, -0.5 * h))?;
        let k4 = eval(grid.node(k - 1), &x_lo, add_scaled(lam, k3, -h))?;
        lam = finite(rk4_combine(lam, [k1, k2, k3, k4], -h), grid.node(k - 1))?;
        out[k - 1] = AdjointState::from_array(lam);
    }
    Ok(out)
}

/// Linear interpolation of a node-valued schedule at time `t`.
pub fn interpolate_controls(grid: &TimeGrid, controls: &[ControlVector], t: f64) -> ControlVector {
    let h = grid.step();
    let pos = ((t - grid.t0()) / h).clamp(0.0, grid.n_steps() as f64);
    let k = (pos.floor() as usize).min(grid.n_steps() - 1);
    let w = pos - k as f64;
    let (lo, hi) = (controls[k].to_array(), controls[k + 1].to_array());
    ControlVector::from_array([lo[0] + w * (hi[0] - lo[0]), lo[1] + w * (hi[1] - lo[1]), lo[2] + w * (hi[2] - lo[2])])
}

/// Uncontrolled model with constant condom use `u1`.
pub fn simulate(params: &ModelParams, initial: State, grid: &TimeGrid, u1: f64) -> Result<Trajectory> {
    integrate_forward(|_, x| rhs_uncontrolled(x, params, u1), initial, grid)
}

/// Controlled model driven by a node-valued control schedule; the schedule
/// is attached to the returned trajectory.
pub fn simulate_controlled(
    params: &ModelParams,
    initial: State,
    grid: &TimeGrid,
    controls: &[ControlVector],
) -> Result<Trajectory> {
    check_len(grid.n_nodes(), controls.len())?;
    let traj =
        integrate_forward(|t, x| rhs_controlled(x, params, &interpolate_controls(grid, controls, t)), initial, grid)?;
    traj.with_controls(controls.to_vec())
}
