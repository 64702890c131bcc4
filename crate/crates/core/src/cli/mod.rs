//! Scenario-driven commands behind the `hivopt` binary.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 optimal-control sweep did not converge (artifacts are still written).

pub mod config;
pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    basic_reproduction_number, dfe_stability, disease_free_equilibrium, endemic_equilibrium, endemic_stability,
    ReproductionBreakdown, Stability, StabilityReport,
};
use crate::error::Error;
use crate::integrate::{format_sig10, simulate, simulate_controlled, Trajectory};
use crate::model::{ControlVector, ModelParams, State};
use crate::optctrl::{forward_backward_sweep, objective, OptimalSolution};

pub use config::{OutputOptions, Scenario};
use plot::{Panel, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } | Error::MissingControls | Error::LengthMismatch { .. } => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CommandResult = std::result::Result<CommandOutput, CommandError>;

/// What a command printed and wrote.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), CommandError> {
    std::fs::create_dir_all(dir).map_err(|e| CommandError {
        code: EXIT_CONFIG,
        message: format!("cannot create output directory {}: {e}", dir.display()),
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CommandError { code: EXIT_CONFIG, message: format!("cannot write {}: {e}", path.display()) })?;
    files.push(path);
    Ok(())
}

/// Plots never affect the exit status.
fn write_plot(dir: &Path, name: &str, svg: &str, files: &mut Vec<PathBuf>) {
    if let Err(e) = write_file(dir, name, svg, files) {
        eprintln!("warning: plot skipped: {e}");
    }
}

fn warn_params(params: &ModelParams) {
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
}

fn compartment_panels<'a>(runs: &[(&'a str, &'a Trajectory, bool)]) -> Vec<Panel<'a>> {
    ["S", "I1", "I2", "A"]
        .into_iter()
        .enumerate()
        .map(|(i, title)| Panel {
            title,
            series: runs
                .iter()
                .map(|(label, tr, dashed)| Series {
                    label,
                    values: tr.states.iter().map(|s| s.to_array()[i]).collect(),
                    dashed: *dashed,
                })
                .collect(),
        })
        .collect()
}

fn state_line(label: &str, s: &State) -> String {
    format!(
        "{label}: S={} I1={} I2={} A={}\n",
        format_sig10(s.s),
        format_sig10(s.i1),
        format_sig10(s.i2),
        format_sig10(s.a)
    )
}

fn distance(a: &State, b: &State) -> f64 {
    a.to_array().iter().zip(b.to_array()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn run_simulate(scenario: &Scenario, out_dir: &Path) -> CommandResult {
    let params = scenario.require_params()?;
    let initial = scenario.require_initial()?;
    let grid = scenario.require_grid()?;
    let u1 = scenario.u1();
    warn_params(&params);

    let traj = simulate(&params, initial, &grid, u1)?;
    let mut out = CommandOutput::default();
    if scenario.outputs.csv {
        write_file(out_dir, "trajectory.csv", &traj.to_csv_string(), &mut out.files)?;
    }
    if scenario.outputs.plot {
        let x: Vec<f64> = grid.times().collect();
        let svg =
            plot::render(&format!("Compartments (u1 = {u1})"), &x, &compartment_panels(&[("model", &traj, false)]), 2);
        write_plot(out_dir, "compartments.svg", &svg, &mut out.files);
    }

    let last = traj.final_state();
    let s = &mut out.stdout;
    let _ = writeln!(s, "t_final={}", format_sig10(grid.t_final()));
    s.push_str(&state_line("final", &last));
    let dfe = disease_free_equilibrium(&params).state;
    let mut nearest = ("disease-free", distance(&last, &dfe));
    if let Some(eq) = endemic_equilibrium(&params, u1) {
        let d = distance(&last, &eq.state);
        if d < nearest.1 {
            nearest = ("endemic", d);
        }
    }
    let _ = writeln!(s, "nearest_equilibrium={}", nearest.0);
    let _ = writeln!(s, "distance={}", format_sig10(nearest.1));
    let _ = writeln!(s, "clamped_mass={}", format_sig10(traj.clamped_mass));
    Ok(out)
}

/// Everything `analyze` reports for one parameter set.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub u1: f64,
    pub r0: ReproductionBreakdown,
    pub dfe: StabilityReport,
    pub endemic: Option<StabilityReport>,
}

impl AnalysisReport {
    pub fn compute(params: &ModelParams, u1: f64) -> Self {
        Self {
            u1,
            r0: basic_reproduction_number(params, u1),
            dfe: dfe_stability(params, u1),
            endemic: endemic_stability(params, u1),
        }
    }

    /// `key=value` pairs in a fixed order.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let f = |v: f64| format_sig10(v);
        let mut kv: Vec<(String, String)> = vec![
            ("u1".into(), f(self.u1)),
            ("r0".into(), f(self.r0.r0)),
            ("zeta1".into(), f(self.r0.zeta1)),
            ("zeta2".into(), f(self.r0.zeta2)),
            ("zeta3".into(), f(self.r0.zeta3)),
            ("zeta4".into(), f(self.r0.zeta4)),
        ];
        let dfe = &self.dfe;
        kv.push(("dfe_S".into(), f(dfe.equilibrium.state.s)));
        let [a1, a2, a3] = [dfe.poly_coeffs[0], dfe.poly_coeffs[1], dfe.poly_coeffs[2]];
        kv.push(("dfe_a1".into(), f(a1)));
        kv.push(("dfe_a2".into(), f(a2)));
        kv.push(("dfe_a3".into(), f(a3)));
        kv.push(("dfe_a1a2_minus_a3".into(), f(a1 * a2 - a3)));
        kv.push(("dfe".into(), dfe.criterion_verdict.to_string()));
        kv.push(("dfe_eigen".into(), dfe.eigen_verdict.to_string()));
        kv.push(("dfe_max_real_eigenvalue".into(), f(dfe.max_real_part())));
        match &self.endemic {
            None => {
                kv.push(("endemic".into(), "absent".into()));
                kv.push(("endemic_stability".into(), "none".into()));
            }
            Some(e) => {
                let st = e.equilibrium.state;
                let det = e.equilibrium.endemic.expect("endemic details");
                kv.push(("endemic".into(), "present".into()));
                kv.push(("endemic_S".into(), f(st.s)));
                kv.push(("endemic_I1".into(), f(st.i1)));
                kv.push(("endemic_I2".into(), f(st.i2)));
                kv.push(("endemic_A".into(), f(st.a)));
                kv.push(("endemic_N".into(), f(det.n_star)));
                kv.push(("beta_m_star".into(), f(det.beta_m_star)));
                kv.push(("b0".into(), f(det.b0)));
                kv.push(("b1".into(), f(det.b1)));
                for (i, p) in e.poly_coeffs.iter().enumerate() {
                    kv.push((format!("endemic_p{}", i + 1), f(*p)));
                }
                kv.push(("endemic_sign_changes".into(), e.sign_changes.unwrap_or(0).to_string()));
                kv.push(("endemic_stability".into(), e.criterion_verdict.to_string()));
                kv.push(("endemic_eigen".into(), e.eigen_verdict.to_string()));
                kv.push(("endemic_max_real_eigenvalue".into(), f(e.max_real_part())));
            }
        }
        kv
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let r = &self.r0;
        let _ = writeln!(s, "Basic reproduction number (u1 = {})", format_sig10(self.u1));
        let _ = writeln!(
            s,
            "  R0 = {}  (zeta1 {}, zeta2 {}, zeta3 {}, zeta4 {})",
            format_sig10(r.r0),
            format_sig10(r.zeta1),
            format_sig10(r.zeta2),
            format_sig10(r.zeta3),
            format_sig10(r.zeta4)
        );
        let _ = writeln!(s, "Disease-free equilibrium");
        s.push_str(&state_line("  E0", &self.dfe.equilibrium.state));
        let _ =
            writeln!(s, "  Routh-Hurwitz: {}   eigenvalues: {}", self.dfe.criterion_verdict, self.dfe.eigen_verdict);
        match &self.endemic {
            None => {
                let _ = writeln!(s, "Endemic equilibrium: absent (R0 <= 1)");
            }
            Some(e) => {
                let _ = writeln!(s, "Endemic equilibrium");
                s.push_str(&state_line("  E1", &e.equilibrium.state));
                let _ = writeln!(
                    s,
                    "  coefficient signs: {} change(s) -> {}   eigenvalues: {}",
                    e.sign_changes.unwrap_or(0),
                    e.criterion_verdict,
                    e.eigen_verdict
                );
            }
        }
        s.push_str("\n[report]\n");
        for (k, v) in self.key_values() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

pub fn run_analyze(scenario: &Scenario) -> CommandResult {
    let params = scenario.require_params()?;
    warn_params(&params);
    let report = AnalysisReport::compute(&params, scenario.u1());
    Ok(CommandOutput { code: EXIT_OK, stdout: report.to_text(), files: Vec::new() })
}

/// Result of `optimize`: the sweep and the zero-control baseline.
pub struct OptimizeOutcome {
    pub solution: OptimalSolution,
    pub baseline: Trajectory,
    pub baseline_objective: f64,
}

pub fn optimize(scenario: &Scenario) -> Result<OptimizeOutcome, CommandError> {
    let params = scenario.require_params()?;
    let initial = scenario.require_initial()?;
    let grid = scenario.require_grid()?;
    let weights = scenario.require_weights()?;
    let opts = scenario.sweep_opts.unwrap_or_default();
    warn_params(&params);
    let baseline_controls = vec![ControlVector::ZERO; grid.n_nodes()];
    let baseline = simulate_controlled(&params, initial, &grid, &baseline_controls)?;
    let baseline_objective = objective(&baseline, &weights)?;
    let solution = forward_backward_sweep(&params, &weights, initial, &grid, &opts)?;
    Ok(OptimizeOutcome { solution, baseline, baseline_objective })
}

pub fn run_optimize(scenario: &Scenario, out_dir: &Path) -> CommandResult {
    let outcome = optimize(scenario)?;
    let sol = &outcome.solution;
    let mut out = CommandOutput::default();
    if scenario.outputs.csv {
        write_file(out_dir, "optimal.csv", &sol.trajectory.to_csv_string(), &mut out.files)?;
        write_file(out_dir, "baseline.csv", &outcome.baseline.to_csv_string(), &mut out.files)?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "objective={}", format_sig10(sol.objective));
    let _ = writeln!(summary, "objective_uncontrolled={}", format_sig10(outcome.baseline_objective));
    let _ = writeln!(summary, "iterations={}", sol.iterations);
    let _ = writeln!(summary, "converged={}", sol.converged);
    let _ = writeln!(summary, "final_residual={}", format_sig10(sol.final_residual()));
    let _ = writeln!(summary, "final_I1_controlled={}", format_sig10(sol.trajectory.final_state().i1));
    let _ = writeln!(summary, "final_I1_uncontrolled={}", format_sig10(outcome.baseline.final_state().i1));
    write_file(out_dir, "summary.txt", &summary, &mut out.files)?;

    if scenario.outputs.plot {
        let x: Vec<f64> = sol.trajectory.grid.times().collect();
        let controls = sol.controls();
        let panel = Panel {
            title: "Control profile",
            series: ["u1", "u2", "u3"]
                .into_iter()
                .enumerate()
                .map(|(i, label)| Series {
                    label,
                    values: controls.iter().map(|u| u.to_array()[i]).collect(),
                    dashed: false,
                })
                .collect(),
        };
        write_plot(out_dir, "controls.svg", &plot::render("Optimal controls", &x, &[panel], 1), &mut out.files);
        let panels =
            compartment_panels(&[("optimal", &sol.trajectory, false), ("no control", &outcome.baseline, true)]);
        write_plot(
            out_dir,
            "compartments.svg",
            &plot::render("With and without control", &x, &panels, 2),
            &mut out.files,
        );
    }

    out.stdout = summary;
    out.code = if sol.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok(out)
}

/// One sample of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub report: AnalysisReport,
}

impl SweepRow {
    pub const HEADER: &'static str = "value,r0,dfe,endemic,endemic_stability,S,I1,I2,A";

    fn to_csv(&self) -> String {
        let r = &self.report;
        let (present, verdict, eq) = match &r.endemic {
            Some(e) => ("present", e.criterion_verdict.as_str(), e.equilibrium.state),
            None => ("absent", "none", r.dfe.equilibrium.state),
        };
        let cells = [
            format_sig10(self.value),
            format_sig10(r.r0.r0),
            r.dfe.criterion_verdict.as_str().to_string(),
            present.to_string(),
            verdict.to_string(),
            format_sig10(eq.s),
            format_sig10(eq.i1),
            format_sig10(eq.i2),
            format_sig10(eq.a),
        ];
        cells.join(",")
    }
}

pub fn sweep_axes() -> Vec<&'static str> {
    let mut axes: Vec<&'static str> = ModelParams::KEYS.to_vec();
    axes.push("u1");
    axes
}

/// `count` evenly spaced samples on `[lo, hi]`; a single sample sits at `lo`.
pub fn sweep_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Evaluates the threshold analysis along one axis. Samples are independent
/// and computed in parallel; output order follows `values`.
pub fn sweep_rows(params: &ModelParams, u1: f64, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>, CommandError> {
    if !sweep_axes().contains(&axis) {
        return Err(CommandError {
            code: EXIT_CONFIG,
            message: format!("unknown sweep axis `{axis}`; expected one of {}", sweep_axes().join(", ")),
        });
    }
    values
        .par_iter()
        .map(|&value| {
            let mut p = *params;
            let mut u = u1;
            if axis == "u1" {
                if !(0.0..=1.0).contains(&value) {
                    return Err(CommandError {
                        code: EXIT_CONFIG,
                        message: format!("u1 sample {value} outside [0, 1]"),
                    });
                }
                u = value;
            } else {
                p.set(axis, value);
                p.validate()?;
            }
            Ok(SweepRow { value, report: AnalysisReport::compute(&p, u) })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SweepRow::HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn run_sweep(scenario: &Scenario, axis: &str, lo: f64, hi: f64, count: usize, out_dir: &Path) -> CommandResult {
    let params = scenario.require_params()?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(CommandError { code: EXIT_CONFIG, message: "sweep needs a finite range and count >= 1".into() });
    }
    let rows = sweep_rows(&params, scenario.u1(), axis, &sweep_values(lo, hi, count))?;
    let csv = sweep_csv(&rows);
    let mut out = CommandOutput::default();
    write_file(out_dir, "sweep.csv", &csv, &mut out.files)?;
    if scenario.outputs.plot && rows.len() > 1 {
        let x: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let panel = Panel {
            title: "R0",
            series: vec![
                Series { label: "R0", values: rows.iter().map(|r| r.report.r0.r0).collect(), dashed: false },
                Series { label: "threshold", values: vec![1.0; rows.len()], dashed: true },
            ],
        };
        write_plot(out_dir, "sweep.svg", &plot::render(&format!("R0 along {axis}"), &x, &[panel], 1), &mut out.files);
    }
    let crossings = rows.windows(2).filter(|w| (w[0].report.r0.r0 > 1.0) != (w[1].report.r0.r0 > 1.0)).count();
    let _ = writeln!(out.stdout, "axis={axis}");
    let _ = writeln!(out.stdout, "samples={}", rows.len());
    let _ = writeln!(out.stdout, "threshold_crossings={crossings}");
    let _ = writeln!(
        out.stdout,
        "endemic_unstable={}",
        rows.iter()
            .filter(|r| r.report.endemic.as_ref().is_some_and(|e| e.criterion_verdict == Stability::Unstable))
            .count()
    );
    Ok(out)
}

/// Parses `lo:hi`.
pub fn parse_range(text: &str) -> Result<(f64, f64), CommandError> {
    let err = || CommandError { code: EXIT_CONFIG, message: format!("range must look like `lo:hi`, got `{text}`") };
    let (lo, hi) = text.split_once(':').ok_or_else(err)?;
    let lo: f64 = lo.trim().parse().map_err(|_| err())?;
    let hi: f64 = hi.trim().parse().map_err(|_| err())?;
    Ok((lo, hi))
}

/// Output directory precedence: `--out`, then the scenario's `[outputs] dir`,
/// then `HIVOPT_OUT_DIR` / `TOOL_OUT_DIR`, then `./out`.
pub fn resolve_out_dir(cli: Option<&Path>, scenario: &Scenario) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = &scenario.outputs.dir {
        return p.clone();
    }
    for var in ["HIVOPT_OUT_DIR", "TOOL_OUT_DIR"] {
        if let Some(v) = std::env::var_os(var).filter(|v| !v.is_empty()) {
            return PathBuf::from(v);
        }
    }
    PathBuf::from("out")
}
