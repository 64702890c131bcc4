//! Threshold and local stability analysis of the uncontrolled model.

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;

use crate::model::{ModelParams, State};

/// Eigenvalues whose largest real part falls within this band of zero are
/// reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

/// Contributions to `R0` from each transmission route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproductionBreakdown {
    /// Direct transmission by unaware infectives.
    pub zeta1: f64,
    /// Unaware infectives that are screened and transmit as aware infectives.
    pub zeta2: f64,
    /// Screened infectives that progress to AIDS and transmit.
    pub zeta3: f64,
    /// Unaware infectives that progress directly to AIDS and transmit.
    pub zeta4: f64,
    pub r0: f64,
}

/// Shorthand rates that recur throughout the analysis.
#[derive(Debug, Clone, Copy)]
struct Rates {
    /// Exit rate from `I1`: theta + delta + mu.
    b: f64,
    /// Exit rate from `I2`: delta + mu + pi.
    c: f64,
    /// Inflow weight `I2 -> A`: delta + pi.
    d: f64,
    /// Exit rate from `A`: alpha + mu.
    e: f64,
}

impl Rates {
    fn of(p: &ModelParams) -> Self {
        Self { b: p.theta + p.delta + p.mu, c: p.delta + p.mu + p.pi, d: p.delta + p.pi, e: p.alpha + p.mu }
    }
}

pub fn basic_reproduction_number(params: &ModelParams, u1: f64) -> ReproductionBreakdown {
    let p = params;
    let Rates { b, c, d, e } = Rates::of(p);
    let k = 1.0 - u1;
    let zeta1 = k * p.beta1 * p.c1 / b;
    let zeta2 = k * p.beta2 * p.c2 * p.theta / (b * c);
    let zeta3 = k * p.beta3 * p.c3 * p.theta * d / (b * c * e);
    let zeta4 = k * p.beta3 * p.c3 * p.delta / (b * e);
    ReproductionBreakdown { zeta1, zeta2, zeta3, zeta4, r0: zeta1 + zeta2 + zeta3 + zeta4 }
}

/// New-infection matrix `F` and transition matrix `V` on the infected
/// subsystem `(I1, I2, A)` at the disease-free equilibrium.
pub fn next_generation_matrices(params: &ModelParams, u1: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let p = params;
    let Rates { b, c, d, e } = Rates::of(p);
    let k = 1.0 - u1;
    #[rustfmt::skip]
    let f = Matrix3::new(
        k * p.beta1 * p.c1, k * p.beta2 * p.c2, k * p.beta3 * p.c3,
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
    );
    #[rustfmt::skip]
    let v = Matrix3::new(
        b, 0.0, 0.0,
        -p.theta, c, 0.0,
        -p.delta, -d, e,
    );
    (f, v)
}

/// `rho(F V^-1)` computed numerically; an independent route to `R0`.
pub fn next_generation_spectral_radius(params: &ModelParams, u1: f64) -> f64 {
    let (f, v) = next_generation_matrices(params, u1);
    let v_inv = v.try_inverse().expect("V is lower triangular with positive diagonal");
    (f * v_inv).complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

/// Intermediate quantities of the endemic equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndemicDetails {
    /// Force of infection at equilibrium, `-b0 / b1`.
    pub beta_m_star: f64,
    pub b0: f64,
    pub b1: f64,
    /// `(Q0 - alpha A*) / mu`.
    pub n_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub state: State,
    /// Present only for endemic reports.
    pub endemic: Option<EndemicDetails>,
}

pub fn disease_free_equilibrium(params: &ModelParams) -> EquilibriumReport {
    EquilibriumReport {
        kind: EquilibriumKind::DiseaseFree,
        state: State::new(params.q0 / params.mu, 0.0, 0.0, 0.0),
        endemic: None,
    }
}

/// `b1` and `b0` of the linear equation `b1 beta_m + b0 = 0` satisfied by the
/// equilibrium force of infection.
pub fn endemic_linear_coefficients(params: &ModelParams, u1: f64) -> (f64, f64) {
    let p = params;
    let Rates { b, c, e, .. } = Rates::of(p);
    let r0 = basic_reproduction_number(p, u1).r0;
    let b1 = (p.delta + p.alpha + p.mu) * (p.theta + p.mu + p.delta) + p.pi * (p.alpha + p.delta + p.mu + p.theta);
    let b0 = e * c * b * (1.0 - r0);
    (b1, b0)
}

/// Closed-form positive equilibrium, present only when `R0 > 1`.
pub fn endemic_equilibrium(params: &ModelParams, u1: f64) -> Option<EquilibriumReport> {
    let p = params;
    if basic_reproduction_number(p, u1).r0 <= 1.0 {
        return None;
    }
    let Rates { b, c, e, .. } = Rates::of(p);
    let (b1, b0) = endemic_linear_coefficients(p, u1);
    let bm = -b0 / b1;
    if bm.is_nan() || bm <= 0.0 {
        return None;
    }
    let s = p.q0 / (bm + p.mu);
    let i1 = p.q0 * bm / (b * (bm + p.mu));
    let i2 = p.q0 * bm * p.theta / (b * c * (bm + p.mu));
    let a_weight = (p.pi + p.delta) * (p.delta + p.theta) + p.delta * p.mu;
    let a = p.q0 * bm * a_weight / (e * b * c * (bm + p.mu));
    let n_star = (p.q0 - p.alpha * a) / p.mu;
    Some(EquilibriumReport {
        kind: EquilibriumKind::Endemic,
        state: State::new(s, i1, i2, a),
        endemic: Some(EndemicDetails { beta_m_star: bm, b0, b1, n_star }),
    })
}

/// Jacobian of the uncontrolled field at the disease-free equilibrium.
pub fn jacobian_at_dfe(params: &ModelParams, u1: f64) -> Matrix4<f64> {
    let p = params;
    let Rates { b, c, d, e } = Rates::of(p);
    let k = 1.0 - u1;
    let (l1, l2, l3) = (k * p.beta1 * p.c1, k * p.beta2 * p.c2, k * p.beta3 * p.c3);
    #[rustfmt::skip]
    let j = Matrix4::new(
        -p.mu, -l1, -l2, -l3,
        0.0, l1 - b, l2, l3,
        0.0, p.theta, -c, 0.0,
        0.0, p.delta, d, -e,
    );
    j
}

/// Quantities appearing in the Jacobian at the endemic equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndemicCoefficients {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    /// `(N - S) beta_m / N`: sensitivity of incidence to `S`.
    pub g: f64,
    /// `(1 - u1) beta_i c_i S / N` for the three infective classes.
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// `beta_m S / N`.
    pub j1: f64,
}

impl EndemicCoefficients {
    pub fn at(params: &ModelParams, u1: f64, state: &State) -> Self {
        let p = params;
        let Rates { b, c, d, e } = Rates::of(p);
        let n = state.total();
        let k = 1.0 - u1;
        let pressure = k * p.contact_pressure(state);
        Self {
            b,
            c,
            d,
            e,
            g: (n - state.s) * pressure / (n * n),
            f1: k * p.beta1 * p.c1 * state.s / n,
            f2: k * p.beta2 * p.c2 * state.s / n,
            f3: k * p.beta3 * p.c3 * state.s / n,
            j1: pressure * state.s / (n * n),
        }
    }

    /// Relative residual of `C E F1 + E theta F2 + delta C F3 + theta D F3 = B C E`,
    /// which holds exactly at the endemic equilibrium.
    pub fn identity_residual(&self, params: &ModelParams) -> f64 {
        let Self { b, c, d, e, f1, f2, f3, .. } = *self;
        let (theta, delta) = (params.theta, params.delta);
        let lhs = c * e * f1 + e * theta * f2 + delta * c * f3 + theta * d * f3;
        let rhs = b * c * e;
        (lhs - rhs).abs() / rhs
    }

    /// `F1 < B`, `C F1 + theta F2 < B C` and `E F1 + delta F3 < B E`.
    pub fn inequalities_hold(&self, params: &ModelParams) -> [bool; 3] {
        let Self { b, c, e, f1, f2, f3, .. } = *self;
        [self.f1 < b, c * f1 + params.theta * f2 < b * c, e * f1 + params.delta * f3 < b * e]
    }

    pub fn jacobian(&self, params: &ModelParams) -> Matrix4<f64> {
        let Self { b, c, d, e, g, f1, f2, f3, j1 } = *self;
        let mu = params.mu;
        #[rustfmt::skip]
        let j = Matrix4::new(
            -g - mu, -f1 + j1, -f2 + j1, -f3 + j1,
            g, f1 - j1 - b, f2 - j1, f3 - j1,
            0.0, params.theta, -c, 0.0,
            0.0, params.delta, d, -e,
        );
        j
    }

    /// Coefficients `p1..p4` of `lambda^4 + p1 lambda^3 + p2 lambda^2 + p3 lambda + p4`.
    pub fn characteristic_coefficients(&self, params: &ModelParams) -> [f64; 4] {
        let Self { b, c, d, e, g, f1, f2, f3, j1 } = *self;
        let (mu, theta, delta, alpha) = (params.mu, params.theta, params.delta, params.alpha);
        let p1 = b + c + g + mu + e - f1 + j1;
        let p2 = mu * (b - f1)
            + c * mu
            + c * e
            + mu * e
            + (b * c - c * f1 - theta * f2)
            + (b * e - delta * f3 - e * f1)
            + (c + b + e) * (j1 + g);
        let p3 = mu * (b * c - c * f1 - theta * f2)
            + c * mu * e
            + (c * e + mu * (b + c + alpha) + c * delta + theta * d + theta * e) * j1
            + (b * c * e - c * e * f1 - theta * d * f3 - theta * e * f2 - c * delta * f3)
            + mu * (b * e - delta * f3 - e * f1)
            + (b * c + b * e + c * e) * g;
        let p4 = b * c * g * e
            + (b * c * mu * e - c * mu * e * f1 - theta * mu * d * f3 - theta * mu * e * f2 - c * mu * delta * f3)
            + (c * mu * delta + c * mu * e + theta * mu * d + theta * mu * e) * j1;
        [p1, p2, p3, p4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Largest real part within [`MARGINAL_BAND`] of zero.
    Marginal,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub equilibrium: EquilibriumReport,
    /// `a1..a3` at the disease-free equilibrium, `p1..p4` at the endemic one.
    pub poly_coeffs: Vec<f64>,
    /// Verdict of the coefficient criterion (never `Marginal`).
    pub criterion_verdict: Stability,
    /// Sign changes in `(1, p1, .., p4)`, zeros skipped. Endemic reports only.
    pub sign_changes: Option<usize>,
    pub eigenvalues: Vec<Complex64>,
    pub eigen_verdict: Stability,
}

impl StabilityReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The two verdicts agree, or the eigenvalue verdict is marginal.
    pub fn verdicts_consistent(&self) -> bool {
        self.eigen_verdict == Stability::Marginal || self.eigen_verdict == self.criterion_verdict
    }
}

pub fn eigen_verdict(eigenvalues: &[Complex64]) -> Stability {
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re.abs() <= MARGINAL_BAND {
        Stability::Marginal
    } else if max_re < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn eigenvalues(m: &Matrix4<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Routh-Hurwitz coefficients `(a1, a2, a3)` of the reduced 3x3 block at
/// the disease-free equilibrium (the fourth eigenvalue is `-mu`).
pub fn dfe_characteristic_coefficients(params: &ModelParams, u1: f64) -> [f64; 3] {
    let Rates { b, c, e, .. } = Rates::of(params);
    let z = basic_reproduction_number(params, u1);
    let a1 = e + c + b * (1.0 - z.zeta1);
    let a2 = e * c + c * b * (1.0 - z.zeta1 - z.zeta2) + e * b * (1.0 - z.zeta1 - z.zeta4);
    let a3 = b * c * e * (1.0 - z.r0);
    [a1, a2, a3]
}

pub fn dfe_stability(params: &ModelParams, u1: f64) -> StabilityReport {
    let [a1, a2, a3] = dfe_characteristic_coefficients(params, u1);
    let criterion = if a1 > 0.0 && a3 > 0.0 && a1 * a2 - a3 > 0.0 { Stability::Stable } else { Stability::Unstable };
    let eig = eigenvalues(&jacobian_at_dfe(params, u1));
    StabilityReport {
        equilibrium: disease_free_equilibrium(params),
        poly_coeffs: vec![a1, a2, a3],
        criterion_verdict: criterion,
        sign_changes: None,
        eigen_verdict: eigen_verdict(&eig),
        eigenvalues: eig,
    }
}

/// Number of sign changes in `coeffs`, skipping zeros.
pub fn sign_changes(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .filter(|&&c| c != 0.0)
        .map(|&c| c > 0.0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count()
}

/// Stability of the endemic equilibrium, `None` when `R0 <= 1`.
///
/// The criterion verdict is `Stable` when the sequence `(1, p1, p2, p3, p4)`
/// has no sign change, i.e. all coefficients are positive.
pub fn endemic_stability(params: &ModelParams, u1: f64) -> Option<StabilityReport> {
    let eq = endemic_equilibrium(params, u1)?;
    let coeffs = EndemicCoefficients::at(params, u1, &eq.state);
    let p = coeffs.characteristic_coefficients(params);
    let changes = sign_changes(&[1.0, p[0], p[1], p[2], p[3]]);
    let criterion = if changes == 0 && p.iter().all(|&v| v > 0.0) { Stability::Stable } else { Stability::Unstable };
    let eig = eigenvalues(&coeffs.jacobian(params));
    Some(StabilityReport {
        equilibrium: eq,
        poly_coeffs: p.to_vec(),
        criterion_verdict: criterion,
        sign_changes: Some(changes),
        eigen_verdict: eigen_verdict(&eig),
        eigenvalues: eig,
    })
}

/// Hurwitz condition for a monic quartic: `p1, p3, p4 > 0` and
/// `p1 p2 p3 - p3^2 - p1^2 p4 > 0`.
pub fn quartic_hurwitz_stable(p: &[f64; 4]) -> bool {
    let [p1, p2, p3, p4] = *p;
    p1 > 0.0 && p3 > 0.0 && p4 > 0.0 && p1 * p2 * p3 - p3 * p3 - p1 * p1 * p4 > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs_uncontrolled;
    use approx::assert_relative_eq;

    /// Characteristic polynomial coefficients of a 4x4 matrix via
    /// Faddeev-LeVerrier; independent of the hand-expanded formulas.
    fn faddeev_leverrier(a: &Matrix4<f64>) -> [f64; 4] {
        let mut m = Matrix4::<f64>::zeros();
        let mut c = [0.0; 5];
        c[0] = 1.0;
        for k in 1..=4 {
            m = a * m + Matrix4::identity() * c[k - 1];
            c[k] = -(a * m).trace() / k as f64;
        }
        [c[1], c[2], c[3], c[4]]
    }

    fn fd_jacobian(params: &ModelParams, u1: f64, at: &State) -> Matrix4<f64> {
        let mut j = Matrix4::zeros();
        let base = at.to_array();
        for col in 0..4 {
            let h = 1e-6 * base[col].abs().max(1.0);
            let mut plus = base;
            let mut minus = base;
            plus[col] += h;
            minus[col] -= h;
            let fp = rhs_uncontrolled(&State::from_array(plus), params, u1).to_array();
            let fm = rhs_uncontrolled(&State::from_array(minus), params, u1).to_array();
            for row in 0..4 {
                j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn r0_reference_values() {
        let p = ModelParams::table2();
        assert_relative_eq!(basic_reproduction_number(&p, 0.0).r0, 30.0128, max_relative = 1e-3);
        assert_relative_eq!(basic_reproduction_number(&p, 0.9).r0, 3.0013, max_relative = 1e-3);
        assert_eq!(basic_reproduction_number(&p, 1.0).r0, 0.0);
        let r1 = basic_reproduction_number(&ModelParams::table1(), 0.0).r0;
        assert!(r1 < 1.0);
        assert!((r1 - 0.678).abs() < 1e-3, "{r1}");
    }

    #[test]
    fn r0_matches_spectral_radius() {
        for p in [ModelParams::table1(), ModelParams::table2()] {
            for u1 in [0.0, 0.3, 0.9] {
                let a = basic_reproduction_number(&p, u1).r0;
                let b = next_generation_spectral_radius(&p, u1);
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn disease_free_values() {
        assert_eq!(disease_free_equilibrium(&ModelParams::table1()).state, State::new(10000.0, 0.0, 0.0, 0.0));
        assert_eq!(disease_free_equilibrium(&ModelParams::table2()).state, State::new(100000.0, 0.0, 0.0, 0.0));
        let mut p = ModelParams::table1();
        p.q0 = p.mu;
        assert_eq!(disease_free_equilibrium(&p).state.s, 1.0);
    }

    #[test]
    fn endemic_table2() {
        assert!(endemic_equilibrium(&ModelParams::table1(), 0.0).is_none());
        let p = ModelParams::table2();
        let eq = endemic_equilibrium(&p, 0.0).unwrap();
        assert_relative_eq!(eq.state.i1, 14730.0, max_relative = 1e-2);
        assert_relative_eq!(eq.state.i2, 306.8848, max_relative = 1e-2);
        let d = rhs_uncontrolled(&eq.state, &p, 0.0);
        for v in d.to_array() {
            assert!(v.abs() <= 1e-8 * p.q0, "{d:?}");
        }
        let det = eq.endemic.unwrap();
        assert!(det.b0 < 0.0 && det.b1 > 0.0 && det.beta_m_star > 0.0);
        assert_relative_eq!(det.n_star, eq.state.total(), max_relative = 1e-12);
        let coeffs = EndemicCoefficients::at(&p, 0.0, &eq.state);
        assert!(coeffs.identity_residual(&p) < 1e-8);
        assert_eq!(coeffs.inequalities_hold(&p), [true; 3]);
    }

    #[test]
    fn dfe_jacobian_entries() {
        let j = jacobian_at_dfe(&ModelParams::table1(), 0.0);
        assert_relative_eq!(j[(1, 1)], -0.115, epsilon = 1e-12);
        assert_eq!(j.column(0).iter().copied().collect::<Vec<_>>(), vec![-0.2, 0.0, 0.0, 0.0]);
        let j = jacobian_at_dfe(&ModelParams::table1(), 1.0);
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(j[(0, 0)], -0.2);
    }

    #[test]
    fn dfe_jacobian_matches_finite_differences() {
        for p in [ModelParams::table1(), ModelParams::table2()] {
            for u1 in [0.0, 0.5] {
                let dfe = disease_free_equilibrium(&p).state;
                let fd = fd_jacobian(&p, u1, &dfe);
                let exact = jacobian_at_dfe(&p, u1);
                assert!((fd - exact).amax() < 1e-6, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn endemic_jacobian_matches_finite_differences() {
        let p = ModelParams::table2();
        for u1 in [0.0, 0.9] {
            let eq = endemic_equilibrium(&p, u1).unwrap();
            let fd = fd_jacobian(&p, u1, &eq.state);
            let exact = EndemicCoefficients::at(&p, u1, &eq.state).jacobian(&p);
            assert!((fd - exact).amax() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn dfe_coefficients_match_reduced_block() {
        for p in [ModelParams::table1(), ModelParams::table2()] {
            let j = jacobian_at_dfe(&p, 0.0);
            let poly = faddeev_leverrier(&j);
            let [a1, a2, a3] = dfe_characteristic_coefficients(&p, 0.0);
            // Full quartic = (lambda + mu)(lambda^3 + a1 lambda^2 + a2 lambda + a3).
            let mu = p.mu;
            let expected = [a1 + mu, a2 + mu * a1, a3 + mu * a2, mu * a3];
            for (x, y) in poly.iter().zip(expected) {
                assert_relative_eq!(*x, y, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn endemic_coefficients_match_faddeev_leverrier() {
        let p = ModelParams::table2();
        for u1 in [0.0, 0.5, 0.9] {
            let eq = endemic_equilibrium(&p, u1).unwrap();
            let c = EndemicCoefficients::at(&p, u1, &eq.state);
            let poly = faddeev_leverrier(&c.jacobian(&p));
            let got = c.characteristic_coefficients(&p);
            for (x, y) in poly.iter().zip(got) {
                assert_relative_eq!(*x, y, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn stability_verdicts() {
        let t1 = dfe_stability(&ModelParams::table1(), 0.0);
        assert_eq!(t1.criterion_verdict, Stability::Stable);
        assert_eq!(t1.eigen_verdict, Stability::Stable);
        let [a1, a2, a3] = [t1.poly_coeffs[0], t1.poly_coeffs[1], t1.poly_coeffs[2]];
        assert!(a1 > 0.0 && a3 > 0.0 && a1 * a2 - a3 > 0.0);

        let t2 = dfe_stability(&ModelParams::table2(), 0.0);
        assert_eq!(t2.criterion_verdict, Stability::Unstable);
        assert_eq!(t2.eigen_verdict, Stability::Unstable);

        for u1 in [0.0, 0.9] {
            let e = endemic_stability(&ModelParams::table2(), u1).unwrap();
            assert!(e.poly_coeffs.iter().all(|&v| v > 0.0));
            assert_eq!(e.sign_changes, Some(0));
            assert_eq!(e.criterion_verdict, Stability::Stable);
            assert_eq!(e.eigen_verdict, Stability::Stable);
        }
        assert!(endemic_stability(&ModelParams::table1(), 0.0).is_none());
    }

    #[test]
    fn sign_change_counting_skips_zeros() {
        assert_eq!(sign_changes(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(sign_changes(&[1.0, -2.0, 3.0]), 2);
        assert_eq!(sign_changes(&[1.0, 0.0, -3.0]), 1);
        assert_eq!(sign_changes(&[0.0, 0.0]), 0);
    }

    #[test]
    fn marginal_band() {
        let z = |re: f64| vec![Complex64::new(re, 0.0), Complex64::new(-1.0, 0.0)];
        assert_eq!(eigen_verdict(&z(5e-10)), Stability::Marginal);
        assert_eq!(eigen_verdict(&z(-5e-10)), Stability::Marginal);
        assert_eq!(eigen_verdict(&z(-1e-6)), Stability::Stable);
        assert_eq!(eigen_verdict(&z(1e-6)), Stability::Unstable);
    }

    #[test]
    fn r0_linear_in_condom_use() {
        let p = ModelParams::table2();
        let r00 = basic_reproduction_number(&p, 0.0).r0;
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let u1 = k as f64 / 20.0;
            let r = basic_reproduction_number(&p, u1).r0;
            assert_relative_eq!(r, (1.0 - u1) * r00, max_relative = 1e-12, epsilon = 1e-14);
            assert!(r < prev);
            prev = r;
        }
    }
}
