//! Filtered cavity-output modes in the bad-cavity limit.
//!
//! With the optical modes adiabatically eliminated the mechanics obeys
//! `ḃ = −z b + 2i√G₁ a_in,1 + 2i√G₂ a_in,2† − √γ b_in` with
//! `z = Γ + iΔ`, `Γ = 2G₁ − 2G₂ + γ/2`, and the outputs are
//! `a_out,1 = −2i√G₁ b − a_in,1`, `a_out,2† = 2i√G₂ b − a_in,2†`.
//!
//! The flat-top output mode `A_i = τ^{−1/2} ∫₀^τ a_out,i dt` is obtained two
//! ways that share no code:
//!
//! * [`output_mode_covariance`] integrates a 6×6 linear system for the
//!   mechanics together with the running integrals `B_i(t) = ∫₀^t a_out,i`,
//!   then divides the accumulator block by τ.
//! * [`double_integral_oracle`] builds the two-time correlations of the
//!   outputs from the formal solution for `b(t)` and sums them over a
//!   trapezoidal grid on `[0, τ]²`.

use nalgebra::{DMatrix, Matrix6, Vector6};
use num_complex::Complex64;

use crate::dynamics::{
    CompensatedState, DivergenceGuard, EntanglementSeries, LyapunovStepper, STIFFNESS_FRACTION,
};
use crate::error::{Error, Result};
use crate::gaussian::{log_negativity_with, tol, CovarianceMatrix};
use crate::model::DriftDiffusion;

/// `g/κ` above which the adiabatic model is refused.
pub const MAX_COUPLING_RATIO: f64 = 0.5;
/// `g/κ` above which results carry a warning (κ ≥ 10 g is "deep" bad cavity).
pub const WARN_COUPLING_RATIO: f64 = 0.1;
/// Default integration step as a fraction of the inverse largest rate.
pub const DEFAULT_STEP_FRACTION: f64 = 0.0025;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BadCavityParams {
    /// Effective rates `G_i = g_i²/κ_i`, units of γ.
    pub eff_g1: f64,
    pub eff_g2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n_th: f64,
}

impl BadCavityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("G1", self.eff_g1),
            ("G2", self.eff_g2),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("n_th", self.n_th),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::param(
                    name,
                    format!("must be finite and ≥ 0, got {value}"),
                ));
            }
        }
        for (name, eff, kappa) in [
            ("kappa1", self.eff_g1, self.kappa1),
            ("kappa2", self.eff_g2, self.kappa2),
        ] {
            if eff > 0.0 && kappa <= 0.0 {
                return Err(Error::param(
                    name,
                    "must be positive when the coupling is nonzero",
                ));
            }
        }
        let ratio = self.coupling_ratio();
        if ratio > MAX_COUPLING_RATIO {
            return Err(Error::param(
                "kappa",
                format!(
                    "g/κ = {ratio:.3} exceeds {MAX_COUPLING_RATIO}; adiabatic elimination invalid"
                ),
            ));
        }
        Ok(())
    }

    /// Effective mechanical damping `Γ = 2G₁ − 2G₂ + γ/2`.
    pub fn damping(&self) -> f64 {
        2.0 * self.eff_g1 - 2.0 * self.eff_g2 + self.gamma / 2.0
    }

    /// `z = Γ + iΔ`.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.damping(), self.delta)
    }

    /// Underlying linear couplings `g_i = √(G_i κ_i)`.
    pub fn couplings(&self) -> (f64, f64) {
        (
            (self.eff_g1 * self.kappa1).sqrt(),
            (self.eff_g2 * self.kappa2).sqrt(),
        )
    }

    /// Largest `g_i/κ_i`.
    pub fn coupling_ratio(&self) -> f64 {
        let (g1, g2) = self.couplings();
        let r = |g: f64, k: f64| if g == 0.0 { 0.0 } else { g / k };
        r(g1, self.kappa1).max(r(g2, self.kappa2))
    }

    /// `κ_i ≥ 10 g_i` for both modes.
    pub fn is_deep_bad_cavity(&self) -> bool {
        self.coupling_ratio() <= WARN_COUPLING_RATIO
    }

    /// Total diffusion `4G₁·½ + 4G₂·½ + γ(n_th + ½)` driving each mechanical quadrature.
    pub fn mechanical_diffusion(&self) -> f64 {
        2.0 * self.eff_g1 + 2.0 * self.eff_g2 + self.gamma * (self.n_th + 0.5)
    }

    /// Long-time mechanical quadrature variance, `D_b / 2Γ`.
    pub fn mechanical_stationary_variance(&self) -> Option<f64> {
        let damping = self.damping();
        (damping > 0.0).then(|| self.mechanical_diffusion() / (2.0 * damping))
    }

    fn warnings(&self) -> Vec<String> {
        if self.is_deep_bad_cavity() {
            Vec::new()
        } else {
            vec![format!(
                "g/κ = {:.3} is above {WARN_COUPLING_RATIO}; adiabatic elimination is approximate",
                self.coupling_ratio()
            )]
        }
    }

    fn check_horizon(&self, tau: f64) -> Result<()> {
        let damping = self.damping();
        if damping < 0.0 && tau > 1.0 / damping.abs() {
            return Err(Error::Unstable(format!(
                "Γ = {damping} < 0 and τ = {tau} exceeds the growth time 1/|Γ|"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputModeResult {
    pub tau: f64,
    pub covariance: CovarianceMatrix,
    pub e_n: f64,
    pub warnings: Vec<String>,
}

/// Drift and diffusion for the state `(x_b, p_b, X₁, P₁, X₂, P₂)`, where
/// `(X_i, P_i)` are the quadratures of the unnormalized `B_i(t) = ∫₀^t a_out,i`.
pub fn build_extended_system(p: &BadCavityParams) -> Result<DriftDiffusion> {
    p.validate()?;
    let (s1, s2) = (p.eff_g1.sqrt(), p.eff_g2.sqrt());
    let damping = p.damping();
    let delta = p.delta;

    #[rustfmt::skip]
    let drift = Matrix6::new(
        -damping,  delta,     0.0, 0.0, 0.0, 0.0,
        -delta,    -damping,  0.0, 0.0, 0.0, 0.0,
        0.0,       2.0 * s1,  0.0, 0.0, 0.0, 0.0,
        -2.0 * s1, 0.0,       0.0, 0.0, 0.0, 0.0,
        0.0,       -2.0 * s2, 0.0, 0.0, 0.0, 0.0,
        -2.0 * s2, 0.0,       0.0, 0.0, 0.0, 0.0,
    );

    // Columns: input quadratures (x_in1, p_in1, x_in2, p_in2, x_bin, p_bin).
    // The same inputs drive both the mechanics and the reflected part of the
    // outputs, which produces the mechanical–accumulator cross-diffusion.
    let sg = p.gamma.sqrt();
    #[rustfmt::skip]
    let injection = Matrix6::new(
        0.0,       -2.0 * s1, 0.0,      2.0 * s2, -sg, 0.0,
        2.0 * s1,  0.0,       2.0 * s2, 0.0,      0.0, -sg,
        -1.0,      0.0,       0.0,      0.0,      0.0, 0.0,
        0.0,       -1.0,      0.0,      0.0,      0.0, 0.0,
        0.0,       0.0,       -1.0,     0.0,      0.0, 0.0,
        0.0,       0.0,       0.0,      -1.0,     0.0, 0.0,
    );
    let thermal = p.n_th + 0.5;
    let noise = Matrix6::from_diagonal(&Vector6::new(0.5, 0.5, 0.5, 0.5, thermal, thermal));
    let diffusion = injection * noise * injection.transpose();
    let diffusion = (diffusion + diffusion.transpose()) * 0.5;
    DriftDiffusion::new(drift, diffusion)
}

fn initial_extended_state(p: &BadCavityParams) -> Matrix6<f64> {
    let mut v0 = Matrix6::zeros();
    v0[(0, 0)] = p.n_th + 0.5;
    v0[(1, 1)] = p.n_th + 0.5;
    v0
}

fn normalized_output(v: &Matrix6<f64>, tau: f64) -> Result<CovarianceMatrix> {
    let block = v.fixed_view::<4, 4>(2, 2) / tau;
    let cov = CovarianceMatrix::symmetrized(DMatrix::from_iterator(4, 4, block.iter().copied()))?;
    cov.ensure_physical(tol::INTEGRATION_PHYSICALITY)?;
    Ok(cov)
}

/// Output-mode covariances at every pulse duration in an ascending grid,
/// computed in a single pass of the extended system.
pub fn output_modes_vs_duration(
    p: &BadCavityParams,
    tau_grid: &[f64],
) -> Result<Vec<OutputModeResult>> {
    if tau_grid.is_empty() {
        return Err(Error::param("tau_grid", "must be nonempty"));
    }
    if !(tau_grid[0] > 0.0) || tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "tau_grid",
            "must be positive and strictly ascending",
        ));
    }
    let dd = build_extended_system(p)?;
    p.check_horizon(*tau_grid.last().unwrap())?;
    let dt = DEFAULT_STEP_FRACTION / dd.max_rate().max(STIFFNESS_FRACTION);
    let stepper = LyapunovStepper::new(&dd);
    let mut state = CompensatedState::new(initial_extended_state(p));
    let guard = DivergenceGuard::new(&state.v);
    let warnings = p.warnings();

    let mut t = 0.0;
    let mut out = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let span = tau - t;
        let n = (span / dt).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            state.step(&stepper, h);
        }
        t = tau;
        guard.check(&state.v, t)?;
        let covariance = normalized_output(&state.v, tau)?;
        let e_n = log_negativity_with(&covariance, tol::INTEGRATION_PHYSICALITY)?.e_n;
        out.push(OutputModeResult {
            tau,
            covariance,
            e_n,
            warnings: warnings.clone(),
        });
    }
    Ok(out)
}

pub fn output_mode_covariance(p: &BadCavityParams, tau: f64) -> Result<OutputModeResult> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::param("tau", format!("must be positive, got {tau}")));
    }
    Ok(output_modes_vs_duration(p, &[tau])?.remove(0))
}

pub fn entanglement_vs_duration(
    p: &BadCavityParams,
    tau_grid: &[f64],
) -> Result<EntanglementSeries> {
    let results = output_modes_vs_duration(p, tau_grid)?;
    EntanglementSeries::new(
        results.iter().map(|r| r.tau).collect(),
        results.iter().map(|r| r.e_n).collect(),
    )
}

/// Output-mode covariance by direct double integration of the output
/// two-time correlations over `[0, τ]²`.
///
/// All inputs are phase-insensitive Gaussian noise and `b(0)` is thermal,
/// so `⟨B_i B_j⟩ = 0` and only the symmetrized moments `⟨B_i B_j†⟩` survive. Writing `c₁ = a_out,1 = k₁b + ε₁`,
/// `c₂ = a_out,2† = k₂b + ε₂` with `k₁ = −2i√G₁`, `k₂ = 2i√G₂`:
///
/// ```text
/// ⟨∫c_j ∫c_l*⟩ = k_j k_l* I_bb + k_j(−i√G_l) K + k_l*(i√G_j) K* + δ_jl τ/2
/// I_bb = ∫∫ ⟨b(t) b*(s)⟩,   ⟨b(t) b*(s)⟩ = e^{−z(t−s)} n_b(s)  (t ≥ s)
/// K    = ∫∫_{t>s} e^{−z(t−s)}
/// n_b(s) = (n_th + ½) e^{−2Γs} + D_b (1 − e^{−2Γs}) / 2Γ
/// ```
///
/// The delta-correlated reflected-input term contributes `τ/2` analytically.
pub fn double_integral_oracle(
    p: &BadCavityParams,
    tau: f64,
    grid_points: usize,
) -> Result<CovarianceMatrix> {
    p.validate()?;
    if grid_points < 500 {
        return Err(Error::param("grid_points", "must be at least 500"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::param("tau", format!("must be positive, got {tau}")));
    }
    let n = grid_points;
    let h = tau / n as f64;
    let weight = |i: usize| if i == 0 || i == n { h / 2.0 } else { h };
    let z = p.z();
    let damping = p.damping();
    let diffusion = p.mechanical_diffusion();
    let occupation = |s: f64| {
        let relax = if damping == 0.0 {
            s
        } else {
            -(-2.0 * damping * s).exp_m1() / (2.0 * damping)
        };
        (p.n_th + 0.5) * (-2.0 * damping * s).exp() + diffusion * relax
    };
    let kernel: Vec<Complex64> = (0..=n).map(|k| (-z * (k as f64 * h)).exp()).collect();
    let occ: Vec<f64> = (0..=n).map(|j| occupation(j as f64 * h)).collect();

    // Both sums split into diagonal (i = j) and strictly lower (i > j)
    // parts; the mechanical kernel is Hermitian, so the upper part is the
    // conjugate of the lower one.
    let mut lower_bb = Complex64::new(0.0, 0.0);
    let mut lower_k = Complex64::new(0.0, 0.0);
    let mut diag_bb = 0.0;
    let mut diag_k = 0.0;
    for i in 0..=n {
        let wi = weight(i);
        diag_bb += wi * wi * occ[i];
        diag_k += wi * wi * 0.5;
        let mut row_bb = Complex64::new(0.0, 0.0);
        let mut row_k = Complex64::new(0.0, 0.0);
        for j in 0..i {
            let term = kernel[i - j] * weight(j);
            row_bb += term * occ[j];
            row_k += term;
        }
        lower_bb += row_bb * wi;
        lower_k += row_k * wi;
    }
    let i_bb = diag_bb + 2.0 * lower_bb.re;
    let k_int = Complex64::new(diag_k, 0.0) + lower_k;

    let i = Complex64::i();
    let roots = [p.eff_g1.sqrt(), p.eff_g2.sqrt()];
    let k = [-2.0 * i * roots[0], 2.0 * i * roots[1]];
    let mut corr = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for l in 0..2 {
            let mut e = k[j] * k[l].conj() * i_bb
                + k[j] * (-i * roots[l]) * k_int
                + k[l].conj() * (i * roots[j]) * k_int.conj();
            if j == l {
                e += tau / 2.0;
            }
            corr[j][l] = e;
        }
    }

    // Z₁ = ∫c₁ = B₁ and Z₂ = ∫c₂ = B₂†; write Z = u + iv. Then
    // (X₁, P₁, X₂, P₂) = √2 (u₁, v₁, u₂, −v₂), and with ⟨ZZ⟩ = 0:
    // ⟨u_j u_l⟩ = ⟨v_j v_l⟩ = ½Re C_jl, ⟨u_j v_l⟩ = −½Im C_jl.
    let sign = [1.0, 1.0, 1.0, -1.0];
    let v = DMatrix::from_fn(4, 4, |a, b| {
        let c = corr[a / 2][b / 2];
        let moment = match (a % 2, b % 2) {
            (0, 0) | (1, 1) => 0.5 * c.re,
            (0, 1) => -0.5 * c.im,
            _ => 0.5 * c.im,
        };
        2.0 * sign[a] * sign[b] * moment / tau
    });
    CovarianceMatrix::symmetrized(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::CovarianceMatrix;
    use std::f64::consts::PI;

    fn fig4(n_th: f64) -> BadCavityParams {
        BadCavityParams {
            eff_g1: 667.0,
            eff_g2: 667.0,
            kappa1: 6e3,
            kappa2: 6e3,
            delta: 1e3,
            gamma: 1.0,
            n_th,
        }
    }

    #[test]
    fn equal_rates_leave_intrinsic_damping() {
        assert_eq!(fig4(10.0).damping(), 0.5);
        let unequal = BadCavityParams {
            eff_g2: 540.0,
            ..fig4(10.0)
        };
        assert!((unequal.damping() - (2.0 * 127.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_output_is_vacuum() {
        let p = BadCavityParams {
            eff_g1: 0.0,
            eff_g2: 0.0,
            ..fig4(100.0)
        };
        for tau in [1e-3, 0.01, 0.5] {
            let r = output_mode_covariance(&p, tau).unwrap();
            assert!(
                (r.covariance.entries() - CovarianceMatrix::vacuum(2).entries()).amax() < 1e-10
            );
            assert_eq!(r.e_n, 0.0);
            let o = double_integral_oracle(&p, tau, 500).unwrap();
            assert!((o.entries() - CovarianceMatrix::vacuum(2).entries()).amax() < 1e-12);
        }
    }

    #[test]
    fn figure_parameters_carry_a_warning() {
        let p = fig4(10.0);
        let (g1, _) = p.couplings();
        assert!((g1 - (667.0f64 * 6e3).sqrt()).abs() < 1e-9);
        assert!((p.coupling_ratio() - g1 / 6e3).abs() < 1e-12);
        assert!(!p.is_deep_bad_cavity());
        assert!(p.validate().is_ok());
        let r = output_mode_covariance(&p, 2.0 * PI / 1e3).unwrap();
        assert_eq!(r.warnings.len(), 1);
        let strong = BadCavityParams { kappa1: 1e3, ..p };
        assert!(strong.validate().is_err());
    }

    #[test]
    fn short_pulse_is_unentangled() {
        let r = output_mode_covariance(&fig4(10.0), 1e-4 / 1e3).unwrap();
        assert!(r.e_n < 1e-3, "{}", r.e_n);
    }

    #[test]
    fn unstable_horizon_is_rejected() {
        let p = BadCavityParams {
            eff_g1: 1.0,
            eff_g2: 3.0,
            kappa1: 100.0,
            kappa2: 100.0,
            delta: 2.0,
            gamma: 1.0,
            n_th: 0.0,
        };
        assert!(p.damping() < 0.0);
        assert!(output_mode_covariance(&p, 0.1).is_ok());
        assert!(matches!(
            output_mode_covariance(&p, 1.0),
            Err(Error::Unstable(_))
        ));
    }

    #[test]
    fn extended_system_matches_oracle_at_small_rates() {
        for (g1, g2, delta, n_th, tau) in [
            (0.3, 0.3, 2.0, 1.0, 2.5),
            (0.5, 0.2, 1.0, 0.0, 4.0),
            (0.1, 0.4, 3.0, 5.0, 1.0),
        ] {
            let p = BadCavityParams {
                eff_g1: g1,
                eff_g2: g2,
                kappa1: 100.0,
                kappa2: 100.0,
                delta,
                gamma: 1.0,
                n_th,
            };
            let a = output_mode_covariance(&p, tau).unwrap().covariance;
            let b = double_integral_oracle(&p, tau, 2000).unwrap();
            let err = (a.entries() - b.entries()).amax();
            assert!(err < 1e-4, "{err}");
        }
    }

    #[test]
    fn stationary_mechanical_variance() {
        let p = BadCavityParams {
            eff_g1: 2.0,
            eff_g2: 2.0,
            kappa1: 1e3,
            kappa2: 1e3,
            delta: 3.0,
            gamma: 1.0,
            n_th: 4.0,
        };
        let expected = (4.0 * 2.0 * 0.5 + 4.0 * 2.0 * 0.5 + 4.5) / (2.0 * 0.5);
        assert!((p.mechanical_stationary_variance().unwrap() - expected).abs() < 1e-12);
        let dd = build_extended_system(&p).unwrap();
        let v0 = CovarianceMatrix::new(DMatrix::from_iterator(
            6,
            6,
            initial_extended_state(&p).iter().copied(),
        ))
        .unwrap();
        // The accumulators are not bosonic modes, so step the raw
        // Lyapunov equation rather than the checked integrator.
        let stepper = LyapunovStepper::new(&dd);
        let mut state = CompensatedState::new(crate::dynamics::to_matrix6(&v0).unwrap());
        let h = 1e-3;
        for _ in 0..40_000 {
            state.step(&stepper, h);
        }
        let v = state.v;
        assert!((v[(0, 0)] - expected).abs() < 1e-6 * expected);
        assert!((v[(1, 1)] - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn grid_validation() {
        let p = fig4(10.0);
        assert!(double_integral_oracle(&p, 0.01, 499).is_err());
        assert!(entanglement_vs_duration(&p, &[]).is_err());
        assert!(entanglement_vs_duration(&p, &[0.0, 0.1]).is_err());
        assert!(entanglement_vs_duration(&p, &[0.2, 0.1]).is_err());
    }
}
