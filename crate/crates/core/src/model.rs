//! Drift and diffusion matrices of the rotating-frame Langevin equations.
//!
//! In the frame co-rotating at `ω_m + Δ` (red drive on mode 1, blue drive on
//! mode 2) and after dropping counter-rotating terms,
//!
//! ```text
//! ȧ₁  = −(κ₁/2) a₁  − i g₁ b                 − √κ₁ a_in,1
//! ȧ₂† = −(κ₂/2) a₂† + i g₂ b                 − √κ₂ a_in,2†
//! ḃ   = −(iΔ + γ/2) b − i g₁ a₁ − i g₂ a₂†   − √γ b_in
//! ```
//!
//! Expanding in quadratures gives a linear system `ξ̇ = Mξ + noise` whose
//! covariance obeys `V̇ = MV + VMᵀ + D`. All rates are in units of the
//! mechanical linewidth.

use nalgebra::{Matrix6, Schur};

use crate::error::{Error, Result};

/// Parameters of the three-mode model, in units of γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub g1: f64,
    pub g2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n_th: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g1: 0.0,
            g2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            delta: 0.0,
            gamma: 1.0,
            n_th: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g1", self.g1),
            ("g2", self.g2),
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
        Ok(())
    }

    /// Largest rate in the model; sets the integration step bound.
    pub fn max_rate(&self) -> f64 {
        [
            self.g1,
            self.g2,
            self.kappa1,
            self.kappa2,
            self.delta,
            self.gamma,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Drives detuned by Δ > 0 from the sidebands.
    SorensenMolmer,
    /// Drives on the sidebands (Δ = 0) with unequal couplings.
    Bogoliubov,
}

impl Scheme {
    pub fn check(&self, params: &SystemParams) -> Result<()> {
        match self {
            Scheme::SorensenMolmer if params.delta <= 0.0 => Err(Error::param(
                "delta",
                "the Sørensen–Mølmer scheme needs a positive detuning",
            )),
            Scheme::Bogoliubov if params.delta != 0.0 => Err(Error::param(
                "delta",
                "the Bogoliubov scheme is driven on resonance (delta = 0)",
            )),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::SorensenMolmer => "sm",
            Scheme::Bogoliubov => "bogoliubov",
        }
    }
}

/// `V̇ = M·V + V·Mᵀ + D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftDiffusion {
    pub drift: Matrix6<f64>,
    pub diffusion: Matrix6<f64>,
}

impl DriftDiffusion {
    pub fn new(drift: Matrix6<f64>, diffusion: Matrix6<f64>) -> Result<Self> {
        if drift.iter().chain(diffusion.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NumericalDomain(
                "drift or diffusion not finite".into(),
            ));
        }
        if (diffusion - diffusion.transpose()).amax() > crate::gaussian::tol::SYMMETRY {
            return Err(Error::param("diffusion", "must be symmetric"));
        }
        let min_eig = diffusion.symmetric_eigenvalues().min();
        if min_eig < -1e-12 {
            return Err(Error::param(
                "diffusion",
                format!("must be positive semidefinite, smallest eigenvalue {min_eig:e}"),
            ));
        }
        Ok(Self { drift, diffusion })
    }

    /// Largest absolute drift entry.
    pub fn max_rate(&self) -> f64 {
        self.drift.amax()
    }
}

/// Quadrature ordering `(x₁, p₁, x₂, p₂, x_b, p_b)`.
pub fn build_drift_diffusion(params: &SystemParams, scheme: Scheme) -> Result<DriftDiffusion> {
    params.validate()?;
    scheme.check(params)?;
    let SystemParams {
        g1,
        g2,
        kappa1: k1,
        kappa2: k2,
        delta,
        gamma,
        n_th,
    } = *params;

    #[rustfmt::skip]
    let drift = Matrix6::new(
        -k1 / 2.0, 0.0,       0.0,       0.0,       0.0,         g1,
        0.0,       -k1 / 2.0, 0.0,       0.0,       -g1,         0.0,
        0.0,       0.0,       -k2 / 2.0, 0.0,       0.0,         -g2,
        0.0,       0.0,       0.0,       -k2 / 2.0, -g2,         0.0,
        0.0,       g1,        0.0,       -g2,       -gamma / 2.0, delta,
        -g1,       0.0,       -g2,       0.0,       -delta,      -gamma / 2.0,
    );
    let thermal = gamma * (n_th + 0.5);
    let diffusion = Matrix6::from_diagonal(&nalgebra::Vector6::new(
        k1 / 2.0,
        k1 / 2.0,
        k2 / 2.0,
        k2 / 2.0,
        thermal,
        thermal,
    ));
    DriftDiffusion::new(drift, diffusion)
}

/// Largest real part over the drift spectrum. Positive means the
/// covariance grows without bound.
pub fn stability_margin(dd: &DriftDiffusion) -> Result<f64> {
    let schur = Schur::try_new(dd.drift, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalDomain("drift eigensolver did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}
