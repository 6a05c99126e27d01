//! Fixed-step integration of `V̇ = MV + VMᵀ + D` and the entanglement time
//! series built from it.

use nalgebra::{DMatrix, Matrix6};

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity_with, tol, CovarianceMatrix};
use crate::model::DriftDiffusion;

/// Trace growth factor, relative to the initial trace, treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Largest admissible `dt` is `STIFFNESS_FRACTION / max_rate`.
pub const STIFFNESS_FRACTION: f64 = 0.01;
pub const MAX_STEPS: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationConfig {
    pub t_max: f64,
    pub dt: f64,
    /// Record every k-th step (the final step is always recorded).
    pub sample_stride: usize,
}

impl IntegrationConfig {
    pub fn validate(&self, max_rate: f64) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::param(
                "t_max",
                format!("must be positive, got {}", self.t_max),
            ));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if max_rate > 0.0 && self.dt > STIFFNESS_FRACTION / max_rate * (1.0 + 1e-12) {
            return Err(Error::param(
                "dt",
                format!(
                    "{} exceeds the stiffness bound {:e} for max rate {max_rate}",
                    self.dt,
                    STIFFNESS_FRACTION / max_rate
                ),
            ));
        }
        if self.t_max / self.dt > MAX_STEPS {
            return Err(Error::param("dt", "more than 1e8 steps requested"));
        }
        if self.sample_stride == 0 {
            return Err(Error::param("sample_stride", "must be at least 1"));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        // Absorb representation error when t_max is an exact multiple of dt.
        ((self.t_max / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

/// Classic fourth-order Runge–Kutta on the Lyapunov right-hand side.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LyapunovStepper {
    drift: Matrix6<f64>,
    diffusion: Matrix6<f64>,
}

impl LyapunovStepper {
    pub(crate) fn new(dd: &DriftDiffusion) -> Self {
        Self {
            drift: dd.drift,
            diffusion: dd.diffusion,
        }
    }

    #[inline]
    fn rhs(&self, v: &Matrix6<f64>) -> Matrix6<f64> {
        let mv = self.drift * v;
        mv + mv.transpose() + self.diffusion
    }

    #[inline]
    fn increment(&self, v: &Matrix6<f64>, h: f64) -> Matrix6<f64> {
        let k1 = self.rhs(v);
        let k2 = self.rhs(&(v + k1 * (h / 2.0)));
        let k3 = self.rhs(&(v + k2 * (h / 2.0)));
        let k4 = self.rhs(&(v + k3 * h));
        (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
    }
}

/// RK4 state with Kahan-compensated accumulation. Strongly squeezed states
/// pair entries of order r² with symplectic eigenvalues pinned at ½, so
/// plain accumulation of many small increments erodes physicality.
///
/// The right-hand side is symmetric entry for entry in floating point
/// (`MV + (MV)ᵀ + D`), so no explicit re-symmetrization is needed.
pub(crate) struct CompensatedState {
    pub(crate) v: Matrix6<f64>,
    carry: Matrix6<f64>,
}

impl CompensatedState {
    pub(crate) fn new(v: Matrix6<f64>) -> Self {
        Self {
            v,
            carry: Matrix6::zeros(),
        }
    }

    #[inline]
    pub(crate) fn step(&mut self, stepper: &LyapunovStepper, h: f64) {
        let y = stepper.increment(&self.v, h) - self.carry;
        let t = self.v + y;
        self.carry = (t - self.v) - y;
        self.v = t;
    }
}

/// Divergence guard shared by every integration loop.
pub(crate) struct DivergenceGuard {
    limit: f64,
}

impl DivergenceGuard {
    pub(crate) fn new(v0: &Matrix6<f64>) -> Self {
        Self {
            limit: DIVERGENCE_FACTOR * v0.trace().abs().max(1.0),
        }
    }

    pub(crate) fn check(&self, v: &Matrix6<f64>, time: f64) -> Result<()> {
        let tr = v.trace();
        if !tr.is_finite() || tr > self.limit {
            return Err(Error::Unstable(format!(
                "covariance trace {tr:e} exceeded {:e} at t = {time:e}",
                self.limit
            )));
        }
        Ok(())
    }
}

pub(crate) fn to_matrix6(v: &CovarianceMatrix) -> Result<Matrix6<f64>> {
    if v.n_modes() != 3 {
        return Err(Error::param("v0", "expected a three-mode covariance"));
    }
    Ok(Matrix6::from_iterator(v.entries().iter().copied()))
}

pub(crate) fn from_matrix6(m: &Matrix6<f64>) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(DMatrix::from_iterator(6, 6, m.iter().copied()))
}

/// Integrates from `v0` over `[0, cfg.t_max]`, returning the recorded
/// samples. The step is shortened so that `t_max` is hit exactly.
pub fn integrate_covariance(
    dd: &DriftDiffusion,
    v0: &CovarianceMatrix,
    cfg: &IntegrationConfig,
) -> Result<Vec<(f64, CovarianceMatrix)>> {
    cfg.validate(dd.max_rate())?;
    v0.ensure_physical(tol::PHYSICALITY)?;
    let stepper = LyapunovStepper::new(dd);
    let mut state = CompensatedState::new(to_matrix6(v0)?);
    let guard = DivergenceGuard::new(&state.v);

    let n = cfg.n_steps();
    let h = cfg.t_max / n as f64;
    let mut out = Vec::with_capacity(n / cfg.sample_stride + 2);
    out.push((0.0, v0.clone()));
    for k in 1..=n {
        state.step(&stepper, h);
        let time = cfg.t_max * (k as f64 / n as f64);
        guard.check(&state.v, time)?;
        if k % cfg.sample_stride == 0 || k == n {
            let cov = from_matrix6(&state.v)?;
            let nu = cov.min_symplectic_eigenvalue()?;
            if nu < 0.5 - tol::INTEGRATION_PHYSICALITY {
                return Err(Error::PhysicalityLost {
                    step: k,
                    time,
                    eigenvalue: nu,
                });
            }
            out.push((time, cov));
        }
    }
    Ok(out)
}

/// Sampled logarithmic negativity with its local maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    peaks: Vec<(f64, f64)>,
}

impl EntanglementSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::param(
                "series",
                "times and values must be nonempty and of equal length",
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("series", "times must be strictly ascending"));
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::param("series", "negativity values must be ≥ 0"));
        }
        let peaks = find_peaks(&times, &values);
        Ok(Self {
            times,
            values,
            peaks,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn peaks(&self) -> &[(f64, f64)] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Global maximum, earliest time on ties.
    pub fn max(&self) -> (f64, f64) {
        let mut best = (self.times[0], self.values[0]);
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }
}

/// Three-point local maxima: strictly above the left neighbour and at least
/// the right one, so a flat top yields a single peak. Zero values never
/// count as peaks.
fn find_peaks(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > 0.0)
        .map(|i| (times[i], values[i]))
        .collect()
}

/// Negativity of the optical pair (modes 0 and 1) at every sample.
pub fn entanglement_series(vs: &[(f64, CovarianceMatrix)]) -> Result<EntanglementSeries> {
    let mut times = Vec::with_capacity(vs.len());
    let mut values = Vec::with_capacity(vs.len());
    for (t, v) in vs {
        let optical = v.reduced(&[0, 1])?;
        let neg = log_negativity_with(&optical, tol::INTEGRATION_PHYSICALITY)?;
        times.push(*t);
        values.push(neg.e_n);
    }
    EntanglementSeries::new(times, values)
}

pub fn max_negativity(series: &EntanglementSeries) -> (f64, f64) {
    series.max()
}

/// How far the mechanical mode is from having returned to its initial
/// state: the Frobenius distance between mechanical blocks plus the norm of
/// the optical–mechanical correlations at time t.
pub fn mechanical_return_residual(v_t: &CovarianceMatrix, v0: &CovarianceMatrix) -> Result<f64> {
    if v_t.n_modes() != 3 || v0.n_modes() != 3 {
        return Err(Error::param(
            "covariance",
            "expected three-mode covariances",
        ));
    }
    let mech = (v_t.mode_block(2, 2) - v0.mode_block(2, 2)).norm();
    let cross = v_t.entries().view((0, 4), (4, 2)).norm();
    Ok(mech + cross)
}
