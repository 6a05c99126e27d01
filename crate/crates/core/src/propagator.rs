//! Exact lossless solution for equal couplings `g₁ = g₂ = g`.
//!
//! Without damping the interaction-picture Hamiltonian is
//! `H_I = f(t) x_b + g(t) p_b` with
//! `f(t) = g[x cos Δt + p sin Δt]`, `g(t) = g[x sin Δt − p cos Δt]`, where
//! `x = x₁ + x₂` and `p = p₂ − p₁` commute. The propagator factors as
//! `U = e^{−iA} e^{−iF x_b} e^{−iG p_b}` with `F = ∫f`, `G = ∫g`,
//! `A = −∫F g`. `F` and `G` vanish at `t_n = 2πn/Δ`, leaving the optical
//! modes acted on by `e^{−iA(t_n)}` alone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_form, CovarianceMatrix};

/// Coefficients of `x` and `p` in `F(t)` and `G(t)`, and of `x²`, `p²`, `px`
/// in `A(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorCoefficients {
    pub f_x: f64,
    pub f_p: f64,
    pub g_x: f64,
    pub g_p: f64,
    pub a_xx: f64,
    pub a_pp: f64,
    pub a_xp: f64,
}

pub fn coefficient_functions(g: f64, delta: f64, t: f64) -> Result<PropagatorCoefficients> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::param("delta", "must be nonzero and finite"));
    }
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be ≥ 0, got {t}")));
    }
    let ratio = g / delta;
    let u = delta * t;
    let (s, c) = u.sin_cos();
    let (s2, c2) = (2.0 * u).sin_cos();
    let pref = -ratio * ratio;
    Ok(PropagatorCoefficients {
        f_x: ratio * s,
        f_p: ratio * (1.0 - c),
        g_x: ratio * (1.0 - c),
        g_p: -ratio * s,
        a_xx: pref * (u / 2.0 - s2 / 4.0),
        a_pp: pref * (u / 2.0 + s2 / 4.0 - s),
        a_xp: pref * ((c2 - 1.0) / 2.0 - (c - 1.0)),
    })
}

/// Mode map `a₁ → μa₁ + νa₂†`, `a₂ → μa₂ + νa₁†` with `μ = 1 + ir`, `ν = ir`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BogoliubovMap {
    pub mu: Complex64,
    pub nu: Complex64,
    pub r: f64,
}

impl BogoliubovMap {
    pub fn from_squeezing(r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param(
                "r",
                format!("must be finite and ≥ 0, got {r}"),
            ));
        }
        Ok(Self {
            mu: Complex64::new(1.0, r),
            nu: Complex64::new(0.0, r),
            r,
        })
    }

    /// Real 4×4 matrix acting on `(x₁, p₁, x₂, p₂)`.
    pub fn symplectic_matrix(&self) -> Matrix4<f64> {
        // Multiplication by μ acts on (x, p) as a complex number would;
        // ν·a† conjugates first.
        let mul = Matrix2::new(self.mu.re, -self.mu.im, self.mu.im, self.mu.re);
        let mul_conj = Matrix2::new(self.nu.re, self.nu.im, self.nu.im, -self.nu.re);
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&mul);
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(&mul);
        s.fixed_view_mut::<2, 2>(0, 2).copy_from(&mul_conj);
        s.fixed_view_mut::<2, 2>(2, 0).copy_from(&mul_conj);
        s
    }
}

/// Optical map produced at `t_n = 2πn/Δ`.
///
/// `e^{−iA(t_n)}` with `A(t_n) = −θ(x² + p²)`, `θ = πn g²/Δ²`, sends
/// `x₁ → x₁ + 2θp` and `p₁ → p₁ + 2θx`, so `r = 2θ = 2πn g²/Δ² = g²t_n/Δ`.
pub fn bogoliubov_map(g: f64, delta: f64, n: u32) -> Result<BogoliubovMap> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param(
            "delta",
            format!("must be positive, got {delta}"),
        ));
    }
    if n == 0 {
        return Err(Error::param("n", "must be a positive integer"));
    }
    BogoliubovMap::from_squeezing(2.0 * PI * f64::from(n) * g * g / (delta * delta))
}

/// `V_out = S·V_in·Sᵀ` for the map's symplectic matrix `S`.
pub fn apply_two_mode_map(
    map: &BogoliubovMap,
    v_in: &CovarianceMatrix,
) -> Result<CovarianceMatrix> {
    if v_in.n_modes() != 2 {
        return Err(Error::param("v_in", "expected a two-mode covariance"));
    }
    v_in.ensure_physical(crate::gaussian::tol::PHYSICALITY)?;
    let s = map.symplectic_matrix();
    let s = DMatrix::from_iterator(4, 4, s.iter().copied());
    let omega = symplectic_form(2);
    let defect = (s.transpose() * &omega * &s - &omega).amax();
    let scale = s.amax().powi(2).max(1.0);
    if defect > 1e-12 * scale {
        return Err(Error::NumericalDomain(format!(
            "mode map is not symplectic (defect {defect:e})"
        )));
    }
    CovarianceMatrix::symmetrized(&s * v_in.entries() * s.transpose())
}

/// Logarithmic negativity of vacuum sent through the map with squeezing `r`.
///
/// Evaluates `−½ log₂(2r² + 2r⁴ + ¼ − √(4r⁸ + 8r⁶ + 5r⁴ + r²)) − 1`. Since
/// `(2r⁴ + 2r² + ¼)² − (4r⁸ + 8r⁶ + 5r⁴ + r²) = 1/16`, the bracket equals
/// `1/(16(a + √b))`, which is how it is computed here: the difference form
/// loses every significant digit once r exceeds about 10.
pub fn closed_form_logneg(r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::param(
            "r",
            format!("must be finite and ≥ 0, got {r}"),
        ));
    }
    let r2 = r * r;
    let a = 2.0 * r2 * r2 + 2.0 * r2 + 0.25;
    let b = r2 * (4.0 * r2 * r2 * r2 + 8.0 * r2 * r2 + 5.0 * r2 + 1.0);
    let sum = a + b.sqrt();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::NumericalDomain(format!(
            "closed-form negativity undefined at r = {r}"
        )));
    }
    Ok((0.5 * sum.log2() + 1.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::log_negativity;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn coefficients_vanish_at_start() {
        let c = coefficient_functions(2.0, 3.0, 0.0).unwrap();
        for v in [c.f_x, c.f_p, c.g_x, c.g_p, c.a_xx, c.a_pp, c.a_xp] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn timing_condition() {
        for (g, delta) in [(4e3, 1e3), (1.0, 1.0), (0.5, 2.0)] {
            for n in 1..=6 {
                let t = 2.0 * PI * n as f64 / delta;
                let c = coefficient_functions(g, delta, t).unwrap();
                let scale = (g / delta).max(1.0).powi(2);
                for v in [c.f_x, c.f_p, c.g_x, c.g_p, c.a_xp] {
                    assert!(v.abs() < 1e-12 * scale * n as f64, "{v}");
                }
                let expected = -(g * g) / (delta * delta) * PI * n as f64;
                assert_close(c.a_xx, expected, 1e-12 * expected.abs());
                assert_close(c.a_pp, expected, 1e-12 * expected.abs());
            }
        }
    }

    #[test]
    fn quarter_period_values() {
        let c = coefficient_functions(1.0, 1.0, PI / 2.0).unwrap();
        assert_close(c.f_x, 1.0, 1e-15);
        assert_close(c.f_p, 1.0, 1e-15);
        assert_close(c.g_x, 1.0, 1e-15);
        assert_close(c.g_p, -1.0, 1e-15);
    }

    /// Integrates `F = ∫f`, `G = ∫g`, `A = −∫F g` with composite Simpson
    /// quadrature, treating `x` and `p` as independent symbols.
    #[test]
    fn coefficients_match_quadrature_of_defining_integrals() {
        let (g, delta) = (1.7, 2.3);
        let f_t = |s: f64| (g * (delta * s).cos(), g * (delta * s).sin()); // (x, p) coefficients
        let g_t = |s: f64| (g * (delta * s).sin(), -g * (delta * s).cos());
        let simpson = |h: &dyn Fn(f64) -> f64, t: f64| {
            let n = 2000;
            let dx = t / n as f64;
            (0..=n)
                .map(|k| {
                    let w = if k == 0 || k == n {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * h(k as f64 * dx)
                })
                .sum::<f64>()
                * dx
                / 3.0
        };
        for &t in &[0.37, 1.1, 2.9] {
            let c = coefficient_functions(g, delta, t).unwrap();
            assert_close(simpson(&|s| f_t(s).0, t), c.f_x, 1e-10);
            assert_close(simpson(&|s| f_t(s).1, t), c.f_p, 1e-10);
            assert_close(simpson(&|s| g_t(s).0, t), c.g_x, 1e-10);
            assert_close(simpson(&|s| g_t(s).1, t), c.g_p, 1e-10);
            // F(s)·g(s) as a quadratic form in (x, p).
            let fg = |s: f64| {
                let k = coefficient_functions(g, delta, s).unwrap();
                let (gx, gp) = g_t(s);
                (k.f_x * gx, k.f_p * gp, k.f_x * gp + k.f_p * gx)
            };
            assert_close(-simpson(&|s| fg(s).0, t), c.a_xx, 1e-9);
            assert_close(-simpson(&|s| fg(s).1, t), c.a_pp, 1e-9);
            assert_close(-simpson(&|s| fg(s).2, t), c.a_xp, 1e-9);
        }
    }

    #[test]
    fn oscillatory_parts_are_periodic() {
        let (g, delta) = (3.0, 1.5);
        let period = 2.0 * PI / delta;
        let secular = -(g / delta).powi(2) * PI;
        for &t in &[0.1, 0.8, 3.3] {
            let a = coefficient_functions(g, delta, t).unwrap();
            let b = coefficient_functions(g, delta, t + period).unwrap();
            for (x, y) in [
                (a.f_x, b.f_x),
                (a.f_p, b.f_p),
                (a.g_x, b.g_x),
                (a.g_p, b.g_p),
                (a.a_xp, b.a_xp),
            ] {
                assert_close(x, y, 1e-12);
            }
            assert_close(b.a_xx - a.a_xx, secular, 1e-11);
            assert_close(b.a_pp - a.a_pp, secular, 1e-11);
        }
    }

    #[test]
    fn zero_detuning_rejected() {
        assert!(coefficient_functions(1.0, 0.0, 1.0).is_err());
        assert!(bogoliubov_map(1.0, 0.0, 1).is_err());
        assert!(bogoliubov_map(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn map_values() {
        let id = bogoliubov_map(0.0, 1.0, 3).unwrap();
        assert_eq!(id.mu, Complex64::new(1.0, 0.0));
        assert_eq!(id.nu, Complex64::new(0.0, 0.0));
        let m = bogoliubov_map(4.0, 1.0, 1).unwrap();
        assert_close(m.r, 32.0 * PI, 1e-12);
        for (g, d, n) in [(0.3, 1.0, 1), (4e3, 1e3, 2), (7.0, 0.1, 5)] {
            let m = bogoliubov_map(g, d, n).unwrap();
            let norm = m.mu.norm_sqr() - m.nu.norm_sqr();
            assert_close(norm, 1.0, 1e-12 * m.mu.norm_sqr().max(1.0));
        }
    }

    #[test]
    fn map_is_symplectic_and_preserves_determinant() {
        for r in [0.0, 0.4, 3.0, 50.0] {
            let map = BogoliubovMap::from_squeezing(r).unwrap();
            let out = apply_two_mode_map(&map, &CovarianceMatrix::vacuum(2)).unwrap();
            let det = out.entries().determinant();
            assert_close(det, 1.0 / 16.0, 1e-6);
            if r == 0.0 {
                assert_eq!(out, CovarianceMatrix::vacuum(2));
            }
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_logneg(0.0).unwrap(), 0.0);
        assert_close(closed_form_logneg(1.0).unwrap(), 2.543_106_606_327, 1e-11);
        assert!(closed_form_logneg(-1.0).is_err());
    }

    #[test]
    fn closed_form_agrees_with_literal_formula_at_small_r() {
        // The printed difference form is well conditioned for small r.
        for k in 0..=100 {
            let r = 0.1 * k as f64;
            let literal = -0.5
                * (2.0 * r * r
                    - (4.0 * r.powi(8) + 8.0 * r.powi(6) + 5.0 * r.powi(4) + r * r).sqrt()
                    + 2.0 * r.powi(4)
                    + 0.25)
                    .log2()
                - 1.0;
            let tol = if r <= 3.0 { 1e-9 } else { 1e-5 };
            assert_close(closed_form_logneg(r).unwrap(), literal.max(0.0), tol);
        }
    }

    #[test]
    fn closed_form_matches_covariance_route() {
        for k in 0..=200 {
            let r = 0.05 * k as f64;
            let map = BogoliubovMap::from_squeezing(r).unwrap();
            let v = apply_two_mode_map(&map, &CovarianceMatrix::vacuum(2)).unwrap();
            let e = log_negativity(&v).unwrap().e_n;
            assert_close(e, closed_form_logneg(r).unwrap(), 1e-12 * (1.0 + e));
        }
    }

    #[test]
    fn closed_form_is_monotone() {
        let mut prev = 0.0;
        for k in 0..=10_000 {
            let e = closed_form_logneg(0.01 * k as f64).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }
}
