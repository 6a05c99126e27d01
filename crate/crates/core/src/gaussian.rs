//! Zero-mean Gaussian states described by their quadrature covariance matrix.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)` with `x = (a + a†)/√2` and
//! `p = i(a† − a)/√2`, so `[x, p] = i` and the vacuum has variance 1/2 in
//! every quadrature. Physical states satisfy `V + iΩ/2 ≥ 0`, i.e. every
//! symplectic eigenvalue is at least 1/2.

use nalgebra::{DMatrix, Matrix2, Matrix4, Schur};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Maximum `|V_ij − V_ji|` accepted for a covariance matrix.
    pub const SYMMETRY: f64 = 1e-12;
    /// Slack below 1/2 allowed for a symplectic eigenvalue at construction.
    pub const PHYSICALITY: f64 = 1e-8;
    /// Looser slack applied to integrated samples, absorbing accumulated roundoff.
    pub const INTEGRATION_PHYSICALITY: f64 = 1e-6;
    /// Negative values of `Σ² − 4 det V` above `−DISCRIMINANT` are clamped to zero.
    pub const DISCRIMINANT: f64 = 1e-12;
}

/// The standard symplectic form for `n_modes` modes in interleaved ordering.
///
/// Each mode contributes a `[[0, 1], [−1, 0]]` block on the diagonal.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut omega = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a square, even-dimensional, symmetric matrix. Physicality is not
    /// checked here; use [`CovarianceMatrix::physical`] for that.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::param(
                "covariance",
                format!("expected a non-empty 2n×2n matrix, got {rows}×{cols}"),
            ));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalDomain(
                "covariance has non-finite entries".into(),
            ));
        }
        check_symmetric(&entries)?;
        Ok(Self {
            n_modes: rows / 2,
            entries,
        })
    }

    /// Wraps a matrix and additionally requires every symplectic eigenvalue to
    /// be at least `1/2 − tol::PHYSICALITY`.
    pub fn physical(entries: DMatrix<f64>) -> Result<Self> {
        let v = Self::new(entries)?;
        v.ensure_physical(tol::PHYSICALITY)?;
        Ok(v)
    }

    /// Symmetrizes `(M + Mᵀ)/2` before wrapping.
    pub fn symmetrized(entries: DMatrix<f64>) -> Result<Self> {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// The 2×2 block coupling mode `i` (rows) and mode `j` (columns).
    pub fn mode_block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    /// Reduced state of the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if let Some(&bad) = modes.iter().find(|&&m| m >= self.n_modes) {
            return Err(Error::param(
                "modes",
                format!("mode {bad} out of range for a {}-mode state", self.n_modes),
            ));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let entries = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])]);
        Ok(Self {
            n_modes: modes.len(),
            entries,
        })
    }

    pub fn two_mode_blocks(&self) -> Result<TwoModeBlocks> {
        self.require_modes(2)?;
        Ok(TwoModeBlocks {
            a: self.mode_block(0, 0),
            b: self.mode_block(1, 1),
            c: self.mode_block(0, 1),
        })
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        min_symplectic_eigenvalue(self)
    }

    pub fn ensure_physical(&self, tolerance: f64) -> Result<()> {
        let nu = min_symplectic_eigenvalue(self)?;
        if nu < 0.5 - tolerance {
            return Err(Error::NonPhysical {
                eigenvalue: nu,
                tolerance,
            });
        }
        Ok(())
    }

    fn require_modes(&self, n: usize) -> Result<()> {
        if self.n_modes != n {
            return Err(Error::param(
                "covariance",
                format!("expected {n} modes, got {}", self.n_modes),
            ));
        }
        Ok(())
    }
}

/// The mode-1, mode-2 and cross blocks of a two-mode covariance
/// `[[A, C], [Cᵀ, B]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeBlocks {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn assemble(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.c);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.c.transpose());
        m
    }

    /// `Σ = det A + det B − 2 det C`, the seralian of the partial transpose.
    pub fn sigma_partial_transpose(&self) -> f64 {
        self.a.determinant() + self.b.determinant() - 2.0 * self.c.determinant()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityResult {
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub eta_minus: f64,
    /// Logarithmic negativity in bits.
    pub e_n: f64,
}

/// Logarithmic negativity of a physical two-mode state.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<NegativityResult> {
    log_negativity_with(v, tol::PHYSICALITY)
}

/// [`log_negativity`] with an explicit physicality slack.
pub fn log_negativity_with(v: &CovarianceMatrix, physicality_tol: f64) -> Result<NegativityResult> {
    let blocks = v.two_mode_blocks()?;
    v.ensure_physical(physicality_tol)?;

    let sigma = blocks.sigma_partial_transpose();
    let det_v = accurate_det4(&blocks.assemble());
    let mut disc = sigma * sigma - 4.0 * det_v;
    if disc < 0.0 {
        if disc < -tol::DISCRIMINANT {
            return Err(Error::NumericalDomain(format!(
                "Σ² − 4 det V = {disc:e} is negative"
            )));
        }
        disc = 0.0;
    }
    // η⁻² = (Σ − √disc)/2, rewritten to avoid cancellation for strongly
    // squeezed states.
    let denom = sigma + disc.sqrt();
    if denom <= 0.0 || det_v < 0.0 {
        return Err(Error::NumericalDomain(format!(
            "degenerate partial transpose (Σ = {sigma:e}, det V = {det_v:e})"
        )));
    }
    let eta_minus = (2.0 * det_v / denom).sqrt();
    let e_n = (-(2.0 * eta_minus).log2()).max(0.0);
    Ok(NegativityResult { eta_minus, e_n })
}

/// 4×4 determinant by Laplace expansion in double-double arithmetic.
///
/// A strongly squeezed pure state has entries of order r² and determinant
/// 1/16; LU in plain f64 loses about r⁴·ε of it, which at r ≈ 50 already
/// shifts the negativity by a few 1e-9.
fn accurate_det4(m: &Matrix4<f64>) -> f64 {
    let minor = |r1: usize, r2: usize, j: usize, k: usize| {
        TwoFloat::new_mul(m[(r1, j)], m[(r2, k)]) - TwoFloat::new_mul(m[(r1, k)], m[(r2, j)])
    };
    let terms = [
        (0, 1, 2, 3, false),
        (0, 2, 1, 3, true),
        (0, 3, 1, 2, false),
        (1, 2, 0, 3, false),
        (1, 3, 0, 2, true),
        (2, 3, 0, 1, false),
    ];
    let mut det = TwoFloat::from(0.0);
    for (j, k, l, n, negative) in terms {
        let term = minor(0, 1, j, k) * minor(2, 3, l, n);
        det = if negative { det - term } else { det + term };
    }
    f64::from(det)
}

/// Smallest modulus among the eigenvalues of `iΩV`.
pub fn min_symplectic_eigenvalue(v: &CovarianceMatrix) -> Result<f64> {
    let n = v.n_modes();
    let omega = symplectic_form(n);
    // For V = LLᵀ > 0 the symplectic spectrum is the singular spectrum of
    // the antisymmetric matrix LᵀΩL, which is far better conditioned than a
    // general eigensolve of ΩV.
    if let Some(chol) = v.entries().clone().cholesky() {
        let l = chol.l();
        let k = l.transpose() * &omega * &l;
        let sv = k.singular_values();
        return Ok(sv.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let m = &omega * v.entries();
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalDomain("eigensolver did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min))
}

/// Optical vacuum on modes 1 and 2, thermal mechanical mode 3.
pub fn thermal_vacuum_initial(n_th: f64) -> Result<CovarianceMatrix> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::param(
            "n_th",
            format!("must be finite and ≥ 0, got {n_th}"),
        ));
    }
    let mut v = CovarianceMatrix::vacuum(3);
    v.entries[(4, 4)] = n_th + 0.5;
    v.entries[(5, 5)] = n_th + 0.5;
    Ok(v)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    for r in 0..n {
        for c in (r + 1)..n {
            let deviation = (m[(r, c)] - m[(c, r)]).abs();
            if deviation > tol::SYMMETRY {
                return Err(Error::NotSymmetric {
                    row: r,
                    col: c,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn two_mode_squeezed(s: f64) -> CovarianceMatrix {
        let (ch, sh) = ((2.0 * s).cosh() / 2.0, (2.0 * s).sinh() / 2.0);
        let blocks = TwoModeBlocks {
            a: Matrix2::identity() * ch,
            b: Matrix2::identity() * ch,
            c: Matrix2::new(sh, 0.0, 0.0, -sh),
        };
        CovarianceMatrix::physical(DMatrix::from_iterator(
            4,
            4,
            blocks.assemble().iter().copied(),
        ))
        .unwrap()
    }

    fn local(s1: Matrix2<f64>, s2: Matrix2<f64>) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(4, 4);
        s.view_mut((0, 0), (2, 2)).copy_from(&s1);
        s.view_mut((2, 2), (2, 2)).copy_from(&s2);
        s
    }

    fn rotation(th: f64) -> Matrix2<f64> {
        Matrix2::new(th.cos(), th.sin(), -th.sin(), th.cos())
    }

    fn squeezer(r: f64) -> Matrix2<f64> {
        Matrix2::new((-r).exp(), 0.0, 0.0, r.exp())
    }

    #[test]
    fn symplectic_form_cases() {
        let o1 = symplectic_form(1);
        assert_eq!(o1, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let o2 = symplectic_form(2);
        assert_eq!(o2.view((0, 0), (2, 2)), o1);
        assert_eq!(o2.view((2, 2), (2, 2)), o1);
        assert_eq!(o2.view((0, 2), (2, 2)), DMatrix::<f64>::zeros(2, 2));
        let o3 = symplectic_form(3);
        assert_eq!(&o3 * o3.transpose(), DMatrix::identity(6, 6));
        assert_eq!(&o3 * &o3, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(o3.transpose(), -o3);
    }

    #[test]
    fn vacuum_has_zero_negativity() {
        let r = log_negativity(&CovarianceMatrix::vacuum(2)).unwrap();
        assert!((r.eta_minus - 0.5).abs() < 1e-15);
        assert_eq!(r.e_n, 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        let r = log_negativity(&two_mode_squeezed(1.0)).unwrap();
        assert!((r.eta_minus - (-2.0f64).exp() / 2.0).abs() < 1e-14);
        assert!((r.e_n - 2.0 / LN_2).abs() < 1e-12);
        assert!((r.e_n - 2.8854).abs() < 1e-4);
    }

    #[test]
    fn negativity_increases_with_squeezing() {
        let mut prev = -1.0;
        for k in 0..40 {
            let e = log_negativity(&two_mode_squeezed(0.1 * k as f64))
                .unwrap()
                .e_n;
            assert!(e > prev || (k == 0 && e == 0.0));
            prev = e;
        }
    }

    #[test]
    fn invariant_under_local_symplectic_and_swap() {
        let v = two_mode_squeezed(0.7);
        let e0 = log_negativity(&v).unwrap().e_n;
        for (s1, s2) in [
            (rotation(0.3), squeezer(0.4)),
            (squeezer(-1.1), rotation(2.0)),
            (
                rotation(1.0) * squeezer(0.8),
                squeezer(0.2) * rotation(-0.5),
            ),
        ] {
            let s = local(s1, s2);
            let w = CovarianceMatrix::symmetrized(&s * v.entries() * s.transpose()).unwrap();
            assert!((log_negativity(&w).unwrap().e_n - e0).abs() < 1e-10);
        }
        let swapped = v.reduced(&[1, 0]).unwrap();
        assert!((log_negativity(&swapped).unwrap().e_n - e0).abs() < 1e-12);
    }

    #[test]
    fn product_states_are_separable() {
        let v1 = squeezer(0.9) * Matrix2::identity() * 0.5 * squeezer(0.9).transpose();
        let v2 = Matrix2::identity() * 3.5;
        let blocks = TwoModeBlocks {
            a: v1,
            b: v2,
            c: Matrix2::zeros(),
        };
        let v = CovarianceMatrix::new(DMatrix::from_iterator(
            4,
            4,
            blocks.assemble().iter().copied(),
        ))
        .unwrap();
        assert_eq!(log_negativity(&v).unwrap().e_n, 0.0);
    }

    #[test]
    fn blocks_reassemble_exactly() {
        let v = two_mode_squeezed(0.3);
        let m = v.two_mode_blocks().unwrap().assemble();
        assert_eq!(
            DMatrix::from_iterator(4, 4, m.iter().copied()),
            *v.entries()
        );
    }

    #[test]
    fn symplectic_eigenvalues_of_simple_states() {
        for n in 1..4 {
            let nu = min_symplectic_eigenvalue(&CovarianceMatrix::vacuum(n)).unwrap();
            assert!((nu - 0.5).abs() < 1e-14);
        }
        let thermal = CovarianceMatrix::new(DMatrix::identity(2, 2) * 10.5).unwrap();
        assert!((min_symplectic_eigenvalue(&thermal).unwrap() - 10.5).abs() < 1e-12);
    }

    #[test]
    fn non_physical_is_rejected() {
        let v = CovarianceMatrix::new(DMatrix::identity(4, 4) * 0.4).unwrap();
        assert!(matches!(log_negativity(&v), Err(Error::NonPhysical { .. })));
        // Indefinite: handled by the general eigensolver path.
        let mut m = DMatrix::identity(2, 2) * 0.5;
        m[(0, 0)] = -0.1;
        let nu = min_symplectic_eigenvalue(&CovarianceMatrix::new(m).unwrap()).unwrap();
        assert!(nu < 0.5);
    }

    #[test]
    fn asymmetric_is_rejected() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 1e-9;
        assert!(matches!(
            CovarianceMatrix::new(m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn wrong_mode_count_is_rejected() {
        assert!(log_negativity(&CovarianceMatrix::vacuum(3)).is_err());
    }

    #[test]
    fn thermal_initial_states() {
        assert_eq!(
            thermal_vacuum_initial(0.0).unwrap(),
            CovarianceMatrix::vacuum(3)
        );
        let v = thermal_vacuum_initial(10.0).unwrap();
        assert_eq!(v.entries()[(4, 4)], 10.5);
        assert_eq!(v.entries()[(5, 5)], 10.5);
        let v = thermal_vacuum_initial(1e4).unwrap();
        assert_eq!(v.entries()[(4, 4)], 10000.5);
        assert_eq!(v.entries()[(0, 0)], 0.5);
        assert_eq!(v.entries()[(3, 3)], 0.5);
        assert!(thermal_vacuum_initial(-1.0).is_err());
        assert!(thermal_vacuum_initial(f64::NAN).is_err());
    }

    #[test]
    fn accurate_determinant() {
        let m = Matrix4::new(
            4.0, 1.0, -2.0, 0.5, //
            1.0, 3.0, 0.0, 1.0, //
            -2.0, 0.0, 5.0, 2.0, //
            0.5, 1.0, 2.0, 6.0,
        );
        assert!((accurate_det4(&m) - m.determinant()).abs() < 1e-12 * m.determinant().abs());
        // Pure two-mode squeezed state with cosh 2s ≈ 1.1e4: entries of
        // order 5e3, determinant exactly 1/16.
        let (c, sh) = (
            11_175.123_456_789_f64 / 2.0,
            (11_175.123_456_789_f64.powi(2) - 1.0).sqrt() / 2.0,
        );
        let v = Matrix4::new(
            c, 0.0, sh, 0.0, //
            0.0, c, 0.0, -sh, //
            sh, 0.0, c, 0.0, //
            0.0, -sh, 0.0, c,
        );
        assert!(
            (accurate_det4(&v) - 0.0625).abs() < 1e-9,
            "{}",
            accurate_det4(&v)
        );
    }
}
