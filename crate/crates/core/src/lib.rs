//! Covariance-matrix simulation of optical entanglement generated through a
//! shared mechanical oscillator.
//!
//! Two optical modes couple to one mechanical mode, one driven near the red
//! sideband (beam splitter) and one near the blue sideband (two-mode
//! squeezing). All states are zero-mean Gaussian, so the dynamics reduce to
//! a Lyapunov equation for the 6×6 quadrature covariance.
//!
//! * [`gaussian`]: covariance matrices, symplectic spectra, logarithmic negativity.
//! * [`model`]: drift/diffusion of the rotating-frame Langevin equations.
//! * [`propagator`]: the exact lossless solution and its closed-form negativity.
//! * [`dynamics`]: RK4 covariance integration and entanglement time series.
//! * [`output`]: bad-cavity filtered output modes, with an independent oracle.
//! * [`experiment`]: run configuration, figure presets and CSV emission.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod model;
pub mod output;
pub mod propagator;

pub use error::{Error, Result};
