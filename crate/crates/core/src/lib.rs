//! Stability analysis of explicit Runge–Kutta time stepping combined with
//! high-order finite-difference operators on periodic grids.
//!
//! Modules, bottom-up:
//!
//! - [`stencil`]: exact-rational finite-difference weights.
//! - [`spectrum`]: Fourier symbols and trajectory bounds.
//! - [`timeint`]: Butcher tableaux and stability polynomials.
//! - [`fulldisc`]: fully discrete spectra, instability index, thresholds.
//! - [`wavesys`]: the partially dissipative wave system.
//! - [`molsim`]: method-of-lines time stepping.
//! - [`cli`]: the `fdmlab` command-line front end.

pub mod cli;
pub mod error;
pub mod fulldisc;
pub mod molsim;
pub mod spectrum;
pub mod stencil;
pub mod timeint;
pub mod wavesys;

pub use error::{Error, Result};
pub use fulldisc::{AdeOperators, GridConfig, SpectrumReport, SweepMode};
pub use stencil::{build_dx, build_dxx, mirror, FdOperator, StabilityClass, StencilKind, StencilSpec};
pub use timeint::{ButcherTableau, StabilityPolynomial};
pub use wavesys::WaveDiscretization;
