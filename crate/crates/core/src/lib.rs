//! Thermodynamic formalism for product-type potentials `g(x) = g₀ ∏ gₙ(xₙ)` on full shifts.
//!
//! Everything is computed in the log domain from per-coordinate factor tables or closed forms:
//! the leading eigenvalue, conformal and eigen measures, the eigenfunction `h = ∏ h_i(x_i)`,
//! regularity classification, and Monte Carlo probes of almost-sure behaviour.
//!
//! ```
//! use ruelle_core::{dyson, spectral};
//!
//! let (d, p) = dyson::build(2.0).unwrap();
//! let ev = spectral::leading_eigenvalue(&p).unwrap();
//! assert!((ev.log_lambda - d.closed_forms().log_lambda()).abs() < 1e-12);
//! ```

pub mod dyson;
pub mod eigenfunction;
pub mod error;
pub mod montecarlo;
pub mod numeric;
pub mod operator;
pub mod potential;
pub mod schema;
pub mod spectral;
pub mod zeta;

pub use dyson::{DysonPotential, Regime};
pub use eigenfunction::{EigenfunctionEval, HCoefficients, Target, ThreeSeriesReport};
pub use error::{Error, Result};
pub use montecarlo::SampleBatch;
pub use operator::CylinderFunction;
pub use potential::{Alphabet, PotentialKind, ProductPotential, RegularityReport, Verdict};
pub use schema::{parse_potential, PotentialSpec};
pub use spectral::{Eigenvalue, MeasureKind, ProductMeasure};
