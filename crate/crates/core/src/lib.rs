//! Certification of Gabor frames generated by rational windows
//! `g(t) = Σ aₖ/(t − i wₖ)`.

pub mod cli;
pub mod constructions;
pub mod density;
pub mod error;
pub mod exppoly;
pub mod herglotz;
pub mod linalg;
pub mod multipliers;
pub mod oracle;
pub mod orbit;
pub mod report;
pub mod sis;
pub mod window;
pub mod zak;

pub use error::{Error, Result};
pub use report::{CertificationReport, Method, Verdict};
pub use window::{Lattice, RationalWindow};
pub use num_complex::Complex64 as C64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
