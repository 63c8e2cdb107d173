//! Low-complexity approximations of the Karhunen-Loève transform (KLT) for
//! first-order Markov (AR(1)) signals.
//!
//! The crate is organised along the life cycle of an approximation:
//!
//! - [`markov_klt`]: autocorrelation matrix, eigenfrequencies and the exact KLT
//!   for a given blocklength and correlation coefficient, plus the DCT-II.
//! - [`approximations`]: rounding `alpha * K` into `{-1, 0, 1}` matrices,
//!   the diagonal scaling that makes them (row-)orthonormal, the ρ sweep that
//!   discovers distinct matrices and the shipped 8-point catalog `T1..T4`.
//! - [`fast_algorithms`]: sparse butterfly factorizations of the catalog and
//!   their addition counts.
//! - [`coding_metrics`]: coding gain, transform efficiency, MSE and total
//!   error energy against the exact KLT.
//! - [`codec`]: an 8×8 block image compression pipeline with zig-zag
//!   coefficient retention and MSE/PSNR/MSSIM quality measures.

pub mod approximations;
pub mod codec;
pub mod coding_metrics;
mod error;
pub mod fast_algorithms;
pub mod markov_klt;
pub mod matrix;
pub mod transform;

pub use error::{Result, RkltError};
pub use matrix::RealMatrix;
