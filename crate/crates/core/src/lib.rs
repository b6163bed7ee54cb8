//! Spectral envelopes of integer sets at desk scale.
//!
//! The crate is organized around the objects that appear when one studies
//! the closure of `{ |p|^2 : p has frequencies in F, ||p||_2 = 1 }`:
//!
//! * [`sequences`]: frequency sets `F` (arithmetic, Bohr, Thue-Morse) and
//!   their indicator sequences on finite windows.
//! * [`dynamics`]: finite-window diagnostics of the shift orbit of the
//!   indicator (factor complexity, recurrence, empirical word measures).
//! * [`measures`]: trigonometric polynomials, probability measures on the
//!   circle given by Fourier data or atoms, and the map `p -> |p|^2`.
//! * [`kernels`]: generalized Fejer kernels, empirical autocorrelations and
//!   the closed-form Bohr-set limit measure.
//! * [`factorization`]: Fejer-Riesz factorization, enumeration of all
//!   factors, support-constrained phase retrieval and the dimension test.
//! * [`eig`]: smallest eigenvalues of Toeplitz-structured Gram matrices via
//!   FFT matvec and thick-restart Lanczos.
//! * [`io`]: CSV and JSON formats shared with the `senv` command line tool.
//!
//! Numerical code is generic over the scalar type through [`Real`]; the
//! `*64` and `*32` aliases below fix the precision.

pub mod dynamics;
pub mod eig;
pub mod error;
pub mod factorization;
pub mod fft;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod measures;
pub mod scalar;
pub mod sequences;

pub use error::{Error, Result};
pub use scalar::Real;

pub use sequences::{BinarySequence, FrequencySet, Provenance};

pub type TrigPolynomial64 = measures::TrigPolynomial<f64>;
pub type TrigPolynomial32 = measures::TrigPolynomial<f32>;
pub type SpectralMeasure64 = measures::SpectralMeasure<f64>;
pub type SpectralMeasure32 = measures::SpectralMeasure<f32>;
pub type Autocorrelation64 = kernels::Autocorrelation<f64>;
pub type Autocorrelation32 = kernels::Autocorrelation<f32>;
pub type FactorizationResult64 = factorization::FactorizationResult<f64>;
pub type ToeplitzOperator64 = eig::ToeplitzOperator<f64>;
pub type ToeplitzOperator32 = eig::ToeplitzOperator<f32>;
pub type EigResult64 = eig::EigResult<f64>;

pub type Complex64 = num_complex::Complex<f64>;
