//! Sparse and dense linear algebra used by the assembly and trace layers.

mod dense;
mod profile;
mod rcm;
mod sparse;

pub use dense::{real_times_complex, to_complex, ComplexLu, SpdFactor};
pub use profile::SkylineLdlt;
pub use rcm::reverse_cuthill_mckee;
pub use sparse::{CsrMatrix, TripletBuilder};

pub type C64 = num_complex::Complex64;

/// Scalar field of the assembled systems: `f64` (Yukawa) or `C64` (Helmholtz).
pub trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy + Send + Sync {}

impl Scalar for f64 {}
impl Scalar for C64 {}

/// Unconjugated dot product `aᵀb`.
pub fn dot_t(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
