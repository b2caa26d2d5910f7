use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::mesh::{Mesh, Point};

pub type RealFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Point) -> C64 + Send + Sync>;
/// Boundary datum evaluated at a point with the outward unit normal of the edge.
pub type EdgeFn = Arc<dyn Fn(Point, [f64; 2]) -> C64 + Send + Sync>;

/// Material data of `-div(μ∇u) - κ²u = f`, one smooth field per subdomain,
/// plus the background wavenumber driving the absorbing closure and optional
/// inhomogeneous Robin data `g = μ∂ₙu - iκ₀μu` on the truncation boundary.
#[derive(Clone)]
pub struct CoefficientField {
    mu: Vec<RealFn>,
    kappa_sq: Vec<ComplexFn>,
    kappa0: f64,
    source: Option<ComplexFn>,
    outer_data: Option<EdgeFn>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("subdomains", &self.mu.len())
            .field("kappa0", &self.kappa0)
            .field("source", &self.source.is_some())
            .field("outer_data", &self.outer_data.is_some())
            .finish()
    }
}

impl CoefficientField {
    pub fn new(mu: Vec<RealFn>, kappa_sq: Vec<ComplexFn>, kappa0: f64) -> Result<Self> {
        if mu.len() != kappa_sq.len() {
            return Err(Error::ShapeMismatch {
                expected: mu.len(),
                found: kappa_sq.len(),
            });
        }
        if !(kappa0 > 0.0) || !kappa0.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa0 must be positive, got {kappa0}")));
        }
        Ok(Self {
            mu,
            kappa_sq,
            kappa0,
            source: None,
            outer_data: None,
        })
    }

    pub fn piecewise_constant(mu: &[f64], kappa_sq: &[C64], kappa0: f64) -> Result<Self> {
        let mu_fns = mu.iter().map(|&m| Arc::new(move |_: Point| m) as RealFn).collect();
        let k_fns = kappa_sq.iter().map(|&k| Arc::new(move |_: Point| k) as ComplexFn).collect();
        Self::new(mu_fns, k_fns, kappa0)
    }

    pub fn with_source(mut self, f: impl Fn(Point) -> C64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    pub fn with_outer_data(mut self, g: impl Fn(Point, [f64; 2]) -> C64 + Send + Sync + 'static) -> Self {
        self.outer_data = Some(Arc::new(g));
        self
    }

    /// Same media, zero volume source and zero boundary data.
    pub fn homogeneous_data(&self) -> Self {
        Self {
            source: None,
            outer_data: None,
            ..self.clone()
        }
    }

    pub fn n_subdomains(&self) -> usize {
        self.mu.len()
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn mu(&self, j: usize, x: Point) -> f64 {
        (self.mu[j])(x)
    }

    pub fn kappa_sq(&self, j: usize, x: Point) -> C64 {
        (self.kappa_sq[j])(x)
    }

    pub fn source(&self) -> Option<&ComplexFn> {
        self.source.as_ref()
    }

    pub fn outer_data(&self) -> Option<&EdgeFn> {
        self.outer_data.as_ref()
    }

    /// Check `μ > 0` and `Im κ² >= 0` at every triangle barycenter.
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        if self.mu.len() != mesh.n_subdomains() {
            return Err(Error::ShapeMismatch {
                expected: mesh.n_subdomains(),
                found: self.mu.len(),
            });
        }
        for t in 0..mesh.n_triangles() {
            let j = mesh.tags()[t];
            let x = mesh.barycenter(t);
            let mu = self.mu(j, x);
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::InvalidParameter(format!("mu = {mu} in triangle {t}")));
            }
            let k2 = self.kappa_sq(j, x);
            if !(k2.im >= 0.0) || !k2.re.is_finite() {
                return Err(Error::InvalidParameter(format!("kappa^2 = {k2} in triangle {t}")));
            }
        }
        Ok(())
    }
}
