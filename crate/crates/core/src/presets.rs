//! Reference problems shared by the tests, the benches and the CLI.

use crate::error::Result;
use crate::fem::CoefficientField;
use crate::linalg::C64;
use crate::mesh::Point;

/// Background wavenumber of the reference problems.
pub const KAPPA0: f64 = 3.0;

fn gaussian(center: Point, width: f64) -> impl Fn(Point) -> C64 + Send + Sync + 'static {
    move |x| {
        let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
        C64::new((-r2 / (width * width)).exp(), 0.0)
    }
}

/// Media for the partitioned disk with three sectors: `μ` alternates between
/// 1 and 2, `κ²` jumps across every interface and `loss` is added to `Im κ²`
/// in sectors 1 and 3. Subdomain 0 (the exterior annulus) is the background
/// medium. Driven by a Gaussian source off the center.
pub fn disk_media(loss: f64) -> Result<CoefficientField> {
    let k2 = KAPPA0 * KAPPA0;
    Ok(CoefficientField::piecewise_constant(
        &[1.0, 2.0, 1.0, 2.0],
        &[
            C64::new(k2, 0.0),
            C64::new(12.0, loss),
            C64::new(13.5, 0.0),
            C64::new(16.0, loss),
        ],
        KAPPA0,
    )?
    .with_source(gaussian([0.3, 0.1], 0.35)))
}

/// Media for the square split into two halves (`μ = 1 | 2`, `κ² = 9 | 16`).
pub fn square_media() -> Result<CoefficientField> {
    Ok(
        CoefficientField::piecewise_constant(&[1.0, 2.0], &[C64::new(9.0, 0.0), C64::new(16.0, 0.0)], KAPPA0)?
            .with_source(gaussian([-0.2, 0.15], 0.3)),
    )
}

/// Plane wave `exp(iκ d·x)` with `d = (cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub kappa: f64,
    pub theta: f64,
}

impl PlaneWave {
    pub fn value(&self, x: Point) -> C64 {
        let (s, c) = self.theta.sin_cos();
        C64::new(0.0, self.kappa * (c * x[0] + s * x[1])).exp()
    }

    pub fn gradient(&self, x: Point) -> [C64; 2] {
        let (s, c) = self.theta.sin_cos();
        let u = self.value(x) * C64::new(0.0, self.kappa);
        [u * c, u * s]
    }

    /// Homogeneous medium (`μ = 1`, `κ² = κ₀²`) on `n_subdomains` tags with
    /// the Robin data `∂ₙu - iκu` of the wave on the truncation boundary, so
    /// the wave itself solves the truncated problem.
    pub fn media(&self, n_subdomains: usize) -> Result<CoefficientField> {
        let wave = *self;
        Ok(CoefficientField::piecewise_constant(
            &vec![1.0; n_subdomains],
            &vec![C64::new(self.kappa * self.kappa, 0.0); n_subdomains],
            self.kappa,
        )?
        .with_outer_data(move |x, n| {
            let g = wave.gradient(x);
            g[0] * n[0] + g[1] * n[1] - C64::new(0.0, wave.kappa) * wave.value(x)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_gradient_matches_differences() {
        let w = PlaneWave { kappa: 3.0, theta: 0.4 };
        let x = [0.3, -0.2];
        let e = 1e-6;
        let g = w.gradient(x);
        let dx = (w.value([x[0] + e, x[1]]) - w.value([x[0] - e, x[1]])) / (2.0 * e);
        let dy = (w.value([x[0], x[1] + e]) - w.value([x[0], x[1] - e])) / (2.0 * e);
        assert!((g[0] - dx).norm() < 1e-8 && (g[1] - dy).norm() < 1e-8);
    }
}
