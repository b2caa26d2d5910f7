//! The exchange operator `Π = I - 2P`, where `P` is the `T⁻¹`-orthogonal
//! projector onto `T(range R)`:
//!
//! `P p = T R (Rᵀ T R)⁻¹ Rᵀ p`.
//!
//! `Π` fixes the Neumann single traces `ker Rᵀ`, negates `T(range R)`, and is
//! an isometric involution in the `H_N` norm.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{SpdFactor, C64};
use crate::traces::{CauchyPair, DtnOperator, MultiTrace, SingleTraceMap, TraceKind};

#[derive(Clone, Debug)]
pub struct ExchangeOperator {
    dtn: Arc<DtnOperator>,
    map: SingleTraceMap,
    gram: SpdFactor,
}

pub fn build_exchange(dtn: Arc<DtnOperator>, map: SingleTraceMap) -> Result<ExchangeOperator> {
    if dtn.sizes() != map.sizes() {
        return Err(Error::ShapeMismatch {
            expected: map.sizes().iter().sum(),
            found: dtn.sizes().iter().sum(),
        });
    }
    map.check_full_rank()?;
    let n = map.n_skeleton();
    let mut gram = DMatrix::zeros(n, n);
    for j in 0..dtn.n_blocks() {
        let t = dtn.block(j);
        let e = map.entries(j);
        for (a, &sa) in e.iter().enumerate() {
            for (b, &sb) in e.iter().enumerate() {
                gram[(sa, sb)] += t[(a, b)];
            }
        }
    }
    let gram = SpdFactor::new(gram)
        .map_err(|_| Error::RankDeficient("RᵀTR is not positive definite (repeated skeleton entries?)".into()))?;
    Ok(ExchangeOperator { dtn, map, gram })
}

impl ExchangeOperator {
    pub fn dtn(&self) -> &Arc<DtnOperator> {
        &self.dtn
    }

    pub fn map(&self) -> &SingleTraceMap {
        &self.map
    }

    /// Skeleton coefficients `φ = (RᵀTR)⁻¹ Rᵀ p`, so that `P p = T R φ`.
    pub fn dirichlet_coordinates(&self, p: &MultiTrace) -> DVector<C64> {
        self.gram.solve(&self.map.gather(p))
    }

    pub fn project(&self, p: &MultiTrace) -> MultiTrace {
        let phi = self.dirichlet_coordinates(p);
        self.dtn.apply(&self.map.restrict(&phi))
    }

    pub fn apply_pi(&self, p: &MultiTrace) -> MultiTrace {
        debug_assert_eq!(p.kind(), TraceKind::Neumann);
        p.add_scaled(&self.project(p), C64::new(-2.0, 0.0))
    }

    /// `p = q + T R φ` with `Rᵀ q = 0`; returns `(q, T R φ)`.
    pub fn orthogonal_decompose(&self, p: &MultiTrace) -> (MultiTrace, MultiTrace) {
        let range = self.project(p);
        (p.sub(&range), range)
    }

    /// `‖(u_ν - iωT u_d) - Π(u_ν + iωT u_d)‖_{H_N}`; zero exactly for discrete
    /// single traces.
    pub fn transmission_residual(&self, u: &CauchyPair, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        let tu = self.dtn.apply(&u.dir);
        let iw = C64::new(0.0, omega);
        let minus = u.neu.add_scaled(&tu, -iw);
        let plus = u.neu.add_scaled(&tu, iw);
        let r = minus.sub(&self.apply_pi(&plus));
        Ok(crate::traces::multitrace_norm(&r, &self.dtn))
    }
}
