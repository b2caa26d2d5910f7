use std::time::Instant;

use super::{SkeletonSystem, SystemForm};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::traces::MultiTrace;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub form: SystemForm,
    pub converged: bool,
    pub iterations: usize,
    /// Relative `H_N` residuals `‖b - Ap_n‖ / ‖b‖`, starting with `p_0 = 0`.
    pub residuals: Vec<f64>,
    /// `‖p_n - p_ref‖_{H_N}` when a reference solution was supplied.
    pub errors: Vec<f64>,
    /// Largest ratio of consecutive residuals.
    pub contraction: Option<f64>,
    pub beta: Option<f64>,
    pub wall_time: f64,
}

impl SolveReport {
    fn new(solver: &str, form: SystemForm, beta: Option<f64>) -> Self {
        Self {
            solver: solver.to_string(),
            form,
            converged: false,
            iterations: 0,
            residuals: vec![1.0],
            errors: Vec::new(),
            contraction: None,
            beta,
            wall_time: 0.0,
        }
    }

    fn finish(mut self, start: Instant) -> Self {
        self.contraction = self
            .residuals
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .reduce(f64::max);
        self.wall_time = start.elapsed().as_secs_f64();
        self
    }

    /// Per-step ratios of consecutive error norms (empty without a reference).
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// `(1 - α²β(1-β))^{1/2}`: worst-case per-step contraction of the relaxed
/// iteration for a coercivity constant `α`.
pub fn richardson_bound(alpha: f64, beta: f64) -> f64 {
    (1.0 - alpha * alpha * beta * (1.0 - beta)).max(0.0).sqrt()
}

/// Relaxed fixed-point iteration `p ← (1-β)p + β(ΠSp + f)` from `p = 0`,
/// stopped when `‖f - (p - ΠSp)‖ ≤ tol ‖f‖`. Exceeding `maxit` returns the
/// last iterate with `converged = false`.
pub fn richardson(
    sys: &SkeletonSystem,
    beta: f64,
    tol: f64,
    maxit: usize,
    reference: Option<&MultiTrace>,
) -> Result<(MultiTrace, SolveReport)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("relaxation must lie in (0, 1), got {beta}")));
    }
    let start = Instant::now();
    let mut report = SolveReport::new("richardson", SystemForm::Product, Some(beta));
    let b = sys.rhs();
    let bn = sys.norm(b);
    let mut p = sys.zeros();
    let track = |p: &MultiTrace, report: &mut SolveReport| {
        if let Some(r) = reference {
            report.errors.push(sys.norm(&p.sub(r)));
        }
    };
    track(&p, &mut report);
    if bn == 0.0 {
        report.converged = true;
        report.residuals = vec![0.0];
        return Ok((p, report.finish(start)));
    }
    let mut r = b.clone();
    let mut rel = 1.0;
    for it in 0..=maxit {
        if rel <= tol {
            report.converged = true;
            report.iterations = it;
            break;
        }
        if it == maxit {
            report.iterations = maxit;
            break;
        }
        p = p.add_scaled(&r, C64::new(beta, 0.0));
        let y = sys.exchange().apply_pi(&sys.scattering().apply(&p));
        r = b.sub(&p).add_scaled(&y, C64::new(1.0, 0.0));
        rel = sys.norm(&r) / bn;
        report.residuals.push(rel);
        track(&p, &mut report);
    }
    Ok((p, report.finish(start)))
}

fn givens(a: C64, b: f64) -> (f64, C64) {
    let t = a.norm().hypot(b);
    if t == 0.0 {
        (1.0, C64::new(0.0, 0.0))
    } else if a.norm() == 0.0 {
        (0.0, C64::new(1.0, 0.0))
    } else {
        (a.norm() / t, a / a.norm() * (b / t))
    }
}

/// Restarted GMRES with Arnoldi orthogonality in the `H_N` inner product.
pub fn gmres(
    sys: &SkeletonSystem,
    form: SystemForm,
    tol: f64,
    maxit: usize,
    restart: usize,
    reference: Option<&MultiTrace>,
) -> Result<(MultiTrace, SolveReport)> {
    if restart == 0 {
        return Err(Error::InvalidParameter("restart length must be positive".into()));
    }
    let start = Instant::now();
    let mut report = SolveReport::new("gmres", form, None);
    let b = sys.rhs_for(form);
    let bn = sys.norm(b);
    let mut x = sys.zeros();
    if let Some(r) = reference {
        report.errors.push(sys.norm(&x.sub(r)));
    }
    if bn == 0.0 {
        report.converged = true;
        report.residuals = vec![0.0];
        return Ok((x, report.finish(start)));
    }
    let mut total = 0;
    'outer: loop {
        let r = b.sub(&sys.apply_form(&x, form));
        let beta = sys.norm(&r);
        if beta / bn <= tol {
            report.converged = true;
            break;
        }
        if total >= maxit {
            break;
        }
        let mut v = vec![r.scale(C64::new(1.0 / beta, 0.0))];
        let mut h: Vec<Vec<C64>> = Vec::new();
        let mut rot: Vec<(f64, C64)> = Vec::new();
        let mut g = vec![C64::new(beta, 0.0)];
        let mut k = 0;
        let mut breakdown = false;
        while k < restart && total < maxit {
            let mut w = sys.apply_form(&v[k], form);
            let mut col = Vec::with_capacity(k + 2);
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hik = sys.inner(&w, vi);
                    w = w.add_scaled(vi, -hik);
                    if col.len() <= i {
                        col.push(hik);
                    } else {
                        col[i] += hik;
                    }
                }
            }
            let hnext = sys.norm(&w);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, lower) = (col[i], col[i + 1]);
                col[i] = a * c + s * lower;
                col[i + 1] = -s.conj() * a + lower * c;
            }
            let (c, s) = givens(col[k], hnext);
            col[k] = col[k] * c + s * hnext;
            rot.push((c, s));
            let gk = g[k];
            g[k] = gk * c;
            g.push(-s.conj() * gk);
            h.push(col);
            k += 1;
            total += 1;
            let rel = g[k].norm() / bn;
            report.residuals.push(rel);
            if hnext <= 1e-14 * beta {
                breakdown = true;
                break;
            }
            v.push(w.scale(C64::new(1.0 / hnext, 0.0)));
            if rel <= tol {
                break;
            }
        }
        // back substitution on the k×k triangle
        let mut y = vec![C64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (m, ym) in y.iter().enumerate().skip(i + 1) {
                s -= h[m][i] * ym;
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x = x.add_scaled(&v[i], *yi);
        }
        if let Some(r) = reference {
            report.errors.push(sys.norm(&x.sub(r)));
        }
        if breakdown {
            let r = b.sub(&sys.apply_form(&x, form));
            if sys.norm(&r) / bn <= tol.max(1e-13) {
                report.converged = true;
                break 'outer;
            }
            return Err(Error::Breakdown(format!(
                "Krylov space became invariant after {total} iterations without reaching the tolerance"
            )));
        }
    }
    report.iterations = total;
    Ok((x, report.finish(start)))
}
