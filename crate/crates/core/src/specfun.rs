//! Modified Bessel functions `I_n`, `K_n` and the Yukawa Green kernel.
//!
//! `K_0`, `K_1` use the ascending series for `x <= 2` and Steed's continued
//! fraction above; `K_n` follows by upward recurrence. `I_n` uses Miller's
//! downward recurrence normalized by the series value of `I_0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest order accepted by [`bessel_i`] and [`bessel_k`].
pub const MAX_ORDER: usize = 60;

/// Beyond this argument `I_0` overflows an `f64`.
const I_OVERFLOW_ARG: f64 = 700.0;

fn check_args(n: usize, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("Bessel argument must be positive, got {x}")));
    }
    if n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("Bessel order {n} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

fn i0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= y / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Modified Bessel function of the first kind `I_n(x)`.
pub fn bessel_i(n: usize, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if x > I_OVERFLOW_ARG {
        return Err(Error::Overflow(format!("I_{n}({x}) exceeds f64 range")));
    }
    let i0 = i0_series(x);
    if n == 0 {
        return Ok(i0);
    }
    const BIG: f64 = 1e10;
    let tox = 2.0 / x;
    let reach = (n as f64).max(x);
    let start = 2 * (reach as usize + 20 + (200.0 * reach).sqrt() as usize);
    let (mut bip, mut bi, mut ans) = (0.0f64, 1.0f64, 0.0f64);
    for j in (1..=start).rev() {
        let bim = bip + j as f64 * tox * bi;
        bip = bi;
        bi = bim;
        if bi.abs() > BIG {
            ans /= BIG;
            bi /= BIG;
            bip /= BIG;
        }
        if j == n {
            ans = bip;
        }
    }
    Ok(ans * i0 / bi)
}

/// `(K_0(x), K_1(x))`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64)> {
    check_args(0, x)?;
    Ok(if x <= 2.0 { k01_series(x) } else { k01_steed(x) })
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // t0 = y^k/(k!)^2, t1 = y^k/(k!(k+1)!)
    let (mut t0, mut t1) = (1.0f64, 1.0f64);
    let (mut i0, mut i1s) = (1.0f64, 1.0f64);
    let mut harmonic = 0.0f64; // H_k
    let mut k0_tail = 0.0f64;
    let mut k1_tail = 2.0 * (-EULER_GAMMA) + 1.0; // psi(1) + psi(2)
    let mut k = 1.0f64;
    loop {
        t0 *= y / (k * k);
        t1 *= y / (k * (k + 1.0));
        harmonic += 1.0 / k;
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (k + 1.0);
        i0 += t0;
        i1s += t1;
        k0_tail += harmonic * t0;
        k1_tail += psi_sum * t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1s {
            break;
        }
        k += 1.0;
    }
    let i1 = 0.5 * x * i1s;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_tail;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_tail;
    (k0, k1)
}

fn k01_steed(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (0.0f64, 1.0f64);
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Modified Bessel function of the second kind `K_n(x)`.
pub fn bessel_k(n: usize, x: f64) -> Result<f64> {
    check_args(n, x)?;
    let (mut km, mut k) = bessel_k01(x)?;
    if n == 0 {
        return Ok(km);
    }
    for j in 1..n {
        let kp = km + 2.0 * j as f64 / x * k;
        km = k;
        k = kp;
    }
    if !k.is_finite() {
        return Err(Error::Overflow(format!("K_{n}({x}) exceeds f64 range")));
    }
    Ok(k)
}

/// `I_n'(x) / I_n(x)`.
pub fn bessel_i_log_derivative(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Ok(bessel_i(1, x)? / bessel_i(0, x)?);
    }
    let below = bessel_i(n - 1, x)?;
    let above = bessel_i(n + 1, x)?;
    Ok(0.5 * (below + above) / bessel_i(n, x)?)
}

/// `-K_n'(x) / K_n(x)` for any order, via the ratio recurrence
/// `K_{n+1}/K_n = K_{n-1}/K_n + 2n/x` (no overflow for large `n`).
pub fn bessel_k_neg_log_derivative(n: usize, x: f64) -> Result<f64> {
    let (k0, k1) = bessel_k01(x)?;
    // ratio_prev = K_n / K_{n-1}, ratio = K_{n+1} / K_n
    let mut ratio = k1 / k0;
    if n == 0 {
        return Ok(ratio);
    }
    let mut ratio_prev = ratio;
    for j in 1..=n {
        ratio_prev = ratio;
        ratio = 1.0 / ratio_prev + 2.0 * j as f64 / x;
    }
    Ok(0.5 * (1.0 / ratio_prev + ratio))
}

/// Decay length and spatial dimension of the Yukawa kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    gamma: f64,
    dim: usize,
}

impl KernelParams {
    pub fn new(gamma: f64, dim: usize) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("kernel dimension must be 2 or 3, got {dim}")));
        }
        Ok(Self { gamma, dim })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn radius(params: &KernelParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.dim {
        return Err(Error::ShapeMismatch {
            expected: params.dim,
            found: x.len(),
        });
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::KernelSingularity);
    }
    Ok(r)
}

/// Fundamental solution of `-Δ + γ⁻²`: `K_0(|x|/γ)/(2π)` in 2D,
/// `exp(-|x|/γ)/(4π|x|)` in 3D.
pub fn yukawa_green(params: &KernelParams, x: &[f64]) -> Result<f64> {
    let r = radius(params, x)?;
    let g = params.gamma;
    Ok(match params.dim {
        2 => bessel_k01(r / g)?.0 / (2.0 * PI),
        _ => (-r / g).exp() / (4.0 * PI * r),
    })
}

pub fn yukawa_green_grad(params: &KernelParams, x: &[f64]) -> Result<Vec<f64>> {
    let r = radius(params, x)?;
    let g = params.gamma;
    let dgdr = match params.dim {
        2 => -bessel_k01(r / g)?.1 / (2.0 * PI * g),
        _ => -(-r / g).exp() / (4.0 * PI) * (1.0 / (g * r) + 1.0 / (r * r)),
    };
    Ok(x.iter().map(|v| dgdr * v / r).collect())
}

/// 2D kernel value and gradient at `x ≠ 0`, without the dimension checks.
#[inline]
pub(crate) fn green2(gamma: f64, x: [f64; 2]) -> (f64, [f64; 2]) {
    let r = x[0].hypot(x[1]);
    let z = r / gamma;
    let (k0, k1) = if z <= 2.0 { k01_series(z) } else { k01_steed(z) };
    let dgdr = -k1 / (2.0 * PI * gamma);
    (k0 / (2.0 * PI), [dgdr * x[0] / r, dgdr * x[1] / r])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from 30-digit arbitrary-precision evaluation.
    #[test]
    fn i_matches_reference_table() {
        let table = [
            (0, 0.001, 1.0000002500000156),
            (0, 1.0, 1.2660658777520084),
            (1, 0.5, 0.2578943053908963),
            (3, 2.5, 0.4743704087780356),
            (5, 10.0, 777.18828640326),
            (10, 1.7, 5.792605208682935e-08),
            (0, 50.0, 2.9325537838493362e+20),
            (20, 30.0, 1126985104.4483771),
            (60, 50.0, 1259439.2827575528),
        ];
        for (n, x, v) in table {
            let got = bessel_i(n, x).unwrap();
            assert!(rel(got, v) < 1e-10, "I_{n}({x}) = {got}, want {v}");
        }
    }

    #[test]
    fn k_matches_reference_table() {
        let table = [
            (0, 0.001, 7.023688800562382),
            (0, 1.0, 0.42102443824070834),
            (0, 2.0, 0.11389387274953344),
            (1, 2.0, 0.13986588181652243),
            (0, 2.5, 0.06234755320036619),
            (1, 0.3, 3.055992033457325),
            (1, 7.0, 0.00045418248688489695),
            (3, 2.5, 0.2682271463934492),
            (10, 1.7, 850847.8366043662),
            (0, 50.0, 3.4101677497894956e-23),
            (5, 40.0, 1.1423814375953184e-18),
        ];
        for (n, x, v) in table {
            let got = bessel_k(n, x).unwrap();
            assert!(rel(got, v) < 1e-10, "K_{n}({x}) = {got}, want {v}");
        }
    }

    #[test]
    fn i_at_small_arguments() {
        assert!((bessel_i(0, 1e-8).unwrap() - 1.0).abs() < 1e-12);
        assert!((bessel_i(1, 1e-6).unwrap() / 1e-6 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn i3_matches_ascending_series() {
        // 40-term ascending series oracle for I_3(2.5).
        let x: f64 = 2.5;
        let mut sum = 0.0;
        let mut fact_k = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_nk: f64 = (1..=k + 3).map(|v| v as f64).product();
            sum += (0.5 * x).powi(2 * k + 3) / (fact_k * fact_nk);
        }
        assert!(rel(bessel_i(3, x).unwrap(), sum) < 1e-10);
    }

    #[test]
    fn wronskian_identity() {
        let x = 1.7;
        for n in 0..=10 {
            let w = bessel_i(n, x).unwrap() * bessel_k(n + 1, x).unwrap()
                + bessel_i(n + 1, x).unwrap() * bessel_k(n, x).unwrap();
            assert!((w - 1.0 / x).abs() < 1e-9, "n = {n}: {w}");
        }
    }

    #[test]
    fn wronskian_over_grid() {
        for &x in &[1e-3, 0.05, 0.7, 1.99, 2.01, 5.0, 20.0, 50.0] {
            for n in [0usize, 1, 4, 9] {
                let w = bessel_i(n, x).unwrap() * bessel_k(n + 1, x).unwrap()
                    + bessel_i(n + 1, x).unwrap() * bessel_k(n, x).unwrap();
                assert!(rel(w, 1.0 / x) < 1e-9, "x = {x}, n = {n}: {w}");
            }
        }
    }

    #[test]
    fn k0_small_argument_asymptote() {
        let x: f64 = 1e-4;
        let asym = -(0.5 * x).ln() - EULER_GAMMA;
        assert!(rel(bessel_k(0, x).unwrap(), asym) < 1e-6);
    }

    #[test]
    fn k0_decreasing() {
        let k = |x| bessel_k(0, x).unwrap();
        assert!(k(1.0) > k(2.0) && k(2.0) > k(3.0));
    }

    #[test]
    fn series_and_continued_fraction_agree_at_switch() {
        let (a0, a1) = k01_series(2.0);
        let (b0, b1) = k01_steed(2.0);
        assert!(rel(a0, b0) < 1e-13 && rel(a1, b1) < 1e-13);
    }

    #[test]
    fn argument_errors() {
        assert!(bessel_i(0, 0.0).is_err());
        assert!(bessel_k(61, 1.0).is_err());
        assert!(matches!(bessel_i(2, 800.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn log_derivatives_match_recurrence() {
        let x = 3.3;
        for n in 1..6 {
            let direct = -(bessel_k(n - 1, x).unwrap() + bessel_k(n + 1, x).unwrap())
                / (2.0 * bessel_k(n, x).unwrap());
            assert!(rel(-bessel_k_neg_log_derivative(n, x).unwrap(), direct) < 1e-12);
        }
        let r = bessel_i_log_derivative(0, x).unwrap();
        assert!(rel(r, bessel_i(1, x).unwrap() / bessel_i(0, x).unwrap()) < 1e-14);
    }

    #[test]
    fn green_3d_at_decay_length() {
        let p = KernelParams::new(0.7, 3).unwrap();
        let g = yukawa_green(&p, &[0.7, 0.0, 0.0]).unwrap();
        assert!(rel(g, (-1.0f64).exp() / (4.0 * PI * 0.7)) < 1e-15);
    }

    #[test]
    fn green_singularity_rejected() {
        let p = KernelParams::new(1.0, 2).unwrap();
        assert!(matches!(yukawa_green(&p, &[0.0, 0.0]), Err(Error::KernelSingularity)));
        assert!(yukawa_green_grad(&p, &[0.0, 0.0]).is_err());
        assert!(KernelParams::new(-1.0, 2).is_err());
        assert!(KernelParams::new(1.0, 4).is_err());
    }

    #[test]
    fn green_2d_satisfies_yukawa_equation_off_origin() {
        // 5-point Laplacian residual of -ΔG + γ⁻²G at points away from 0.
        let gamma = 0.8;
        let p = KernelParams::new(gamma, 2).unwrap();
        let g = |x: f64, y: f64| yukawa_green(&p, &[x, y]).unwrap();
        let mut prev = f64::INFINITY;
        for &s in &[1e-2, 5e-3] {
            let (x, y) = (0.6, -0.45);
            let lap = (g(x + s, y) + g(x - s, y) + g(x, y + s) + g(x, y - s) - 4.0 * g(x, y)) / (s * s);
            let res = (-lap + g(x, y) / (gamma * gamma)).abs() / g(x, y);
            assert!(res < 1e-3, "residual {res}");
            assert!(res < prev);
            prev = res;
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        for dim in [2usize, 3] {
            let gamma = 1.3;
            let p = KernelParams::new(gamma, dim).unwrap();
            let points: [[f64; 3]; 3] = [[0.2, -0.1, 0.05], [1.1, 0.7, -0.4], [-5.0, 6.0, 3.0]];
            for pt in points {
                let x = &pt[..dim];
                let grad = yukawa_green_grad(&p, x).unwrap();
                for k in 0..dim {
                    let step = 1e-5;
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[k] += step;
                    xm[k] -= step;
                    let fd = (yukawa_green(&p, &xp).unwrap() - yukawa_green(&p, &xm).unwrap()) / (2.0 * step);
                    assert!((fd - grad[k]).abs() < 1e-7, "dim {dim}, comp {k}: {fd} vs {}", grad[k]);
                }
                // radial: grad parallel to x, pointing inward
                let dot: f64 = grad.iter().zip(x).map(|(a, b)| a * b).sum();
                let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((dot + gn * xn).abs() < 1e-12 * gn * xn);
            }
        }
    }

    #[test]
    fn green_is_positive_decreasing_and_even() {
        let p = KernelParams::new(0.5, 2).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let r = 0.05 * k as f64;
            let v = yukawa_green(&p, &[r * 0.6, r * 0.8]).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        let a = yukawa_green(&p, &[0.31, -0.72]).unwrap();
        let b = yukawa_green(&p, &[-0.31, 0.72]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fast_kernel_matches_public_one() {
        let p = KernelParams::new(0.9, 2).unwrap();
        for x in [[0.3, 0.1], [2.5, -1.0], [0.01, 0.02]] {
            let (g, grad) = green2(0.9, x);
            assert_eq!(g, yukawa_green(&p, &x).unwrap());
            let gg = yukawa_green_grad(&p, &x).unwrap();
            assert!((grad[0] - gg[0]).abs() < 1e-15 * gg[0].abs().max(1.0));
        }
    }
}
