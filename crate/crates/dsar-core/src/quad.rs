//! Adaptive Simpson quadrature for real- and complex-valued integrands.

use crate::error::{DsarError, Result};
use crate::Complex64;

const MAX_DEPTH: u32 = 48;

fn simpson(a: f64, fa: Complex64, b: f64, fb: Complex64, fm: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F>(
    f: &F,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
    fm: Complex64,
    whole: Complex64,
    eps: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.re.is_finite() || !flm.im.is_finite() || !frm.re.is_finite() || !frm.im.is_finite() {
        return Err(DsarError::numerical(format!(
            "integrand non-finite near t = {lm} or t = {rm}"
        )));
    }
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(DsarError::numerical(format!(
            "adaptive quadrature failed to converge on [{a}, {b}] (depth {depth}, residual {:.3e}, eps {eps:.3e})",
            delta.norm()
        )));
    }
    let l = adaptive(f, a, fa, m, fm, flm, left, 0.5 * eps, depth + 1)?;
    let r = adaptive(f, m, fm, b, fb, frm, right, 0.5 * eps, depth + 1)?;
    Ok(l + r)
}

/// Integrate a complex-valued function over `[a, b]` to absolute tolerance `eps`.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, eps: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(eps > 0.0) {
        return Err(DsarError::invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    for v in [fa, fb, fm] {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(DsarError::numerical("integrand non-finite at a bracketing node"));
        }
    }
    let whole = simpson(a, fa, b, fb, fm);
    adaptive(&f, a, fa, b, fb, fm, whole, eps, 0)
}

/// Integrate a real-valued function over `[a, b]` to absolute tolerance `eps`.
pub fn integrate<F>(f: F, a: f64, b: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_complex(|t| Complex64::new(f(t), 0.0), a, b, eps).map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomials() {
        let v = integrate(|t| t * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn integrates_oscillatory_integrand() {
        let v = integrate(|t| t.sin(), 0.0, 5.0 * PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn complex_phase_integral() {
        // Integral of e^{i k t} over one full period vanishes.
        let k = 7.0;
        let v = integrate_complex(
            |t| Complex64::new(0.0, k * t).exp(),
            0.0,
            2.0 * PI / k,
            1e-13,
        )
        .unwrap();
        assert!(v.norm() < 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        let v = integrate(|t| t, 2.0, 2.0, 1e-12).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn non_finite_integrand_reports_diagnostics() {
        let r = integrate(|t| 1.0 / t, -1.0, 1.0, 1e-12);
        assert!(matches!(r, Err(DsarError::Numerical(_))));
    }
}
