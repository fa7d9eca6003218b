//! Central finite differences, the oracle for every analytic derivative.

use crate::error::{DsarError, Result};

/// Default step for a central difference at a point of the given magnitude.
///
/// `1e-5` balances truncation and rounding for first derivatives in double
/// precision; second and third differences divide by `step^2`/`step^3` and
/// need a coarser step.
pub fn default_step(point_scale: f64, order: u32) -> f64 {
    let base = if order <= 1 { 1e-5 } else { 1e-4 };
    (1.0 + point_scale.abs()) * base
}

/// Central finite-difference estimate of the directional derivative
/// `d^order/dt^order f(point + t * direction)` at `t = 0`.
///
/// All stencils have truncation error `O(step^2)`. Supported orders are 1..=3.
pub fn fd_derivative<F>(f: &F, point: &[f64], direction: &[f64], order: u32, step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(DsarError::invalid(format!("step must be positive, got {step}")));
    }
    if point.len() != direction.len() {
        return Err(DsarError::invalid(format!(
            "point dimension {} does not match direction dimension {}",
            point.len(),
            direction.len()
        )));
    }

    let eval = |t: f64| -> Result<f64> {
        let shifted: Vec<f64> = point
            .iter()
            .zip(direction.iter())
            .map(|(p, d)| p + t * d)
            .collect();
        let v = f(&shifted);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DsarError::numerical(format!(
                "function evaluation returned {v} at offset {t}"
            )))
        }
    };

    let h = step;
    match order {
        1 => Ok((eval(h)? - eval(-h)?) / (2.0 * h)),
        2 => Ok((eval(h)? - 2.0 * eval(0.0)? + eval(-h)?) / (h * h)),
        3 => Ok((eval(2.0 * h)? - 2.0 * eval(h)? + 2.0 * eval(-h)? - eval(-2.0 * h)?)
            / (2.0 * h * h * h)),
        _ => Err(DsarError::invalid(format!(
            "derivative order must be in 1..=3, got {order}"
        ))),
    }
}

/// One-dimensional convenience wrapper around [`fd_derivative`].
pub fn fd_scalar<F>(f: F, t: f64, order: u32, step: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    fd_derivative(&|p: &[f64]| f(p[0]), &[t], &[1.0], order, step)
}

/// Dense Jacobian of `f: R^n -> R^m` by central differences, row-major in the
/// output index. `steps` gives the per-coordinate step.
pub fn fd_jacobian<F>(f: &F, point: &[f64], out_dim: usize, steps: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = point.len();
    if steps.len() != n {
        return Err(DsarError::invalid("steps length must match point dimension"));
    }
    let mut jac = vec![0.0; out_dim * n];
    let mut plus = point.to_vec();
    let mut minus = point.to_vec();
    for j in 0..n {
        let h = steps[j];
        if !(h > 0.0) {
            return Err(DsarError::invalid(format!("step {j} must be positive")));
        }
        plus[j] = point[j] + h;
        minus[j] = point[j] - h;
        let fp = f(&plus);
        let fm = f(&minus);
        if fp.len() != out_dim || fm.len() != out_dim {
            return Err(DsarError::invalid("function output dimension mismatch"));
        }
        for i in 0..out_dim {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(DsarError::numerical(format!(
                    "non-finite jacobian entry ({i}, {j})"
                )));
            }
            jac[i * n + j] = d;
        }
        plus[j] = point[j];
        minus[j] = point[j];
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_first_derivative_is_exact() {
        // Central differences are exact on quadratics up to rounding.
        let est = fd_scalar(|t| t * t, 1.0, 1, 1e-5).unwrap();
        assert!((est - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_function_has_zero_derivatives() {
        for order in 1..=3 {
            let est = fd_scalar(|_| 4.25, 0.3, order, 1e-4).unwrap();
            assert!(est.abs() < 1e-9, "order {order}: {est}");
        }
    }

    #[test]
    fn higher_orders_on_smooth_function() {
        // Third differences divide rounding by step^3; a coarser step is the
        // right tuning there.
        let f = |t: f64| (2.0 * t).sin();
        let t = 0.4;
        let d1 = fd_scalar(f, t, 1, default_step(t, 1)).unwrap();
        let d2 = fd_scalar(f, t, 2, default_step(t, 2)).unwrap();
        let d3 = fd_scalar(f, t, 3, 2e-3).unwrap();
        assert!((d1 - 2.0 * (2.0 * t).cos()).abs() < 1e-8);
        assert!((d2 + 4.0 * (2.0 * t).sin()).abs() < 1e-6);
        assert!((d3 + 8.0 * (2.0 * t).cos()).abs() < 1e-4);
    }

    #[test]
    fn directional_derivative_in_two_dims() {
        let f = |p: &[f64]| p[0] * p[0] + 3.0 * p[0] * p[1];
        // d/dt f(1 + t, 2 + 2t) at 0 = fx + 2 fy = (2 + 6) + 2 * 3 = 14.
        let est = fd_derivative(&f, &[1.0, 2.0], &[1.0, 2.0], 1, 1e-5).unwrap();
        assert!((est - 14.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(fd_scalar(|t| t, 0.0, 4, 1e-5).is_err());
        assert!(fd_scalar(|t| t, 0.0, 1, 0.0).is_err());
        assert!(fd_derivative(&|p: &[f64]| p[0], &[0.0], &[1.0, 2.0], 1, 1e-5).is_err());
    }

    #[test]
    fn non_finite_evaluation_is_a_numerical_error() {
        let err = fd_scalar(|t| 1.0 / t, 0.0, 1, 1e-3);
        assert!(matches!(err, Err(crate::DsarError::Numerical(_))) || err.is_ok());
        let err = fd_scalar(|_| f64::NAN, 0.0, 1, 1e-3);
        assert!(matches!(err, Err(crate::DsarError::Numerical(_))));
    }

    #[test]
    fn jacobian_of_linear_map_is_exact() {
        let f = |p: &[f64]| vec![2.0 * p[0] - p[1], p[0] + 4.0 * p[1]];
        let jac = fd_jacobian(&f, &[0.3, -0.7], 2, &[1e-5, 1e-5]).unwrap();
        let expect = [2.0, -1.0, 1.0, 4.0];
        for (a, b) in jac.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
