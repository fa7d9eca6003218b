//! The slow-time analysis window and its Fourier spectrum.
//!
//! `Window` is an even, smooth bump equal to 1 on `[-L, L]` and supported in
//! `[-2L, 2L]`, built from the standard `exp(-1/x)` mollifier ramp. Its
//! spectrum `spec(nu) = integral of l(t) e^{-i nu t} dt` is real and even; it
//! is evaluated once by adaptive quadrature on a dense grid and interpolated
//! cubically afterwards, which turns the tau-integral of the forward model
//! into a single lookup.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{DsarError, Result};

/// Smooth transition from 1 at `r = 0` to 0 at `r = 1`.
fn mollifier_step(r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    let a = f(1.0 - r);
    let b = f(r);
    a / (a + b)
}

/// Smooth rising ramp: 0 for `t <= 0`, 1 for `t >= 1`, `C^infinity` between.
/// Shared by the analysis window and the beam-pattern tapers.
pub fn smooth_ramp(t: f64) -> f64 {
    mollifier_step(1.0 - t)
}

/// Even smooth bump: 1 on `[-L, L]`, 0 outside `[-2L, 2L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    half_plateau: f64,
}

impl Window {
    pub fn new(half_plateau: f64) -> Result<Self> {
        if !(half_plateau > 0.0) || !half_plateau.is_finite() {
            return Err(DsarError::invalid(format!(
                "window half-plateau must be positive, got {half_plateau}"
            )));
        }
        Ok(Window { half_plateau })
    }

    /// Plateau half-width `L`.
    pub fn half_plateau(&self) -> f64 {
        self.half_plateau
    }

    /// Support half-width `2L`.
    pub fn support(&self) -> f64 {
        2.0 * self.half_plateau
    }

    pub fn eval(&self, t: f64) -> f64 {
        let l = self.half_plateau;
        let a = t.abs();
        if a <= l {
            1.0
        } else if a >= 2.0 * l {
            0.0
        } else {
            mollifier_step((a - l) / l)
        }
    }
}

/// Nodes per unit of the spectrum's characteristic scale `1/L`.
const NODES_PER_SCALE: usize = 48;
/// Hard cap on the cached band, in units of `1/L`.
const MAX_BAND_SCALES: f64 = 128.0;
/// Tail considered negligible relative to `spec(0)`.
const TAIL_REL: f64 = 1e-12;

/// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissas; the rule is
/// symmetric).
const GL_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// `integral of window(t) cos(nu t) dt` over the ramp `[L, 2L]`, by composite
/// Gauss-Legendre with panels no wider than half a cosine cycle. The rule is
/// effectively exact for the smooth ramp; no adaptive recursion needed.
fn ramp_cosine_integral(window: &Window, nu: f64) -> f64 {
    let l = window.half_plateau();
    let cycles = nu.abs() * l / (2.0 * std::f64::consts::PI);
    let panels = ((2.0 * cycles).ceil() as usize + 2).max(8);
    let h = l / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = l + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            for sign in [-1.0, 1.0] {
                let t = mid + sign * half * x;
                panel += w * window.eval(t) * (nu * t).cos();
            }
        }
        acc += panel * half;
    }
    acc
}

/// Dense cached spectrum of a [`Window`], with cubic interpolation.
#[derive(Debug, Clone)]
pub struct WindowSpectrum {
    step: f64,
    values: Vec<f64>,
    at_zero: f64,
}

impl WindowSpectrum {
    /// Evaluate the spectrum on a dense grid and cache it. The window is even,
    /// so the transform is `2 [sin(nu L)/nu + ramp integral]`, with the
    /// plateau part in closed form.
    pub fn build(window: &Window) -> Result<Self> {
        let l = window.half_plateau();
        let step = 1.0 / (NODES_PER_SCALE as f64 * l);
        let max_nodes = (MAX_BAND_SCALES * NODES_PER_SCALE as f64) as usize;

        let eval_exact = |nu: f64| -> Result<f64> {
            let plateau = if nu.abs() * l < 1e-12 { l } else { (nu * l).sin() / nu };
            let v = 2.0 * (plateau + ramp_cosine_integral(window, nu));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(DsarError::numerical(format!("window spectrum non-finite at nu = {nu}")))
            }
        };

        let at_zero = eval_exact(0.0)?;
        let mut values = Vec::with_capacity(4096);
        values.push(at_zero);
        let mut quiet = 0usize;
        for i in 1..=max_nodes {
            let v = eval_exact(i as f64 * step)?;
            values.push(v);
            if v.abs() < TAIL_REL * at_zero {
                quiet += 1;
                if quiet >= NODES_PER_SCALE {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        Ok(WindowSpectrum { step, values, at_zero })
    }

    /// Process-wide cache: the spectrum is a pure function of `L`, and the
    /// dense build is worth sharing across forward and backprojection calls.
    pub fn shared(window: &Window) -> Result<Arc<WindowSpectrum>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<WindowSpectrum>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = window.half_plateau().to_bits();
        if let Some(hit) = cache.lock().expect("spectrum cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::build(window)?);
        cache
            .lock()
            .expect("spectrum cache poisoned")
            .insert(key, built.clone());
        Ok(built)
    }

    /// Value at `nu = 0`, the total window mass (greater than the plateau `2L`).
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    /// Largest cached frequency; the spectrum is treated as 0 beyond it.
    pub fn band_limit(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Interpolated spectrum value; real and even in `nu`.
    pub fn eval(&self, nu: f64) -> f64 {
        let a = nu.abs();
        let pos = a / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let t = pos - i as f64;
        // Catmull-Rom with the even extension across nu = 0 and a zero tail.
        let get = |j: isize| -> f64 {
            if j < 0 {
                self.values[(-j) as usize]
            } else if (j as usize) < self.values.len() {
                self.values[j as usize]
            } else {
                0.0
            }
        };
        let p0 = get(i as isize - 1);
        let p1 = get(i as isize);
        let p2 = get(i as isize + 1);
        let p3 = get(i as isize + 2);
        0.5 * (2.0 * p1
            + (p2 - p0) * t
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
            + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t * t * t)
    }

    /// Smallest frequency beyond which the cached spectrum stays below
    /// `rel * spec(0)`. Used to predict where the data support must decay.
    pub fn decay_threshold(&self, rel: f64) -> f64 {
        let floor = rel * self.at_zero;
        let mut idx = self.values.len();
        for (i, v) in self.values.iter().enumerate().rev() {
            if v.abs() >= floor {
                idx = i + 1;
                break;
            }
        }
        if idx >= self.values.len() {
            // Entire cache below the floor only happens for rel >= 1.
            idx = self.values.len() - 1;
        }
        idx as f64 * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn plateau_and_support() {
        let w = Window::new(100.0).unwrap();
        assert_eq!(w.eval(0.0), 1.0);
        assert_eq!(w.eval(99.9), 1.0);
        assert_eq!(w.eval(-100.0), 1.0);
        assert_eq!(w.eval(250.0), 0.0);
        assert_eq!(w.eval(-250.0), 0.0);
        let mid = w.eval(150.0);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(w.eval(150.0), w.eval(-150.0));
    }

    #[test]
    fn ramp_is_monotone_and_smooth_at_joins() {
        let w = Window::new(1.0).unwrap();
        let mut prev = 1.0;
        for i in 0..=400 {
            let t = 1.0 + i as f64 / 400.0;
            let v = w.eval(t);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        // C^infinity joins: values hug the plateau/zero extremely closely.
        assert!(w.eval(1.0 + 1e-4) > 1.0 - 1e-10);
        assert!(w.eval(2.0 - 1e-4) < 1e-10);
    }

    #[test]
    fn rejects_nonpositive_plateau() {
        assert!(Window::new(0.0).is_err());
        assert!(Window::new(-2.0).is_err());
    }

    #[test]
    fn spectrum_at_zero_exceeds_plateau_mass() {
        let w = Window::new(50.0).unwrap();
        let spec = WindowSpectrum::build(&w).unwrap();
        assert!(spec.at_zero() > 2.0 * 50.0);
        assert!(spec.at_zero() < 4.0 * 50.0);
    }

    #[test]
    fn spectrum_matches_direct_quadrature() {
        let w = Window::new(20.0).unwrap();
        let spec = WindowSpectrum::build(&w).unwrap();
        for nu in [0.0, 0.003, 0.01, 0.04, 0.11, 0.35] {
            let direct = 2.0
                * quad::integrate(|t| w.eval(t) * (nu * t).cos(), 0.0, w.support(), 1e-12)
                    .unwrap();
            let cached = spec.eval(nu);
            assert!(
                (cached - direct).abs() <= 1e-6 * spec.at_zero(),
                "nu = {nu}: cached {cached} vs direct {direct}"
            );
        }
    }

    #[test]
    fn spectrum_is_even() {
        let w = Window::new(10.0).unwrap();
        let spec = WindowSpectrum::build(&w).unwrap();
        for nu in [0.01, 0.07, 0.3, 1.9] {
            assert_eq!(spec.eval(nu), spec.eval(-nu));
        }
    }

    #[test]
    fn spectrum_decays_superpolynomially() {
        let w = Window::new(100.0).unwrap();
        let spec = WindowSpectrum::build(&w).unwrap();
        let nu_star = spec.decay_threshold(1e-8);
        assert!(nu_star > 0.0);
        assert!(
            nu_star < spec.band_limit(),
            "1e-8 decay must be reached inside the cached band"
        );
        // Beyond the scanned threshold the spectrum stays quiet (allowing for
        // interpolation wiggle between nodes).
        let mut nu = nu_star;
        while nu < spec.band_limit() {
            assert!(spec.eval(nu).abs() < 1.5e-8 * spec.at_zero(), "nu = {nu}");
            nu += 1.3e-3 * spec.band_limit();
        }
        // Far tail sits many orders below the main lobe: much faster than the
        // 1/nu decay a jump discontinuity would give.
        let main = spec.at_zero();
        let far = spec.eval(nu_star).abs();
        assert!(far < 1e-7 * main, "far tail {far} vs main lobe {main}");
    }
}
