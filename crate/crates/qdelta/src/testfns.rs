//! Entire test functions of the form P(z) exp(-a z^2), which decay rapidly
//! on every horizontal strip and so are safe to pair against contour
//! representatives. Includes sampled strip norms and a finite-difference
//! Cauchy-Riemann residual for analyticity spot checks.

use num_complex::Complex64;
use thiserror::Error;

pub const DEFAULT_POINTS_PER_LINE: usize = 2001;
pub const DEFAULT_LINE_HEIGHTS: usize = 11;

/// Window growth stops once the sampled norm moves less than this.
const WINDOW_STABILIZE_TOL: f64 = 1e-12;

/// exp() of anything below this is zero in f64; used to cut evaluations off
/// before the polynomial factor can overflow against a vanished Gaussian.
const EXP_UNDERFLOW: f64 = -745.0;

#[derive(Debug, Error)]
pub enum TestFnError {
    #[error("invalid test function: {0}")]
    Invalid(String),
    #[error("unrecognized test function label '{0}' (expected e.g. gauss:a=1 or gauss:a=0.5,poly=1,0,1)")]
    BadLabel(String),
}

/// P(z) exp(-a z^2) with complex polynomial coefficients in ascending
/// degree order and Gaussian decay rate a > 0.
#[derive(Debug, Clone)]
pub struct TestFunction {
    coeffs: Vec<Complex64>,
    decay: f64,
    degree: usize,
    label: String,
}

fn format_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{}{}i", c.re, if c.im < 0.0 { "-" } else { "+" }, c.im.abs())
    }
}

impl TestFunction {
    /// Pure Gaussian exp(-a z^2).
    pub fn gaussian(a: f64) -> Result<Self, TestFnError> {
        Self::gaussian_family(a, &[Complex64::new(1.0, 0.0)])
    }

    pub fn gaussian_family(a: f64, poly: &[Complex64]) -> Result<Self, TestFnError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(TestFnError::Invalid(format!(
                "decay rate must be positive and finite, got {a}"
            )));
        }
        let coeffs: Vec<Complex64> = if poly.is_empty() {
            vec![Complex64::new(1.0, 0.0)]
        } else {
            poly.to_vec()
        };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(TestFnError::Invalid(
                "polynomial coefficients must be finite".into(),
            ));
        }
        let degree = coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0);
        let label = if degree == 0 && coeffs[0] == Complex64::new(1.0, 0.0) {
            format!("gauss:a={a}")
        } else {
            let parts: Vec<String> = coeffs.iter().map(|&c| format_coeff(c)).collect();
            format!("gauss:a={a},poly={}", parts.join(","))
        };
        Ok(TestFunction {
            coeffs,
            decay: a,
            degree,
            label,
        })
    }

    /// Parse the CLI label form: `gauss:a=1` or `gauss:a=0.5,poly=1,0,1`
    /// (real coefficients, ascending degree).
    pub fn parse_label(label: &str) -> Result<Self, TestFnError> {
        let bad = || TestFnError::BadLabel(label.to_string());
        let rest = label.strip_prefix("gauss:").ok_or_else(bad)?;
        let (a_part, poly_part) = match rest.split_once(",poly=") {
            Some((a, p)) => (a, Some(p)),
            None => (rest, None),
        };
        let a: f64 = a_part
            .strip_prefix("a=")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let coeffs: Vec<Complex64> = match poly_part {
            None => vec![Complex64::new(1.0, 0.0)],
            Some(p) => p
                .split(',')
                .map(|s| s.trim().parse::<f64>().map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?,
        };
        TestFunction::gaussian_family(a, &coeffs)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = -self.decay * z * z;
        if w.re < EXP_UNDERFLOW {
            return Complex64::new(0.0, 0.0);
        }
        let mut p = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            p = p * z + c;
        }
        p * w.exp()
    }

    /// P(0), exact by construction; the pairing target at the origin.
    pub fn value_at_zero(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay
    }

    pub fn polynomial_degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Sampled sup of (1+|z|)^p |phi(z)| over the strip |Im z| <= n, with the
/// default grid of 2001 points per line and 11 line heights. The sampling
/// window doubles until the maximum stabilizes.
pub fn strip_norm(phi: &TestFunction, p: u32, n: f64) -> f64 {
    strip_norm_with(phi, p, n, DEFAULT_POINTS_PER_LINE, DEFAULT_LINE_HEIGHTS)
}

pub fn strip_norm_with(
    phi: &TestFunction,
    p: u32,
    n: f64,
    points_per_line: usize,
    line_heights: usize,
) -> f64 {
    let n = n.max(0.0);
    let points = points_per_line.max(3);
    let heights: Vec<f64> = if n == 0.0 || line_heights <= 1 {
        vec![0.0]
    } else {
        (0..line_heights)
            .map(|j| -n + 2.0 * n * j as f64 / (line_heights - 1) as f64)
            .collect()
    };

    // Running max over every pass: widening the window only ever adds
    // sample points, so the result is monotone under pointwise-larger
    // integrands even when different parameters stop at different passes.
    let mut best = 0.0f64;
    let mut window = 4.0;
    loop {
        let mut pass_max = 0.0f64;
        for &h in &heights {
            for i in 0..points {
                let t = -window + 2.0 * window * i as f64 / (points - 1) as f64;
                let z = Complex64::new(t, h);
                let weighted = (1.0 + z.norm()).powi(p as i32) * phi.eval(z).norm();
                if weighted > pass_max {
                    pass_max = weighted;
                }
            }
        }
        let gained = pass_max > best + WINDOW_STABILIZE_TOL * best.max(1.0);
        if pass_max > best {
            best = pass_max;
        }
        if window > 4.0 && !gained {
            return best;
        }
        window *= 2.0;
        if window > 1e9 {
            return best;
        }
    }
}

/// |d/dx f + i d/dy f| at z by central differences; zero for holomorphic f
/// up to O(step^2) truncation. Compare against 1e-6 times the local
/// derivative scale.
pub fn cauchy_riemann_residual<F>(f: F, z: Complex64, step: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let dx = (f(z + Complex64::new(step, 0.0)) - f(z - Complex64::new(step, 0.0)))
        / (2.0 * step);
    let dy = (f(z + Complex64::new(0.0, step)) - f(z - Complex64::new(0.0, step)))
        / (2.0 * step);
    (dx + Complex64::new(0.0, 1.0) * dy).norm()
}
