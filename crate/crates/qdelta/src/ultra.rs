//! Boundary-value representatives F(z), analytic off a horizontal strip, and
//! their pairings with entire test functions along a pair of horizontal
//! lines. The pairing integrates F * phi left to right on Im z = +zeta and
//! subtracts the same integral on Im z = -zeta, which picks up the jump of F
//! across the strip: the q-deformed Lorentz kernel pairs a test function to
//! (2 pi / (2 - q)) phi(0), the classical Cauchy kernel to phi(0), and the
//! transform of a density f to the integral of f * phi.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::qcalc::{q_exp_complex, BranchCutError, Density, QParam, QcalcError};
use crate::quadrature::{
    integrate_finite, integrate_horizontal_line, integrate_semi_infinite,
    integrate_semi_infinite_analytic, IntegrationResult, PairingResult, QuadratureConfig,
    QuadratureError, TailStrategy,
};
use crate::testfns::TestFunction;

/// Below this |Im z| the Cauchy transform integrand is peaked enough that the
/// real-line integration is split at Re z.
const NEAR_AXIS_IM: f64 = 0.1;

#[derive(Debug, Error)]
pub enum UltraError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Qcalc(#[from] QcalcError),
    #[error(transparent)]
    BranchCut(#[from] BranchCutError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Height of the two pairing lines Im z = +/- zeta.
#[derive(Debug, Clone, Copy)]
pub struct ContourSpec {
    zeta: f64,
}

impl ContourSpec {
    pub fn new(zeta: f64) -> Result<Self, UltraError> {
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(UltraError::Domain(format!(
                "contour height must be positive and finite, got {zeta}"
            )));
        }
        Ok(ContourSpec { zeta })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        p = p * z + c;
    }
    p
}

/// A function analytic off the strip |Im z| <= strip_halfwidth, polynomially
/// bounded outside it. Pairings must use contours that clear the strip.
#[derive(Clone)]
pub struct UltraRep {
    eval: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    strip_halfwidth: f64,
    power_bound_degree: i32,
    label: String,
}

impl std::fmt::Debug for UltraRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UltraRep")
            .field("strip_halfwidth", &self.strip_halfwidth)
            .field("power_bound_degree", &self.power_bound_degree)
            .field("label", &self.label)
            .finish()
    }
}

impl UltraRep {
    pub fn new<F>(
        eval: F,
        strip_halfwidth: f64,
        power_bound_degree: i32,
        label: &str,
    ) -> Result<Self, UltraError>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        if !(strip_halfwidth >= 0.0) || !strip_halfwidth.is_finite() {
            return Err(UltraError::Domain(format!(
                "strip halfwidth must be nonnegative and finite, got {strip_halfwidth}"
            )));
        }
        Ok(UltraRep {
            eval: Arc::new(eval),
            strip_halfwidth,
            power_bound_degree,
            label: label.to_string(),
        })
    }

    /// The kernel -1 / ((2-q) i k), whose jump across the origin is
    /// (2 pi / (2-q)) times a point mass. Decays like 1/|k|.
    pub fn delta_family(q: &QParam) -> Result<Self, UltraError> {
        q.require_delta_range()?;
        let qv = q.value();
        let scale = 2.0 - qv;
        Self::new(
            move |k| -Complex64::new(1.0, 0.0) / (scale * Complex64::new(0.0, 1.0) * k),
            0.0,
            -1,
            &format!("fq:q={qv}"),
        )
    }

    /// The classical Cauchy kernel -1 / (2 pi i k); pairs to phi(0).
    pub fn dirac() -> Self {
        Self::new(
            |k| -Complex64::new(1.0, 0.0) / (2.0 * PI * Complex64::new(0.0, 1.0) * k),
            0.0,
            -1,
            "dirac",
        )
        .expect("static parameters are valid")
    }

    /// Cauchy transform (1 / 2 pi i) \int f(t) / (t - z) dt of a density,
    /// evaluated by quadrature on demand.
    ///
    /// Evaluation panics if the underlying quadrature fails; keep the config
    /// tolerances attainable for the density at hand.
    pub fn from_cauchy_transform(f: Density, cfg: QuadratureConfig) -> Self {
        let label = format!("cauchy:{}", f.label());
        let panic_label = label.clone();
        Self::new(
            move |z| {
                cauchy_transform(&f, z, &cfg).unwrap_or_else(|e| {
                    panic!("cauchy transform {panic_label} failed at {z}: {e}")
                })
            },
            0.0,
            -1,
            &label,
        )
        .expect("static parameters are valid")
    }

    /// The same representative with a polynomial added; pairings must not
    /// change, since polynomials integrate to equal values on the two lines.
    pub fn with_polynomial(&self, coeffs: &[Complex64]) -> Self {
        let base = Arc::clone(&self.eval);
        let coeffs = coeffs.to_vec();
        let poly_degree = coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0) as i32;
        UltraRep {
            eval: Arc::new(move |z| base(z) + horner(&coeffs, z)),
            strip_halfwidth: self.strip_halfwidth,
            power_bound_degree: self.power_bound_degree.max(poly_degree),
            label: format!("{}+poly", self.label),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn strip_halfwidth(&self) -> f64 {
        self.strip_halfwidth
    }

    pub fn power_bound_degree(&self) -> i32 {
        self.power_bound_degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn require_off_axis(k: Complex64) -> Result<(), UltraError> {
    if !k.is_finite() {
        return Err(UltraError::Domain(format!("k must be finite, got {k}")));
    }
    if k.im == 0.0 {
        return Err(UltraError::Domain(format!(
            "k must lie off the real axis, got {k}"
        )));
    }
    Ok(())
}

/// The two-sided kernel E_q(k, x): H(x) e_q(ikx) in the upper half-plane of
/// k, -H(-x) e_q(ikx) in the lower, with H(0) = 1. Branch-cut contact in the
/// q-exponential base is an error at every evaluation.
pub fn eval_eq(q: &QParam, k: Complex64, x: f64) -> Result<Complex64, UltraError> {
    q.require_delta_range()?;
    require_off_axis(k)?;
    if !x.is_finite() {
        return Err(UltraError::Domain(format!("x must be finite, got {x}")));
    }
    let h = |t: f64| if t >= 0.0 { 1.0 } else { 0.0 };
    let factor = if k.im > 0.0 { h(x) } else { -h(-x) };
    if factor == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = Complex64::new(0.0, 1.0) * k * x;
    let val = q_exp_complex(q, z)?;
    Ok(factor * val)
}

/// -1 / ((2-q) i k), the closed form of the x-integral of E_q(k, .) for k
/// off the real axis.
pub fn fq_closed_form(q: &QParam, k: Complex64) -> Result<Complex64, UltraError> {
    q.require_delta_range()?;
    require_off_axis(k)?;
    let qv = q.value();
    Ok(-Complex64::new(1.0, 0.0) / ((2.0 - qv) * Complex64::new(0.0, 1.0) * k))
}

/// Integrate x -> E_q(k, x) over the real line by quadrature on the finite
/// part plus the exact antiderivative tail. Converges to
/// [`fq_closed_form`] for every k off the real axis.
pub fn integrate_eq_over_x(
    q: &QParam,
    k: Complex64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, UltraError> {
    q.require_delta_range()?;
    require_off_axis(k)?;
    let qv = q.value();
    let e1 = 1.0 / (1.0 - qv);
    let e2 = (2.0 - qv) / (1.0 - qv);
    let denom = (2.0 - qv) * Complex64::new(0.0, 1.0) * k;
    let base = move |x: f64| Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0) * k * ((1.0 - qv) * x);
    // |base| >= 10 past the split, so the tail exponent has bite there.
    let split = (10.0 / ((qv - 1.0) * k.norm())).max(1.0);
    if k.im > 0.0 {
        let r = integrate_semi_infinite_analytic(
            |x| base(x).powf(e1),
            0.0,
            split,
            |x| -base(x).powf(e2) / denom,
            cfg,
        )?;
        Ok(r)
    } else {
        // Reflect the negative half-line onto [0, inf); the kernel sign and
        // the orientation flip combine to an overall negation.
        let r = integrate_semi_infinite_analytic(
            |u| base(-u).powf(e1),
            0.0,
            split,
            |u| base(-u).powf(e2) / denom,
            cfg,
        );
        match r {
            Ok(mut r) => {
                r.value = -r.value;
                Ok(r)
            }
            Err(QuadratureError::Failure {
                value,
                error_estimate,
                evaluations,
            }) => Err(UltraError::Quadrature(QuadratureError::Failure {
                value: -value,
                error_estimate,
                evaluations,
            })),
            Err(e) => Err(UltraError::Quadrature(e)),
        }
    }
}

/// Pair a representative against a test function along Im z = +/- zeta:
/// top-line integral minus bottom-line integral, both left to right.
pub fn contour_pair(
    rep: &UltraRep,
    phi: &TestFunction,
    contour: &ContourSpec,
    cfg: &QuadratureConfig,
) -> Result<PairingResult, UltraError> {
    if contour.zeta() <= rep.strip_halfwidth {
        return Err(UltraError::Domain(format!(
            "contour height {} does not clear the representative strip (halfwidth {})",
            contour.zeta(),
            rep.strip_halfwidth
        )));
    }
    // Once the test function underflows to exactly zero the product is zero
    // for any polynomially bounded representative; skipping the evaluation
    // keeps polynomial-shifted reps from producing inf * 0 far out.
    let integrand = |z: Complex64| {
        let p = phi.eval(z);
        if p == Complex64::new(0.0, 0.0) {
            p
        } else {
            rep.eval(z) * p
        }
    };
    let top = integrate_horizontal_line(integrand, contour.zeta(), cfg)?;
    let bottom = integrate_horizontal_line(integrand, -contour.zeta(), cfg)?;
    Ok(PairingResult {
        value: top.value - bottom.value,
        error_estimate: top.error_estimate + bottom.error_estimate,
        evaluations: top.evaluations + bottom.evaluations,
    })
}

/// (1 / 2 pi i) \int f(t) / (t - z) dt for z off the real axis. Within
/// [`NEAR_AXIS_IM`] of the axis the real-line integration splits at Re z to
/// keep the peak on a panel boundary.
pub fn cauchy_transform(
    f: &Density,
    z: Complex64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, UltraError> {
    if !z.is_finite() {
        return Err(UltraError::Domain(format!("z must be finite, got {z}")));
    }
    if z.im == 0.0 {
        return Err(UltraError::Domain(format!(
            "z must lie off the real axis, got {z}"
        )));
    }
    let cfg = QuadratureConfig {
        tail_strategy: TailStrategy::ExponentialMap,
        ..cfg.clone()
    };
    let kernel = |t: f64| Complex64::new(f.eval(t), 0.0) / (Complex64::new(t, 0.0) - z);
    let (lo, hi) = f.support();
    let near = z.im.abs() < NEAR_AXIS_IM;

    let mut value = Complex64::new(0.0, 0.0);
    if lo.is_finite() && hi.is_finite() {
        if near && z.re > lo && z.re < hi {
            value += integrate_finite(kernel, lo, z.re, &cfg)?.value;
            value += integrate_finite(kernel, z.re, hi, &cfg)?.value;
        } else {
            value += integrate_finite(kernel, lo, hi, &cfg)?.value;
        }
    } else {
        let split = if near { z.re } else { f.anchor() }.clamp(
            if lo.is_finite() { lo } else { f64::MIN },
            if hi.is_finite() { hi } else { f64::MAX },
        );
        if hi.is_finite() {
            value += integrate_finite(kernel, split, hi, &cfg)?.value;
        } else {
            value += integrate_semi_infinite(|u| kernel(split + u), 0.0, &cfg)?.value;
        }
        if lo.is_finite() {
            value += integrate_finite(kernel, lo, split, &cfg)?.value;
        } else {
            value += integrate_semi_infinite(|u| kernel(split - u), 0.0, &cfg)?.value;
        }
    }
    Ok(value * Complex64::new(0.0, -1.0 / (2.0 * PI)))
}

/// Max over both pairing lines of |F(z)| / |z|^degree for the declared
/// power-bound degree; finite and stable constants certify the growth class.
#[derive(Debug, Clone, Copy)]
pub struct PowerBoundDiagnostic {
    pub degree: i32,
    pub constant: f64,
    pub samples: usize,
}

pub fn power_bound_diagnostic(
    rep: &UltraRep,
    contour: &ContourSpec,
    t_max: f64,
    samples: usize,
) -> PowerBoundDiagnostic {
    let n = samples.max(3);
    let mut constant = 0.0f64;
    for sign in [1.0, -1.0] {
        let h = sign * contour.zeta();
        for i in 0..n {
            let t = -t_max + 2.0 * t_max * i as f64 / (n - 1) as f64;
            let z = Complex64::new(t, h);
            let c = rep.eval(z).norm() / z.norm().powi(rep.power_bound_degree);
            if c > constant {
                constant = c;
            }
        }
    }
    PowerBoundDiagnostic {
        degree: rep.power_bound_degree,
        constant,
        samples: 2 * n,
    }
}

/// |pair(F + P, phi) - pair(F, phi)| for a polynomial P: the added terms are
/// entire, so the two line integrals cancel and the residual is quadrature
/// noise.
pub fn pseudo_poly_invariance_check(
    rep: &UltraRep,
    poly: &[Complex64],
    phi: &TestFunction,
    contour: &ContourSpec,
    cfg: &QuadratureConfig,
) -> Result<f64, UltraError> {
    let plain = contour_pair(rep, phi, contour, cfg)?;
    let shifted = contour_pair(&rep.with_polynomial(poly), phi, contour, cfg)?;
    Ok((shifted.value - plain.value).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tight() -> QuadratureConfig {
        QuadratureConfig::with_tols(1e-12, 1e-10)
    }

    #[test]
    fn kernel_values_follow_the_half_plane_split() {
        let q = QParam::new(1.5).unwrap();
        let up = Complex64::new(0.0, 1.0);
        let down = Complex64::new(0.0, -1.0);
        // x = 2, k = i: base = 1 + 0.5*2 = 2, exponent -2.
        let v = eval_eq(&q, up, 2.0).unwrap();
        assert_relative_eq!(v.re, 0.25, max_relative = 1e-14);
        assert_eq!(v.im, 0.0);
        // H(0) = 1 on the surviving side.
        assert_eq!(eval_eq(&q, up, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eval_eq(&q, down, 0.0).unwrap(), Complex64::new(-1.0, 0.0));
        // The dead side is exactly zero.
        assert_eq!(eval_eq(&q, up, -1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(eval_eq(&q, down, 1.5).unwrap(), Complex64::new(0.0, 0.0));
        // Real k is out of domain.
        assert!(eval_eq(&q, Complex64::new(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn closed_form_matches_pinned_values() {
        let v = fq_closed_form(&QParam::new(1.5).unwrap(), Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let v = fq_closed_form(&QParam::new(1.9).unwrap(), Complex64::new(0.0, 2.0)).unwrap();
        assert!((v - Complex64::new(5.0, 0.0)).norm() < 1e-13);
        assert!(fq_closed_form(&QParam::new(1.5).unwrap(), Complex64::new(0.0, 0.0)).is_err());
        assert!(fq_closed_form(&QParam::new(1.5).unwrap(), Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn quadrature_integral_agrees_with_closed_form() {
        let cfg = QuadratureConfig::default();
        for qv in [1.1, 1.5, 1.9] {
            let q = QParam::new(qv).unwrap();
            for k in [
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(-2.0, 0.5),
            ] {
                let exact = fq_closed_form(&q, k).unwrap();
                let r = integrate_eq_over_x(&q, k, &cfg).unwrap();
                assert!(
                    (r.value - exact).norm() <= 1e-7 * exact.norm(),
                    "q={qv} k={k}: got {} want {exact}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn representative_reflects_antisymmetrically() {
        // Boundary values of a real functional: F(conj k) = -conj(F(k)).
        let q = QParam::new(1.3).unwrap();
        let k = Complex64::new(0.7, 0.4);
        let a = fq_closed_form(&q, k.conj()).unwrap();
        let b = -fq_closed_form(&q, k).unwrap().conj();
        assert!((a - b).norm() < 1e-15 * a.norm());

        let cfg = QuadratureConfig::default();
        let a = integrate_eq_over_x(&q, k.conj(), &cfg).unwrap().value;
        let b = -integrate_eq_over_x(&q, k, &cfg).unwrap().value.conj();
        assert!((a - b).norm() < 1e-7 * a.norm());
    }

    #[test]
    fn pairing_recovers_the_point_mass_weight() {
        let q = QParam::new(1.5).unwrap();
        let rep = UltraRep::delta_family(&q).unwrap();
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let r = contour_pair(&rep, &phi, &contour, &tight()).unwrap();
        let expected = 4.0 * PI;
        assert_relative_eq!(r.value.re, expected, max_relative = 1e-8);
        assert!(r.value.im.abs() < 1e-9);
    }

    #[test]
    fn pairing_is_contour_independent() {
        let q = QParam::new(1.2).unwrap();
        let rep = UltraRep::delta_family(&q).unwrap();
        let phi = TestFunction::parse_label("gauss:a=0.5,poly=1,0,1").unwrap();
        let contour_a = ContourSpec::new(0.5).unwrap();
        let contour_b = ContourSpec::new(2.0).unwrap();
        let a = contour_pair(&rep, &phi, &contour_a, &tight()).unwrap();
        let b = contour_pair(&rep, &phi, &contour_b, &tight()).unwrap();
        assert!(
            (a.value - b.value).norm() <= 1e-7 * a.value.norm(),
            "zeta=0.5 gives {}, zeta=2 gives {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn dirac_kernel_pairs_to_the_value_at_zero() {
        let rep = UltraRep::dirac();
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let r = contour_pair(&rep, &phi, &contour, &tight()).unwrap();
        assert_relative_eq!(r.value.re, 1.0, max_relative = 1e-9);
        assert!(r.value.im.abs() < 1e-10);
    }

    #[test]
    fn orientation_is_pinned_by_the_kernel_sign() {
        // +1/(2 pi i k) pairs to -phi(0); the Cauchy kernel carries the
        // minus sign that makes the pairing positive.
        let flipped = UltraRep::new(
            |k| Complex64::new(1.0, 0.0) / (2.0 * PI * Complex64::new(0.0, 1.0) * k),
            0.0,
            -1,
            "anti-dirac",
        )
        .unwrap();
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let r = contour_pair(&flipped, &phi, &contour, &tight()).unwrap();
        assert_relative_eq!(r.value.re, -1.0, max_relative = 1e-9);
    }

    #[test]
    fn vanishing_at_zero_pairs_to_zero() {
        let q = QParam::new(1.5).unwrap();
        let rep = UltraRep::delta_family(&q).unwrap();
        let phi = TestFunction::parse_label("gauss:a=1,poly=0,0,1").unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let r = contour_pair(&rep, &phi, &contour, &tight()).unwrap();
        assert!(r.value.norm() < 1e-8, "got {}", r.value);
    }

    #[test]
    fn polynomial_shifts_leave_pairings_unchanged() {
        let q = QParam::new(1.5).unwrap();
        let rep = UltraRep::delta_family(&q).unwrap();
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let poly = [Complex64::new(3.0, 0.0), Complex64::new(2.0, 0.0)];
        let res = pseudo_poly_invariance_check(&rep, &poly, &phi, &contour, &tight()).unwrap();
        assert!(res < 1e-8, "affine shift residual {res}");

        let cubic = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let res =
            pseudo_poly_invariance_check(&UltraRep::dirac(), &cubic, &phi, &contour, &tight())
                .unwrap();
        assert!(res < 1e-7, "cubic shift residual {res}");
    }

    #[test]
    fn contour_must_clear_the_strip() {
        let rep = UltraRep::new(|_| Complex64::new(0.0, 0.0), 0.5, 0, "wide strip").unwrap();
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(0.5).unwrap();
        assert!(contour_pair(&rep, &phi, &contour, &tight()).is_err());
        assert!(ContourSpec::new(0.0).is_err());
        assert!(ContourSpec::new(-1.0).is_err());
    }

    #[test]
    fn cauchy_transform_of_an_indicator_matches_the_log_formula() {
        let f = Density::uniform(-1.0, 1.0).unwrap();
        let cfg = QuadratureConfig::default();

        let v = cauchy_transform(&f, Complex64::new(0.0, 2.0), &cfg).unwrap();
        let expected = (f64::atan2(-2.0, 1.0) - f64::atan2(-2.0, -1.0)) / (4.0 * PI);
        assert_relative_eq!(v.re, expected, max_relative = 1e-9);
        assert!(v.im.abs() < 1e-10);

        // Near-axis split path: compare against the principal-log formula,
        // valid because t - z stays on one side of the cut.
        let z = Complex64::new(0.3, 0.05);
        let v = cauchy_transform(&f, z, &cfg).unwrap();
        let logs = (Complex64::new(1.0, 0.0) - z).ln() - (Complex64::new(-1.0, 0.0) - z).ln();
        let expected = logs * Complex64::new(0.0, -1.0 / (4.0 * PI));
        assert!(
            (v - expected).norm() < 1e-9 * expected.norm(),
            "got {v} want {expected}"
        );

        assert!(cauchy_transform(&f, Complex64::new(0.5, 0.0), &cfg).is_err());
    }

    #[test]
    fn cauchy_representative_pairs_to_the_density_integral() {
        let f = Density::gaussian(0.0, 1.0).unwrap();
        let cfg = QuadratureConfig::default();
        let rep = UltraRep::from_cauchy_transform(f, cfg.clone());
        let phi = TestFunction::gaussian(1.0).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let r = contour_pair(&rep, &phi, &contour, &cfg).unwrap();
        // \int N(0,1)(t) exp(-t^2) dt = 1/sqrt(3)
        let expected = 1.0 / 3.0f64.sqrt();
        assert_relative_eq!(r.value.re, expected, max_relative = 1e-7);
        assert!(r.value.im.abs() < 1e-8);
    }

    #[test]
    fn power_bound_constant_is_sharp_for_the_kernel() {
        let q = QParam::new(1.5).unwrap();
        let rep = UltraRep::delta_family(&q).unwrap();
        let contour = ContourSpec::new(1.0).unwrap();
        let diag = power_bound_diagnostic(&rep, &contour, 50.0, 401);
        assert_eq!(diag.degree, -1);
        // |F(k)| |k| = 1/(2-q) identically.
        assert_relative_eq!(diag.constant, 2.0, max_relative = 1e-12);
    }
}
