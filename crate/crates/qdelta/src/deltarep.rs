//! The epsilon-regularized family I_eps(k): the x-integral of the q-deformed
//! plane wave split between the half-planes k +/- i eps. Closed form it is a
//! Lorentzian profile of total mass 2 pi / (2 - q) for every eps, and paired
//! against test functions it converges to (2 pi / (2 - q)) phi(0) at first
//! order in eps. A convergence sweep tabulates that approach over an eps
//! schedule and fits the observed order.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::qcalc::{QParam, QcalcError};
use crate::quadrature::{
    integrate_finite, integrate_semi_infinite_analytic, PairingResult, QuadratureConfig,
    QuadratureError,
};
use crate::testfns::TestFunction;

pub const DEFAULT_EPSILON_SCHEDULE: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

#[derive(Debug, Error)]
pub enum DeltaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Qcalc(#[from] QcalcError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Deformation parameter plus the regularization offset eps > 0.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedFamily {
    q: QParam,
    epsilon: f64,
}

impl RegularizedFamily {
    pub fn new(q: QParam, epsilon: f64) -> Result<Self, DeltaError> {
        q.require_delta_range()?;
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(DeltaError::Domain(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(RegularizedFamily { q, epsilon })
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// 2 pi / (2 - q), the eps-independent total mass and the weight of the
    /// limiting point mass.
    pub fn mass_constant(&self) -> f64 {
        mass_constant(&self.q)
    }
}

pub fn mass_constant(q: &QParam) -> f64 {
    2.0 * PI / (2.0 - q.value())
}

/// The algebraic simplification of the two half-plane terms:
/// (2 / (2 - q)) eps / (k^2 + eps^2).
pub fn lorentzian_profile(fam: &RegularizedFamily, k: f64) -> f64 {
    let eps = fam.epsilon;
    (2.0 / (2.0 - fam.q.value())) * eps / (k * k + eps * eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// A real-valued integral with its quadrature diagnostics; closed-form
/// evaluations report zero evaluations and a rounding-level estimate.
#[derive(Debug, Clone, Copy)]
pub struct RealResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn antiderivative_exponents(qv: f64) -> (f64, f64) {
    (1.0 / (1.0 - qv), (2.0 - qv) / (1.0 - qv))
}

/// I_eps(k) for real k, by either path. The closed form sums the two
/// antiderivative boundary terms; the quadrature path integrates twice the
/// real part of the upper-half integrand over [0, inf) with its exact
/// analytic tail. The imaginary residue is asserted below 1e-10 relative.
pub fn regularized_integral(
    fam: &RegularizedFamily,
    k: f64,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<RealResult, DeltaError> {
    if !k.is_finite() {
        return Err(DeltaError::Domain(format!("k must be finite, got {k}")));
    }
    let qv = fam.q.value();
    let eps = fam.epsilon;
    match method {
        Method::ClosedForm => {
            let denom = (2.0 - qv) * Complex64::new(0.0, 1.0);
            let upper = -Complex64::new(1.0, 0.0) / (denom * Complex64::new(k, eps));
            let lower = Complex64::new(1.0, 0.0) / (denom * Complex64::new(k, -eps));
            let total = upper + lower;
            assert!(
                total.im.abs() <= 1e-10 * total.norm(),
                "imaginary residue {} survived the conjugate pair at k={k}",
                total.im
            );
            Ok(RealResult {
                value: total.re,
                error_estimate: 8.0 * f64::EPSILON * (upper.norm() + lower.norm()),
                evaluations: 0,
            })
        }
        Method::Quadrature => {
            let kappa = Complex64::new(k, eps);
            let (e1, e2) = antiderivative_exponents(qv);
            let denom = (2.0 - qv) * Complex64::new(0.0, 1.0) * kappa;
            let base =
                move |x: f64| Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0) * kappa * ((1.0 - qv) * x);
            // The lower-half term is the pointwise conjugate for real k, so
            // the full line collapses to twice the real part on [0, inf).
            let integrand = move |x: f64| Complex64::new(2.0 * base(x).powf(e1).re, 0.0);
            let tail = move |x: f64| {
                let upper_tail = -base(x).powf(e2) / denom;
                Complex64::new(2.0 * upper_tail.re, 0.0)
            };
            let split = (10.0 / ((qv - 1.0) * kappa.norm())).max(1.0);
            let r = integrate_semi_infinite_analytic(integrand, 0.0, split, tail, cfg)?;
            assert!(
                r.value.im.abs() <= 1e-10 * r.value.norm(),
                "imaginary residue {} survived the folded integrand at k={k}",
                r.value.im
            );
            Ok(RealResult {
                value: r.value.re,
                error_estimate: r.error_estimate,
                evaluations: r.evaluations,
            })
        }
    }
}

/// Integrate I_eps over the real k-line: the Lorentzian mass
/// 2 pi / (2 - q), independent of eps. The peak region is done adaptively
/// and the wings by the exact arctangent tail.
pub fn total_mass(fam: &RegularizedFamily, cfg: &QuadratureConfig) -> Result<RealResult, DeltaError> {
    let eps = fam.epsilon;
    let scale = 2.0 / (2.0 - fam.q.value());
    let cut = (10.0 * eps).max(1.0);
    let profile = |k: f64| Complex64::new(lorentzian_profile(fam, k), 0.0);
    let left = integrate_finite(profile, -cut, 0.0, cfg)?;
    let right = integrate_finite(profile, 0.0, cut, cfg)?;
    // \int_cut^inf eps/(k^2+eps^2) dk per wing
    let wing = scale * (PI / 2.0 - (cut / eps).atan());
    Ok(RealResult {
        value: left.value.re + right.value.re + 2.0 * wing,
        error_estimate: left.error_estimate + right.error_estimate,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// Pair I_eps against a test function on the real line. The Gaussian decay
/// of the test function sets a truncation radius where the discarded tail
/// dips below the absolute tolerance; the eps-peak at the origin sits on a
/// panel boundary.
pub fn delta_pair(
    fam: &RegularizedFamily,
    phi: &TestFunction,
    cfg: &QuadratureConfig,
) -> Result<PairingResult, DeltaError> {
    let a = phi.decay_rate();
    let d = phi.polynomial_degree() as f64;
    let ln_inv = (1.0 / cfg.abs_tol.max(f64::MIN_POSITIVE)).ln().max(1.0);
    let mut radius = (ln_inv / a).sqrt();
    for _ in 0..4 {
        radius = ((ln_inv + d * (1.0 + radius).ln()) / a).sqrt();
    }
    let radius = radius.max(1.0) + 10.0 * fam.epsilon;
    let integrand = |k: f64| phi.eval(Complex64::new(k, 0.0)) * lorentzian_profile(fam, k);
    let left = integrate_finite(integrand, -radius, 0.0, cfg)?;
    let right = integrate_finite(integrand, 0.0, radius, cfg)?;
    Ok(PairingResult {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// Finite truncation of the unregularized x-integral at real k: the
/// antiderivative difference across [-L, L]. Exploratory; it oscillates in k
/// and decays only algebraically in L instead of converging to the
/// regularized limit.
pub fn truncated_integral(q: &QParam, k: f64, ell: f64) -> Result<Complex64, DeltaError> {
    q.require_delta_range()?;
    if !k.is_finite() {
        return Err(DeltaError::Domain(format!("k must be finite, got {k}")));
    }
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(DeltaError::Domain(format!(
            "truncation length must be positive and finite, got {ell}"
        )));
    }
    let qv = q.value();
    if ((qv - 1.0) * k * ell).abs() < 1e-12 {
        // k -> 0 limit: the integrand is 1 across the window.
        return Ok(Complex64::new(2.0 * ell, 0.0));
    }
    let (_, e2) = antiderivative_exponents(qv);
    let denom = (2.0 - qv) * Complex64::new(0.0, 1.0) * k;
    let anti = |x: f64| {
        (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0) * k * ((1.0 - qv) * x)).powf(e2)
            / denom
    };
    Ok(anti(ell) - anti(-ell))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub value: f64,
    pub abs_error: f64,
    pub slope_running: Option<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub q: f64,
    pub testfn: String,
    pub limit: f64,
    pub fitted_slope: Option<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,value,abs_error,slope_running,evaluations\n");
        for row in &self.rows {
            let slope = row
                .slope_running
                .map(|s| format!("{s:.16e}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{}\n",
                row.epsilon, row.value, row.abs_error, slope, row.evaluations
            ));
        }
        out
    }

    pub fn converged_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.converged).count()
    }
}

fn sweep_row(
    fam: &RegularizedFamily,
    phi: &TestFunction,
    limit: Complex64,
    cfg: &QuadratureConfig,
) -> Result<SweepRow, DeltaError> {
    let (value, evaluations, converged) = match delta_pair(fam, phi, cfg) {
        Ok(r) => (r.value, r.evaluations, true),
        Err(DeltaError::Quadrature(QuadratureError::Failure {
            value,
            error_estimate: _,
            evaluations,
        })) => (value, evaluations, false),
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        epsilon: fam.epsilon,
        value: value.re,
        abs_error: (value - limit).norm(),
        slope_running: None,
        evaluations,
        converged,
    })
}

/// Pair I_eps with the test function for each eps in the schedule and fit
/// the log-log error slope against the limit (2 pi / (2 - q)) phi(0).
/// Rows whose quadrature ran out of budget are kept with their partial
/// values and flagged unconverged. `threads` > 1 distributes rows across
/// scoped worker threads; the table is identical for any thread count.
pub fn convergence_sweep(
    q: &QParam,
    phi: &TestFunction,
    schedule: &[f64],
    cfg: &QuadratureConfig,
    threads: usize,
) -> Result<SweepTable, DeltaError> {
    q.require_delta_range()?;
    if schedule.is_empty() {
        return Err(DeltaError::Domain("epsilon schedule is empty".into()));
    }
    let families: Vec<RegularizedFamily> = schedule
        .iter()
        .map(|&eps| RegularizedFamily::new(*q, eps))
        .collect::<Result<_, _>>()?;
    let limit = mass_constant(q) * phi.value_at_zero();

    let n = families.len();
    let workers = threads.max(1).min(n);
    let mut rows: Vec<SweepRow> = Vec::with_capacity(n);
    if workers == 1 {
        for fam in &families {
            rows.push(sweep_row(fam, phi, limit, cfg)?);
        }
    } else {
        let slots: Vec<Mutex<Option<Result<SweepRow, DeltaError>>>> =
            (0..n).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let out = sweep_row(&families[i], phi, limit, cfg);
                    *slots[i].lock().expect("sweep slot poisoned") = Some(out);
                });
            }
        });
        for slot in slots {
            rows.push(
                slot.into_inner()
                    .expect("sweep slot poisoned")
                    .expect("worker filled every claimed slot")?,
            );
        }
    }

    for i in 1..rows.len() {
        let (prev, cur) = (rows[i - 1], rows[i]);
        if prev.converged
            && cur.converged
            && prev.abs_error > 0.0
            && cur.abs_error > 0.0
            && prev.epsilon != cur.epsilon
        {
            rows[i].slope_running =
                Some((prev.abs_error / cur.abs_error).ln() / (prev.epsilon / cur.epsilon).ln());
        }
    }

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged && r.abs_error > 0.0)
        .map(|r| (r.epsilon.ln(), r.abs_error.ln()))
        .collect();
    let fitted_slope = if pts.len() < 2 {
        None
    } else {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            None
        } else {
            Some(sxy / sxx)
        }
    };

    Ok(SweepTable {
        q: q.value(),
        testfn: phi.label().to_string(),
        limit: limit.re,
        fitted_slope,
        rows,
    })
}
