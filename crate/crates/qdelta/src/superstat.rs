//! Superstatistics: average the Boltzmann weight exp(-beta E) over a mixing
//! density in the inverse temperature. A Gamma mixture reproduces the
//! q-exponential exactly, with q = 1 + 1/shape and beta_q = shape / rate;
//! this module evaluates the average by quadrature under either the plain
//! measure d beta or the scale-invariant measure d beta / beta, checks the
//! Gamma identity, and cross-checks it with seeded Monte Carlo.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::qcalc::{q_exp, QParam, QcalcError};
use crate::quadrature::{
    integrate_semi_infinite, QuadratureConfig, QuadratureError, TailStrategy,
};

/// Probe points for the origin exponent of the scale-invariant integrand.
const ORIGIN_PROBES: (f64, f64) = (1e-4, 1e-6);

#[derive(Debug, Error)]
pub enum SuperstatError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrand behaves like beta^{exponent:.3} at the origin, which the beta-inverse measure makes non-integrable")]
    SingularOrigin { exponent: f64 },
    #[error(transparent)]
    Qcalc(#[from] QcalcError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A density over inverse temperatures beta > 0. The Gamma form carries its
/// parameters so Monte Carlo can sample it; generic densities integrate only.
#[derive(Clone)]
pub struct MixingDensity {
    pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
    gamma: Option<(f64, f64)>,
}

impl std::fmt::Debug for MixingDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MixingDensity")
            .field("label", &self.label)
            .field("gamma", &self.gamma)
            .finish()
    }
}

impl MixingDensity {
    /// Gamma(shape, rate): rate^shape beta^{shape-1} e^{-rate beta} / Gamma(shape).
    pub fn gamma(shape: f64, rate: f64) -> Result<Self, SuperstatError> {
        if !(shape > 0.0) || !shape.is_finite() || !(rate > 0.0) || !rate.is_finite() {
            return Err(SuperstatError::Domain(format!(
                "Gamma mixing density needs positive finite shape and rate, got ({shape}, {rate})"
            )));
        }
        let ln_norm = shape * rate.ln() - ln_gamma(shape);
        let pdf = move |b: f64| {
            if b < 0.0 {
                0.0
            } else if b == 0.0 {
                // boundary limits, kept honest rather than clamped
                if shape > 1.0 {
                    0.0
                } else if shape == 1.0 {
                    rate
                } else {
                    f64::INFINITY
                }
            } else {
                (ln_norm + (shape - 1.0) * b.ln() - rate * b).exp()
            }
        };
        Ok(MixingDensity {
            pdf: Arc::new(pdf),
            label: format!("gamma:shape={shape},rate={rate}"),
            gamma: Some((shape, rate)),
        })
    }

    pub fn from_fn<F>(f: F, label: &str) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MixingDensity {
            pdf: Arc::new(f),
            label: label.to_string(),
            gamma: None,
        }
    }

    pub fn pdf(&self, beta: f64) -> f64 {
        (self.pdf)(beta)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gamma_parameters(&self) -> Option<(f64, f64)> {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    /// d beta
    Plain,
    /// d beta / beta
    Haar,
}

impl std::fmt::Display for AverageMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AverageMode::Plain => write!(f, "plain"),
            AverageMode::Haar => write!(f, "haar"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorResult {
    pub value: f64,
    pub mode: AverageMode,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// \int f(beta) e^{-beta E} d beta (plain) or the same against
/// d beta / beta (Haar). The Haar variant probes the origin exponent first
/// and refuses non-integrable weights instead of returning a large number.
pub fn generalized_factor(
    f: &MixingDensity,
    energy: f64,
    mode: AverageMode,
    cfg: &QuadratureConfig,
) -> Result<FactorResult, SuperstatError> {
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(SuperstatError::Domain(format!(
            "energy must be nonnegative and finite, got {energy}"
        )));
    }
    let weight = |b: f64| f.pdf(b) * (-b * energy).exp();
    if mode == AverageMode::Haar {
        let (b1, b2) = ORIGIN_PROBES;
        let (m1, m2) = (weight(b1) / b1, weight(b2) / b2);
        if m1 > 1e-300 && m2 > 1e-300 {
            let exponent = (m1 / m2).ln() / (b1 / b2).ln();
            if exponent <= -1.0 + 1e-9 {
                return Err(SuperstatError::SingularOrigin { exponent });
            }
        }
    }
    let cfg = QuadratureConfig {
        tail_strategy: TailStrategy::ExponentialMap,
        ..cfg.clone()
    };
    let r = match mode {
        AverageMode::Plain => {
            integrate_semi_infinite(|b| num_complex::Complex64::new(weight(b), 0.0), 0.0, &cfg)?
        }
        AverageMode::Haar => integrate_semi_infinite(
            |b| num_complex::Complex64::new(weight(b) / b, 0.0),
            0.0,
            &cfg,
        )?,
    };
    Ok(FactorResult {
        value: r.value.re,
        mode,
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub shape: f64,
    pub rate: f64,
    pub q: f64,
    pub beta_q: f64,
    pub energies: Vec<f64>,
    /// closed-form Gamma average vs q-exponential, max relative deviation
    pub max_rel_dev_identity: f64,
    /// quadrature average vs closed form, max relative deviation
    pub max_rel_dev_quadrature: f64,
}

/// Verify that the Gamma(shape, rate) plain average equals
/// (1 + E/rate)^{-shape} and equals e_q(-beta_q E) with q = 1 + 1/shape,
/// beta_q = shape/rate, over the given energy grid.
pub fn gamma_matches_qexp(
    shape: f64,
    rate: f64,
    energies: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IdentityReport, SuperstatError> {
    if energies.is_empty() {
        return Err(SuperstatError::Domain("energy grid is empty".into()));
    }
    let f = MixingDensity::gamma(shape, rate)?;
    let q = QParam::new(1.0 + 1.0 / shape)?;
    let beta_q = shape / rate;
    // The identity is checked to 1e-10, so the quadrature leg runs tighter
    // than typical caller tolerances.
    let tight = QuadratureConfig {
        abs_tol: cfg.abs_tol.min(1e-13),
        rel_tol: cfg.rel_tol.min(1e-12),
        ..cfg.clone()
    };
    let mut max_identity = 0.0f64;
    let mut max_quadrature = 0.0f64;
    for &energy in energies {
        if !(energy >= 0.0) || !energy.is_finite() {
            return Err(SuperstatError::Domain(format!(
                "energy must be nonnegative and finite, got {energy}"
            )));
        }
        let closed = (1.0 + energy / rate).powf(-shape);
        let via_qexp = q_exp(&q, -beta_q * energy);
        let via_quad = generalized_factor(&f, energy, AverageMode::Plain, &tight)?.value;
        max_identity = max_identity.max((closed - via_qexp).abs() / closed);
        max_quadrature = max_quadrature.max((via_quad - closed).abs() / closed);
    }
    Ok(IdentityReport {
        shape,
        rate,
        q: q.value(),
        beta_q,
        energies: energies.to_vec(),
        max_rel_dev_identity: max_identity,
        max_rel_dev_quadrature: max_quadrature,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Monte Carlo estimate of the plain average: sample beta from the Gamma
/// mixing density and average exp(-beta E). Fully determined by the seed.
pub fn mc_generalized_factor(
    f: &MixingDensity,
    energy: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, SuperstatError> {
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(SuperstatError::Domain(format!(
            "energy must be nonnegative and finite, got {energy}"
        )));
    }
    if samples < 2 {
        return Err(SuperstatError::Domain(format!(
            "need at least 2 samples for a standard error, got {samples}"
        )));
    }
    let (shape, rate) = f.gamma_parameters().ok_or_else(|| {
        SuperstatError::Domain(format!(
            "mixing density '{}' has no sampler; Monte Carlo needs the Gamma form",
            f.label()
        ))
    })?;
    let dist = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| SuperstatError::Domain(format!("Gamma sampler rejected parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..samples {
        let beta: f64 = dist.sample(&mut rng);
        let w = (-beta * energy).exp();
        sum += w;
        sumsq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (variance / n).sqrt(),
        samples,
        seed,
    })
}
