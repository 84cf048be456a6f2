//! Tunneling-versus-thermal model and the ruggedness decision rule.
//!
//! Tunneling success is modelled as `P ~ exp(-alpha / sigma)` in the
//! gradient standard deviation `sigma`, thermal activation as
//! `exp(-dE / kT)`. Prefactors are normalized to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::LandscapeReport;

/// At or above this gradient standard deviation, annealing with tunneling is recommended.
pub const QUANTUM_THRESHOLD: f64 = 0.3;
/// At or below this, classical search is recommended.
pub const CLASSICAL_THRESHOLD: f64 = 0.2;
/// Largest problem recommended for direct annealing.
pub const ANNEALER_SIZE_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbParams {
    pub alpha: f64,
    pub kt: f64,
    pub delta_e: f64,
}

impl WkbParams {
    pub fn new(alpha: f64, kt: f64, delta_e: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("kT", kt), ("delta_e", delta_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { alpha, kt, delta_e })
    }
}

/// `exp(-alpha / sigma)`.
pub fn tunneling_probability(sigma: f64, params: &WkbParams) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok((-params.alpha / sigma).exp())
}

/// `exp(-delta_e / kt)`.
pub fn thermal_probability(delta_e: f64, kt: f64) -> Result<f64> {
    if !(kt > 0.0) {
        return Err(Error::invalid(format!("kT must be positive, got {kt}")));
    }
    if !(delta_e >= 0.0) {
        return Err(Error::invalid(format!("barrier height must be non-negative, got {delta_e}")));
    }
    Ok((-delta_e / kt).exp())
}

/// Crossover `alpha kT / dE`: tunneling dominates once `sigma` is well above it.
pub fn critical_sigma(params: &WkbParams) -> f64 {
    params.alpha * params.kt / params.delta_e
}

/// Least-squares fit of `ln P_success` against `1 / sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used, as `(1/sigma, ln p)`.
    pub points: Vec<(f64, f64)>,
    /// Input `(sigma, p)` pairs left out because `ln p` or `1/sigma` is undefined.
    pub excluded: Vec<(f64, f64)>,
}

impl FitResult {
    /// Barrier constant estimate, the negated slope.
    pub fn alpha(&self) -> f64 {
        -self.slope
    }
}

pub fn fit_wkb(points: &[(f64, f64)]) -> Result<FitResult> {
    let (usable, excluded): (Vec<_>, Vec<_>) = points
        .iter()
        .copied()
        .partition(|&(s, p)| s > 0.0 && s.is_finite() && p > 0.0 && p <= 1.0);
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points, need at least 3",
            usable.len()
        )));
    }
    let xy: Vec<(f64, f64)> = usable.iter().map(|&(s, p)| (1.0 / s, p.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share the same sigma".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = xy.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult { slope, intercept, r_squared, points: xy, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    QuantumRecommended,
    ClassicalRecommended,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub verdict: Verdict,
    pub sigma_measured: f64,
    /// The threshold that decided the verdict.
    pub threshold_used: f64,
    pub rationale: String,
}

/// Classifies a gradient standard deviation: `>= 0.3` quantum, `<= 0.2`
/// classical, otherwise marginal.
pub fn classify(sigma: f64) -> Verdict {
    if sigma >= QUANTUM_THRESHOLD {
        Verdict::QuantumRecommended
    } else if sigma <= CLASSICAL_THRESHOLD {
        Verdict::ClassicalRecommended
    } else {
        Verdict::Marginal
    }
}

pub fn recommend_sigma(sigma: f64, n: usize) -> Recommendation {
    let verdict = classify(sigma);
    let (threshold_used, mut rationale) = match verdict {
        Verdict::QuantumRecommended => (
            QUANTUM_THRESHOLD,
            format!("gradient std {sigma:.4} >= {QUANTUM_THRESHOLD}: rugged landscape with thin barriers, tunneling expected to help"),
        ),
        Verdict::ClassicalRecommended => (
            CLASSICAL_THRESHOLD,
            format!("gradient std {sigma:.4} <= {CLASSICAL_THRESHOLD}: smooth landscape, thermal or greedy search should suffice"),
        ),
        Verdict::Marginal => (
            QUANTUM_THRESHOLD,
            format!("gradient std {sigma:.4} between {CLASSICAL_THRESHOLD} and {QUANTUM_THRESHOLD}: no clear advantage either way"),
        ),
    };
    if n > ANNEALER_SIZE_LIMIT {
        rationale.push_str(&format!(
            "; {n} variables exceeds {ANNEALER_SIZE_LIMIT}, use a hybrid or decomposition approach"
        ));
    }
    Recommendation { verdict, sigma_measured: sigma, threshold_used, rationale }
}

/// Decision from a landscape report. Thresholds apply to the standard deviation `sigma_grad`.
pub fn recommend(report: &LandscapeReport, n: usize) -> Recommendation {
    recommend_sigma(report.sigma_grad, n)
}
