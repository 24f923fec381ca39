//! Weighted cross-entropy, sampling consistency loss and the two ways of
//! combining them, each with analytic partial derivatives.

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower clamp applied to probabilities before taking a logarithm.
pub const PROB_EPS: f64 = 1e-12;
/// Smoothing added to class frequencies by [`ClassWeights::inverse_sqrt_frequency`].
pub const FREQ_EPS: f64 = 0.02;

const NORM_TOL: f64 = 1e-9;

/// Per-class probabilities, non-negative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution(Vec<f64>);

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("class distribution is empty"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::invalid("class probabilities must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("class probabilities sum to {sum}, not 1")));
        }
        Ok(Self(probs))
    }

    /// Softmax of arbitrary finite logits.
    pub fn softmax(logits: &[f64]) -> Result<Self> {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        Self::new(exp.into_iter().map(|e| e / sum).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn n_classes(&self) -> usize {
        self.0.len()
    }
}

/// One-hot ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTarget(Vec<f64>);

impl ClassTarget {
    pub fn new(class: usize, n_classes: usize) -> Result<Self> {
        if class >= n_classes {
            return Err(Error::invalid(format!(
                "class {class} out of range for {n_classes} classes"
            )));
        }
        let mut v = vec![0.0; n_classes];
        v[class] = 1.0;
        Ok(Self(v))
    }

    pub fn from_one_hot(one_hot: Vec<f64>) -> Result<Self> {
        let ones = one_hot.iter().filter(|&&v| v == 1.0).count();
        let zeros = one_hot.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != one_hot.len() {
            return Err(Error::invalid(
                "target must have exactly one entry equal to 1 and the rest 0",
            ));
        }
        Ok(Self(one_hot))
    }

    pub fn one_hot(&self) -> &[f64] {
        &self.0
    }

    pub fn class(&self) -> usize {
        self.0.iter().position(|&v| v == 1.0).expect("validated one-hot")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights(Vec<f64>);

impl ClassWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid("class weights must be finite and strictly positive"));
        }
        Ok(Self(w))
    }

    pub fn uniform(n_classes: usize) -> Self {
        Self(vec![1.0; n_classes])
    }

    /// `1 / sqrt(f_c + FREQ_EPS)` from per-class point counts, rescaled to mean 1.
    pub fn inverse_sqrt_frequency(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if counts.is_empty() || total == 0 {
            return Err(Error::invalid("class counts must contain at least one point"));
        }
        let raw: Vec<f64> = counts
            .iter()
            .map(|&c| 1.0 / (c as f64 / total as f64 + FREQ_EPS).sqrt())
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        Self::new(raw.into_iter().map(|w| w / mean).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyParams {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl UncertaintyParams {
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma1.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!(
                "uncertainty parameters must be positive, got sigma1={sigma1}, sigma2={sigma2}"
            )));
        }
        Ok(Self { sigma1, sigma2 })
    }
}

/// A scalar loss and its gradient with respect to one input vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}

fn check_dims(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("{what}: dimension mismatch ({a} vs {b})")));
    }
    Ok(())
}

pub(crate) fn wce_eval(pred: &[f64], target: &[f64], weights: &[f64]) -> f64 {
    -pred
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((&p, &y), &w)| w * y * p.max(PROB_EPS).ln())
        .sum::<f64>()
}

pub(crate) fn wce_grad(pred: &[f64], target: &[f64], weights: &[f64]) -> Vec<f64> {
    pred.iter()
        .zip(target)
        .zip(weights)
        .map(|((&p, &y), &w)| if p < PROB_EPS { 0.0 } else { -w * y / p })
        .collect()
}

/// `-Σ w_c y_c ln(p_c)` with `p_c` clamped at [`PROB_EPS`]; gradient w.r.t. `p`.
pub fn weighted_ce(pred: &ClassDistribution, target: &ClassTarget, weights: &ClassWeights) -> Result<LossGrad> {
    check_dims("weighted cross-entropy", pred.n_classes(), target.0.len())?;
    check_dims("weighted cross-entropy", pred.n_classes(), weights.0.len())?;
    Ok(LossGrad {
        value: wce_eval(&pred.0, &target.0, &weights.0),
        grad: wce_grad(&pred.0, &target.0, &weights.0),
    })
}

pub(crate) fn scl_eval(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// L1 distance between the predictions of the two sampling branches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyLoss {
    pub value: f64,
    pub grad_pcb: Vec<f64>,
    pub grad_rs: Vec<f64>,
}

/// `Σ |p_pcb − p_rs|`. The subgradient at equal entries is 0.
pub fn sampling_consistency(p_pcb: &ClassDistribution, p_rs: &ClassDistribution) -> Result<ConsistencyLoss> {
    check_dims("sampling consistency", p_pcb.n_classes(), p_rs.n_classes())?;
    let grad_pcb: Vec<f64> = p_pcb.0.iter().zip(&p_rs.0).map(|(a, b)| sign(a - b)).collect();
    let grad_rs = grad_pcb.iter().map(|g| -g).collect();
    Ok(ConsistencyLoss {
        value: scl_eval(&p_pcb.0, &p_rs.0),
        grad_pcb,
        grad_rs,
    })
}

/// `l_wce + α·l_scl`.
pub fn total_fixed(l_wce: f64, l_scl: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    Ok(l_wce + alpha * l_scl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyLoss {
    pub value: f64,
    pub d_sigma1: f64,
    pub d_sigma2: f64,
    /// Coefficient of `l_wce` in the total, `1/σ₁²`.
    pub d_wce: f64,
    /// Coefficient of `l_scl` in the total, `1/σ₂²`.
    pub d_scl: f64,
}

pub(crate) fn uncertainty_eval(l_wce: f64, l_scl: f64, s1: f64, s2: f64) -> f64 {
    l_wce / (s1 * s1) + l_scl / (s2 * s2) + s1.ln_1p() + s2.ln_1p()
}

/// `l_wce/σ₁² + l_scl/σ₂² + ln(1+σ₁) + ln(1+σ₂)` with its partial derivatives.
pub fn total_uncertainty(l_wce: f64, l_scl: f64, params: &UncertaintyParams) -> Result<UncertaintyLoss> {
    UncertaintyParams::new(params.sigma1, params.sigma2)?;
    if !(l_wce >= 0.0 && l_scl >= 0.0) || !l_wce.is_finite() || !l_scl.is_finite() {
        return Err(Error::invalid("component losses must be finite and non-negative"));
    }
    let UncertaintyParams { sigma1: s1, sigma2: s2 } = *params;
    Ok(UncertaintyLoss {
        value: uncertainty_eval(l_wce, l_scl, s1, s2),
        d_sigma1: -2.0 * l_wce / (s1 * s1 * s1) + 1.0 / (1.0 + s1),
        d_sigma2: -2.0 * l_scl / (s2 * s2 * s2) + 1.0 / (1.0 + s2),
        d_wce: 1.0 / (s1 * s1),
        d_scl: 1.0 / (s2 * s2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    Fixed { alpha: f64 },
    Uncertainty(UncertaintyParams),
}

/// Inputs for one point: predictions of the two sampling branches, the ground
/// truth and the class weights. The cross-entropy term is taken on the PCB-RS
/// branch.
#[derive(Debug, Clone)]
pub struct LossInputs {
    pub p_pcb: ClassDistribution,
    pub p_rs: ClassDistribution,
    pub target: ClassTarget,
    pub weights: ClassWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossGrads {
    pub p_pcb: Vec<f64>,
    pub p_rs: Vec<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub l_wce: f64,
    pub l_scl: f64,
    pub l_total: f64,
    pub weighting: Weighting,
    /// Partial derivatives of `l_total`.
    pub grads: LossGrads,
}

pub fn loss_report(inputs: &LossInputs, weighting: Weighting) -> Result<LossReport> {
    let wce = weighted_ce(&inputs.p_pcb, &inputs.target, &inputs.weights)?;
    let scl = sampling_consistency(&inputs.p_pcb, &inputs.p_rs)?;
    let (l_total, c_wce, c_scl, sigma1, sigma2) = match weighting {
        Weighting::Fixed { alpha } => (total_fixed(wce.value, scl.value, alpha)?, 1.0, alpha, None, None),
        Weighting::Uncertainty(params) => {
            let u = total_uncertainty(wce.value, scl.value, &params)?;
            (u.value, u.d_wce, u.d_scl, Some(u.d_sigma1), Some(u.d_sigma2))
        }
    };
    let p_pcb = wce
        .grad
        .iter()
        .zip(&scl.grad_pcb)
        .map(|(gw, gs)| c_wce * gw + c_scl * gs)
        .collect();
    let p_rs = scl.grad_rs.iter().map(|g| c_scl * g).collect();
    let report = LossReport {
        l_wce: wce.value,
        l_scl: scl.value,
        l_total,
        weighting,
        grads: LossGrads {
            p_pcb,
            p_rs,
            sigma1,
            sigma2,
        },
    };
    Ok(report)
}
