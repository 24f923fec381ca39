//! Finite-difference verification of the analytic loss gradients.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::losses::{
    self, loss_report, sampling_consistency, total_uncertainty, weighted_ce, ClassDistribution, ClassTarget,
    ClassWeights, LossInputs, UncertaintyParams, Weighting,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckConfig {
    pub trials: usize,
    pub seed: u64,
    /// Central-difference step.
    pub step: f64,
    /// Maximum accepted relative error.
    pub tolerance: f64,
    /// Coordinates where the two SCL inputs differ by less than this are
    /// skipped; the L1 term has a kink there.
    pub kink_margin: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            trials: 100,
            seed: 0,
            step: 1e-6,
            tolerance: 1e-4,
            kink_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub trials: usize,
    pub compared: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub config: GradCheckConfig,
    pub rows: Vec<CheckRow>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// `|a − b| / max(|a|, |b|, 1)`: relative for large gradients, absolute below 1.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

fn central<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    p[i] = x[i] + h;
    let up = f(&p);
    p[i] = x[i] - h;
    let down = f(&p);
    (up - down) / (2.0 * h)
}

struct Acc {
    row: CheckRow,
    tolerance: f64,
}

impl Acc {
    fn new(name: &str, trials: usize, tolerance: f64) -> Self {
        Acc {
            row: CheckRow {
                name: name.to_string(),
                trials,
                compared: 0,
                skipped: 0,
                max_rel_error: 0.0,
                passed: true,
            },
            tolerance,
        }
    }

    fn compare(&mut self, analytic: f64, numeric: f64) {
        let e = relative_error(analytic, numeric);
        self.row.compared += 1;
        if !(e <= self.row.max_rel_error) {
            self.row.max_rel_error = e;
        }
        if !(e < self.tolerance) {
            self.row.passed = false;
        }
    }

    fn exact(&mut self, got: f64, want: f64, tol: f64) {
        self.row.compared += 1;
        let e = (got - want).abs();
        self.row.max_rel_error = self.row.max_rel_error.max(e);
        if !(e <= tol) {
            self.row.passed = false;
        }
    }
}

fn random_distribution<R: Rng>(rng: &mut R, c: usize) -> ClassDistribution {
    let logits: Vec<f64> = (0..c).map(|_| rng.random_range(-2.0..2.0)).collect();
    ClassDistribution::softmax(&logits).expect("softmax of finite logits")
}

fn random_inputs<R: Rng>(rng: &mut R) -> LossInputs {
    let c = rng.random_range(2..=20);
    LossInputs {
        p_pcb: random_distribution(rng, c),
        p_rs: random_distribution(rng, c),
        target: ClassTarget::new(rng.random_range(0..c), c).expect("class in range"),
        weights: ClassWeights::new((0..c).map(|_| rng.random_range(0.1..10.0)).collect()).expect("positive"),
    }
}

fn random_sigmas<R: Rng>(rng: &mut R) -> UncertaintyParams {
    UncertaintyParams::new(rng.random_range(0.1..10.0), rng.random_range(0.1..10.0)).expect("positive")
}

/// Runs every analytic-vs-numeric comparison plus the closed-form examples.
pub fn run(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let mut rng = rng::stream(cfg.seed, rng::STREAM_LOSS_CHECK);
    let h = cfg.step;
    let mut wce = Acc::new("weighted_ce d/dp", cfg.trials, cfg.tolerance);
    let mut scl = Acc::new("sampling_consistency d/dp", cfg.trials, cfg.tolerance);
    let mut unc = Acc::new("total_uncertainty d/dsigma", cfg.trials, cfg.tolerance);
    let mut tot = Acc::new("total (uncertainty) d/dp", cfg.trials, cfg.tolerance);
    let mut fixed = Acc::new("total (fixed alpha) d/dp", cfg.trials, cfg.tolerance);

    for _ in 0..cfg.trials {
        let inp = random_inputs(&mut rng);
        let (p, q) = (inp.p_pcb.probs(), inp.p_rs.probs());
        let (y, w) = (inp.target.one_hot(), inp.weights.weights());

        let g = weighted_ce(&inp.p_pcb, &inp.target, &inp.weights)?;
        for i in 0..p.len() {
            wce.compare(g.grad[i], central(|x| losses::wce_eval(x, y, w), p, i, h));
        }

        let g = sampling_consistency(&inp.p_pcb, &inp.p_rs)?;
        for i in 0..p.len() {
            if (p[i] - q[i]).abs() < cfg.kink_margin.max(2.0 * h) {
                scl.row.skipped += 1;
                continue;
            }
            scl.compare(g.grad_pcb[i], central(|x| losses::scl_eval(x, q), p, i, h));
            scl.compare(g.grad_rs[i], central(|x| losses::scl_eval(p, x), q, i, h));
        }

        let l_wce = rng.random_range(0.0..10.0);
        let l_scl = rng.random_range(0.0..10.0);
        let s = random_sigmas(&mut rng);
        let u = total_uncertainty(l_wce, l_scl, &s)?;
        let sig = [s.sigma1, s.sigma2];
        let f = |x: &[f64]| losses::uncertainty_eval(l_wce, l_scl, x[0], x[1]);
        unc.compare(u.d_sigma1, central(f, &sig, 0, h));
        unc.compare(u.d_sigma2, central(f, &sig, 1, h));

        let s = random_sigmas(&mut rng);
        let r = loss_report(&inp, Weighting::Uncertainty(s))?;
        let total_at = |pp: &[f64], qq: &[f64], s1: f64, s2: f64| {
            losses::uncertainty_eval(losses::wce_eval(pp, y, w), losses::scl_eval(pp, qq), s1, s2)
        };
        for i in 0..p.len() {
            if (p[i] - q[i]).abs() < cfg.kink_margin.max(2.0 * h) {
                tot.row.skipped += 1;
                continue;
            }
            tot.compare(
                r.grads.p_pcb[i],
                central(|x| total_at(x, q, s.sigma1, s.sigma2), p, i, h),
            );
            tot.compare(
                r.grads.p_rs[i],
                central(|x| total_at(p, x, s.sigma1, s.sigma2), q, i, h),
            );
        }
        tot.compare(
            r.grads.sigma1.unwrap_or(f64::NAN),
            central(|x| total_at(p, q, x[0], x[1]), &[s.sigma1, s.sigma2], 0, h),
        );
        tot.compare(
            r.grads.sigma2.unwrap_or(f64::NAN),
            central(|x| total_at(p, q, x[0], x[1]), &[s.sigma1, s.sigma2], 1, h),
        );

        let alpha = rng.random_range(0.0..20.0);
        let r = loss_report(&inp, Weighting::Fixed { alpha })?;
        let total_at = |pp: &[f64], qq: &[f64]| losses::wce_eval(pp, y, w) + alpha * losses::scl_eval(pp, qq);
        for i in 0..p.len() {
            if (p[i] - q[i]).abs() < cfg.kink_margin.max(2.0 * h) {
                fixed.row.skipped += 1;
                continue;
            }
            fixed.compare(r.grads.p_pcb[i], central(|x| total_at(x, q), p, i, h));
            fixed.compare(r.grads.p_rs[i], central(|x| total_at(p, x), q, i, h));
        }
    }

    let mut closed = Acc::new("closed-form examples", 1, cfg.tolerance);
    let ln2 = std::f64::consts::LN_2;
    let half = ClassDistribution::new(vec![0.5, 0.5])?;
    let l = weighted_ce(&half, &ClassTarget::new(0, 2)?, &ClassWeights::new(vec![2.0, 1.0])?)?;
    closed.exact(l.value, 2.0 * ln2, 1e-12);
    let ones = UncertaintyParams::new(1.0, 1.0)?;
    closed.exact(total_uncertainty(0.0, 0.0, &ones)?.value, 2.0 * ln2, 1e-12);
    closed.exact(total_uncertainty(1.0, 0.5, &ones)?.value, 1.5 + 2.0 * ln2, 1e-12);
    closed.exact(losses::total_fixed(1.0, 0.2, 10.0)?, 3.0, 1e-12);
    closed.exact(losses::total_fixed(1.0, 0.2, 15.0)?, 4.0, 1e-12);

    Ok(GradCheckReport {
        config: *cfg,
        rows: vec![wce.row, scl.row, unc.row, tot.row, fixed.row, closed.row],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_check_passes_and_is_deterministic() {
        let cfg = GradCheckConfig::default();
        let a = run(&cfg).unwrap();
        assert!(a.passed(), "{a:#?}");
        assert_eq!(a, run(&cfg).unwrap());
        assert!(a.rows.iter().all(|r| r.compared > 0));
    }

    #[test]
    fn detects_a_broken_tolerance() {
        let cfg = GradCheckConfig {
            tolerance: 1e-30,
            trials: 5,
            ..Default::default()
        };
        assert!(!run(&cfg).unwrap().passed());
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(100.0, 99.0), 0.01);
        assert_eq!(relative_error(1e-3, 0.0), 1e-3);
    }
}
