//! Seeded trajectory sampling of the full protocol.
//!
//! Trial `i` draws from a ChaCha8 stream selected by `i` on top of the master
//! seed, so a trial's outcome depends only on `(master_seed, i)` and any
//! partition of the trial range reproduces the same counts.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{self, DetectionEfficiency};
use crate::ecp::{self, CoefficientPair};
use crate::error::{Error, Result};

/// Deviation (in standard errors) above which agreement is flagged.
pub const SOFT_SIGMA: f64 = 4.0;
/// Deviation (in standard errors) above which agreement fails.
pub const HARD_SIGMA: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossModel {
    /// Perfect detectors.
    None,
    /// One photon and one atom detection must fire for the whole protocol:
    /// a single `Bernoulli(eta_p * eta_a)` gate on otherwise successful trials.
    PaperGlobal,
    /// Every round's photon and atom detections must fire independently;
    /// a missed herald aborts the trial as a failure. Stricter than
    /// [`LossModel::PaperGlobal`] and not part of the closed-form model.
    CascadedPerRound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub coefficients: CoefficientPair,
    pub n_atoms: usize,
    pub max_rounds: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub loss_model: LossModel,
    pub efficiency: Option<DetectionEfficiency>,
}

impl SimulationConfig {
    /// Lossless configuration.
    pub fn ideal(coefficients: CoefficientPair, n_atoms: usize, max_rounds: usize, trials: u64, master_seed: u64) -> Self {
        Self {
            coefficients,
            n_atoms,
            max_rounds,
            trials,
            master_seed,
            loss_model: LossModel::None,
            efficiency: None,
        }
    }

    pub fn with_loss(self, loss_model: LossModel, efficiency: DetectionEfficiency) -> Self {
        Self {
            loss_model,
            efficiency: Some(efficiency),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("at least one trial is required"));
        }
        if self.max_rounds < 1 {
            return Err(Error::InvalidConfig("at least one round is required"));
        }
        if self.n_atoms < 2 {
            return Err(Error::InvalidConfig("at least two atoms are required"));
        }
        match (self.loss_model, self.efficiency) {
            (LossModel::None, Some(_)) => Err(Error::InvalidConfig("efficiency given without a loss model")),
            (LossModel::PaperGlobal | LossModel::CascadedPerRound, None) => {
                Err(Error::InvalidConfig("loss model requires detector efficiencies"))
            }
            _ => Ok(()),
        }?;
        if self.coefficients.is_degenerate() {
            return Err(Error::DegenerateCoefficients);
        }
        Ok(())
    }
}

/// Random stream of one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Runs one trial and returns the round in which it succeeded, if any.
pub fn run_trial(config: &SimulationConfig, trial: u64) -> Result<Option<usize>> {
    let mut rng = trial_rng(config.master_seed, trial);
    let c = &config.coefficients;
    match (config.loss_model, config.efficiency) {
        (LossModel::CascadedPerRound, Some(eff)) => {
            let t = ecp::run_protocol_with(c, config.n_atoms, config.max_rounds, &mut rng, |_, rng| {
                let photon = bernoulli(rng, eff.eta_p);
                let atom = bernoulli(rng, eff.eta_a);
                photon && atom
            })?;
            Ok(t.success_round())
        }
        (LossModel::PaperGlobal, Some(eff)) => {
            let t = ecp::run_protocol(c, config.n_atoms, config.max_rounds, &mut rng)?;
            Ok(t.success_round().filter(|_| bernoulli(&mut rng, eff.pair())))
        }
        _ => Ok(ecp::run_protocol(c, config.n_atoms, config.max_rounds, &mut rng)?.success_round()),
    }
}

/// Success counts per round for the trials in `range`.
pub fn count_successes(config: &SimulationConfig, range: Range<u64>) -> Result<Vec<u64>> {
    config.validate()?;
    let mut counts = vec![0u64; config.max_rounds];
    for trial in range {
        if let Some(round) = run_trial(config, trial)? {
            counts[round - 1] += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLedger {
    pub trials: u64,
    pub success_count_by_round: Vec<u64>,
    /// `count_k / trials`.
    pub empirical_p: Vec<f64>,
    /// `sqrt(p(1 - p) / trials)` at the empirical `p`.
    pub stderr: Vec<f64>,
}

impl EmpiricalLedger {
    pub fn from_counts(trials: u64, counts: Vec<u64>) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("at least one trial is required"));
        }
        if counts.iter().sum::<u64>() > trials {
            return Err(Error::InvalidConfig("more successes than trials"));
        }
        let n = trials as f64;
        let empirical_p: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let stderr = empirical_p.iter().map(|p| binomial_stderr(*p, n)).collect();
        Ok(Self {
            trials,
            success_count_by_round: counts,
            empirical_p,
            stderr,
        })
    }

    pub fn total_successes(&self) -> u64 {
        self.success_count_by_round.iter().sum()
    }

    pub fn empirical_total(&self) -> f64 {
        self.total_successes() as f64 / self.trials as f64
    }

    pub fn total_stderr(&self) -> f64 {
        binomial_stderr(self.empirical_total(), self.trials as f64)
    }
}

fn binomial_stderr(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).max(0.0).sqrt()
}

/// Sequential estimate over all trials.
pub fn estimate(config: &SimulationConfig) -> Result<EmpiricalLedger> {
    let counts = count_successes(config, 0..config.trials)?;
    EmpiricalLedger::from_counts(config.trials, counts)
}

/// Closed-form probability of first success in round `k` under the
/// configured loss model.
pub fn expected_round_probability(config: &SimulationConfig, k: usize) -> Result<f64> {
    let p = analytics::round_probability(&config.coefficients, k)?;
    let eta = config.efficiency.map(|e| e.pair()).unwrap_or(1.0);
    Ok(match config.loss_model {
        LossModel::None => p,
        LossModel::PaperGlobal => eta * p,
        LossModel::CascadedPerRound => eta.powi(k as i32) * p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Between the soft and hard bands.
    Flagged,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundAgreement {
    pub round: usize,
    pub empirical: f64,
    pub expected: f64,
    pub sigma: f64,
    pub z: f64,
    pub verdict: Verdict,
}

/// Compares each round against [`expected_round_probability`]. The band
/// uses the larger of the empirical and the analytic binomial standard
/// error so that rounds with zero observed counts are still judged.
pub fn agreement(config: &SimulationConfig, ledger: &EmpiricalLedger) -> Result<Vec<RoundAgreement>> {
    let n = ledger.trials as f64;
    ledger
        .empirical_p
        .iter()
        .enumerate()
        .map(|(i, &empirical)| {
            let round = i + 1;
            let expected = expected_round_probability(config, round)?;
            let sigma = ledger.stderr[i].max(binomial_stderr(expected, n));
            let diff = (empirical - expected).abs();
            let z = if sigma > 0.0 {
                diff / sigma
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let verdict = if z > HARD_SIGMA {
                Verdict::Fail
            } else if z >= SOFT_SIGMA {
                Verdict::Flagged
            } else {
                Verdict::Pass
            };
            Ok(RoundAgreement {
                round,
                empirical,
                expected,
                sigma,
                z,
                verdict,
            })
        })
        .collect()
}
