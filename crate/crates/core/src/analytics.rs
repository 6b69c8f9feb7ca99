//! Closed-form success probabilities of the recycling protocol and of the
//! two-copy reference protocol, with detector-efficiency corrections.
//!
//! Round `k` succeeds with unconditional probability
//!
//! ```text
//! P_1 = 2|ab|^2
//! P_k = 2|ab|^(2^k) / prod_{j=2..k} (|a|^(2^j) + |b|^(2^j))      (k >= 2)
//! ```
//!
//! The powers over- and underflow quickly, so everything is evaluated in
//! log space with the larger weight factored out of each bracket.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ecp::CoefficientPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEfficiency {
    /// Single-photon detector efficiency.
    pub eta_p: f64,
    /// Single-atom state detection efficiency.
    pub eta_a: f64,
}

impl DetectionEfficiency {
    pub const PERFECT: DetectionEfficiency = DetectionEfficiency { eta_p: 1.0, eta_a: 1.0 };

    pub fn new(eta_p: f64, eta_a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_p) || !(0.0..=1.0).contains(&eta_a) {
            return Err(Error::InvalidParameter("detector efficiencies must lie in [0, 1]"));
        }
        Ok(Self { eta_p, eta_a })
    }

    /// Probability that one photon detection and one atom detection both fire.
    pub fn pair(&self) -> f64 {
        self.eta_p * self.eta_a
    }
}

/// `|alpha|^2` and `|beta|^2` as `(hi, ln rho)` with `hi` the larger weight and
/// `rho = lo / hi <= 1`.
fn split_weights(c: &CoefficientPair) -> (f64, f64) {
    let (a2, b2) = (c.alpha.norm_sqr(), c.beta.norm_sqr());
    let (hi, lo) = if a2 >= b2 { (a2, b2) } else { (b2, a2) };
    (hi, (lo / hi).ln())
}

/// `ln(1 + rho^m)` given `ln rho`.
fn ln_one_plus_power(ln_rho: f64, m: f64) -> f64 {
    (m * ln_rho).exp().ln_1p()
}

fn check_round(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter("round index starts at 1"));
    }
    Ok(())
}

/// `2^(k-1)`: the power of `|.|^2` appearing in round `k`.
fn half_power(k: usize) -> f64 {
    2f64.powi(k as i32 - 1)
}

/// `sum_{j=2..k} ln(1 + rho^(2^(j-1)))`.
fn ln_bracket_product(ln_rho: f64, k: usize) -> f64 {
    (2..=k).map(|j| ln_one_plus_power(ln_rho, half_power(j))).sum()
}

// Writing each bracket as hi^m (1 + rho^m), the powers of `hi` telescope to
// hi^2 in every expression below; only powers of rho <= 1 remain.

/// Unconditional probability that the protocol first succeeds in round `k`.
pub fn round_probability(c: &CoefficientPair, k: usize) -> Result<f64> {
    check_round(k)?;
    let (hi, ln_rho) = split_weights(c);
    let ln_p = 2f64.ln() + 2.0 * hi.ln() + half_power(k) * ln_rho - ln_bracket_product(ln_rho, k);
    Ok(ln_p.exp())
}

/// Success probability of round `k` given that rounds `1..k` recycled:
/// `2|ab|^(2^k) / (|a|^(2^k) + |b|^(2^k))^2`.
pub fn conditional_round_probability(c: &CoefficientPair, k: usize) -> Result<f64> {
    check_round(k)?;
    let (_, ln_rho) = split_weights(c);
    let m = half_power(k);
    Ok((2f64.ln() + m * ln_rho - 2.0 * ln_one_plus_power(ln_rho, m)).exp())
}

/// Probability of still holding a recycled (unconcentrated) state after
/// `k` rounds: `(|a|^(2^(k+1)) + |b|^(2^(k+1))) / prod_{j=2..k} (...)`.
pub fn recycle_probability_after(c: &CoefficientPair, k: usize) -> Result<f64> {
    check_round(k)?;
    let (hi, ln_rho) = split_weights(c);
    let ln_r = 2.0 * hi.ln() + ln_one_plus_power(ln_rho, half_power(k + 1)) - ln_bracket_product(ln_rho, k);
    Ok(ln_r.exp())
}

/// `sum_{k=1..max_rounds} P_k`.
pub fn total_probability(c: &CoefficientPair, max_rounds: usize) -> Result<f64> {
    check_round(max_rounds)?;
    (1..=max_rounds).map(|k| round_probability(c, k)).sum()
}

/// Single-shot success of the two-copy reference protocol, `2|ab|^2`.
pub fn reference_probability(c: &CoefficientPair) -> f64 {
    2.0 * c.alpha.norm_sqr() * c.beta.norm_sqr()
}

/// Reference protocol with imperfect detectors: one photon detection and
/// `n_atoms` atom detections, `eta_p * eta_a^N * 2|ab|^2`.
pub fn imperfect_reference(c: &CoefficientPair, eff: &DetectionEfficiency, n_atoms: usize) -> f64 {
    eff.eta_p * eff.eta_a.powi(n_atoms as i32) * reference_probability(c)
}

/// Recycling protocol with imperfect detectors: `eta_p * eta_a * P_total`.
/// One detection pair is charged for the whole protocol, so the result does
/// not depend on the atom number.
pub fn imperfect_total(c: &CoefficientPair, eff: &DetectionEfficiency, max_rounds: usize) -> Result<f64> {
    Ok(eff.pair() * total_probability(c, max_rounds)?)
}

/// Per-round breakdown for `max_rounds` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityLedger {
    /// `P_1..P_K`, unconditional.
    pub per_round: Vec<f64>,
    /// Success probability given that round `k` is reached.
    pub conditional_per_round: Vec<f64>,
    pub total: f64,
    /// Probability of ending round `K` in a recycle branch.
    pub remaining: f64,
}

impl ProbabilityLedger {
    pub fn compute(c: &CoefficientPair, max_rounds: usize) -> Result<Self> {
        check_round(max_rounds)?;
        let per_round = (1..=max_rounds)
            .map(|k| round_probability(c, k))
            .collect::<Result<Vec<_>>>()?;
        let conditional_per_round = (1..=max_rounds)
            .map(|k| conditional_round_probability(c, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            total: per_round.iter().sum(),
            per_round,
            conditional_per_round,
            remaining: recycle_probability_after(c, max_rounds)?,
        })
    }

    /// Same ledger seen through detectors that must all fire once.
    pub fn with_efficiency(&self, eff: &DetectionEfficiency) -> Self {
        let f = eff.pair();
        Self {
            per_round: self.per_round.iter().map(|p| p * f).collect(),
            conditional_per_round: self.conditional_per_round.clone(),
            total: self.total * f,
            remaining: self.remaining,
        }
    }
}

/// Spacing of a figure grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxis {
    /// Uniform in `|alpha|^2`; symmetric under `|alpha|^2 -> 1 - |alpha|^2`
    /// and containing `|alpha|^2 = 1/2` for odd point counts.
    Weight,
    /// Uniform in the amplitude `alpha`.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub axis: GridAxis,
    pub lo: f64,
    pub hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 199,
            axis: GridAxis::Weight,
            lo: 0.005,
            hi: 0.995,
        }
    }
}

impl GridSpec {
    /// Grid values as `|alpha|^2`.
    pub fn alpha2_values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::InvalidParameter("a grid needs at least two points"));
        }
        if !(0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0) {
            return Err(Error::InvalidParameter("grid bounds must satisfy 0 <= lo < hi <= 1"));
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                let t = i as f64;
                let x = (self.lo * (last - t) + self.hi * t) / last;
                match self.axis {
                    GridAxis::Weight => x,
                    GridAxis::Amplitude => x * x,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure4Row {
    pub alpha: f64,
    pub alpha2: f64,
    pub p_total_ours: f64,
    pub p_reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure5Row {
    pub alpha: f64,
    pub alpha2: f64,
    /// Recycling protocol with imperfect detection.
    pub p_total_ours: f64,
    /// Reference protocol with perfect detection.
    pub p_reference: f64,
    pub p_ref_n5: f64,
    pub p_ref_n10: f64,
}

/// Ideal-detection comparison: total over `max_rounds` rounds vs the
/// reference protocol.
pub fn figure4_table(alpha2_grid: &[f64], max_rounds: usize) -> Result<Vec<Figure4Row>> {
    alpha2_grid
        .iter()
        .map(|&a2| {
            let c = CoefficientPair::from_alpha2(a2)?;
            Ok(Figure4Row {
                alpha: a2.sqrt(),
                alpha2: a2,
                p_total_ours: total_probability(&c, max_rounds)?,
                p_reference: reference_probability(&c),
            })
        })
        .collect()
}

/// Imperfect-detection comparison against the reference protocol at five
/// and ten atoms.
pub fn figure5_table(alpha2_grid: &[f64], eff: &DetectionEfficiency, max_rounds: usize) -> Result<Vec<Figure5Row>> {
    alpha2_grid
        .iter()
        .map(|&a2| {
            let c = CoefficientPair::from_alpha2(a2)?;
            Ok(Figure5Row {
                alpha: a2.sqrt(),
                alpha2: a2,
                p_total_ours: imperfect_total(&c, eff, max_rounds)?,
                p_reference: reference_probability(&c),
                p_ref_n5: imperfect_reference(&c, eff, 5),
                p_ref_n10: imperfect_reference(&c, eff, 10),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a2: f64) -> CoefficientPair {
        CoefficientPair::from_alpha2(a2).unwrap()
    }

    #[test]
    fn symmetric_pair_halves_each_round() {
        let c = pair(0.5);
        for k in 1..=6 {
            let p = round_probability(&c, k).unwrap();
            assert!((p - 0.5f64.powi(k as i32)).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn eighty_twenty_values() {
        let c = pair(0.8);
        assert!((round_probability(&c, 1).unwrap() - 0.32).abs() < 1e-12);
        // 2 * 0.16^2 / 0.68
        assert!((round_probability(&c, 2).unwrap() - 0.075_294_117_647_058_8).abs() < 1e-12);
        assert!((reference_probability(&c) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn round_zero_rejected() {
        assert!(round_probability(&pair(0.5), 0).is_err());
        assert!(total_probability(&pair(0.5), 0).is_err());
    }

    #[test]
    fn degenerate_pair_never_succeeds() {
        let c = pair(1.0);
        assert_eq!(reference_probability(&c), 0.0);
        assert_eq!(total_probability(&c, 5).unwrap(), 0.0);
        assert_eq!(recycle_probability_after(&c, 5).unwrap(), 1.0);
    }

    #[test]
    fn single_round_total_matches_reference() {
        let c = pair(0.3);
        assert!((total_probability(&c, 1).unwrap() - reference_probability(&c)).abs() < 1e-15);
    }

    #[test]
    fn imperfect_values() {
        let h = pair(0.5);
        let eff = DetectionEfficiency::new(0.9, 0.9).unwrap();
        assert!((imperfect_reference(&h, &eff, 5) - 0.265_720_5).abs() < 1e-6);
        assert!((imperfect_reference(&h, &eff, 10) - 0.156_905).abs() < 1e-6);
        assert!((imperfect_total(&h, &eff, 5).unwrap() - 0.784_687_5).abs() < 1e-12);
        let ratio = imperfect_reference(&h, &eff, 10) / imperfect_reference(&h, &eff, 5);
        assert!((ratio - 0.9f64.powi(5)).abs() < 1e-12);
        assert_eq!(
            imperfect_reference(&h, &DetectionEfficiency::PERFECT, 7),
            reference_probability(&h)
        );
        assert!(DetectionEfficiency::new(1.1, 0.5).is_err());
    }

    #[test]
    fn large_rounds_stay_finite() {
        let c = pair(0.8);
        for k in [20, 40, 60] {
            let p = round_probability(&c, k).unwrap();
            assert!(p.is_finite() && p >= 0.0);
        }
        assert!(total_probability(&pair(0.5), 60).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn weight_grid_is_symmetric_and_hits_half() {
        let g = GridSpec::default().alpha2_values().unwrap();
        assert_eq!(g.len(), 199);
        assert!((g[99] - 0.5).abs() < 1e-15);
        for i in 0..g.len() {
            assert!((g[i] + g[g.len() - 1 - i] - 1.0).abs() < 1e-15);
        }
        let amp = GridSpec {
            axis: GridAxis::Amplitude,
            ..GridSpec::default()
        };
        let a = amp.alpha2_values().unwrap();
        assert!((a[0] - 0.005 * 0.005).abs() < 1e-18);
        assert!(GridSpec { points: 1, ..GridSpec::default() }.alpha2_values().is_err());
    }
}
