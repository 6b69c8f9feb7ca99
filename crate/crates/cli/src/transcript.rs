//! Tab-separated transcript lines, one per round:
//!
//! ```text
//! round  outcome  class  probability  alpha_re  alpha_im  beta_re  beta_im
//! ```
//!
//! The coefficients are the ones entering the round. Floats are written in
//! shortest round-trip form so a parsed line compares equal to the original.

use std::fmt;
use std::str::FromStr;

use faraday_ecp_core::ecp::{Classification, CoefficientPair, ProtocolTranscript, RoundResult};
use faraday_ecp_core::gates::DetectionOutcome;
use faraday_ecp_core::Complex64;

use crate::Error;

pub const HEADER: &str = "round\toutcome\tclass\tprobability\talpha_re\talpha_im\tbeta_re\tbeta_im";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranscriptLine {
    pub round: usize,
    pub outcome: DetectionOutcome,
    pub classification: Classification,
    pub probability: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl TranscriptLine {
    pub fn from_round(round: usize, r: &RoundResult) -> Self {
        Self {
            round,
            outcome: r.outcome,
            classification: r.classification,
            probability: r.probability,
            alpha: r.coefficients.alpha,
            beta: r.coefficients.beta,
        }
    }

    pub fn coefficients(&self) -> faraday_ecp_core::Result<CoefficientPair> {
        CoefficientPair::new(self.alpha, self.beta)
    }
}

pub fn lines(t: &ProtocolTranscript) -> Vec<TranscriptLine> {
    t.rounds
        .iter()
        .enumerate()
        .map(|(i, r)| TranscriptLine::from_round(i + 1, r))
        .collect()
}

impl fmt::Display for TranscriptLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.round,
            self.outcome,
            self.classification,
            self.probability,
            self.alpha.re,
            self.alpha.im,
            self.beta.re,
            self.beta.im
        )
    }
}

impl FromStr for TranscriptLine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Transcript(s.to_string());
        let fields: Vec<&str> = s.trim_end_matches(['\r', '\n']).split('\t').collect();
        let [round, outcome, class, prob, are, aim, bre, bim] = fields[..] else {
            return Err(bad());
        };
        let float = |x: &str| x.parse::<f64>().map_err(|_| bad());
        Ok(Self {
            round: round.parse().map_err(|_| bad())?,
            outcome: outcome.parse().map_err(|_| bad())?,
            classification: class.parse().map_err(|_| bad())?,
            probability: float(prob)?,
            alpha: Complex64::new(float(are)?, float(aim)?),
            beta: Complex64::new(float(bre)?, float(bim)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_field_count() {
        assert!("1\tV,gR\tsuccess\t0.5".parse::<TranscriptLine>().is_err());
        assert!("x\tV,gR\tsuccess\t0.5\t1\t0\t0\t0".parse::<TranscriptLine>().is_err());
        assert!("1\tQ,gR\tsuccess\t0.5\t1\t0\t0\t0".parse::<TranscriptLine>().is_err());
    }

    #[test]
    fn header_matches_field_count() {
        assert_eq!(HEADER.split('\t').count(), 8);
    }
}
