//! The concentration protocol: state preparation, one heralded round, and
//! the recycling loop.
//!
//! Register layout during a round: the `n` GHZ atoms occupy sites `0..n` in
//! their original order, the auxiliary atom is appended at site `n`. The
//! photon reflects off the auxiliary atom's cavity first and then off the
//! cavity of GHZ atom 0. Detection removes the photon and the auxiliary atom,
//! so the corrected state again lives on sites `0..n`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::{self, Detection, DetectionOutcome};
use crate::state::{AtomLevel, BasisConfig, Polarization, PureState, NORM_TOLERANCE};

/// GHZ atom whose `gR` component receives the corrective phase flip.
pub const PHASE_FLIP_SITE: usize = 0;

/// Amplitudes `(alpha, beta)` of `alpha|gL gR..gR> + beta|gR gL..gL>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl CoefficientPair {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(alpha) || !finite(beta) {
            return Err(Error::NonFinite);
        }
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(n));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales an arbitrary nonzero pair to unit norm.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let scale = alpha.norm().max(beta.norm());
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let (a, b) = (alpha / scale, beta / scale);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        Self::new(a / n, b / n)
    }

    /// Real, nonnegative pair from the weight `|alpha|^2`.
    pub fn from_alpha2(alpha2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::InvalidParameter("|alpha|^2 must lie in [0, 1]"));
        }
        Self::new(
            Complex64::new(alpha2.sqrt(), 0.0),
            Complex64::new((1.0 - alpha2).sqrt(), 0.0),
        )
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn beta2(&self) -> f64 {
        self.beta.norm_sqr()
    }

    /// `alpha * beta == 0`: a product state with nothing to concentrate.
    pub fn is_degenerate(&self) -> bool {
        self.alpha.norm() == 0.0 || self.beta.norm() == 0.0
    }
}

/// `alpha|gL gR..gR> + beta|gR gL..gL>` on `n_atoms` atoms.
pub fn prepare_initial(c: &CoefficientPair, n_atoms: usize) -> Result<PureState> {
    if n_atoms < 2 {
        return Err(Error::InvalidParameter("a GHZ-class state needs at least two atoms"));
    }
    PureState::from_terms([(ghz_branch(AtomLevel::GL, n_atoms), c.alpha), (ghz_branch(AtomLevel::GR, n_atoms), c.beta)])
}

/// `first` on atom 0, the opposite level on the remaining atoms.
fn ghz_branch(first: AtomLevel, n_atoms: usize) -> BasisConfig {
    BasisConfig::atoms(core::iter::once(first).chain(core::iter::repeat_n(first.flipped(), n_atoms - 1)))
}

/// `(|gL gR..gR> + |gR gL..gL>)/sqrt2`, the target of a successful round.
pub fn maximally_entangled(n_atoms: usize) -> Result<PureState> {
    let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    prepare_initial(&CoefficientPair::new(h, h)?, n_atoms)
}

/// Auxiliary atom `beta|gL> + alpha|gR>` (coefficients swapped).
pub fn prepare_aux_atom(c: &CoefficientPair) -> Result<PureState> {
    PureState::from_terms([
        (BasisConfig::atoms([AtomLevel::GL]), c.beta),
        (BasisConfig::atoms([AtomLevel::GR]), c.alpha),
    ])
}

/// Coefficients of the state left after a recycle outcome:
/// `(alpha^2, beta^2) / sqrt(|alpha|^4 + |beta|^4)`.
pub fn recycled_coefficients(c: &CoefficientPair) -> Result<CoefficientPair> {
    if c.is_degenerate() {
        return Err(Error::DegenerateCoefficients);
    }
    // Scale by the larger modulus first so the squares cannot both underflow.
    let scale = c.alpha.norm().max(c.beta.norm());
    let (a, b) = (c.alpha / scale, c.beta / scale);
    CoefficientPair::normalized(a * a, b * b)
}

/// Photon `(|L> + |R>)/sqrt2`.
fn photon_plus() -> Result<PureState> {
    let one = Complex64::new(1.0, 0.0);
    PureState::from_terms([
        (BasisConfig::with_photon(Polarization::L, []), one),
        (BasisConfig::with_photon(Polarization::R, []), one),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Success,
    SuccessAfterFlip,
    Recycle,
    RecycleAfterFlip,
}

impl Classification {
    pub fn from_outcome(o: &DetectionOutcome) -> Self {
        match (o.photon, o.aux_atom) {
            (Polarization::V, AtomLevel::GR) => Classification::Success,
            (Polarization::V, AtomLevel::GL) => Classification::SuccessAfterFlip,
            (Polarization::H, AtomLevel::GR) => Classification::RecycleAfterFlip,
            _ => Classification::Recycle,
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, Classification::Success | Classification::SuccessAfterFlip)
    }

    pub fn needs_flip(self) -> bool {
        matches!(self, Classification::SuccessAfterFlip | Classification::RecycleAfterFlip)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Success => "success",
            Classification::SuccessAfterFlip => "success-after-flip",
            Classification::Recycle => "recycle",
            Classification::RecycleAfterFlip => "recycle-after-flip",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Classification::Success),
            "success-after-flip" => Ok(Classification::SuccessAfterFlip),
            "recycle" => Ok(Classification::Recycle),
            "recycle-after-flip" => Ok(Classification::RecycleAfterFlip),
            _ => Err(Error::InvalidParameter("unknown classification")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    /// Coefficients of the GHZ-class state entering the round.
    pub coefficients: CoefficientPair,
    pub outcome: DetectionOutcome,
    pub classification: Classification,
    /// Born weight of `outcome`, conditional on reaching this round.
    pub probability: f64,
    /// State of the GHZ atoms after detection and any phase flip.
    pub corrected_state: PureState,
    /// Present exactly for the recycle classifications.
    pub next_coefficients: Option<CoefficientPair>,
}

/// Photon, GHZ atoms and auxiliary atom just before the PBS.
pub fn pre_detection_state(state: &PureState, c: &CoefficientPair) -> Result<PureState> {
    let n = state.register_size();
    if n < 2 {
        return Err(Error::InvalidParameter("a GHZ-class state needs at least two atoms"));
    }
    let aux = n;
    let joint = photon_plus()?.tensor(state)?.tensor(&prepare_aux_atom(c)?)?;
    let reflected = gates::pass_two_cavities(&joint, aux, 0)?;
    let rotated = gates::atom_hadamard(&reflected, aux)?;
    gates::photon_qwp(&rotated)
}

fn finish_round(c: &CoefficientPair, detection: Detection) -> Result<RoundResult> {
    let classification = Classification::from_outcome(&detection.outcome);
    let corrected_state = if classification.needs_flip() {
        gates::phase_flip(&detection.post_state, PHASE_FLIP_SITE)?
    } else {
        detection.post_state
    };
    let next_coefficients = if classification.is_success() {
        None
    } else {
        Some(recycled_coefficients(c)?)
    };
    Ok(RoundResult {
        coefficients: *c,
        outcome: detection.outcome,
        classification,
        probability: detection.probability,
        corrected_state,
        next_coefficients,
    })
}

/// One heralded concentration round with sampled detection.
pub fn run_round<R: Rng + ?Sized>(state: &PureState, c: &CoefficientPair, rng: &mut R) -> Result<RoundResult> {
    if c.is_degenerate() {
        return Err(Error::DegenerateCoefficients);
    }
    let pre = pre_detection_state(state, c)?;
    let detection = gates::pbs_and_detect(&pre, state.register_size(), rng)?;
    finish_round(c, detection)
}

/// All outcome branches of one round with their exact Born weights.
pub fn round_branches(state: &PureState, c: &CoefficientPair) -> Result<Vec<RoundResult>> {
    if c.is_degenerate() {
        return Err(Error::DegenerateCoefficients);
    }
    let pre = pre_detection_state(state, c)?;
    gates::detection_branches(&pre, state.register_size())?
        .into_iter()
        .map(|d| finish_round(c, d))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalStatus {
    /// Heralded success in this (1-based) round.
    Succeeded { round: usize },
    /// No success within the rounds run. Fewer than the configured maximum
    /// are run when the recycled coefficients become degenerate.
    Exhausted { rounds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub rounds: Vec<RoundResult>,
    pub final_status: FinalStatus,
    pub final_state: PureState,
    /// Seed of the generator, when the transcript was produced from one.
    pub seed: Option<u64>,
}

impl ProtocolTranscript {
    pub fn success_round(&self) -> Option<usize> {
        match self.final_status {
            FinalStatus::Succeeded { round } => Some(round),
            FinalStatus::Exhausted { .. } => None,
        }
    }
}

/// Runs up to `max_rounds` rounds, feeding each recycle branch into the next
/// round with a fresh photon and auxiliary atom.
pub fn run_protocol<R: Rng + ?Sized>(
    c: &CoefficientPair,
    n_atoms: usize,
    max_rounds: usize,
    rng: &mut R,
) -> Result<ProtocolTranscript> {
    run_protocol_with(c, n_atoms, max_rounds, rng, |_, _| true)
}

/// [`run_protocol`] with a seeded ChaCha8 generator; the seed is recorded.
pub fn run_protocol_seeded(c: &CoefficientPair, n_atoms: usize, max_rounds: usize, seed: u64) -> Result<ProtocolTranscript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = run_protocol(c, n_atoms, max_rounds, &mut rng)?;
    t.seed = Some(seed);
    Ok(t)
}

/// Protocol loop with a per-round herald check. `heralded(round, rng)` runs
/// after each round's detection; returning `false` aborts the transcript
/// as exhausted.
pub(crate) fn run_protocol_with<R, F>(
    c: &CoefficientPair,
    n_atoms: usize,
    max_rounds: usize,
    rng: &mut R,
    mut heralded: F,
) -> Result<ProtocolTranscript>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> bool,
{
    if max_rounds < 1 {
        return Err(Error::InvalidParameter("at least one round is required"));
    }
    if c.is_degenerate() {
        return Err(Error::DegenerateCoefficients);
    }
    let mut state = prepare_initial(c, n_atoms)?;
    let mut coefficients = *c;
    let mut rounds = Vec::new();
    let mut status = FinalStatus::Exhausted { rounds: 0 };
    for round in 1..=max_rounds {
        let result = run_round(&state, &coefficients, rng)?;
        let success = result.classification.is_success();
        state = result.corrected_state.clone();
        let next = result.next_coefficients;
        rounds.push(result);
        if !heralded(round, rng) {
            status = FinalStatus::Exhausted { rounds: round };
            break;
        }
        if success {
            status = FinalStatus::Succeeded { round };
            break;
        }
        status = FinalStatus::Exhausted { rounds: round };
        match next {
            Some(n) if !n.is_degenerate() => coefficients = n,
            _ => break,
        }
    }
    Ok(ProtocolTranscript {
        rounds,
        final_status: status,
        final_state: state,
        seed: None,
    })
}
