//! The optical and atomic operations of one concentration round.
//!
//! Register addressing is explicit: every gate takes the atom sites it acts
//! on. The photon is the single photon site of the state.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::cavity::{CavityParams, PhasePair};
use crate::error::{Error, Result};
use crate::state::{AtomLevel, Matrix2, PhotonBasis, Polarization, PureState, Site, SiteValue};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const H: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);

/// `|0> -> (|0> + |1>)/sqrt2`, `|1> -> (|0> - |1>)/sqrt2`.
pub const HADAMARD: Matrix2 = [[H, H], [H, Complex64::new(-FRAC_1_SQRT_2, 0.0)]];

/// `|gR> -> -|gR>`.
pub const PHASE_FLIP: Matrix2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];

/// Phase factors acquired by a reflected photon, indexed by the photon
/// polarization and the atom's ground sublevel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaradayGate {
    /// `|L>|gL>`
    pub phase_ll: Complex64,
    /// `|R>|gL>`
    pub phase_rl: Complex64,
    /// `|L>|gR>`
    pub phase_lr: Complex64,
    /// `|R>|gR>`
    pub phase_rr: Complex64,
}

impl FaradayGate {
    /// The resonant operating point: `-1` when the photon couples to the
    /// atom's transition, `i` when it only sees the empty cavity.
    pub const IDEAL: FaradayGate = FaradayGate {
        phase_ll: Complex64::new(-1.0, 0.0),
        phase_rl: Complex64::new(0.0, 1.0),
        phase_lr: Complex64::new(0.0, 1.0),
        phase_rr: Complex64::new(-1.0, 0.0),
    };

    /// `L` couples to `gL` and `R` to `gR` (phase `phi`); the crossed pairs
    /// see the empty cavity (phase `phi_0`).
    pub fn from_phases(ph: &PhasePair) -> Self {
        let coupled = Complex64::from_polar(1.0, ph.phi);
        let empty = Complex64::from_polar(1.0, ph.phi_0);
        Self {
            phase_ll: coupled,
            phase_rl: empty,
            phase_lr: empty,
            phase_rr: coupled,
        }
    }

    /// Pure-phase approximation of the reflection at `p`.
    pub fn from_cavity(p: &CavityParams) -> Result<Self> {
        Ok(Self::from_phases(&PhasePair::from_params(p)?))
    }

    pub fn factor(&self, photon: Polarization, atom: AtomLevel) -> Result<Complex64> {
        match (photon, atom) {
            (Polarization::L, AtomLevel::GL) => Ok(self.phase_ll),
            (Polarization::R, AtomLevel::GL) => Ok(self.phase_rl),
            (Polarization::L, AtomLevel::GR) => Ok(self.phase_lr),
            (Polarization::R, AtomLevel::GR) => Ok(self.phase_rr),
            _ => Err(Error::Basis("Faraday interaction needs a circularly polarized photon")),
        }
    }

    pub fn max_modulus_deviation(&self) -> f64 {
        [self.phase_ll, self.phase_rl, self.phase_lr, self.phase_rr]
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn require_circular(s: &PureState) -> Result<()> {
    match s.photon_basis() {
        None => Err(Error::PhotonAbsent),
        Some(PhotonBasis::Linear) => Err(Error::Basis("photon already in the H/V basis")),
        Some(PhotonBasis::Circular) => Ok(()),
    }
}

fn require_atom(s: &PureState, site: usize) -> Result<()> {
    if site >= s.register_size() {
        return Err(Error::InvalidSite {
            site,
            size: s.register_size(),
        });
    }
    Ok(())
}

/// Reflects the photon off the cavity holding the atom at `atom_site`.
/// Diagonal in the product basis, so the term count never changes.
pub fn faraday_interact(s: &PureState, atom_site: usize, gate: &FaradayGate) -> Result<PureState> {
    require_circular(s)?;
    require_atom(s, atom_site)?;
    let mut failure = None;
    let out = s.map_diagonal(|c| {
        let photon = c.photon.expect("photon present");
        match gate.factor(photon, c.atoms[atom_site]) {
            Ok(f) => f,
            Err(e) => {
                failure = Some(e);
                ONE
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// The photon reflects off the cavity of `atom_a` and then of `atom_b`,
/// both at the ideal operating point.
pub fn pass_two_cavities(s: &PureState, atom_a: usize, atom_b: usize) -> Result<PureState> {
    pass_two_cavities_with(s, atom_a, atom_b, &FaradayGate::IDEAL)
}

pub fn pass_two_cavities_with(
    s: &PureState,
    atom_a: usize,
    atom_b: usize,
    gate: &FaradayGate,
) -> Result<PureState> {
    if atom_a == atom_b {
        return Err(Error::Shape("the two cavities must hold different atoms"));
    }
    let first = faraday_interact(s, atom_a, gate)?;
    faraday_interact(&first, atom_b, gate)
}

/// Hadamard on one atom, driven by an external classical field.
pub fn atom_hadamard(s: &PureState, atom_site: usize) -> Result<PureState> {
    s.apply_single_site_unitary(Site::Atom(atom_site), &HADAMARD)
}

/// Wave plate taking `L -> (H + V)/sqrt2` and `R -> (H - V)/sqrt2`.
pub fn photon_qwp(s: &PureState) -> Result<PureState> {
    require_circular(s)?;
    s.apply_photon_basis_change(&HADAMARD, PhotonBasis::Linear)
}

/// `|gR> -> -|gR>` on one atom.
pub fn phase_flip(s: &PureState, atom_site: usize) -> Result<PureState> {
    s.apply_single_site_unitary(Site::Atom(atom_site), &PHASE_FLIP)
}

/// Joint detector click pattern: the photon's PBS port and the auxiliary
/// atom's level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionOutcome {
    /// `H` (transmitted) or `V` (reflected).
    pub photon: Polarization,
    pub aux_atom: AtomLevel,
}

impl DetectionOutcome {
    pub const ALL: [DetectionOutcome; 4] = [
        DetectionOutcome { photon: Polarization::V, aux_atom: AtomLevel::GR },
        DetectionOutcome { photon: Polarization::V, aux_atom: AtomLevel::GL },
        DetectionOutcome { photon: Polarization::H, aux_atom: AtomLevel::GL },
        DetectionOutcome { photon: Polarization::H, aux_atom: AtomLevel::GR },
    ];

    fn from_values(values: &[SiteValue]) -> Result<Self> {
        match values {
            [SiteValue::Photon(p @ (Polarization::H | Polarization::V)), SiteValue::Atom(a)] => {
                Ok(Self {
                    photon: *p,
                    aux_atom: *a,
                })
            }
            _ => Err(Error::Basis("detection requires an H/V photon")),
        }
    }

    fn values(&self) -> [SiteValue; 2] {
        [SiteValue::Photon(self.photon), SiteValue::Atom(self.aux_atom)]
    }
}

impl fmt::Display for DetectionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.photon, self.aux_atom)
    }
}

impl FromStr for DetectionOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, a) = s
            .split_once(',')
            .ok_or(Error::InvalidParameter("detection outcome must look like `V,gR`"))?;
        let photon = match p.trim() {
            "H" => Polarization::H,
            "V" => Polarization::V,
            _ => return Err(Error::InvalidParameter("photon outcome must be H or V")),
        };
        let aux_atom = match a.trim() {
            "gL" => AtomLevel::GL,
            "gR" => AtomLevel::GR,
            _ => return Err(Error::InvalidParameter("atom outcome must be gL or gR")),
        };
        Ok(Self { photon, aux_atom })
    }
}

/// A heralded detection and the state left on the remaining atoms.
#[derive(Debug, Clone)]
pub struct Detection {
    pub outcome: DetectionOutcome,
    pub probability: f64,
    /// Photon and auxiliary atom removed; remaining atoms keep their order.
    pub post_state: PureState,
}

fn require_linear(s: &PureState) -> Result<()> {
    match s.photon_basis() {
        None => Err(Error::PhotonAbsent),
        Some(PhotonBasis::Circular) => Err(Error::Basis("photon must pass the wave plate before the PBS")),
        Some(PhotonBasis::Linear) => Ok(()),
    }
}

/// PBS plus photon and atom detectors. The detected photon and auxiliary
/// atom leave the register.
pub fn pbs_and_detect<R: Rng + ?Sized>(s: &PureState, aux_atom_site: usize, rng: &mut R) -> Result<Detection> {
    require_linear(s)?;
    let sites = [Site::Photon, Site::Atom(aux_atom_site)];
    let record = s.measure(&sites, rng)?;
    Ok(Detection {
        outcome: DetectionOutcome::from_values(&record.outcome)?,
        probability: record.probability,
        post_state: record.post_state.detach(&sites)?,
    })
}

/// Every detection branch with nonzero weight, without sampling.
pub fn detection_branches(s: &PureState, aux_atom_site: usize) -> Result<Vec<Detection>> {
    require_linear(s)?;
    let sites = [Site::Photon, Site::Atom(aux_atom_site)];
    let mut out = Vec::with_capacity(4);
    for outcome in DetectionOutcome::ALL {
        match s.project(&sites, &outcome.values()) {
            Ok((probability, post)) => out.push(Detection {
                outcome,
                probability,
                post_state: post.detach(&sites)?,
            }),
            Err(Error::InvalidParameter(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
