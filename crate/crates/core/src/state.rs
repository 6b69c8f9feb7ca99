//! Sparse pure states over a single photon polarization site and an ordered
//! register of atoms.
//!
//! Only the two ground sublevels `gL` and `gR` of each atom are tracked; the
//! excited level stays virtual in the reflection treatment and never carries
//! amplitude. The photon, when present, lives either in the circular (`L`/`R`)
//! or the linear (`H`/`V`) basis family, and every term of one state uses the
//! same family.
//!
//! States are immutable values. Every operation returns a fresh state, drops
//! amplitudes whose modulus falls below [`DROP_TOLERANCE`] and rejects
//! non-finite results.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

/// Complex probability amplitude.
pub type Amplitude = Complex64;

/// 2x2 complex matrix in row-major order, acting on a two-level site.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Amplitudes with modulus below this are removed after every operation.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance for accepting a matrix as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhotonBasis {
    /// Left/right circular polarization.
    Circular,
    /// Horizontal/vertical linear polarization.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    L,
    R,
    H,
    V,
}

impl Polarization {
    pub fn basis(self) -> PhotonBasis {
        match self {
            Polarization::L | Polarization::R => PhotonBasis::Circular,
            Polarization::H | Polarization::V => PhotonBasis::Linear,
        }
    }

    /// Position within the two-level basis of its family (`L`, `H` are 0).
    fn index(self) -> usize {
        match self {
            Polarization::L | Polarization::H => 0,
            Polarization::R | Polarization::V => 1,
        }
    }

    fn from_index(basis: PhotonBasis, index: usize) -> Self {
        match (basis, index) {
            (PhotonBasis::Circular, 0) => Polarization::L,
            (PhotonBasis::Circular, _) => Polarization::R,
            (PhotonBasis::Linear, 0) => Polarization::H,
            (PhotonBasis::Linear, _) => Polarization::V,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::L => "L",
            Polarization::R => "R",
            Polarization::H => "H",
            Polarization::V => "V",
        };
        f.write_str(s)
    }
}

/// Ground sublevel of a three-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomLevel {
    GL,
    GR,
}

impl AtomLevel {
    fn index(self) -> usize {
        match self {
            AtomLevel::GL => 0,
            AtomLevel::GR => 1,
        }
    }

    fn from_index(index: usize) -> Self {
        if index == 0 {
            AtomLevel::GL
        } else {
            AtomLevel::GR
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            AtomLevel::GL => AtomLevel::GR,
            AtomLevel::GR => AtomLevel::GL,
        }
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomLevel::GL => "gL",
            AtomLevel::GR => "gR",
        })
    }
}

/// One labeled basis ket: an optional photon polarization and the levels of
/// every atom in register order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisConfig {
    pub photon: Option<Polarization>,
    pub atoms: Vec<AtomLevel>,
}

impl BasisConfig {
    pub fn new(photon: Option<Polarization>, atoms: impl IntoIterator<Item = AtomLevel>) -> Self {
        Self {
            photon,
            atoms: atoms.into_iter().collect(),
        }
    }

    /// Atom-only configuration.
    pub fn atoms(atoms: impl IntoIterator<Item = AtomLevel>) -> Self {
        Self::new(None, atoms)
    }

    pub fn with_photon(photon: Polarization, atoms: impl IntoIterator<Item = AtomLevel>) -> Self {
        Self::new(Some(photon), atoms)
    }

    fn value_at(&self, site: Site) -> SiteValue {
        match site {
            Site::Photon => SiteValue::Photon(self.photon.expect("validated photon site")),
            Site::Atom(i) => SiteValue::Atom(self.atoms[i]),
        }
    }
}

impl fmt::Display for BasisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        if let Some(p) = self.photon {
            write!(f, "{p};")?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(">")
    }
}

/// Addressable subsystem of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Photon,
    Atom(usize),
}

/// Observed label of one measured site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SiteValue {
    Photon(Polarization),
    Atom(AtomLevel),
}

/// Result of a projective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub sites: Vec<Site>,
    pub outcome: Vec<SiteValue>,
    /// Born weight of `outcome` in the pre-measurement state.
    pub probability: f64,
    /// Renormalized projection onto `outcome`; measured sites stay in the
    /// register in their observed state.
    pub post_state: PureState,
}

/// Sparse, normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    terms: BTreeMap<BasisConfig, Amplitude>,
    register_size: usize,
    photon: Option<PhotonBasis>,
}

impl PureState {
    /// Builds a normalized state from raw terms. Duplicate configurations are
    /// summed before the amplitudes are rescaled to unit norm.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisConfig, Amplitude)>,
    {
        let mut iter = terms.into_iter().peekable();
        let first = iter.peek().ok_or(Error::EmptyState)?;
        let register_size = first.0.atoms.len();
        let photon = first.0.photon.map(Polarization::basis);

        let mut map: BTreeMap<BasisConfig, Amplitude> = BTreeMap::new();
        for (config, amp) in iter {
            if config.atoms.len() != register_size {
                return Err(Error::Shape("configurations differ in register size"));
            }
            if config.photon.map(Polarization::basis) != photon {
                return Err(Error::Shape("configurations differ in photon basis"));
            }
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            *map.entry(config).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }

        let norm = norm_of(map.values());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for amp in map.values_mut() {
            *amp /= norm;
        }
        Self::finish(map, register_size, photon)
    }

    /// Drops negligible amplitudes and checks finiteness.
    fn finish(
        mut terms: BTreeMap<BasisConfig, Amplitude>,
        register_size: usize,
        photon: Option<PhotonBasis>,
    ) -> Result<Self> {
        if terms.values().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        terms.retain(|_, a| a.norm() >= DROP_TOLERANCE);
        if terms.is_empty() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            terms,
            register_size,
            photon,
        })
    }

    pub fn register_size(&self) -> usize {
        self.register_size
    }

    pub fn photon_basis(&self) -> Option<PhotonBasis> {
        self.photon
    }

    pub fn has_photon(&self) -> bool {
        self.photon.is_some()
    }

    /// Number of stored (non-negligible) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisConfig, &Amplitude)> {
        self.terms.iter()
    }

    /// Amplitude of `config`, zero when absent.
    pub fn amplitude(&self, config: &BasisConfig) -> Amplitude {
        self.terms
            .get(config)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        norm_of(self.terms.values())
    }

    fn check_site(&self, site: Site) -> Result<()> {
        match site {
            Site::Photon if self.photon.is_none() => Err(Error::PhotonAbsent),
            Site::Photon => Ok(()),
            Site::Atom(i) if i >= self.register_size => Err(Error::InvalidSite {
                site: i,
                size: self.register_size,
            }),
            Site::Atom(_) => Ok(()),
        }
    }

    fn check_sites(&self, sites: &[Site]) -> Result<()> {
        for (i, s) in sites.iter().enumerate() {
            self.check_site(*s)?;
            if sites[..i].contains(s) {
                return Err(Error::Shape("site listed twice"));
            }
        }
        Ok(())
    }

    /// Tensor product; `other`'s atoms are appended after `self`'s.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.photon.is_some() && other.photon.is_some() {
            return Err(Error::Shape("both operands carry a photon"));
        }
        let mut terms = BTreeMap::new();
        for (ca, aa) in &self.terms {
            for (cb, ab) in &other.terms {
                let mut atoms = Vec::with_capacity(ca.atoms.len() + cb.atoms.len());
                atoms.extend_from_slice(&ca.atoms);
                atoms.extend_from_slice(&cb.atoms);
                let config = BasisConfig {
                    photon: ca.photon.or(cb.photon),
                    atoms,
                };
                terms.insert(config, aa * ab);
            }
        }
        Self::finish(
            terms,
            self.register_size + other.register_size,
            self.photon.or(other.photon),
        )
    }

    /// Applies a 2x2 unitary to one site in that site's current two-level
    /// basis (`L`/`R`, `H`/`V` or `gL`/`gR`).
    pub fn apply_single_site_unitary(&self, site: Site, u: &Matrix2) -> Result<PureState> {
        check_unitary(u)?;
        self.check_site(site)?;
        self.transform_site(site, u, self.photon)
    }

    /// Maps the photon from its current basis family into `target` using `u`:
    /// column `j` of `u` is the image of the current basis state `j`
    /// expressed in the target family.
    pub fn apply_photon_basis_change(&self, u: &Matrix2, target: PhotonBasis) -> Result<PureState> {
        check_unitary(u)?;
        self.check_site(Site::Photon)?;
        self.transform_site(Site::Photon, u, Some(target))
    }

    fn transform_site(
        &self,
        site: Site,
        u: &Matrix2,
        photon: Option<PhotonBasis>,
    ) -> Result<PureState> {
        let mut terms: BTreeMap<BasisConfig, Amplitude> = BTreeMap::new();
        for (config, amp) in &self.terms {
            let input = match site {
                Site::Photon => config.photon.expect("photon present").index(),
                Site::Atom(i) => config.atoms[i].index(),
            };
            for (output, row) in u.iter().enumerate() {
                let factor = row[input];
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut next = config.clone();
                match site {
                    Site::Photon => {
                        let basis = photon.expect("photon present");
                        next.photon = Some(Polarization::from_index(basis, output));
                    }
                    Site::Atom(i) => next.atoms[i] = AtomLevel::from_index(output),
                }
                *terms.entry(next).or_insert(Complex64::new(0.0, 0.0)) += factor * amp;
            }
        }
        Self::finish(terms, self.register_size, photon)
    }

    /// Multiplies every amplitude by a configuration-dependent factor.
    /// The caller is responsible for the factors being unimodular.
    pub fn map_diagonal<F>(&self, mut factor: F) -> Result<PureState>
    where
        F: FnMut(&BasisConfig) -> Amplitude,
    {
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| (c.clone(), factor(c) * a))
            .collect();
        Self::finish(terms, self.register_size, self.photon)
    }

    fn check_same_shape(&self, other: &PureState) -> Result<()> {
        if self.register_size != other.register_size {
            return Err(Error::Shape("register sizes differ"));
        }
        if self.photon != other.photon {
            return Err(Error::Shape("photon presence or basis differs"));
        }
        Ok(())
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Result<Amplitude> {
        self.check_same_shape(other)?;
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (config, a) in &small.terms {
            if let Some(b) = large.terms.get(config) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        let ov = self.overlap(other)?;
        let denom = self.norm() * self.norm() * other.norm() * other.norm();
        Ok((ov.norm_sqr() / denom).clamp(0.0, 1.0))
    }

    /// Born weights of every outcome on `sites` with nonzero probability,
    /// in ascending label order.
    pub fn outcome_distribution(&self, sites: &[Site]) -> Result<Vec<(Vec<SiteValue>, f64)>> {
        self.check_sites(sites)?;
        let mut weights: BTreeMap<Vec<SiteValue>, f64> = BTreeMap::new();
        for (config, amp) in &self.terms {
            let key = sites.iter().map(|s| config.value_at(*s)).collect();
            *weights.entry(key).or_insert(0.0) += amp.norm_sqr();
        }
        let total: f64 = weights.values().sum();
        Ok(weights.into_iter().map(|(k, w)| (k, w / total)).collect())
    }

    /// Projects onto `outcome` on `sites`. Returns the Born weight and the
    /// renormalized post-measurement state.
    pub fn project(&self, sites: &[Site], outcome: &[SiteValue]) -> Result<(f64, PureState)> {
        self.check_sites(sites)?;
        if sites.len() != outcome.len() {
            return Err(Error::Shape("outcome length differs from site count"));
        }
        let total = self.norm().powi(2);
        let kept: BTreeMap<BasisConfig, Amplitude> = self
            .terms
            .iter()
            .filter(|(c, _)| sites.iter().zip(outcome).all(|(s, v)| c.value_at(*s) == *v))
            .map(|(c, a)| (c.clone(), *a))
            .collect();
        let weight: f64 = kept.values().map(|a| a.norm_sqr()).sum();
        if weight == 0.0 {
            return Err(Error::InvalidParameter("outcome has zero probability"));
        }
        let scale = weight.sqrt();
        let kept = kept.into_iter().map(|(c, a)| (c, a / scale)).collect();
        let post = Self::finish(kept, self.register_size, self.photon)?;
        Ok((weight / total, post))
    }

    /// Projective measurement of `sites`, sampling the outcome by the Born
    /// rule from one uniform draw of `rng`.
    pub fn measure<R: Rng + ?Sized>(&self, sites: &[Site], rng: &mut R) -> Result<MeasurementRecord> {
        let dist = self.outcome_distribution(sites)?;
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = dist.len() - 1;
        for (i, (_, w)) in dist.iter().enumerate() {
            cumulative += w;
            if u < cumulative {
                chosen = i;
                break;
            }
        }
        let outcome = dist[chosen].0.clone();
        let (probability, post_state) = self.project(sites, &outcome)?;
        Ok(MeasurementRecord {
            sites: sites.to_vec(),
            outcome,
            probability,
            post_state,
        })
    }

    /// Removes sites that are in a definite basis state (for instance after
    /// measuring them). Remaining atoms keep their relative order.
    pub fn detach(&self, sites: &[Site]) -> Result<PureState> {
        self.check_sites(sites)?;
        for site in sites {
            let mut values = self.terms.keys().map(|c| c.value_at(*site));
            let first = values.next();
            if values.any(|v| Some(v) != first) {
                return Err(Error::NotDefinite(match site {
                    Site::Photon => usize::MAX,
                    Site::Atom(i) => *i,
                }));
            }
        }
        let drop_photon = sites.contains(&Site::Photon);
        let removed: Vec<usize> = sites
            .iter()
            .filter_map(|s| match s {
                Site::Atom(i) => Some(*i),
                Site::Photon => None,
            })
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| {
                let atoms = c
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !removed.contains(i))
                    .map(|(_, l)| *l)
                    .collect();
                let photon = if drop_photon { None } else { c.photon };
                (BasisConfig { photon, atoms }, *a)
            })
            .collect();
        let photon = if drop_photon { None } else { self.photon };
        Self::finish(terms, self.register_size - removed.len(), photon)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (config, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", amp.re, amp.im, config)?;
        }
        Ok(())
    }
}

fn norm_of<'a>(amps: impl Iterator<Item = &'a Amplitude>) -> f64 {
    amps.map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry of `|u^dagger u - I|`.
pub fn unitarity_deviation(u: &Matrix2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for row in u {
                acc += row[i].conj() * row[j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

fn check_unitary(u: &Matrix2) -> Result<()> {
    let dev = unitarity_deviation(u);
    if dev.is_nan() || dev > UNITARY_TOLERANCE {
        return Err(Error::NonUnitary(dev));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const HADAMARD: Matrix2 = [
        [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
        [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
    ];

    fn bell_like(alpha: f64, beta: f64) -> PureState {
        PureState::from_terms([
            (BasisConfig::atoms([AtomLevel::GL, AtomLevel::GR]), c(alpha, 0.0)),
            (BasisConfig::atoms([AtomLevel::GR, AtomLevel::GL]), c(beta, 0.0)),
        ])
        .unwrap()
    }

    #[test]
    fn photon_superposition_is_normalized() {
        let s = PureState::from_terms([
            (BasisConfig::with_photon(Polarization::L, []), c(1.0, 0.0)),
            (BasisConfig::with_photon(Polarization::R, []), c(1.0, 0.0)),
        ])
        .unwrap();
        for (_, a) in s.terms() {
            assert!((a - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        assert_eq!(s.photon_basis(), Some(PhotonBasis::Circular));
    }

    #[test]
    fn normalized_input_is_kept() {
        let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let s = bell_like(a, b);
        let k = BasisConfig::atoms([AtomLevel::GL, AtomLevel::GR]);
        assert!((s.amplitude(&k).re - a).abs() < 1e-15);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn duplicates_are_summed() {
        let k = BasisConfig::with_photon(Polarization::L, []);
        let s = PureState::from_terms([(k.clone(), c(1.0, 0.0)), (k.clone(), c(1.0, 0.0))]).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.amplitude(&k) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        let none: [(BasisConfig, Amplitude); 0] = [];
        assert_eq!(PureState::from_terms(none), Err(Error::EmptyState));
        let k = BasisConfig::atoms([AtomLevel::GL]);
        assert_eq!(
            PureState::from_terms([(k, c(0.0, 0.0))]),
            Err(Error::ZeroNorm)
        );
        let mixed = PureState::from_terms([
            (BasisConfig::with_photon(Polarization::L, []), c(1.0, 0.0)),
            (BasisConfig::with_photon(Polarization::H, []), c(1.0, 0.0)),
        ]);
        assert!(matches!(mixed, Err(Error::Shape(_))));
        let sizes = PureState::from_terms([
            (BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0)),
            (BasisConfig::atoms([AtomLevel::GL, AtomLevel::GR]), c(1.0, 0.0)),
        ]);
        assert!(matches!(sizes, Err(Error::Shape(_))));
        let nan = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GL]), c(f64::NAN, 0.0))]);
        assert_eq!(nan, Err(Error::NonFinite));
    }

    #[test]
    fn tensor_rejects_two_photons() {
        let p = PureState::from_terms([(BasisConfig::with_photon(Polarization::L, []), c(1.0, 0.0))]).unwrap();
        assert!(matches!(p.tensor(&p), Err(Error::Shape(_))));
    }

    #[test]
    fn tensor_with_unit_factor_extends_configs() {
        let s = bell_like(0.6, 0.8);
        let unit = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GR]), c(1.0, 0.0))]).unwrap();
        let t = s.tensor(&unit).unwrap();
        assert_eq!(t.register_size(), 3);
        let k = BasisConfig::atoms([AtomLevel::GL, AtomLevel::GR, AtomLevel::GR]);
        assert!((t.amplitude(&k).re - 0.6).abs() < 1e-15);
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_on_gl_and_involution() {
        let s = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0))]).unwrap();
        let h = s.apply_single_site_unitary(Site::Atom(0), &HADAMARD).unwrap();
        let plus = PureState::from_terms([
            (BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0)),
            (BasisConfig::atoms([AtomLevel::GR]), c(1.0, 0.0)),
        ])
        .unwrap();
        assert!((h.fidelity(&plus).unwrap() - 1.0).abs() < 1e-12);
        let back = h.apply_single_site_unitary(Site::Atom(0), &HADAMARD).unwrap();
        assert!((back.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let id: Matrix2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let s = bell_like(0.6, 0.8);
        assert_eq!(s.apply_single_site_unitary(Site::Atom(1), &id).unwrap(), s);
    }

    #[test]
    fn non_unitary_and_bad_site_rejected() {
        let m: Matrix2 = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let s = bell_like(0.6, 0.8);
        assert!(matches!(
            s.apply_single_site_unitary(Site::Atom(0), &m),
            Err(Error::NonUnitary(_))
        ));
        assert!(matches!(
            s.apply_single_site_unitary(Site::Atom(2), &HADAMARD),
            Err(Error::InvalidSite { site: 2, size: 2 })
        ));
        assert_eq!(
            s.apply_single_site_unitary(Site::Photon, &HADAMARD),
            Err(Error::PhotonAbsent)
        );
    }

    #[test]
    fn fidelity_cases() {
        let plus = bell_like(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let minus = bell_like(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        assert!((plus.fidelity(&plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(plus.fidelity(&minus).unwrap() < 1e-15);
        let phased = plus.map_diagonal(|_| Complex64::from_polar(1.0, 1.234)).unwrap();
        assert!((plus.fidelity(&phased).unwrap() - 1.0).abs() < 1e-12);
        let other = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0))]).unwrap();
        assert!(matches!(plus.fidelity(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn measure_first_atom() {
        let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let s = bell_like(a, b);
        let dist = s.outcome_distribution(&[Site::Atom(0)]).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist[0].1 - 0.8).abs() < 1e-12);
        let (p, post) = s.project(&[Site::Atom(0)], &[SiteValue::Atom(AtomLevel::GL)]).unwrap();
        assert!((p - 0.8).abs() < 1e-12);
        let target = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GL, AtomLevel::GR]), c(1.0, 0.0))]).unwrap();
        assert!((post.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_measurement_and_idempotence() {
        let s = PureState::from_terms([(BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0))]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let rec = s.measure(&[Site::Atom(0)], &mut rng).unwrap();
            assert_eq!(rec.outcome, [SiteValue::Atom(AtomLevel::GL)]);
            assert_eq!(rec.probability, 1.0);
        }
        let s = bell_like(0.6, 0.8);
        let first = s.measure(&[Site::Atom(1)], &mut rng).unwrap();
        let again = first.post_state.measure(&[Site::Atom(1)], &mut rng).unwrap();
        assert_eq!(first.outcome, again.outcome);
        assert!((again.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_absent_photon_fails() {
        let s = bell_like(0.6, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(s.measure(&[Site::Photon], &mut rng), Err(Error::PhotonAbsent)));
        assert!(matches!(
            s.measure(&[Site::Atom(0), Site::Atom(0)], &mut rng),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn born_frequencies_converge() {
        let s = bell_like(0.8f64.sqrt(), 0.2f64.sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| {
                s.measure(&[Site::Atom(0)], &mut rng).unwrap().outcome[0]
                    == SiteValue::Atom(AtomLevel::GL)
            })
            .count();
        let p = hits as f64 / n as f64;
        let sigma = (0.8f64 * 0.2 / n as f64).sqrt();
        assert!((p - 0.8).abs() < 5.0 * sigma, "p = {p}");
    }

    #[test]
    fn detach_requires_definite_sites() {
        let s = bell_like(0.6, 0.8);
        assert_eq!(s.detach(&[Site::Atom(0)]), Err(Error::NotDefinite(0)));
        let (_, post) = s.project(&[Site::Atom(0)], &[SiteValue::Atom(AtomLevel::GR)]).unwrap();
        let d = post.detach(&[Site::Atom(0)]).unwrap();
        assert_eq!(d.register_size(), 1);
        let k = BasisConfig::atoms([AtomLevel::GL]);
        assert!((d.amplitude(&k).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sub_tolerance_amplitudes_are_dropped() {
        let s = PureState::from_terms([
            (BasisConfig::atoms([AtomLevel::GL]), c(1.0, 0.0)),
            (BasisConfig::atoms([AtomLevel::GR]), c(5e-13, 0.0)),
        ])
        .unwrap();
        assert_eq!(s.len(), 1);
        // Dense oracle: the undropped state has overlap 1/sqrt(1 + eps^2) with it.
        let eps: f64 = 5e-13;
        let undropped_fid = 1.0 / (1.0 + eps * eps);
        let kept = s.amplitude(&BasisConfig::atoms([AtomLevel::GL])).norm_sqr();
        assert!((kept - undropped_fid).abs() < 1e-18);
    }
}
