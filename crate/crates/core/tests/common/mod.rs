#![allow(dead_code)]

use faraday_ecp_core::ecp::CoefficientPair;
use faraday_ecp_core::state::{AtomLevel, BasisConfig, Polarization, PureState};
use faraday_ecp_core::Complex64;
use proptest::prelude::*;

pub use AtomLevel::{GL, GR};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random normalized pair with arbitrary phases and |alpha|^2 in [lo, hi].
pub fn pair_strategy(lo: f64, hi: f64) -> impl Strategy<Value = CoefficientPair> {
    (lo..hi, -3.2f64..3.2, -3.2f64..3.2).prop_map(|(a2, pa, pb)| {
        CoefficientPair::new(
            Complex64::from_polar(a2.sqrt(), pa),
            Complex64::from_polar((1.0 - a2).sqrt(), pb),
        )
        .unwrap()
    })
}

/// Small deterministic generator so plain #[test]s can draw "random" pairs
/// without pulling an rng into the oracle code.
pub fn lcg_pairs(seed: u64, count: usize) -> Vec<CoefficientPair> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..count)
        .map(|_| {
            let a2 = 0.02 + 0.96 * next();
            let pa = (next() - 0.5) * 6.0;
            let pb = (next() - 0.5) * 6.0;
            CoefficientPair::new(
                Complex64::from_polar(a2.sqrt(), pa),
                Complex64::from_polar((1.0 - a2).sqrt(), pb),
            )
            .unwrap()
        })
        .collect()
}

/// GHZ branch with `first` on atom 0 and the opposite level elsewhere.
pub fn branch(first: AtomLevel, n: usize) -> Vec<AtomLevel> {
    let other = if first == GL { GR } else { GL };
    std::iter::once(first).chain(std::iter::repeat_n(other, n - 1)).collect()
}

pub fn with_aux(mut atoms: Vec<AtomLevel>, aux: AtomLevel) -> Vec<AtomLevel> {
    atoms.push(aux);
    atoms
}

/// Hand-written state just before the PBS, with the auxiliary atom last:
/// ab(A - B)|V>|gL> - i(a^2 A + b^2 B)|H>|gL> + ab(A + B)|V>|gR> + i(a^2 A - b^2 B)|H>|gR>
/// where A = |gL gR..gR>, B = |gR gL..gL>.
pub fn hand_pre_detection(p: &CoefficientPair, n: usize) -> PureState {
    let (a, b) = (p.alpha, p.beta);
    let i = Complex64::i();
    let ab = a * b;
    let big_a = branch(GL, n);
    let big_b = branch(GR, n);
    let t = |pol: Polarization, atoms: &Vec<AtomLevel>, aux: AtomLevel, amp: Complex64| {
        (BasisConfig::with_photon(pol, with_aux(atoms.clone(), aux)), amp)
    };
    use Polarization::{H, V};
    PureState::from_terms([
        t(V, &big_a, GL, ab),
        t(V, &big_b, GL, -ab),
        t(H, &big_a, GL, -i * a * a),
        t(H, &big_b, GL, -i * b * b),
        t(V, &big_a, GR, ab),
        t(V, &big_b, GR, ab),
        t(H, &big_a, GR, i * a * a),
        t(H, &big_b, GR, -i * b * b),
    ])
    .unwrap()
}
