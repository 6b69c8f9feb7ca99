//! Input-output relation of a single-sided low-Q cavity containing one
//! three-level atom, in the weak-excitation limit.
//!
//! All frequencies and rates share one arbitrary unit. The reflection
//! coefficients depend only on detunings measured in units of `kappa`.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Denominators with modulus below this are treated as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Cavity field frequency.
    pub omega_c: f64,
    /// Atomic transition frequency.
    pub omega_0: f64,
    /// Frequency of the incoming photon pulse.
    pub omega_p: f64,
    /// Cavity damping rate.
    pub kappa: f64,
    /// Atomic decay rate.
    pub gamma: f64,
    /// Atom-cavity coupling strength.
    pub g: f64,
}

impl CavityParams {
    pub fn new(omega_c: f64, omega_0: f64, omega_p: f64, kappa: f64, gamma: f64, g: f64) -> Result<Self> {
        let p = Self {
            omega_c,
            omega_0,
            omega_p,
            kappa,
            gamma,
            g,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_c, self.omega_0, self.omega_p, self.kappa, self.gamma, self.g];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("cavity parameters must be finite"));
        }
        if self.kappa.is_nan() || self.kappa <= 0.0 {
            return Err(Error::InvalidParameter("kappa must be positive"));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-negative"));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter("g must be non-negative"));
        }
        Ok(())
    }

    /// Same parameters with every frequency and rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            omega_c: self.omega_c * factor,
            omega_0: self.omega_0 * factor,
            omega_p: self.omega_p * factor,
            kappa: self.kappa * factor,
            gamma: self.gamma * factor,
            g: self.g * factor,
        }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_omega_p(self, omega_p: f64) -> Self {
        Self { omega_p, ..self }
    }
}

/// Resonant operating point with `omega_c = 1`.
pub fn ideal_operating_point(kappa: f64) -> Result<CavityParams> {
    ideal_operating_point_at(1.0, kappa)
}

/// `omega_0 = omega_c`, `omega_p = omega_c - kappa/2`, `g = kappa/2`,
/// `gamma = 0`. Here the coupled reflection is exactly `-1` and the empty
/// cavity reflection exactly `i`.
pub fn ideal_operating_point_at(omega_c: f64, kappa: f64) -> Result<CavityParams> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::InvalidParameter("kappa must be positive"));
    }
    CavityParams::new(omega_c, omega_c, omega_c - kappa / 2.0, kappa, 0.0, kappa / 2.0)
}

/// Reflection coefficient with the atom coupled to the cavity mode.
pub fn reflection_coefficient(p: &CavityParams) -> Result<Complex64> {
    p.validate()?;
    let i = Complex64::i();
    let cavity_detuning = p.omega_c - p.omega_p;
    let atom_term = i * (p.omega_0 - p.omega_p) + p.gamma / 2.0;
    let g2 = p.g * p.g;
    let numerator = (i * cavity_detuning - p.kappa / 2.0) * atom_term + g2;
    let denominator = (i * cavity_detuning + p.kappa / 2.0) * atom_term + g2;
    let d = denominator.norm();
    if d < SINGULAR_TOLERANCE {
        return Err(Error::SingularParameters(d));
    }
    Ok(numerator / denominator)
}

/// Reflection coefficient of the empty (uncoupled) cavity. Unimodular for
/// any valid parameters.
pub fn empty_cavity_reflection(p: &CavityParams) -> Complex64 {
    let i = Complex64::i();
    let cavity_detuning = p.omega_c - p.omega_p;
    (i * cavity_detuning - p.kappa / 2.0) / (i * cavity_detuning + p.kappa / 2.0)
}

/// Principal argument in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Phases picked up on reflection from the coupled (`phi`) and empty
/// (`phi_0`) cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub phi: f64,
    pub phi_0: f64,
}

impl PhasePair {
    pub fn new(phi: f64, phi_0: f64) -> Self {
        Self { phi, phi_0 }
    }

    pub fn from_params(p: &CavityParams) -> Result<Self> {
        let r = reflection_coefficient(p)?;
        let r0 = empty_cavity_reflection(p);
        Ok(Self {
            phi: principal_arg(r),
            phi_0: principal_arg(r0),
        })
    }
}

/// Polarization rotation angles `(theta_minus, theta_plus)` for an atom in
/// `gL` and `gR` respectively. `theta_minus == -theta_plus`.
pub fn faraday_angles(ph: &PhasePair) -> (f64, f64) {
    let theta_plus = (ph.phi - ph.phi_0) / 2.0;
    (-theta_plus, theta_plus)
}

/// Distance of the actual reflections from the ideal gate phases
/// (`e^{i pi}` coupled, `e^{i pi/2}` empty).
pub fn gate_phase_error(p: &CavityParams) -> Result<f64> {
    let r = reflection_coefficient(p)?;
    let r0 = empty_cavity_reflection(p);
    let coupled = (r - Complex64::new(-1.0, 0.0)).norm();
    let empty = (r0 - Complex64::i()).norm();
    Ok(coupled.max(empty))
}
