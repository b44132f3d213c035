//! Physical inputs and the reduced-unit convention.
//!
//! Everything in the core is expressed with `c = ω₁₀ = 1`: lengths in `c/ω₁₀`,
//! wavenumbers in `ω₁₀/c`, potentials in `ħΓ₀`, forces in `ħΓ₀ω₁₀/c` and decay
//! rates in `Γ₀`. The Green tensor is stored as `ĝ = (c/ω₁₀)·G`, so that
//!
//! ```text
//! U/(ħΓ₀) = −3π (p∥ Re ĝxx + p⊥ Re ĝzz)
//! Γ/Γ₀    = 1 + 6π (p∥ Im ĝxx + p⊥ Im ĝzz)
//! ```
//!
//! Dipole magnitudes, `ħ` and `ε₀` never enter the numerics; SI values are
//! recovered only through [`AtomSI`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Standard gravitational acceleration (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Permittivity and permeability of the slab at the atomic transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMedium", into = "RawMedium")]
pub struct MediumResponse {
    eps: Complex64,
    mu: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawMedium {
    eps: Complex64,
    mu: Complex64,
}

impl TryFrom<RawMedium> for MediumResponse {
    type Error = Error;
    fn try_from(raw: RawMedium) -> Result<Self> {
        validate_medium(raw.eps, raw.mu)
    }
}

impl From<MediumResponse> for RawMedium {
    fn from(m: MediumResponse) -> Self {
        RawMedium { eps: m.eps, mu: m.mu }
    }
}

/// Checks passivity and builds a [`MediumResponse`].
pub fn validate_medium(eps: Complex64, mu: Complex64) -> Result<MediumResponse> {
    let finite = eps.re.is_finite() && eps.im.is_finite() && mu.re.is_finite() && mu.im.is_finite();
    if !finite {
        return Err(Error::invalid("medium", "eps and mu must be finite"));
    }
    if eps.im < 0.0 || mu.im < 0.0 {
        return Err(Error::ActiveMedium {
            im_eps: eps.im,
            im_mu: mu.im,
        });
    }
    Ok(MediumResponse { eps, mu })
}

impl MediumResponse {
    pub fn new(eps: Complex64, mu: Complex64) -> Result<Self> {
        validate_medium(eps, mu)
    }

    /// Left-handed test medium `ε = μ = −1 + iη`.
    pub fn lhm(eta: f64) -> Result<Self> {
        let v = Complex64::new(-1.0, eta);
        validate_medium(v, v)
    }

    pub fn eps(&self) -> Complex64 {
        self.eps
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    /// `k₁² = εμ` in units of `ω₁₀²/c²`.
    pub fn k1_squared(&self) -> Complex64 {
        self.eps * self.mu
    }

    /// Both imaginary parts vanish.
    pub fn is_lossless(&self) -> bool {
        self.eps.im == 0.0 && self.mu.im == 0.0
    }

    /// The absolutely nonabsorbing `ε = μ = −1` slab.
    pub fn is_ideal_lhm(&self) -> bool {
        self.eps == Complex64::new(-1.0, 0.0) && self.mu == Complex64::new(-1.0, 0.0)
    }

    /// Smallest imaginary part of `ε` and `μ`.
    pub fn min_absorption(&self) -> f64 {
        self.eps.im.min(self.mu.im)
    }
}

/// Slab thickness and atom height, both in `c/ω₁₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub d: f64,
    pub z_a: f64,
}

impl Geometry {
    pub fn new(d: f64, z_a: f64) -> Result<Self> {
        check_thickness(d)?;
        check_height(z_a)?;
        Ok(Geometry { d, z_a })
    }
}

pub(crate) fn check_thickness(d: f64) -> Result<()> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::invalid("d", format!("slab thickness must be >= 0, got {d}")));
    }
    Ok(())
}

pub(crate) fn check_height(z_a: f64) -> Result<()> {
    if !(z_a.is_finite() && z_a > 0.0) {
        return Err(Error::invalid("z_A", format!("atom height must be > 0, got {z_a}")));
    }
    Ok(())
}

/// Fractions of `|d₁₀|²` carried by the parallel and perpendicular dipole components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrientation")]
pub struct DipoleOrientation {
    p_par: f64,
    p_perp: f64,
}

#[derive(Deserialize)]
struct RawOrientation {
    p_par: f64,
    p_perp: f64,
}

impl TryFrom<RawOrientation> for DipoleOrientation {
    type Error = Error;
    fn try_from(raw: RawOrientation) -> Result<Self> {
        DipoleOrientation::new(raw.p_par, raw.p_perp)
    }
}

impl DipoleOrientation {
    pub fn new(p_par: f64, p_perp: f64) -> Result<Self> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if !in_unit(p_par) || !in_unit(p_perp) {
            return Err(Error::invalid("orientation", "fractions must lie in [0, 1]"));
        }
        if (p_par + p_perp - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "orientation",
                format!("p_par + p_perp must equal 1, got {}", p_par + p_perp),
            ));
        }
        Ok(DipoleOrientation { p_par, p_perp })
    }

    /// Orientation with parallel fraction `p_par`.
    pub fn from_parallel_fraction(p_par: f64) -> Result<Self> {
        Self::new(p_par, 1.0 - p_par)
    }

    pub fn parallel() -> Self {
        DipoleOrientation {
            p_par: 1.0,
            p_perp: 0.0,
        }
    }

    pub fn perpendicular() -> Self {
        DipoleOrientation {
            p_par: 0.0,
            p_perp: 1.0,
        }
    }

    /// Isotropic average over dipole directions.
    pub fn random() -> Self {
        DipoleOrientation {
            p_par: 2.0 / 3.0,
            p_perp: 1.0 / 3.0,
        }
    }

    pub fn p_par(&self) -> f64 {
        self.p_par
    }

    pub fn p_perp(&self) -> f64 {
        self.p_perp
    }
}

/// SI scales of a concrete atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAtom", into = "RawAtom")]
pub struct AtomSI {
    gamma0: f64,
    lambda10: f64,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct RawAtom {
    gamma0: f64,
    lambda10: f64,
    mass: f64,
}

impl TryFrom<RawAtom> for AtomSI {
    type Error = Error;
    fn try_from(raw: RawAtom) -> Result<Self> {
        AtomSI::new(raw.gamma0, raw.lambda10, raw.mass)
    }
}

impl From<AtomSI> for RawAtom {
    fn from(a: AtomSI) -> Self {
        RawAtom {
            gamma0: a.gamma0,
            lambda10: a.lambda10,
            mass: a.mass,
        }
    }
}

impl AtomSI {
    /// `gamma0` in 1/s, `lambda10` in m, `mass` in kg.
    pub fn new(gamma0: f64, lambda10: f64, mass: f64) -> Result<Self> {
        for (name, v) in [("gamma0", gamma0), ("lambda10", lambda10), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(AtomSI {
            gamma0,
            lambda10,
            mass,
        })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda10(&self) -> f64 {
        self.lambda10
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `ω₁₀/c = 2π/λ₁₀` in 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda10
    }

    /// `ħΓ₀` in J.
    pub fn energy_unit(&self) -> f64 {
        HBAR * self.gamma0
    }

    /// `ħΓ₀ω₁₀/c` in N.
    pub fn force_unit(&self) -> f64 {
        self.energy_unit() * self.wavenumber()
    }

    /// `c/ω₁₀` in m.
    pub fn length_unit(&self) -> f64 {
        1.0 / self.wavenumber()
    }

    /// Gravitational force `m g` in N.
    pub fn weight(&self) -> f64 {
        self.mass * STANDARD_GRAVITY
    }
}

/// Reduced potential (units of `ħΓ₀`) to joules.
pub fn to_si(u_reduced: f64, atom: &AtomSI) -> f64 {
    u_reduced * atom.energy_unit()
}

/// Reduced force (units of `ħΓ₀ω₁₀/c`) to newtons.
pub fn force_to_si(f_reduced: f64, atom: &AtomSI) -> f64 {
    f_reduced * atom.force_unit()
}

pub fn from_si(u_joule: f64, atom: &AtomSI) -> f64 {
    u_joule / atom.energy_unit()
}

pub fn force_from_si(f_newton: f64, atom: &AtomSI) -> f64 {
    f_newton / atom.force_unit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn passive_media_are_accepted() {
        let m = validate_medium(c(-1.0, 1e-3), c(-1.0, 1e-3)).unwrap();
        assert!(!m.is_lossless());
        let vac = validate_medium(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(vac.is_lossless());
        assert!(!vac.is_ideal_lhm());
        assert!(validate_medium(c(-1.0, 0.0), c(-1.0, 0.0)).unwrap().is_ideal_lhm());
    }

    #[test]
    fn active_medium_is_rejected() {
        let err = validate_medium(c(-1.0, -1e-3), c(-1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ActiveMedium { .. }));
    }

    #[test]
    fn orientation_must_sum_to_one() {
        assert!(DipoleOrientation::new(0.5, 0.5).is_ok());
        assert!(DipoleOrientation::new(0.5, 0.6).is_err());
        assert!(DipoleOrientation::new(-0.1, 1.1).is_err());
        let r = DipoleOrientation::random();
        assert_relative_eq!(r.p_par() + r.p_perp(), 1.0);
    }

    #[test]
    fn hbar_gamma0_scale() {
        let atom = AtomSI::new(6e8, 1e-7, 1.67e-27).unwrap();
        assert_relative_eq!(to_si(1.0, &atom), 6.327_430_902e-26, max_relative = 1e-9);
        assert_eq!(to_si(0.0, &atom), 0.0);
        // ħΓ₀ · 2π/λ
        assert_relative_eq!(force_to_si(1.0, &atom), 6.327_430_902e-26 * 6.283_185_307e7, max_relative = 1e-9);
    }

    #[test]
    fn si_round_trip() {
        let atom = AtomSI::new(3.3e7, 7.8e-7, 1.4e-25).unwrap();
        for u in [-4.2e3, -1.0, 1e-9, 17.5, 2.5e6] {
            assert_relative_eq!(from_si(to_si(u, &atom), &atom), u, max_relative = 1e-12);
            assert_relative_eq!(force_from_si(force_to_si(u, &atom), &atom), u, max_relative = 1e-12);
        }
    }

    #[test]
    fn atom_rejects_non_positive() {
        assert!(AtomSI::new(0.0, 1e-7, 1.0).is_err());
        assert!(AtomSI::new(1.0, -1e-7, 1.0).is_err());
        assert!(AtomSI::new(1.0, 1e-7, f64::NAN).is_err());
    }

    #[test]
    fn geometry_bounds() {
        assert!(Geometry::new(0.0, 0.1).is_ok());
        assert!(Geometry::new(-1.0, 0.1).is_err());
        assert!(Geometry::new(1.0, 0.0).is_err());
    }

    #[test]
    fn raw_medium_conversion_validates() {
        let raw = RawMedium {
            eps: c(-1.0, -0.1),
            mu: c(1.0, 0.0),
        };
        assert!(MediumResponse::try_from(raw).is_err());
    }
}
