//! Normal wavevector components and reflection coefficients of the
//! slab + mirror stack.
//!
//! Region 2 is vacuum (the atom side), region 1 the slab of thickness `d`,
//! and the perfect mirror sits at `z = −d`. All wavenumbers are in `ω₁₀/c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::MediumResponse;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Denominators below this magnitude are treated as exact singularities.
pub const SINGULAR_THRESHOLD: f64 = 1e-30;

/// In-plane wavenumber `q = |q|`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TransverseWavenumber(f64);

impl TransverseWavenumber {
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::invalid("q", format!("transverse wavenumber must be >= 0, got {q}")));
        }
        Ok(TransverseWavenumber(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Reflection coefficients for s and p polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPair {
    pub rs: Complex64,
    pub rp: Complex64,
}

/// Vacuum normal wavevector `β = √(1 − q²)`; purely imaginary with positive
/// imaginary part in the evanescent sector.
pub fn beta(q: TransverseWavenumber) -> Complex64 {
    let q = q.value();
    if q <= 1.0 {
        Complex64::new((1.0 - q * q).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (q * q - 1.0).sqrt())
    }
}

/// Square root with `Im ≥ 0`: the principal root, negated when its imaginary
/// part is negative.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Slab normal wavevector `β₁ = √(εμ − q²)` on the branch `Im β₁ > 0`.
///
/// Lossless media have no unique branch here and are rejected.
pub fn beta1(q: TransverseWavenumber, m: &MediumResponse) -> Result<Complex64> {
    let q = q.value();
    beta1_from_q2(q * q, m)
}

pub(crate) fn beta1_from_q2(q2: f64, m: &MediumResponse) -> Result<Complex64> {
    if m.is_lossless() {
        return Err(Error::LosslessMedium);
    }
    Ok(sqrt_upper(m.k1_squared() - q2))
}

/// Single-interface (vacuum → slab) Fresnel coefficients `r₂₁^{s,p}`.
pub fn fresnel_r21(q: TransverseWavenumber, m: &MediumResponse) -> Result<ReflectionPair> {
    let b = beta(q);
    let b1 = beta1(q, m)?;
    interface(b, b1, m).ok_or(Error::SingularInterface { q: q.value() })
}

fn interface(b: Complex64, b1: Complex64, m: &MediumResponse) -> Option<ReflectionPair> {
    let mb = m.mu() * b;
    let eb = m.eps() * b;
    let ds = mb + b1;
    let dp = eb + b1;
    if ds.norm() < SINGULAR_THRESHOLD || dp.norm() < SINGULAR_THRESHOLD {
        return None;
    }
    Some(ReflectionPair {
        rs: (mb - b1) / ds,
        rp: (eb - b1) / dp,
    })
}

/// Generalized reflection coefficients `r₂₋^{s,p}` of the slab backed by a
/// perfect mirror.
pub fn layer_reflection(q: TransverseWavenumber, m: &MediumResponse, d: f64) -> Result<ReflectionPair> {
    crate::units::check_thickness(d)?;
    let qv = q.value();
    stack_reflection(beta(q), qv * qv, m, d, qv)
}

/// Same as [`layer_reflection`] but parameterized by the vacuum `β` and `q²`
/// directly, so that neither is reconstructed from the other near `q = 1`.
pub(crate) fn stack_reflection(
    b: Complex64,
    q2: f64,
    m: &MediumResponse,
    d: f64,
    q_for_errors: f64,
) -> Result<ReflectionPair> {
    let b1 = beta1_from_q2(q2, m)?;
    if d == 0.0 {
        // bare mirror; avoids 0/0 for p waves at grazing incidence
        return Ok(ReflectionPair {
            rs: Complex64::new(-1.0, 0.0),
            rp: Complex64::new(1.0, 0.0),
        });
    }
    let r21 = interface(b, b1, m).ok_or(Error::SingularInterface { q: q_for_errors })?;
    // |x| <= 1 because Im β₁ > 0
    let x = (2.0 * I * b1 * d).exp();
    let ds = 1.0 - r21.rs * x;
    let dp = 1.0 + r21.rp * x;
    let worst = ds.norm().min(dp.norm());
    if worst < SINGULAR_THRESHOLD {
        return Err(Error::NearPole {
            q: q_for_errors,
            denominator: worst,
        });
    }
    Ok(ReflectionPair {
        rs: (r21.rs - x) / ds,
        rp: (r21.rp + x) / dp,
    })
}
