//! Closed forms for the nonabsorbing slab `ε = μ = −1` on a mirror.
//!
//! With `z̃ = 2(z_A − d)` the stack acts like a bare mirror moved to `z = d`:
//!
//! ```text
//! ĝxx = e^{iz̃}(1 − iz̃ − z̃²)/(4πz̃³)
//! ĝzz = e^{iz̃}(1 − iz̃)/(2πz̃³)
//! ```
//!
//! The imaginary parts are even in `z̃` and stay finite through the focal
//! point `z_A = d`; the real parts blow up there and are undefined inside the
//! slab shadow `z_A ≤ d`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::green::GreenDiag;
use crate::observables::{reduced_force, reduced_potential, reduced_rate};
use crate::units::{check_height, check_thickness, DipoleOrientation};

/// Below this `|z̃|` the imaginary parts use their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-3;

fn scaled_distance(z_a: f64, d: f64) -> Result<f64> {
    check_height(z_a)?;
    check_thickness(d)?;
    Ok(2.0 * (z_a - d))
}

/// `(Im ĝxx, Im ĝzz)`, valid for every `z_A > 0`.
pub fn ideal_green_imag(z_a: f64, d: f64) -> Result<(f64, f64)> {
    let t = scaled_distance(z_a, d)?.abs();
    if t < SERIES_THRESHOLD {
        let t2 = t * t;
        let xx = (-2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 / 140.0)) / (4.0 * PI);
        let zz = (1.0 / 3.0 + t2 * (-1.0 / 30.0 + t2 / 840.0)) / (2.0 * PI);
        return Ok((xx, zz));
    }
    let (s, c) = t.sin_cos();
    let t3 = t * t * t;
    let xx = (s - t * c - t * t * s) / (4.0 * PI * t3);
    let zz = (s - t * c) / (2.0 * PI * t3);
    Ok((xx, zz))
}

/// Full diagonal `ĝ` for `z_A > d`.
pub fn ideal_green(z_a: f64, d: f64) -> Result<GreenDiag> {
    let t = scaled_distance(z_a, d)?;
    if t <= 0.0 {
        return Err(Error::Divergent { z_a, d });
    }
    let e = Complex64::from_polar(1.0, t) / (t * t * t);
    let it = Complex64::new(0.0, t);
    Ok(GreenDiag {
        gxx: e * (1.0 - it - t * t) / (4.0 * PI),
        gzz: e * (1.0 - it) / (2.0 * PI),
    })
}

/// `∂ĝ/∂z_A` for `z_A > d`.
pub fn ideal_green_derivative(z_a: f64, d: f64) -> Result<GreenDiag> {
    let t = scaled_distance(z_a, d)?;
    if t <= 0.0 {
        return Err(Error::Divergent { z_a, d });
    }
    // d/dz_A = 2 d/dz̃
    let e = 2.0 * Complex64::from_polar(1.0, t) / (t * t * t * t);
    let t2 = t * t;
    Ok(GreenDiag {
        gxx: e * Complex64::new(-3.0 + 2.0 * t2, 3.0 * t - t2 * t) / (4.0 * PI),
        gzz: e * Complex64::new(t2 - 3.0, 3.0 * t) / (2.0 * PI),
    })
}

/// Potential in units of `ħΓ₀`; defined only for `z_A > d`.
pub fn ideal_potential(z_a: f64, d: f64, o: &DipoleOrientation) -> Result<f64> {
    Ok(reduced_potential(&ideal_green(z_a, d)?, o))
}

/// Force `−∂U/∂z_A` in units of `ħΓ₀ω₁₀/c`; defined only for `z_A > d`.
pub fn ideal_force(z_a: f64, d: f64, o: &DipoleOrientation) -> Result<f64> {
    Ok(reduced_force(&ideal_green_derivative(z_a, d)?, o))
}

/// `Γ/Γ₀`, finite for every `z_A > 0`.
pub fn ideal_decay(z_a: f64, d: f64, o: &DipoleOrientation) -> Result<f64> {
    let (xx, zz) = ideal_green_imag(z_a, d)?;
    let g = GreenDiag {
        gxx: Complex64::new(0.0, xx),
        gzz: Complex64::new(0.0, zz),
    };
    Ok(reduced_rate(&g, o))
}
