//! Nonretarded (`z_A ≪ c/ω₁₀`) forms of the potential, force and decay
//! rate, and the thick-slab interface limits.
//!
//! For `q ≫ 1` both normal wavevectors approach `iq` and the stack
//! reflection coefficients become, with `x = e^{−2qd}`,
//!
//! ```text
//! r_s ≈ [(μ−1) − (μ+1)x] / [(μ+1) − (μ−1)x]
//! r_p ≈ [(ε−1) + (ε+1)x] / [(ε+1) + (ε−1)x]
//! ```
//!
//! so that
//!
//! ```text
//! U/(ħΓ₀)  = −(3/8) ∫₀^∞ dq e^{−2qz} [p∥ Re r_s + (p∥ + 2p⊥) q² Re r_p]
//! Γ/Γ₀ − 1 = (3/4) ∫₀^∞ dq e^{−2qz} [p∥ Im r_s + (p∥ + 2p⊥) q² Im r_p]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ReflectionPair;
use crate::quad::{integrate, AdaptiveOptions};
use crate::units::{check_height, check_thickness, DipoleOrientation, MediumResponse};

/// Heights above which the nonretarded forms are logged as out of range.
pub const RECOMMENDED_MAX_HEIGHT: f64 = 0.1;

/// The integrand is cut where `e^{−2qz}` drops below `e^{−2·CUTOFF}`.
const CUTOFF: f64 = 40.0;

/// A quantity split into its s- and p-wave contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSplit {
    pub s: f64,
    pub p: f64,
}

impl PolarizationSplit {
    pub fn total(&self) -> f64 {
        self.s + self.p
    }
}

/// All nonretarded observables at one height. `decay` holds only the
/// surface-induced parts, so `Γ/Γ₀ = 1 + decay.total()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearSurface {
    pub potential: PolarizationSplit,
    pub force: PolarizationSplit,
    pub decay: PolarizationSplit,
}

impl NearSurface {
    pub fn rate(&self) -> f64 {
        1.0 + self.decay.total()
    }
}

/// Stack reflection coefficients with `β ≈ β₁ ≈ iq`.
pub fn near_surface_reflection(q: f64, m: &MediumResponse, d: f64) -> ReflectionPair {
    let x = (-2.0 * q * d).exp();
    let (eps, mu) = (m.eps(), m.mu());
    ReflectionPair {
        rs: ((mu - 1.0) - (mu + 1.0) * x) / ((mu + 1.0) - (mu - 1.0) * x),
        rp: ((eps - 1.0) + (eps + 1.0) * x) / ((eps + 1.0) + (eps - 1.0) * x),
    }
}

/// `q` where `|(ε+1) + (ε−1)e^{−2qd}|` (or its s analogue) is smallest.
fn resonance(a_plus: Complex64, a_minus: Complex64, d: f64) -> Option<f64> {
    if d <= 0.0 || a_plus.norm() == 0.0 {
        return None;
    }
    let q = (a_minus.norm() / a_plus.norm()).ln() / (2.0 * d);
    (q > 0.0).then_some(q)
}

/// Evaluates the nonretarded potential, force and decay integrals together.
pub fn near_surface(z_a: f64, m: &MediumResponse, d: f64, o: &DipoleOrientation) -> Result<NearSurface> {
    check_height(z_a)?;
    check_thickness(d)?;
    if m.is_lossless() {
        return Err(Error::LosslessMedium);
    }
    if z_a > RECOMMENDED_MAX_HEIGHT {
        log::warn!("near-surface forms used at z_A = {z_a} > {RECOMMENDED_MAX_HEIGHT}");
    }
    let q_max = CUTOFF / z_a;
    let mut breaks = vec![0.0, 1.0 / z_a, q_max];
    breaks.extend(resonance(m.eps() + 1.0, m.eps() - 1.0, d));
    breaks.extend(resonance(m.mu() + 1.0, m.mu() - 1.0, d));
    breaks.retain(|q| *q <= q_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let f = |q: f64| {
        let r = near_surface_reflection(q, m, d);
        let w = (-2.0 * q * z_a).exp();
        let q2 = q * q;
        [w * r.rs, w * q2 * r.rp, w * q * r.rs, w * q2 * q * r.rp]
    };
    let opts = AdaptiveOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_subdivisions: 2000,
    };
    let v = integrate(f, &breaks, &opts)?.value;

    let ws = o.p_par();
    let wp = o.p_par() + 2.0 * o.p_perp();
    Ok(NearSurface {
        potential: PolarizationSplit {
            s: -0.375 * ws * v[0].re,
            p: -0.375 * wp * v[1].re,
        },
        force: PolarizationSplit {
            s: -0.75 * ws * v[2].re,
            p: -0.75 * wp * v[3].re,
        },
        decay: PolarizationSplit {
            s: 0.75 * ws * v[0].im,
            p: 0.75 * wp * v[1].im,
        },
    })
}

/// Nonretarded potential in units of `ħΓ₀`, split by polarization.
pub fn near_surface_potential(
    z_a: f64,
    m: &MediumResponse,
    d: f64,
    o: &DipoleOrientation,
) -> Result<PolarizationSplit> {
    Ok(near_surface(z_a, m, d, o)?.potential)
}

/// Surface-induced part of `Γ/Γ₀` in the nonretarded regime, split by
/// polarization. Both parts are nonnegative for passive media.
pub fn near_surface_decay(
    z_a: f64,
    m: &MediumResponse,
    d: f64,
    o: &DipoleOrientation,
) -> Result<PolarizationSplit> {
    Ok(near_surface(z_a, m, d, o)?.decay)
}

/// Nonretarded limits for a semi-infinite medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceLimits {
    /// `U/(ħΓ₀)`
    pub potential: f64,
    /// `F/(ħΓ₀ω₁₀/c)`
    pub force: f64,
    /// `Γ/Γ₀`
    pub rate: f64,
}

/// `U = −(3/32)(p∥+2p⊥)(|ε|²−1)/(z³|ε+1|²)` and
/// `Γ/Γ₀ = 1 + (3/8)(p∥+2p⊥) Im ε/(z³|ε+1|²)`.
pub fn interface_limits(z_a: f64, m: &MediumResponse, o: &DipoleOrientation) -> Result<InterfaceLimits> {
    check_height(z_a)?;
    let eps = m.eps();
    let den = (eps + 1.0).norm_sqr();
    if den == 0.0 {
        return Err(Error::invalid("eps", "interface limits are singular at eps = -1"));
    }
    let w = (o.p_par() + 2.0 * o.p_perp()) / (z_a * z_a * z_a * den);
    let potential = -(3.0 / 32.0) * w * (eps.norm_sqr() - 1.0);
    Ok(InterfaceLimits {
        potential,
        force: 3.0 * potential / z_a,
        rate: 1.0 + 0.375 * w * eps.im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn interface_medium() -> MediumResponse {
        MediumResponse::new(c(-1.0, 0.01), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn interface_rate_arithmetic() {
        let lim = interface_limits(0.1, &interface_medium(), &DipoleOrientation::perpendicular()).unwrap();
        assert_relative_eq!(lim.rate, 1.0 + 7.5e4, max_relative = 1e-12);
    }

    #[test]
    fn interface_vacuum_is_trivial() {
        let m = MediumResponse::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let lim = interface_limits(0.3, &m, &DipoleOrientation::random()).unwrap();
        assert_eq!(lim.potential, 0.0);
        assert_eq!(lim.rate, 1.0);
    }

    #[test]
    fn interface_small_permittivity_repels() {
        let m = MediumResponse::new(c(0.5, 0.01), c(1.0, 0.0)).unwrap();
        let lim = interface_limits(0.05, &m, &DipoleOrientation::parallel()).unwrap();
        assert!(lim.potential > 0.0);
    }

    #[test]
    fn thick_slab_reduces_to_interface() {
        let m = interface_medium();
        for o in [DipoleOrientation::parallel(), DipoleOrientation::perpendicular()] {
            for z in [1e-3, 1e-2, 0.05] {
                let ns = near_surface(z, &m, 1e3, &o).unwrap();
                let lim = interface_limits(z, &m, &o).unwrap();
                assert_relative_eq!(ns.potential.total(), lim.potential, max_relative = 1e-6);
                assert_relative_eq!(ns.rate(), lim.rate, max_relative = 1e-6);
                assert_relative_eq!(ns.force.total(), lim.force, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn bare_mirror_has_no_absorption() {
        let m = MediumResponse::lhm(1e-2).unwrap();
        for q in [0.01, 1.0, 50.0] {
            let r = near_surface_reflection(q, &m, 0.0);
            assert_eq!(r.rs.im, 0.0);
            assert_eq!(r.rp.im, 0.0);
        }
        let dec = near_surface_decay(0.01, &m, 0.0, &DipoleOrientation::random()).unwrap();
        assert_eq!(dec.total(), 0.0);
    }

    #[test]
    fn power_laws_of_the_two_polarizations() {
        let slope = |x: f64, y: f64| (y.abs() / x.abs()).ln() / 10f64.ln();
        let o = DipoleOrientation::parallel();
        let m = MediumResponse::new(c(3.0, 0.1), c(3.0, 0.1)).unwrap();
        let a = near_surface_potential(1e-3, &m, 5.0, &o).unwrap();
        let b = near_surface_potential(1e-2, &m, 5.0, &o).unwrap();
        assert!((slope(a.p, b.p) + 3.0).abs() < 0.05, "{}", slope(a.p, b.p));
        assert!((slope(a.s, b.s) + 1.0).abs() < 0.05, "{}", slope(a.s, b.s));

        // Near ε = μ = −1 the slab term adds a z-independent s offset of
        // order 10² that hides the 1/z law in this window; p is unaffected.
        let m = MediumResponse::lhm(1e-3).unwrap();
        let a = near_surface_potential(1e-3, &m, 5.0, &o).unwrap();
        let b = near_surface_potential(1e-2, &m, 5.0, &o).unwrap();
        assert!((slope(a.p, b.p) + 3.0).abs() < 0.05, "{}", slope(a.p, b.p));
        assert!(a.s < 0.0 && b.s > 0.0);
    }

    #[test]
    fn force_matches_finite_difference() {
        let m = MediumResponse::lhm(1e-3).unwrap();
        let o = DipoleOrientation::random();
        let z = 0.02;
        let h = 1e-6;
        let up = near_surface_potential(z + h, &m, 5.0, &o).unwrap().total();
        let dn = near_surface_potential(z - h, &m, 5.0, &o).unwrap().total();
        let f = near_surface(z, &m, 5.0, &o).unwrap().force.total();
        assert_relative_eq!(f, -(up - dn) / (2.0 * h), max_relative = 1e-6);
    }

    #[test]
    fn lossless_rejected() {
        let m = MediumResponse::new(c(-1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(
            near_surface_potential(0.01, &m, 5.0, &DipoleOrientation::parallel()),
            Err(Error::LosslessMedium)
        );
    }

    #[test]
    fn strongly_magnetic_thick_slab_has_positive_re_rs() {
        // Re r_s ≤ 0 is not universal for |μ| ≥ 1: once e^{−2qd} is small the
        // first numerator term (|μ|² − 1) wins.
        let m = MediumResponse::new(c(1.0, 0.0), c(2.0, 0.1)).unwrap();
        let r = near_surface_reflection(10.0, &m, 5.0);
        assert!(r.rs.re > 0.0);
    }

    fn medium_strategy() -> impl Strategy<Value = (Complex64, Complex64)> {
        (1.0f64..3.0, 1e-6f64..std::f64::consts::PI, 1.0f64..3.0, 1e-6f64..std::f64::consts::PI)
            .prop_map(|(re, pe, rm, pm)| (Complex64::from_polar(re, pe), Complex64::from_polar(rm, pm)))
    }

    proptest! {
        #[test]
        fn re_rp_nonnegative_for_large_permittivity(
            (eps, mu) in medium_strategy(), q in 1e-3f64..50.0, d in 0.0f64..10.0,
        ) {
            let m = MediumResponse::new(eps, mu).unwrap();
            let r = near_surface_reflection(q, &m, d);
            prop_assert!(r.rp.re >= -1e-12);
        }

        #[test]
        fn re_rs_nonpositive_while_slab_term_dominates(
            (eps, mu) in medium_strategy(), q in 1e-3f64..50.0, d in 0.0f64..10.0,
        ) {
            let m = MediumResponse::new(eps, mu).unwrap();
            let x = (-2.0 * q * d).exp();
            let a = mu.norm_sqr();
            if (a - 1.0) * (1.0 + x * x) > 2.0 * (a + 1.0) * x {
                return Ok(());
            }
            let r = near_surface_reflection(q, &m, d);
            prop_assert!(r.rs.re <= 1e-12);
        }

        #[test]
        fn im_parts_nonnegative(
            (eps, mu) in medium_strategy(), q in 1e-3f64..50.0, d in 0.0f64..10.0,
        ) {
            let m = MediumResponse::new(eps, mu).unwrap();
            let r = near_surface_reflection(q, &m, d);
            prop_assert!(r.rs.im >= -1e-12 && r.rp.im >= -1e-12);
        }
    }
}
