//! Dimensionless diagonal scattering Green tensor `ĝ = (c/ω₁₀)·G⁽¹⁾(z_A, z_A)`
//! of the slab + mirror stack.
//!
//! After the angular integration the tensor is diagonal with
//!
//! ```text
//! ĝxx = ĝyy = (i/8π) ∫₀^∞ dq (q/β) e^{2iβz} (r_s − β² r_p)
//! ĝzz       = (i/8π) ∫₀^∞ dq (q/β) e^{2iβz} 2q² r_p
//! ```
//!
//! The `q` integral is split at the light line. Below it we integrate over
//! `β ∈ [0, 1]` (propagating waves, `q dq/β = −dβ`), above it over
//! `b = −iβ ∈ [0, ∞)` (evanescent waves, `q dq/β = −i db`). Both
//! substitutions remove the `1/β` endpoint singularity.
//!
//! The same pass also integrates `∂/∂z` of every integrand, which gives the
//! force without numerical differentiation.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::stack_reflection;
use crate::quad::{integrate, AdaptiveOptions, Integral};
use crate::spp::pole_proximity;
use crate::units::{check_height, check_thickness, MediumResponse};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Heights above which the propagating sector is pre-split into quarter
/// oscillations.
const OSCILLATION_SPLIT_HEIGHT: f64 = 20.0;

/// Diagonal of the scattering Green tensor; `ĝyy = ĝxx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenDiag {
    pub gxx: Complex64,
    pub gzz: Complex64,
}

/// Green tensor contributions by polarization: `xx_s` from s waves, `xx_p`
/// and `zz` from p waves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarizedGreen {
    pub xx_s: Complex64,
    pub xx_p: Complex64,
    pub zz: Complex64,
}

impl PolarizedGreen {
    pub fn diag(&self) -> GreenDiag {
        GreenDiag {
            gxx: self.xx_s + self.xx_p,
            gzz: self.zz,
        }
    }

    fn from_slice(v: &[Complex64]) -> Self {
        PolarizedGreen {
            xx_s: v[0],
            xx_p: v[1],
            zz: v[2],
        }
    }
}

impl Add for PolarizedGreen {
    type Output = PolarizedGreen;
    fn add(self, o: PolarizedGreen) -> PolarizedGreen {
        PolarizedGreen {
            xx_s: self.xx_s + o.xx_s,
            xx_p: self.xx_p + o.xx_p,
            zz: self.zz + o.zz,
        }
    }
}

impl Mul<f64> for PolarizedGreen {
    type Output = PolarizedGreen;
    fn mul(self, k: f64) -> PolarizedGreen {
        PolarizedGreen {
            xx_s: self.xx_s * k,
            xx_p: self.xx_p * k,
            zz: self.zz * k,
        }
    }
}

/// Values and `z_A` derivatives per wave sector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GreenBreakdown {
    pub propagating: PolarizedGreen,
    pub evanescent: PolarizedGreen,
    pub d_propagating: PolarizedGreen,
    pub d_evanescent: PolarizedGreen,
}

impl GreenBreakdown {
    pub fn total(&self) -> PolarizedGreen {
        self.propagating + self.evanescent
    }

    pub fn derivative(&self) -> PolarizedGreen {
        self.d_propagating + self.d_evanescent
    }

    pub fn diag(&self) -> GreenDiag {
        self.total().diag()
    }
}

/// Controls for [`green_scattering_diag`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub evanescent_cutoff_factor: f64,
    /// `None` switches pole-guided splitting on when `min(Im ε, Im μ) < 10⁻³`.
    pub pole_guided: Option<bool>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            evanescent_cutoff_factor: 40.0,
            pole_guided: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature", "tolerances must be > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid("quadrature", "max_subdivisions must be >= 1"));
        }
        if !(self.evanescent_cutoff_factor > 0.0) {
            return Err(Error::invalid("quadrature", "evanescent_cutoff_factor must be > 0"));
        }
        Ok(())
    }

    pub fn pole_guided_for(&self, m: &MediumResponse) -> bool {
        self.pole_guided.unwrap_or(m.min_absorption() < 1e-3)
    }

    fn adaptive(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    /// Evanescent truncation `b_max = max(factor/(2z), 10)`.
    pub fn evanescent_cutoff(&self, z_a: f64) -> f64 {
        (self.evanescent_cutoff_factor / (2.0 * z_a)).max(10.0)
    }
}

/// Evanescent-sector split points (in `b`) for a given medium and slab,
/// derived from the SPP poles. Empty when pole guidance is off.
pub fn evanescent_splits(m: &MediumResponse, d: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    if !cfg.pole_guided_for(m) || d == 0.0 {
        return Ok(Vec::new());
    }
    Ok(pole_proximity(m, d)?
        .into_iter()
        .map(|q| (q * q - 1.0).sqrt())
        .filter(|b| *b > 0.0)
        .collect())
}

fn propagating_integrand(beta: f64, z_a: f64, m: &MediumResponse, d: f64) -> Result<[Complex64; 6]> {
    let q2 = 1.0 - beta * beta;
    let r = stack_reflection(Complex64::new(beta, 0.0), q2, m, d, q2.max(0.0).sqrt())?;
    let pref = I * Complex64::from_polar(1.0, 2.0 * beta * z_a) / (8.0 * PI);
    let xx_s = pref * r.rs;
    let xx_p = pref * (-beta * beta) * r.rp;
    let zz = pref * (2.0 * q2) * r.rp;
    let dz = 2.0 * I * beta;
    Ok([xx_s, xx_p, zz, xx_s * dz, xx_p * dz, zz * dz])
}

fn evanescent_integrand(b: f64, z_a: f64, m: &MediumResponse, d: f64) -> Result<[Complex64; 6]> {
    let q2 = 1.0 + b * b;
    let r = stack_reflection(Complex64::new(0.0, b), q2, m, d, q2.sqrt())?;
    // (i/8π)·(1/i) = 1/(8π)
    let pref = (-2.0 * b * z_a).exp() / (8.0 * PI);
    let xx_s = r.rs * pref;
    let xx_p = r.rp * (pref * b * b);
    let zz = r.rp * (pref * 2.0 * q2);
    let dz = -2.0 * b;
    Ok([xx_s, xx_p, zz, xx_s * dz, xx_p * dz, zz * dz])
}

/// Runs the adaptive engine over an integrand that can fail pointwise.
fn integrate_fallible<F>(f: F, breakpoints: &[f64], opts: &AdaptiveOptions) -> Result<Integral<6>>
where
    F: Fn(f64) -> Result<[Complex64; 6]>,
{
    let failure = std::cell::Cell::new(None::<Error>);
    let out = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                [ZERO; 6]
            }
        },
        breakpoints,
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    out
}

fn check_inputs(z_a: f64, m: &MediumResponse, d: f64, cfg: &QuadratureConfig) -> Result<()> {
    check_height(z_a)?;
    check_thickness(d)?;
    cfg.validate()?;
    if m.is_lossless() {
        return Err(Error::LosslessMedium);
    }
    Ok(())
}

fn propagating_breakpoints(z_a: f64) -> Vec<f64> {
    if z_a <= OSCILLATION_SPLIT_HEIGHT {
        return vec![0.0, 1.0];
    }
    let width = PI / (2.0 * z_a);
    let n = (1.0 / width).ceil() as usize;
    (0..=n).map(|k| (k as f64 * width).min(1.0)).collect()
}

/// Full per-sector, per-polarization evaluation with explicit evanescent
/// split points (in `b`). Use [`evanescent_splits`] to obtain them once per
/// medium and slab when sweeping many heights.
pub fn green_breakdown_with_splits(
    z_a: f64,
    m: &MediumResponse,
    d: f64,
    cfg: &QuadratureConfig,
    splits: &[f64],
) -> Result<GreenBreakdown> {
    check_inputs(z_a, m, d, cfg)?;
    let opts = cfg.adaptive();

    let prop = integrate_fallible(
        |beta| propagating_integrand(beta, z_a, m, d),
        &propagating_breakpoints(z_a),
        &opts,
    )?;

    let mut b_max = cfg.evanescent_cutoff(z_a);
    if let Some(&last) = splits.iter().max_by(|a, b| a.total_cmp(b)) {
        b_max = b_max.max(last);
    }
    let mut points: Vec<f64> = std::iter::once(0.0)
        .chain(splits.iter().copied().filter(|&s| s > 0.0 && s < b_max))
        .chain(std::iter::once(b_max))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let evan_f = |b: f64| evanescent_integrand(b, z_a, m, d);
    let mut evan = integrate_fallible(evan_f, &points, &opts)?;

    // Extend the truncation until the discarded tail is below tolerance. The
    // envelope bounds ∫_B^∞ b³ e^{−2bz} db, which dominates every component.
    for _ in 0..16 {
        let edge = evan_f(b_max)?;
        let bz = b_max * z_a;
        let envelope = (1.0 + 1.5 / bz + 1.5 / (bz * bz) + 0.75 / (bz * bz * bz)) / (2.0 * z_a);
        let small = (0..6).all(|i| {
            let tol = cfg.abs_tol.max(cfg.rel_tol * evan.value[i].norm());
            edge[i].norm() * envelope <= tol
        });
        if small {
            break;
        }
        let next = 2.0 * b_max;
        let extra = integrate_fallible(evan_f, &[b_max, next], &opts)?;
        for i in 0..6 {
            evan.value[i] += extra.value[i];
        }
        b_max = next;
    }

    Ok(GreenBreakdown {
        propagating: PolarizedGreen::from_slice(&prop.value[0..3]),
        evanescent: PolarizedGreen::from_slice(&evan.value[0..3]),
        d_propagating: PolarizedGreen::from_slice(&prop.value[3..6]),
        d_evanescent: PolarizedGreen::from_slice(&evan.value[3..6]),
    })
}

/// Per-sector evaluation; locates SPP poles first when pole guidance is on.
pub fn green_breakdown(z_a: f64, m: &MediumResponse, d: f64, cfg: &QuadratureConfig) -> Result<GreenBreakdown> {
    check_inputs(z_a, m, d, cfg)?;
    let splits = evanescent_splits(m, d, cfg)?;
    green_breakdown_with_splits(z_a, m, d, cfg, &splits)
}

/// Diagonal scattering Green tensor at the atom position.
pub fn green_scattering_diag(z_a: f64, m: &MediumResponse, d: f64, cfg: &QuadratureConfig) -> Result<GreenDiag> {
    Ok(green_breakdown(z_a, m, d, cfg)?.diag())
}

/// Sector results of [`oracle_green`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSectors {
    pub propagating: PolarizedGreen,
    pub evanescent: PolarizedGreen,
}

impl OracleSectors {
    pub fn diag(&self) -> GreenDiag {
        (self.propagating + self.evanescent).diag()
    }
}

fn trapezoid<F>(f: F, a: f64, b: f64, n_nodes: usize) -> Result<[Complex64; 3]>
where
    F: Fn(f64) -> Result<[Complex64; 6]>,
{
    let h = (b - a) / (n_nodes - 1) as f64;
    let mut acc = [ZERO; 3];
    for k in 0..n_nodes {
        let x = a + h * k as f64;
        let w = if k == 0 || k == n_nodes - 1 { 0.5 } else { 1.0 };
        let v = f(x)?;
        for i in 0..3 {
            acc[i] += v[i] * w;
        }
    }
    Ok(acc.map(|v| v * h))
}

/// Fixed-step composite trapezoid evaluation with `n_nodes` points per
/// sector, over `β ∈ [0, 1]` and `b ∈ [0, b_max]`. Slow; intended for
/// verification only.
pub fn oracle_green_sectors(z_a: f64, m: &MediumResponse, d: f64, n_nodes: usize) -> Result<OracleSectors> {
    let cfg = QuadratureConfig::default();
    check_inputs(z_a, m, d, &cfg)?;
    if n_nodes < 10_000 {
        return Err(Error::invalid("n_nodes", "the oracle needs at least 10^4 nodes"));
    }
    let prop = trapezoid(|beta| propagating_integrand(beta, z_a, m, d), 0.0, 1.0, n_nodes)?;
    let b_max = cfg.evanescent_cutoff(z_a);
    let evan = trapezoid(|b| evanescent_integrand(b, z_a, m, d), 0.0, b_max, n_nodes)?;
    Ok(OracleSectors {
        propagating: PolarizedGreen::from_slice(&prop),
        evanescent: PolarizedGreen::from_slice(&evan),
    })
}

pub fn oracle_green(z_a: f64, m: &MediumResponse, d: f64, n_nodes: usize) -> Result<GreenDiag> {
    Ok(oracle_green_sectors(z_a, m, d, n_nodes)?.diag())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // Closed-form perfect-mirror tensor at distance z (z̃ = 2z), written out
    // independently of the ideal module.
    fn mirror(z: f64) -> GreenDiag {
        let t = 2.0 * z;
        let e = I * t;
        GreenDiag {
            gxx: e.exp() * (1.0 - I * t - t * t) / (4.0 * PI * t.powi(3)),
            gzz: e.exp() * (1.0 - I * t) / (2.0 * PI * t.powi(3)),
        }
    }

    #[test]
    fn zero_thickness_is_a_mirror() {
        let m = MediumResponse::lhm(0.1).unwrap();
        let g = green_scattering_diag(1.0, &m, 0.0, &QuadratureConfig::default()).unwrap();
        let want = mirror(1.0);
        assert!(rel(g.gxx, want.gxx) < 1e-8);
        assert!(rel(g.gzz, want.gzz) < 1e-8);
    }

    #[test]
    fn adaptive_matches_oracle() {
        let m = MediumResponse::lhm(0.1).unwrap();
        let g = green_scattering_diag(6.0, &m, 5.0, &QuadratureConfig::default()).unwrap();
        let o = oracle_green(6.0, &m, 5.0, 200_000).unwrap();
        assert!(rel(g.gxx, o.gxx) < 1e-6, "{} vs {}", g.gxx, o.gxx);
        assert!(rel(g.gzz, o.gzz) < 1e-6, "{} vs {}", g.gzz, o.gzz);
    }

    #[test]
    fn far_field_decays() {
        let m = MediumResponse::lhm(1e-3).unwrap();
        let g = green_scattering_diag(100.0, &m, 5.0, &QuadratureConfig::default()).unwrap();
        assert!(g.gxx.norm() < 1e-2 && g.gzz.norm() < 1e-2, "{g:?}");
    }

    #[test]
    fn finite_inside_the_slab_shadow() {
        let m = MediumResponse::lhm(1e-4).unwrap();
        for z in [0.5, 2.5, 4.99, 5.0] {
            let g = green_scattering_diag(z, &m, 5.0, &QuadratureConfig::default()).unwrap();
            assert!(g.gxx.is_finite() && g.gzz.is_finite());
        }
    }

    #[test]
    fn sector_dominance() {
        let cfg = QuadratureConfig::default();
        let m = MediumResponse::lhm(1e-3).unwrap();
        let near = green_breakdown(0.05, &m, 5.0, &cfg).unwrap();
        let total = near.total().zz.re;
        assert!(near.evanescent.zz.re.abs() > 0.9 * total.abs());

        // Far from the stack only normal incidence survives:
        // ĝxx ≈ r_s(q = 0) e^{2iz}/(8πz), ĝzz = O(1/z²).
        let m = MediumResponse::lhm(1e-1).unwrap();
        let z = 300.0;
        let far = green_breakdown(z, &m, 5.0, &cfg).unwrap().diag();
        let rs0 = stack_reflection(Complex64::new(1.0, 0.0), 0.0, &m, 5.0, 0.0).unwrap().rs;
        let lead = rs0 * Complex64::from_polar(1.0, 2.0 * z) / (8.0 * PI * z);
        assert!((far.gxx - lead).norm() < 0.05 * lead.norm(), "{far:?} vs {lead}");
        assert!(far.gzz.norm() < 0.05 * lead.norm());
    }

    #[test]
    fn oscillation_presplit_covers_unit_interval() {
        let p = propagating_breakpoints(50.0);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 1.0);
        assert!(p.windows(2).all(|w| w[1] - w[0] <= PI / 100.0 + 1e-15));
        assert_eq!(propagating_breakpoints(3.0), vec![0.0, 1.0]);
    }

    #[test]
    fn lossless_is_routed_away() {
        let m = MediumResponse::new(Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(
            green_scattering_diag(1.0, &m, 5.0, &QuadratureConfig::default()),
            Err(Error::LosslessMedium)
        );
    }

    #[test]
    fn oracle_needs_enough_nodes() {
        let m = MediumResponse::lhm(0.1).unwrap();
        assert!(oracle_green(1.0, &m, 1.0, 100).is_err());
    }
}
