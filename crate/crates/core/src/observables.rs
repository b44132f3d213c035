//! Potential, force and decay rate from the scattering Green tensor.
//!
//! ```text
//! U/(ħΓ₀)            = −3π (p∥ Re ĝxx + p⊥ Re ĝzz)
//! F/(ħΓ₀ω₁₀/c)      = 3π (p∥ Re ∂ĝxx + p⊥ Re ∂ĝzz)
//! Γ/Γ₀               = 1 + 6π (p∥ Im ĝxx + p⊥ Im ĝzz)
//! ```
//!
//! Only the resonant part of the potential is kept, so results describe the
//! excited atom on time scales short against its lifetime.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{interface_limits, near_surface};
use crate::error::{Error, Result};
use crate::green::{evanescent_splits, green_breakdown_with_splits, GreenDiag, QuadratureConfig};
use crate::ideal::{ideal_green, ideal_green_derivative, ideal_green_imag};
use crate::units::{check_height, check_thickness, DipoleOrientation, MediumResponse};

/// Negative rates down to this size are treated as round-off and clamped.
const RATE_ROUNDOFF: f64 = 1e-9;

pub fn reduced_potential(g: &GreenDiag, o: &DipoleOrientation) -> f64 {
    -3.0 * PI * (o.p_par() * g.gxx.re + o.p_perp() * g.gzz.re)
}

/// Force from `∂ĝ/∂z_A`.
pub fn reduced_force(dg: &GreenDiag, o: &DipoleOrientation) -> f64 {
    3.0 * PI * (o.p_par() * dg.gxx.re + o.p_perp() * dg.gzz.re)
}

pub fn reduced_rate(g: &GreenDiag, o: &DipoleOrientation) -> f64 {
    1.0 + 6.0 * PI * (o.p_par() * g.gxx.im + o.p_perp() * g.gzz.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Numeric,
    Ideal,
    NearSurface,
    Interface,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Numeric => "numeric",
            Backend::Ideal => "ideal",
            Backend::NearSurface => "near_surface",
            Backend::Interface => "interface",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Backend::Numeric),
            "ideal" => Ok(Backend::Ideal),
            "near_surface" | "near-surface" => Ok(Backend::NearSurface),
            "interface" => Ok(Backend::Interface),
            _ => Err(Error::invalid("backend", format!("unknown backend `{s}`"))),
        }
    }
}

/// Picks a backend when none is requested: lossless `ε = μ = −1` goes to the
/// closed forms, every other lossless medium is unsupported, lossy media go
/// to the numerical quadrature.
pub fn resolve_backend(requested: Option<Backend>, m: &MediumResponse) -> Result<Backend> {
    if let Some(b) = requested {
        return Ok(b);
    }
    if m.is_ideal_lhm() {
        Ok(Backend::Ideal)
    } else if m.is_lossless() {
        Err(Error::UnsupportedIdealMedium {
            eps: m.eps().to_string(),
            mu: m.mu().to_string(),
        })
    } else {
        Ok(Backend::Numeric)
    }
}

/// Observables at one height. The `*_part_*` fields are the
/// orientation-weighted Green tensor pieces: `s = p∥ ĝxx^s`,
/// `p = p∥ ĝxx^p + p⊥ ĝzz`, so `U = −3π(s_re + p_re)` and
/// `Γ/Γ₀ = 1 + 6π(s_im + p_im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservablePoint {
    pub z_a: f64,
    pub potential: f64,
    pub force: f64,
    pub rate: f64,
    pub backend: Backend,
    pub s_part_re: f64,
    pub p_part_re: f64,
    pub s_part_im: f64,
    pub p_part_im: f64,
    /// Set when `z_A` is below the caller's lattice-scale threshold, where
    /// the macroscopic description stops being reliable.
    #[serde(default)]
    pub below_lattice_scale: bool,
}

/// Decay rate alone; also defined where the potential is not (inside the
/// shadow of the ideal slab).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub z_a: f64,
    pub rate: f64,
    pub backend: Backend,
    pub s_part_im: f64,
    pub p_part_im: f64,
}

fn checked_rate(rate: f64, z_a: f64) -> Result<f64> {
    if !rate.is_finite() || rate < -RATE_ROUNDOFF {
        return Err(Error::NegativeRate { rate, z_a });
    }
    Ok(rate.max(0.0))
}

/// `p∥ ĝxx^s` of the ideal stack: a mirror at `z = d` has `r_s = −1`, which
/// gives `ĝxx^s = −e^{iz̃}/(8πz̃)`.
fn ideal_s_part(z_a: f64, d: f64) -> Complex64 {
    let t = 2.0 * (z_a - d);
    if t.abs() < 1e-8 {
        return Complex64::new(f64::NAN, -1.0 / (8.0 * PI));
    }
    -Complex64::from_polar(1.0, t) / (8.0 * PI * t)
}

/// Evaluates observables for one medium, slab and orientation, caching the
/// SPP-derived quadrature split points.
#[derive(Debug, Clone)]
pub struct Evaluator {
    medium: MediumResponse,
    d: f64,
    orientation: DipoleOrientation,
    cfg: QuadratureConfig,
    backend: Backend,
    splits: Vec<f64>,
    lattice_scale: Option<f64>,
}

impl Evaluator {
    pub fn new(
        medium: MediumResponse,
        d: f64,
        orientation: DipoleOrientation,
        cfg: QuadratureConfig,
        backend: Option<Backend>,
    ) -> Result<Self> {
        check_thickness(d)?;
        cfg.validate()?;
        let backend = resolve_backend(backend, &medium)?;
        let splits = if backend == Backend::Numeric {
            if medium.is_lossless() {
                return Err(Error::LosslessMedium);
            }
            evanescent_splits(&medium, d, &cfg)?
        } else {
            Vec::new()
        };
        Ok(Evaluator {
            medium,
            d,
            orientation,
            cfg,
            backend,
            splits,
            lattice_scale: None,
        })
    }

    /// Flags points with `z_A` below `scale` (in `c/ω₁₀`).
    pub fn with_lattice_scale(mut self, scale: Option<f64>) -> Self {
        self.lattice_scale = scale;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn medium(&self) -> &MediumResponse {
        &self.medium
    }

    pub fn thickness(&self) -> f64 {
        self.d
    }

    pub fn orientation(&self) -> &DipoleOrientation {
        &self.orientation
    }

    /// Scattering Green tensor and its `z_A` derivative (numeric or ideal).
    pub fn green_with_derivative(&self, z_a: f64) -> Result<(GreenDiag, GreenDiag)> {
        match self.backend {
            Backend::Numeric => {
                let b = green_breakdown_with_splits(z_a, &self.medium, self.d, &self.cfg, &self.splits)?;
                Ok((b.diag(), b.derivative().diag()))
            }
            Backend::Ideal => Ok((ideal_green(z_a, self.d)?, ideal_green_derivative(z_a, self.d)?)),
            _ => Err(Error::NotApplicable("the asymptotic backends do not produce a Green tensor")),
        }
    }

    pub fn point(&self, z_a: f64) -> Result<ObservablePoint> {
        check_height(z_a)?;
        let o = &self.orientation;
        let (potential, force, rate, s, p) = match self.backend {
            Backend::Numeric => {
                let b = green_breakdown_with_splits(z_a, &self.medium, self.d, &self.cfg, &self.splits)?;
                let g = b.diag();
                let t = b.total();
                let s = t.xx_s * o.p_par();
                let p = t.xx_p * o.p_par() + t.zz * o.p_perp();
                (
                    reduced_potential(&g, o),
                    reduced_force(&b.derivative().diag(), o),
                    reduced_rate(&g, o),
                    s,
                    p,
                )
            }
            Backend::Ideal => {
                let g = ideal_green(z_a, self.d)?;
                let dg = ideal_green_derivative(z_a, self.d)?;
                let s = ideal_s_part(z_a, self.d) * o.p_par();
                let p = g.gxx * o.p_par() + g.gzz * o.p_perp() - s;
                (reduced_potential(&g, o), reduced_force(&dg, o), reduced_rate(&g, o), s, p)
            }
            Backend::NearSurface => {
                let ns = near_surface(z_a, &self.medium, self.d, o)?;
                let part = |u: f64, g: f64| Complex64::new(-u / (3.0 * PI), g / (6.0 * PI));
                (
                    ns.potential.total(),
                    ns.force.total(),
                    ns.rate(),
                    part(ns.potential.s, ns.decay.s),
                    part(ns.potential.p, ns.decay.p),
                )
            }
            Backend::Interface => {
                let lim = interface_limits(z_a, &self.medium, o)?;
                let p = Complex64::new(-lim.potential / (3.0 * PI), (lim.rate - 1.0) / (6.0 * PI));
                (lim.potential, lim.force, lim.rate, Complex64::new(0.0, 0.0), p)
            }
        };
        Ok(ObservablePoint {
            z_a,
            potential,
            force,
            rate: checked_rate(rate, z_a)?,
            backend: self.backend,
            s_part_re: s.re,
            p_part_re: p.re,
            s_part_im: s.im,
            p_part_im: p.im,
            below_lattice_scale: self.lattice_scale.is_some_and(|a| z_a < a),
        })
    }

    pub fn rate_point(&self, z_a: f64) -> Result<RatePoint> {
        check_height(z_a)?;
        if self.backend != Backend::Ideal {
            let pt = self.point(z_a)?;
            return Ok(RatePoint {
                z_a,
                rate: pt.rate,
                backend: pt.backend,
                s_part_im: pt.s_part_im,
                p_part_im: pt.p_part_im,
            });
        }
        let o = &self.orientation;
        let (xx, zz) = ideal_green_imag(z_a, self.d)?;
        let s = ideal_s_part(z_a, self.d).im * o.p_par();
        let total = xx * o.p_par() + zz * o.p_perp();
        Ok(RatePoint {
            z_a,
            rate: checked_rate(1.0 + 6.0 * PI * total, z_a)?,
            backend: Backend::Ideal,
            s_part_im: s,
            p_part_im: total - s,
        })
    }

    /// Evaluates `f` at every height, in parallel, preserving input order.
    /// `jobs = None` uses the global rayon pool.
    pub fn sweep_with<T, F>(&self, zs: &[f64], jobs: Option<usize>, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Self, f64) -> Result<T> + Sync,
    {
        let run = || zs.par_iter().map(|&z| f(self, z)).collect::<Result<Vec<T>>>();
        match jobs {
            None => run(),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::invalid("jobs", e.to_string()))?;
                pool.install(run)
            }
        }
    }

    pub fn sweep(&self, zs: &[f64], jobs: Option<usize>) -> Result<Vec<ObservablePoint>> {
        self.sweep_with(zs, jobs, |e, z| e.point(z))
    }

    pub fn rate_sweep(&self, zs: &[f64], jobs: Option<usize>) -> Result<Vec<RatePoint>> {
        self.sweep_with(zs, jobs, |e, z| e.rate_point(z))
    }
}

fn auto(m: &MediumResponse, d: f64, o: &DipoleOrientation, cfg: &QuadratureConfig) -> Result<Evaluator> {
    Evaluator::new(*m, d, *o, *cfg, None)
}

/// Resonant potential in units of `ħΓ₀`.
pub fn vdw_potential(
    z_a: f64,
    m: &MediumResponse,
    d: f64,
    o: &DipoleOrientation,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(auto(m, d, o, cfg)?.point(z_a)?.potential)
}

/// `F = −∂U/∂z_A` in units of `ħΓ₀ω₁₀/c`, differentiated under the integral.
pub fn vdw_force(z_a: f64, m: &MediumResponse, d: f64, o: &DipoleOrientation, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(auto(m, d, o, cfg)?.point(z_a)?.force)
}

/// `Γ/Γ₀`; for the ideal slab also defined at and below the focal point.
pub fn decay_rate(z_a: f64, m: &MediumResponse, d: f64, o: &DipoleOrientation, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(auto(m, d, o, cfg)?.rate_point(z_a)?.rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::oracle_green;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn eval(eta: f64, d: f64, o: DipoleOrientation) -> Evaluator {
        Evaluator::new(MediumResponse::lhm(eta).unwrap(), d, o, cfg(), None).unwrap()
    }

    #[test]
    fn reduced_forms_compose() {
        let g = GreenDiag {
            gxx: Complex64::new(0.1, 0.2),
            gzz: Complex64::new(-0.3, 0.05),
        };
        let o = DipoleOrientation::new(0.25, 0.75).unwrap();
        assert_relative_eq!(reduced_potential(&g, &o), -3.0 * PI * (0.025 - 0.225), max_relative = 1e-15);
        assert_relative_eq!(reduced_rate(&g, &o), 1.0 + 6.0 * PI * (0.05 + 0.0375), max_relative = 1e-15);
    }

    #[test]
    fn backend_routing() {
        let ideal = MediumResponse::new(Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(resolve_backend(None, &ideal).unwrap(), Backend::Ideal);
        let vac = MediumResponse::new(Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(resolve_backend(None, &vac), Err(Error::UnsupportedIdealMedium { .. })));
        let lossy = MediumResponse::lhm(1e-3).unwrap();
        assert_eq!(resolve_backend(None, &lossy).unwrap(), Backend::Numeric);
        assert_eq!(resolve_backend(Some(Backend::Ideal), &lossy).unwrap(), Backend::Ideal);
    }

    #[test]
    fn pinned_against_oracle() {
        let m = MediumResponse::lhm(0.1).unwrap();
        let o = DipoleOrientation::perpendicular();
        let u = vdw_potential(6.0, &m, 5.0, &o, &cfg()).unwrap();
        let g = oracle_green(6.0, &m, 5.0, 200_000).unwrap();
        assert_relative_eq!(u, reduced_potential(&g, &o), max_relative = 1e-6);
    }

    #[test]
    fn parts_recombine() {
        for e in [
            eval(1e-2, 5.0, DipoleOrientation::random()),
            Evaluator::new(
                MediumResponse::lhm(1e-2).unwrap(),
                5.0,
                DipoleOrientation::random(),
                cfg(),
                Some(Backend::Ideal),
            )
            .unwrap(),
        ] {
            let pt = e.point(6.3).unwrap();
            assert_relative_eq!(pt.potential, -3.0 * PI * (pt.s_part_re + pt.p_part_re), max_relative = 1e-12);
            assert_relative_eq!(pt.rate, 1.0 + 6.0 * PI * (pt.s_part_im + pt.p_part_im), max_relative = 1e-12);
        }
    }

    #[test]
    fn force_matches_finite_difference() {
        let e = eval(1e-2, 5.0, DipoleOrientation::random());
        let h = 1e-4;
        let fd = -(e.point(2.0 + h).unwrap().potential - e.point(2.0 - h).unwrap().potential) / (2.0 * h);
        assert_relative_eq!(e.point(2.0).unwrap().force, fd, max_relative = 1e-6);
    }

    #[test]
    fn attractive_near_the_surface() {
        for o in [DipoleOrientation::parallel(), DipoleOrientation::perpendicular()] {
            let pt = eval(1e-3, 5.0, o).point(0.02).unwrap();
            assert!(pt.force < 0.0, "{pt:?}");
            assert!(pt.potential < 0.0);
        }
    }

    #[test]
    fn parallel_barrier_and_perpendicular_attraction() {
        let par = eval(1e-3, 5.0, DipoleOrientation::parallel());
        let zs: Vec<f64> = (1..=70).map(|k| 0.02 * k as f64 + 0.08).collect();
        let us: Vec<f64> = par.sweep(&zs, None).unwrap().iter().map(|p| p.potential).collect();
        let has_positive_max = us.windows(3).any(|w| w[1] > 0.0 && w[1] > w[0] && w[1] > w[2]);
        assert!(has_positive_max);

        let perp = eval(1e-3, 5.0, DipoleOrientation::perpendicular());
        let zs: Vec<f64> = (0..60).map(|k| 0.05 + 0.05 * k as f64).collect();
        assert!(perp.sweep(&zs, None).unwrap().iter().all(|p| p.potential < 0.0));
    }

    #[test]
    fn strong_enhancement_near_surface() {
        let pt = eval(1e-5, 5.0, DipoleOrientation::perpendicular()).point(0.05).unwrap();
        assert!(pt.rate > 2.0 * 10.0, "{}", pt.rate);
    }

    #[test]
    fn absorption_breaks_focal_symmetry() {
        let o = DipoleOrientation::perpendicular();
        let e = eval(1e-3, 5.0, o);
        let a = e.point(4.0).unwrap().rate;
        let b = e.point(6.0).unwrap().rate;
        assert!((a - b).abs() > 1e-3 * a.abs(), "{a} {b}");
        let ideal = Evaluator::new(MediumResponse::lhm(1e-3).unwrap(), 5.0, o, cfg(), Some(Backend::Ideal)).unwrap();
        assert_relative_eq!(
            ideal.rate_point(4.0).unwrap().rate,
            ideal.rate_point(6.0).unwrap().rate,
            max_relative = 1e-14
        );
    }

    #[test]
    fn bare_mirror_far_away() {
        let pt = eval(1e-2, 0.0, DipoleOrientation::random()).point(2000.0).unwrap();
        assert!((pt.rate - 1.0).abs() < 1e-3);
    }

    #[test]
    fn orientation_is_affine() {
        let par = eval(1e-2, 5.0, DipoleOrientation::parallel()).point(1.3).unwrap();
        let perp = eval(1e-2, 5.0, DipoleOrientation::perpendicular()).point(1.3).unwrap();
        let mix = eval(1e-2, 5.0, DipoleOrientation::new(0.3, 0.7).unwrap()).point(1.3).unwrap();
        assert_relative_eq!(mix.potential, 0.3 * par.potential + 0.7 * perp.potential, max_relative = 1e-13);
        assert_relative_eq!(mix.rate, 0.3 * par.rate + 0.7 * perp.rate, max_relative = 1e-13);
        assert_relative_eq!(mix.force, 0.3 * par.force + 0.7 * perp.force, max_relative = 1e-13);
    }

    #[test]
    fn sweep_order_independent_of_jobs() {
        let e = eval(1e-2, 5.0, DipoleOrientation::random());
        let zs = [3.0, 0.5, 1.5, 7.0];
        let a = e.sweep(&zs, Some(1)).unwrap();
        let b = e.sweep(&zs, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].z_a, 0.5);
    }

    #[test]
    fn lattice_advisory() {
        let e = eval(1e-2, 5.0, DipoleOrientation::random()).with_lattice_scale(Some(0.01));
        assert!(e.point(0.005).unwrap().below_lattice_scale);
        assert!(!e.point(0.05).unwrap().below_lattice_scale);
    }

    #[test]
    fn ideal_shadow_rate_only() {
        let m = MediumResponse::new(Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
        let o = DipoleOrientation::parallel();
        assert!(vdw_potential(3.0, &m, 5.0, &o, &cfg()).is_err());
        assert!(decay_rate(5.0, &m, 5.0, &o, &cfg()).unwrap().abs() < 1e-15);
    }
}
