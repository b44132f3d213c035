//! Surface-plasmon-polariton poles of the slab + mirror reflection
//! coefficients in the complex `q` plane.
//!
//! The generalized coefficients are even in `β₁`, so their poles are zeros
//! of the branch-free dispersion functions
//!
//! ```text
//! s:  F_s(q) = cos(β₁d) − iμβ·sin(β₁d)/β₁      ⇔  β₁/(μβ) = tanh(iβ₁d)
//! p:  F_p(q) = εβ·cos(β₁d) − iβ₁·sin(β₁d)      ⇔  β₁/(εβ) = coth(iβ₁d)
//! ```
//!
//! which depend on `β₁²` only. The vacuum `β` is taken on the sheet
//! `Im β ≥ 0`, which is analytic for `Re q > 1`. Zeros are located by
//! counting the winding of `F` around the cells of a rectangular grid and
//! polished with Newton's method.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::sqrt_upper;
use crate::units::MediumResponse;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Maximum normalized dispersion mismatch for an accepted pole.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Roots closer than this are merged.
pub const DEDUP_DISTANCE: f64 = 1e-8;
/// Poles closer than this to the real axis feed the quadrature pre-splits.
pub const PROXIMITY_IM_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
}

/// A located zero of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub q_pole: Complex64,
    pub polarization: Polarization,
    pub residual: f64,
}

/// Rectangle `[re_min, re_max] × [im_min, im_max]` in the `q` plane with
/// its scan resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox {
            re_min: 1.001,
            re_max: 20.0,
            im_min: -2.0,
            im_max: 2.0,
            n_re: 200,
            n_im: 80,
        }
    }
}

impl SearchBox {
    fn validate(&self) -> Result<()> {
        let ok = self.re_min > 1.0
            && self.re_max > self.re_min
            && self.im_max > self.im_min
            && self.n_re >= 1
            && self.n_im >= 1;
        if !ok {
            return Err(Error::invalid(
                "search_box",
                "need 1 < re_min < re_max, im_min < im_max and a non-empty grid",
            ));
        }
        Ok(())
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        let re = self.re_min + (self.re_max - self.re_min) * i as f64 / self.n_re as f64;
        let im = self.im_min + (self.im_max - self.im_min) * j as f64 / self.n_im as f64;
        Complex64::new(re, im)
    }

    fn cell_size(&self) -> (f64, f64) {
        (
            (self.re_max - self.re_min) / self.n_re as f64,
            (self.im_max - self.im_min) / self.n_im as f64,
        )
    }
}

/// Grid cell whose winding number is nonzero but where Newton found no root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedCell {
    pub lower_left: Complex64,
    pub upper_right: Complex64,
    pub winding: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    pub poles: Vec<PoleRecord>,
    /// Cells flagged by the winding count where polishing failed; a non-empty
    /// list means the result is partial.
    pub unresolved: Vec<UnresolvedCell>,
}

impl PoleSearch {
    /// The pole closest to the real axis, if any.
    pub fn dominant(&self) -> Option<&PoleRecord> {
        self.poles
            .iter()
            .min_by(|a, b| a.q_pole.im.abs().total_cmp(&b.q_pole.im.abs()))
    }
}

/// Vacuum `β = √(1 − q²)` for complex `q` on the sheet `Im β ≥ 0`.
pub fn beta_complex(q: Complex64) -> Complex64 {
    sqrt_upper(1.0 - q * q)
}

struct Dispersion {
    eps: Complex64,
    mu: Complex64,
    k1_sq: Complex64,
    d: f64,
    pol: Polarization,
}

impl Dispersion {
    /// Returns `(F, |term₁| + |term₂|)`.
    fn eval(&self, q: Complex64) -> (Complex64, f64) {
        let b = beta_complex(q);
        let b1 = (self.k1_sq - q * q).sqrt();
        let x = b1 * self.d;
        let cos = x.cos();
        let sin = x.sin();
        match self.pol {
            Polarization::S => {
                let sinc = if x.norm() < 1e-4 {
                    self.d * (1.0 - x * x / 6.0)
                } else {
                    sin / b1
                };
                let t2 = -I * self.mu * b * sinc;
                (cos + t2, cos.norm() + t2.norm())
            }
            Polarization::P => {
                let t1 = self.eps * b * cos;
                let t2 = -I * b1 * sin;
                (t1 + t2, t1.norm() + t2.norm())
            }
        }
    }

    fn value(&self, q: Complex64) -> Complex64 {
        self.eval(q).0
    }

    fn residual(&self, q: Complex64) -> f64 {
        let (f, scale) = self.eval(q);
        if scale == 0.0 {
            f.norm()
        } else {
            f.norm() / scale
        }
    }

    fn newton(&self, seed: Complex64) -> Option<Complex64> {
        let mut q = seed;
        for _ in 0..80 {
            let h = 1e-7 * q.norm().max(1.0);
            let f = self.value(q);
            let df = (self.value(q + h) - self.value(q - h)) / (2.0 * h);
            if !df.is_finite() || df.norm() == 0.0 {
                return None;
            }
            let step = f / df;
            q -= step;
            if !q.is_finite() {
                return None;
            }
            if step.norm() <= 1e-15 * q.norm().max(1.0) {
                break;
            }
        }
        (self.residual(q) < RESIDUAL_TOL).then_some(q)
    }
}

/// Normalized mismatch of the dispersion relation at `q`.
pub fn dispersion_residual(m: &MediumResponse, d: f64, pol: Polarization, q: Complex64) -> f64 {
    dispersion(m, d, pol).residual(q)
}

fn dispersion(m: &MediumResponse, d: f64, pol: Polarization) -> Dispersion {
    Dispersion {
        eps: m.eps(),
        mu: m.mu(),
        k1_sq: m.k1_squared(),
        d,
        pol,
    }
}

fn arg_step(from: Complex64, to: Complex64) -> f64 {
    (to / from).arg()
}

/// Locates all dispersion zeros inside `search_box`.
pub fn find_poles(
    m: &MediumResponse,
    d: f64,
    polarization: Polarization,
    search_box: &SearchBox,
) -> Result<PoleSearch> {
    if m.is_lossless() {
        return Err(Error::LosslessMedium);
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::invalid("d", "pole search needs a slab of positive thickness"));
    }
    search_box.validate()?;

    let disp = dispersion(m, d, polarization);
    let (nx, ny) = (search_box.n_re, search_box.n_im);
    let grid: Vec<Complex64> = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| (i, j)))
        .map(|(i, j)| disp.value(search_box.node(i, j)))
        .collect();
    let at = |i: usize, j: usize| grid[j * (nx + 1) + i];

    // Phase change along an edge; edges with large jumps are resampled.
    let edge = |za: Complex64, zb: Complex64, fa: Complex64, fb: Complex64| -> f64 {
        let coarse = arg_step(fa, fb);
        if coarse.abs() <= std::f64::consts::FRAC_PI_2 {
            return coarse;
        }
        const SUB: usize = 32;
        let mut total = 0.0;
        let mut prev = fa;
        for k in 1..=SUB {
            let t = k as f64 / SUB as f64;
            let fk = if k == SUB { fb } else { disp.value(za + (zb - za) * t) };
            total += arg_step(prev, fk);
            prev = fk;
        }
        total
    };

    let (dx, dy) = search_box.cell_size();
    let mut candidates: Vec<Complex64> = Vec::new();
    let mut unresolved = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut winding = 0.0;
            let mut bad = false;
            for k in 0..4 {
                let (ia, ja) = corners[k];
                let (ib, jb) = corners[(k + 1) % 4];
                let (fa, fb) = (at(ia, ja), at(ib, jb));
                if !(fa.is_finite() && fb.is_finite()) || fa.norm() == 0.0 || fb.norm() == 0.0 {
                    bad = true;
                    break;
                }
                winding += edge(search_box.node(ia, ja), search_box.node(ib, jb), fa, fb);
            }
            let n = if bad { 1 } else { (winding / std::f64::consts::TAU).round() as i64 };
            if n == 0 {
                continue;
            }
            let ll = search_box.node(i, j);
            let ur = search_box.node(i + 1, j + 1);
            let center = 0.5 * (ll + ur);
            let seeds = [
                center,
                ll + Complex64::new(0.25 * dx, 0.25 * dy),
                ll + Complex64::new(0.75 * dx, 0.25 * dy),
                ll + Complex64::new(0.25 * dx, 0.75 * dy),
                ll + Complex64::new(0.75 * dx, 0.75 * dy),
            ];
            let inside = |q: Complex64| {
                q.re >= ll.re - dx && q.re <= ur.re + dx && q.im >= ll.im - dy && q.im <= ur.im + dy
            };
            let found: Vec<Complex64> = seeds
                .iter()
                .filter_map(|&s| disp.newton(s))
                .filter(|&q| inside(q))
                .collect();
            if found.is_empty() {
                if !bad {
                    unresolved.push(UnresolvedCell {
                        lower_left: ll,
                        upper_right: ur,
                        winding: n,
                    });
                }
            } else {
                candidates.extend(found);
            }
        }
    }

    candidates.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut poles: Vec<PoleRecord> = Vec::new();
    for q in candidates {
        let inside_box = q.re >= search_box.re_min
            && q.re <= search_box.re_max
            && q.im >= search_box.im_min
            && q.im <= search_box.im_max;
        if !inside_box || poles.iter().any(|p| (p.q_pole - q).norm() < DEDUP_DISTANCE) {
            continue;
        }
        poles.push(PoleRecord {
            q_pole: q,
            polarization,
            residual: disp.residual(q),
        });
    }
    Ok(PoleSearch { poles, unresolved })
}

/// Real split points `Re q ± {10, 1, 0.1}·|Im q|` around every pole closer
/// than [`PROXIMITY_IM_LIMIT`] to the real axis, clipped to the evanescent
/// sector `q > 1`.
pub fn pole_proximity(m: &MediumResponse, d: f64) -> Result<Vec<f64>> {
    if m.is_lossless() {
        return Err(Error::LosslessMedium);
    }
    if d <= 0.0 {
        return Ok(Vec::new());
    }
    let bx = SearchBox::default();
    let mut splits = Vec::new();
    for pol in [Polarization::S, Polarization::P] {
        let search = find_poles(m, d, pol, &bx)?;
        for p in search.poles.iter().filter(|p| p.q_pole.im.abs() < PROXIMITY_IM_LIMIT) {
            let w = p.q_pole.im.abs();
            for k in [-10.0, -1.0, -0.1, 0.1, 1.0, 10.0] {
                let s = p.q_pole.re + k * w;
                if s > 1.0 {
                    splits.push(s);
                }
            }
        }
    }
    splits.sort_by(f64::total_cmp);
    splits.dedup();
    Ok(splits)
}
