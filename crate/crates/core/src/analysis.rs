//! Barrier detection on a height sweep and the levitation / trapping
//! feasibility checks built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::QuadratureConfig;
use crate::observables::{Backend, Evaluator, ObservablePoint};
use crate::units::{force_to_si, to_si, AtomSI, DipoleOrientation, MediumResponse, K_B, STANDARD_GRAVITY};

/// Golden-section refinement stops once the bracket is narrower than this.
pub const REFINE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Linear,
    Log,
}

/// Heights `z_min..=z_max` in `n_points` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub grid: Grid,
}

impl SweepSpec {
    pub fn new(z_min: f64, z_max: f64, n_points: usize, grid: Grid) -> Result<Self> {
        let s = SweepSpec {
            z_min,
            z_max,
            n_points,
            grid,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_min.is_finite() && self.z_max.is_finite() && 0.0 < self.z_min && self.z_min < self.z_max) {
            return Err(Error::invalid(
                "sweep",
                format!("need 0 < z_min < z_max, got {}..{}", self.z_min, self.z_max),
            ));
        }
        if self.n_points < 2 {
            return Err(Error::invalid("sweep", "n_points must be >= 2"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let last = (n - 1) as f64;
        let mut zs: Vec<f64> = match self.grid {
            Grid::Linear => (0..n)
                .map(|k| self.z_min + (self.z_max - self.z_min) * k as f64 / last)
                .collect(),
            Grid::Log => {
                let (a, b) = (self.z_min.ln(), self.z_max.ln());
                (0..n).map(|k| (a + (b - a) * k as f64 / last).exp()).collect()
            }
        };
        zs[0] = self.z_min;
        zs[n - 1] = self.z_max;
        zs
    }
}

/// Outcome of [`find_barrier`]. When `exists` is false the remaining fields
/// describe the largest scanned potential value for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub exists: bool,
    /// True when the scanned maximum sat on the first or last grid point.
    pub at_boundary: bool,
    pub z_peak: f64,
    /// `U(z_peak)` in `ħΓ₀`, measured from the free-space level `U = 0`.
    pub height: f64,
    /// Largest repulsive force (`F > 0`, away from the surface) on the outer
    /// flank, in `ħΓ₀ω₁₀/c`.
    pub peak_force_inward: f64,
    /// Depth of the attractive region beyond the barrier, `−min U`, floored at 0.
    pub well_depth_beyond: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarrierOptions {
    /// Interior maxima at or below this height (in `ħΓ₀`) are not reported
    /// as barriers; this excludes the small retarded oscillations far from
    /// the surface.
    pub min_height: f64,
    pub jobs: Option<usize>,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            min_height: 1.0,
            jobs: None,
        }
    }
}

/// Maximizes `f` on `[a, b]` by golden-section search.
fn golden_max<F>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > REFINE_TOLERANCE {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

fn argmax(v: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    v.enumerate().fold(None, |best, (i, x)| match best {
        Some((_, b)) if b >= x => best,
        _ => Some((i, x)),
    })
}

/// Barrier search with an existing evaluator.
pub fn find_barrier_with(eval: &Evaluator, sweep: &SweepSpec, opts: &BarrierOptions) -> Result<BarrierReport> {
    sweep.validate()?;
    let zs = sweep.points();
    let pts: Vec<ObservablePoint> = eval.sweep(&zs, opts.jobs)?;
    let (i, u_max) = argmax(pts.iter().map(|p| p.potential)).expect("n_points >= 2");
    let absent = |at_boundary| BarrierReport {
        exists: false,
        at_boundary,
        z_peak: zs[i],
        height: u_max,
        peak_force_inward: 0.0,
        well_depth_beyond: 0.0,
    };
    if i == 0 || i == zs.len() - 1 {
        return Ok(absent(true));
    }
    if u_max <= opts.min_height {
        return Ok(absent(false));
    }

    let (z_peak, height) = golden_max(|z| Ok(eval.point(z)?.potential), zs[i - 1], zs[i + 1])?;

    // outer flank: grid points beyond the peak
    let outer: Vec<&ObservablePoint> = pts.iter().filter(|p| p.z_a > z_peak).collect();
    let mut peak_force = 0.0;
    if let Some((j, f_max)) = argmax(outer.iter().map(|p| p.force)) {
        peak_force = f_max.max(0.0);
        if f_max > 0.0 {
            let lo = if j == 0 { z_peak } else { outer[j - 1].z_a };
            let hi = outer.get(j + 1).map_or(outer[j].z_a, |p| p.z_a);
            if hi > lo {
                let (_, f) = golden_max(|z| Ok(eval.point(z)?.force), lo, hi)?;
                peak_force = peak_force.max(f);
            }
        }
    }
    let well = outer.iter().map(|p| -p.potential).fold(0.0, f64::max);

    Ok(BarrierReport {
        exists: true,
        at_boundary: false,
        z_peak,
        height,
        peak_force_inward: peak_force,
        well_depth_beyond: well,
    })
}

/// Scans `U` over `sweep`, refines the largest interior maximum and reports
/// it as a barrier if it is positive and above the default height floor.
pub fn find_barrier(
    m: &MediumResponse,
    d: f64,
    o: &DipoleOrientation,
    sweep: &SweepSpec,
    cfg: &QuadratureConfig,
) -> Result<BarrierReport> {
    let eval = Evaluator::new(*m, d, *o, *cfg, None)?;
    if eval.backend() == Backend::Ideal && sweep.z_min <= d {
        return Err(Error::Divergent { z_a: sweep.z_min, d });
    }
    find_barrier_with(&eval, sweep, &BarrierOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevitationRecord {
    /// Peak repulsive force in N.
    pub force: f64,
    /// `m g` in N.
    pub weight: f64,
    /// `force / weight`.
    pub margin: f64,
    pub levitates: bool,
}

/// Compares the barrier's peak repulsive force with the atom's weight.
pub fn levitation_check(report: &BarrierReport, atom: &AtomSI) -> Result<LevitationRecord> {
    levitation_check_with_gravity(report, atom, STANDARD_GRAVITY)
}

pub fn levitation_check_with_gravity(report: &BarrierReport, atom: &AtomSI, gravity: f64) -> Result<LevitationRecord> {
    if !report.exists {
        return Err(Error::NotApplicable("no barrier, so no levitation force"));
    }
    if !(gravity.is_finite() && gravity > 0.0) {
        return Err(Error::invalid("gravity", format!("must be > 0, got {gravity}")));
    }
    let force = force_to_si(report.peak_force_inward, atom);
    let weight = atom.mass() * gravity;
    let margin = force / weight;
    Ok(LevitationRecord {
        force,
        weight,
        margin,
        levitates: margin >= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapRecord {
    /// Barrier height in J.
    pub barrier: f64,
    /// `(3/2) k_B T` in J.
    pub thermal_energy: f64,
    /// `barrier / thermal_energy`.
    pub margin: f64,
    pub traps: bool,
    /// Margin in `(1, 3)`: the hot tail of the thermal distribution still
    /// escapes, which amounts to evaporative cooling.
    pub evaporative: bool,
}

/// Compares the barrier height with the mean kinetic energy `(3/2) k_B T`.
pub fn trap_check(report: &BarrierReport, atom: &AtomSI, temperature: f64) -> Result<TrapRecord> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("temperature", format!("must be > 0 K, got {temperature}")));
    }
    if !report.exists {
        return Err(Error::NotApplicable("no barrier, so no trap"));
    }
    let barrier = to_si(report.height, atom);
    let thermal_energy = 1.5 * K_B * temperature;
    let margin = barrier / thermal_energy;
    Ok(TrapRecord {
        barrier,
        thermal_energy,
        margin,
        traps: margin > 1.0,
        evaporative: margin > 1.0 && margin < 3.0,
    })
}
