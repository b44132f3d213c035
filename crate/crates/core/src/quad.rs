//! Globally adaptive Gauss–Kronrod (10/21) quadrature for vector-valued
//! complex integrands.
//!
//! All components share the subdivision; an interval is refined when any
//! component misses its own tolerance. The error estimate is the plain
//! `|K21 − G10|` difference, which is pessimistic for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Published 30-digit nodes and weights, kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_014_316,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

/// Result of a vector-valued integration.
#[derive(Debug, Clone)]
pub struct Integral<const N: usize> {
    pub value: [Complex64; N],
    pub error: [f64; N],
    /// `∫|f_i|`, used for the round-off floor.
    pub abs_value: [f64; N],
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [Complex64; N],
    error: [f64; N],
    abs_value: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}

impl<const N: usize> Eq for Segment<N> {}

impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn zero<const N: usize>() -> [Complex64; N] {
    [Complex64::new(0.0, 0.0); N]
}

/// One 21-point Kronrod panel with embedded 10-point Gauss estimate.
fn panel<const N: usize, F>(f: &F, a: f64, b: f64) -> ([Complex64; N], [f64; N], [f64; N])
where
    F: Fn(f64) -> [Complex64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = zero::<N>();
    let mut gauss = zero::<N>();
    let mut abs = [0.0; N];

    let fc = f(center);
    for i in 0..N {
        kronrod[i] += fc[i] * WGK[10];
        abs[i] += fc[i].norm() * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            let s = f1[i] + f2[i];
            kronrod[i] += s * WGK[j];
            abs[i] += (f1[i].norm() + f2[i].norm()) * WGK[j];
            if j % 2 == 1 {
                gauss[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = [0.0; N];
    for i in 0..N {
        kronrod[i] *= half;
        gauss[i] *= half;
        abs[i] *= half.abs();
        err[i] = (kronrod[i] - gauss[i]).norm();
    }
    (kronrod, err, abs)
}

fn tolerance(opts: &AdaptiveOptions, value: Complex64, abs_value: f64) -> f64 {
    opts.abs_tol
        .max(opts.rel_tol * value.norm())
        .max(50.0 * f64::EPSILON * abs_value)
}

/// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, starting from
/// the panels given by consecutive breakpoints.
///
/// Breakpoints must be sorted ascending with at least two entries.
pub fn integrate<const N: usize, F>(f: F, breakpoints: &[f64], opts: &AdaptiveOptions) -> Result<Integral<N>>
where
    F: Fn(f64) -> [Complex64; N],
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("breakpoints", "need >= 2 sorted breakpoints"));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0 && opts.max_subdivisions >= 1) {
        return Err(Error::invalid("quadrature", "tolerances must be > 0 and max_subdivisions >= 1"));
    }

    let mut evaluations = 0usize;
    let mut raw: Vec<Segment<N>> = Vec::with_capacity(breakpoints.len());
    for w in breakpoints.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error, abs_value) = panel(&f, w[0], w[1]);
        evaluations += 21;
        raw.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
            abs_value,
            priority: 0.0,
        });
    }

    let totals = |segs: &mut dyn Iterator<Item = &Segment<N>>| {
        let mut v = zero::<N>();
        let mut e = [0.0; N];
        let mut a = [0.0; N];
        for s in segs {
            for i in 0..N {
                v[i] += s.value[i];
                e[i] += s.error[i];
                a[i] += s.abs_value[i];
            }
        }
        (v, e, a)
    };

    let scales = |v: &[Complex64; N], a: &[f64; N]| {
        let mut t = [0.0; N];
        for i in 0..N {
            t[i] = tolerance(opts, v[i], a[i]);
        }
        t
    };

    let priority = |s: &Segment<N>, scale: &[f64; N]| {
        // Segments already at round-off width are never split again.
        if s.b - s.a <= 64.0 * f64::EPSILON * s.a.abs().max(s.b.abs()).max(f64::MIN_POSITIVE) {
            return 0.0;
        }
        (0..N).map(|i| s.error[i] / scale[i]).fold(0.0, f64::max)
    };

    let (mut value, mut error, mut abs_value) = totals(&mut raw.iter());
    let mut scale = scales(&value, &abs_value);
    let mut heap: BinaryHeap<Segment<N>> = raw
        .into_iter()
        .map(|mut s| {
            s.priority = priority(&s, &scale);
            s
        })
        .collect();

    let mut subdivisions = 0usize;
    loop {
        let converged = (0..N).all(|i| error[i] <= tolerance(opts, value[i], abs_value[i]));
        if converged {
            break;
        }
        let worst = match heap.peek() {
            Some(w) => w.clone(),
            None => break,
        };
        if worst.priority == 0.0 {
            // Nothing left that can be refined; the remaining error is round-off.
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            let worst_err = worst.error.iter().cloned().fold(0.0, f64::max);
            return Err(Error::NonConvergence {
                subdivisions,
                a: worst.a,
                b: worst.b,
                error: worst_err,
            });
        }
        heap.pop();
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e, abs) = panel(&f, a, b);
            evaluations += 21;
            let mut seg = Segment {
                a,
                b,
                value: v,
                error: e,
                abs_value: abs,
                priority: 0.0,
            };
            seg.priority = priority(&seg, &scale);
            for i in 0..N {
                value[i] += seg.value[i];
                error[i] += seg.error[i];
                abs_value[i] += seg.abs_value[i];
            }
            heap.push(seg);
        }
        for i in 0..N {
            value[i] -= worst.value[i];
            error[i] -= worst.error[i];
            abs_value[i] -= worst.abs_value[i];
        }
        subdivisions += 1;

        if subdivisions.is_multiple_of(256) {
            // Resum to shed drift and rescale priorities against the current estimate.
            let (v, e, a) = totals(&mut heap.iter());
            value = v;
            error = e;
            abs_value = a;
            scale = scales(&value, &abs_value);
            heap = heap
                .into_iter()
                .map(|mut s| {
                    s.priority = priority(&s, &scale);
                    s
                })
                .collect();
        }
    }

    let (value, error, abs_value) = totals(&mut heap.iter());
    Ok(Integral {
        value,
        error,
        abs_value,
        subdivisions,
        evaluations,
    })
}
