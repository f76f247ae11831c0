//! Adaptive Gauss–Kronrod (7/15) quadrature with global bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Controls for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Target bound on the summed absolute error estimate.
    pub tol: f64,
    /// Number of equal pieces the interval is cut into before adapting.
    pub initial_pieces: usize,
    /// Cap on the number of subintervals.
    pub max_subintervals: usize,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            initial_pieces: 8,
            max_subintervals: 20_000,
        }
    }

    pub fn with_pieces(mut self, pieces: usize) -> Self {
        self.initial_pieces = pieces.max(1);
        self
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subintervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// `∫_a^b f` to absolute error estimate `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with(f, a, b, QuadOptions::new(tol)).map(|r| r.value)
}

/// Adaptive integration: the piece with the largest error estimate is bisected
/// until the summed estimate drops below `opts.tol`. The Kronrod–Gauss
/// difference is used unscaled, which overestimates the true error for smooth
/// integrands.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subintervals: 0,
        });
    }
    let pieces = opts.initial_pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(pieces * 4);
    let width = (b - a) / pieces as f64;
    for k in 0..pieces {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == pieces { b } else { a + (k + 1) as f64 * width };
        let (value, error) = gk15(&f, lo, hi);
        heap.push(Piece {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        if !total_err.is_finite() {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                tol: opts.tol,
            });
        }
        if total_err <= opts.tol {
            // Sum in interval order so the value is independent of heap layout.
            let mut done: Vec<Piece> = heap.into_vec();
            done.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = done.iter().map(|p| p.value).sum();
            return Ok(QuadResult {
                value,
                abs_error: total_err,
                subintervals: done.len(),
            });
        }
        if heap.len() >= opts.max_subintervals {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                tol: opts.tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                tol: opts.tol,
            });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}
