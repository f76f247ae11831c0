//! Shared helpers for integration tests: seeded random instances.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_forge::hirota::{build_solution, SolitonParams, SolutionRep, Spectrum};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly ordered spectrum with `mu` in `[lo, hi]` and gaps of at least `min_gap`.
pub fn strict_mu(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, min_gap: f64) -> Vec<f64> {
    loop {
        let mut mu: Vec<f64> = (0..n).map(|_| r.gen_range(lo..hi)).collect();
        mu.sort_by(f64::total_cmp);
        if mu.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return mu;
        }
    }
}

/// Amplitude in `[-5, 5]` bounded away from zero.
pub fn amplitude(r: &mut ChaCha8Rng) -> f64 {
    let m = r.gen_range(0.1..5.0);
    if r.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

pub fn amplitudes(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| amplitude(r)).collect()
}

pub fn build(mu: &[f64], a: &[f64]) -> SolutionRep {
    build_solution(
        &Spectrum::new(mu.to_vec()).unwrap(),
        &SolitonParams::new(a.to_vec()).unwrap(),
    )
    .unwrap()
}

/// Random strictly ordered instance.
pub fn random_instance(r: &mut ChaCha8Rng, n: usize) -> SolutionRep {
    let mu = strict_mu(r, n, -4.0, -0.25, 0.05);
    let a = amplitudes(r, n);
    build(&mu, &a)
}
