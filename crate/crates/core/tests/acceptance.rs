//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. A line
//! reads FAIL when the criterion as literally stated does not hold; the
//! process exits nonzero only when a check that is expected to hold fails.
//! Criteria whose literal statement is contradicted by the mathematics are
//! still evaluated in full and reported as FAIL with the reason.

mod common;

use common::*;
use rand::Rng;
use soliton_forge::classify::*;
use soliton_forge::hirota::{build_solution, SolitonParams, SolutionRep, Spectrum};
use soliton_forge::invariants::{
    default_grid, energy, lieb_thirring_gap, mass, motion_report, residual, MassMethod,
};
use soliton_forge::linearize::{
    analytic_kernel, kernel_dimension, linearized_motion_sup, ThresholdPolicy,
};
use soliton_forge::numeric::{golden_max, shoot};

/// Outcome of one criterion.
struct Outcome {
    /// The criterion as stated holds.
    literal: bool,
    /// Every part the mathematics supports holds.
    attainable: bool,
    detail: String,
}

impl Outcome {
    fn plain(ok: bool, detail: String) -> Self {
        Self {
            literal: ok,
            attainable: ok,
            detail,
        }
    }
}

fn spec(mu: &[f64]) -> Spectrum {
    Spectrum::new(mu.to_vec()).unwrap()
}

fn params(a: &[f64]) -> SolitonParams {
    SolitonParams::new(a.to_vec()).unwrap()
}

/// Random instances used by the residual and motion-constant criteria.
fn residual_instances() -> Vec<SolutionRep> {
    let mut r = rng(1001);
    let mut out = Vec::new();
    for (n, count) in [(3, 100), (4, 25), (5, 25), (6, 25)] {
        for _ in 0..count {
            out.push(random_instance(&mut r, n));
        }
    }
    out
}

/// One instance of each coincidence pattern for three components.
fn degenerate_instances() -> Vec<SolutionRep> {
    vec![
        build(&[-1.0, -1.0, -0.25], &[1.0, 1.3, -0.8]),
        build(&[-4.0, -1.0, -1.0], &[1.0, 0.5, 0.8]),
        build(&[-2.25; 3], &[1.7, -0.4, 1.1]),
    ]
}

fn criterion_1() -> Outcome {
    let rep = build(&[-1.0], &[2.0]);
    let worst = (0..=60_000)
        .map(|k| {
            let x = -30.0 + 1e-3 * k as f64;
            (rep.u(0, x).unwrap() - 1.0 / x.cosh()).abs()
        })
        .fold(0.0, f64::max);
    Outcome::plain(worst < 1e-12, format!("sup |u - sech| = {worst:.2e} on [-30, 30]"))
}

fn criterion_2(instances: &[SolutionRep]) -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for rep in instances {
        let max_mu = rep.spectrum().mu().iter().map(|m| m.abs()).fold(0.0, f64::max);
        let sup = default_grid(rep)
            .nodes()
            .into_iter()
            .flat_map(|x| residual(rep, x))
            .map(f64::abs)
            .fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(sup / (1e-8 * (1.0 + max_mu)));
    }
    Outcome::plain(
        worst_ratio < 1.0,
        format!(
            "{} instances (N=3,4,5,6), worst residual / bound = {worst_ratio:.2e}",
            instances.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(1003);
    let (mut an, mut qu): (f64, f64) = (0.0, 0.0);
    for n in 1..=5 {
        for _ in 0..4 {
            let rep = random_instance(&mut r, n);
            for i in 0..n {
                let want = 2.0 * rep.spectrum().eta()[i];
                an = an.max((mass(&rep, i, MassMethod::Analytic).unwrap() - want).abs());
                qu = qu.max((mass(&rep, i, MassMethod::Quadrature).unwrap() - want).abs());
            }
        }
    }
    // Grouped masses: each block of equal potentials carries 2 eta.
    let (mut gan, mut gqu): (f64, f64) = (0.0, 0.0);
    for rep in degenerate_instances() {
        let mu = rep.spectrum().mu().to_vec();
        let eta = rep.spectrum().eta().to_vec();
        let mut i = 0;
        while i < 3 {
            let j = (i..3).take_while(|&j| mu[j] == mu[i]).last().unwrap();
            for (method, acc) in [(MassMethod::Analytic, &mut gan), (MassMethod::Quadrature, &mut gqu)] {
                let m: f64 = (i..=j).map(|k| mass(&rep, k, method).unwrap()).sum();
                *acc = acc.max((m - 2.0 * eta[i]).abs());
            }
            i = j + 1;
        }
    }
    let ok = an < 1e-8 && qu < 1e-6 && gan < 1e-8 && gqu < 1e-6;
    Outcome::plain(
        ok,
        format!(
            "distinct: analytic {an:.2e}, quadrature {qu:.2e}; grouped: analytic {gan:.2e}, quadrature {gqu:.2e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(1004);
    let mut worst: f64 = 0.0;
    let mut reps: Vec<SolutionRep> = (1..=5)
        .flat_map(|n| (0..4).map(move |_| n))
        .map(|n| random_instance(&mut r, n))
        .collect();
    reps.extend(degenerate_instances());
    for rep in &reps {
        worst = worst.max(lieb_thirring_gap(rep).unwrap().abs());
    }
    Outcome::plain(worst < 1e-6, format!("{} instances, worst gap {worst:.2e}", reps.len()))
}

fn criterion_5() -> Outcome {
    // Normalized three-component solutions: the stated identities apply.
    let s3 = 3f64.sqrt();
    let mut norm_err: f64 = 0.0;
    let fam = match normalized_solutions(&spec(&[-1.0, -1.0, -0.25])).unwrap() {
        NormalizedOutcome::Family(f) => f,
        _ => unreachable!("the family spectrum is classified as a family"),
    };
    let cases = [
        (build(&[-2.25; 3], &[s3; 3]), -2.25),
        (build_solution(fam.spectrum(), &fam.params(1.0, 1.0, true).unwrap()).unwrap(), -0.75),
        (build_solution(fam.spectrum(), &fam.params(0.4, -2.0, false).unwrap()).unwrap(), -0.75),
    ];
    for (rep, want) in &cases {
        let s: f64 = rep.spectrum().mu().iter().sum();
        let e = energy(rep).unwrap();
        norm_err = norm_err
            .max((e.total - want).abs())
            .max((e.total - s / 3.0).abs())
            .max((e.kinetic + s / 3.0).abs())
            .max((e.quartic + 2.0 * s / 3.0).abs());
    }
    // General solutions: the pieces are weighted by the masses.
    let mut r = rng(1005);
    let (mut weighted_err, mut literal_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let rep = random_instance(&mut r, 3);
        let mu = rep.spectrum().mu();
        let w: f64 = (0..3)
            .map(|i| mu[i] * mass(&rep, i, MassMethod::Analytic).unwrap())
            .sum();
        let s: f64 = mu.iter().sum();
        let e = energy(&rep).unwrap();
        weighted_err = weighted_err
            .max((e.total - w / 3.0).abs())
            .max((e.kinetic + w / 3.0).abs())
            .max((e.quartic + 2.0 * w / 3.0).abs());
        literal_err = literal_err.max((e.total - s / 3.0).abs());
    }
    let attainable = norm_err < 1e-6 && weighted_err < 1e-6;
    Outcome {
        literal: attainable && literal_err < 1e-6,
        attainable,
        detail: format!(
            "normalized spectra (-9/4, -3/4 and split) err {norm_err:.2e}; \
             unnormalized N=3: E - sum(mu)/3 up to {literal_err:.2e}, \
             mass-weighted E = sum(mu_i m_i)/3 err {weighted_err:.2e} \
             (the unweighted form needs unit masses)"
        ),
    }
}

fn criterion_6() -> Outcome {
    let s3 = 3f64.sqrt();
    let unique_err = match normalized_solutions(&spec(&[-2.25; 3])).unwrap() {
        NormalizedOutcome::Unique(p) => {
            let rep = build_solution(&spec(&[-2.25; 3]), &p).unwrap();
            (0..3)
                .map(|i| (rep.u(i, 0.0).unwrap() - s3 / 2.0).abs())
                .fold(0.0, f64::max)
        }
        _ => f64::INFINITY,
    };
    let mut r = rng(1006);
    let family_err = match normalized_solutions(&spec(&[-1.0, -1.0, -0.25])).unwrap() {
        NormalizedOutcome::Family(fam) => (0..20)
            .map(|_| {
                let p = fam
                    .params(amplitude(&mut r), amplitude(&mut r), r.gen_bool(0.5))
                    .unwrap();
                let rep = build_solution(fam.spectrum(), &p).unwrap();
                (0..3)
                    .flat_map(|i| {
                        [MassMethod::Analytic, MassMethod::Quadrature]
                            .map(|m| (mass(&rep, i, m).unwrap() - 1.0).abs())
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    let mut others = 0;
    for _ in 0..10_000 {
        let mut mu: Vec<f64> = (0..3).map(|_| r.gen_range(-5.0..-0.01)).collect();
        mu.sort_by(f64::total_cmp);
        if normalized_solutions(&spec(&mu)).unwrap() != NormalizedOutcome::None {
            others += 1;
        }
    }
    Outcome::plain(
        unique_err < 1e-12 && family_err < 1e-8 && others == 0,
        format!(
            "u_i(0) err {unique_err:.2e}; family mass err {family_err:.2e} over 20 draws; \
             {others} of 10000 random spectra not None"
        ),
    )
}

fn criterion_7(instances: &[SolutionRep]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all: Vec<&SolutionRep> = instances.iter().collect();
    let degenerate = degenerate_instances();
    all.extend(&degenerate);
    for rep in &all {
        let grid = default_grid(rep);
        for k in 1..=rep.n() {
            worst = worst.max(motion_report(rep, k, &grid).unwrap().relative());
        }
    }
    let mut r = rng(1007);
    let mut lin: Vec<SolutionRep> = [3, 3, 4]
        .into_iter()
        .map(|n| random_instance(&mut r, n))
        .collect();
    lin.extend(degenerate_instances());
    lin.push(build(&[-1.0, -1.0, -0.25], &[1.0, 0.0, 0.8]));
    let mut lin_worst: f64 = 0.0;
    let mut vectors = 0;
    for rep in &lin {
        let grid = default_grid(rep);
        let mut kernel = analytic_kernel(rep);
        kernel.push(soliton_forge::linearize::translation_vector(rep));
        for phi in &kernel {
            vectors += 1;
            for k in 1..=rep.n() {
                lin_worst = lin_worst.max(linearized_motion_sup(rep, phi, k, &grid).unwrap());
            }
        }
    }
    Outcome::plain(
        worst < 1e-8 && lin_worst < 1e-8,
        format!(
            "{} solutions, worst relative identity {worst:.2e}; \
             {vectors} kernel vectors, worst linearized identity {lin_worst:.2e}",
            all.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut r = rng(1008);
    let (mut max_err, mut root_err): (f64, f64) = (0.0, 0.0);
    let (mut two_roots, mut arc_positive, mut literal_positive) = (true, true, true);
    let mut exterior = 0;
    for _ in 0..50 {
        let s = spec(&strict_mu(&mut r, 3, -4.0, -0.25, 0.05));
        let q = amplitude(&mut r);
        let closed = f_max_closed_form(&s, q).unwrap();
        let beta = pole_of_f(&s, q).unwrap().atan();
        let (_, num) = golden_max(
            |t| f_of_angle(&s, q, t).unwrap(),
            beta + 1e-6,
            beta + std::f64::consts::PI - 1e-6,
            1e-12,
        );
        max_err = max_err.max((num - closed).abs() / (1.0 + closed.abs()));
        let Ok(b) = p_bounds(&s, q) else {
            two_roots = false;
            continue;
        };
        two_roots &= b.p_low < b.p_high;
        for root in [b.p_low, b.p_high] {
            let scale = f_of_p(&s, q, root + 1e-3).unwrap().abs().max(1.0);
            root_err = root_err.max(f_of_p(&s, q, root).unwrap().abs() / scale);
        }
        arc_positive &= b
            .interior_samples(9)
            .iter()
            .all(|&p| f_of_p(&s, q, p).unwrap() > 0.0);
        let inside_real_interval = (1..10)
            .map(|j| b.p_low + (b.p_high - b.p_low) * j as f64 / 10.0)
            .filter(|p| (p - b.pole).abs() > 1e-9)
            .all(|p| f_of_p(&s, q, p).unwrap() > 0.0);
        literal_positive &= inside_real_interval;
        if b.admissible == AdmissibleSet::Outside {
            exterior += 1;
        }
    }
    let attainable = max_err < 1e-8 && two_roots && root_err < 1e-10 && arc_positive;
    Outcome {
        literal: attainable && literal_positive,
        attainable,
        detail: format!(
            "max err {max_err:.2e}, root residual {root_err:.2e}, two roots {two_roots}, \
             f > 0 on the admissible arc {arc_positive}; {exterior} of 50 cases have the \
             arc through p = infinity, where f < 0 on the real interval between the roots"
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut r = rng(1009);
    let mut counts = std::collections::BTreeMap::new();
    let (mut patterns, mut mirrored, mut outside_zero) = (true, true, true);
    for _ in 0..10 {
        let s = spec(&strict_mu(&mut r, 3, -4.0, -0.25, 0.2));
        let q = amplitude(&mut r);
        let b = p_bounds(&s, q).unwrap();
        for p in b.interior_samples(5) {
            let c = count_preimages(&s, q, p, 1e-10).unwrap();
            *counts.entry(c.count).or_insert(0) += 1;
            for piece in [Piece::Inner, Piece::Outer] {
                let data: Vec<[f64; 6]> = c
                    .preimages
                    .iter()
                    .filter(|m| m.piece == piece)
                    .map(|m| m.initial)
                    .collect();
                patterns &= data.len() == 4 && follows_sign_pattern(&data, 1e-8);
            }
            // Each inner preimage has an outer partner with the same values and
            // opposite slopes.
            mirrored &= c.preimages.iter().filter(|m| m.piece == Piece::Inner).all(|a| {
                c.preimages.iter().filter(|m| m.piece == Piece::Outer).any(|m| {
                    (0..3).all(|k| (m.initial[k] - a.initial[k]).abs() < 1e-8 * (1.0 + a.initial[k].abs()))
                        && (3..6).all(|k| {
                            (m.initial[k] + a.initial[k]).abs() < 1e-8 * (1.0 + a.initial[k].abs())
                        })
                })
            });
        }
        for p in outside_samples(&b) {
            outside_zero &= count_preimages(&s, q, p, 1e-10).unwrap().count == 0;
        }
    }
    let all_four = counts.keys().all(|&k| k == 4);
    let all_eight = counts.keys().all(|&k| k == 8);
    Outcome {
        literal: all_four && outside_zero,
        attainable: all_eight && patterns && mirrored && outside_zero,
        detail: format!(
            "preimage counts {counts:?} over 50 interior p; each count splits into two \
             sign orbits of 4 (pattern {patterns}) related by x -> -x (mirrored {mirrored}); \
             0 outside the bounds {outside_zero}"
        ),
    }
}

/// Points just outside the admissible set on either side.
fn outside_samples(b: &PBounds) -> Vec<f64> {
    let width = (b.p_high - b.p_low).abs().max(1e-3);
    let (lo, hi) = (b.p_low.atan(), b.p_high.atan());
    match b.admissible {
        AdmissibleSet::Between => vec![b.p_low - 0.5 * width, b.p_high + 0.5 * width],
        AdmissibleSet::Outside => {
            let t = |s: f64| (lo + s * (hi - lo)).tan();
            vec![t(0.1), t(0.9)]
        }
    }
    .into_iter()
    .filter(|p| (p - b.pole).abs() > 1e-3)
    .collect()
}

fn criterion_10() -> Outcome {
    let mut r = rng(1010);
    let mut cases: Vec<(String, SolutionRep)> = vec![
        ("distinct".into(), build(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0])),
        ("mu1=mu2".into(), build(&[-1.0, -1.0, -0.25], &[1.0, 1.3, -0.8])),
        ("mu2=mu3".into(), build(&[-4.0, -1.0, -1.0], &[1.0, 0.5, 0.8])),
        ("all equal".into(), build(&[-2.25; 3], &[1.7, -0.4, 1.1])),
    ];
    for n in [2, 4, 5] {
        cases.push((format!("N={n}"), random_instance(&mut r, n)));
    }
    let mut ok = true;
    let mut dims = Vec::new();
    let (mut worst_res, mut worst_angle, mut min_gap): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for (name, rep) in &cases {
        let grid = default_grid(rep);
        let k = kernel_dimension(rep, &grid, ThresholdPolicy::default()).unwrap();
        let fine = kernel_dimension(rep, &grid.refined(), ThresholdPolicy::default()).unwrap();
        ok &= k.discrete_kernel_dim == rep.n() && fine.discrete_kernel_dim == rep.n();
        worst_res = worst_res.max(k.analytic_residual_sup);
        worst_angle = worst_angle.max(k.subspace_angle);
        min_gap = min_gap.min(k.gap_ratio);
        dims.push(format!("{name}:{}/{}", k.discrete_kernel_dim, fine.discrete_kernel_dim));
    }
    ok &= worst_res < 1e-8 && worst_angle < 1e-3;
    Outcome::plain(
        ok,
        format!(
            "dims (grid/doubled) {}; residual {worst_res:.2e}, angle {worst_angle:.2e}, \
             smallest gap ratio {min_gap:.1e}",
            dims.join(" ")
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut r = rng(1011);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..10 {
            let rep = random_instance(&mut r, n);
            let t = shoot(&rep, -10.0, 10.0, 1e-12).unwrap();
            let (mut err, mut sup): (f64, f64) = (0.0, 0.0);
            for (x, y) in t.xs.iter().zip(&t.states) {
                let v = rep.values(*x);
                for i in 0..n {
                    err = err.max((y[i] - v.u[i]).abs());
                    sup = sup.max(v.u[i].abs());
                }
            }
            worst = worst.max(err / sup);
        }
    }
    Outcome::plain(
        worst < 1e-5,
        format!("40 instances (N=1..4), worst relative deviation {worst:.2e} on [-10, 10]"),
    )
}

fn criterion_12() -> Outcome {
    let mut r = rng(1012);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let e1 = r.gen_range(0.6..2.0);
        let e3 = r.gen_range(0.2..e1 - 0.1);
        let a = amplitudes(&mut r, 3);
        for (case, mu) in [
            (DegenerateCase::Eq12, vec![-e1 * e1, -e1 * e1, -e3 * e3]),
            (DegenerateCase::Eq23, vec![-e1 * e1, -e3 * e3, -e3 * e3]),
            (DegenerateCase::Eq123, vec![-e1 * e1; 3]),
        ] {
            let (s, p) = (spec(&mu), params(&a));
            let d = degenerate_build(case, &s, &p).unwrap();
            let g = build_solution(&s, &p).unwrap();
            for k in 0..=600 {
                let x = -30.0 + 0.1 * k as f64;
                let (vd, vg) = (d.values(x), g.values(x));
                for i in 0..3 {
                    worst = worst.max((vd.u[i] - vg.u[i]).abs());
                }
            }
        }
    }
    Outcome::plain(worst < 1e-12, format!("60 instances, sup difference {worst:.2e}"))
}

fn main() {
    let instances = residual_instances();
    let runs: Vec<Box<dyn Fn() -> Outcome + Sync + '_>> = vec![
        Box::new(criterion_1),
        Box::new(|| criterion_2(&instances)),
        Box::new(criterion_3),
        Box::new(criterion_4),
        Box::new(criterion_5),
        Box::new(criterion_6),
        Box::new(|| criterion_7(&instances)),
        Box::new(criterion_8),
        Box::new(criterion_9),
        Box::new(criterion_10),
        Box::new(criterion_11),
        Box::new(criterion_12),
    ];
    let outcomes: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs.iter().map(|f| scope.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut unexpected = 0;
    for (k, o) in outcomes.iter().enumerate() {
        let status = if o.literal { "PASS" } else { "FAIL" };
        let note = if !o.literal && o.attainable {
            " [statement contradicted; supported parts hold]"
        } else {
            ""
        };
        println!("criterion {:>2}: {status} - {}{note}", k + 1, o.detail);
        if !o.attainable {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed checks expected to hold");
        std::process::exit(1);
    }
}
