mod common;

use common::*;
use soliton_forge::invariants::{mass, MassMethod};
use soliton_forge::numeric::{integrate, shoot, shoot_from};

fn shooting_error(rep: &soliton_forge::SolutionRep, x0: f64, x1: f64) -> f64 {
    let t = shoot(rep, x0, x1, 1e-12).unwrap();
    let n = rep.n();
    let mut err: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for (x, y) in t.xs.iter().zip(&t.states) {
        let v = rep.values(*x);
        for i in 0..n {
            err = err.max((y[i] - v.u[i]).abs());
            sup = sup.max(v.u[i].abs());
        }
    }
    err / sup
}

#[test]
fn single_component_shooting() {
    let rep = build(&[-1.0], &[2.0]);
    assert!(shooting_error(&rep, -15.0, 15.0) < 1e-6);
}

#[test]
fn normalized_unique_solution_shooting() {
    let s3 = 3f64.sqrt();
    let rep = build(&[-2.25; 3], &[s3; 3]);
    assert!(shooting_error(&rep, 0.0, 10.0) < 1e-6);
    assert!(shooting_error(&rep, 0.0, -10.0) < 1e-6);
}

#[test]
fn three_component_shooting() {
    let rep = build(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
    assert!(shooting_error(&rep, -8.0, 8.0) < 1e-6);
}

#[test]
fn perturbed_initial_data_diverge() {
    let rep = build(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
    let mut y0 = rep.state(-8.0).unwrap();
    y0[3] *= 1.0 + 1e-3;
    let t = shoot_from(rep.spectrum().mu(), &y0, -8.0, 8.0, 1e-12).unwrap();
    let worst = t
        .xs
        .iter()
        .zip(&t.states)
        .map(|(x, y)| (0..3).map(|i| (y[i] - rep.u(i, *x).unwrap()).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    assert!(worst > 1e-4, "{worst}");
}

#[test]
fn shooting_is_reversible() {
    let rep = build(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
    let mu = rep.spectrum().mu();
    let y0 = rep.state(-2.0).unwrap();
    let fwd = shoot_from(mu, &y0, -2.0, 3.0, 1e-12).unwrap();
    let (_, y1) = fwd.last();
    let back = shoot_from(mu, y1, 3.0, -2.0, 1e-12).unwrap();
    let (x, y) = back.last();
    assert_eq!(*x, -2.0);
    for (a, b) in y.iter().zip(&y0) {
        assert!((a - b).abs() < 1e-7);
    }
}

#[test]
fn quadrature_of_known_integrals() {
    let v = integrate(|x| 1.0 / x.cosh().powi(2), -40.0, 40.0, 1e-12).unwrap();
    assert!((v - 2.0).abs() < 1e-10);
    let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-12).unwrap();
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
}

#[test]
fn analytic_and_numeric_masses_agree() {
    let mut r = rng(51);
    for n in 1..=5 {
        let rep = random_instance(&mut r, n);
        for i in 0..n {
            let a = mass(&rep, i, MassMethod::Analytic).unwrap();
            let q = mass(&rep, i, MassMethod::Quadrature).unwrap();
            assert!((a - q).abs() < 1e-8 * (1.0 + a.abs()), "{a} {q}");
        }
    }
}
