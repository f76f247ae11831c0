//! Classification of three-component solutions.
//!
//! * closed-form constructors for degenerate spectra (two or three equal `mu`);
//! * the normalized-solution classification (`∫u_i^2 = 1` for every `i`);
//! * the admissibility function `f(p)` of the derivative ratio
//!   `p = u_2'(0) / u_1'(0)` given the value ratio `q = u_2(0) / u_1(0)` and
//!   `u_3(0) = 0`, its maximum and its two zeros;
//! * the solution curve in scaled amplitudes `(X, Y, Z) = (a_1/eta_1, a_2/eta_2, a_3/eta_3)`,
//!   its branches and the preimages of a given `p`.
//!
//! Along the curve `u_3(0) = 0` the ratio `q` depends on `(X, Y)` only, so for a
//! fixed `q` the curve consists of finitely many base points `(X, Y)` each
//! carrying a free `Z`. Every branch is therefore parameterized by `Z`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, ExpTerm};
use crate::hirota::{build_solution, SolitonParams, SolutionRep, Spectrum};
use crate::numeric::find_root;

/// Equality pattern of a degenerate three-component spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegenerateCase {
    /// `mu_1 = mu_2 < mu_3`.
    Eq12,
    /// `mu_1 < mu_2 = mu_3`.
    Eq23,
    /// `mu_1 = mu_2 = mu_3`.
    Eq123,
}

impl DegenerateCase {
    /// The case matching the spectrum's equality pattern, if it is degenerate.
    pub fn of(spectrum: &Spectrum) -> Option<Self> {
        let mu = spectrum.mu();
        if mu.len() != 3 {
            return None;
        }
        match (mu[0] == mu[1], mu[1] == mu[2]) {
            (true, true) => Some(Self::Eq123),
            (true, false) => Some(Self::Eq12),
            (false, true) => Some(Self::Eq23),
            (false, false) => None,
        }
    }
}

fn require_three(spectrum: &Spectrum) -> Result<()> {
    if spectrum.n() != 3 {
        return Err(Error::RequiresThreeComponents(spectrum.n()));
    }
    Ok(())
}

fn require_strict_three(spectrum: &Spectrum) -> Result<()> {
    require_three(spectrum)?;
    if !spectrum.is_strict() {
        return Err(Error::InvalidSpectrum(
            "strictly ordered chemical potentials are required".into(),
        ));
    }
    Ok(())
}

/// `coeff * exp(rate x) * (1 + inner_coeff * exp(inner_rate x))`.
fn bracket_term(coeff: f64, rate: f64, inner_coeff: f64, inner_rate: f64) -> ExpPoly {
    ExpPoly::from_terms(vec![
        ExpTerm::new(coeff, rate),
        ExpTerm::new(coeff * inner_coeff, rate + inner_rate),
    ])
}

/// Two-group tau function `1 + c_1 e^{2 e_1 x} + c_2 e^{2 e_2 x} + c_12 e^{2(e_1 + e_2) x}`
/// where `s_k` is the summed squared amplitude of group `k`.
fn two_group_f(s1: f64, e1: f64, s2: f64, e2: f64) -> ExpPoly {
    let cross = s1 * s2 * (e1 - e2).powi(2) / (16.0 * e1 * e1 * e2 * e2 * (e1 + e2).powi(2));
    ExpPoly::from_terms(vec![
        ExpTerm::new(1.0, 0.0),
        ExpTerm::new(s1 / (4.0 * e1 * e1), 2.0 * e1),
        ExpTerm::new(s2 / (4.0 * e2 * e2), 2.0 * e2),
        ExpTerm::new(cross, 2.0 * (e1 + e2)),
    ])
}

/// Solution for a degenerate spectrum from its closed-form grouped tau functions.
pub fn degenerate_build(
    case: DegenerateCase,
    spectrum: &Spectrum,
    params: &SolitonParams,
) -> Result<SolutionRep> {
    require_three(spectrum)?;
    if params.n() != 3 {
        return Err(Error::SizeMismatch {
            expected: 3,
            got: params.n(),
        });
    }
    if DegenerateCase::of(spectrum) != Some(case) {
        return Err(Error::CaseMismatch);
    }
    let a = params.a();
    let eta = spectrum.eta();
    let (g, f) = match case {
        DegenerateCase::Eq12 => {
            let (e1, e3) = (eta[0], eta[2]);
            let s = a[0] * a[0] + a[1] * a[1];
            let w12 = a[2] * a[2] * (e1 - e3) / (4.0 * e3 * e3 * (e1 + e3));
            let w3 = s * (e3 - e1) / (4.0 * e1 * e1 * (e1 + e3));
            (
                vec![
                    bracket_term(a[0], e1, w12, 2.0 * e3),
                    bracket_term(a[1], e1, w12, 2.0 * e3),
                    bracket_term(a[2], e3, w3, 2.0 * e1),
                ],
                two_group_f(s, e1, a[2] * a[2], e3),
            )
        }
        DegenerateCase::Eq23 => {
            let (e1, e2) = (eta[0], eta[1]);
            let s = a[1] * a[1] + a[2] * a[2];
            let w1 = s * (e1 - e2) / (4.0 * e2 * e2 * (e1 + e2));
            let w23 = a[0] * a[0] * (e2 - e1) / (4.0 * e1 * e1 * (e1 + e2));
            (
                vec![
                    bracket_term(a[0], e1, w1, 2.0 * e2),
                    bracket_term(a[1], e2, w23, 2.0 * e1),
                    bracket_term(a[2], e2, w23, 2.0 * e1),
                ],
                two_group_f(a[0] * a[0], e1, s, e2),
            )
        }
        DegenerateCase::Eq123 => {
            let e = eta[0];
            let s: f64 = a.iter().map(|v| v * v).sum();
            (
                a.iter().map(|&ai| ExpPoly::monomial(ai, e)).collect(),
                ExpPoly::from_terms(vec![
                    ExpTerm::new(1.0, 0.0),
                    ExpTerm::new(s / (4.0 * e * e), 2.0 * e),
                ]),
            )
        }
    };
    SolutionRep::from_tau(spectrum.clone(), params.clone(), g, f)
}

/// Generator of the one-parameter-pair family of normalized solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedFamily {
    spectrum: Spectrum,
}

impl NormalizedFamily {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Amplitudes `(A, ±A, B)` of a family member; `A` and `B` must be nonzero.
    pub fn params(&self, a: f64, b: f64, same_sign: bool) -> Result<SolitonParams> {
        if a == 0.0 {
            return Err(Error::ZeroParameter(0));
        }
        if b == 0.0 {
            return Err(Error::ZeroParameter(2));
        }
        SolitonParams::new(vec![a, if same_sign { a } else { -a }, b])
    }
}

/// Outcome of the normalized-solution classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NormalizedOutcome {
    /// Unique up to translation and the sign of each component.
    Unique(SolitonParams),
    /// Infinitely many solutions, up to translation.
    Family(NormalizedFamily),
    None,
}

/// Spectra admitting solutions with every mass equal to one.
///
/// The grouped mass laws decide the answer: distinct potentials force
/// `2 eta_i = 1` for all `i`; `mu_1 = mu_2 < mu_3` forces `2 eta_1 = 2` and
/// `2 eta_3 = 1`; `mu_1 < mu_2 = mu_3` would need `2 eta_1 = 1 < 2 = 2 eta_2`;
/// equal potentials force `2 eta = 3`.
pub fn normalized_solutions(spectrum: &Spectrum) -> Result<NormalizedOutcome> {
    require_three(spectrum)?;
    let eta = spectrum.eta();
    Ok(match DegenerateCase::of(spectrum) {
        Some(DegenerateCase::Eq123) if 2.0 * eta[0] == 3.0 => {
            // Equal masses need equal a_i^2; the translation normal form fixes
            // sum a_i^2 = 4 eta^2.
            let a = (4.0 * eta[0] * eta[0] / 3.0).sqrt();
            NormalizedOutcome::Unique(SolitonParams::new(vec![a; 3])?)
        }
        Some(DegenerateCase::Eq12) if 2.0 * eta[0] == 2.0 && 2.0 * eta[2] == 1.0 => {
            NormalizedOutcome::Family(NormalizedFamily {
                spectrum: spectrum.clone(),
            })
        }
        _ => NormalizedOutcome::None,
    })
}

/// Value and derivative ratios at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialRatios {
    pub q: f64,
    pub p: f64,
}

impl InitialRatios {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if q == 0.0 {
            return Err(Error::ZeroRatio);
        }
        Ok(Self { q, p })
    }
}

/// Coefficients of `f(p) = -c0 - k (1 + p^2) / (d32 p - d31 q)^2`.
#[derive(Debug, Clone, Copy)]
struct FpForm {
    c0: f64,
    k: f64,
    d31: f64,
    d32: f64,
    q: f64,
}

impl FpForm {
    fn new(spectrum: &Spectrum, q: f64) -> Result<Self> {
        require_strict_three(spectrum)?;
        if q == 0.0 {
            return Err(Error::ZeroRatio);
        }
        let mu = spectrum.mu();
        let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
        let (d31, d32) = (m3 - m1, m3 - m2);
        let q2 = q * q;
        let den = d32 + q2 * d31;
        let c0 = (1.0 + q2).powi(2) * d31 * d32 / den + m1 + q2 * m2;
        let k = q2 * (m1 - m2).powi(2) * (m1 * m1 * q2 - m1 * m3 * q2 + m2 * m2 - m2 * m3) / den;
        Ok(Self { c0, k, d31, d32, q })
    }

    fn at_p(&self, p: f64) -> Result<f64> {
        let lin = self.d32 * p - self.d31 * self.q;
        if lin.abs() <= 4.0 * f64::EPSILON * (self.d32 * p).abs().max((self.d31 * self.q).abs()) {
            return Err(Error::PoleAtP(p));
        }
        Ok(-self.c0 - self.k * (1.0 + p * p) / (lin * lin))
    }

    /// `f` at `p = tan(phi)`; finite for every angle except the pole.
    fn at_angle(&self, phi: f64) -> f64 {
        let lin = self.d32 * phi.sin() - self.d31 * self.q * phi.cos();
        -self.c0 - self.k / (lin * lin)
    }

    /// Angle of the pole, in `(-pi/2, pi/2)`.
    fn pole_angle(&self) -> f64 {
        (self.d31 * self.q).atan2(self.d32)
    }
}

/// `f(p)`, the value of `u_3'(0)^2 / u_1(0)^2` forced by the constants of
/// motion when `u_3(0) = 0`, `u_2(0) = q u_1(0)` and `u_2'(0) = p u_1'(0)`.
pub fn f_of_p(spectrum: &Spectrum, q: f64, p: f64) -> Result<f64> {
    FpForm::new(spectrum, q)?.at_p(p)
}

/// `f` at `p = tan(phi)`, usable across `p = ±∞`.
pub fn f_of_angle(spectrum: &Spectrum, q: f64, phi: f64) -> Result<f64> {
    Ok(FpForm::new(spectrum, q)?.at_angle(phi))
}

/// The pole `p = (mu_3 - mu_1) q / (mu_3 - mu_2)`.
pub fn pole_of_f(spectrum: &Spectrum, q: f64) -> Result<f64> {
    let form = FpForm::new(spectrum, q)?;
    Ok(form.d31 * q / form.d32)
}

/// Closed-form maximum `-mu_3 [q^2 (mu_1 - mu_3) + (mu_2 - mu_3)]^2 / ((mu_3 - mu_1)^2 q^2 + (mu_3 - mu_2)^2)`.
pub fn f_max_closed_form(spectrum: &Spectrum, q: f64) -> Result<f64> {
    require_strict_three(spectrum)?;
    if q == 0.0 {
        return Err(Error::ZeroRatio);
    }
    let mu = spectrum.mu();
    let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
    let q2 = q * q;
    Ok(-m3 * (q2 * (m1 - m3) + (m2 - m3)).powi(2)
        / ((m3 - m1).powi(2) * q2 + (m3 - m2).powi(2)))
}

/// Shape of the set where `f(p) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdmissibleSet {
    /// The open interval `(p_low, p_high)`.
    Between,
    /// `p < p_low` or `p > p_high`: the positive arc of `f` passes through `p = ±∞`.
    Outside,
}

/// The two zeros of `f`, its maximizer and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PBounds {
    pub p_low: f64,
    pub p_high: f64,
    pub p_max_arg: f64,
    pub f_max: f64,
    pub pole: f64,
    pub admissible: AdmissibleSet,
}

impl PBounds {
    /// Whether `f(p) > 0`.
    pub fn contains(&self, p: f64) -> bool {
        match self.admissible {
            AdmissibleSet::Between => self.p_low < p && p < self.p_high,
            AdmissibleSet::Outside => p < self.p_low || p > self.p_high,
        }
    }

    /// `k` points of the admissible set, evenly spaced in angle strictly
    /// between its two endpoints.
    pub fn interior_samples(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = (self.p_low.atan(), self.p_high.atan());
        let (start, end) = match self.admissible {
            AdmissibleSet::Between => (lo, hi),
            AdmissibleSet::Outside => (hi, lo + std::f64::consts::PI),
        };
        (1..=k)
            .map(|j| (start + (end - start) * j as f64 / (k + 1) as f64).tan())
            .collect()
    }
}

/// Reduces an angle to `(-pi/2, pi/2]`.
fn reduce_half_turn(phi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut r = phi % pi;
    if r > 0.5 * pi {
        r -= pi;
    } else if r <= -0.5 * pi {
        r += pi;
    }
    r
}

/// Finds both zeros of `f` by bracketing in angle space, one on each side of
/// the maximizer, each between the maximizer and the pole.
pub fn p_bounds(spectrum: &Spectrum, q: f64) -> Result<PBounds> {
    let form = FpForm::new(spectrum, q)?;
    let pi = std::f64::consts::PI;
    let beta = form.pole_angle();
    let top = beta + 0.5 * pi;
    let f_max = form.at_angle(top);
    if f_max <= 0.0 || !f_max.is_finite() {
        return Err(Error::RootBracketFailure(format!("maximum of f is {f_max}")));
    }
    // Walk toward each pole until f turns negative.
    let bracket = |dir: f64| -> Result<f64> {
        let mut off = 0.25 * pi;
        for _ in 0..200 {
            if form.at_angle(beta + if dir > 0.0 { off } else { pi - off }) < 0.0 {
                return Ok(off);
            }
            off *= 0.5;
        }
        Err(Error::RootBracketFailure("f stays positive next to the pole".into()))
    };
    let tol = 1e-15;
    let lo_off = bracket(1.0)?;
    let phi_a = find_root(|t| form.at_angle(t), beta + lo_off, top, tol)
        .map_err(|e| Error::RootBracketFailure(e.to_string()))?;
    let hi_off = bracket(-1.0)?;
    let phi_b = find_root(|t| form.at_angle(t), top, beta + pi - hi_off, tol)
        .map_err(|e| Error::RootBracketFailure(e.to_string()))?;
    let pa = reduce_half_turn(phi_a).tan();
    let pb = reduce_half_turn(phi_b).tan();
    // The positive arc (phi_a, phi_b) crosses p = ±∞ iff it contains pi/2.
    let admissible = if phi_a < 0.5 * pi && 0.5 * pi < phi_b {
        AdmissibleSet::Outside
    } else {
        AdmissibleSet::Between
    };
    Ok(PBounds {
        p_low: pa.min(pb),
        p_high: pa.max(pb),
        p_max_arg: reduce_half_turn(top).tan(),
        f_max,
        pole: form.d31 * q / form.d32,
        admissible,
    })
}

/// Pair factors `A_12, A_13, A_23` of a strict three-component spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveConstants {
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
    pub eta: [f64; 3],
}

impl CurveConstants {
    pub fn new(spectrum: &Spectrum) -> Result<Self> {
        require_strict_three(spectrum)?;
        let e = spectrum.eta();
        Ok(Self {
            a12: spectrum.pair_factor(0, 1),
            a13: spectrum.pair_factor(0, 2),
            a23: spectrum.pair_factor(1, 2),
            eta: [e[0], e[1], e[2]],
        })
    }

    /// `Y^2` on the curve `u_3(0) = 0` at abscissa `X`.
    pub fn y_squared(&self, x: f64) -> f64 {
        let x2 = x * x;
        (1.0 - 0.25 * self.a13 * x2)
            / (0.25 * self.a23 - self.a12 * self.a12 * self.a13 * self.a23 * x2 / 16.0)
    }

    /// Scale-relative residual of `u_3(0) = 0` in scaled amplitudes.
    pub fn vanishing_residual(&self, x: f64, y: f64) -> f64 {
        let (x2, y2) = (x * x, y * y);
        let t1 = 0.25 * self.a13 * x2;
        let t2 = 0.25 * self.a23 * y2;
        let t3 = self.a12 * self.a12 * self.a13 * self.a23 * x2 * y2 / 16.0;
        (1.0 - t1 - t2 + t3).abs() / 1f64.max(t1).max(t2).max(t3)
    }

    /// `u_2(0) / u_1(0)` in scaled amplitudes.
    pub fn ratio(&self, x: f64, y: f64, z: f64) -> f64 {
        let (a12, a13, a23) = (self.a12, self.a13, self.a23);
        let (x2, y2, z2) = (x * x, y * y, z * z);
        let num = self.eta[1]
            * y
            * (1.0 + 0.25 * (-a12 * x2 + a23 * z2) - a13 * a13 * a12 * a23 * x2 * z2 / 16.0);
        let den = self.eta[0]
            * x
            * (1.0 + 0.25 * (a12 * y2 + a13 * z2) + a23 * a23 * a12 * a13 * y2 * z2 / 16.0);
        num / den
    }

    /// `u_2(0) / u_1(0)` on the curve, where it does not depend on `Z`.
    pub fn base_ratio(&self, x: f64, y: f64) -> f64 {
        self.eta[1] * y * (1.0 - 0.25 * self.a12 * x * x)
            / (self.eta[0] * x * (1.0 + 0.25 * self.a12 * y * y))
    }

    /// Right end of the inner piece, `X < 2 / sqrt(A_13)`.
    pub fn inner_limit(&self) -> f64 {
        2.0 / self.a13.sqrt()
    }

    /// Left end of the outer piece, `X > 2 / (A_12 sqrt(A_13))`.
    pub fn outer_limit(&self) -> f64 {
        2.0 / (self.a12 * self.a13.sqrt())
    }
}

/// Which of the two `X > 0` pieces of the curve `u_3(0) = 0` a base point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Piece {
    Inner,
    Outer,
}

/// A point `(X, Y)` with `X > 0` on the curve `u_3(0) = 0` with ratio `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasePoint {
    pub piece: Piece,
    pub x: f64,
    pub y: f64,
}

const BASE_SCAN: usize = 4000;

/// All base points with `X > 0` whose value ratio is `q`.
pub fn base_points(spectrum: &Spectrum, q: f64) -> Result<Vec<BasePoint>> {
    if q == 0.0 {
        return Err(Error::ZeroRatio);
    }
    let c = CurveConstants::new(spectrum)?;
    let target = q.abs().ln();
    let mut out = Vec::new();
    for piece in [Piece::Inner, Piece::Outer] {
        // X as a function of t in (0, 1), and the sign of Y giving sign(q).
        let (x_of, y_sign): (Box<dyn Fn(f64) -> f64>, f64) = match piece {
            Piece::Inner => {
                let l = c.inner_limit();
                (Box::new(move |t| l * t), q.signum())
            }
            Piece::Outer => {
                let l = c.outer_limit();
                (Box::new(move |t| l / t), -q.signum())
            }
        };
        let point = |t: f64| {
            let x = x_of(t);
            (x, y_sign * c.y_squared(x).max(0.0).sqrt())
        };
        let h = |t: f64| {
            let (x, y) = point(t);
            c.base_ratio(x, y).abs().ln() - target
        };
        let nodes: Vec<f64> = (1..BASE_SCAN)
            .map(|k| 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / BASE_SCAN as f64).cos()))
            .collect();
        let vals: Vec<f64> = nodes.iter().map(|&t| h(t)).collect();
        for k in 0..nodes.len() - 1 {
            let (va, vb) = (vals[k], vals[k + 1]);
            if !(va.is_finite() && vb.is_finite()) || va.signum() == vb.signum() {
                continue;
            }
            let t = find_root(&h, nodes[k], nodes[k + 1], 1e-16)?;
            let (x, y) = point(t);
            out.push(BasePoint { piece, x, y });
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyBranch(format!("no base point with ratio {q}")));
    }
    Ok(out)
}

/// Amplitudes `(eta_1 X, eta_2 Y, eta_3 Z)`.
pub fn params_from_scaled(spectrum: &Spectrum, x: f64, y: f64, z: f64) -> Result<SolitonParams> {
    require_three(spectrum)?;
    let e = spectrum.eta();
    SolitonParams::new(vec![e[0] * x, e[1] * y, e[2] * z])
}

/// Initial data `(u_1, u_2, u_3, u_1', u_2', u_3')` at the origin for scaled amplitudes.
pub fn initial_data(spectrum: &Spectrum, x: f64, y: f64, z: f64) -> Result<[f64; 6]> {
    let rep = build_solution(spectrum, &params_from_scaled(spectrum, x, y, z)?)?;
    let s = rep.state(0.0)?;
    Ok([s[0], s[1], s[2], s[3], s[4], s[5]])
}

/// A point on a branch with its derivative ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p: f64,
}

/// One connected branch: a base point, a sign of `(X, Y)` and a sign of `Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub piece: Piece,
    pub sign_xy: f64,
    pub sign_z: f64,
    pub points: Vec<BranchPoint>,
}

/// Smallest and largest `|Z|` sampled along a branch (`Z^2` from 1e-12 to 1e12).
pub const Z_RANGE: (f64, f64) = (1e-6, 1e6);

fn log_nodes(n: usize) -> Vec<f64> {
    let (lo, hi) = (Z_RANGE.0.ln(), Z_RANGE.1.ln());
    (0..n)
        .map(|k| (lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Every branch of the solution curve for ratio `q`, ordered by piece, then
/// sign of `(X, Y)`, then sign of `Z`, each sampled at `n_points` log-spaced `|Z|`.
pub fn trace_branches(spectrum: &Spectrum, q: f64, n_points: usize) -> Result<Vec<Branch>> {
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
    }
    let bases = base_points(spectrum, q)?;
    let zs = log_nodes(n_points);
    let mut out = Vec::new();
    for b in &bases {
        for sign_xy in [1.0, -1.0] {
            for sign_z in [1.0, -1.0] {
                let points = zs
                    .iter()
                    .map(|&z| {
                        let (x, y, z) = (sign_xy * b.x, sign_xy * b.y, sign_z * z);
                        let d = initial_data(spectrum, x, y, z)?;
                        Ok(BranchPoint {
                            x,
                            y,
                            z,
                            p: d[4] / d[3],
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push(Branch {
                    piece: b.piece,
                    sign_xy,
                    sign_z,
                    points,
                });
            }
        }
    }
    Ok(out)
}

/// One set of amplitudes realizing prescribed `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preimage {
    pub piece: Piece,
    pub sign_xy: f64,
    pub sign_z: f64,
    pub params: [f64; 3],
    /// `(u_1, u_2, u_3, u_1', u_2', u_3')` at the origin.
    pub initial: [f64; 6],
    /// `|p(Z) - p|` at the refined root.
    pub p_error: f64,
}

/// Result of [`count_preimages`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreimageCount {
    pub count: usize,
    pub preimages: Vec<Preimage>,
}

const PREIMAGE_SCAN: usize = 600;

/// Searches every branch for `Z` with `u_2'(0) = p u_1'(0)` and returns the
/// distinct amplitude triples whose ratio error is below `tol`.
pub fn count_preimages(spectrum: &Spectrum, q: f64, p: f64, tol: f64) -> Result<PreimageCount> {
    let bases = base_points(spectrum, q)?;
    let zs = log_nodes(PREIMAGE_SCAN);
    let mut found: Vec<Preimage> = Vec::new();
    for b in &bases {
        // h vanishes where the derivative ratio equals p; it stays finite where
        // u_1'(0) = 0, unlike p itself.
        let h = |z: f64| -> f64 {
            match initial_data(spectrum, b.x, b.y, z) {
                Ok(d) => (d[4] - p * d[3]) / d[3].hypot(d[4]),
                Err(_) => f64::NAN,
            }
        };
        let vals: Vec<f64> = zs.iter().map(|&z| h(z)).collect();
        for k in 0..zs.len() - 1 {
            let (va, vb) = (vals[k], vals[k + 1]);
            if !(va.is_finite() && vb.is_finite()) || va.signum() == vb.signum() {
                continue;
            }
            let s = find_root(|s: f64| h(s.exp()), zs[k].ln(), zs[k + 1].ln(), 1e-15)?;
            let z0 = s.exp();
            // p(Z) = p(-X, -Y, Z) = p(X, Y, -Z): the root holds on all four sign branches.
            for sign_xy in [1.0, -1.0] {
                for sign_z in [1.0, -1.0] {
                    let (x, y, z) = (sign_xy * b.x, sign_xy * b.y, sign_z * z0);
                    let initial = initial_data(spectrum, x, y, z)?;
                    let p_error = (initial[4] / initial[3] - p).abs() / (1.0 + p.abs());
                    if p_error > tol {
                        continue;
                    }
                    let e = spectrum.eta();
                    let params = [e[0] * x, e[1] * y, e[2] * z];
                    let duplicate = found.iter().any(|o| {
                        o.params
                            .iter()
                            .zip(&params)
                            .all(|(u, v)| (u - v).abs() <= 1e-8 * (1.0 + v.abs()))
                    });
                    if !duplicate {
                        found.push(Preimage {
                            piece: b.piece,
                            sign_xy,
                            sign_z,
                            params,
                            initial,
                            p_error,
                        });
                    }
                }
            }
        }
    }
    Ok(PreimageCount {
        count: found.len(),
        preimages: found,
    })
}

/// Whether four initial-data vectors are exactly the sign orbit generated by
/// flipping `(u_1, u_2, u_1', u_2')` together and flipping `u_3'` alone.
pub fn follows_sign_pattern(data: &[[f64; 6]], tol: f64) -> bool {
    if data.len() != 4 {
        return false;
    }
    let base = data[0];
    let close = |a: &[f64; 6], b: &[f64; 6]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    };
    let image = |s12: f64, s3: f64| {
        [
            s12 * base[0],
            s12 * base[1],
            base[2],
            s12 * base[3],
            s12 * base[4],
            s3 * base[5],
        ]
    };
    let targets = [image(1.0, 1.0), image(-1.0, 1.0), image(1.0, -1.0), image(-1.0, -1.0)];
    targets
        .iter()
        .all(|t| data.iter().filter(|d| close(d, t)).count() == 1)
}

/// Initial-data identities at the origin for a solution with `u_3(0) = 0`
/// and ratios `(q, p)`: each entry is `(observed, predicted)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialDataCheck {
    /// `u_1(0)^2` against `(mu_3 - mu_1)(mu_3 - mu_2) / ((mu_3 - mu_2) + q^2 (mu_3 - mu_1))`.
    pub value_sq: (f64, f64),
    /// `u_1'(0)^2` against its closed form in `(q, p)`.
    pub slope_sq: (f64, f64),
    /// `u_3'(0)^2 / u_1(0)^2` against `f(p)`.
    pub third_slope_ratio: (f64, f64),
}

impl InitialDataCheck {
    /// Largest relative discrepancy.
    pub fn max_relative_error(&self) -> f64 {
        [self.value_sq, self.slope_sq, self.third_slope_ratio]
            .iter()
            .map(|(o, p)| (o - p).abs() / (1.0 + p.abs()))
            .fold(0.0, f64::max)
    }
}

/// Compares the rebuilt solution's data at the origin with the closed forms.
pub fn check_initial_data(rep: &SolutionRep, q: f64, p: f64) -> Result<InitialDataCheck> {
    let spectrum = rep.spectrum();
    let form = FpForm::new(spectrum, q)?;
    let mu = spectrum.mu();
    let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
    let (d31, d32) = (form.d31, form.d32);
    let q2 = q * q;
    let s = rep.state(0.0)?;
    let value_pred = d31 * d32 / (d32 + q2 * d31);
    let lin = d32 * p - d31 * q;
    let slope_pred = q2 * (m1 - m2).powi(2) * d31 * d32
        * (m1 * m1 * q2 - m1 * m3 * q2 + m2 * m2 - m2 * m3)
        / ((d32 + q2 * d31).powi(2) * lin * lin);
    Ok(InitialDataCheck {
        value_sq: (s[0] * s[0], value_pred),
        slope_sq: (s[3] * s[3], slope_pred),
        third_slope_ratio: (s[5] * s[5] / (s[0] * s[0]), form.at_p(p)?),
    })
}
