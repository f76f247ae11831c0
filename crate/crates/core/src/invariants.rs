//! Residuals, constants of motion, masses, the Lieb–Thirring saturation gap and
//! the energy of a solution.
//!
//! The `k`-th constant of motion (`k = 1..N`) is evaluated in the form
//!
//! ```text
//! C_k = sum_{a<b} e_{k-2}(mu without a,b) W_ab^2
//!     + (sum u^2) sum_j e_{k-1}(mu without j) u_j^2
//!     + sum_j e_{k-1}(mu without j) u_j'^2
//!     + sum_j e_{k-1}(mu without j) mu_j u_j^2
//! ```
//!
//! with `W_ab = u_a' u_b - u_a u_b'`, `e_m` the elementary symmetric polynomial
//! of degree `m` and `e_{-1} = 0`. Every `C_k` vanishes identically along a
//! decaying solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hirota::SolutionRep;
use crate::numeric::{integrate_with, GridSpec, QuadOptions};

/// Number of grid points used by sup-norm checks.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Half-width of the check grid in units of the slowest decay length.
pub const DECAY_LENGTHS: f64 = 25.0;

/// Grid `[-25/eta_min, 25/eta_min]` with 2001 points.
pub fn default_grid(rep: &SolutionRep) -> GridSpec {
    GridSpec::new(DECAY_LENGTHS / rep.spectrum().eta_min(), DEFAULT_GRID_POINTS)
        .expect("default grid parameters are valid")
}

/// Half-width of the integration interval: the default decay window widened by
/// the largest distance of a component's centre from the origin.
pub fn integration_half_width(rep: &SolutionRep) -> f64 {
    let eta = rep.spectrum().eta();
    let offset = rep
        .params()
        .a()
        .iter()
        .zip(eta)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, e)| (a.abs() / (2.0 * e)).ln().abs() / e)
        .fold(0.0, f64::max);
    DECAY_LENGTHS / rep.spectrum().eta_min() + offset
}

/// `r_i = u_i'' + 2 (sum u_k^2) u_i + mu_i u_i` at `x`.
pub fn residual(rep: &SolutionRep, x: f64) -> Vec<f64> {
    let v = rep.values(x);
    let s: f64 = v.u.iter().map(|u| u * u).sum();
    rep.spectrum()
        .mu()
        .iter()
        .enumerate()
        .map(|(i, m)| v.d2u[i] + 2.0 * s * v.u[i] + m * v.u[i])
        .collect()
}

/// Largest `|r_i| / (1 + |mu_i|)` over the grid.
pub fn residual_sup(rep: &SolutionRep, grid: &GridSpec) -> f64 {
    let mu = rep.spectrum().mu();
    grid.nodes()
        .iter()
        .flat_map(|&x| {
            residual(rep, x)
                .into_iter()
                .zip(mu)
                .map(|(r, m)| r.abs() / (1.0 + m.abs()))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Elementary symmetric polynomial of degree `m` of the entries of `mu` whose
/// indices are not in `skip`; `e_m = 0` for `m < 0`.
pub fn elementary_excluding(mu: &[f64], skip: &[usize], m: isize) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let m = m as usize;
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (idx, &v) in mu.iter().enumerate() {
        if skip.contains(&idx) {
            continue;
        }
        for d in (1..=m).rev() {
            e[d] += v * e[d - 1];
        }
    }
    e[m]
}

/// Weights of the `k`-th identity: pair weights `e_{k-2}` and single weights `e_{k-1}`.
#[derive(Debug, Clone)]
pub struct MotionWeights {
    pub order: usize,
    pub pair: Vec<Vec<f64>>,
    pub single: Vec<f64>,
}

impl MotionWeights {
    pub fn new(mu: &[f64], k: usize) -> Result<Self> {
        let n = mu.len();
        if k == 0 || k > n {
            return Err(Error::OrderOutOfRange { order: k, n });
        }
        let k = k as isize;
        let mut pair = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                pair[a][b] = elementary_excluding(mu, &[a, b], k - 2);
            }
        }
        let single = (0..n).map(|j| elementary_excluding(mu, &[j], k - 1)).collect();
        Ok(Self {
            order: k as usize,
            pair,
            single,
        })
    }
}

/// Value of an identity together with its largest single term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityValue {
    pub value: f64,
    pub scale: f64,
}

/// `C_k` from point values `(u, u')`.
pub fn motion_identity(mu: &[f64], w: &MotionWeights, u: &[f64], du: &[f64]) -> IdentityValue {
    let n = mu.len();
    let s: f64 = u.iter().map(|v| v * v).sum();
    let mut value = 0.0;
    let mut scale: f64 = 0.0;
    let mut push = |t: f64| {
        value += t;
        scale = scale.max(t.abs());
    };
    for a in 0..n {
        for b in a + 1..n {
            let wab = du[a] * u[b] - u[a] * du[b];
            push(w.pair[a][b] * wab * wab);
        }
    }
    for j in 0..n {
        let e = w.single[j];
        push(s * e * u[j] * u[j]);
        push(e * du[j] * du[j]);
        push(e * mu[j] * u[j] * u[j]);
    }
    IdentityValue { value, scale }
}

/// `C_k(x)` for the solution.
pub fn motion_constant(rep: &SolutionRep, k: usize, x: f64) -> Result<f64> {
    let w = MotionWeights::new(rep.spectrum().mu(), k)?;
    let v = rep.values(x);
    Ok(motion_identity(rep.spectrum().mu(), &w, &v.u, &v.du).value)
}

/// Sup-norm summary of one identity over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionReport {
    pub order: usize,
    pub sup_abs: f64,
    /// Largest absolute single term over the grid.
    pub scale: f64,
    pub grid: GridSpec,
}

impl MotionReport {
    /// `sup_abs / scale` (0 when the solution vanishes).
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.sup_abs / self.scale
        }
    }
}

pub fn motion_report(rep: &SolutionRep, k: usize, grid: &GridSpec) -> Result<MotionReport> {
    let mu = rep.spectrum().mu();
    let w = MotionWeights::new(mu, k)?;
    let mut sup_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in grid.nodes() {
        let v = rep.values(x);
        let iv = motion_identity(mu, &w, &v.u, &v.du);
        sup_abs = sup_abs.max(iv.value.abs());
        scale = scale.max(iv.scale);
    }
    Ok(MotionReport {
        order: k,
        sup_abs,
        scale,
        grid: *grid,
    })
}

/// How [`mass`] evaluates `∫ u_i^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MassMethod {
    /// Boundary values of the exact antiderivative `-2 eta_i F_i / f`.
    Analytic,
    /// Adaptive quadrature of `u_i^2`.
    Quadrature,
}

/// `(F_i / f)'(x)` where `F_i` collects the subsets of `f` avoiding `i`;
/// equals `-u_i^2 / (2 eta_i)` for solutions built from tau functions.
pub fn antiderivative_slope(rep: &SolutionRep, i: usize, x: f64) -> Result<f64> {
    let fi = rep.f_excluding(i)?;
    let dfi = fi.differentiate();
    let f = rep.f();
    let df = rep.df();
    let s = crate::exppoly::joint_shift(&[f, &fi], x);
    let f0 = f.eval_shifted(x, s);
    let num = dfi.eval_shifted(x, s) * f0 - fi.eval_shifted(x, s) * df.eval_shifted(x, s);
    Ok(num / (f0 * f0))
}

fn analytic_mass(rep: &SolutionRep, i: usize) -> Result<f64> {
    let fi = rep.f_excluding(i)?;
    let f_all = rep.subset_sum(|_| true);
    let top = f_all
        .max_rate()
        .expect("tau function always has the constant term 1");
    let limit = fi.coeff_at(top) / f_all.coeff_at(top);
    Ok(2.0 * rep.spectrum().eta()[i] * (1.0 - limit))
}

/// `∫ u_i^2 dx`.
pub fn mass(rep: &SolutionRep, i: usize, method: MassMethod) -> Result<f64> {
    if i >= rep.n() {
        return Err(Error::IndexOutOfRange { index: i, n: rep.n() });
    }
    match method {
        MassMethod::Analytic => analytic_mass(rep, i),
        MassMethod::Quadrature => integrate_density(rep, 1e-10, |v| v.u[i] * v.u[i]),
    }
}

/// `∫ density(values(x)) dx` over the integration window.
pub fn integrate_density<F>(rep: &SolutionRep, tol: f64, density: F) -> Result<f64>
where
    F: Fn(&crate::hirota::PointValues) -> f64,
{
    let l = integration_half_width(rep);
    let pieces = (2.0 * l * rep.spectrum().eta_max()).ceil().max(16.0) as usize;
    let opts = QuadOptions::new(tol).with_pieces(pieces);
    integrate_with(|x| density(&rep.values(x)), -l, l, opts).map(|r| r.value)
}

/// `sum_n sqrt|lambda_n| - (1/4) ∫ V_+` with `V = 2 sum u_n^2`, where
/// `lambda_n` are the negative eigenvalues of `-d^2 - V`. These are the
/// distinct values of `mu` over components with `a_i != 0`; equal
/// potentials share one simple eigenvalue.
pub fn lieb_thirring_gap(rep: &SolutionRep) -> Result<f64> {
    let mu = rep.spectrum().mu();
    let eta = rep.spectrum().eta();
    let a = rep.params().a();
    let mut present: Vec<usize> = (0..rep.n()).filter(|&i| a[i] != 0.0).collect();
    present.dedup_by(|j, i| mu[*j] == mu[*i]);
    let lhs: f64 = present.iter().map(|&i| eta[i]).sum();
    let v = integrate_density(rep, 1e-10, |p| {
        (2.0 * p.u.iter().map(|u| u * u).sum::<f64>()).max(0.0)
    })?;
    Ok(lhs - 0.25 * v)
}

/// Energy `∫ sum u_k'^2 - ∫ (sum u_k^2)^2` and its two pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub kinetic: f64,
    pub quartic: f64,
    pub total: f64,
}

pub fn energy(rep: &SolutionRep) -> Result<Energy> {
    let kinetic = integrate_density(rep, 1e-10, |p| p.du.iter().map(|d| d * d).sum())?;
    let quartic = integrate_density(rep, 1e-10, |p| p.u.iter().map(|u| u * u).sum::<f64>().powi(2))?;
    Ok(Energy {
        kinetic,
        quartic,
        total: kinetic - quartic,
    })
}
