//! The linearized system around a solution,
//!
//! ```text
//! phi_i'' + 2 (sum_k u_k^2) phi_i + 4 (sum_k u_k phi_k) u_i = -mu_i phi_i,
//! ```
//!
//! its analytic kernel elements (parameter tangents, rotations between
//! components with equal `mu`, translation), the linearized constants of
//! motion and a discretized estimate of the kernel dimension.
//!
//! The `k`-th linearized constant is half the directional derivative of the
//! `k`-th constant of motion along `phi`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::{joint_shift, ExpPoly};
use crate::hirota::{PointValues, SolutionRep};
use crate::invariants::MotionWeights;
use crate::numeric::{eigs_dense, eigs_smallest, EigPairs, EigsOptions, GridSpec, SymBandMatrix};

/// Vector field `phi_i = num_i / den` with exact derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct TangentVector {
    num: Vec<ExpPoly>,
    den: ExpPoly,
    #[serde(skip)]
    dnum: Vec<ExpPoly>,
    #[serde(skip)]
    d2num: Vec<ExpPoly>,
    #[serde(skip)]
    dden: ExpPoly,
    #[serde(skip)]
    d2den: ExpPoly,
}

impl TangentVector {
    /// Builds `phi_i = num_i / den`; `den` must be positive everywhere.
    pub fn new(num: Vec<ExpPoly>, den: ExpPoly) -> Self {
        let dnum: Vec<ExpPoly> = num.iter().map(ExpPoly::differentiate).collect();
        let d2num = dnum.iter().map(ExpPoly::differentiate).collect();
        let dden = den.differentiate();
        let d2den = dden.differentiate();
        Self {
            num,
            den,
            dnum,
            d2num,
            dden,
            d2den,
        }
    }

    /// The zero field with `n` components.
    pub fn zero(n: usize) -> Self {
        Self::new(vec![ExpPoly::zero(); n], ExpPoly::constant(1.0))
    }

    pub fn n(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[ExpPoly] {
        &self.num
    }

    pub fn denominator(&self) -> &ExpPoly {
        &self.den
    }

    /// `phi`, `phi'` and `phi''` at `x` under one common exponent shift.
    pub fn values(&self, x: f64) -> PointValues {
        let mut polys: Vec<&ExpPoly> = Vec::with_capacity(self.n() + 1);
        polys.push(&self.den);
        polys.extend(self.num.iter());
        let s = joint_shift(&polys, x);
        let d0 = self.den.eval_shifted(x, s);
        let d1 = self.dden.eval_shifted(x, s) / d0;
        let d2 = self.d2den.eval_shifted(x, s) / d0;
        let n = self.n();
        let mut out = PointValues {
            u: vec![0.0; n],
            du: vec![0.0; n],
            d2u: vec![0.0; n],
        };
        for i in 0..n {
            let v = self.num[i].eval_shifted(x, s) / d0;
            let dv = self.dnum[i].eval_shifted(x, s) / d0 - v * d1;
            out.u[i] = v;
            out.du[i] = dv;
            out.d2u[i] = self.d2num[i].eval_shifted(x, s) / d0 - 2.0 * d1 * dv - d2 * v;
        }
        out
    }

    /// Linear combination `sum_k c_k v_k` of fields sharing a denominator.
    pub fn combine(terms: &[(f64, &TangentVector)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParams("empty combination".into()))?
            .1;
        if terms.iter().any(|(_, v)| v.den != first.den || v.n() != first.n()) {
            return Err(Error::InvalidParams(
                "combined fields must share their denominator".into(),
            ));
        }
        let num = (0..first.n())
            .map(|i| {
                terms
                    .iter()
                    .fold(ExpPoly::zero(), |acc, (c, v)| acc.add(&v.num[i].scale(*c)))
            })
            .collect();
        Ok(Self::new(num, first.den.clone()))
    }
}

/// `d u / d a_j` for every `j`, as exact quotients over `f^2`.
pub fn tangent_vectors(rep: &SolutionRep) -> Result<Vec<TangentVector>> {
    let f = rep.f();
    let f2 = f.mul(f);
    (0..rep.n())
        .map(|j| {
            let (dg, df) = rep.parameter_derivative(j)?;
            let num = dg
                .iter()
                .zip(rep.g())
                .map(|(dgi, gi)| dgi.mul(f).sub(&gi.mul(&df)))
                .collect();
            Ok(TangentVector::new(num, f2.clone()))
        })
        .collect()
}

/// The translation generator `(u_1', ..., u_N')`.
pub fn translation_vector(rep: &SolutionRep) -> TangentVector {
    let f = rep.f();
    let num = rep
        .g()
        .iter()
        .zip(rep.dg())
        .map(|(g, dg)| dg.mul(f).sub(&g.mul(rep.df())))
        .collect();
    TangentVector::new(num, f.mul(f))
}

/// The rotation generator with `-u_j` in slot `i` and `u_i` in slot `j`.
pub fn rotation_kernel(rep: &SolutionRep, i: usize, j: usize) -> Result<TangentVector> {
    let n = rep.n();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    let mu = rep.spectrum().mu();
    if i == j || mu[i] != mu[j] {
        return Err(Error::UnequalMu { i, j });
    }
    Ok(slot_field(rep, &[(i, j, -1.0), (j, i, 1.0)]))
}

/// Field with `sign * u_src` in slot `dst` for each `(dst, src, sign)`, zero elsewhere.
pub fn slot_field(rep: &SolutionRep, slots: &[(usize, usize, f64)]) -> TangentVector {
    let mut num = vec![ExpPoly::zero(); rep.n()];
    for &(dst, src, sign) in slots {
        num[dst] = num[dst].add(&rep.g()[src].scale(sign));
    }
    TangentVector::new(num, rep.f().clone())
}

/// Left side minus right side of the linearized system at `x`.
pub fn linearized_residual(rep: &SolutionRep, phi: &TangentVector, x: f64) -> Vec<f64> {
    let u = rep.values(x);
    let p = phi.values(x);
    let s: f64 = u.u.iter().map(|v| v * v).sum();
    let dot: f64 = u.u.iter().zip(&p.u).map(|(a, b)| a * b).sum();
    rep.spectrum()
        .mu()
        .iter()
        .enumerate()
        .map(|(i, m)| p.d2u[i] + 2.0 * s * p.u[i] + 4.0 * dot * u.u[i] + m * p.u[i])
        .collect()
}

/// Largest `|residual_i| / (1 + |mu_i|)` over the grid.
pub fn linearized_residual_sup(rep: &SolutionRep, phi: &TangentVector, grid: &GridSpec) -> f64 {
    let mu = rep.spectrum().mu();
    grid.nodes()
        .into_iter()
        .flat_map(|x| {
            linearized_residual(rep, phi, x)
                .into_iter()
                .zip(mu)
                .map(|(r, m)| r.abs() / (1.0 + m.abs()))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Value of a linearized identity with its largest single term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedValue {
    pub value: f64,
    pub scale: f64,
}

/// Half the derivative of the `k`-th identity along `(phi, phi')` at the point `(u, u')`.
pub fn linearized_identity(
    mu: &[f64],
    w: &MotionWeights,
    u: &[f64],
    du: &[f64],
    phi: &[f64],
    dphi: &[f64],
) -> LinearizedValue {
    let n = mu.len();
    let s: f64 = u.iter().map(|v| v * v).sum();
    let dot: f64 = u.iter().zip(phi).map(|(a, b)| a * b).sum();
    let mut value = 0.0;
    let mut scale: f64 = 0.0;
    let mut push = |t: f64| {
        value += t;
        scale = scale.max(t.abs());
    };
    for a in 0..n {
        for b in a + 1..n {
            let wab = du[a] * u[b] - u[a] * du[b];
            let dw = dphi[a] * u[b] + du[a] * phi[b] - phi[a] * du[b] - u[a] * dphi[b];
            push(w.pair[a][b] * wab * dw);
        }
    }
    for j in 0..n {
        let e = w.single[j];
        push(s * e * u[j] * phi[j]);
        push(dot * e * u[j] * u[j]);
        push(e * du[j] * dphi[j]);
        push(e * mu[j] * u[j] * phi[j]);
    }
    LinearizedValue { value, scale }
}

/// The `k`-th linearized constant of motion at `x`.
pub fn linearized_motion_constant(
    rep: &SolutionRep,
    phi: &TangentVector,
    k: usize,
    x: f64,
) -> Result<LinearizedValue> {
    let mu = rep.spectrum().mu();
    let w = MotionWeights::new(mu, k)?;
    let u = rep.values(x);
    let p = phi.values(x);
    Ok(linearized_identity(mu, &w, &u.u, &u.du, &p.u, &p.du))
}

/// Largest `|value| / scale` of the `k`-th linearized identity over the grid.
pub fn linearized_motion_sup(
    rep: &SolutionRep,
    phi: &TangentVector,
    k: usize,
    grid: &GridSpec,
) -> Result<f64> {
    let mu = rep.spectrum().mu();
    let w = MotionWeights::new(mu, k)?;
    let mut sup: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in grid.nodes() {
        let u = rep.values(x);
        let p = phi.values(x);
        let v = linearized_identity(mu, &w, &u.u, &u.du, &p.u, &p.du);
        sup = sup.max(v.value.abs());
        scale = scale.max(v.scale);
    }
    Ok(if scale == 0.0 { 0.0 } else { sup / scale })
}

/// How the near-zero cutoff is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThresholdPolicy {
    /// `epsilon` times the Gershgorin bound of the discrete operator.
    Relative(f64),
    Absolute(f64),
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self::Relative(1e-6)
    }
}

/// Outcome of the discrete kernel estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    /// Largest scaled residual of the analytic kernel elements.
    pub analytic_residual_sup: f64,
    pub discrete_kernel_dim: usize,
    /// Eigenvalues nearest zero, ascending in magnitude.
    pub eigenvalues_near_zero: Vec<f64>,
    pub threshold: f64,
    /// Smallest excluded `|lambda|` over the largest counted one.
    pub gap_ratio: f64,
    /// Largest principal angle between the analytic and numerical kernels.
    pub subspace_angle: f64,
    pub grid: GridSpec,
}

/// Largest size solved by the dense fallback.
pub const DENSE_LIMIT: usize = 600;

fn fd4_laplacian(m: &mut SymBandMatrix, n: usize, points: usize, h: f64) {
    // -d^2/dx^2 with zero values beyond both ends.
    let c = 1.0 / (12.0 * h * h);
    for k in 0..points {
        for i in 0..n {
            let r = k * n + i;
            m.add_to(r, r, 30.0 * c);
            if k + 1 < points {
                m.add_to(r, r + n, -16.0 * c);
            }
            if k + 2 < points {
                m.add_to(r, r + 2 * n, c);
            }
        }
    }
}

/// Interleaved discretization (index `k N + i`) of
/// `H phi = -phi'' - 2 (sum u^2) phi - 4 u (u . phi) - diag(mu) phi`,
/// whose null space approximates the kernel of the linearized system.
pub fn linearized_operator(rep: &SolutionRep, grid: &GridSpec) -> SymBandMatrix {
    let n = rep.n();
    let points = grid.n_points();
    let mut m = SymBandMatrix::zeros(n * points, 2 * n);
    fd4_laplacian(&mut m, n, points, grid.spacing());
    let mu = rep.spectrum().mu();
    for k in 0..points {
        let u = rep.values(grid.node(k)).u;
        let s: f64 = u.iter().map(|v| v * v).sum();
        for i in 0..n {
            let r = k * n + i;
            m.add_to(r, r, -2.0 * s - mu[i]);
            for j in i..n {
                m.add_to(r, k * n + j, -4.0 * u[i] * u[j]);
            }
        }
    }
    m
}

/// Scalar operator `-d^2/dx^2 - 2 sum u^2` on the grid.
pub fn scalar_operator(rep: &SolutionRep, grid: &GridSpec) -> SymBandMatrix {
    let points = grid.n_points();
    let mut m = SymBandMatrix::zeros(points, 2);
    fd4_laplacian(&mut m, 1, points, grid.spacing());
    for k in 0..points {
        let s: f64 = rep.values(grid.node(k)).u.iter().map(|v| v * v).sum();
        m.add_to(k, k, -2.0 * s);
    }
    m
}

fn nearest_pairs(m: &SymBandMatrix, k: usize, shift: f64) -> Result<EigPairs> {
    if m.dim() <= DENSE_LIMIT {
        let mut all = eigs_dense(m, shift);
        all.values.truncate(k);
        all.vectors.truncate(k);
        all.residuals.truncate(k);
        Ok(all)
    } else {
        eigs_smallest(m, k, shift, EigsOptions::default())
            .map_err(|e| Error::EigenFailure(e.to_string()))
    }
}

/// Analytic kernel candidates: parameter tangents when every `a_i` is
/// nonzero, otherwise translation and rotations between equal potentials.
pub fn analytic_kernel(rep: &SolutionRep) -> Vec<TangentVector> {
    if rep.params().a().iter().all(|a| *a != 0.0) {
        if let Ok(t) = tangent_vectors(rep) {
            return t;
        }
    }
    let mut out = vec![translation_vector(rep)];
    let mu = rep.spectrum().mu();
    for i in 0..rep.n() {
        for j in i + 1..rep.n() {
            if mu[i] == mu[j] {
                out.push(slot_field(rep, &[(i, j, -1.0), (j, i, 1.0)]));
            }
        }
    }
    out
}

/// Samples a field on the grid in interleaved order.
pub fn sample_field(phi: &TangentVector, grid: &GridSpec) -> Vec<f64> {
    grid.nodes()
        .into_iter()
        .flat_map(|x| phi.values(x).u)
        .collect()
}

/// Largest principal angle between the column spans of `a` and `b`
/// (`pi/2` when the dimensions differ).
pub fn subspace_angle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() || a.len() != b.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    let orth = |cols: &[Vec<f64>]| {
        let m = DMatrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r]);
        m.qr().q()
    };
    let (qa, qb) = (orth(a), orth(b));
    let s = (qa.transpose() * qb).singular_values();
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    smin.acos()
}

/// Estimates the kernel dimension from the eigenvalues of the discrete
/// linearized operator nearest zero.
pub fn kernel_dimension(
    rep: &SolutionRep,
    grid: &GridSpec,
    policy: ThresholdPolicy,
) -> Result<KernelReport> {
    let n = rep.n();
    let op = linearized_operator(rep, grid);
    let want = (n + 2).min(op.dim());
    let pairs = nearest_pairs(&op, want, 0.0)?;
    let threshold = match policy {
        ThresholdPolicy::Relative(eps) => eps * op.norm_bound(),
        ThresholdPolicy::Absolute(t) => t,
    };
    let dim = pairs.values.iter().take_while(|v| v.abs() < threshold).count();
    let gap_ratio = match (dim.checked_sub(1).map(|d| pairs.values[d]), pairs.values.get(dim)) {
        (Some(last), Some(next)) => next.abs() / last.abs().max(f64::MIN_POSITIVE),
        (None, Some(_)) => f64::INFINITY,
        _ => 0.0,
    };
    let analytic = analytic_kernel(rep);
    let analytic_residual_sup = analytic
        .iter()
        .map(|phi| linearized_residual_sup(rep, phi, grid))
        .fold(0.0, f64::max);
    let samples: Vec<Vec<f64>> = analytic.iter().map(|phi| sample_field(phi, grid)).collect();
    let subspace = subspace_angle(&samples, &pairs.vectors[..dim]);
    Ok(KernelReport {
        analytic_residual_sup,
        discrete_kernel_dim: dim,
        eigenvalues_near_zero: pairs.values,
        threshold,
        gap_ratio,
        subspace_angle: subspace,
        grid: *grid,
    })
}

/// Lowest `n_eigs` eigenvalues of the scalar operator, ascending.
pub fn scalar_spectrum(rep: &SolutionRep, grid: &GridSpec, n_eigs: usize) -> Result<Vec<f64>> {
    let op = scalar_operator(rep, grid);
    let peak = grid
        .nodes()
        .into_iter()
        .map(|x| rep.values(x).u.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    // Below every eigenvalue, so the nearest ones are the lowest.
    let shift = -2.0 * peak - 1.0;
    let mut values = nearest_pairs(&op, n_eigs.min(op.dim()), shift)?.values;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hirota::{build_solution, SolitonParams, Spectrum};

    fn rep(mu: &[f64], a: &[f64]) -> SolutionRep {
        build_solution(
            &Spectrum::new(mu.to_vec()).unwrap(),
            &SolitonParams::new(a.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn translation_is_in_kernel() {
        let r = rep(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
        let t = translation_vector(&r);
        for x in [-5.0, -1.0, 0.0, 2.5, 7.0] {
            assert!(linearized_residual(&r, &t, x).iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn negative_control_is_not_in_kernel() {
        let r = rep(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
        let phi = slot_field(&r, &[(0, 0, 1.0)]);
        let worst = (0..50)
            .map(|k| -5.0 + 0.2 * k as f64)
            .flat_map(|x| linearized_residual(&r, &phi, x))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst > 1e-3);
    }

    #[test]
    fn rotation_requires_equal_mu() {
        let r = rep(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
        assert_eq!(rotation_kernel(&r, 0, 1).unwrap_err(), Error::UnequalMu { i: 0, j: 1 });
        assert!(rotation_kernel(&r, 0, 5).is_err());
    }

    #[test]
    fn zero_field_has_zero_constants() {
        let r = rep(&[-3.0, -1.2, -0.5], &[1.0, -0.7, 2.0]);
        let z = TangentVector::zero(3);
        for k in 1..=3 {
            assert_eq!(linearized_motion_constant(&r, &z, k, 0.3).unwrap().value, 0.0);
        }
        assert!(linearized_motion_constant(&r, &z, 4, 0.3).is_err());
    }

    #[test]
    fn subspace_angle_basics() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let b = vec![vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]];
        assert!(subspace_angle(&a, &b) < 1e-12);
        let c = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((subspace_angle(&a, &c) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
