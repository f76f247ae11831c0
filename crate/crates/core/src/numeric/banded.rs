//! Symmetric banded matrices, banded LU with partial pivoting, and a
//! shift-invert subspace iteration for the eigenpairs nearest a shift.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `kd`, upper band stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    kd: usize,
    band: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            band: vec![0.0; n * (kd + 1)],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.kd
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        assert!(c - r <= self.kd, "entry ({i}, {j}) outside the band");
        r * (self.kd + 1) + (c - r)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.kd {
            0.0
        } else {
            self.band[self.slot(i, j)]
        }
    }

    /// Sets `A[i][j] = A[j][i] = v`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.band[s] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.band[s] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for i in 0..self.n {
            let row = &self.band[i * (self.kd + 1)..(i + 1) * (self.kd + 1)];
            y[i] += row[0] * x[i];
            for d in 1..=self.kd.min(self.n - 1 - i) {
                let a = row[d];
                y[i] += a * x[i + d];
                y[i + d] += a * x[i];
            }
        }
    }

    /// Gershgorin bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kd);
                let hi = (i + self.kd).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// LU factorization with partial pivoting of `A - shift * I`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SymBandMatrix, shift: f64) -> Self {
        let n = a.n;
        let kl = a.kd;
        let ku = a.kd;
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            piv: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let v = a.get(i, j) - if i == j { shift } else { 0.0 };
                lu.put(i, j, v);
            }
        }
        let tiny = f64::EPSILON * a.norm_bound().max(shift.abs()).max(f64::MIN_POSITIVE);
        let reach = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).abs();
            for r in k + 1..=last_row {
                let v = lu.at(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a_kj = lu.at(k, j);
                    let a_pj = lu.at(p, j);
                    lu.put(k, j, a_pj);
                    lu.put(p, j, a_kj);
                }
            }
            if lu.at(k, k) == 0.0 {
                lu.put(k, k, tiny);
            }
            let pivot = lu.at(k, k);
            for r in k + 1..=last_row {
                let l = lu.at(r, k) / pivot;
                lu.put(r, k, l);
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let v = lu.at(r, j) - l * lu.at(k, j);
                        lu.put(r, j, v);
                    }
                }
            }
        }
        lu
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn put(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.at(r, k) * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.at(k, j) * b[j];
            }
            b[k] = s / self.at(k, k);
        }
    }
}

/// Settings for [`eigs_smallest`].
#[derive(Debug, Clone, Copy)]
pub struct EigsOptions {
    /// Residual target relative to the Gershgorin norm bound.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Extra subspace vectors beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 1000,
            guard: 10,
            seed: 0x5e_ed0f_e16e,
        }
    }
}

/// Eigenpairs ordered by distance to the shift.
#[derive(Debug, Clone)]
pub struct EigPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub norm_bound: f64,
    pub iterations: usize,
}

fn residual(a: &SymBandMatrix, v: &[f64], lambda: f64) -> f64 {
    let mut av = vec![0.0; v.len()];
    a.matvec(v, &mut av);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// The `k` eigenpairs of `a` nearest `shift`, by shift-invert subspace
/// iteration with Rayleigh–Ritz extraction.
pub fn eigs_smallest(a: &SymBandMatrix, k: usize, shift: f64, opts: EigsOptions) -> Result<EigPairs> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::EigenFailure(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let p = (k + opts.guard).max(2 * k).min(n);
    let norm = a.norm_bound().max(f64::MIN_POSITIVE);
    let lu = BandLu::factor(a, shift);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() - 0.5);
    let mut worst = f64::INFINITY;
    for it in 1..=opts.max_iter {
        for mut col in x.column_iter_mut() {
            lu.solve(col.as_mut_slice());
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailure("non-finite iterate in shift-invert solve".into()));
        }
        let q = x.clone().qr().q();
        let mut aq = DMatrix::zeros(n, p);
        for j in 0..p {
            let mut out = vec![0.0; n];
            a.matvec(q.column(j).as_slice(), &mut out);
            aq.set_column(j, &nalgebra::DVector::from_vec(out));
        }
        let h = q.transpose() * &aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| {
            (eig.eigenvalues[i] - shift)
                .abs()
                .total_cmp(&(eig.eigenvalues[j] - shift).abs())
        });
        let w = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = &q * &w;
        let ax = &aq * &w;
        let res: Vec<f64> = (0..p)
            .map(|j| (ax.column(j) - x.column(j) * theta[j]).norm())
            .collect();
        worst = res[..k].iter().cloned().fold(0.0, f64::max);
        if worst <= opts.rel_tol * norm {
            return Ok(EigPairs {
                values: theta[..k].to_vec(),
                vectors: (0..k).map(|j| x.column(j).iter().cloned().collect()).collect(),
                residuals: res[..k].to_vec(),
                norm_bound: norm,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: worst,
    })
}

/// All eigenpairs of a (small) banded matrix via a dense symmetric solver,
/// ordered by distance to `shift`.
pub fn eigs_dense(a: &SymBandMatrix, shift: f64) -> EigPairs {
    let eig = SymmetricEigen::new(a.to_dense());
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        (eig.eigenvalues[i] - shift)
            .abs()
            .total_cmp(&(eig.eigenvalues[j] - shift).abs())
    });
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect();
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&l, v)| residual(a, v, l))
        .collect();
    EigPairs {
        values,
        vectors,
        residuals,
        norm_bound: a.norm_bound(),
        iterations: 0,
    }
}
