//! Tau-function construction of the N-component solutions.
//!
//! For rates `eta_i = sqrt(-mu_i)` and amplitudes `a_i`, define for a subset
//! `J` of `{1..N}`
//!
//! ```text
//! c_J = prod_{j in J} a_j^2 / (4 eta_j^2) * prod_{j<k in J} A_jk^2,
//! A_jk = (eta_j - eta_k) / (eta_j + eta_k),
//! ```
//!
//! Then `f = sum_J c_J exp(2 eta_J x)` and
//! `g_i = a_i exp(eta_i x) sum_{J not containing i} c_J prod_{j in J} A_ij exp(2 eta_J x)`,
//! with `eta_J` the sum of `eta_j` over `J`, and `u_i = g_i / f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::{joint_shift, ExpPoly, ExpTerm};

/// Largest supported number of components (the tau functions have `2^N` terms).
pub const MAX_COMPONENTS: usize = 16;

/// Chemical potentials `mu_1 <= ... <= mu_N < 0` with `eta_i = sqrt(-mu_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    mu: Vec<f64>,
    eta: Vec<f64>,
}

impl Spectrum {
    /// Validates and stores `mu`. Unsorted input is rejected, not reordered.
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::InvalidSpectrum("at least one component is required".into()));
        }
        if n > MAX_COMPONENTS {
            return Err(Error::NTooLarge(n));
        }
        if let Some(m) = mu.iter().find(|m| !(m.is_finite() && **m < 0.0)) {
            return Err(Error::InvalidSpectrum(format!(
                "every mu must be finite and negative, got {m}"
            )));
        }
        if mu.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpectrum(format!(
                "mu must be sorted ascending, got {mu:?}"
            )));
        }
        let eta = mu.iter().map(|m| (-m).sqrt()).collect();
        Ok(Self { mu, eta })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn eta_min(&self) -> f64 {
        self.eta[self.n() - 1]
    }

    pub fn eta_max(&self) -> f64 {
        self.eta[0]
    }

    /// `true` when all chemical potentials are pairwise distinct.
    pub fn is_strict(&self) -> bool {
        self.mu.windows(2).all(|w| w[0] < w[1])
    }

    /// Pair factor `(eta_j - eta_k) / (eta_j + eta_k)`.
    pub fn pair_factor(&self, j: usize, k: usize) -> f64 {
        (self.eta[j] - self.eta[k]) / (self.eta[j] + self.eta[k])
    }
}

/// Amplitude vector `(a_1, ..., a_N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonParams {
    a: Vec<f64>,
}

impl SolitonParams {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if let Some(v) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("amplitude {v} is not finite")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Returns the amplitudes of the solution translated by `c`:
/// `u(x; a') = u(x + c; a)` with `a'_i = a_i exp(eta_i c)`.
pub fn translate_params(spectrum: &Spectrum, params: &SolitonParams, c: f64) -> SolitonParams {
    SolitonParams {
        a: params
            .a
            .iter()
            .zip(spectrum.eta())
            .map(|(a, e)| a * (e * c).exp())
            .collect(),
    }
}

/// Values and first two derivatives of every component at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValues {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

/// Exact solution `u_i = g_i / f` as exponential polynomials.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRep {
    spectrum: Spectrum,
    params: SolitonParams,
    g: Vec<ExpPoly>,
    f: ExpPoly,
    #[serde(skip)]
    dg: Vec<ExpPoly>,
    #[serde(skip)]
    d2g: Vec<ExpPoly>,
    #[serde(skip)]
    df: ExpPoly,
    #[serde(skip)]
    d2f: ExpPoly,
    #[serde(skip)]
    subset_coeff: Vec<f64>,
    #[serde(skip)]
    subset_rate: Vec<f64>,
}

/// Subset tables shared by `f` and the `g_i`: coefficient `c_J` and rate
/// `2 eta_J` for every bitmask `J`. Each subset extends its subset without the
/// lowest element, so no division by vanishing pair factors is needed and
/// subsets with equal multisets of rates receive bit-identical rates.
fn subset_tables(spectrum: &Spectrum, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = spectrum.n();
    let eta = spectrum.eta();
    let size = 1usize << n;
    let mut coeff = vec![0.0; size];
    let mut rate = vec![0.0; size];
    coeff[0] = 1.0;
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut c = coeff[rest] * a[low] * a[low] / (4.0 * eta[low] * eta[low]);
        let mut r = rest;
        while r != 0 && c != 0.0 {
            let k = r.trailing_zeros() as usize;
            let pf = spectrum.pair_factor(low, k);
            c *= pf * pf;
            r &= r - 1;
        }
        coeff[mask] = c;
        rate[mask] = rate[rest] + 2.0 * eta[low];
    }
    (coeff, rate)
}

/// Products `prod_{j in J} A_ij` for every mask `J` (masks containing `i` unused).
fn cross_products(spectrum: &Spectrum, i: usize) -> Vec<f64> {
    let size = 1usize << spectrum.n();
    let mut out = vec![1.0; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] * spectrum.pair_factor(i, low);
    }
    out
}

/// Builds the tau functions. `weight(i, mask)` multiplies the `g_i` term of
/// `mask`; `weight_f(mask)` multiplies the `f` term. Identity weights give the
/// solution itself; other weights give parameter derivatives.
fn assemble<W, V>(
    spectrum: &Spectrum,
    a: &[f64],
    coeff: &[f64],
    rate: &[f64],
    weight_g: W,
    weight_f: V,
) -> (Vec<ExpPoly>, ExpPoly)
where
    W: Fn(usize, usize) -> f64,
    V: Fn(usize) -> f64,
{
    let n = spectrum.n();
    let size = 1usize << n;
    let f = ExpPoly::from_terms(
        (0..size)
            .map(|m| ExpTerm::new(coeff[m] * weight_f(m), rate[m]))
            .collect(),
    );
    let g = (0..n)
        .map(|i| {
            let cross = cross_products(spectrum, i);
            let bit = 1usize << i;
            ExpPoly::from_terms(
                (0..size)
                    .filter(|m| m & bit == 0)
                    .map(|m| {
                        ExpTerm::new(
                            a[i] * coeff[m] * cross[m] * weight_g(i, m),
                            spectrum.eta()[i] + rate[m],
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    (g, f)
}

/// Constructs `(g_1..g_N, f)` for the given spectrum and amplitudes.
pub fn build_solution(spectrum: &Spectrum, params: &SolitonParams) -> Result<SolutionRep> {
    let n = spectrum.n();
    if params.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: params.n(),
        });
    }
    if n > MAX_COMPONENTS {
        return Err(Error::NTooLarge(n));
    }
    let (coeff, rate) = subset_tables(spectrum, params.a());
    let (g, f) = assemble(spectrum, params.a(), &coeff, &rate, |_, _| 1.0, |_| 1.0);
    Ok(SolutionRep::from_parts(
        spectrum.clone(),
        params.clone(),
        g,
        f,
        coeff,
        rate,
    ))
}

impl SolutionRep {
    fn from_parts(
        spectrum: Spectrum,
        params: SolitonParams,
        g: Vec<ExpPoly>,
        f: ExpPoly,
        subset_coeff: Vec<f64>,
        subset_rate: Vec<f64>,
    ) -> Self {
        let dg: Vec<ExpPoly> = g.iter().map(ExpPoly::differentiate).collect();
        let d2g = dg.iter().map(ExpPoly::differentiate).collect();
        let df = f.differentiate();
        let d2f = df.differentiate();
        Self {
            spectrum,
            params,
            g,
            f,
            dg,
            d2g,
            df,
            d2f,
            subset_coeff,
            subset_rate,
        }
    }

    /// Assembles a representation from explicit tau functions (used by the
    /// closed-form constructors of degenerate spectra).
    pub fn from_tau(spectrum: Spectrum, params: SolitonParams, g: Vec<ExpPoly>, f: ExpPoly) -> Result<Self> {
        if g.len() != spectrum.n() {
            return Err(Error::SizeMismatch {
                expected: spectrum.n(),
                got: g.len(),
            });
        }
        let (coeff, rate) = subset_tables(&spectrum, params.a());
        Ok(Self::from_parts(spectrum, params, g, f, coeff, rate))
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn g(&self) -> &[ExpPoly] {
        &self.g
    }

    pub fn f(&self) -> &ExpPoly {
        &self.f
    }

    pub fn dg(&self) -> &[ExpPoly] {
        &self.dg
    }

    pub fn df(&self) -> &ExpPoly {
        &self.df
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            })
        } else {
            Ok(())
        }
    }

    /// `u_i(x)` (0-based component index).
    pub fn u(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.values(x).u[i])
    }

    /// `u_i'(x)`.
    pub fn du(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.values(x).du[i])
    }

    /// `u_i''(x)`.
    pub fn d2u(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.values(x).d2u[i])
    }

    /// All components and their first two derivatives at `x`, with `f` and
    /// every `g_i` evaluated under one common exponent shift.
    pub fn values(&self, x: f64) -> PointValues {
        let mut polys: Vec<&ExpPoly> = Vec::with_capacity(self.n() + 1);
        polys.push(&self.f);
        polys.extend(self.g.iter());
        let s = joint_shift(&polys, x);
        let f0 = self.f.eval_shifted(x, s);
        let f1 = self.df.eval_shifted(x, s) / f0;
        let f2 = self.d2f.eval_shifted(x, s) / f0;
        let n = self.n();
        let mut out = PointValues {
            u: vec![0.0; n],
            du: vec![0.0; n],
            d2u: vec![0.0; n],
        };
        for i in 0..n {
            let u = self.g[i].eval_shifted(x, s) / f0;
            let du = self.dg[i].eval_shifted(x, s) / f0 - u * f1;
            let d2u = self.d2g[i].eval_shifted(x, s) / f0 - 2.0 * f1 * du - f2 * u;
            out.u[i] = u;
            out.du[i] = du;
            out.d2u[i] = d2u;
        }
        out
    }

    /// State `(u_1..u_N, u_1'..u_N')` at `x`.
    pub fn state(&self, x: f64) -> Result<Vec<f64>> {
        let v = self.values(x);
        let mut s = v.u;
        s.extend(v.du);
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::DenominatorZero(x));
        }
        Ok(s)
    }

    /// Part of `f` made of subsets that avoid component `i`.
    pub fn f_excluding(&self, i: usize) -> Result<ExpPoly> {
        self.check_index(i)?;
        let bit = 1usize << i;
        Ok(self.subset_sum(|m| m & bit == 0))
    }

    /// Sum of the subset terms of the general tau formula selected by `keep`.
    pub fn subset_sum<K: Fn(usize) -> bool>(&self, keep: K) -> ExpPoly {
        ExpPoly::from_terms(
            self.subset_coeff
                .iter()
                .zip(&self.subset_rate)
                .enumerate()
                .filter(|(m, _)| keep(*m))
                .map(|(_, (&c, &r))| ExpTerm::new(c, r))
                .collect(),
        )
    }

    /// Exact derivatives `(d g_i / d a_m, d f / d a_m)` for every `i`.
    pub fn parameter_derivative(&self, m: usize) -> Result<(Vec<ExpPoly>, ExpPoly)> {
        self.check_index(m)?;
        let a = self.params.a();
        if a[m] == 0.0 {
            return Err(Error::ZeroParameter(m));
        }
        let bit = 1usize << m;
        let inv = 1.0 / a[m];
        Ok(assemble(
            &self.spectrum,
            a,
            &self.subset_coeff,
            &self.subset_rate,
            |i, mask| {
                let own = if i == m { inv } else { 0.0 };
                let sub = if mask & bit != 0 { 2.0 * inv } else { 0.0 };
                own + sub
            },
            |mask| if mask & bit != 0 { 2.0 * inv } else { 0.0 },
        ))
    }
}
