//! Adaptive Dormand–Prince 5(4) integration with PI step control, and the
//! shooting oracle that re-integrates the NLS system from initial data.

use crate::error::{Error, Result};
use crate::hirota::SolutionRep;

/// Step-control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// States larger than this are treated as blow-up.
    pub blowup: f64,
}

impl OdeOptions {
    pub fn new(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-8,
            initial_step: 1e-3,
            max_steps: 2_000_000,
            blowup: 1e12,
        }
    }
}

/// Accepted steps of an integration, including both end points.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> (&f64, &Vec<f64>) {
        (
            self.xs.last().expect("trajectory has a start point"),
            self.states.last().expect("trajectory has a start point"),
        )
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` (either direction).
pub fn integrate_ode<F>(rhs: F, x0: f64, y0: &[f64], x1: f64, opts: OdeOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0.to_vec();
    let mut traj = Trajectory {
        xs: vec![x0],
        states: vec![y.clone()],
        rejected: 0,
    };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    rhs(x, &y, &mut k1);
    let mut h = opts.initial_step.min(span);
    let mut err_prev: f64 = 1e-4;
    let alpha = 0.7 / 5.0;
    let beta = 0.4 / 5.0;
    for _ in 0..opts.max_steps {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            return Ok(traj);
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        axpy(&mut tmp, &y, hs, &[(A21, &k1)]);
        rhs(x + C2 * hs, &tmp, &mut k2);
        axpy(&mut tmp, &y, hs, &[(A31, &k1), (A32, &k2)]);
        rhs(x + C3 * hs, &tmp, &mut k3);
        axpy(&mut tmp, &y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(x + C4 * hs, &tmp, &mut k4);
        axpy(&mut tmp, &y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(x + C5 * hs, &tmp, &mut k5);
        axpy(
            &mut tmp,
            &y,
            hs,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(x + hs, &tmp, &mut k6);
        axpy(
            &mut ynew,
            &y,
            hs,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        rhs(x + hs, &ynew, &mut k7);
        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite() || v.abs() > opts.blowup) {
            h *= 0.1;
            traj.rejected += 1;
        } else if err <= 1.0 {
            x = if last { x1 } else { x + hs };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            traj.xs.push(x);
            traj.states.push(y.clone());
            let fac = 0.9 * err.max(1e-10).powf(-alpha) * err_prev.powf(beta);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
            if last {
                return Ok(traj);
            }
        } else {
            let fac = 0.9 * err.powf(-0.2);
            h *= fac.clamp(0.1, 0.9);
            traj.rejected += 1;
        }
        if h < 1e-13 * x.abs().max(1.0) {
            return Err(Error::StepUnderflow(x));
        }
    }
    Err(Error::StepUnderflow(x))
}

/// Right-hand side of the first-order form `(u, u')` of the NLS system.
pub fn nls_rhs(mu: &[f64]) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_x, y, dy| {
        let n = mu.len();
        let (u, v) = y.split_at(n);
        let s: f64 = u.iter().map(|ui| ui * ui).sum();
        for i in 0..n {
            dy[i] = v[i];
            dy[n + i] = -mu[i] * u[i] - 2.0 * s * u[i];
        }
    }
}

/// Integrates the NLS system from `(u(x0), u'(x0))` read off `rep`; the
/// solution formula is not consulted after the initial point.
pub fn shoot(rep: &SolutionRep, x0: f64, x1: f64, step_tol: f64) -> Result<Trajectory> {
    let y0 = rep.state(x0)?;
    shoot_from(rep.spectrum().mu(), &y0, x0, x1, step_tol)
}

/// Integrates the NLS system from an explicit state `(u, u')`.
pub fn shoot_from(mu: &[f64], y0: &[f64], x0: f64, x1: f64, step_tol: f64) -> Result<Trajectory> {
    integrate_ode(nls_rhs(mu), x0, y0, x1, OdeOptions::new(step_tol))
}
