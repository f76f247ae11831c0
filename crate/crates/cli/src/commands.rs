//! Subcommand implementations. Each returns whether its checks passed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use soliton_forge::classify::{
    count_preimages, normalized_solutions, p_bounds, trace_branches, NormalizedOutcome, Piece,
};
use soliton_forge::invariants::{
    energy, lieb_thirring_gap, mass, motion_report, residual, Energy, MassMethod,
};
use soliton_forge::linearize::{kernel_dimension, KernelReport, ThresholdPolicy};
use soliton_forge::numeric::GridSpec;
use soliton_forge::{SolitonParams, SolutionRep, Spectrum};

use crate::config::{RunConfig, SweepConfig};
use crate::output::{to_json, Csv, Sink};
use crate::CliError;

/// Default tolerances of the verification checks.
const TOL_RESIDUAL: f64 = 1e-8;
const TOL_MOTION: f64 = 1e-8;
const TOL_MASS: f64 = 1e-8;
const TOL_QUADRATURE: f64 = 1e-6;
const TOL_INTEGRAL: f64 = 1e-6;

/// One verification record.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }
}

fn max_residual(rep: &SolutionRep, grid: &GridSpec) -> f64 {
    grid.nodes()
        .into_iter()
        .flat_map(|x| residual(rep, x))
        .map(f64::abs)
        .fold(0.0, f64::max)
}

fn masses(rep: &SolutionRep) -> Result<Vec<f64>, CliError> {
    (0..rep.n())
        .map(|i| mass(rep, i, MassMethod::Analytic).map_err(CliError::from))
        .collect()
}

/// Index ranges of equal potentials.
fn blocks(mu: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < mu.len() {
        let mut j = i;
        while j + 1 < mu.len() && mu[j + 1] == mu[i] {
            j += 1;
        }
        out.push((i, j));
        i = j + 1;
    }
    out
}

/// Every verification check for one solution.
pub fn run_checks(rep: &SolutionRep, grid: &GridSpec, tol: Option<f64>) -> Result<Vec<Check>, CliError> {
    let mu = rep.spectrum().mu();
    let eta = rep.spectrum().eta();
    let a = rep.params().a();
    let max_mu = mu.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let mut checks = vec![Check::new(
        "residual_sup",
        max_residual(rep, grid),
        0.0,
        tol.unwrap_or(TOL_RESIDUAL) * (1.0 + max_mu),
    )];
    for k in 1..=rep.n() {
        let r = motion_report(rep, k, grid)?;
        checks.push(Check::new(
            format!("motion_identity_{k}"),
            r.relative(),
            0.0,
            tol.unwrap_or(TOL_MOTION),
        ));
    }
    let m = masses(rep)?;
    for (i, j) in blocks(mu) {
        let present = (i..=j).any(|k| a[k] != 0.0);
        let name = if i == j {
            format!("mass_{}", i + 1)
        } else {
            format!("mass_{}..{}", i + 1, j + 1)
        };
        checks.push(Check::new(
            name,
            m[i..=j].iter().sum(),
            if present { 2.0 * eta[i] } else { 0.0 },
            tol.unwrap_or(TOL_MASS),
        ));
    }
    for (i, &mi) in m.iter().enumerate() {
        checks.push(Check::new(
            format!("mass_quadrature_{}", i + 1),
            mass(rep, i, MassMethod::Quadrature)?,
            mi,
            tol.unwrap_or(TOL_QUADRATURE),
        ));
    }
    checks.push(Check::new(
        "lieb_thirring_gap",
        lieb_thirring_gap(rep)?,
        0.0,
        tol.unwrap_or(TOL_INTEGRAL),
    ));
    let e = energy(rep)?;
    let weighted: f64 = mu.iter().zip(&m).map(|(u, w)| u * w).sum();
    let t = tol.unwrap_or(TOL_INTEGRAL);
    checks.push(Check::new("energy_kinetic", e.kinetic, -weighted / 3.0, t));
    checks.push(Check::new("energy_quartic", e.quartic, -2.0 * weighted / 3.0, t));
    checks.push(Check::new("energy_total", e.total, weighted / 3.0, t));
    Ok(checks)
}

#[derive(Serialize)]
struct ProfileHeader<'a> {
    mu: &'a [f64],
    a: &'a [f64],
    grid: GridSpec,
    masses: Vec<f64>,
    energy: Energy,
    max_residual: f64,
}

pub fn build(cfg: &RunConfig, sink: &Sink) -> Result<bool, CliError> {
    let rep = cfg.solution()?;
    let grid = cfg.grid_for(&rep)?;
    let n = rep.n();
    let mut header = vec!["x".to_string()];
    header.extend((1..=n).map(|i| format!("u{i}")));
    header.extend((1..=n).map(|i| format!("du{i}")));
    header.push("V".into());
    let mut csv = Csv::new(&header);
    for x in grid.nodes() {
        let v = rep.values(x);
        let mut row = vec![x];
        row.extend(&v.u);
        row.extend(&v.du);
        row.push(2.0 * v.u.iter().map(|u| u * u).sum::<f64>());
        csv.row(&row);
    }
    let head = ProfileHeader {
        mu: rep.spectrum().mu(),
        a: rep.params().a(),
        grid,
        masses: masses(&rep)?,
        energy: energy(&rep)?,
        max_residual: max_residual(&rep, &grid),
    };
    let csv = csv.into_string();
    let json = to_json(&head);
    sink.artifact("profile.csv", &csv)?;
    sink.artifact("profile.json", &json)?;
    if sink.json {
        print!("{json}");
    } else if sink.has_dir() {
        println!("N = {n}, {} grid points", grid.n_points());
        println!("masses       {:?}", head.masses);
        println!("energy       {:.10}", head.energy.total);
        println!("max residual {:.3e}", head.max_residual);
    } else {
        print!("{csv}");
    }
    Ok(true)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    mu: &'a [f64],
    a: &'a [f64],
    grid: GridSpec,
    masses: Vec<f64>,
    checks: Vec<Check>,
    all_pass: bool,
}

pub fn verify(cfg: &RunConfig, sink: &Sink) -> Result<bool, CliError> {
    let rep = cfg.solution()?;
    let grid = cfg.grid_for(&rep)?;
    let checks = run_checks(&rep, &grid, cfg.tol)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        mu: rep.spectrum().mu(),
        a: rep.params().a(),
        grid,
        masses: masses(&rep)?,
        checks,
        all_pass,
    };
    let json = to_json(&report);
    sink.artifact("verify.json", &json)?;
    if sink.json {
        print!("{json}");
    } else {
        println!("{:<22} {:>24} {:>24} {:>10}  result", "check", "value", "expected", "tol");
        for c in &report.checks {
            println!(
                "{:<22} {:>24.16e} {:>24.16e} {:>10.1e}  {}",
                c.name,
                c.value,
                c.expected,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        println!("{}", if all_pass { "all checks pass" } else { "some checks failed" });
    }
    Ok(all_pass)
}

#[derive(Serialize)]
struct KernelOutput<'a> {
    mu: &'a [f64],
    a: &'a [f64],
    report: KernelReport,
    mesh_doubled_dim: usize,
}

pub fn kernel(cfg: &RunConfig, sink: &Sink) -> Result<bool, CliError> {
    let rep = cfg.solution()?;
    let grid = cfg.grid_for(&rep)?;
    let policy = cfg.tol.map_or(ThresholdPolicy::default(), ThresholdPolicy::Relative);
    let report = kernel_dimension(&rep, &grid, policy)?;
    let fine = kernel_dimension(&rep, &grid.refined(), policy)?;
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (k, v) in report.eigenvalues_near_zero.iter().enumerate() {
        csv.row(&[k as f64, *v]);
    }
    let out = KernelOutput {
        mu: rep.spectrum().mu(),
        a: rep.params().a(),
        mesh_doubled_dim: fine.discrete_kernel_dim,
        report,
    };
    let json = to_json(&out);
    sink.artifact("kernel.json", &json)?;
    sink.artifact("eigenvalues.csv", &csv.into_string())?;
    if sink.json {
        print!("{json}");
    } else {
        let r = &out.report;
        println!("kernel dimension    {}", r.discrete_kernel_dim);
        println!("mesh-doubled        {}", out.mesh_doubled_dim);
        println!("eigenvalues         {:?}", r.eigenvalues_near_zero);
        println!("threshold           {:.3e}", r.threshold);
        println!("gap ratio           {:.3e}", r.gap_ratio);
        println!("subspace angle      {:.3e}", r.subspace_angle);
        println!("analytic residual   {:.3e}", r.analytic_residual_sup);
    }
    Ok(true)
}

fn branch_file_name(piece: Piece, sign_xy: f64, sign_z: f64) -> String {
    let piece = match piece {
        Piece::Inner => "inner",
        Piece::Outer => "outer",
    };
    let s = |v: f64| if v > 0.0 { "plus" } else { "minus" };
    format!("branch_{piece}_xy{}_z{}.csv", s(sign_xy), s(sign_z))
}

#[derive(Serialize)]
struct BranchSummary {
    file: String,
    points: usize,
    p_min: f64,
    p_max: f64,
}

#[derive(Serialize)]
struct BranchesOutput<'a> {
    mu: &'a [f64],
    q: f64,
    bounds: soliton_forge::classify::PBounds,
    branches: Vec<BranchSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preimages: Option<soliton_forge::classify::PreimageCount>,
}

pub fn branches(cfg: &RunConfig, sink: &Sink) -> Result<bool, CliError> {
    let spectrum = cfg.spectrum()?;
    if spectrum.n() != 3 || !spectrum.is_strict() {
        return Err(CliError::Config(
            "branch tracing needs three strictly ordered potentials".into(),
        ));
    }
    let q = cfg
        .q
        .ok_or_else(|| CliError::Config("config is missing \"q\"".into()))?;
    let n_points = cfg.branch_points.unwrap_or(200);
    let bounds = p_bounds(&spectrum, q)?;
    let traced = trace_branches(&spectrum, q, n_points)?;
    let mut summaries = Vec::new();
    for br in &traced {
        let name = branch_file_name(br.piece, br.sign_xy, br.sign_z);
        let mut csv = Csv::new(&["X", "Y", "Z", "p"]);
        for pt in &br.points {
            csv.row(&[pt.x, pt.y, pt.z, pt.p]);
        }
        sink.artifact(&name, &csv.into_string())?;
        let ps = br.points.iter().map(|pt| pt.p);
        summaries.push(BranchSummary {
            file: name,
            points: br.points.len(),
            p_min: ps.clone().fold(f64::INFINITY, f64::min),
            p_max: ps.fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let preimages = match cfg.p {
        Some(p) => Some(count_preimages(&spectrum, q, p, cfg.tol.unwrap_or(1e-10))?),
        None => None,
    };
    let out = BranchesOutput {
        mu: spectrum.mu(),
        q,
        bounds,
        branches: summaries,
        preimages,
    };
    let json = to_json(&out);
    sink.artifact("branches.json", &json)?;
    if sink.json {
        print!("{json}");
    } else {
        println!(
            "admissible p: {:?} with endpoints {:.10} and {:.10}",
            bounds.admissible, bounds.p_low, bounds.p_high
        );
        for b in &out.branches {
            println!("{:<32} {:>5} points, p in [{:.6}, {:.6}]", b.file, b.points, b.p_min, b.p_max);
        }
        if let Some(c) = &out.preimages {
            println!("preimages: {}", c.count);
            for m in &c.preimages {
                println!("  {:?} a = {:?}", m.piece, m.params);
            }
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct NormalizedOutput<'a> {
    mu: &'a [f64],
    outcome: NormalizedOutcome,
}

pub fn normalized(cfg: &RunConfig, sink: &Sink) -> Result<bool, CliError> {
    let spectrum = cfg.spectrum()?;
    let outcome = normalized_solutions(&spectrum)?;
    let out = NormalizedOutput {
        mu: spectrum.mu(),
        outcome,
    };
    let json = to_json(&out);
    sink.artifact("normalized.json", &json)?;
    if sink.json {
        print!("{json}");
    } else {
        match &out.outcome {
            NormalizedOutcome::Unique(p) => println!("unique solution, a = {:?}", p.a()),
            NormalizedOutcome::Family(_) => {
                println!("two-parameter family: a = (A, +-A, B) with A, B nonzero")
            }
            NormalizedOutcome::None => println!("no solution with unit masses"),
        }
    }
    Ok(true)
}

/// Random strictly ordered instance with gaps of at least 0.05.
fn random_instance(r: &mut ChaCha8Rng, s: &SweepConfig) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let span = s.mu_max - s.mu_min;
    if !(span > 0.05 * s.components as f64 && s.mu_max < 0.0) {
        return Err(CliError::Config(
            "sweep range must be negative and wide enough for the requested components".into(),
        ));
    }
    let mu = loop {
        let mut mu: Vec<f64> = (0..s.components)
            .map(|_| r.gen_range(s.mu_min..s.mu_max))
            .collect();
        mu.sort_by(f64::total_cmp);
        if mu.windows(2).all(|w| w[1] - w[0] >= 0.05) {
            break mu;
        }
    };
    let a = (0..s.components)
        .map(|_| {
            let m = r.gen_range(0.1..5.0);
            if r.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    Ok((mu, a))
}

#[derive(Serialize)]
struct SweepSummary {
    seed: u64,
    components: usize,
    instances: usize,
    failures: usize,
}

pub fn sweep(cfg: &RunConfig, sink: &Sink, seed: u64, threads: Option<usize>) -> Result<bool, CliError> {
    let s = cfg
        .sweep
        .ok_or_else(|| CliError::Config("config is missing \"sweep\"".into()))?;
    if s.components == 0 || s.components > 16 {
        return Err(CliError::Config(format!(
            "sweep components must be in 1..=16, got {}",
            s.components
        )));
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..s.instances)
        .map(|_| random_instance(&mut r, &s))
        .collect::<Result<Vec<_>, _>>()?;
    let run = |(mu, a): &(Vec<f64>, Vec<f64>)| -> Result<Vec<Check>, CliError> {
        let rep = soliton_forge::build_solution(&Spectrum::new(mu.clone())?, &SolitonParams::new(a.clone())?)?;
        let grid = cfg.grid_for(&rep)?;
        run_checks(&rep, &grid, cfg.tol)
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Vec<Check>, CliError>> = pool.install(|| draws.par_iter().map(run).collect());
    let n = s.components;
    let mut header = vec!["index".to_string()];
    header.extend((1..=n).map(|i| format!("mu{i}")));
    header.extend((1..=n).map(|i| format!("a{i}")));
    header.extend(["worst_margin".into(), "pass".into()]);
    let mut csv = Csv::new(&header);
    let mut failures = 0;
    for (k, ((mu, a), res)) in draws.iter().zip(results).enumerate() {
        let checks = res?;
        let pass = checks.iter().all(|c| c.pass);
        failures += usize::from(!pass);
        // Largest |value - expected| / tolerance; below 1 means every check passes.
        let margin = checks
            .iter()
            .map(|c| (c.value - c.expected).abs() / c.tolerance)
            .fold(0.0, f64::max);
        let mut values = mu.clone();
        values.extend(a);
        values.push(margin);
        let mut labels = vec![k.to_string()];
        labels.extend(values.iter().map(|v| crate::output::fmt_f64(*v)));
        labels.push(pass.to_string());
        csv.mixed_row(&labels, &[]);
    }
    let summary = SweepSummary {
        seed,
        components: n,
        instances: s.instances,
        failures,
    };
    let json = to_json(&summary);
    let csv = csv.into_string();
    sink.artifact("sweep.csv", &csv)?;
    sink.artifact("sweep.json", &json)?;
    if sink.json {
        print!("{json}");
    } else {
        print!("{csv}");
        println!("seed {seed}: {failures} of {} instances failed", s.instances);
    }
    Ok(failures == 0)
}
