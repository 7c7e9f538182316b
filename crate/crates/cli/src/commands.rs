//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::Args;
use nodal_lab::diagnostics::{nodal_domains, ZeroSetCurve};
use nodal_lab::functional::ProblemSpec;
use nodal_lab::io::{read_field_csv, write_field_csv, write_profile_csv, write_zero_curve_csv};
use nodal_lab::minimize::{continuation_sweep, multistart, SolveReport};
use nodal_lab::radial::{
    check_inequality_chain, closed_form_q1, closed_form_q1_at, h_energy_monotone, liouville_transform,
    m_radial, radial_energy, radial_residual, test_function_bound, ChainReport,
    HMonotone, RadialEnergy,
};
use nodal_lab::{build_grid, DomainSpec, Field64, Grid64, Resolution};
use serde::Serialize;

use crate::config::{ProblemArgs, RunConfig};
use crate::report::{create, diagnose, write_json, Report, ReportHeader};
use crate::Failure;

type Outcome = Result<(), Failure>;

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn numerical(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn numerical(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Numerical(e.into()))
    }
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).usage()
}

fn write_field(dir: &Path, grid: &Grid64, u: &Field64) -> anyhow::Result<()> {
    write_field_csv(create(&dir.join("field.csv"))?, grid, u)?;
    Ok(())
}

fn write_zero_curve(dir: &Path, curve: &ZeroSetCurve<f64>) -> anyhow::Result<()> {
    write_zero_curve_csv(create(&dir.join("zero_set.csv"))?, curve)?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

pub fn solve(args: &SolveArgs) -> Outcome {
    let cfg = args.problem.resolve().usage()?;
    let grid: Grid64 = build_grid(cfg.domain, cfg.resolution).usage()?;
    let spec = ProblemSpec::new(&grid, cfg.q).usage()?;
    prepare_out(&cfg.out)?;
    let clock = Instant::now();
    let report = multistart(&spec, &cfg.solver).numerical()?;
    eprintln!(
        "solve: {} q={} energy={:.10} iterations={} stop={:?} ({:.2?})",
        cfg.domain.name(),
        cfg.q,
        report.energy,
        report.iterations,
        report.stop,
        clock.elapsed()
    );
    write_solve_outputs(&cfg, &grid, &report).numerical()?;
    println!("energy {:.12e}", report.energy);
    if !report.converged {
        return Err(Failure::Numerical(anyhow!("no convergence within {} iterations", cfg.solver.max_iterations)));
    }
    Ok(())
}

fn write_solve_outputs(cfg: &RunConfig, grid: &Grid64, report: &SolveReport<f64>) -> anyhow::Result<()> {
    let dir = &cfg.out;
    write_field(dir, grid, &report.field)?;
    let diag = diagnose(grid, &report.field, cfg.q, cfg.thresholds)?;
    write_zero_curve(dir, &diag.zero_set)?;
    write_json(&dir.join("diagnostics.json"), &diag)?;
    write_json(&dir.join("report.json"), &Report { header: ReportHeader::new("solve", cfg), result: report })
}

#[derive(Debug, Clone, Args)]
pub struct RadialArgs {
    /// Space dimension.
    #[arg(long = "N")]
    pub dim: usize,
    #[arg(long)]
    pub q: f64,
    /// Uniform samples of the profile in (0, 1].
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Neumann tolerance on |u'(1)|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Also dump the q = 1 closed form on a disc grid with this many rings
    /// (requires N = 2).
    #[arg(long)]
    pub disc_nr: Option<usize>,
    #[arg(long, default_value_t = 128)]
    pub disc_ntheta: usize,
    #[arg(long, default_value = "out/radial")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct RadialOutput {
    dim: usize,
    q: f64,
    m_r: f64,
    /// Energy of the shooting profile by radial quadrature.
    quadrature: RadialEnergy,
    u0: f64,
    neumann_defect: f64,
    zeros: Vec<f64>,
    ode_residual: f64,
    liouville_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_sup_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_monotone: Option<HMonotone>,
}

pub fn radial(args: &RadialArgs) -> Outcome {
    if args.dim < 2 {
        return Err(Failure::Usage(anyhow!("N must be at least 2, got {}", args.dim)));
    }
    if !(1.0..2.0).contains(&args.q) {
        return Err(Failure::Usage(anyhow!("q = {} is outside [1, 2)", args.q)));
    }
    if args.disc_nr.is_some() && (args.dim != 2 || args.q != 1.0) {
        return Err(Failure::Usage(anyhow!("--disc-nr needs N = 2 and q = 1")));
    }
    if args.samples < 4 {
        return Err(Failure::Usage(anyhow!("--samples must be at least 4")));
    }
    prepare_out(&args.out)?;
    let profile = nodal_lab::radial::shoot_neumann_sampled(args.q, args.dim, args.tol, args.samples).numerical()?;
    let m_r = m_radial(args.dim, args.q).numerical()?;
    let (sup, hm) = if args.q == 1.0 {
        let exact = closed_form_q1(args.dim, &profile.r).numerical()?;
        let sup = profile.u.iter().zip(&exact.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        write_profile_csv(create(&args.out.join("closed_form.csv")).numerical()?, &exact).numerical()?;
        (Some(sup), Some(h_energy_monotone(&profile).numerical()?))
    } else {
        (None, None)
    };
    let out = RadialOutput {
        dim: args.dim,
        q: args.q,
        m_r,
        quadrature: radial_energy(&profile).numerical()?,
        u0: profile.u[0],
        neumann_defect: profile.neumann_defect(),
        zeros: profile.zeros.clone(),
        ode_residual: radial_residual(&profile).numerical()?,
        liouville_residual: liouville_transform(&profile).numerical()?.residual,
        closed_form_sup_error: sup,
        h_monotone: hm,
    };
    write_profile_csv(create(&args.out.join("profile.csv")).numerical()?, &profile).numerical()?;
    write_json(&args.out.join("radial.json"), &out).numerical()?;
    if let Some(nr) = args.disc_nr {
        let resolution = Resolution::polar(nr, args.disc_ntheta);
        let grid: Grid64 = build_grid(DomainSpec::unit_disc(), resolution).usage()?;
        let u = Field64::new((0..grid.len()).map(|i| closed_form_q1_at(2, grid.radius_of(i)).0).collect());
        write_field(&args.out, &grid, &u).numerical()?;
        let mut cfg = RunConfig::for_domain(DomainSpec::unit_disc());
        cfg.resolution = resolution;
        cfg.out = args.out.clone();
        let nodal = nodal_domains(&grid, &u, 0.0).numerical()?;
        let header = ReportHeader::new("radial", &cfg);
        write_json(&args.out.join("report.json"), &Report { header, result: &serde_json::json!({ "nodal_domains": nodal }) })
            .numerical()?;
    }
    println!("m_r = {:.10}", out.m_r);
    println!("|u'(1)| = {:.3e}", profile.du.last().map_or(0.0, |d| d.abs()));
    if let Some(s) = sup {
        println!("closed-form sup error = {s:.3e}");
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value = "out/bounds")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct BoundsRow {
    dim: usize,
    s: f64,
    test_bound: f64,
    m_r: f64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<ChainReport>,
}

#[derive(Debug, Clone, Serialize)]
struct BoundsOutput {
    rows: Vec<BoundsRow>,
    h3: f64,
    /// `27·h(3) + 4 < 0`, which the chain needs at `N = 3`.
    h3_sufficient: bool,
    /// The stronger `h(3) < −1`; false, reported as is.
    h3_below_minus_one: bool,
    all_hold: bool,
}

pub fn bounds(args: &BoundsArgs) -> Outcome {
    if args.n_min < 2 || args.n_max > 16 || args.n_min > args.n_max {
        return Err(Failure::Usage(anyhow!("N range must lie within [2, 16], got {}..{}", args.n_min, args.n_max)));
    }
    prepare_out(&args.out)?;
    let mut rows = Vec::new();
    for dim in args.n_min..=args.n_max {
        let s = if dim == 2 { 0.0 } else { -1.0 };
        let test_bound = test_function_bound(dim, s).numerical()?;
        let m_r = m_radial(dim, 1.0).numerical()?;
        let chain = if dim >= 3 { Some(check_inequality_chain(dim).numerical()?) } else { None };
        rows.push(BoundsRow { dim, s, test_bound, m_r, holds: test_bound < m_r, chain });
    }
    let h3 = nodal_lab::radial::h_function(3.0);
    let out = BoundsOutput {
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        h3,
        h3_sufficient: 27.0 * h3 + 4.0 < 0.0,
        h3_below_minus_one: h3 < -1.0,
    };
    let mut csv = String::from("N,s,test_bound,m_r,holds\n");
    for r in &out.rows {
        writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{}", r.dim, r.s, r.test_bound, r.m_r, r.holds).expect("string write");
    }
    fs::write(args.out.join("bounds.csv"), csv).context("writing bounds.csv").numerical()?;
    write_json(&args.out.join("bounds.json"), &out).numerical()?;
    for r in &out.rows {
        println!("N={:2}  bound={:+.7}  m_r={:+.7}  {}", r.dim, r.test_bound, r.m_r, if r.holds { "holds" } else { "FAILS" });
    }
    println!("h(3) = {h3:.6}");
    if out.all_hold {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow!("inequality chain fails for some N")))
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Report JSON written by `solve` or `radial --disc-nr`.
    #[arg(long)]
    pub report: PathBuf,
    /// Field dump; defaults to the one named in the report.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Exponent to check against; defaults to the report's.
    #[arg(long)]
    pub q: Option<f64>,
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let text = fs::read_to_string(&args.report).with_context(|| format!("reading {}", args.report.display())).usage()?;
    let header: ReportHeader = serde_json::from_str(&text).context("report JSON").usage()?;
    let cfg = header.config;
    let field_path = match &args.field {
        Some(p) => p.clone(),
        None => args.report.parent().unwrap_or(Path::new(".")).join(&header.field_dump),
    };
    let file = fs::File::open(&field_path).with_context(|| format!("opening {}", field_path.display())).usage()?;
    let dump = read_field_csv(file).context("field dump").usage()?;
    let grid: Grid64 = build_grid(cfg.domain, cfg.resolution).usage()?;
    let matches = dump.coords.len() == grid.len()
        && dump.coords.iter().zip(grid.coords()).all(|(a, b)| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
    if !matches {
        return Err(Failure::Usage(anyhow!("field dump does not match the {} grid in the report", cfg.domain.name())));
    }
    let q = args.q.unwrap_or(cfg.q);
    let diag = diagnose(&grid, &Field64::new(dump.values), q, cfg.thresholds).usage()?;
    println!("{}", serde_json::to_string_pretty(&diag).expect("diagnostics serialize"));
    if diag.passes {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow!("residuals exceed thresholds")))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Strictly decreasing exponents in [1, 2), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow<'a> {
    q: f64,
    report: &'a SolveReport<f64>,
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let mut cfg = args.problem.resolve().usage()?;
    if let Some(list) = &args.q_list {
        cfg.q_list = Some(list.clone());
    }
    let qs = cfg.q_list.clone().unwrap_or_else(|| vec![cfg.q]);
    if qs.is_empty() || qs.iter().any(|q| !(1.0..2.0).contains(q)) || qs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Usage(anyhow!("q list must be strictly decreasing within [1, 2): {qs:?}")));
    }
    let grid: Grid64 = build_grid(cfg.domain, cfg.resolution).usage()?;
    prepare_out(&cfg.out)?;
    let clock = Instant::now();
    let reports = continuation_sweep(&grid, &qs, &cfg.solver).numerical()?;
    let elapsed = clock.elapsed();
    let mut csv = String::from("q,energy,constraint,iterations,converged,gradient_norm\n");
    let mut log = String::new();
    for r in &reports {
        writeln!(
            csv,
            "{:.16e},{:.16e},{},{},{},{:.16e}",
            r.q,
            r.energy,
            serde_json::to_value(r.constraint).expect("enum serializes").as_str().unwrap_or(""),
            r.iterations,
            r.converged,
            r.gradient_norm
        )
        .expect("string write");
    }
    // Cumulative wall time per q; kept out of the deterministic outputs.
    let mut total = 0.0;
    for r in &reports {
        total += r.wall_time.as_secs_f64();
        writeln!(log, "q={} elapsed_s={total:.6}", r.q).expect("string write");
    }
    fs::write(cfg.out.join("sweep.csv"), csv).context("writing sweep.csv").numerical()?;
    fs::write(cfg.out.join("sweep_timing.log"), log).context("writing sweep_timing.log").numerical()?;
    let rows: Vec<SweepRow> = reports.iter().map(|r| SweepRow { q: r.q, report: r }).collect();
    write_json(&cfg.out.join("sweep.json"), &Report { header: ReportHeader::new("sweep", &cfg), result: &rows })
        .numerical()?;
    eprintln!("sweep: {} exponents in {elapsed:.2?}", reports.len());
    for r in &reports {
        println!("q={:.4}  energy={:+.10e}  {:?}", r.q, r.energy, r.constraint);
    }
    if reports.iter().all(|r| r.converged) {
        Ok(())
    } else {
        bail_numerical("a sweep step did not converge")
    }
}

fn bail_numerical(msg: &str) -> Outcome {
    Err(Failure::Numerical(anyhow!("{msg}")))
}
