//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. Exits
//! nonzero when an asserted criterion fails; informational lines never do.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use nodal_lab::diagnostics::{
    foliated_schwarz_check, quantization_floor, zero_measure_curve,
    SymmetryTolerances,
};
use nodal_lab::functional::{
    c_shift, energy, hessian_form, lq_integral, max_shift_property_check, rescale_bump, ProblemSpec,
};
use nodal_lab::geometry::dirichlet_energy;
use nodal_lab::io::read_field_csv;
use nodal_lab::minimize::{multistart, project, random_start, SolveConfig};
use nodal_lab::radial::{closed_form_q1, radial_energy, radial_grid};
use nodal_lab::{build_grid, DomainSpec, Field64, Grid64, Resolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_nodal-lab");

struct Line {
    id: &'static str,
    pass: bool,
    asserted: bool,
    detail: String,
}

#[derive(Default)]
struct Ledger {
    lines: Vec<Line>,
}

impl Ledger {
    fn check(&mut self, id: &'static str, pass: bool, detail: String) {
        println!("criterion {id:<4} {}  {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push(Line { id, pass, asserted: true, detail });
    }

    /// Reported only; a FAIL here does not fail the suite.
    fn note(&mut self, id: &'static str, pass: bool, detail: String) {
        println!("criterion {id:<4} {}  {detail} [informational]", if pass { "PASS" } else { "FAIL" });
        self.lines.push(Line { id, pass, asserted: false, detail });
    }
}

fn run(args: &[&str]) -> (Output, Duration) {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> (Output, Duration) {
    let clock = Instant::now();
    let out = Command::new(BIN).args(args).envs(env.iter().copied()).output().expect("spawn nodal-lab");
    (out, clock.elapsed())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("read json")).expect("parse json")
}

fn read_field(path: &Path) -> Field64 {
    Field64::new(read_field_csv(std::fs::File::open(path).expect("open field")).expect("parse field").values)
}

fn disc(nr: usize, nt: usize) -> Grid64 {
    build_grid(DomainSpec::unit_disc(), Resolution::polar(nr, nt)).unwrap()
}

fn interval(n: usize) -> Grid64 {
    build_grid(DomainSpec::unit_interval(), Resolution::interval(n)).unwrap()
}

/// `−π(−1/16 + ln2/8)`.
fn m_r_disc() -> f64 {
    -PI * (-1.0 / 16.0 + LN_2 / 8.0)
}

fn radial_closed_form(l: &mut Ledger, tmp: &Path) {
    let dir = tmp.join("radial-2");
    let (out, elapsed) = run(&["radial", "--N", "2", "--q", "1", "--out", dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let json = read_json(&dir.join("radial.json"));
    let m_r = json["m_r"].as_f64().unwrap();
    let sup = json["closed_form_sup_error"].as_f64().unwrap();
    let pass = out.status.success()
        && (m_r - m_r_disc()).abs() <= 1e-12
        && stdout.contains("m_r = -0.07584872")
        && sup <= 1e-6
        && elapsed < Duration::from_secs(1);
    l.check("1", pass, format!("m_r = {m_r:.10} (closed form {:.10}), sup error {sup:.2e}, {elapsed:.2?}", m_r_disc()));
}

fn energy_identity(l: &mut Ledger) {
    let p = closed_form_q1(2, &radial_grid(1000)).unwrap();
    let e = radial_energy(&p).unwrap();
    let target = 2.0 * PI * (-1.0 / 16.0 + LN_2 / 8.0);
    let rd = (e.dirichlet - target).abs() / target;
    let rl = (e.lq - target).abs() / target;
    l.check("2", rd <= 1e-6 && rl <= 1e-6, format!("∫|∇u|² rel err {rd:.2e}, ∫|u| rel err {rl:.2e}"));
}

fn inequality_chain(l: &mut Ledger, tmp: &Path) {
    let dir = tmp.join("bounds");
    let (out, elapsed) = run(&["bounds", "--n-min", "2", "--n-max", "10", "--out", dir.to_str().unwrap()]);
    let json = read_json(&dir.join("bounds.json"));
    let rows = json["rows"].as_array().unwrap();
    let row = |n: u64| rows.iter().find(|r| r["dim"].as_u64() == Some(n)).unwrap();
    let all_hold = rows.iter().all(|r| r["holds"].as_bool() == Some(true));
    let n2 = (row(2)["test_bound"].as_f64().unwrap() + PI / 18.0).abs() <= 1e-12
        && (row(2)["m_r"].as_f64().unwrap() - m_r_disc()).abs() <= 1e-12;
    let n3 = (row(3)["test_bound"].as_f64().unwrap() + PI / 27.0).abs() <= 1e-12;
    let h3 = json["h3"].as_f64().unwrap();
    let h3_exact = (5.0 * 2f64.cbrt() - 7.0) / 3.0;
    let chains = rows
        .iter()
        .filter_map(|r| r.get("chain").and_then(|c| c["sufficient"].as_bool()))
        .all(|s| s);
    let pass = out.status.success()
        && all_hold
        && n2
        && n3
        && (h3 - h3_exact).abs() <= 1e-12
        && json["h3_sufficient"].as_bool() == Some(true)
        && chains
        && elapsed < Duration::from_secs(1);
    l.check(
        "3",
        pass,
        format!("N=2..10 all hold, h(3) = {h3:.6}, 27h(3)+4 < 0, N³h(N)+4N−8 < 0 for N=3..10, {elapsed:.2?}"),
    );
    l.note("3*", h3 < -1.0, format!("literal h(3) < −1 is false: h(3) = {h3:.6}"));
}

/// `sgn(x)(|x| − x²/2)` on `(−1, 1)`.
fn interval_oracle(x: f64) -> f64 {
    x.signum() * (x.abs() - 0.5 * x * x)
}

/// Composite Simpson energy of the oracle, independent of the grid code.
fn oracle_energy() -> f64 {
    let n = 20_000;
    let h = 2.0 / n as f64;
    let f = |x: f64| {
        let du = 1.0 - x.abs();
        0.5 * du * du - interval_oracle(x).abs()
    };
    // The kink at 0 sits on a node.
    let mut s = f(-1.0) + f(1.0);
    for i in 1..n {
        s += f(-1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

struct Minimizer {
    name: &'static str,
    grid: Grid64,
    field: Field64,
    converged: bool,
}

fn interval_ground_truth(l: &mut Ledger) -> Minimizer {
    let g = interval(2048);
    let spec = ProblemSpec::new(&g, 1.0).unwrap();
    let config = SolveConfig { starts: 8, ..SolveConfig::default() };
    let clock = Instant::now();
    let r = multistart(&spec, &config).unwrap();
    let elapsed = clock.elapsed();
    let sup = |s: f64| (0..g.len()).map(|i| (r.field[i] - s * interval_oracle(g.coords()[i][0])).abs()).fold(0.0, f64::max);
    let err = sup(1.0).min(sup(-1.0));
    let oracle = oracle_energy();
    let pass = (r.energy + 1.0 / 3.0).abs() <= 1e-3
        && (oracle + 1.0 / 3.0).abs() <= 1e-8
        && err <= 1e-2
        && elapsed < Duration::from_secs(30);
    l.check(
        "4",
        pass,
        format!("energy {:.9} (oracle {oracle:.9}), sup error {err:.2e}, {elapsed:.2?}", r.energy),
    );
    Minimizer { name: "interval q=1", grid: g, field: r.field, converged: r.converged }
}

fn disc_nonradial(l: &mut Ledger, tmp: &Path) -> Minimizer {
    let dir = tmp.join("disc-q1");
    let args = ["solve", "--domain", "disc", "--q", "1", "--nr", "64", "--ntheta", "128", "--starts", "8"];
    let (out, elapsed) = run(&[&args[..], &["--out", dir.to_str().unwrap()]].concat());
    let report = read_json(&dir.join("report.json"));
    let diag = read_json(&dir.join("diagnostics.json"));
    let energy = report["result"]["energy"].as_f64().unwrap();
    let radiality = diag["radiality_deviation"].as_f64().unwrap();
    let nodal = diag["nodal_domains"].as_u64().unwrap();
    let pass = out.status.success()
        && energy <= -PI / 18.0 + 1e-3
        && energy < m_r_disc()
        && radiality >= 0.5
        && nodal == 2
        && elapsed < Duration::from_secs(300);
    l.check(
        "5",
        pass,
        format!("energy {energy:.6} (−π/18 = {:.6}), radiality {radiality:.3}, {nodal} nodal domains, {elapsed:.2?}", -PI / 18.0),
    );
    Minimizer {
        name: "disc q=1",
        grid: disc(64, 128),
        field: read_field(&dir.join("field.csv")),
        converged: report["result"]["converged"].as_bool() == Some(true),
    }
}

fn foliated_schwarz(l: &mut Ledger) -> Minimizer {
    let g = disc(64, 128);
    let spec = ProblemSpec::new(&g, 1.5).unwrap();
    let config = SolveConfig { starts: 4, ..SolveConfig::default() };
    let clock = Instant::now();
    let r = multistart(&spec, &config).unwrap();
    let elapsed = clock.elapsed();
    let detail;
    let pass = match foliated_schwarz_check(&g, &r.field, SymmetryTolerances::default()) {
        Ok(s) => {
            detail = format!(
                "monotonicity {:.2e}, polarization {:.2e}, {elapsed:.2?}",
                s.monotonicity_violation, s.polarization_defect
            );
            s.monotonicity_violation <= 5e-3 && s.polarization_defect <= 5e-3
        }
        Err(e) => {
            detail = format!("{e}");
            false
        }
    };
    l.check("6", pass, detail);
    Minimizer { name: "disc q=1.5", grid: g, field: r.field, converged: r.converged }
}

/// Sum of compact bumps supported in `|x| < 0.85`.
fn random_bumps(g: &Grid64, rng: &mut ChaCha8Rng) -> Field64 {
    let bumps: Vec<([f64; 2], f64, f64)> = (0..rng.gen_range(1..4))
        .map(|_| {
            let rho = rng.gen_range(0.2..0.45);
            let reach = 0.85 - rho;
            let (a, t) = (rng.gen_range(0.0..reach), rng.gen_range(0.0..2.0 * PI));
            ([a * t.cos(), a * t.sin()], rho, rng.gen_range(-2.0..2.0))
        })
        .collect();
    g.sample(|x| {
        bumps
            .iter()
            .map(|(c, rho, amp)| {
                let d2 = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (rho * rho);
                amp * (1.0 - d2).max(0.0).powi(2)
            })
            .sum()
    })
}

fn scaling_law(l: &mut Ledger) {
    let (nr, nt) = (32, 64);
    let source = disc(nr, nt);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fields: Vec<Field64> = (0..20).map(|_| random_bumps(&source, &mut rng)).collect();
    let mut worst = 0.0f64;
    for r in [0.25, 0.5] {
        // Target rings line up with the scaled source rings.
        let target = disc((nr as f64 / r) as usize, nt);
        for q in [1.0, 1.5] {
            let s1 = ProblemSpec::new(&source, q).unwrap();
            let sr = ProblemSpec::new(&target, q).unwrap();
            let exponent = 2.0 + 2.0 * q / (2.0 - q);
            for v in &fields {
                let tv = rescale_bump(&sr, &source, v, r, [0.0, 0.0]).unwrap();
                let phi1 = energy(&s1, v).unwrap();
                let phir = energy(&sr, &tv).unwrap();
                worst = worst.max((phir - r.powf(exponent) * phi1).abs() / phi1.abs());
            }
        }
    }
    l.check("7", worst <= 0.01, format!("max relative deviation {worst:.2e} over 80 cases"));
}

fn projection_contracts(l: &mut Ledger) {
    let g = disc(32, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_residual = 0.0f64;
    let mut shift_ok = true;
    for q in [1.25, 1.5, 1.75] {
        let spec = ProblemSpec::new(&g, q).unwrap();
        for k in 0..100 {
            let base = random_start(&g, 100 + k, 0);
            let u = base.scaled(1.0 / base.max_abs()).shifted(rng.gen_range(-0.5..0.5));
            let c = c_shift(&spec, &u).unwrap();
            let shifted = u.shifted(c);
            let res: f64 = g.weights().iter().zip(shifted.iter()).map(|(w, &x)| w * spec.nonlinearity(x)).sum();
            worst_residual = worst_residual.max(res.abs());
            let p = project(&spec, &u).unwrap();
            let m = p.max_abs();
            let samples: Vec<f64> = (-20..=20).map(|i| i as f64 / 20.0 * m).collect();
            shift_ok &= max_shift_property_check(&spec, &p, &samples).unwrap_or(false);
        }
    }
    let spec = ProblemSpec::new(&g, 1.0).unwrap();
    let mut monotone = 0;
    for k in 0..100 {
        let u = random_start(&g, 300 + k, 0);
        let u = u.scaled(1.0 / u.max_abs());
        let v = Field64::new(u.iter().map(|&x| x + rng.gen_range(0.0..0.3)).collect());
        if c_shift(&spec, &u).unwrap() >= c_shift(&spec, &v).unwrap() {
            monotone += 1;
        }
    }
    l.check(
        "8",
        worst_residual <= 1e-10 && shift_ok && monotone == 100,
        format!("max c_shift residual {worst_residual:.2e}, shift property {shift_ok}, q=1 monotone {monotone}/100"),
    );
}

fn hessian_fidelity(l: &mut Ledger) {
    let g = disc(32, 64);
    let spec = ProblemSpec::new(&g, 1.5).unwrap();
    let noise = random_start(&g, 11, 0);
    let noise = noise.scaled(1.0 / noise.max_abs());
    let positive = noise.map(|x| 1.5 + 0.5 * x);
    let signed = Field64::new((0..g.len()).map(|i| g.coords()[i][0].signum() * (0.6 + 0.4 * noise[i].abs())).collect());
    let mut worst = 0.0f64;
    for (u, seed0) in [(&positive, 20), (&signed, 40)] {
        for k in 0..10 {
            let v = random_start(&g, seed0 + k, 0);
            let v = v.scaled(1.0 / v.max_abs());
            let eps = 1e-3;
            let fd = (energy(&spec, &u.axpy(eps, &v)).unwrap() - 2.0 * energy(&spec, u).unwrap()
                + energy(&spec, &u.axpy(-eps, &v)).unwrap())
                / (eps * eps);
            let h = hessian_form(&spec, u, &v, &v).unwrap().value;
            worst = worst.max((h - fd).abs() / h.abs());
        }
    }
    l.check("9", worst <= 1e-4, format!("max relative error {worst:.2e} over 20 directions"));
}

fn unique_continuation(l: &mut Ledger, minimizers: &[Minimizer]) {
    let mut all = true;
    let mut parts = Vec::new();
    for m in minimizers {
        let u = &m.field;
        let floor = quantization_floor(u);
        let mut deltas: Vec<f64> = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1].iter().map(|f| f * u.max_abs()).collect();
        deltas.push(floor);
        deltas.sort_by(f64::total_cmp);
        let curve = zero_measure_curve(&m.grid, u, &deltas).unwrap();
        let cells = 2.0 * m.grid.max_cell_weight();
        let at_floor = curve.points.iter().find(|p| p.delta == floor).unwrap().measure;
        // Above two cells the measure must keep falling as δ shrinks.
        let plateau = curve.points.windows(2).any(|w| w[0].delta >= floor && w[0].measure > cells && w[0].measure >= w[1].measure);
        let ok = m.converged && at_floor <= cells && curve.kappa.is_finite() && curve.kappa > 0.0 && !plateau;
        all &= ok;
        parts.push(format!("{}: floor measure {at_floor:.1e}, κ̂ {:.3}", m.name, curve.kappa));
    }
    l.check("10", all, parts.join("; "));
}

fn coercivity(l: &mut Ledger) {
    let g = interval(2048);
    let mu2 = (PI / 2.0).powi(2);
    let omega: f64 = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for q in [1.0, 1.25, 1.5, 1.75] {
        let spec = ProblemSpec::new(&g, q).unwrap();
        for k in 0..100 {
            let u = if k == 0 {
                g.sample(|x| (PI * x[0] / 2.0).sin())
            } else {
                let a = rng.gen_range(-1.0..1.0);
                let mode = rng.gen_range(1..6) as f64;
                let smooth = random_start(&g, 500 + k, 0);
                let s = smooth.scaled(rng.gen_range(0.1..2.0) / smooth.max_abs());
                let rough = Field64::new((0..g.len()).map(|_| rng.gen_range(-0.05..0.05)).collect());
                g.sample(|x| a * (mode * PI * x[0] / 2.0).sin()).axpy(1.0, &s).axpy(1.0, &rough)
            };
            let u = u.shifted(c_shift(&spec, &u).unwrap());
            let lq = lq_integral(&spec, &u).unwrap().powf(2.0 / q);
            let rhs = omega.powf(2.0 - q) / mu2 * dirichlet_energy(&g, &u).unwrap();
            // Ratio minus one; must stay below the slack.
            worst = worst.max(lq / rhs - 1.0);
            count += 1;
        }
    }
    l.check("11", worst <= 1e-6, format!("max ‖u‖_q²/bound − 1 = {worst:.3e} over {count} fields"));
}

fn determinism(l: &mut Ledger, tmp: &Path) {
    let runs: [&[&str]; 4] = [
        &["solve", "--domain", "disc", "--nr", "16", "--ntheta", "32", "--q", "1.5", "--starts", "3", "--seed", "7"],
        &["sweep", "--domain", "interval", "--n", "256", "--q-list", "1.9,1.5,1.0", "--starts", "2", "--seed", "3"],
        &["radial", "--N", "3", "--q", "1.5"],
        &["bounds", "--n-min", "2", "--n-max", "6"],
    ];
    let mut compared = 0;
    let mut identical = true;
    for (k, args) in runs.iter().enumerate() {
        let dirs: Vec<_> = (0..2).map(|rep| tmp.join(format!("det-{k}-{rep}"))).collect();
        for (rep, dir) in dirs.iter().enumerate() {
            // The second run uses a different thread count.
            let threads = if rep == 0 { "1" } else { "3" };
            let (out, _) = run_env(&[*args, &["--out", dir.to_str().unwrap()]].concat(), &[("NODAL_LAB_THREADS", threads)]);
            identical &= out.status.success();
        }
        let mut names: Vec<_> = std::fs::read_dir(&dirs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .filter(|n| n.to_str().is_some_and(|s| s.ends_with(".csv") || s.ends_with(".json")))
            .collect();
        names.sort();
        for name in names {
            let a = std::fs::read(dirs[0].join(&name)).unwrap();
            let b = std::fs::read(dirs[1].join(&name)).unwrap_or_default();
            // Reports embed the output directory, which differs by design.
            let strip = |bytes: Vec<u8>, dir: &Path| String::from_utf8(bytes).unwrap().replace(dir.to_str().unwrap(), "<out>");
            identical &= strip(a, &dirs[0]) == strip(b, &dirs[1]);
            compared += 1;
        }
    }
    l.check("12", identical && compared > 0, format!("{compared} CSV/JSON files byte-identical across repeated runs"));
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut l = Ledger::default();
    radial_closed_form(&mut l, tmp.path());
    energy_identity(&mut l);
    inequality_chain(&mut l, tmp.path());
    let mut minimizers = vec![interval_ground_truth(&mut l)];
    minimizers.push(disc_nonradial(&mut l, tmp.path()));
    minimizers.push(foliated_schwarz(&mut l));
    scaling_law(&mut l);
    projection_contracts(&mut l);
    hessian_fidelity(&mut l);
    unique_continuation(&mut l, &minimizers);
    coercivity(&mut l);
    determinism(&mut l, tmp.path());

    let failed: Vec<&Line> = l.lines.iter().filter(|x| x.asserted && !x.pass).collect();
    let informational = l.lines.iter().filter(|x| !x.asserted && !x.pass).count();
    println!(
        "acceptance: {} of {} asserted criteria pass, {informational} informational FAIL",
        l.lines.iter().filter(|x| x.asserted && x.pass).count(),
        l.lines.iter().filter(|x| x.asserted).count()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for x in failed {
            eprintln!("failed: criterion {} ({})", x.id, x.detail);
        }
        ExitCode::FAILURE
    }
}
