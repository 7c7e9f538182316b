//! Projected descent for `min φ` over the constraint set, with multistart
//! and continuation in `q`.
//!
//! Each step moves along the Sobolev gradient `d = (L + W)⁻¹ ∇φ(u)`, then
//! re-projects with [`project`]; the step size is chosen by Armijo
//! backtracking on the true energy.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{c_shift, energy, energy_gradient, in_constraint, t_star, ProblemSpec};
use crate::geometry::{dirichlet_energy, Field, Grid, SeparableSolver};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialRecipe {
    /// Smoothed uniform noise drawn from the seed.
    Random,
    /// `u₀(x) = x₁`.
    Dipole,
    /// Caller-supplied field.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub initial_step: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_iterations: usize,
    /// Threshold on `(∇φ · (L + W)⁻¹∇φ)^{1/2}`.
    pub gradient_tol: f64,
    /// Relative energy change that, held for ten iterations, stops the run.
    pub energy_tol: f64,
    pub seed: u64,
    pub starts: usize,
    pub initial: InitialRecipe,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            initial_step: 1.0,
            armijo: 1e-4,
            backtrack: 0.5,
            max_iterations: 4000,
            gradient_tol: 1e-9,
            energy_tol: 1e-11,
            seed: 0,
            starts: 1,
            initial: InitialRecipe::Dipole,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.initial_step > 0.0) {
            return bad("initial_step must be positive");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.gradient_tol > 0.0 && self.energy_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iterations == 0 || self.starts == 0 {
            return bad("max_iterations and starts must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    EnergyStagnation,
    /// Backtracking found no decrease above round-off.
    StepCollapse,
    MaxIterations,
}

/// `𝒩` for `q > 1`, `ℳ` for `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    PowerBalance,
    SignBracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alternate<T> {
    pub start: usize,
    pub energy: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport<T> {
    #[serde(skip)]
    pub field: Field<T>,
    pub q: T,
    pub constraint: ConstraintSet,
    pub energy: T,
    pub constraint_residual: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Energy after the initial projection and after every accepted step.
    pub trace: Vec<T>,
    pub seed: u64,
    /// Index of the start that produced this report (0 is the dipole).
    pub start: usize,
    /// The start field was constant and was replaced by a random one.
    pub reseeded: bool,
    /// Other starts within `1e−6` of this energy.
    pub alternates: Vec<Alternate<T>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// `t*(u + c(u))·(u + c(u))`, or just the shift when the shifted field has
/// no gradient.
pub fn project<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<Field<T>> {
    let shifted = u.shifted(c_shift(spec, u)?);
    if dirichlet_energy(spec.grid(), &shifted)? > T::zero() {
        let t = t_star(spec, &shifted)?;
        let scaled = shifted.scaled(t);
        // Scaling keeps the sign pattern, so membership carries over; the
        // shift of q > 1 is re-centered against the rounding of `t`.
        if in_constraint(spec, &scaled).member {
            return Ok(scaled);
        }
        return Ok(scaled.shifted(c_shift(spec, &scaled)?));
    }
    Ok(shifted)
}

/// `x₁` sampled on the grid.
pub fn dipole<T: Scalar>(grid: &Grid<T>) -> Field<T> {
    grid.sample(|x| x[0])
}

/// Uniform noise smoothed by two applications of `(L + W)⁻¹W`.
pub fn random_start<T: Scalar>(grid: &Grid<T>, seed: u64, stream: u64) -> Field<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let solver = SeparableSolver::new(grid.layout(), T::one());
    let mut v: Vec<T> = (0..grid.len()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    for _ in 0..2 {
        let rhs: Vec<T> = v.iter().zip(grid.weights()).map(|(&a, &w)| a * w).collect();
        v = solver.solve(&rhs);
    }
    Field::new(v)
}

fn constraint_set<T: Scalar>(spec: &ProblemSpec<'_, T>) -> ConstraintSet {
    if spec.is_sign_case() {
        ConstraintSet::SignBracket
    } else {
        ConstraintSet::PowerBalance
    }
}

const STAGNATION_WINDOW: usize = 10;
const MAX_STEP: f64 = 1e3;
const MIN_STEP: f64 = 1e-14;

/// Projected Sobolev-gradient descent from `u0`.
///
/// A constant `u0` is replaced by a random start drawn from `config.seed`.
/// Hitting `max_iterations` is not an error: the report comes back with
/// `converged = false`.
pub fn minimize_energy<T: Scalar>(
    spec: &ProblemSpec<'_, T>,
    config: &SolveConfig,
    u0: &Field<T>,
) -> Result<SolveReport<T>> {
    config.validate()?;
    let grid = spec.grid();
    grid.check(u0)?;
    let clock = Instant::now();
    let solver = SeparableSolver::new(grid.layout(), T::one());
    let reseeded = u0.is_constant();
    let start = if reseeded { random_start(grid, config.seed, u64::MAX) } else { u0.clone() };

    let mut u = project(spec, &start)?;
    let mut phi = energy(spec, &u)?;
    let mut trace = vec![phi];
    let mut eta = T::lit(config.initial_step);
    let sigma = T::lit(config.armijo);
    let beta = T::lit(config.backtrack);
    let etol = T::lit(config.energy_tol);
    let mut quiet = 0;
    let mut iterations = 0;
    let mut gnorm;
    let stop = loop {
        let g = energy_gradient(spec, &u)?;
        let d = Field::new(solver.solve(&g));
        let slope = g.dot(&d).max(T::zero());
        gnorm = slope.sqrt();
        if gnorm <= T::lit(config.gradient_tol) {
            break StopReason::GradientTolerance;
        }
        if iterations >= config.max_iterations {
            break StopReason::MaxIterations;
        }
        let accepted = loop {
            let v = project(spec, &u.axpy(-eta, &d))?;
            let phi_v = energy(spec, &v)?;
            if phi_v <= phi - sigma * eta * slope {
                break Some((v, phi_v));
            }
            eta = eta * beta;
            if eta < T::lit(MIN_STEP) {
                break None;
            }
        };
        let Some((v, phi_v)) = accepted else {
            break StopReason::StepCollapse;
        };
        iterations += 1;
        let change = phi - phi_v;
        u = v;
        phi = phi_v;
        trace.push(phi);
        eta = (eta + eta).min(T::lit(MAX_STEP));
        if change <= etol * phi.abs().max(T::min_positive_value()) {
            quiet += 1;
            if quiet >= STAGNATION_WINDOW {
                break StopReason::EnergyStagnation;
            }
        } else {
            quiet = 0;
        }
    };
    let status = in_constraint(spec, &u);
    Ok(SolveReport {
        field: u,
        q: spec.q(),
        constraint: constraint_set(spec),
        energy: phi,
        constraint_residual: status.residual,
        gradient_norm: gnorm,
        iterations,
        converged: stop != StopReason::MaxIterations,
        stop,
        trace,
        seed: config.seed,
        start: 0,
        reseeded,
        alternates: Vec::new(),
        wall_time: clock.elapsed(),
    })
}

/// Start field number `index`: 0 is the dipole (or the random draw when the
/// dipole is constant on this grid), the rest are random.
pub fn start_field<T: Scalar>(grid: &Grid<T>, seed: u64, index: usize) -> Field<T> {
    if index == 0 {
        dipole(grid)
    } else {
        random_start(grid, seed, index as u64)
    }
}

/// `config.starts` independent runs, always including the dipole; returns
/// the lowest energy (ties go to the lower start index).
pub fn multistart<T: Scalar>(spec: &ProblemSpec<'_, T>, config: &SolveConfig) -> Result<SolveReport<T>> {
    config.validate()?;
    let grid = spec.grid();
    let reports: Vec<SolveReport<T>> = (0..config.starts)
        .into_par_iter()
        .map(|k| {
            let mut r = minimize_energy(spec, config, &start_field(grid, config.seed, k))?;
            r.start = k;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let best_index = (0..reports.len())
        .fold(0, |b, k| if reports[k].energy < reports[b].energy { k } else { b });
    let band = T::lit(1e-6);
    let alternates: Vec<Alternate<T>> = reports
        .iter()
        .filter(|r| r.start != best_index && r.energy <= reports[best_index].energy + band)
        .map(|r| Alternate { start: r.start, energy: r.energy })
        .collect();
    let mut best = reports.into_iter().nth(best_index).expect("at least one start");
    best.alternates = alternates;
    Ok(best)
}

/// Solves for each `q` in turn, warm-starting from the previous minimizer.
pub fn continuation_sweep<T: Scalar>(
    grid: &Grid<T>,
    qs: &[T],
    config: &SolveConfig,
) -> Result<Vec<SolveReport<T>>> {
    if qs.is_empty() {
        return Err(Error::InvalidArgument("empty q list".into()));
    }
    if qs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("q list must be strictly decreasing".into()));
    }
    let mut out: Vec<SolveReport<T>> = Vec::with_capacity(qs.len());
    for &q in qs {
        let spec = ProblemSpec::new(grid, q)?;
        let report = match out.last() {
            None => multistart(&spec, config)?,
            Some(prev) => minimize_energy(&spec, config, &prev.field)?,
        };
        out.push(report);
    }
    Ok(out)
}
