//! The energy `φ(u) = ½∫|∇u|² − (1/q)∫|u|^q`, its gradient and second
//! variation, and the projections onto the constraint sets.
//!
//! For `1 < q < 2` the constraint is `∫ |u|^{q−2}u = 0`. For `q = 1` it is
//! the bracket `∫ sgn₋(u) ≤ 0 ≤ ∫ sgn₊(u)` with `sgn₊(t) = 1_{t≥0} − 1_{t<0}`
//! and `sgn₋(t) = 1_{t>0} − 1_{t≤0}`.

mod shift;

use crate::diagnostics::w_set_check;
use crate::error::{Error, Result};
use crate::geometry::{dirichlet_energy, edge_form, integrate, laplacian, DomainSpec, Field, Grid};
use crate::scalar::Scalar;

pub use shift::{c_shift, weighted_median_interval};

/// Exponent `q ∈ [1, 2)` bound to a grid.
#[derive(Debug, Clone, Copy)]
pub struct ProblemSpec<'g, T> {
    q: T,
    grid: &'g Grid<T>,
}

impl<'g, T: Scalar> ProblemSpec<'g, T> {
    pub fn new(grid: &'g Grid<T>, q: T) -> Result<Self> {
        if !(q >= T::one() && q < T::lit(2.0)) {
            return Err(Error::QOutOfRange(q.as_f64()));
        }
        Ok(ProblemSpec { q, grid })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn grid(&self) -> &'g Grid<T> {
        self.grid
    }

    /// `q = 1`: nonlinearity `sgn`, constraint set `ℳ`.
    pub fn is_sign_case(&self) -> bool {
        self.q == T::one()
    }

    /// `|t|^{q−2}t`, zero at `t = 0`.
    pub fn nonlinearity(&self, t: T) -> T {
        t.signed_pow(self.q)
    }
}

/// `∫ |u|^q`.
pub fn lq_integral<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<T> {
    let g = spec.grid();
    g.check(u)?;
    let q = spec.q();
    Ok(g.weights()
        .iter()
        .zip(u.iter())
        .map(|(&w, &v)| if spec.is_sign_case() { w * v.abs() } else { w * v.abs().powf(q) })
        .sum())
}

pub fn energy<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<T> {
    let de = dirichlet_energy(spec.grid(), u)?;
    Ok(de / T::lit(2.0) - lq_integral(spec, u)? / spec.q())
}

/// Euclidean gradient of the discrete energy: `(L u)_i − w_i |u_i|^{q−2}u_i`
/// (subgradient with `sgn(0) = 0` when `q = 1`).
pub fn energy_gradient<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<Field<T>> {
    let mut g = laplacian(spec.grid(), u)?;
    for ((gi, &wi), &ui) in g.iter_mut().zip(spec.grid().weights()).zip(u.iter()) {
        *gi = *gi - wi * spec.nonlinearity(ui);
    }
    Ok(g)
}

/// Minimizer of `t ↦ φ(t u)` over `t > 0`: `(∫|u|^q / ∫|∇u|²)^{1/(2−q)}`.
pub fn t_star<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<T> {
    let de = dirichlet_energy(spec.grid(), u)?;
    if !(de > T::zero()) {
        return Err(Error::ZeroGradientField);
    }
    let lq = lq_integral(spec, u)?;
    Ok((lq / de).powf(T::one() / (T::lit(2.0) - spec.q())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintStatus<T> {
    pub member: bool,
    pub residual: T,
}

/// Membership in `𝒩` (`q > 1`) or `ℳ` (`q = 1`).
///
/// For `q > 1` the residual `|Σ w_i |u_i|^{q−2}u_i|` is compared with
/// `1e−8 · Σ w_i |u_i|^{q−1}`; a sign change of the balance within a few
/// ulps of the field also counts. For `q = 1` the sign-count bracket is
/// evaluated directly.
pub fn in_constraint<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> ConstraintStatus<T> {
    let w = spec.grid().weights();
    if spec.is_sign_case() {
        let (mut pos, mut zero, mut neg) = (T::zero(), T::zero(), T::zero());
        for (&wi, &ui) in w.iter().zip(u.iter()) {
            if ui > T::zero() {
                pos = pos + wi;
            } else if ui < T::zero() {
                neg = neg + wi;
            } else {
                zero = zero + wi;
            }
        }
        let sgn_minus = pos - zero - neg;
        let sgn_plus = pos + zero - neg;
        let member = sgn_minus <= T::zero() && sgn_plus >= T::zero();
        let residual = T::zero().max(sgn_minus).max(-sgn_plus);
        ConstraintStatus { member, residual }
    } else {
        let (mut sum, mut scale) = (T::zero(), T::zero());
        for (&wi, &ui) in w.iter().zip(u.iter()) {
            let v = spec.nonlinearity(ui);
            sum = sum + wi * v;
            scale = scale + wi * v.abs();
        }
        let tol = T::lit(1e-8).max(T::epsilon() * T::lit(64.0));
        let member = sum.abs() <= tol * scale || root_at_resolution(spec, u);
        ConstraintStatus { member, residual: sum.abs() }
    }
}

/// The balance changes sign within a few ulps of `max|u|` around `u`.
///
/// Near `q = 1` the balance jumps by about `w_i·ε^{q−1}` when `u_i + c`
/// crosses zero, so no floating shift can meet a small relative residual.
fn root_at_resolution<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> bool {
    let w = spec.grid().weights();
    let delta = T::epsilon() * T::lit(4.0) * u.max_abs().max(T::min_positive_value());
    let balance = |c: T| -> T { w.iter().zip(u.iter()).map(|(&wi, &ui)| wi * spec.nonlinearity(ui + c)).sum() };
    balance(-delta) <= T::zero() && balance(delta) >= T::zero()
}

/// Checks `φ(u) ≥ φ(u + c) − 1e−12` for every sampled `c`; `u` must already
/// lie on the constraint set.
pub fn max_shift_property_check<T: Scalar>(
    spec: &ProblemSpec<'_, T>,
    u: &Field<T>,
    samples: &[T],
) -> Result<bool> {
    if spec.is_sign_case() {
        if !in_constraint(spec, u).member {
            return Err(Error::UnshiftedInput(c_shift(spec, u)?.as_f64()));
        }
    } else {
        let c = c_shift(spec, u)?;
        let scale = u.max_abs().max(T::min_positive_value());
        if c.abs() > T::lit(1e-8) * scale {
            return Err(Error::UnshiftedInput(c.as_f64()));
        }
    }
    let base = energy(spec, u)?;
    let slack = T::lit(1e-12) * T::one().max(base.abs());
    for &c in samples {
        if energy(spec, &u.shifted(c))? > base + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianValue<T> {
    pub value: T,
    /// `false` when `u` has a zero set on which the reconstructed gradient
    /// vanishes; the value is still returned.
    pub u_in_w: bool,
}

/// Second variation `∫∇v·∇w − (q−1)∫|u|^{q−2} v w`, nodes with `u_i = 0`
/// dropped from the second sum.
pub fn hessian_form<T: Scalar>(
    spec: &ProblemSpec<'_, T>,
    u: &Field<T>,
    v: &Field<T>,
    w: &Field<T>,
) -> Result<HessianValue<T>> {
    if spec.is_sign_case() {
        return Err(Error::QOutOfRange(1.0));
    }
    let grid = spec.grid();
    grid.check(u)?;
    let stiff = edge_form(grid, v, w)?;
    let q = spec.q();
    let mass: T = grid
        .weights()
        .iter()
        .zip(u.iter())
        .zip(v.iter().zip(w.iter()))
        .filter(|((_, &ui), _)| ui != T::zero())
        .map(|((&wi, &ui), (&vi, &zi))| wi * ui.abs().powf(q - T::lit(2.0)) * vi * zi)
        .sum();
    let floor = T::lit(1e-8) * u.max_abs();
    let u_in_w = w_set_check(grid, u, T::zero(), floor)?.member || !has_zero_set(grid, u);
    Ok(HessianValue { value: stiff - (q - T::one()) * mass, u_in_w })
}

fn has_zero_set<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> bool {
    (0..grid.len()).any(|i| {
        u[i] == T::zero() || grid.neighbors(i).iter().any(|&j| u[j] * u[i] < T::zero())
    })
}

/// `T_r v (x) = r^{2/(2−q)} v((x − x₀)/r)` on `B_r(x₀)`, zero elsewhere.
///
/// `source` must be a unit-disc grid carrying `v`; values are taken from the
/// source cell containing `(x − x₀)/r`.
pub fn rescale_bump<T: Scalar>(
    spec: &ProblemSpec<'_, T>,
    source: &Grid<T>,
    v: &Field<T>,
    r: T,
    center: [T; 2],
) -> Result<Field<T>> {
    source.check(v)?;
    if !matches!(source.spec(), DomainSpec::Disc { radius } if *radius == 1.0) {
        return Err(Error::WrongDomainKind { expected: "unit disc source" });
    }
    if !(r > T::zero() && r <= T::one()) {
        return Err(Error::ROutOfRange(r.as_f64()));
    }
    let target = spec.grid();
    let slack = T::lit(1e-12);
    let (cx, cy) = (center[0].as_f64(), center[1].as_f64());
    let dist = (cx * cx + cy * cy).sqrt();
    let rf = r.as_f64();
    let contained = match *target.spec() {
        DomainSpec::Disc { radius } => dist + rf <= radius + 1e-12,
        DomainSpec::Annulus { inner, outer } => dist + rf <= outer + 1e-12 && dist - rf >= inner - 1e-12,
        DomainSpec::Rectangle { width, height } => {
            cx.abs() + rf <= 0.5 * width + 1e-12 && cy.abs() + rf <= 0.5 * height + 1e-12
        }
        DomainSpec::Interval { .. } => return Err(Error::WrongDomainKind { expected: "two-dimensional target" }),
    };
    if !contained {
        return Err(Error::BallNotContained);
    }
    let amplitude = r.powf(T::lit(2.0) / (T::lit(2.0) - spec.q()));
    let (nr, nt) = (source.rows(), source.cols());
    let two_pi = T::PI() + T::PI();
    let out = target
        .coords()
        .iter()
        .map(|x| {
            let y0 = (x[0] - center[0]) / r;
            let y1 = (x[1] - center[1]) / r;
            let rho = (y0 * y0 + y1 * y1).sqrt();
            if rho >= T::one() - slack {
                return T::zero();
            }
            let j = (rho * T::from_usize_lossy(nr)).floor().to_usize().unwrap_or(0).min(nr - 1);
            let mut theta = y1.atan2(y0);
            if theta < T::zero() {
                theta = theta + two_pi;
            }
            let k = (theta / two_pi * T::from_usize_lossy(nt)).floor().to_usize().unwrap_or(0) % nt;
            amplitude * v[j * nt + k]
        })
        .collect();
    Ok(Field::new(out))
}

/// `v = |u|^{1/m−1}u` with `m = 1/(q−1)`.
pub fn to_porous_medium<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> Result<Field<T>> {
    if spec.is_sign_case() {
        return Err(Error::QOutOfRange(1.0));
    }
    spec.grid().check(u)?;
    let q = spec.q();
    Ok(u.map(|x| x.signed_pow(q)))
}

/// Inverse of [`to_porous_medium`]: `u = |v|^{m−1}v`.
pub fn from_porous_medium<T: Scalar>(spec: &ProblemSpec<'_, T>, v: &Field<T>) -> Result<Field<T>> {
    if spec.is_sign_case() {
        return Err(Error::QOutOfRange(1.0));
    }
    spec.grid().check(v)?;
    let m = T::one() / (spec.q() - T::one());
    Ok(v.map(|x| x.signed_pow(m + T::one())))
}

/// `∫ f` for the nodal field `f`, re-exported for callers holding a spec.
pub fn integral<T: Scalar>(spec: &ProblemSpec<'_, T>, f: &Field<T>) -> Result<T> {
    integrate(spec.grid(), f)
}
