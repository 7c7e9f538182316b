//! Radial solutions of `u'' + (N−1)/r u' + |u|^{q−2}u = 0` on `(0, 1)` with
//! `u'(0) = u'(1) = 0`: shooting, the closed forms for `q = 1`, their
//! energies, and the comparison with the test functions `x₁|x|^s`.
//!
//! Radial integrals use the measure `N ω_N r^{N−1} dr`, `ω_N` the volume
//! of the unit ball, so that `N = 2` values match disc-grid energies.

mod ode;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use ode::R_MIN;

/// Default number of uniform output samples in `(0, 1]`.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub q: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Radii where `u` changes sign.
    pub zeros: Vec<f64>,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `max |u' |` over the two end samples.
    pub fn neumann_defect(&self) -> f64 {
        match (self.du.first(), self.du.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0.0,
        }
    }

    pub fn negated(&self) -> RadialProfile {
        RadialProfile {
            u: self.u.iter().map(|v| -v).collect(),
            du: self.du.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    /// Linear interpolation of `u` at `r` (clamped to the sampled range).
    pub fn value_at(&self, r: f64) -> f64 {
        let k = self.r.partition_point(|&x| x < r);
        if k == 0 {
            return self.u[0];
        }
        if k >= self.r.len() {
            return *self.u.last().expect("nonempty profile");
        }
        let t = (r - self.r[k - 1]) / (self.r[k] - self.r[k - 1]);
        self.u[k - 1] + t * (self.u[k] - self.u[k - 1])
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

fn check_q(q: f64) -> Result<()> {
    if (1.0..2.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::QOutOfRange(q))
    }
}

/// Volume of the unit ball in `ℝ^N`.
pub fn ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        n => 2.0 * std::f64::consts::PI / n as f64 * ball_volume(n - 2),
    }
}

/// `R_MIN` followed by `i / samples`, `i = 1..=samples`.
pub fn radial_grid(samples: usize) -> Vec<f64> {
    std::iter::once(R_MIN).chain((1..=samples).map(|i| i as f64 / samples as f64)).collect()
}

/// Integrates from `u(0) = u0`, `u'(0) = 0` with relative tolerance `tol`.
pub fn shoot(q: f64, dim: usize, u0: f64, tol: f64) -> Result<RadialProfile> {
    shoot_sampled(q, dim, u0, tol, DEFAULT_SAMPLES)
}

pub fn shoot_sampled(q: f64, dim: usize, u0: f64, tol: f64, samples: usize) -> Result<RadialProfile> {
    check_q(q)?;
    check_dim(dim, 2)?;
    if u0 == 0.0 || !u0.is_finite() {
        return Err(Error::InvalidArgument(format!("initial value {u0}")));
    }
    if samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: samples });
    }
    let t = ode::integrate(q, dim, u0, tol, samples)?;
    Ok(RadialProfile { dim, q, r: t.r, u: t.u, du: t.du, zeros: t.zeros })
}

/// Positive `u0 ∈ [1e−4, 10]` whose profile has one sign change and
/// `|u'(1)| ≤ tol`, by bisection.
pub fn shoot_neumann(q: f64, dim: usize, tol: f64) -> Result<RadialProfile> {
    shoot_neumann_sampled(q, dim, tol, DEFAULT_SAMPLES)
}

pub fn shoot_neumann_sampled(q: f64, dim: usize, tol: f64, samples: usize) -> Result<RadialProfile> {
    // Too large: the profile has not yet turned back by r = 1.
    let too_large = |p: &RadialProfile| {
        let end = *p.du.last().expect("nonempty profile");
        p.zeros.is_empty() || (p.zeros.len() == 1 && end < 0.0)
    };
    let ode_tol = (tol * 1e-4).max(1e-13);
    let (mut lo, mut hi) = (1e-4, 10.0);
    let p_lo = shoot_sampled(q, dim, lo, ode_tol, samples)?;
    let p_hi = shoot_sampled(q, dim, hi, ode_tol, samples)?;
    if too_large(&p_lo) || !too_large(&p_hi) {
        return Err(Error::NoSignChange);
    }
    let mut best = p_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = shoot_sampled(q, dim, mid, ode_tol, samples)?;
        let done = p.zeros.len() == 1 && p.du.last().is_some_and(|d| d.abs() <= tol);
        if too_large(&p) {
            hi = mid;
        } else {
            lo = mid;
        }
        best = p;
        if done {
            return Ok(best);
        }
    }
    let end = best.du.last().copied().unwrap_or(f64::NAN);
    if best.zeros.len() == 1 && end.abs() <= tol {
        Ok(best)
    } else {
        Err(Error::ToleranceNotMet(format!("|u'(1)| = {:e} after bisection", end.abs())))
    }
}

/// Nodal radius of the `q = 1` solution: `1/√2` for `N = 2`, `2^{−1/N}` otherwise.
pub fn nodal_radius(dim: usize) -> f64 {
    if dim == 2 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        2f64.powf(-1.0 / dim as f64)
    }
}

/// `(u, u')` of the `q = 1` solution at `r`.
pub fn closed_form_q1_at(dim: usize, r: f64) -> (f64, f64) {
    let n = dim as f64;
    let a = nodal_radius(dim);
    if dim == 2 {
        if r <= a {
            (-0.25 * r * r + 0.125, -0.5 * r)
        } else {
            (-0.5 * r.ln() + 0.25 * r * r - 0.125 - 0.25 * 2f64.ln(), -0.5 / r + 0.5 * r)
        }
    } else if r <= a {
        ((a * a - r * r) / (2.0 * n), -r / n)
    } else {
        let c = 2f64.powf(-2.0 / n) * (n + 2.0) / (n - 2.0);
        (
            (2.0 / (n - 2.0) * r.powf(2.0 - n) + r * r - c) / (2.0 * n),
            (r - r.powf(1.0 - n)) / n,
        )
    }
}

/// The `q = 1` solution with `u(0) > 0` sampled at `r`.
pub fn closed_form_q1(dim: usize, r: &[f64]) -> Result<RadialProfile> {
    check_dim(dim, 2)?;
    let (u, du) = r.iter().map(|&x| closed_form_q1_at(dim, x)).unzip();
    Ok(RadialProfile { dim, q: 1.0, r: r.to_vec(), u, du, zeros: vec![nodal_radius(dim)] })
}

/// `max |u'' + (N−1)/r u' + |u|^{q−2}u|` over interior samples, derivatives
/// by finite differences on the five nearest samples (centered where the
/// grid allows). Stencils touching a sign change are skipped.
pub fn radial_residual(p: &RadialProfile) -> Result<f64> {
    if p.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: p.len() });
    }
    let nn = (p.dim - 1) as f64;
    let mut worst = 0.0f64;
    for i in 1..p.len() - 1 {
        let Some((d1, d2)) = derivatives(&p.r, &p.u, i) else { continue };
        let res = d2 + nn / p.r[i] * d1 + p.u[i].signed_pow(p.q);
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// First and second derivative of `u` at `x[i]`, or `None` when the
/// stencil meets a zero of `u`.
fn derivatives(x: &[f64], u: &[f64], i: usize) -> Option<(f64, f64)> {
    let width = 5.min(x.len());
    let start = i.saturating_sub(width / 2).min(x.len() - width);
    let window = start..start + width;
    let vals = &u[window.clone()];
    let pos = vals.iter().any(|&v| v > 0.0);
    let neg = vals.iter().any(|&v| v < 0.0);
    if (pos && neg) || vals.contains(&0.0) {
        return None;
    }
    let w = fornberg(x[i], &x[window], 2);
    let d1 = w[1].iter().zip(vals).map(|(a, b)| a * b).sum();
    let d2 = w[2].iter().zip(vals).map(|(a, b)| a * b).sum();
    Some((d1, d2))
}

/// Finite-difference weights for derivatives `0..=order` at `z` on nodes `x`.
fn fornberg(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleProfile {
    /// Increasing, starting at `t = 1`.
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    /// `max |ÿ + p(t)|y|^{q−2}y|` by finite differences in `t`.
    pub residual: f64,
}

/// `t = r^{2−N}` (`N ≥ 3`) or `t = 1 − ln r` (`N = 2`), `y(t) = u(r)`.
pub fn liouville_transform(p: &RadialProfile) -> Result<LiouvilleProfile> {
    check_dim(p.dim, 2)?;
    let n = p.dim as f64;
    let map = |r: f64| -> (f64, f64) {
        if p.dim == 2 {
            let t = 1.0 - r.ln();
            (t, (-2.0 * (t - 1.0)).exp())
        } else {
            let t = r.powf(2.0 - n);
            (t, t.powf(-2.0 * (n - 1.0) / (n - 2.0)) / ((n - 2.0) * (n - 2.0)))
        }
    };
    let mut t = Vec::with_capacity(p.len());
    let mut coeff = Vec::with_capacity(p.len());
    let mut y = Vec::with_capacity(p.len());
    for i in (0..p.len()).rev() {
        let (ti, pi) = map(p.r[i]);
        t.push(ti);
        coeff.push(pi);
        y.push(p.u[i]);
    }
    let mut residual = 0.0f64;
    for i in 1..t.len().saturating_sub(1) {
        if let Some((_, d2)) = derivatives(&t, &y, i) {
            residual = residual.max((d2 + coeff[i] * y[i].signed_pow(p.q)).abs());
        }
    }
    Ok(LiouvilleProfile { t, y, p: coeff, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialEnergy {
    /// `∫ |∇u|²`.
    pub dirichlet: f64,
    /// `∫ |u|^q`.
    pub lq: f64,
    /// `½∫|∇u|² − (1/q)∫|u|^q`.
    pub energy: f64,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS5.iter().map(|&(x, w)| w * f(m + h * x)).sum::<f64>() * h
}

/// Energy integrals of a sampled profile: cubic Hermite interpolation of
/// `(u, u')` on each sample interval, split at sign changes, five-point
/// Gauss–Legendre on the pieces.
pub fn radial_energy(p: &RadialProfile) -> Result<RadialEnergy> {
    if p.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: p.len() });
    }
    let n = p.dim as f64;
    let measure = n * ball_volume(p.dim);
    let jac = |r: f64| measure * r.powf(n - 1.0);
    let (mut de, mut lq) = (0.0, 0.0);
    for i in 0..p.len() - 1 {
        let (r0, r1) = (p.r[i], p.r[i + 1]);
        let h = r1 - r0;
        let (u0, u1, m0, m1) = (p.u[i], p.u[i + 1], p.du[i] * h, p.du[i + 1] * h);
        let value = |r: f64| {
            let s = (r - r0) / h;
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * u0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * u1 + (s3 - s2) * m1
        };
        let slope = |r: f64| {
            let s = (r - r0) / h;
            let s2 = s * s;
            ((6.0 * s2 - 6.0 * s) * u0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * u1 + (3.0 * s2 - 2.0 * s) * m1) / h
        };
        let mut cuts = vec![r0];
        if u0 * u1 < 0.0 {
            let (mut a, mut b) = (r0, r1);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if value(m) * u0 > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            cuts.push(0.5 * (a + b));
        }
        cuts.push(r1);
        for w in cuts.windows(2) {
            de += gauss(w[0], w[1], |r| slope(r).powi(2) * jac(r));
            lq += gauss(w[0], w[1], |r| value(r).abs().powf(p.q) * jac(r));
        }
    }
    Ok(RadialEnergy { dirichlet: de, lq, energy: 0.5 * de - lq / p.q })
}

/// `m_r` from the closed forms when `q = 1`; otherwise the energy of the
/// shooting solution with one sign change.
pub fn m_radial(dim: usize, q: f64) -> Result<f64> {
    check_dim(dim, 2)?;
    check_q(q)?;
    if q == 1.0 {
        return Ok(m_radial_q1(dim));
    }
    let p = shoot_neumann(q, dim, 1e-8)?;
    Ok(radial_energy(&p)?.energy)
}

fn m_radial_q1(dim: usize) -> f64 {
    if dim == 2 {
        -std::f64::consts::PI * (-1.0 / 16.0 + 2f64.ln() / 8.0)
    } else {
        let n = dim as f64;
        let b = 2f64.powf(-2.0 / n);
        -(ball_volume(dim) / 2.0) * ((b - 1.0) * n + 2.0 * b) / ((n - 2.0) * (n + 2.0))
    }
}

/// Energy of the `q = 1` closed form by Gauss–Legendre on the exact
/// functions, panels split at the nodal radius.
pub fn closed_form_energy(dim: usize) -> Result<RadialEnergy> {
    check_dim(dim, 2)?;
    let n = dim as f64;
    let measure = n * ball_volume(dim);
    let a = nodal_radius(dim);
    let (mut de, mut lq) = (0.0, 0.0);
    let panels = 400;
    for (lo, hi) in [(0.0, a), (a, 1.0)] {
        for k in 0..panels {
            let x0 = lo + (hi - lo) * k as f64 / panels as f64;
            let x1 = lo + (hi - lo) * (k + 1) as f64 / panels as f64;
            de += gauss(x0, x1, |r| closed_form_q1_at(dim, r).1.powi(2) * measure * r.powf(n - 1.0));
            lq += gauss(x0, x1, |r| closed_form_q1_at(dim, r).0.abs() * measure * r.powf(n - 1.0));
        }
    }
    Ok(RadialEnergy { dirichlet: de, lq, energy: 0.5 * de - lq })
}

/// `−ω_N(N + 2s) / (2(N + s² + 2s)(N + s + 1)²)`, an upper bound for the
/// least energy attained by `x₁|x|^s`.
pub fn test_function_bound(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim, 1)?;
    let n = dim as f64;
    if !(s > -n / 2.0) {
        return Err(Error::SOutOfRange(s));
    }
    Ok(-ball_volume(dim) * (n + 2.0 * s) / (2.0 * (n + s * s + 2.0 * s) * (n + s + 1.0).powi(2)))
}

/// `h(t) = (2^{−2/t} − 1)t + 2^{−2/t} + (2/t)(1 − 2^{−2/t})`.
pub fn h_function(t: f64) -> f64 {
    let b = 2f64.powf(-2.0 / t);
    (b - 1.0) * t + b + 2.0 / t * (1.0 - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub dim: usize,
    /// `test_function_bound(N, −1) = −ω_N(N−2)/(2N²(N−1))`.
    pub upper: f64,
    pub m_r: f64,
    /// `upper < m_r`.
    pub holds: bool,
    /// `h(3) = (5·2^{1/3} − 7)/3`.
    pub h3: f64,
    pub h_n: f64,
    /// `N³h(N) + 4N − 8 < 0`, the form of `upper < m_r` after clearing
    /// the positive factor `ω_N / (2N²(N−1)(N−2)(N+2))`.
    pub sufficient: bool,
}

pub fn check_inequality_chain(dim: usize) -> Result<ChainReport> {
    check_dim(dim, 3)?;
    let n = dim as f64;
    let upper = test_function_bound(dim, -1.0)?;
    let m_r = m_radial_q1(dim);
    let h_n = h_function(n);
    Ok(ChainReport {
        dim,
        upper,
        m_r,
        holds: upper < m_r,
        h3: h_function(3.0),
        h_n,
        sufficient: n.powi(3) * h_n + 4.0 * n - 8.0 < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HMonotone {
    pub monotone: bool,
    pub max_increase: f64,
}

/// Checks that `h(r) = u'(r)²/2 + |u(r)|` is nonincreasing along the samples.
pub fn h_energy_monotone(p: &RadialProfile) -> Result<HMonotone> {
    if p.q != 1.0 {
        return Err(Error::WrongQ(p.q));
    }
    let h: Vec<f64> = p.u.iter().zip(&p.du).map(|(u, d)| 0.5 * d * d + u.abs()).collect();
    let max_increase = h.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    Ok(HMonotone { monotone: max_increase <= 1e-8, max_increase })
}

#[cfg(test)]
mod tests;
