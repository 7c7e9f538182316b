//! Checks of qualitative properties on computed fields: zero-set measure,
//! nodal domains, foliated Schwarz symmetry, radiality and PDE residuals.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{laplacian, nodal_gradient, polarize, Field, Grid, Halfspace, Hyperplane};
use crate::scalar::Scalar;

/// Half the smallest nonzero `|u_i|`: below this no threshold separates
/// further nodes from the zero set. Zero for `u ≡ 0`.
pub fn quantization_floor<T: Scalar>(u: &Field<T>) -> T {
    let min = u
        .iter()
        .map(|v| v.abs())
        .filter(|&a| a > T::zero())
        .fold(T::infinity(), |m, a| m.min(a));
    if min.is_finite() {
        min / T::lit(2.0)
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSetPoint<T> {
    pub delta: T,
    pub measure: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSetCurve<T> {
    pub points: Vec<ZeroSetPoint<T>>,
    /// Least-squares slope through the origin over `δ ≥ floor`.
    pub kappa: T,
    pub floor: T,
}

/// `|{|u| ≤ δ}|` for each `δ`, with the fitted constant `κ̂` of `|{|u| ≤ δ}| ≤ κδ`.
pub fn zero_measure_curve<T: Scalar>(grid: &Grid<T>, u: &Field<T>, deltas: &[T]) -> Result<ZeroSetCurve<T>> {
    grid.check(u)?;
    let floor = quantization_floor(u);
    let points: Vec<_> = deltas
        .iter()
        .map(|&delta| {
            let measure = grid
                .weights()
                .iter()
                .zip(u.iter())
                .filter(|(_, &v)| v.abs() <= delta)
                .fold(T::zero(), |m, (&w, _)| m + w);
            ZeroSetPoint { delta, measure }
        })
        .collect();
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for p in points.iter().filter(|p| p.delta >= floor && p.delta > T::zero()) {
        sxy = sxy + p.delta * p.measure;
        sxx = sxx + p.delta * p.delta;
    }
    let kappa = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    Ok(ZeroSetCurve { points, kappa, floor })
}

/// Edge-connected components of `{u > t}` plus those of `{u < −t}`.
pub fn nodal_domains<T: Scalar>(grid: &Grid<T>, u: &Field<T>, threshold: T) -> Result<usize> {
    grid.check(u)?;
    let sign = |v: T| -> i8 {
        if v > threshold {
            1
        } else if v < -threshold {
            -1
        } else {
            0
        }
    };
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    let mut count = 0;
    for start in 0..grid.len() {
        let s = sign(u[start]);
        if s == 0 || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in grid.neighbors(i) {
                if !seen[j] && sign(u[j]) == s {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(count)
}

/// Weighted variance around ring means over total weighted variance.
pub fn radiality_deviation<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> Result<T> {
    if !grid.is_polar() {
        return Err(Error::WrongDomainKind { expected: "disc or annulus" });
    }
    grid.check(u)?;
    let w = grid.weights();
    let ni = grid.cols();
    let total: T = grid.total_weight();
    let mean = w.iter().zip(u.iter()).map(|(&a, &b)| a * b).sum::<T>() / total;
    let (mut within, mut all) = (T::zero(), T::zero());
    for j in 0..grid.rows() {
        let ring = j * ni..(j + 1) * ni;
        // Offsets from the first node keep exactly ring-constant fields at 0.
        let base = u[j * ni];
        let rw: T = w[ring.clone()].iter().copied().sum();
        let rm = w[ring.clone()].iter().zip(&u[ring.clone()]).map(|(&a, &b)| a * (b - base)).sum::<T>() / rw;
        for i in ring {
            let d = u[i] - base - rm;
            within = within + w[i] * d * d;
            all = all + w[i] * (u[i] - mean) * (u[i] - mean);
        }
    }
    Ok(if all > T::zero() { (within / all).min(T::one()) } else { T::zero() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryTolerances {
    pub monotonicity: f64,
    pub polarization: f64,
    /// First angular mode below this fraction of `∫|u|` counts as no axis.
    pub axis_floor: f64,
}

impl Default for SymmetryTolerances {
    fn default() -> Self {
        SymmetryTolerances { monotonicity: 5e-3, polarization: 5e-3, axis_floor: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport<T> {
    /// Axis angle from the first angular Fourier mode.
    pub axis_angle: T,
    /// Angle of the node where `u` is largest, as a cross-check.
    pub max_point_angle: T,
    /// Largest increase of a ring profile away from the axis, over `max|u|`.
    pub monotonicity_violation: T,
    /// Largest `‖u_H − u‖ / ‖u‖` over halfspaces whose boundary passes
    /// through the origin and which contain the axis direction.
    pub polarization_defect: T,
    pub radiality_deviation: T,
    pub passes: bool,
}

/// Foliated Schwarz test on a polar grid.
pub fn foliated_schwarz_check<T: Scalar>(
    grid: &Grid<T>,
    u: &Field<T>,
    tol: SymmetryTolerances,
) -> Result<SymmetryReport<T>> {
    let radiality = radiality_deviation(grid, u)?;
    let w = grid.weights();
    let (mut a, mut b, mut mass) = (T::zero(), T::zero(), T::zero());
    for i in 0..grid.len() {
        let th = grid.angle_of(i);
        a = a + w[i] * u[i] * th.cos();
        b = b + w[i] * u[i] * th.sin();
        mass = mass + w[i] * u[i].abs();
    }
    if !((a * a + b * b).sqrt() > T::lit(tol.axis_floor) * mass) {
        return Err(Error::AxisUndefined { radiality: radiality.as_f64() });
    }
    let axis = b.atan2(a);
    let argmax = (0..grid.len()).fold(0, |m, i| if u[i] > u[m] { i } else { m });
    let scale = u.max_abs();

    let ni = grid.cols();
    let pi = T::PI();
    let gap = T::lit(1e-9);
    let mut violation = T::zero();
    for j in 0..grid.rows() {
        let mut ring: Vec<(T, T)> = (j * ni..(j + 1) * ni)
            .map(|i| {
                let mut d = (grid.angle_of(i) - axis) % (pi + pi);
                if d < T::zero() {
                    d = d + pi + pi;
                }
                (if d > pi { pi + pi - d } else { d }, u[i])
            })
            .collect();
        ring.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        // Running minimum over samples strictly closer to the axis.
        let mut lag = 0;
        let mut closer_min = T::infinity();
        for k in 0..ring.len() {
            while lag < k && ring[lag].0 < ring[k].0 - gap {
                closer_min = closer_min.min(ring[lag].1);
                lag += 1;
            }
            if closer_min.is_finite() {
                violation = violation.max(ring[k].1 - closer_min);
            }
        }
    }
    let monotonicity = if scale > T::zero() { violation / scale } else { T::zero() };

    let norm = weighted_norm(w, u.iter().copied());
    let mut defect = T::zero();
    for m in 0..ni {
        let s = (axis - grid.polar_line_angle(m)).sin();
        if s.abs() < T::lit(1e-9) {
            continue;
        }
        let half = Halfspace { plane: Hyperplane::Polar(m), positive: s > T::zero() };
        let uh = polarize(grid, u, half)?;
        let diff = weighted_norm(w, uh.iter().zip(u.iter()).map(|(&x, &y)| x - y));
        if norm > T::zero() {
            defect = defect.max(diff / norm);
        }
    }
    let passes = monotonicity.as_f64() <= tol.monotonicity && defect.as_f64() <= tol.polarization;
    Ok(SymmetryReport {
        axis_angle: axis,
        max_point_angle: grid.angle_of(argmax),
        monotonicity_violation: monotonicity,
        polarization_defect: defect,
        radiality_deviation: radiality,
        passes,
    })
}

fn weighted_norm<T: Scalar>(w: &[T], values: impl Iterator<Item = T>) -> T {
    w.iter().zip(values).map(|(&wi, v)| wi * v * v).sum::<T>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeResidual<T> {
    /// `(Σ w_i r_i² / |Ω|)^{1/2}` with `r_i = (L u)_i / w_i − |u_i|^{q−2}u_i`
    /// over interior stencils away from the zero set.
    pub interior_norm: T,
    /// `q = 1`: measure of interior nodes on the discrete zero set where
    /// `|(L u)_i / w_i| > 1 + 1e−3`.
    pub bracket_violation: T,
    /// `|Σ_i ((L u)_i − w_i |u_i|^{q−2}u_i)| / |Ω|`.
    pub flux_norm: T,
}

/// Residual of the discrete equation `L u = W |u|^{q−2}u`.
///
/// Rows whose stencil reaches a boundary node carry the half-cell boundary
/// correction of the Dirichlet form and are left out of both tests. Nodes
/// with `|u_i|` at the quantization floor or with a neighbor of opposite
/// sign form the discrete zero set: for `q = 1` they enter the bracket test,
/// never the interior norm.
pub fn pde_residual<T: Scalar>(grid: &Grid<T>, u: &Field<T>, q: T) -> Result<PdeResidual<T>> {
    let lu = laplacian(grid, u)?;
    let w = grid.weights();
    let floor = quantization_floor(u);
    let total = grid.total_weight();
    let (mut sq, mut bracket, mut flux) = (T::zero(), T::zero(), T::zero());
    let slack = T::lit(1.0 + 1e-3);
    for i in 0..grid.len() {
        let f = u[i].signed_pow(q);
        let strong = lu[i] / w[i];
        flux = flux + lu[i] - w[i] * f;
        if grid.is_boundary(i) || grid.neighbors(i).iter().any(|&j| grid.is_boundary(j)) {
            continue;
        }
        let near_zero = u[i].abs() <= floor || grid.neighbors(i).iter().any(|&j| u[j] * u[i] < T::zero());
        if near_zero {
            if q == T::one() && strong.abs() > slack {
                bracket = bracket + w[i];
            }
            continue;
        }
        let r = strong - f;
        sq = sq + w[i] * r * r;
    }
    Ok(PdeResidual { interior_norm: (sq / total).sqrt(), bracket_violation: bracket, flux_norm: flux.abs() / total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WSetReport<T> {
    pub member: bool,
    /// Smallest reconstructed `|∇u|` on the discrete zero set; infinite when
    /// that set is empty.
    pub min_gradient_on_zero_set: T,
}

/// Tests whether `∇u ≠ 0` on the zero set.
///
/// The discrete zero set is the nodes with `|u_i| ≤ δ` together with the
/// nodes adjacent to a sign change.
pub fn w_set_check<T: Scalar>(grid: &Grid<T>, u: &Field<T>, delta: T, floor: T) -> Result<WSetReport<T>> {
    let grad = nodal_gradient(grid, u)?;
    let mut min = T::infinity();
    for i in 0..grid.len() {
        let on_zero = u[i].abs() <= delta || grid.neighbors(i).iter().any(|&j| u[j] * u[i] < T::zero());
        if on_zero {
            let g = grad[i];
            min = min.min((g[0] * g[0] + g[1] * g[1]).sqrt());
        }
    }
    let member = !min.is_finite() || (min > T::zero() && min >= floor);
    Ok(WSetReport { member, min_gradient_on_zero_set: min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec, Resolution};

    fn disc(nr: usize, nt: usize) -> Grid<f64> {
        build_grid(DomainSpec::unit_disc(), Resolution::polar(nr, nt)).unwrap()
    }

    #[test]
    fn zero_measure_of_linear_field() {
        let g: Grid<f64> = build_grid(DomainSpec::unit_interval(), Resolution::interval(200)).unwrap();
        let u = g.sample(|x| x[0]);
        let c = zero_measure_curve(&g, &u, &[0.1]).unwrap();
        assert!((c.points[0].measure - 0.2).abs() <= 0.01 + 1e-12);
        let z = zero_measure_curve(&g, &g.zeros(), &[1e-3, 0.5]).unwrap();
        assert!(z.points.iter().all(|p| (p.measure - 2.0).abs() < 1e-12));
    }

    #[test]
    fn nodal_domain_counts() {
        let g: Grid<f64> = build_grid(DomainSpec::Rectangle { width: 2.0, height: 1.0 }, Resolution::cartesian(20, 10)).unwrap();
        assert_eq!(nodal_domains(&g, &g.sample(|x| x[0]), 0.0).unwrap(), 2);
        assert_eq!(nodal_domains(&g, &g.constant(1.0), 0.0).unwrap(), 1);
        let d = disc(16, 32);
        assert_eq!(nodal_domains(&d, &d.sample(|x| (2.0 * x[1].atan2(x[0])).cos()), 0.0).unwrap(), 4);
    }

    #[test]
    fn radiality_extremes() {
        let g = disc(12, 24);
        let radial = Field::new((0..g.len()).map(|i| g.radius_of(i).powi(2)).collect());
        assert_eq!(radiality_deviation(&g, &radial).unwrap(), 0.0);
        let x1 = g.sample(|x| x[0]);
        assert!((radiality_deviation(&g, &x1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schwarz_check_separates_modes() {
        let g = disc(16, 64);
        let fs = Field::new((0..g.len()).map(|i| g.radius_of(i) * g.angle_of(i).cos()).collect());
        let rep = foliated_schwarz_check(&g, &fs, SymmetryTolerances::default()).unwrap();
        assert!(rep.passes);
        assert!(rep.monotonicity_violation <= 1e-12 && rep.polarization_defect <= 1e-12);
        assert!(rep.axis_angle.abs() < 1e-12);

        let c2 = Field::new((0..g.len()).map(|i| (g.angle_of(i) + 0.3).cos() + 0.5 * (2.0 * g.angle_of(i)).cos()).collect());
        let rep = foliated_schwarz_check(&g, &c2, SymmetryTolerances::default()).unwrap();
        assert!(!rep.passes);

        let radial = Field::new((0..g.len()).map(|i| g.radius_of(i)).collect());
        assert!(matches!(
            foliated_schwarz_check(&g, &radial, SymmetryTolerances::default()),
            Err(Error::AxisUndefined { .. })
        ));
    }

    #[test]
    fn residual_of_trivial_fields() {
        let g = disc(8, 16);
        let r = pde_residual(&g, &g.zeros(), 1.0).unwrap();
        assert_eq!((r.interior_norm, r.bracket_violation), (0.0, 0.0));
    }

    #[test]
    fn w_set_membership() {
        let g: Grid<f64> = build_grid(DomainSpec::Rectangle { width: 2.0, height: 2.0 }, Resolution::cartesian(40, 40)).unwrap();
        let lin = w_set_check(&g, &g.sample(|x| x[0]), 0.0, 1e-3).unwrap();
        assert!(lin.member && (lin.min_gradient_on_zero_set - 1.0).abs() < 1e-9);
        let bowl = w_set_check(&g, &g.sample(|x| x[0] * x[0] + x[1] * x[1] - 0.25), 0.0, 1e-3).unwrap();
        assert!(bowl.member);
        assert!(!w_set_check(&g, &g.zeros(), 0.0, 0.0).unwrap().member);
    }
}
