//! Structured grids on intervals, rectangles, discs and annuli.
//!
//! Every grid is cell centered and stored as a tensor layout of
//! `n_outer × n_inner` nodes (rows along x₂ or r, columns along x₁ or θ).
//! The discrete Dirichlet form is an edge sum `Σ_e c_e (u_a − u_b)²` whose
//! coefficients are dual-area / length² ratios; no boundary flux is ever
//! assembled, so minimizers satisfy the Neumann condition naturally.

mod field;
mod separable;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use field::Field;
pub(crate) use separable::SeparableSolver;

/// Bounded domain, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    /// `(−L, L)`.
    Interval { half_length: f64 },
    /// `(−a/2, a/2) × (−b/2, b/2)`.
    Rectangle { width: f64, height: f64 },
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl DomainSpec {
    pub fn unit_interval() -> Self {
        DomainSpec::Interval { half_length: 1.0 }
    }

    pub fn unit_disc() -> Self {
        DomainSpec::Disc { radius: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Interval { .. } => "interval",
            DomainSpec::Rectangle { .. } => "rectangle",
            DomainSpec::Disc { .. } => "disc",
            DomainSpec::Annulus { .. } => "annulus",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            DomainSpec::Interval { half_length } => positive("half_length", half_length),
            DomainSpec::Rectangle { width, height } => {
                positive("width", width)?;
                positive("height", height)
            }
            DomainSpec::Disc { radius } => positive("radius", radius),
            DomainSpec::Annulus { inner, outer } => {
                positive("inner", inner)?;
                positive("outer", outer)?;
                if inner < outer {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "annulus needs inner < outer, got {inner} >= {outer}"
                    )))
                }
            }
        }
    }

    /// Closed-form measure `|Ω|`.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainSpec::Interval { half_length } => 2.0 * half_length,
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::Disc { radius } => std::f64::consts::PI * radius * radius,
            DomainSpec::Annulus { inner, outer } => {
                std::f64::consts::PI * (outer * outer - inner * inner)
            }
        }
    }

    /// Spatial dimension of the grid built from this domain.
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_polar(&self) -> bool {
        matches!(self, DomainSpec::Disc { .. } | DomainSpec::Annulus { .. })
    }
}

/// Cell counts per direction: `(n)` for intervals, `(n_x, n_y)` for
/// rectangles, `(n_r, n_θ)` for polar domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub first: usize,
    pub second: usize,
}

impl Resolution {
    pub fn interval(n: usize) -> Self {
        Resolution { first: n, second: 1 }
    }

    pub fn cartesian(nx: usize, ny: usize) -> Self {
        Resolution { first: nx, second: ny }
    }

    pub fn polar(nr: usize, ntheta: usize) -> Self {
        Resolution { first: nr, second: ntheta }
    }
}

/// Symmetry hyperplane through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyperplane {
    /// `{x_axis = 0}`; axis 0 is x₁.
    Coordinate(usize),
    /// Polar grids only: the line through the origin at angle `m·Δθ/2`.
    Polar(usize),
}

/// Open halfspace bounded by a hyperplane. `positive` selects the side the
/// normal points to: `x_axis > 0` for coordinate planes, `sin(θ − β) > 0`
/// for the polar line at angle `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Halfspace {
    pub plane: Hyperplane,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub a: usize,
    pub b: usize,
    pub coeff: T,
}

/// Tensor structure of the operator `L = A ⊗ I + diag(b) ⊗ K`.
#[derive(Debug, Clone)]
pub(crate) struct Layout<T> {
    pub n_outer: usize,
    pub n_inner: usize,
    pub periodic_inner: bool,
    /// Coefficient of the edge between rows `j` and `j + 1`.
    pub outer_coupling: Vec<T>,
    /// Unit coefficients of the inner edges (`n_inner − 1`, or `n_inner` when periodic).
    pub inner_unit: Vec<T>,
    /// Row scale `b_j` multiplying the inner edges.
    pub inner_scale: Vec<T>,
    /// Node weight of every node in row `j`.
    pub row_weight: Vec<T>,
}

/// One ring of a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RingProfile<T> {
    pub radius: T,
    /// Polar angles in `[0, 2π)`, increasing.
    pub angles: Vec<T>,
    pub values: Vec<T>,
    pub mean: T,
}

#[derive(Debug, Clone)]
pub struct Grid<T> {
    spec: DomainSpec,
    resolution: Resolution,
    coords: Vec<[T; 2]>,
    weights: Vec<T>,
    edges: Vec<Edge<T>>,
    boundary: Vec<bool>,
    adjacency_offsets: Vec<usize>,
    adjacency: Vec<usize>,
    layout: Layout<T>,
    /// Ring radii (polar) or row coordinates.
    row_coord: Vec<T>,
    /// Node angles (polar) or column coordinates.
    col_coord: Vec<T>,
}

/// Builds the cell-centered grid for `spec`.
///
/// Edges adjacent to the boundary absorb the half cell between the last
/// node and `∂Ω` into their dual area, so the discrete energy of a linear
/// field equals its continuum value.
pub fn build_grid<T: Scalar>(spec: DomainSpec, resolution: Resolution) -> Result<Grid<T>> {
    spec.validate()?;
    match spec {
        DomainSpec::Interval { half_length } => {
            let n = resolution.first;
            if n < 4 {
                return Err(Error::ResolutionTooSmall(format!("interval needs n >= 4, got {n}")));
            }
            let len = 2.0 * half_length;
            let h = len / n as f64;
            let rows: Vec<f64> = (0..n).map(|i| -half_length + (i as f64 + 0.5) * h).collect();
            let mut outer = vec![1.0 / h; n - 1];
            outer[0] *= 1.5;
            outer[n - 2] *= 1.5;
            let layout = Layout {
                n_outer: n,
                n_inner: 1,
                periodic_inner: false,
                outer_coupling: outer.into_iter().map(T::lit).collect(),
                inner_unit: Vec::new(),
                inner_scale: vec![T::zero(); n],
                row_weight: vec![T::lit(h); n],
            };
            let coords = rows.iter().map(|&x| [T::lit(x), T::zero()]).collect();
            let boundary = (0..n).map(|i| i == 0 || i == n - 1).collect();
            Ok(Grid::assemble(
                spec,
                Resolution::interval(n),
                coords,
                boundary,
                layout,
                rows.into_iter().map(T::lit).collect(),
                vec![T::zero()],
            ))
        }
        DomainSpec::Rectangle { width, height } => {
            let (nx, ny) = (resolution.first, resolution.second);
            if nx < 8 || ny < 8 {
                return Err(Error::ResolutionTooSmall(format!(
                    "rectangle needs at least 8 cells per direction, got ({nx}, {ny})"
                )));
            }
            let (dx, dy) = (width / nx as f64, height / ny as f64);
            let xs: Vec<f64> = (0..nx).map(|k| -0.5 * width + (k as f64 + 0.5) * dx).collect();
            let ys: Vec<f64> = (0..ny).map(|j| -0.5 * height + (j as f64 + 0.5) * dy).collect();
            let mut outer = vec![dx / dy; ny - 1];
            outer[0] *= 1.5;
            outer[ny - 2] *= 1.5;
            let mut inner = vec![1.0; nx - 1];
            inner[0] = 1.5;
            inner[nx - 2] = 1.5;
            let layout = Layout {
                n_outer: ny,
                n_inner: nx,
                periodic_inner: false,
                outer_coupling: outer.into_iter().map(T::lit).collect(),
                inner_unit: inner.into_iter().map(T::lit).collect(),
                inner_scale: vec![T::lit(dy / dx); ny],
                row_weight: vec![T::lit(dx * dy); ny],
            };
            let mut coords = Vec::with_capacity(nx * ny);
            let mut boundary = Vec::with_capacity(nx * ny);
            for (j, &y) in ys.iter().enumerate() {
                for (k, &x) in xs.iter().enumerate() {
                    coords.push([T::lit(x), T::lit(y)]);
                    boundary.push(j == 0 || j == ny - 1 || k == 0 || k == nx - 1);
                }
            }
            Ok(Grid::assemble(
                spec,
                Resolution::cartesian(nx, ny),
                coords,
                boundary,
                layout,
                ys.into_iter().map(T::lit).collect(),
                xs.into_iter().map(T::lit).collect(),
            ))
        }
        DomainSpec::Disc { radius } => polar_grid(spec, 0.0, radius, resolution),
        DomainSpec::Annulus { inner, outer } => polar_grid(spec, inner, outer, resolution),
    }
}

fn polar_grid<T: Scalar>(
    spec: DomainSpec,
    r_in: f64,
    r_out: f64,
    resolution: Resolution,
) -> Result<Grid<T>> {
    let (nr, nt) = (resolution.first, resolution.second);
    if nr < 8 || nt < 8 {
        return Err(Error::ResolutionTooSmall(format!(
            "polar grids need n_r >= 8 and n_theta >= 8, got ({nr}, {nt})"
        )));
    }
    if nt % 2 != 0 {
        return Err(Error::ResolutionTooSmall(format!(
            "angular count must be even for exact reflections, got {nt}"
        )));
    }
    let dr = (r_out - r_in) / nr as f64;
    let dt = 2.0 * std::f64::consts::PI / nt as f64;
    let radii: Vec<f64> = (0..nr).map(|j| r_in + (j as f64 + 0.5) * dr).collect();
    let angles: Vec<f64> = (0..nt).map(|k| (k as f64 + 0.5) * dt).collect();

    // Dual area (per unit angle) of the radial edge between rings j and j+1.
    let mut dual: Vec<f64> = (0..nr - 1).map(|j| (r_in + (j + 1) as f64 * dr) * dr).collect();
    dual[nr - 2] += 0.5 * (r_out * r_out - radii[nr - 1] * radii[nr - 1]);
    if r_in > 0.0 {
        dual[0] += 0.5 * (radii[0] * radii[0] - r_in * r_in);
    }
    let layout = Layout {
        n_outer: nr,
        n_inner: nt,
        periodic_inner: true,
        outer_coupling: dual.iter().map(|a| T::lit(a * dt / (dr * dr))).collect(),
        inner_unit: vec![T::one(); nt],
        inner_scale: radii.iter().map(|r| T::lit(dr / (r * dt))).collect(),
        row_weight: radii.iter().map(|r| T::lit(r * dr * dt)).collect(),
    };
    let mut coords = Vec::with_capacity(nr * nt);
    let mut boundary = Vec::with_capacity(nr * nt);
    for (j, &r) in radii.iter().enumerate() {
        for &t in &angles {
            coords.push([T::lit(r * t.cos()), T::lit(r * t.sin())]);
            boundary.push(j == nr - 1 || (r_in > 0.0 && j == 0));
        }
    }
    Ok(Grid::assemble(
        spec,
        Resolution::polar(nr, nt),
        coords,
        boundary,
        layout,
        radii.into_iter().map(T::lit).collect(),
        angles.into_iter().map(T::lit).collect(),
    ))
}

impl<T: Scalar> Grid<T> {
    fn assemble(
        spec: DomainSpec,
        resolution: Resolution,
        coords: Vec<[T; 2]>,
        boundary: Vec<bool>,
        layout: Layout<T>,
        row_coord: Vec<T>,
        col_coord: Vec<T>,
    ) -> Self {
        let (no, ni) = (layout.n_outer, layout.n_inner);
        let idx = |j: usize, k: usize| j * ni + k;
        let mut edges = Vec::new();
        for j in 0..no {
            let inner_edges = if layout.periodic_inner { ni } else { ni.saturating_sub(1) };
            for k in 0..inner_edges {
                edges.push(Edge {
                    a: idx(j, k),
                    b: idx(j, (k + 1) % ni),
                    coeff: layout.inner_scale[j] * layout.inner_unit[k],
                });
            }
            if j + 1 < no {
                for k in 0..ni {
                    edges.push(Edge { a: idx(j, k), b: idx(j + 1, k), coeff: layout.outer_coupling[j] });
                }
            }
        }
        let n = no * ni;
        let weights = (0..n).map(|i| layout.row_weight[i / ni]).collect();

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        let mut adjacency_offsets = vec![0usize; n + 1];
        for i in 0..n {
            adjacency_offsets[i + 1] = adjacency_offsets[i] + degree[i];
        }
        let mut fill = adjacency_offsets.clone();
        let mut adjacency = vec![0usize; adjacency_offsets[n]];
        for e in &edges {
            adjacency[fill[e.a]] = e.b;
            fill[e.a] += 1;
            adjacency[fill[e.b]] = e.a;
            fill[e.b] += 1;
        }

        Grid {
            spec,
            resolution,
            coords,
            weights,
            edges,
            boundary,
            adjacency_offsets,
            adjacency,
            layout,
            row_coord,
            col_coord,
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    pub fn coords(&self) -> &[[T; 2]] {
        &self.coords
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Whether node `i` is a cell touching `∂Ω`.
    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.adjacency_offsets[i]..self.adjacency_offsets[i + 1]]
    }

    /// `Σ_i w_i`.
    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn max_cell_weight(&self) -> T {
        self.weights.iter().copied().fold(T::zero(), T::max)
    }

    pub fn is_polar(&self) -> bool {
        self.spec.is_polar()
    }

    pub(crate) fn layout(&self) -> &Layout<T> {
        &self.layout
    }

    /// Number of rings (polar) or rows.
    pub fn rows(&self) -> usize {
        self.layout.n_outer
    }

    /// Nodes per ring (polar) or per row.
    pub fn cols(&self) -> usize {
        self.layout.n_inner
    }

    /// Ring radius of node `i` on polar grids.
    pub fn radius_of(&self, i: usize) -> T {
        self.row_coord[i / self.layout.n_inner]
    }

    /// Polar angle of node `i` in `[0, 2π)` on polar grids.
    pub fn angle_of(&self, i: usize) -> T {
        self.col_coord[i % self.layout.n_inner]
    }

    pub fn ring_radii(&self) -> &[T] {
        &self.row_coord
    }

    /// Characteristic mesh width (largest cell diameter along the axes).
    pub fn spacing(&self) -> T {
        let r = self.resolution;
        let h = match self.spec {
            DomainSpec::Interval { half_length } => 2.0 * half_length / r.first as f64,
            DomainSpec::Rectangle { width, height } => {
                (width / r.first as f64).max(height / r.second as f64)
            }
            DomainSpec::Disc { radius } => {
                let dr = radius / r.first as f64;
                dr.max(radius * 2.0 * std::f64::consts::PI / r.second as f64)
            }
            DomainSpec::Annulus { inner, outer } => {
                let dr = (outer - inner) / r.first as f64;
                dr.max(outer * 2.0 * std::f64::consts::PI / r.second as f64)
            }
        };
        T::lit(h)
    }

    /// Samples `f` at the node coordinates.
    pub fn sample(&self, f: impl Fn([T; 2]) -> T) -> Field<T> {
        Field::new(self.coords.iter().map(|&x| f(x)).collect())
    }

    pub fn zeros(&self) -> Field<T> {
        Field::new(vec![T::zero(); self.len()])
    }

    pub fn constant(&self, c: T) -> Field<T> {
        Field::new(vec![c; self.len()])
    }

    pub(crate) fn check(&self, f: &[T]) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(Error::SizeMismatch { expected: self.len(), found: f.len() })
        }
    }

    /// Node permutation realizing `x ↦ σ_H(x)`.
    pub fn reflection(&self, plane: Hyperplane) -> Result<Vec<usize>> {
        let (no, ni) = (self.layout.n_outer, self.layout.n_inner);
        let unsupported = || Error::UnsupportedHyperplane(format!("{plane:?} on {}", self.spec.name()));
        let perm: Vec<usize> = match (self.spec, plane) {
            (DomainSpec::Interval { .. }, Hyperplane::Coordinate(0)) => (0..no).rev().collect(),
            (DomainSpec::Rectangle { .. }, Hyperplane::Coordinate(0)) => {
                (0..no * ni).map(|i| (i / ni) * ni + (ni - 1 - i % ni)).collect()
            }
            (DomainSpec::Rectangle { .. }, Hyperplane::Coordinate(1)) => {
                (0..no * ni).map(|i| (no - 1 - i / ni) * ni + i % ni).collect()
            }
            (_, _) if self.is_polar() => {
                let m = self.polar_line(plane).ok_or_else(unsupported)?.0;
                (0..no * ni)
                    .map(|i| {
                        let k = i % ni;
                        let kr = (m + 2 * ni - 1 - k) % ni;
                        (i / ni) * ni + kr
                    })
                    .collect()
            }
            _ => return Err(unsupported()),
        };
        Ok(perm)
    }

    /// Polar line index and whether its positive side is flipped relative to
    /// the coordinate-plane convention.
    fn polar_line(&self, plane: Hyperplane) -> Option<(usize, bool)> {
        let n = self.layout.n_inner;
        match plane {
            Hyperplane::Polar(m) if m < n => Some((m, false)),
            // {x₁ = 0} is the line at π/2; its `sin(θ − π/2) > 0` side is x₁ < 0.
            Hyperplane::Coordinate(0) => Some((n / 2, true)),
            Hyperplane::Coordinate(1) => Some((0, false)),
            _ => None,
        }
    }

    /// Which side of `plane` node `i` lies on (`Equal` for nodes on the plane).
    pub fn side(&self, plane: Hyperplane, i: usize) -> Result<Ordering> {
        if self.is_polar() {
            let (m, flip) = self
                .polar_line(plane)
                .ok_or_else(|| Error::UnsupportedHyperplane(format!("{plane:?}")))?;
            let n = self.layout.n_inner;
            let k = i % n;
            // sin((k + ½)Δθ − mΔθ/2) has the sign of sin(π s / n), s = 2k + 1 − m.
            let s = (2 * k + 1 + 2 * n - m) % (2 * n);
            let side = if s == 0 || s == n {
                Ordering::Equal
            } else if s < n {
                Ordering::Greater
            } else {
                Ordering::Less
            };
            Ok(if flip { side.reverse() } else { side })
        } else {
            let axis = match plane {
                Hyperplane::Coordinate(a) if a < self.dimension() => a,
                _ => return Err(Error::UnsupportedHyperplane(format!("{plane:?}"))),
            };
            Ok(self.coords[i][axis].partial_cmp(&T::zero()).unwrap_or(Ordering::Equal))
        }
    }

    /// All reflection planes of the grid's symmetry group.
    pub fn symmetry_planes(&self) -> Vec<Hyperplane> {
        match self.spec {
            DomainSpec::Interval { .. } => vec![Hyperplane::Coordinate(0)],
            DomainSpec::Rectangle { .. } => vec![Hyperplane::Coordinate(0), Hyperplane::Coordinate(1)],
            _ => (0..self.layout.n_inner).map(Hyperplane::Polar).collect(),
        }
    }

    /// Angle `β` of a polar line.
    pub fn polar_line_angle(&self, m: usize) -> T {
        T::PI() * T::from_usize_lossy(m) / T::from_usize_lossy(self.layout.n_inner)
    }
}

/// `Σ_i w_i f_i`.
pub fn integrate<T: Scalar>(grid: &Grid<T>, f: &Field<T>) -> Result<T> {
    grid.check(f)?;
    Ok(grid.weights.iter().zip(f.iter()).map(|(&w, &v)| w * v).sum())
}

/// Bilinear edge form `Σ_e c_e (u_a − u_b)(v_a − v_b)`.
pub fn edge_form<T: Scalar>(grid: &Grid<T>, u: &Field<T>, v: &Field<T>) -> Result<T> {
    grid.check(u)?;
    grid.check(v)?;
    Ok(grid
        .edges
        .iter()
        .map(|e| e.coeff * (u[e.a] - u[e.b]) * (v[e.a] - v[e.b]))
        .sum())
}

/// Discrete `∫_Ω |∇u|²`.
pub fn dirichlet_energy<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> Result<T> {
    grid.check(u)?;
    Ok(grid
        .edges
        .iter()
        .map(|e| {
            let d = u[e.a] - u[e.b];
            e.coeff * d * d
        })
        .sum())
}

/// Weighted graph Laplacian `(L u)_i = Σ_{e ∋ i} c_e (u_i − u_j)`, the
/// gradient of `½·dirichlet_energy`. Dividing by `w_i` gives `−Δu` at node `i`.
pub fn laplacian<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> Result<Field<T>> {
    grid.check(u)?;
    let mut out = vec![T::zero(); grid.len()];
    for e in &grid.edges {
        let flux = e.coeff * (u[e.a] - u[e.b]);
        out[e.a] = out[e.a] + flux;
        out[e.b] = out[e.b] - flux;
    }
    Ok(Field::new(out))
}

/// `u ∘ σ_H` as an exact node permutation.
pub fn reflect<T: Scalar>(grid: &Grid<T>, u: &Field<T>, plane: Hyperplane) -> Result<Field<T>> {
    grid.check(u)?;
    let perm = grid.reflection(plane)?;
    Ok(Field::new(perm.iter().map(|&p| u[p]).collect()))
}

/// Two-point rearrangement: `max(u, u∘σ_H)` on `H`, `min` on the complement.
pub fn polarize<T: Scalar>(grid: &Grid<T>, u: &Field<T>, half: Halfspace) -> Result<Field<T>> {
    grid.check(u)?;
    let perm = grid.reflection(half.plane)?;
    let inside = if half.positive { Ordering::Greater } else { Ordering::Less };
    let mut out = Vec::with_capacity(grid.len());
    for (i, &p) in perm.iter().enumerate() {
        let side = grid.side(half.plane, i)?;
        let (a, b) = (u[i], u[p]);
        out.push(if side == Ordering::Equal {
            a
        } else if side == inside {
            a.max(b)
        } else {
            a.min(b)
        });
    }
    Ok(Field::new(out))
}

/// Per-ring values ordered by polar angle, with ring averages.
pub fn angular_profiles<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> Result<Vec<RingProfile<T>>> {
    if !grid.is_polar() {
        return Err(Error::WrongDomainKind { expected: "disc or annulus" });
    }
    grid.check(u)?;
    let ni = grid.cols();
    Ok((0..grid.rows())
        .map(|j| {
            let values = u[j * ni..(j + 1) * ni].to_vec();
            let mean = values.iter().copied().sum::<T>() / T::from_usize_lossy(ni);
            RingProfile { radius: grid.row_coord[j], angles: grid.col_coord.clone(), values, mean }
        })
        .collect())
}

/// Least-squares nodal gradient from the differences along incident edges.
pub fn nodal_gradient<T: Scalar>(grid: &Grid<T>, u: &Field<T>) -> Result<Vec<[T; 2]>> {
    grid.check(u)?;
    let dim = grid.dimension();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let xi = grid.coords[i];
        let (mut a11, mut a12, mut a22, mut b1, mut b2) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for &j in grid.neighbors(i) {
            let dx = grid.coords[j][0] - xi[0];
            let dy = grid.coords[j][1] - xi[1];
            let du = u[j] - u[i];
            a11 = a11 + dx * dx;
            a12 = a12 + dx * dy;
            a22 = a22 + dy * dy;
            b1 = b1 + dx * du;
            b2 = b2 + dy * du;
        }
        if dim == 1 {
            out.push([if a11 > T::zero() { b1 / a11 } else { T::zero() }, T::zero()]);
        } else {
            let det = a11 * a22 - a12 * a12;
            if det.abs() <= T::epsilon() * (a11 * a22) {
                out.push([T::zero(), T::zero()]);
            } else {
                out.push([(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det]);
            }
        }
    }
    Ok(out)
}
