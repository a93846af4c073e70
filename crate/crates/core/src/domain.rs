//! Computational domains on a uniform Cartesian grid.
//!
//! Two shapes are supported: a rectangle `(0, W) x (0, H)` and the annulus
//! `1 < x^2 + y^2 < 2` embedded in the box `[-sqrt 2, sqrt 2]^2`.
//!
//! Layout (the staggered lattice):
//!
//! * `Dz` and `theta` live on nodes `(i, j)`, `0 <= i <= nx`, `0 <= j <= ny`,
//!   stored row-major with `j` as the row: `j * (nx + 1) + i`.
//! * `Bx` lives on x-faces `(i, j + 1/2)`: `(nx + 1) * ny` values, index
//!   `j * (nx + 1) + i`.
//! * `By` lives on y-faces `(i + 1/2, j)`: `nx * (ny + 1)` values, index
//!   `j * nx + i`.
//!
//! A node is *interior* when it carries unknowns. For the rectangle these are
//! the nodes strictly inside. For the annulus a node is interior when it lies
//! more than `h/2` inside the physical boundary, so the staircase boundary
//! straddles the true circle instead of sitting on one side of it.
//!
//! Quadrature weights are the area of each node's (or face's) dual cell that
//! lies in the physical domain: the trapezoid rule on the rectangle and `h^2`
//! for points inside the annulus. Every node or face touching an interior
//! node carries the full weight `h^2`, which is what makes the discrete curls
//! adjoint.

use crate::error::{Error, Result};
use crate::reduce;
use serde::{Deserialize, Serialize};

pub const ANNULUS_INNER: f64 = 1.0;
pub const ANNULUS_OUTER: f64 = std::f64::consts::SQRT_2;

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Rectangle { width: f64, height: f64 },
    Annulus,
}

impl DomainKind {
    pub fn unit_square() -> Self {
        DomainKind::Rectangle {
            width: 1.0,
            height: 1.0,
        }
    }
}

/// Neighbor directions in the order used by [`Domain::arms`].
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

/// Index bookkeeping for the staggered lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaggeredLayout {
    pub nx: usize,
    pub ny: usize,
}

impl StaggeredLayout {
    pub fn node_cols(&self) -> usize {
        self.nx + 1
    }
    pub fn node_rows(&self) -> usize {
        self.ny + 1
    }
    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }
    pub fn bx_count(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn by_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    /// x-face `(i, j + 1/2)`.
    #[inline]
    pub fn bx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    /// y-face `(i + 1/2, j)`.
    #[inline]
    pub fn by(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub kind: DomainKind,
    pub layout: StaggeredLayout,
    /// Cells per side as requested (along x).
    pub n: usize,
    pub h: f64,
    origin: (f64, f64),
    /// `true` for interior nodes (unknowns), `false` for boundary/exterior.
    pub interior: Vec<bool>,
    pub node_weights: Vec<f64>,
    pub bx_weights: Vec<f64>,
    pub by_weights: Vec<f64>,
    /// Faces whose midpoint lies in the closed physical domain.
    pub bx_inside: Vec<bool>,
    pub by_inside: Vec<bool>,
    /// For interior nodes: distance to the Dirichlet boundary along each grid
    /// direction, in units of `h`. Equal to 1 when the neighbor is interior or
    /// when the boundary passes through the neighbor node.
    pub arms: Vec<[f64; 4]>,
    interior_count: usize,
}

/// Builds a domain with `n` cells along x.
pub fn build_domain(kind: DomainKind, n: usize) -> Result<Domain> {
    if n < MIN_CELLS {
        return Err(Error::config(
            "domain.n",
            format!("need at least {MIN_CELLS} cells per side, got {n}"),
        ));
    }
    match kind {
        DomainKind::Rectangle { width, height } => build_rectangle(width, height, n),
        DomainKind::Annulus => Ok(build_annulus(n)),
    }
}

fn build_rectangle(width: f64, height: f64, n: usize) -> Result<Domain> {
    if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
        return Err(Error::config(
            "domain",
            format!("rectangle sides must be positive, got {width} x {height}"),
        ));
    }
    let h = width / n as f64;
    let ny_real = height / h;
    let ny = ny_real.round() as usize;
    if (ny_real - ny as f64).abs() > 1e-9 * ny_real.max(1.0) {
        return Err(Error::config(
            "domain",
            format!("height {height} is not a whole number of cells of size {h}"),
        ));
    }
    if ny < MIN_CELLS {
        return Err(Error::config(
            "domain.n",
            format!("only {ny} cells along y, need at least {MIN_CELLS}"),
        ));
    }
    let layout = StaggeredLayout { nx: n, ny };
    let h2 = h * h;
    let edge = |k: usize, last: usize| if k == 0 || k == last { 0.5 } else { 1.0 };

    let mut interior = vec![false; layout.node_count()];
    let mut node_weights = vec![0.0; layout.node_count()];
    for j in 0..=ny {
        for i in 0..=n {
            let k = layout.node(i, j);
            interior[k] = i > 0 && i < n && j > 0 && j < ny;
            node_weights[k] = h2 * edge(i, n) * edge(j, ny);
        }
    }
    let mut bx_weights = vec![0.0; layout.bx_count()];
    for j in 0..ny {
        for i in 0..=n {
            bx_weights[layout.bx(i, j)] = h2 * edge(i, n);
        }
    }
    let mut by_weights = vec![0.0; layout.by_count()];
    for j in 0..=ny {
        for i in 0..n {
            by_weights[layout.by(i, j)] = h2 * edge(j, ny);
        }
    }
    let interior_count = interior.iter().filter(|&&b| b).count();
    Ok(Domain {
        kind: DomainKind::Rectangle { width, height },
        layout,
        n,
        h,
        origin: (0.0, 0.0),
        interior,
        node_weights,
        bx_weights,
        by_weights,
        bx_inside: vec![true; layout.bx_count()],
        by_inside: vec![true; layout.by_count()],
        arms: vec![[1.0; 4]; layout.node_count()],
        interior_count,
    })
}

fn in_annulus(r2: f64) -> bool {
    r2 > ANNULUS_INNER * ANNULUS_INNER && r2 < 2.0
}

/// Smallest `s > 0` with `|p + s * step| = 1` or `sqrt 2`.
fn ray_to_circles(px: f64, py: f64, dx: f64, dy: f64) -> f64 {
    let a = dx * dx + dy * dy;
    let b = 2.0 * (px * dx + py * dy);
    let mut best = f64::INFINITY;
    for target in [1.0, 2.0] {
        let c = px * px + py * py - target;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        for s in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
            if s > 0.0 && s < best {
                best = s;
            }
        }
    }
    best
}

fn build_annulus(n: usize) -> Domain {
    let layout = StaggeredLayout { nx: n, ny: n };
    let half_h = ANNULUS_OUTER / n as f64;
    let h = 2.0 * half_h;
    let h2 = h * h;
    // (2i - n) * h/2 keeps the grid exactly symmetric about the origin.
    let coord = |k: usize| (2.0 * k as f64 - n as f64) * half_h;
    let mid = |k: usize| (2.0 * k as f64 + 1.0 - n as f64) * half_h;

    let mut interior = vec![false; layout.node_count()];
    let mut node_weights = vec![0.0; layout.node_count()];
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (coord(i), coord(j));
            let r2 = x * x + y * y;
            let r = r2.sqrt();
            let k = layout.node(i, j);
            interior[k] = r > ANNULUS_INNER + half_h && r < ANNULUS_OUTER - half_h;
            if in_annulus(r2) {
                node_weights[k] = h2;
            }
        }
    }

    let mut bx_weights = vec![0.0; layout.bx_count()];
    let mut bx_inside = vec![false; layout.bx_count()];
    for j in 0..n {
        for i in 0..=n {
            let (x, y) = (coord(i), mid(j));
            let k = layout.bx(i, j);
            if in_annulus(x * x + y * y) {
                bx_weights[k] = h2;
                bx_inside[k] = true;
            }
        }
    }
    let mut by_weights = vec![0.0; layout.by_count()];
    let mut by_inside = vec![false; layout.by_count()];
    for j in 0..=n {
        for i in 0..n {
            let (x, y) = (mid(i), coord(j));
            let k = layout.by(i, j);
            if in_annulus(x * x + y * y) {
                by_weights[k] = h2;
                by_inside[k] = true;
            }
        }
    }

    let mut arms = vec![[1.0; 4]; layout.node_count()];
    let steps: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    for j in 1..n {
        for i in 1..n {
            let k = layout.node(i, j);
            if !interior[k] {
                continue;
            }
            let (x, y) = (coord(i), coord(j));
            for (dir, (di, dj)) in steps.iter().enumerate() {
                let ni = (i as isize + di) as usize;
                let nj = (j as isize + dj) as usize;
                if !interior[layout.node(ni, nj)] {
                    arms[k][dir] = ray_to_circles(x, y, *di as f64 * h, *dj as f64 * h);
                }
            }
        }
    }

    let interior_count = interior.iter().filter(|&&b| b).count();
    Domain {
        kind: DomainKind::Annulus,
        layout,
        n,
        h,
        origin: (-ANNULUS_OUTER, -ANNULUS_OUTER),
        interior,
        node_weights,
        bx_weights,
        by_weights,
        bx_inside,
        by_inside,
        arms,
        interior_count,
    }
}

impl Domain {
    pub fn nx(&self) -> usize {
        self.layout.nx
    }
    pub fn ny(&self) -> usize {
        self.layout.ny
    }
    pub fn node_count(&self) -> usize {
        self.layout.node_count()
    }
    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.kind {
            DomainKind::Annulus => (2.0 * i as f64 - self.layout.nx as f64) * 0.5 * self.h,
            DomainKind::Rectangle { .. } => i as f64 * self.h,
        }
    }
    pub fn y(&self, j: usize) -> f64 {
        match self.kind {
            DomainKind::Annulus => (2.0 * j as f64 - self.layout.ny as f64) * 0.5 * self.h,
            DomainKind::Rectangle { .. } => j as f64 * self.h,
        }
    }
    pub fn node_xy(&self, k: usize) -> (f64, f64) {
        let cols = self.layout.node_cols();
        (self.x(k % cols), self.y(k / cols))
    }
    pub fn bx_xy(&self, k: usize) -> (f64, f64) {
        let cols = self.layout.node_cols();
        (self.x(k % cols), self.y(k / cols) + 0.5 * self.h)
    }
    pub fn by_xy(&self, k: usize) -> (f64, f64) {
        let cols = self.layout.nx;
        (self.x(k % cols) + 0.5 * self.h, self.y(k / cols))
    }
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Nodal field sampled from `f` on interior nodes, zero elsewhere.
    pub fn sample_interior(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.node_count())
            .map(|k| {
                if self.interior[k] {
                    let (x, y) = self.node_xy(k);
                    f(x, y)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn zero_boundary(&self, field: &mut [f64]) {
        for (v, &inside) in field.iter_mut().zip(&self.interior) {
            if !inside {
                *v = 0.0;
            }
        }
    }

    pub fn node_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let l = &self.layout;
        reduce::weighted_dot(l.node_rows(), l.node_cols(), &self.node_weights, a, b)
    }

    pub fn face_dot(&self, ax: &[f64], ay: &[f64], bx: &[f64], by: &[f64]) -> f64 {
        let l = &self.layout;
        let x = reduce::weighted_dot(l.ny, l.nx + 1, &self.bx_weights, ax, bx);
        let y = reduce::weighted_dot(l.ny + 1, l.nx, &self.by_weights, ay, by);
        x + y
    }

    /// Exact area of the physical domain.
    pub fn exact_area(&self) -> f64 {
        match self.kind {
            DomainKind::Rectangle { width, height } => width * height,
            DomainKind::Annulus => std::f64::consts::PI,
        }
    }
}

/// Quadrature of a nodal field over the domain, in fixed row-major pairwise
/// order.
pub fn integrate_nodal(field: &[f64], dom: &Domain) -> f64 {
    let l = &dom.layout;
    let w = &dom.node_weights;
    reduce::grid_sum(l.node_rows(), l.node_cols(), |k| field[k] * w[k])
}
