//! Regular grids, sampled complex fields, interpolation and finite differences.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub origin: Point,
    pub spacing: f64,
    /// Node counts per axis; entries beyond `dim` are 1.
    pub shape: [usize; 3],
}

impl Grid {
    pub fn new(dim: usize, origin: Point, spacing: f64, shape: [usize; 3]) -> Result<Grid> {
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("grid spacing must be positive, got {spacing}")));
        }
        if !(dim == 2 || dim == 3) {
            return Err(Error::Domain(format!("dimension {dim} unsupported")));
        }
        let mut shape = shape;
        for s in shape.iter_mut().skip(dim) {
            *s = 1;
        }
        Ok(Grid { dim, origin, spacing, shape })
    }

    /// Grid with nodes on the lattice `anchor + spacing Z^n` covering `[lo, hi]`
    /// plus `pad` extra nodes on every side.
    pub fn covering(dim: usize, lo: &Point, hi: &Point, anchor: &Point, spacing: f64, pad: usize) -> Result<Grid> {
        let mut origin = [0.0; 3];
        let mut shape = [1; 3];
        for i in 0..dim {
            let a = ((lo[i] - anchor[i]) / spacing - 1e-9).floor() as i64 - pad as i64;
            let b = ((hi[i] - anchor[i]) / spacing + 1e-9).ceil() as i64 + pad as i64;
            origin[i] = anchor[i] + a as f64 * spacing;
            shape[i] = (b - a + 1) as usize;
        }
        Grid::new(dim, origin, spacing, shape)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, m: [usize; 3]) -> usize {
        (m[2] * self.shape[1] + m[1]) * self.shape[0] + m[0]
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let r = idx / self.shape[0];
        [i, r % self.shape[1], r / self.shape[1]]
    }

    #[inline]
    pub fn node(&self, m: [usize; 3]) -> Point {
        let mut p = self.origin;
        for i in 0..self.dim {
            p[i] += m[i] as f64 * self.spacing;
        }
        p
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        self.node(self.multi_index(idx))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Upper corner of the node lattice.
    pub fn far_corner(&self) -> Point {
        let mut m = [0; 3];
        for i in 0..self.dim {
            m[i] = self.shape[i] - 1;
        }
        self.node(m)
    }

    /// Neighbour of node `m` displaced by `delta` along `axis`, if inside the grid.
    #[inline]
    pub fn neighbor(&self, m: [usize; 3], axis: usize, delta: i64) -> Option<[usize; 3]> {
        let v = m[axis] as i64 + delta;
        if v < 0 || v >= self.shape[axis] as i64 {
            return None;
        }
        let mut out = m;
        out[axis] = v as usize;
        Some(out)
    }

    /// Fraction of the cell centred at each node lying inside a region, by
    /// midpoint supersampling with `m` sub-samples per axis. Cells whose centre
    /// is farther than a cell diagonal from the boundary are classified by the
    /// centre alone; `near_boundary` decides which cells get supersampled.
    pub fn cell_fractions(
        &self,
        contains: &(dyn Fn(&Point) -> bool + Sync),
        near_boundary: &(dyn Fn(&Point, f64) -> bool + Sync),
        m: usize,
    ) -> Vec<f64> {
        let h = self.spacing;
        let diag = h * (self.dim as f64).sqrt();
        let sub = m.pow(self.dim as u32) as f64;
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let c = self.point(idx);
                if !near_boundary(&c, diag) {
                    return if contains(&c) { 1.0 } else { 0.0 };
                }
                let mut count = 0usize;
                let offs: Vec<f64> = (0..m).map(|j| ((j as f64 + 0.5) / m as f64 - 0.5) * h).collect();
                let kmax = if self.dim == 3 { m } else { 1 };
                for a in &offs {
                    for b in &offs {
                        for kk in 0..kmax {
                            let mut p = c;
                            p[0] += a;
                            p[1] += b;
                            if self.dim == 3 {
                                p[2] += offs[kk];
                            }
                            if contains(&p) {
                                count += 1;
                            }
                        }
                    }
                }
                count as f64 / sub
            })
            .collect()
    }
}

/// Lagrange weights of the four nodes `0, 1, 2, 3` at position `t`.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<C>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> GridField {
        let n = grid.len();
        GridField { grid, values: vec![C::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> C + Sync) -> GridField {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        GridField { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Tensor cubic Lagrange interpolation; clamps the stencil at grid edges.
    pub fn interpolate(&self, x: &Point) -> C {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut w = [[0.0; 4]; 3];
        for i in 0..3 {
            if i >= g.dim {
                w[i] = [1.0, 0.0, 0.0, 0.0];
                continue;
            }
            let t = (x[i] - g.origin[i]) / g.spacing;
            let hi = g.shape[i].saturating_sub(4) as i64;
            let b = ((t.floor() as i64) - 1).clamp(0, hi);
            base[i] = b as usize;
            w[i] = cubic_weights(t - b as f64);
        }
        let span = |i: usize| if i < g.dim { 4.min(g.shape[i]) } else { 1 };
        let mut s = C::new(0.0, 0.0);
        for c in 0..span(2) {
            for b in 0..span(1) {
                let wbc = w[1][b] * w[2][c];
                if wbc == 0.0 {
                    continue;
                }
                for a in 0..span(0) {
                    let idx = g.index([base[0] + a, base[1] + b, base[2] + c]);
                    s += self.values[idx] * (w[0][a] * wbc);
                }
            }
        }
        s
    }

    /// Outward normal derivative at `x` from samples along the inward normal,
    /// one-sided and second order.
    pub fn normal_derivative(&self, x: &Point, outward: &Point) -> C {
        let h = self.grid.spacing;
        let g0 = self.interpolate(x);
        let g1 = self.interpolate(&crate::point::axpy(x, -h, outward));
        let g2 = self.interpolate(&crate::point::axpy(x, -2.0 * h, outward));
        (g0 * 3.0 - g1 * 4.0 + g2) / (2.0 * h)
    }

    /// Second-order five/seven-point Laplacian at an interior node; `None` at the edge.
    pub fn laplacian_at(&self, m: [usize; 3]) -> Option<C> {
        let g = &self.grid;
        let c = self.values[g.index(m)];
        let mut s = C::new(0.0, 0.0);
        for axis in 0..g.dim {
            let p = g.neighbor(m, axis, 1)?;
            let q = g.neighbor(m, axis, -1)?;
            s += self.values[g.index(p)] + self.values[g.index(q)] - c * 2.0;
        }
        Some(s / (g.spacing * g.spacing))
    }
}

/// A grid field restricted to the nodes flagged by `mask`, with a Hölder exponent.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub field: GridField,
    pub mask: Vec<bool>,
    pub alpha: f64,
}

impl SampledFunction {
    pub fn new(field: GridField, mask: Vec<bool>, alpha: f64) -> Result<SampledFunction> {
        if mask.len() != field.values.len() {
            return Err(Error::Domain("mask length does not match the grid".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
        }
        if field.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("sampled values must be finite".into()));
        }
        Ok(SampledFunction { field, mask, alpha })
    }

    /// Samples `f` on every node; `inside` decides the mask.
    pub fn sample(grid: Grid, f: impl Fn(&Point) -> C + Sync, inside: impl Fn(&Point) -> bool, alpha: f64) -> Result<SampledFunction> {
        let field = GridField::from_fn(grid, f);
        let mask = field.grid.points().map(|p| inside(&p)).collect();
        SampledFunction::new(field, mask, alpha)
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn spacing(&self) -> f64 {
        self.field.grid.spacing
    }

    /// Masked nodes as `(point, value)` pairs.
    pub fn masked(&self) -> Vec<(Point, C)> {
        let g = &self.field.grid;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(i, _)| (g.point(i), self.field.values[i]))
            .collect()
    }

    pub fn interpolate(&self, x: &Point) -> C {
        self.field.interpolate(x)
    }
}
