//! Points in R^2 or R^3 stored as `[f64; 3]`; unused trailing coordinates are zero.

pub type Point = [f64; 3];

pub const ORIGIN: Point = [0.0; 3];

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// `a + s b`
#[inline]
pub fn axpy(a: &Point, s: f64, b: &Point) -> Point {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub fn normalize(a: &Point) -> Point {
    let r = norm(a);
    scale(a, 1.0 / r)
}

/// Builds a point from the first `n` entries of a slice.
pub fn from_slice(x: &[f64]) -> Point {
    let mut p = ORIGIN;
    p[..x.len()].copy_from_slice(x);
    p
}

/// Unit vector along axis `i`.
pub fn unit(i: usize) -> Point {
    let mut p = ORIGIN;
    p[i] = 1.0;
    p
}

/// Norm of the tangential part `x'` (all but the last of `n` coordinates).
#[inline]
pub fn tangential_norm(x: &Point, n: usize) -> f64 {
    x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt()
}
