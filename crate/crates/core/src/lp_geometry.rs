//! Vector arithmetic in `l_p^d` and its dual `l_q^d`.
//!
//! Only the smooth range `1 < p < inf` is supported. In that range every
//! non-zero vector has exactly one norming functional, given coordinate-wise by
//!
//! ```text
//! x*_i = |x_i|^(p-1) sgn(x_i) / ||x||_p^(p-1)
//! ```
//!
//! which is also the derivative of the norm at `x`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Hölder exponent `p` in `(1, inf)` together with its conjugate `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LpExponent {
    p: f64,
    q: f64,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::invalid(format!(
                "exponent p must lie in (1, inf), got {p}"
            )));
        }
        Ok(LpExponent { p, q: conjugate(p) })
    }

    /// The exponent whose conjugate is `q`, i.e. the primal space of `l_q`.
    pub fn from_dual(q: f64) -> Result<Self> {
        Ok(LpExponent::new(q)?.dual())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Swaps the roles of `p` and `q`.
    pub fn dual(&self) -> Self {
        LpExponent {
            p: self.q,
            q: self.p,
        }
    }
}

impl TryFrom<f64> for LpExponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        LpExponent::new(p)
    }
}

impl From<LpExponent> for f64 {
    fn from(e: LpExponent) -> f64 {
        e.p
    }
}

/// `p/(p-1)`; exact for dyadic-friendly pairs such as `3 <-> 1.5`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// A point of `l_p^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point must have at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {c}")));
        }
        Ok(Point { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Point {
            coords: vec![0.0; dim.max(1)],
        }
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        check_dims(self.dim(), other.dim())?;
        Ok(Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        check_dims(self.dim(), other.dim())?;
        Ok(Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// Zero-pads to `dim` coordinates. Never truncates.
    pub fn padded(&self, dim: usize) -> Point {
        let mut coords = self.coords.clone();
        if dim > coords.len() {
            coords.resize(dim, 0.0);
        }
        Point { coords }
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}

/// A linear functional on `l_p^d`, i.e. an element of `l_q^d`.
///
/// `exponent` is the exponent of the primal space; norms of dual vectors are
/// taken with `exponent.q()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    coords: Vec<f64>,
    exponent: LpExponent,
}

impl DualVector {
    pub fn new(coords: Vec<f64>, exponent: LpExponent) -> Result<Self> {
        let coords = Point::new(coords)?.into_coords();
        Ok(DualVector { coords, exponent })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn exponent(&self) -> LpExponent {
        self.exponent
    }

    /// The dual norm `||f||_q`.
    pub fn norm(&self) -> f64 {
        norm_slice(&self.coords, self.exponent.q())
    }

    /// Reinterprets the functional as a point of `l_q^d` (whose dual is `l_p^d`).
    pub fn to_point(&self) -> Point {
        Point {
            coords: self.coords.clone(),
        }
    }

    pub fn padded(&self, dim: usize) -> DualVector {
        let mut coords = self.coords.clone();
        if dim > coords.len() {
            coords.resize(dim, 0.0);
        }
        DualVector {
            coords,
            exponent: self.exponent,
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// `(sum |x_i|^p)^(1/p)` on a raw slice, with the largest magnitude factored out
/// so that large `p` neither overflows nor underflows.
pub fn norm_slice(x: &[f64], p: f64) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s: f64 = x.iter().map(|c| (c / scale).powi(2)).sum();
        return scale * s.sqrt();
    }
    let s: f64 = x.iter().map(|c| (c.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

pub fn lp_norm(x: &Point, p: LpExponent) -> f64 {
    norm_slice(&x.coords, p.p())
}

/// `||x - y||_p`.
pub fn lp_distance(x: &Point, y: &Point, p: LpExponent) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    let diff: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a - b).collect();
    Ok(norm_slice(&diff, p.p()))
}

/// The duality pairing `<f, x> = sum f_i x_i`.
pub fn pairing(f: &DualVector, x: &Point) -> Result<f64> {
    check_dims(f.dim(), x.dim())?;
    Ok(dot(&f.coords, &x.coords))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Writes the normalized duality map of `x` into `out`; returns `||x||_p`.
/// Leaves `out` untouched and returns 0 when `x = 0`.
pub(crate) fn norming_functional_into(x: &[f64], p: f64, out: &mut [f64]) -> f64 {
    let norm = norm_slice(x, p);
    if norm == 0.0 {
        return 0.0;
    }
    for (o, &c) in out.iter_mut().zip(x) {
        let y = c / norm;
        // sgn(0) * 0^(p-1) = 0
        *o = if y == 0.0 {
            0.0
        } else if p == 2.0 {
            y
        } else {
            y.signum() * y.abs().powf(p - 1.0)
        };
    }
    norm
}

/// The unique `x*` with `<x*, x> = ||x||_p` and `||x*||_q = 1`.
pub fn norming_functional(x: &Point, p: LpExponent) -> Result<DualVector> {
    if x.is_zero() {
        return Err(Error::SingularInput(
            "the origin has no unique norming functional".into(),
        ));
    }
    let mut coords = vec![0.0; x.dim()];
    norming_functional_into(&x.coords, p.p(), &mut coords);
    Ok(DualVector {
        coords,
        exponent: p,
    })
}

/// `lim_{t->0} (||x + t h|| - ||x||) / t`, evaluated through the norming functional.
pub fn directional_derivative(x: &Point, h: &Point, p: LpExponent) -> Result<f64> {
    check_dims(x.dim(), h.dim())?;
    let f = norming_functional(x, p)?;
    pairing(&f, h)
}
