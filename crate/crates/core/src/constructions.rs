//! Explicit collapsing families and the point configurations they certify.

use serde::{Deserialize, Serialize};

use crate::certificates::{check_balancing, check_collapsing, UnitFamily, DEFAULT_TOLERANCE};
use crate::degree_bounds::g;
use crate::error::{Error, Result};
use crate::lp_geometry::{norm_slice, norming_functional, LpExponent, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    /// `3^(-1/q) (±1, ±1, ±1)` with an even number of minus signs, in `l_q^3`.
    FourPoint,
    /// Normalized `(d-1) e_i - sum_{j != i} e_j`, in `l_q^d`.
    Simplex,
}

/// Verdicts a construction is known to satisfy at its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub balanced: bool,
    pub collapsing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub kind: ConstructionKind,
    pub dim: usize,
    pub q: f64,
    pub family: UnitFamily,
    pub claims: Claims,
}

/// `log 3 / log 2`: the four-point family collapses iff `q` is at most this.
pub fn four_point_q_limit() -> f64 {
    3f64.ln() / 2f64.ln()
}

pub fn four_point_config(q: f64) -> Result<Construction> {
    let exponent = LpExponent::from_dual(q)?;
    let s = 3f64.powf(-1.0 / q);
    let signs = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let rows = signs
        .iter()
        .map(|r| r.iter().map(|c| c * s).collect())
        .collect();
    let family = UnitFamily::from_rows(rows, exponent)?;
    Ok(Construction {
        kind: ConstructionKind::FourPoint,
        dim: 3,
        q,
        family,
        claims: Claims {
            balanced: true,
            collapsing: q <= four_point_q_limit(),
        },
    })
}

pub fn simplex_config(d: usize, q: f64) -> Result<Construction> {
    if d < 3 {
        return Err(Error::invalid(format!(
            "simplex construction needs d >= 3, got {d}"
        )));
    }
    let exponent = LpExponent::from_dual(q)?;
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut r = vec![-1.0; d];
            r[i] = (d - 1) as f64;
            let n = norm_slice(&r, q);
            r.iter().map(|c| c / n).collect()
        })
        .collect();
    let family = UnitFamily::from_rows(rows, exponent)?;
    Ok(Construction {
        kind: ConstructionKind::Simplex,
        dim: d,
        q,
        family,
        claims: Claims {
            balanced: true,
            collapsing: collapsing_holds_simplex(d, q)?,
        },
    })
}

/// Closed-form collapsing test for [`simplex_config`]: a `k`-subset sum has
/// `q`-th power norm `g(k,d,q) / g(1,d,q)`, and `g` is symmetric in `k <-> d-k`.
pub fn collapsing_holds_simplex(d: usize, q: f64) -> Result<bool> {
    if d < 3 {
        return Err(Error::invalid(format!(
            "simplex construction needs d >= 3, got {d}"
        )));
    }
    let g1 = g(1, d, q)?;
    for k in 2..=d / 2 {
        if g(k, d, q)? > g1 * (1.0 + 1e-12) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A star centered at the origin together with the exponent it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct StarInstance {
    pub center: Point,
    pub terminals: Vec<Point>,
    pub exponent: LpExponent,
}

impl StarInstance {
    pub fn star_length(&self) -> f64 {
        self.terminals
            .iter()
            .map(|t| norm_slice(t.coords(), self.exponent.p()))
            .sum()
    }
}

/// Pulls a collapsing dual family back to terminals `a_i` at unit distance
/// from the origin with norming functionals `x_i`.
///
/// The origin is then an SMT vertex of the star; if the family is also
/// balanced it is an SMT Steiner point.
pub fn make_star_instance(family: &UnitFamily, dim: usize, tol: f64) -> Result<StarInstance> {
    let collapse = check_collapsing(family, tol)?;
    if !collapse.collapsing {
        return Err(Error::Precondition(format!(
            "family is not collapsing (subset {:?} has norm {})",
            collapse.worst_subset, collapse.worst_subset_norm
        )));
    }
    let family = family.padded(dim);
    let dual = family.exponent().dual();
    let terminals = family
        .vectors()
        .iter()
        .map(|x| {
            // the l_q duality map inverts the l_p one on unit spheres
            let a = norming_functional(&x.to_point(), dual)?;
            Point::new(a.coords().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StarInstance {
        center: Point::origin(family.dim()),
        terminals,
        exponent: family.exponent(),
    })
}

impl Construction {
    pub fn star_instance(&self) -> Result<StarInstance> {
        make_star_instance(&self.family, self.dim, DEFAULT_TOLERANCE)
    }

    /// Re-derives both verdicts by direct checks; should agree with `claims`.
    pub fn verify(&self, tol: f64) -> Result<Claims> {
        Ok(Claims {
            balanced: check_balancing(&self.family, tol)?.balanced,
            collapsing: check_collapsing(&self.family, tol)?.collapsing,
        })
    }
}
