//! Steiner minimal trees for small instances: Fermat points, topology
//! enumeration, coordinate optimization and certificate cross-checks.

mod mst;
mod optimize;
pub mod topology;

use rayon::prelude::*;

use crate::certificates::{certify_tree_capped, TreeCertificate, DEFAULT_MAX_SUBSETS};
use crate::degree_bounds::degree_bound;
use crate::error::{Error, Result};
use crate::lp_geometry::{lp_distance, norm_slice, norming_functional_into, LpExponent, Point};

pub use mst::minimum_spanning_tree;
pub use optimize::{optimize_topology, CONTRACTION_THRESHOLD, MAX_ITERATIONS, SMOOTHING_LEVELS};
pub use topology::{
    enumerate_topologies, Topology, MAX_ENUMERATION_TERMINALS, MIN_ENUMERATION_TERMINALS,
};

/// A tree embedded in `l_p^d`: nodes `0..n` are the terminals, the remaining
/// nodes are Steiner points.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerTree {
    topology: Topology,
    terminals: Vec<Point>,
    steiner: Vec<Point>,
    exponent: LpExponent,
    length: f64,
    certificate: Option<TreeCertificate>,
}

impl SteinerTree {
    pub fn new(
        topology: Topology,
        terminals: Vec<Point>,
        steiner: Vec<Point>,
        p: LpExponent,
    ) -> Result<Self> {
        if terminals.len() != topology.terminal_count() || steiner.len() != topology.steiner_count()
        {
            return Err(Error::invalid(format!(
                "topology expects {} terminals and {} Steiner points, got {} and {}",
                topology.terminal_count(),
                topology.steiner_count(),
                terminals.len(),
                steiner.len()
            )));
        }
        let dim = terminals[0].dim();
        if terminals.iter().chain(&steiner).any(|x| x.dim() != dim) {
            return Err(Error::invalid("tree nodes have mixed dimensions"));
        }
        let mut tree = SteinerTree {
            topology,
            terminals,
            steiner,
            exponent: p,
            length: 0.0,
            certificate: None,
        };
        tree.length = tree.recompute_length();
        Ok(tree)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn terminals(&self) -> &[Point] {
        &self.terminals
    }

    pub fn steiner(&self) -> &[Point] {
        &self.steiner
    }

    pub fn exponent(&self) -> LpExponent {
        self.exponent
    }

    pub fn dim(&self) -> usize {
        self.terminals[0].dim()
    }

    pub fn node(&self, i: usize) -> &Point {
        let n = self.terminals.len();
        if i < n {
            &self.terminals[i]
        } else {
            &self.steiner[i - n]
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Sum of edge lengths, evaluated afresh.
    pub fn recompute_length(&self) -> f64 {
        self.topology
            .edges()
            .iter()
            .map(|&(u, v)| {
                let d: Vec<f64> = self
                    .node(u)
                    .coords()
                    .iter()
                    .zip(self.node(v).coords())
                    .map(|(a, b)| a - b)
                    .collect();
                norm_slice(&d, self.exponent.p())
            })
            .sum()
    }

    pub fn certificate(&self) -> Option<&TreeCertificate> {
        self.certificate.as_ref()
    }

    pub fn set_certificate(&mut self, c: TreeCertificate) {
        self.certificate = Some(c);
    }

    /// Nodes whose attached certificate is refuted. For a solver output these
    /// point at optimization error rather than at a better tree.
    pub fn numerical_warnings(&self) -> Vec<usize> {
        self.certificate
            .as_ref()
            .map(|c| c.refuted_nodes().map(|n| n.node).collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermatPoint {
    pub point: Point,
    /// Terminal the minimizer coincides with, if any.
    pub absorbed: Option<usize>,
    /// For an absorbed point, `||sum_{i != j} J(a_i - a_j)||_q` divided by the
    /// multiplicity of `a_j`; otherwise the balancing residual at `point`.
    pub residual: f64,
}

/// Minimizer of `sum_i ||a_i - x||_p`.
pub fn fermat_point(points: &[Point], p: LpExponent, tol: f64) -> Result<FermatPoint> {
    if points.is_empty() {
        return Err(Error::invalid("fermat_point needs at least one point"));
    }
    let dim = points[0].dim();
    if points.iter().any(|a| a.dim() != dim) {
        return Err(Error::invalid("points have mixed dimensions"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let first = &points[0];
    if points.iter().all(|a| a == first) {
        return Ok(FermatPoint {
            point: first.clone(),
            absorbed: Some(0),
            residual: 0.0,
        });
    }
    let distinct: Vec<&Point> = {
        let mut v: Vec<&Point> = Vec::new();
        for a in points {
            if !v.contains(&a) {
                v.push(a);
            }
        }
        v
    };
    if points.len() == 2 {
        let mid = points[0].add(&points[1])?.scale(0.5);
        return Ok(FermatPoint {
            point: mid,
            absorbed: None,
            residual: 0.0,
        });
    }

    let mut best_absorption: Option<(usize, f64)> = None;
    for (j, aj) in points.iter().enumerate() {
        if points[..j].contains(aj) {
            continue;
        }
        let crit = absorption_criterion(points, aj, p);
        if crit <= 1.0 + tol {
            return Ok(FermatPoint {
                point: aj.clone(),
                absorbed: Some(j),
                residual: crit,
            });
        }
        if best_absorption.is_none_or(|(_, c)| crit < c) {
            best_absorption = Some((j, crit));
        }
    }

    if distinct.len() < 3 {
        // two distinct locations with unequal weights: the heavier one absorbs
        let (j, crit) = best_absorption.expect("at least one candidate");
        return Err(Error::Numeric(format!(
            "no absorbing point found (best candidate {j}, criterion {crit})"
        )));
    }

    let star = Topology::star(points.len())?;
    let tree = match optimize_topology(&star, points, p, tol) {
        Ok(t) => t,
        Err(Error::NoConvergence { residual, .. }) => {
            return Err(Error::Numeric(format!(
                "Fermat point iteration stalled with residual {residual:e}"
            )))
        }
        Err(e) => return Err(e),
    };
    if tree.topology().steiner_count() == 0 {
        // the optimizer contracted onto a terminal that the strict test missed
        let j = (0..points.len())
            .find(|&j| tree.topology().degree(j) == points.len() - 1)
            .ok_or_else(|| Error::Numeric("star contracted to a non-star tree".into()))?;
        return Ok(FermatPoint {
            point: points[j].clone(),
            absorbed: Some(j),
            residual: absorption_criterion(points, &points[j], p),
        });
    }
    let x = tree.steiner()[0].clone();
    let mut sum = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for a in points {
        let d: Vec<f64> = a
            .coords()
            .iter()
            .zip(x.coords())
            .map(|(u, v)| u - v)
            .collect();
        norming_functional_into(&d, p.p(), &mut buf);
        sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
    }
    let residual = norm_slice(&sum, p.q());
    if residual > tol {
        return Err(Error::Numeric(format!(
            "Fermat point residual {residual:e} exceeds {tol:e}"
        )));
    }
    Ok(FermatPoint {
        point: x,
        absorbed: None,
        residual,
    })
}

/// `||sum_{a_i != a_j} J(a_i - a_j)||_q / mult(a_j)`; the minimizer sits at
/// `a_j` iff this is at most 1.
fn absorption_criterion(points: &[Point], aj: &Point, p: LpExponent) -> f64 {
    let dim = aj.dim();
    let mut sum = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    let mut mult = 0usize;
    for a in points {
        if a == aj {
            mult += 1;
            continue;
        }
        let d: Vec<f64> = a
            .coords()
            .iter()
            .zip(aj.coords())
            .map(|(u, v)| u - v)
            .collect();
        norming_functional_into(&d, p.p(), &mut buf);
        sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
    }
    norm_slice(&sum, p.q()) / mult as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Gradient tolerance for the coordinate optimizer.
    pub tol: f64,
    /// Tolerance of the certificates attached to the result.
    pub certify_tol: f64,
    pub max_subsets: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            certify_tol: 1e-6,
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

/// Relative length difference below which two candidate trees tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest node degree the search admits in `l_p^d`.
pub fn degree_cap(p: LpExponent, dim: usize) -> Result<usize> {
    if dim == 1 {
        return Ok(2);
    }
    Ok(degree_bound(p.p(), dim)?.upper as usize)
}

/// Shortest tree over all admissible topologies on `terminals`, with
/// per-node certificates attached.
pub fn solve_smt(terminals: &[Point], p: LpExponent, opts: &SolveOptions) -> Result<SteinerTree> {
    let n = terminals.len();
    if !(2..=MAX_ENUMERATION_TERMINALS).contains(&n) {
        return Err(Error::invalid(format!(
            "solve_smt supports 2..={MAX_ENUMERATION_TERMINALS} terminals, got {n}"
        )));
    }
    let dim = terminals[0].dim();
    if terminals.iter().any(|a| a.dim() != dim) {
        return Err(Error::invalid("terminals have mixed dimensions"));
    }
    for i in 0..n {
        for j in 0..i {
            if terminals[i] == terminals[j] {
                return Err(Error::invalid(format!("terminals {j} and {i} coincide")));
            }
        }
    }

    let mut tree = if n == 2 {
        SteinerTree::new(
            Topology::new(2, 0, vec![(0, 1)])?,
            terminals.to_vec(),
            vec![],
            p,
        )?
    } else {
        let cap = degree_cap(p, dim)?;
        let topologies = enumerate_topologies(n, cap, cap)?;
        let results: Vec<Result<(SteinerTree, Option<f64>)>> = topologies
            .par_iter()
            .map(|t| match optimize_topology(t, terminals, p, opts.tol) {
                Ok(tree) => Ok((tree, None)),
                Err(Error::NoConvergence { best, residual }) => Ok((*best, Some(residual))),
                Err(e) => Err(e),
            })
            .collect();
        // sequential reduction in enumeration order keeps the choice deterministic
        let mut best: Option<(SteinerTree, Option<f64>)> = None;
        for res in results {
            let (cand, stalled) = res?;
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    let slack = TIE_TOLERANCE * b.length().max(cand.length());
                    cand.length() < b.length() - slack
                        || (cand.length() <= b.length() + slack
                            && cand.topology().steiner_count() < b.topology().steiner_count())
                }
            };
            if better {
                best = Some((cand, stalled));
            }
        }
        let (tree, stalled) = best.expect("enumeration always yields spanning paths");
        if let Some(residual) = stalled {
            return Err(Error::NoConvergence {
                best: Box::new(tree),
                residual,
            });
        }
        tree
    };
    let cert = certify_tree_capped(&tree, p, opts.certify_tol, opts.max_subsets)?;
    tree.set_certificate(cert);
    Ok(tree)
}

/// Total `l_p` length of a tree given by explicit edges over `nodes`.
pub fn edge_length_sum(nodes: &[Point], edges: &[(usize, usize)], p: LpExponent) -> Result<f64> {
    edges
        .iter()
        .map(|&(u, v)| lp_distance(&nodes[u], &nodes[v], p))
        .sum()
}
