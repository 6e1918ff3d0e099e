//! Executable optimality certificates for stars in `l_p^d`.
//!
//! For a star joining `a_1..a_m` to a center `c`, let `a_i*` be the norming
//! functional of `a_i - c`. The star is a Steiner minimal tree of its leaves
//! (with `c` a Steiner point) iff the functionals are *balanced*
//! (`sum a_i* = 0`) and *collapsing* (`||sum_{i in J} a_i*||_q <= 1` for every
//! subset `J`). If `c` is itself a terminal, collapsing alone is necessary and
//! sufficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_geometry::{norm_slice, norming_functional, DualVector, LpExponent, Point};
use crate::smt_solver::SteinerTree;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Families larger than this are refused by the subset enumerators unless a
/// larger cap is passed explicitly.
pub const DEFAULT_MAX_SUBSETS: usize = 25;

/// Hard ceiling on any caller-supplied cap.
const ABSOLUTE_MAX_SUBSETS: usize = 30;

/// Tolerance on `| ||x||_q - 1 |` for members of a [`UnitFamily`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Full resummation interval of the Gray-code walk, bounding drift of the running sum.
const RESYNC_INTERVAL: u64 = 1 << 12;

/// A finite family of unit vectors of `l_q^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFamily {
    vectors: Vec<DualVector>,
    exponent: LpExponent,
}

impl UnitFamily {
    pub fn new(vectors: Vec<DualVector>, exponent: LpExponent) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::invalid("a unit family needs at least one vector"));
        };
        let dim = first.dim();
        for (i, v) in vectors.iter().enumerate() {
            if v.dim() != dim {
                return Err(Error::invalid(format!(
                    "vector {i} has dimension {}, expected {dim}",
                    v.dim()
                )));
            }
            if v.exponent() != exponent {
                return Err(Error::invalid(format!(
                    "vector {i} has a different exponent"
                )));
            }
            let n = v.norm();
            if (n - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::invalid(format!(
                    "vector {i} has dual norm {n}, expected 1"
                )));
            }
        }
        Ok(UnitFamily { vectors, exponent })
    }

    /// Builds a family from raw coordinate rows interpreted in `l_q`.
    pub fn from_rows(rows: Vec<Vec<f64>>, exponent: LpExponent) -> Result<Self> {
        let vectors = rows
            .into_iter()
            .map(|r| DualVector::new(r, exponent))
            .collect::<Result<Vec<_>>>()?;
        UnitFamily::new(vectors, exponent)
    }

    pub fn vectors(&self) -> &[DualVector] {
        &self.vectors
    }

    pub fn exponent(&self) -> LpExponent {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for v in &self.vectors {
            for (a, b) in s.iter_mut().zip(v.coords()) {
                *a += b;
            }
        }
        s
    }

    pub fn subfamily(&self, indices: &[usize]) -> Result<UnitFamily> {
        let vectors = indices
            .iter()
            .map(|&i| {
                self.vectors
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        UnitFamily::new(vectors, self.exponent)
    }

    /// Zero-pads every member to `dim` coordinates.
    pub fn padded(&self, dim: usize) -> UnitFamily {
        UnitFamily {
            vectors: self.vectors.iter().map(|v| v.padded(dim)).collect(),
            exponent: self.exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub balanced: bool,
    /// `||sum x_i||_q`.
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseCheck {
    pub collapsing: bool,
    /// Lexicographically smallest subset attaining the largest subset-sum norm.
    pub worst_subset: Vec<usize>,
    pub worst_subset_norm: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Certified
        } else {
            Verdict::Refuted
        }
    }

    pub fn is_certified(self) -> bool {
        self == Verdict::Certified
    }
}

/// Which characterization was applied at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    /// Center is a Steiner point: balancing and collapsing are both required.
    Steiner,
    /// Center is a terminal: collapsing alone is required.
    Vertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub role: NodeRole,
    pub balanced: bool,
    pub balance_residual: f64,
    pub collapsing: bool,
    pub worst_subset: Vec<usize>,
    pub worst_subset_norm: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CertificateReport {
    pub fn from_checks(role: NodeRole, balance: BalanceCheck, collapse: CollapseCheck) -> Self {
        let ok = match role {
            NodeRole::Steiner => balance.balanced && collapse.collapsing,
            NodeRole::Vertex => collapse.collapsing,
        };
        CertificateReport {
            role,
            balanced: balance.balanced,
            balance_residual: balance.residual,
            collapsing: collapse.collapsing,
            worst_subset: collapse.worst_subset,
            worst_subset_norm: collapse.worst_subset_norm,
            tolerance: collapse.tolerance,
            verdict: Verdict::from_bool(ok),
        }
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be finite and >= 0, got {tol}"
        )));
    }
    Ok(())
}

pub fn check_balancing(fam: &UnitFamily, tol: f64) -> Result<BalanceCheck> {
    check_tolerance(tol)?;
    let residual = norm_slice(&fam.sum(), fam.exponent().q());
    Ok(BalanceCheck {
        balanced: residual <= tol,
        residual,
        tolerance: tol,
    })
}

/// Largest subset-sum norm over all `2^m` subsets, walked in Gray-code order.
///
/// Returns the maximal norm and the lexicographically smallest subset attaining it.
pub fn max_subset_sum(fam: &UnitFamily, max_subsets: usize) -> Result<(f64, Vec<usize>)> {
    let m = fam.len();
    let cap = max_subsets.min(ABSOLUTE_MAX_SUBSETS);
    if m > cap {
        return Err(Error::ResourceLimit(format!(
            "subset enumeration over {m} vectors exceeds the cap of {cap}"
        )));
    }
    let q = fam.exponent().q();
    let rows: Vec<&[f64]> = fam.vectors().iter().map(|v| v.coords()).collect();
    let d = fam.dim();

    let mut sum = vec![0.0; d];
    let mut mask: u64 = 0;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for step in 1..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if step % RESYNC_INTERVAL == 0 {
            sum.iter_mut().for_each(|s| *s = 0.0);
            for (i, row) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum.iter_mut().zip(*row).for_each(|(s, r)| *s += r);
                }
            }
        } else if mask >> bit & 1 == 1 {
            sum.iter_mut().zip(rows[bit]).for_each(|(s, r)| *s += r);
        } else {
            sum.iter_mut().zip(rows[bit]).for_each(|(s, r)| *s -= r);
        }
        let n = norm_slice(&sum, q);
        if n >= best.0 {
            let subset = mask_to_subset(mask);
            if n > best.0 || subset < best.1 {
                best = (n, subset);
            }
        }
    }
    Ok(best)
}

fn mask_to_subset(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

pub fn check_collapsing(fam: &UnitFamily, tol: f64) -> Result<CollapseCheck> {
    check_collapsing_capped(fam, tol, DEFAULT_MAX_SUBSETS)
}

pub fn check_collapsing_capped(
    fam: &UnitFamily,
    tol: f64,
    max_subsets: usize,
) -> Result<CollapseCheck> {
    check_tolerance(tol)?;
    let (worst_subset_norm, worst_subset) = max_subset_sum(fam, max_subsets)?;
    Ok(CollapseCheck {
        collapsing: worst_subset_norm <= 1.0 + tol,
        worst_subset,
        worst_subset_norm,
        tolerance: tol,
    })
}

/// Norming functionals of `a_i - center`.
pub fn star_family(center: &Point, neighbors: &[Point], p: LpExponent) -> Result<UnitFamily> {
    if neighbors.is_empty() {
        return Err(Error::invalid("a star needs at least one neighbor"));
    }
    let vectors = neighbors
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let diff = a.sub(center)?;
            if diff.is_zero() {
                return Err(Error::SingularInput(format!(
                    "neighbor {i} coincides with the center"
                )));
            }
            norming_functional(&diff, p)
        })
        .collect::<Result<Vec<_>>>()?;
    UnitFamily::new(vectors, p)
}

fn certify_star(
    role: NodeRole,
    center: &Point,
    neighbors: &[Point],
    p: LpExponent,
    tol: f64,
    max_subsets: usize,
) -> Result<CertificateReport> {
    let fam = star_family(center, neighbors, p)?;
    let balance = check_balancing(&fam, tol)?;
    let collapse = check_collapsing_capped(&fam, tol, max_subsets)?;
    Ok(CertificateReport::from_checks(role, balance, collapse))
}

/// Is the star from `center` an SMT of `neighbors` with `center` a Steiner point?
pub fn certify_steiner_point(
    center: &Point,
    neighbors: &[Point],
    p: LpExponent,
    tol: f64,
) -> Result<CertificateReport> {
    certify_star(
        NodeRole::Steiner,
        center,
        neighbors,
        p,
        tol,
        DEFAULT_MAX_SUBSETS,
    )
}

/// Is the star from `center` an SMT of `{center} ∪ neighbors`?
pub fn certify_vertex(
    center: &Point,
    neighbors: &[Point],
    p: LpExponent,
    tol: f64,
) -> Result<CertificateReport> {
    certify_star(
        NodeRole::Vertex,
        center,
        neighbors,
        p,
        tol,
        DEFAULT_MAX_SUBSETS,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCertificate {
    pub node: usize,
    pub report: CertificateReport,
}

/// Per-node certificates of an embedded tree.
///
/// Certifies that every star neighborhood is an SMT of its own endpoints. That
/// is necessary for the whole tree to be an SMT; it is not claimed sufficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeCertificate {
    pub nodes: Vec<NodeCertificate>,
    pub verdict: Verdict,
}

impl TreeCertificate {
    pub fn refuted_nodes(&self) -> impl Iterator<Item = &NodeCertificate> {
        self.nodes
            .iter()
            .filter(|n| !n.report.verdict.is_certified())
    }
}

pub fn certify_tree(tree: &SteinerTree, p: LpExponent, tol: f64) -> Result<TreeCertificate> {
    certify_tree_capped(tree, p, tol, DEFAULT_MAX_SUBSETS)
}

pub fn certify_tree_capped(
    tree: &SteinerTree,
    p: LpExponent,
    tol: f64,
    max_subsets: usize,
) -> Result<TreeCertificate> {
    let topo = tree.topology();
    let n = topo.terminal_count();
    for &(u, v) in topo.edges() {
        if tree.node(u).sub(tree.node(v))?.is_zero() {
            return Err(Error::DegenerateTopology(format!(
                "edge ({u}, {v}) has zero length; contract it first"
            )));
        }
    }
    let adjacency = topo.adjacency();
    let mut nodes = Vec::with_capacity(adjacency.len());
    for (node, nbrs) in adjacency.iter().enumerate() {
        let role = if node < n {
            NodeRole::Vertex
        } else {
            NodeRole::Steiner
        };
        let neighbors: Vec<Point> = nbrs.iter().map(|&j| tree.node(j).clone()).collect();
        if neighbors.is_empty() {
            // isolated terminal of a one-point instance
            continue;
        }
        let report = certify_star(role, tree.node(node), &neighbors, p, tol, max_subsets)?;
        nodes.push(NodeCertificate { node, report });
    }
    let ok = nodes.iter().all(|n| n.report.verdict.is_certified());
    Ok(TreeCertificate {
        nodes,
        verdict: Verdict::from_bool(ok),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_geometry::{lp_norm, pairing};
    use crate::smt_solver::Topology;

    fn exp(p: f64) -> LpExponent {
        LpExponent::new(p).unwrap()
    }

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn family(rows: &[&[f64]], p: f64) -> UnitFamily {
        UnitFamily::from_rows(rows.iter().map(|r| r.to_vec()).collect(), exp(p)).unwrap()
    }

    fn four_point(q: f64) -> UnitFamily {
        let s = 3f64.powf(-1.0 / q);
        let rows = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        UnitFamily::from_rows(
            rows.iter().map(|r| r.to_vec()).collect(),
            LpExponent::from_dual(q).unwrap(),
        )
        .unwrap()
    }

    /// Straightforward reference: every subset summed from scratch, in lexicographic order.
    fn brute_max_subset(fam: &UnitFamily) -> (f64, Vec<usize>) {
        let m = fam.len();
        let mut subsets: Vec<Vec<usize>> = (1u64..1 << m).map(mask_to_subset).collect();
        subsets.sort();
        let mut best = (f64::NEG_INFINITY, vec![]);
        for s in subsets {
            let mut sum = vec![0.0; fam.dim()];
            for &i in &s {
                for (a, b) in sum.iter_mut().zip(fam.vectors()[i].coords()) {
                    *a += b;
                }
            }
            let n = norm_slice(&sum, fam.exponent().q());
            if n > best.0 + 1e-12 {
                best = (n, s);
            }
        }
        best
    }

    #[test]
    fn family_rejects_non_unit_members() {
        let e = exp(2.0);
        let bad = DualVector::new(vec![1.0, 1.0], e).unwrap();
        assert!(matches!(
            UnitFamily::new(vec![bad], e),
            Err(Error::InvalidInput(_))
        ));
        assert!(UnitFamily::new(vec![], e).is_err());
    }

    #[test]
    fn balancing_examples() {
        let fam = family(&[&[1.0, 0.0], &[-1.0, 0.0]], 3.0);
        let b = check_balancing(&fam, 1e-9).unwrap();
        assert!(b.balanced);
        assert_eq!(b.residual, 0.0);

        for q in [1.2, 1.5, 3.0] {
            assert!(check_balancing(&four_point(q), 1e-9).unwrap().balanced);
        }

        let fam = family(&[&[1.0, 0.0], &[0.0, 1.0]], 2.0);
        let b = check_balancing(&fam, 1e-9).unwrap();
        assert!(!b.balanced);
        assert!((b.residual - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn collapsing_examples() {
        let fam = family(&[&[1.0, 0.0], &[-1.0, 0.0]], 2.0);
        let c = check_collapsing(&fam, 1e-9).unwrap();
        assert!(c.collapsing);
        assert_eq!(c.worst_subset_norm, 1.0);
        assert_eq!(c.worst_subset, vec![0]);

        let fam = family(&[&[1.0, 0.0], &[1.0, 0.0]], 2.0);
        let c = check_collapsing(&fam, 1e-9).unwrap();
        assert!(!c.collapsing);
        assert_eq!(c.worst_subset, vec![0, 1]);
        assert_eq!(c.worst_subset_norm, 2.0);

        let q = 3f64.ln() / 2f64.ln();
        let c = check_collapsing(&four_point(q), 1e-9).unwrap();
        assert!(c.collapsing);
        // singletons and pairs both sit on the unit sphere here
        assert!((c.worst_subset_norm - 1.0).abs() < 1e-12);
        assert!(c.worst_subset.len() <= 2);
    }

    #[test]
    fn collapsing_rejects_oversized_families() {
        let e = exp(2.0);
        let v = DualVector::new(vec![1.0], e).unwrap();
        let fam = UnitFamily::new(vec![v; 26], e).unwrap();
        assert!(matches!(
            check_collapsing(&fam, 1e-9),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            check_collapsing_capped(&fam, 1e-9, 5),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn gray_walk_matches_from_scratch_enumeration() {
        let q = 1.4;
        let e = LpExponent::from_dual(q).unwrap();
        // deterministic pseudo-random unit rows
        let mut rows = Vec::new();
        let mut state = 12345u64;
        for _ in 0..9 {
            let mut r: Vec<f64> = (0..3)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            let n = norm_slice(&r, q);
            r.iter_mut().for_each(|c| *c /= n);
            rows.push(r);
        }
        let fam = UnitFamily::from_rows(rows, e).unwrap();
        let (n, s) = max_subset_sum(&fam, 25).unwrap();
        let (bn, bs) = brute_max_subset(&fam);
        assert!((n - bn).abs() < 1e-12);
        assert_eq!(s, bs);
    }

    #[test]
    fn ties_report_lexicographically_smallest_subset() {
        // all pairs of the four-point family tie in exact arithmetic; {0,1}
        // and {2,3} give bit-identical sums up to sign
        let fam = family(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], 2.0);
        let c = check_collapsing(&fam, 1e-9).unwrap();
        assert_eq!(c.worst_subset, vec![0, 1]);
        assert!(!c.collapsing);
    }

    #[test]
    fn steiner_point_examples() {
        let p = exp(2.0);
        let h = 3f64.sqrt() / 2.0;
        let tri = [pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.5, h])];
        let centroid = pt(&[0.5, h / 3.0]);
        let r = certify_steiner_point(&centroid, &tri, p, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.balance_residual < 1e-12);

        let square = [
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[1.0, 1.0]),
            pt(&[0.0, 1.0]),
        ];
        let r = certify_steiner_point(&pt(&[0.5, 0.5]), &square, p, 1e-9).unwrap();
        assert!(r.balanced);
        assert!(!r.collapsing);
        assert_eq!(r.verdict, Verdict::Refuted);
        assert!((r.worst_subset_norm - 2f64.sqrt()).abs() < 1e-12);

        for pp in [1.3, 2.0, 5.0] {
            let r = certify_steiner_point(
                &pt(&[0.0, 0.0]),
                &[pt(&[2.0, -1.0]), pt(&[-2.0, 1.0])],
                exp(pp),
                1e-9,
            )
            .unwrap();
            assert_eq!(r.verdict, Verdict::Certified);
        }
    }

    #[test]
    fn steiner_point_rejects_coincident_neighbor() {
        let r = certify_steiner_point(
            &pt(&[1.0, 1.0]),
            &[pt(&[1.0, 1.0]), pt(&[0.0, 0.0])],
            exp(2.0),
            1e-9,
        );
        assert!(matches!(r, Err(Error::SingularInput(_))));
    }

    #[test]
    fn vertex_examples() {
        let o = pt(&[0.0, 0.0]);
        for pp in [1.5, 2.0, 4.0] {
            let r = certify_vertex(&o, &[pt(&[3.0, 1.0])], exp(pp), 1e-9).unwrap();
            assert_eq!(r.verdict, Verdict::Certified);
            assert!(!r.balanced);
        }
        let r = certify_vertex(&o, &[pt(&[1.0, 0.0]), pt(&[0.0, 1.0])], exp(2.0), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        assert!((r.worst_subset_norm - 2f64.sqrt()).abs() < 1e-15);
        let r = certify_vertex(&o, &[pt(&[1.0, 0.0]), pt(&[-1.0, 0.0])], exp(2.0), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
    }

    #[test]
    fn tree_examples() {
        let p = exp(2.0);
        let seg = SteinerTree::new(
            Topology::new(2, 0, vec![(0, 1)]).unwrap(),
            vec![pt(&[0.0, 0.0]), pt(&[2.0, 1.0])],
            vec![],
            p,
        )
        .unwrap();
        let c = certify_tree(&seg, p, 1e-9).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.nodes.len(), 2);

        let h = 3f64.sqrt() / 2.0;
        let tri = SteinerTree::new(
            Topology::new(3, 1, vec![(0, 3), (1, 3), (2, 3)]).unwrap(),
            vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.5, h])],
            vec![pt(&[0.5, h / 3.0])],
            p,
        )
        .unwrap();
        let c = certify_tree(&tri, p, 1e-9).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.nodes.len(), 4);
        assert_eq!(c.nodes[3].report.role, NodeRole::Steiner);

        let sq = SteinerTree::new(
            Topology::new(4, 1, vec![(0, 4), (1, 4), (2, 4), (3, 4)]).unwrap(),
            vec![
                pt(&[0.0, 0.0]),
                pt(&[1.0, 0.0]),
                pt(&[1.0, 1.0]),
                pt(&[0.0, 1.0]),
            ],
            vec![pt(&[0.5, 0.5])],
            p,
        )
        .unwrap();
        let c = certify_tree(&sq, p, 1e-9).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        let bad: Vec<usize> = c.refuted_nodes().map(|n| n.node).collect();
        assert_eq!(bad, vec![4]);
    }

    #[test]
    fn tree_with_zero_length_edge_is_degenerate() {
        let p = exp(2.0);
        let t = SteinerTree::new(
            Topology::new(3, 1, vec![(0, 3), (1, 3), (2, 3)]).unwrap(),
            vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0])],
            vec![pt(&[0.0, 0.0])],
            p,
        )
        .unwrap();
        assert!(matches!(
            certify_tree(&t, p, 1e-9),
            Err(Error::DegenerateTopology(_))
        ));
    }

    #[test]
    fn collapsing_subfamilies_collapse() {
        let fam = four_point(1.5);
        assert!(check_collapsing(&fam, 1e-9).unwrap().collapsing);
        for mask in 1u64..16 {
            let idx = mask_to_subset(mask);
            let sub = fam.subfamily(&idx).unwrap();
            assert!(check_collapsing(&sub, 1e-9).unwrap().collapsing);
        }
    }

    #[test]
    fn collapsing_implies_nonpositive_gram_entries() {
        let fam = four_point(1.5);
        let dual = fam.exponent().dual();
        for (i, xi) in fam.vectors().iter().enumerate() {
            let xi_star = norming_functional(&xi.to_point(), dual).unwrap();
            for (j, xj) in fam.vectors().iter().enumerate() {
                let g = pairing(&xi_star, &xj.to_point()).unwrap();
                if i == j {
                    assert!((g - lp_norm(&xj.to_point(), dual)).abs() < 1e-12);
                } else {
                    assert!(g <= 1e-9);
                }
            }
        }
    }
}
