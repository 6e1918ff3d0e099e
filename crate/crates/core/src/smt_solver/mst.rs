use crate::error::{Error, Result};
use crate::lp_geometry::{lp_distance, LpExponent, Point};

/// Minimum spanning tree over `l_p` distances (Prim, O(n^2)).
/// Returns the edges and the total length.
pub fn minimum_spanning_tree(
    points: &[Point],
    p: LpExponent,
) -> Result<(Vec<(usize, usize)>, f64)> {
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (lp_distance(&points[0], &points[j], p)?, 0);
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    for _ in 1..n {
        let (v, &(d, u)) = best
            .iter()
            .enumerate()
            .filter(|(j, _)| !in_tree[*j])
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("a node remains outside the tree");
        in_tree[v] = true;
        edges.push((u.min(v), u.max(v)));
        total += d;
        for j in 0..n {
            if !in_tree[j] {
                let dj = lp_distance(&points[v], &points[j], p)?;
                if dj < best[j].0 {
                    best[j] = (dj, v);
                }
            }
        }
    }
    Ok((edges, total))
}
