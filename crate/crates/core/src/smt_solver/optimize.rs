//! Placement of Steiner points for a fixed topology.
//!
//! The total length is convex in the Steiner coordinates but not smooth where
//! an edge has zero length. Each coordinate magnitude `|x_i|` is replaced by
//! `sqrt(x_i^2 + eps^2)` and `eps` is driven towards zero; edges that collapse
//! along the way are contracted, and the contracted tree is polished on the
//! exact objective.

use crate::error::{Error, Result};
use crate::lp_geometry::{norm_slice, norming_functional_into, LpExponent, Point};

use super::{SteinerTree, Topology};

/// Relative smoothing levels; the last one sits below the contraction
/// threshold so collapsed edges become recognizable.
pub const SMOOTHING_LEVELS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

/// Edges shorter than this times the instance diameter are contracted.
pub const CONTRACTION_THRESHOLD: f64 = 1e-7;

/// Descent steps per smoothing stage.
pub const MAX_ITERATIONS: usize = 10_000;

struct Problem<'a> {
    p: f64,
    q: f64,
    dim: usize,
    terminal_count: usize,
    edges: &'a [(usize, usize)],
    terminals: &'a [Point],
}

impl Problem<'_> {
    fn node<'x>(&'x self, x: &'x [f64], v: usize) -> &'x [f64] {
        if v < self.terminal_count {
            self.terminals[v].coords()
        } else {
            let s = v - self.terminal_count;
            &x[s * self.dim..(s + 1) * self.dim]
        }
    }

    /// Total (smoothed) length and its gradient with respect to `x`.
    fn eval(&self, x: &[f64], eps: f64, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let d = self.dim;
        let mut diff = vec![0.0; d];
        let mut w = vec![0.0; d];
        let mut dn = vec![0.0; d];
        let mut total = 0.0;
        for &(u, v) in self.edges {
            let (a, b) = (self.node(x, u), self.node(x, v));
            for i in 0..d {
                diff[i] = a[i] - b[i];
            }
            if eps == 0.0 {
                total += norming_functional_into(&diff, self.p, &mut dn);
                if total.is_nan() {
                    return f64::NAN;
                }
                if diff.iter().all(|&c| c == 0.0) {
                    dn.iter_mut().for_each(|c| *c = 0.0);
                }
            } else {
                for i in 0..d {
                    w[i] = (diff[i] * diff[i] + eps * eps).sqrt();
                }
                let n = norm_slice(&w, self.p);
                total += n;
                for i in 0..d {
                    let r = w[i] / n;
                    let scale = if self.p == 2.0 {
                        r
                    } else {
                        r.powf(self.p - 1.0)
                    };
                    dn[i] = scale * diff[i] / w[i];
                }
            }
            for (side, sign) in [(u, 1.0), (v, -1.0)] {
                if side >= self.terminal_count {
                    let s = side - self.terminal_count;
                    for i in 0..d {
                        grad[s * d + i] += sign * dn[i];
                    }
                }
            }
        }
        total
    }

    /// Largest dual norm of a per-node gradient block.
    fn residual(&self, grad: &[f64]) -> f64 {
        grad.chunks(self.dim)
            .map(|g| norm_slice(g, self.q))
            .fold(0.0, f64::max)
    }
}

/// Steiner coordinates expressed through free variables: each slot is either
/// a variable or pinned to a value. Tied slots share a variable.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    Var(usize),
    Fixed(f64),
}

struct Reduced<'a> {
    problem: &'a Problem<'a>,
    slots: Vec<Slot>,
    eps: f64,
}

impl<'a> Reduced<'a> {
    fn identity(problem: &'a Problem<'a>, len: usize, eps: f64) -> Self {
        Reduced {
            problem,
            slots: (0..len).map(Slot::Var).collect(),
            eps,
        }
    }

    fn expand(&self, z: &[f64]) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Var(k) => z[k],
                Slot::Fixed(v) => v,
            })
            .collect()
    }

    /// Value and reduced gradient, plus the residual of the gradient
    /// projected onto the tied space (the full gradient when nothing is tied).
    fn eval(&self, z: &[f64], gz: &mut [f64]) -> (f64, f64) {
        let x = self.expand(z);
        let mut gx = vec![0.0; x.len()];
        let f = self.problem.eval(&x, self.eps, &mut gx);
        gz.iter_mut().for_each(|g| *g = 0.0);
        for (slot, g) in self.slots.iter().zip(&gx) {
            if let Slot::Var(k) = *slot {
                gz[k] += g;
            }
        }
        for (slot, g) in self.slots.iter().zip(gx.iter_mut()) {
            *g = match *slot {
                Slot::Var(k) => gz[k],
                Slot::Fixed(_) => 0.0,
            };
        }
        (f, self.problem.residual(&gx))
    }
}

struct Outcome {
    x: Vec<f64>,
    residual: f64,
    converged: bool,
}

/// Quasi-Newton descent (BFGS) with a backtracking line search that accepts
/// approximate-Wolfe steps once function values stop resolving progress.
fn minimize(obj: &Reduced, z0: Vec<f64>, scale: f64, gtol: f64, max_iter: usize) -> Outcome {
    let n = z0.len();
    let mut z = z0;
    let mut g = vec![0.0; n];
    let (mut f, mut res) = obj.eval(&z, &mut g);
    let h0 = 0.1 * scale;
    let mut h = identity(n, h0);
    let mut z_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let done = |z: &[f64], res: f64| Outcome {
        x: obj.expand(z),
        residual: res,
        converged: res <= gtol,
    };

    for _ in 0..max_iter {
        if res <= gtol || n == 0 {
            return done(&z, res);
        }
        let mut restarted = false;
        loop {
            mat_vec_neg(&h, &g, &mut dir);
            let mut slope = dot(&g, &dir);
            if !(slope < 0.0) {
                h = identity(n, h0);
                mat_vec_neg(&h, &g, &mut dir);
                slope = dot(&g, &dir);
            }
            match line_search(obj, &z, f, slope, &dir, &mut z_new, &mut g_new) {
                Some((f_new, res_new)) => {
                    let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    bfgs_update(&mut h, &s, &y, restarted);
                    std::mem::swap(&mut z, &mut z_new);
                    std::mem::swap(&mut g, &mut g_new);
                    f = f_new;
                    res = res_new;
                    break;
                }
                None if !restarted => {
                    h = identity(n, h0);
                    restarted = true;
                }
                None => return done(&z, res),
            }
        }
    }
    done(&z, res)
}

fn line_search(
    obj: &Reduced,
    z: &[f64],
    f: f64,
    slope: f64,
    dir: &[f64],
    z_new: &mut [f64],
    g_new: &mut [f64],
) -> Option<(f64, f64)> {
    const ARMIJO: f64 = 1e-4;
    let f_slack = 1e-14 * f.abs().max(1e-300);
    let mut alpha = 1.0;
    for _ in 0..60 {
        for i in 0..z.len() {
            z_new[i] = z[i] + alpha * dir[i];
        }
        let (f_new, res) = obj.eval(z_new, g_new);
        if f_new.is_finite() {
            if f_new <= f + ARMIJO * alpha * slope {
                return Some((f_new, res));
            }
            // function values are at rounding level: fall back on the slope
            let new_slope = dot(g_new, dir);
            if f_new <= f + f_slack
                && new_slope <= 0.9 * slope.abs()
                && new_slope.abs() < slope.abs()
            {
                return Some((f_new, res));
            }
        }
        alpha *= 0.5;
    }
    None
}

fn identity(n: usize, s: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = s;
    }
    m
}

fn mat_vec_neg(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = -dot(&m[i * n..(i + 1) * n], v);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], rescale: bool) {
    let n = s.len();
    let sy = dot(s, y);
    if !(sy > 1e-12 * dot(s, s).sqrt() * dot(y, y).sqrt()) || sy == 0.0 {
        return;
    }
    if rescale {
        let gamma = sy / dot(y, y);
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = gamma;
        }
    }
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    for i in 0..n {
        hy[i] = dot(&h[i * n..(i + 1) * n], y);
    }
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Largest pairwise terminal distance.
pub(crate) fn diameter(terminals: &[Point], p: LpExponent) -> f64 {
    let mut best = 0.0_f64;
    for (i, a) in terminals.iter().enumerate() {
        for b in &terminals[i + 1..] {
            let d: Vec<f64> = a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| x - y)
                .collect();
            best = best.max(norm_slice(&d, p.p()));
        }
    }
    best
}

/// Jacobi iterations of "each Steiner point at the mean of its neighbors".
fn initial_positions(t: &Topology, terminals: &[Point], dim: usize) -> Vec<f64> {
    let n = t.terminal_count();
    let s = t.steiner_count();
    let mut centroid = vec![0.0; dim];
    for p in terminals {
        for (c, v) in centroid.iter_mut().zip(p.coords()) {
            *c += v / n as f64;
        }
    }
    let mut x: Vec<f64> = (0..s).flat_map(|_| centroid.clone()).collect();
    let adj = t.adjacency();
    for _ in 0..200 {
        let mut next = x.clone();
        for k in 0..s {
            let v = n + k;
            let mut acc = vec![0.0; dim];
            for &u in &adj[v] {
                let c = if u < n {
                    terminals[u].coords()
                } else {
                    &x[(u - n) * dim..(u - n + 1) * dim]
                };
                for i in 0..dim {
                    acc[i] += c[i];
                }
            }
            for i in 0..dim {
                next[k * dim + i] = acc[i] / adj[v].len() as f64;
            }
        }
        x = next;
    }
    x
}

/// Contracts one edge with a Steiner endpoint. A Steiner point merges into a
/// terminal, two Steiner points merge at their midpoint.
fn contract(
    t: &Topology,
    x: &[f64],
    dim: usize,
    edge: (usize, usize),
) -> Result<(Topology, Vec<f64>)> {
    let n = t.terminal_count();
    let (u, v) = edge;
    let (keep, gone) = if u < n {
        (u, v)
    } else if v < n {
        (v, u)
    } else {
        (u.min(v), u.max(v))
    };
    debug_assert!(gone >= n);
    let mut x = x.to_vec();
    if keep >= n {
        for i in 0..dim {
            let a = x[(keep - n) * dim + i];
            let b = x[(gone - n) * dim + i];
            x[(keep - n) * dim + i] = 0.5 * (a + b);
        }
    }
    let relabel = |w: usize| {
        let w = if w == gone { keep } else { w };
        if w > gone {
            w - 1
        } else {
            w
        }
    };
    let edges: Vec<(usize, usize)> = t
        .edges()
        .iter()
        .filter(|&&e| e != (u.min(v), u.max(v)))
        .map(|&(a, b)| (relabel(a), relabel(b)))
        .collect();
    x.drain((gone - n) * dim..(gone - n + 1) * dim);
    Ok((Topology::new(n, t.steiner_count() - 1, edges)?, x))
}

fn build_tree(
    t: &Topology,
    terminals: &[Point],
    x: &[f64],
    dim: usize,
    p: LpExponent,
) -> Result<SteinerTree> {
    let steiner = x
        .chunks(dim)
        .map(|c| Point::new(c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    SteinerTree::new(t.clone(), terminals.to_vec(), steiner, p)
}

/// Shortest edge with a Steiner endpoint, if it is below the contraction threshold.
fn short_edge(problem: &Problem, x: &[f64], threshold: f64) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for &(u, v) in problem.edges {
        if u < problem.terminal_count && v < problem.terminal_count {
            continue;
        }
        let d: Vec<f64> = problem
            .node(x, u)
            .iter()
            .zip(problem.node(x, v))
            .map(|(a, b)| a - b)
            .collect();
        let len = norm_slice(&d, problem.p);
        if len < threshold && best.is_none_or(|(_, l)| len < l) {
            best = Some(((u, v), len));
        }
    }
    best.map(|(e, _)| e)
}

/// Steiner coordinates minimizing the total `l_p` length of `t` over fixed
/// terminals. Collapsed edges are contracted, so the returned tree may have
/// fewer Steiner points than `t`.
///
/// Converged means every Steiner point's gradient block has dual norm `<= tol`.
pub fn optimize_topology(
    t: &Topology,
    terminals: &[Point],
    p: LpExponent,
    tol: f64,
) -> Result<SteinerTree> {
    if terminals.len() != t.terminal_count() {
        return Err(Error::invalid(format!(
            "topology has {} terminals, got {} points",
            t.terminal_count(),
            terminals.len()
        )));
    }
    let dim = terminals[0].dim();
    if terminals.iter().any(|a| a.dim() != dim) {
        return Err(Error::invalid("terminals have mixed dimensions"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut topo = t.clone();
    if topo.steiner_count() == 0 {
        return SteinerTree::new(topo, terminals.to_vec(), vec![], p);
    }
    let scale = diameter(terminals, p);
    if scale == 0.0 {
        return Err(Error::invalid("terminals coincide"));
    }

    let mut x = initial_positions(&topo, terminals, dim);
    for &level in &SMOOTHING_LEVELS {
        let problem = Problem {
            p: p.p(),
            q: p.q(),
            dim,
            terminal_count: topo.terminal_count(),
            edges: topo.edges(),
            terminals,
        };
        let smoothed = Reduced::identity(&problem, x.len(), level * scale);
        x = minimize(&smoothed, x, scale, tol.max(level), MAX_ITERATIONS).x;
    }

    let threshold = CONTRACTION_THRESHOLD * scale;
    loop {
        loop {
            if topo.steiner_count() == 0 {
                return SteinerTree::new(topo, terminals.to_vec(), vec![], p);
            }
            let problem = Problem {
                p: p.p(),
                q: p.q(),
                dim,
                terminal_count: topo.terminal_count(),
                edges: topo.edges(),
                terminals,
            };
            match short_edge(&problem, &x, threshold) {
                Some(e) => {
                    let (t2, x2) = contract(&topo, &x, dim, e)?;
                    topo = t2;
                    x = x2;
                }
                None => break,
            }
        }
        let problem = Problem {
            p: p.p(),
            q: p.q(),
            dim,
            terminal_count: topo.terminal_count(),
            edges: topo.edges(),
            terminals,
        };
        let exact = Reduced::identity(&problem, x.len(), 0.0);
        let mut out = minimize(&exact, x, scale, tol, MAX_ITERATIONS);
        if !out.converged && p.p() < 2.0 {
            // Below p = 2 the gradient is only Hölder near a vanishing
            // coordinate difference, and the optimum may sit closer to it than
            // f64 resolves. Such coordinates are pinned together and the
            // remaining ones optimized.
            let mut previous: Option<Vec<Slot>> = None;
            while let Some((slots, z0)) = tied_slots(&problem, &out.x, threshold) {
                if previous.as_ref() == Some(&slots) {
                    break;
                }
                let tied = Reduced {
                    problem: &problem,
                    slots: slots.clone(),
                    eps: 0.0,
                };
                let alt = minimize(&tied, z0, scale, tol, MAX_ITERATIONS);
                if alt.converged || alt.residual < out.residual {
                    out = alt;
                }
                if out.converged {
                    break;
                }
                previous = Some(slots);
            }
        }
        x = out.x;
        if out.converged {
            return build_tree(&topo, terminals, &x, dim, p);
        }
        if short_edge(&problem, &x, threshold).is_none() {
            let best = build_tree(&topo, terminals, &x, dim, p)?;
            return Err(Error::NoConvergence {
                best: Box::new(best),
                residual: out.residual,
            });
        }
    }
}

/// Ties Steiner coordinates to the matching coordinate across an edge when
/// the two differ by less than `threshold`. Returns the slot map and the
/// starting values of the free variables, or `None` if nothing ties.
fn tied_slots(problem: &Problem, x: &[f64], threshold: f64) -> Option<(Vec<Slot>, Vec<f64>)> {
    let d = problem.dim;
    let n = problem.terminal_count;
    let len = x.len();
    let mut parent: Vec<usize> = (0..len).collect();
    let mut anchor: Vec<Option<f64>> = vec![None; len];
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut any = false;
    for &(u, v) in problem.edges {
        let (a, b) = (problem.node(x, u), problem.node(x, v));
        for i in 0..d {
            if (a[i] - b[i]).abs() >= threshold {
                continue;
            }
            match (u >= n, v >= n) {
                (true, true) => {
                    let (ru, rv) = (
                        find(&mut parent, (u - n) * d + i),
                        find(&mut parent, (v - n) * d + i),
                    );
                    if ru == rv {
                        continue;
                    }
                    match (anchor[ru], anchor[rv]) {
                        (Some(x), Some(y)) if x != y => continue,
                        (au, av) => {
                            parent[rv] = ru;
                            anchor[ru] = au.or(av);
                        }
                    }
                }
                (su, _) => {
                    let (s, t) = if su { (u, v) } else { (v, u) };
                    let r = find(&mut parent, (s - n) * d + i);
                    let value = problem.node(x, t)[i];
                    match anchor[r] {
                        Some(y) if y != value => continue,
                        _ => anchor[r] = Some(value),
                    }
                }
            }
            any = true;
        }
    }
    if !any {
        return None;
    }
    let mut var_of = vec![usize::MAX; len];
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut slots = Vec::with_capacity(len);
    for j in 0..len {
        let r = find(&mut parent, j);
        if let Some(v) = anchor[r] {
            slots.push(Slot::Fixed(v));
            continue;
        }
        if var_of[r] == usize::MAX {
            var_of[r] = sums.len();
            sums.push((0.0, 0));
        }
        let k = var_of[r];
        sums[k].0 += x[j];
        sums[k].1 += 1;
        slots.push(Slot::Var(k));
    }
    let z0 = sums.iter().map(|&(s, c)| s / c as f64).collect();
    Some((slots, z0))
}
