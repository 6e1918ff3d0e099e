//! Command-line front end: certification, degree bounds, threshold table,
//! extremal constructions and the small-instance solver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lpsmt::certificates::{
    certify_steiner_point, certify_tree_capped, certify_vertex, CertificateReport, TreeCertificate,
    DEFAULT_MAX_SUBSETS, DEFAULT_TOLERANCE,
};
use lpsmt::constructions::{four_point_config, simplex_config, Construction, ConstructionKind};
use lpsmt::degree_bounds::{
    compute_q0, degree_bound, solve_g_threshold, threshold_p_values, BoundMethod,
};
use lpsmt::instance::{ConstructionFile, InstanceFile};
use lpsmt::lp_geometry::{conjugate, LpExponent, Point};
use lpsmt::smt_solver::{fermat_point, solve_smt, SolveOptions};
use lpsmt::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lpsmt", version, about = "Steiner minimal trees in l_p^d")]
pub struct Cli {
    /// Numerical tolerance [default: 1e-9; solve certifies at 1e-6 unless set]
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Largest family size for subset enumeration
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SUBSETS)]
    pub max_subsets: usize,

    /// Emit one JSON object instead of a table
    #[arg(long, global = true)]
    pub machine: bool,

    /// Directory searched for instance names and written to by `construct --write`
    #[arg(long, global = true, default_value = "fixtures")]
    pub fixtures_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the optimality conditions of a star or of a whole tree
    Certify {
        /// Instance file, or the name of a file in the fixtures directory
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Steiner)]
        mode: Mode,
    },
    /// Lower and upper bounds on SMT degrees in l_p^d
    Bounds {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        dim: usize,
    },
    /// Table of the numerical thresholds used by the degree bounds
    Thresholds,
    /// Compute a Steiner minimal tree for at most seven terminals
    Solve {
        input: PathBuf,
        /// Write the tree and its certificates to this file
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build an explicit collapsing family and its star instance
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Star around a Steiner point: balancing and collapsing
    Steiner,
    /// Star around a terminal: collapsing only
    Vertex,
    /// Every node of the tree in the file
    Tree,
}

#[derive(Debug, Subcommand)]
pub enum ConstructKind {
    /// Four vectors 3^(-1/q) (±1, ±1, ±1) in l_q^3
    FourPoint {
        #[command(flatten)]
        exponent: ExponentArgs,
        /// Save the family file into the fixtures directory
        #[arg(long)]
        write: bool,
    },
    /// Normalized simplex family in l_q^d
    Simplex {
        /// Ambient dimension; the family has `dim + 1` vectors
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        exponent: ExponentArgs,
        /// Save the family file into the fixtures directory
        #[arg(long)]
        write: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ExponentArgs {
    /// Exponent of the dual space the family lives in
    #[arg(long)]
    q: Option<f64>,
    /// Exponent of the primal space; q = p / (p - 1)
    #[arg(long)]
    p: Option<f64>,
}

impl ExponentArgs {
    fn q(&self) -> Result<f64, Error> {
        match (self.q, self.p) {
            (Some(q), _) => Ok(LpExponent::from_dual(q)?.q()),
            (None, Some(p)) => Ok(LpExponent::new(p)?.q()),
            (None, None) => Err(Error::InvalidInput("one of --q or --p is required".into())),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Error> {
    match &cli.command {
        Command::Certify { input, mode } => cmd_certify(cli, input, *mode, out),
        Command::Bounds { p, dim } => cmd_bounds(cli, *p, *dim, out),
        Command::Thresholds => cmd_thresholds(cli, out),
        Command::Solve { input, output } => cmd_solve(cli, input, output.as_deref(), out),
        Command::Construct { kind } => cmd_construct(cli, kind, out),
    }
}

/// `path` itself if it exists, else `path` or `path.toml` inside the fixtures directory.
pub fn resolve_input(path: &Path, fixtures_dir: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let in_dir = fixtures_dir.join(path);
    if in_dir.exists() {
        return in_dir;
    }
    let with_ext = fixtures_dir.join(path).with_extension("toml");
    if with_ext.exists() {
        return with_ext;
    }
    path.to_path_buf()
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Error> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidInput(format!("cannot write output: {e}")))
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Numeric(e.to_string()))?;
    emit(out, &format!("{text}\n"))
}

fn check_tol(tol: f64) -> Result<f64, Error> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(Error::InvalidInput(format!(
            "--tol must be finite and >= 0, got {tol}"
        )))
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn render_report(r: &CertificateReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("role: {}\n", role_name(r)));
    s.push_str(&format!(
        "balanced: {} (residual {:.3e}, tol {:e})\n",
        yes_no(r.balanced),
        r.balance_residual,
        r.tolerance
    ));
    s.push_str(&format!(
        "collapsing: {} (worst subset {:?}, norm {:.12})\n",
        yes_no(r.collapsing),
        r.worst_subset,
        r.worst_subset_norm
    ));
    s.push_str(&format!(
        "verdict: {}\n",
        verdict_name(r.verdict.is_certified())
    ));
    s
}

fn role_name(r: &CertificateReport) -> &'static str {
    match r.role {
        lpsmt::certificates::NodeRole::Steiner => "steiner",
        lpsmt::certificates::NodeRole::Vertex => "vertex",
    }
}

fn verdict_name(ok: bool) -> &'static str {
    if ok {
        "certified"
    } else {
        "refuted"
    }
}

fn exit_for(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_REFUTED
    }
}

fn cmd_certify(cli: &Cli, input: &Path, mode: Mode, out: &mut dyn Write) -> Result<i32, Error> {
    let file = InstanceFile::read(&resolve_input(input, &cli.fixtures_dir))?;
    let p = file.exponent()?;
    let points = file.point_list()?;
    match mode {
        Mode::Tree => certify_tree_mode(cli, &file, out),
        Mode::Steiner | Mode::Vertex => {
            let tol = check_tol(cli.tol.unwrap_or(DEFAULT_TOLERANCE))?;
            let (center, neighbors, note) = star_from_file(&file, &points, p, mode, tol)?;
            let steiner = mode == Mode::Steiner && note.is_none();
            let report = certify_star(cli, &center, &neighbors, p, tol, steiner)?;
            // a Fermat point absorbed by a terminal rules out a Steiner center
            let ok = report.verdict.is_certified() && note.is_none();
            if cli.machine {
                emit_json(
                    out,
                    &json!({
                        "command": "certify",
                        "mode": mode_name(mode),
                        "p": p.p(),
                        "center": center.coords(),
                        "note": note,
                        "report": report,
                        "verdict": verdict_name(ok),
                    }),
                )?;
            } else {
                let mut s = format!(
                    "mode: {}\np: {}\ncenter: {center}\n",
                    mode_name(mode),
                    p.p()
                );
                if let Some(n) = &note {
                    s.push_str(&format!("note: {n}\n"));
                }
                s.push_str(&render_report(&report));
                if note.is_some() {
                    s.push_str(&format!("overall: {}\n", verdict_name(ok)));
                }
                emit(out, &s)?;
            }
            Ok(exit_for(ok))
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Steiner => "steiner",
        Mode::Vertex => "vertex",
        Mode::Tree => "tree",
    }
}

fn certify_star(
    cli: &Cli,
    center: &Point,
    neighbors: &[Point],
    p: LpExponent,
    tol: f64,
    steiner: bool,
) -> Result<CertificateReport, Error> {
    if neighbors.len() > cli.max_subsets {
        return Err(Error::ResourceLimit(format!(
            "{} neighbors exceed --max-subsets {}",
            neighbors.len(),
            cli.max_subsets
        )));
    }
    if steiner {
        certify_steiner_point(center, neighbors, p, tol)
    } else {
        certify_vertex(center, neighbors, p, tol)
    }
}

/// Center and neighbors of the star to certify, plus a note when the Fermat
/// point lands on a terminal.
fn star_from_file(
    file: &InstanceFile,
    points: &[Point],
    p: LpExponent,
    mode: Mode,
    tol: f64,
) -> Result<(Point, Vec<Point>, Option<String>), Error> {
    if let Some(c) = file.center_point()? {
        return Ok((c, points.to_vec(), None));
    }
    match mode {
        Mode::Vertex => {
            if points.len() < 2 {
                return Err(Error::InvalidInput(
                    "vertex mode needs a center and a neighbor".into(),
                ));
            }
            Ok((points[0].clone(), points[1..].to_vec(), None))
        }
        _ => {
            let f = fermat_point(points, p, tol.max(1e-12))?;
            match f.absorbed {
                None => Ok((f.point, points.to_vec(), None)),
                Some(j) => {
                    let rest: Vec<Point> = points
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, x)| x.clone())
                        .collect();
                    let note = format!(
                        "the Fermat point coincides with terminal {j}; showing its vertex certificate"
                    );
                    Ok((points[j].clone(), rest, Some(note)))
                }
            }
        }
    }
}

fn certify_tree_mode(cli: &Cli, file: &InstanceFile, out: &mut dyn Write) -> Result<i32, Error> {
    let tree = file.steiner_tree()?;
    let recorded = file.recorded_certificate();
    let tol = match (cli.tol, file.tree.as_ref().and_then(|t| t.tolerance)) {
        (Some(t), _) => t,
        (None, Some(t)) => t,
        (None, None) => DEFAULT_TOLERANCE,
    };
    let tol = check_tol(tol)?;
    let cert = certify_tree_capped(&tree, tree.exponent(), tol, cli.max_subsets)?;
    let reproduced = recorded.as_ref().map(|r| r == &cert);
    let ok = cert.verdict.is_certified();
    if cli.machine {
        emit_json(
            out,
            &json!({
                "command": "certify",
                "mode": "tree",
                "p": tree.exponent().p(),
                "length": tree.length(),
                "tolerance": tol,
                "certificate": cert,
                "recorded_reproduced": reproduced,
                "verdict": verdict_name(ok),
            }),
        )?;
    } else {
        let mut s = format!(
            "mode: tree\np: {}\nlength: {:.12}\n",
            tree.exponent().p(),
            tree.length()
        );
        s.push_str(&render_tree_certificate(&cert));
        if let Some(r) = reproduced {
            s.push_str(&format!(
                "recorded verdicts: {}\n",
                if r { "reproduced exactly" } else { "differ" }
            ));
        }
        s.push_str(&format!("verdict: {}\n", verdict_name(ok)));
        emit(out, &s)?;
    }
    Ok(exit_for(ok))
}

fn render_tree_certificate(c: &TreeCertificate) -> String {
    let mut s = format!(
        "{:>4}  {:<7}  {:>8}  {:>10}  {:>10}  {:>14}  {}\n",
        "node", "role", "balanced", "residual", "collapsing", "worst norm", "verdict"
    );
    for n in &c.nodes {
        let r = &n.report;
        s.push_str(&format!(
            "{:>4}  {:<7}  {:>8}  {:>10.3e}  {:>10}  {:>14.12}  {}\n",
            n.node,
            role_name(r),
            yes_no(r.balanced),
            r.balance_residual,
            yes_no(r.collapsing),
            r.worst_subset_norm,
            verdict_name(r.verdict.is_certified())
        ));
    }
    s
}

fn method_name(m: BoundMethod) -> &'static str {
    match m {
        BoundMethod::Smooth => "smooth",
        BoundMethod::Rankin => "rankin",
        BoundMethod::Khinchin => "khinchin",
        BoundMethod::Summing => "summing",
        BoundMethod::Construction => "construction",
        BoundMethod::Simplex => "simplex",
    }
}

fn cmd_bounds(cli: &Cli, p: f64, dim: usize, out: &mut dyn Write) -> Result<i32, Error> {
    let r = degree_bound(p, dim)?;
    if cli.machine {
        emit_json(out, &json!({ "command": "bounds", "report": r }))?;
    } else {
        let cands: Vec<String> = r
            .upper_candidates
            .iter()
            .map(|(m, v)| format!("{} {}", method_name(*m), v))
            .collect();
        emit(
            out,
            &format!(
                "p = {}, q = {:.6}, d = {}\nlower {} upper {}\nlower method: {}\nupper method: {}\nupper candidates: {}\n",
                r.p,
                conjugate(r.p),
                r.d,
                r.lower,
                r.upper,
                method_name(r.lower_method),
                method_name(r.upper_method),
                cands.join(", ")
            ),
        )?;
    }
    Ok(EXIT_OK)
}

/// Name, value and defining equation of every tabulated constant.
pub fn threshold_table() -> Result<Vec<(String, f64, String)>, Error> {
    let t = threshold_p_values();
    let mut rows = vec![
        (
            "p1".to_string(),
            t[0],
            "p = log 3 / (log 3 - log 2)".to_string(),
        ),
        (
            "p2".to_string(),
            t[1],
            "p = (log 8 - log 3) / (log 4 - log 3)".to_string(),
        ),
        (
            "p3".to_string(),
            t[2],
            "p = log 4 / (log 4 - log 3)".to_string(),
        ),
        (
            "p4".to_string(),
            t[3],
            "p = log 4 / (log 8 - log 7)".to_string(),
        ),
        (
            "q0".to_string(),
            compute_q0(),
            "Gamma((q+1)/2) = sqrt(pi)/2, 1 < q < 2".to_string(),
        ),
    ];
    for d in 4..=7 {
        rows.push((
            format!("g-threshold d={d}"),
            solve_g_threshold(d)?,
            format!("2 ({d}-2)^q + ({d}-2) 2^q = ({d}-1)^q + {d} - 1"),
        ));
    }
    Ok(rows)
}

fn cmd_thresholds(cli: &Cli, out: &mut dyn Write) -> Result<i32, Error> {
    let rows = threshold_table()?;
    if cli.machine {
        let list: Vec<Value> = rows
            .iter()
            .map(|(n, v, e)| json!({ "name": n, "value": v, "equation": e }))
            .collect();
        emit_json(out, &json!({ "command": "thresholds", "constants": list }))?;
    } else {
        let mut s = format!("{:<18}  {:>10}  {}\n", "name", "value", "defining equation");
        for (n, v, e) in &rows {
            s.push_str(&format!("{n:<18}  {v:>10.6}  {e}\n"));
        }
        emit(out, &s)?;
    }
    Ok(EXIT_OK)
}

fn cmd_solve(
    cli: &Cli,
    input: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let file = InstanceFile::read(&resolve_input(input, &cli.fixtures_dir))?;
    let p = file.exponent()?;
    let points = file.point_list()?;
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        tol: check_tol(cli.tol.unwrap_or(defaults.tol))?.max(f64::MIN_POSITIVE),
        certify_tol: cli.tol.unwrap_or(defaults.certify_tol),
        max_subsets: cli.max_subsets,
    };
    let tree = match solve_smt(&points, p, &opts) {
        Ok(t) => t,
        Err(Error::NoConvergence { best, residual }) => {
            if let Some(path) = output {
                InstanceFile::from_tree(&best).write(path)?;
            }
            return Err(Error::NoConvergence { best, residual });
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = output {
        InstanceFile::from_tree(&tree).write(path)?;
    }
    let cert = tree.certificate().expect("solver attaches a certificate");
    let ok = cert.verdict.is_certified();
    let warnings = tree.numerical_warnings();
    if cli.machine {
        emit_json(
            out,
            &json!({
                "command": "solve",
                "p": p.p(),
                "length": tree.length(),
                "terminals": tree.terminals().iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>(),
                "steiner": tree.steiner().iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>(),
                "edges": tree.topology().edges(),
                "certificate": cert,
                "numerical_warnings": warnings,
                "verdict": verdict_name(ok),
            }),
        )?;
    } else {
        let mut s = format!(
            "p: {}\nterminals: {}\nsteiner points: {}\nlength: {:.12}\n",
            p.p(),
            tree.terminals().len(),
            tree.steiner().len(),
            tree.length()
        );
        for (i, x) in tree.steiner().iter().enumerate() {
            s.push_str(&format!("  node {}: {x}\n", tree.terminals().len() + i));
        }
        let edges: Vec<String> = tree
            .topology()
            .edges()
            .iter()
            .map(|(u, v)| format!("{u}-{v}"))
            .collect();
        s.push_str(&format!("edges: {}\n", edges.join(" ")));
        s.push_str(&render_tree_certificate(cert));
        if !warnings.is_empty() {
            s.push_str(&format!(
                "numerical warning: nodes {warnings:?} miss the certificate tolerance\n"
            ));
        }
        s.push_str(&format!("verdict: {}\n", verdict_name(ok)));
        emit(out, &s)?;
    }
    Ok(exit_for(ok))
}

/// File name a construction is written under, e.g. `four_point_q1.5.toml`.
pub fn construction_file_name(c: &Construction) -> String {
    match c.kind {
        ConstructionKind::FourPoint => format!("four_point_q{}.toml", c.q),
        ConstructionKind::Simplex => format!("simplex_d{}_q{}.toml", c.dim, c.q),
    }
}

fn cmd_construct(cli: &Cli, kind: &ConstructKind, out: &mut dyn Write) -> Result<i32, Error> {
    let (c, write) = match kind {
        ConstructKind::FourPoint { exponent, write } => (four_point_config(exponent.q()?)?, *write),
        ConstructKind::Simplex {
            dim,
            exponent,
            write,
        } => (simplex_config(*dim, exponent.q()?)?, *write),
    };
    let tol = check_tol(cli.tol.unwrap_or(DEFAULT_TOLERANCE))?;
    let verified = c.verify(tol)?;
    let file = ConstructionFile::from_construction(&c)?;
    let written = if write {
        std::fs::create_dir_all(&cli.fixtures_dir).map_err(|e| {
            Error::InvalidInput(format!("cannot create {}: {e}", cli.fixtures_dir.display()))
        })?;
        let path = cli.fixtures_dir.join(construction_file_name(&c));
        file.write(&path)?;
        Some(path)
    } else {
        None
    };
    let agree = verified == c.claims;
    if cli.machine {
        emit_json(
            out,
            &json!({
                "command": "construct",
                "construction": file,
                "verified": verified,
                "claims_reproduced": agree,
                "written": written.as_ref().map(|p| p.display().to_string()),
            }),
        )?;
    } else {
        let kind = match c.kind {
            ConstructionKind::FourPoint => "four-point",
            ConstructionKind::Simplex => "simplex",
        };
        let mut s = format!(
            "kind: {kind}\nq: {}\np: {}\ndim: {}\nfamily (unit vectors in l_q):\n",
            c.q,
            c.family.exponent().p(),
            c.dim
        );
        for v in c.family.vectors() {
            s.push_str(&format!("  {}\n", v.to_point()));
        }
        s.push_str(&format!(
            "claimed: balanced {}, collapsing {}\nchecked: balanced {}, collapsing {}\n",
            yes_no(c.claims.balanced),
            yes_no(c.claims.collapsing),
            yes_no(verified.balanced),
            yes_no(verified.collapsing)
        ));
        if let Some(inst) = &file.instance {
            s.push_str("star instance (terminals in l_p, center at the origin):\n");
            for r in &inst.points {
                s.push_str(&format!("  {}\n", Point::new(r.clone())?));
            }
        }
        if let Some(p) = &written {
            s.push_str(&format!("written: {}\n", p.display()));
        }
        emit(out, &s)?;
    }
    Ok(if agree { EXIT_OK } else { EXIT_REFUTED })
}
