//! Text file formats for instances, solved trees and constructions (TOML).
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every coordinate bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certificates::{NodeCertificate, TreeCertificate, UnitFamily, Verdict};
use crate::constructions::{Claims, Construction, ConstructionKind, StarInstance};
use crate::error::{Error, Result};
use crate::lp_geometry::{LpExponent, Point};
use crate::smt_solver::{SteinerTree, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub p: f64,
    pub points: Vec<Vec<f64>>,
    /// Star center for certification; Steiner mode falls back to the Fermat
    /// point, vertex mode to the first point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    #[serde(default)]
    pub steiner: Vec<Vec<f64>>,
    /// Node `i < points.len()` is terminal `i`; higher indices are Steiner points.
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Tolerance the recorded verdicts were computed with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeCertificate>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: InstanceFile =
            toml::from_str(text).map_err(|e| Error::invalid(format!("malformed instance: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialize instance: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text()?)
    }

    pub fn validate(&self) -> Result<()> {
        LpExponent::new(self.p)?;
        let dim = self.dim()?;
        let rows = self.points.iter().chain(self.center.iter());
        let steiner = self.tree.iter().flat_map(|t| t.steiner.iter());
        for r in rows.chain(steiner) {
            if r.len() != dim {
                return Err(Error::invalid(format!(
                    "row of length {} in a {dim}-dimensional instance",
                    r.len()
                )));
            }
            Point::new(r.clone())?;
        }
        if let Some(t) = &self.tree {
            self.topology(t)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> Result<usize> {
        match self.points.first() {
            Some(r) if !r.is_empty() => Ok(r.len()),
            Some(_) => Err(Error::invalid("points must have at least one coordinate")),
            None => Err(Error::invalid("instance has no points")),
        }
    }

    pub fn exponent(&self) -> Result<LpExponent> {
        LpExponent::new(self.p)
    }

    pub fn point_list(&self) -> Result<Vec<Point>> {
        self.points.iter().map(|r| Point::new(r.clone())).collect()
    }

    pub fn center_point(&self) -> Result<Option<Point>> {
        self.center
            .as_ref()
            .map(|c| Point::new(c.clone()))
            .transpose()
    }

    fn topology(&self, t: &TreeSection) -> Result<Topology> {
        let edges = t.edges.iter().map(|e| (e[0], e[1])).collect();
        Topology::new(self.points.len(), t.steiner.len(), edges)
    }

    /// The embedded tree in the `tree` section.
    pub fn steiner_tree(&self) -> Result<SteinerTree> {
        let t = self
            .tree
            .as_ref()
            .ok_or_else(|| Error::invalid("instance has no [tree] section"))?;
        let steiner = t
            .steiner
            .iter()
            .map(|r| Point::new(r.clone()))
            .collect::<Result<_>>()?;
        SteinerTree::new(
            self.topology(t)?,
            self.point_list()?,
            steiner,
            self.exponent()?,
        )
    }

    /// Instance holding `tree` and its certificate, if one is attached.
    pub fn from_tree(tree: &SteinerTree) -> Self {
        let cert = tree.certificate();
        InstanceFile {
            p: tree.exponent().p(),
            points: tree
                .terminals()
                .iter()
                .map(|x| x.coords().to_vec())
                .collect(),
            center: None,
            tree: Some(TreeSection {
                steiner: tree.steiner().iter().map(|x| x.coords().to_vec()).collect(),
                edges: tree
                    .topology()
                    .edges()
                    .iter()
                    .map(|&(u, v)| [u, v])
                    .collect(),
                length: Some(tree.length()),
                tolerance: cert
                    .and_then(|c| c.nodes.first())
                    .map(|n| n.report.tolerance),
                verdict: cert.map(|c| c.verdict),
                nodes: cert.map(|c| c.nodes.clone()).unwrap_or_default(),
            }),
        }
    }

    /// Certificate recorded in the file, if any.
    pub fn recorded_certificate(&self) -> Option<TreeCertificate> {
        let t = self.tree.as_ref()?;
        Some(TreeCertificate {
            nodes: t.nodes.clone(),
            verdict: t.verdict?,
        })
    }

    pub fn from_star(star: &StarInstance) -> Self {
        InstanceFile {
            p: star.exponent.p(),
            points: star.terminals.iter().map(|x| x.coords().to_vec()).collect(),
            center: Some(star.center.coords().to_vec()),
            tree: None,
        }
    }
}

/// A construction together with the star instance it yields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionFile {
    pub kind: ConstructionKind,
    pub q: f64,
    pub dim: usize,
    /// Dual unit vectors in `l_q^dim`.
    pub family: Vec<Vec<f64>>,
    pub claims: Claims,
    /// Present when the family is collapsing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
}

impl ConstructionFile {
    pub fn from_construction(c: &Construction) -> Result<Self> {
        let instance = if c.claims.collapsing {
            Some(InstanceFile::from_star(&c.star_instance()?))
        } else {
            None
        };
        Ok(ConstructionFile {
            kind: c.kind,
            q: c.q,
            dim: c.dim,
            family: c
                .family
                .vectors()
                .iter()
                .map(|v| v.coords().to_vec())
                .collect(),
            claims: c.claims,
            instance,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: ConstructionFile = toml::from_str(text)
            .map_err(|e| Error::invalid(format!("malformed construction: {e}")))?;
        f.unit_family()?;
        if let Some(i) = &f.instance {
            i.validate()?;
        }
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::invalid(format!("cannot serialize construction: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text()?)
    }

    pub fn unit_family(&self) -> Result<UnitFamily> {
        UnitFamily::from_rows(self.family.clone(), LpExponent::from_dual(self.q)?)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}
