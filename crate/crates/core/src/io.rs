//! JSON file formats for chains, kernels, trees, point clouds and time sets.
//!
//! Floats are written in exponent form with 17 significant digits, so every
//! value round-trips bit for bit.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::brownian::{CloudSource, PointCloud};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::lattice::{CantorSpec, TimeSet, TimeSetSpec};
use crate::tree::PercTree;

/// serde_json formatter printing `f64` as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreciseFormatter;

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with precise floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PreciseFormatter);
    value.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| Error::Format(e.to_string()))
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub n_states: usize,
    pub root: usize,
    pub transitions: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl From<&ChainSpec> for ChainFile {
    fn from(c: &ChainSpec) -> Self {
        ChainFile {
            n_states: c.n_states(),
            root: c.root(),
            transitions: c.transitions().to_vec(),
            labels: c.labels().map(<[String]>::to_vec),
        }
    }
}

impl ChainFile {
    pub fn into_chain(self) -> Result<ChainSpec> {
        ChainSpec::new(self.n_states, self.root, self.transitions, self.labels)
    }
}

pub fn chain_to_json(c: &ChainSpec) -> Result<String> {
    to_json(&ChainFile::from(c))
}

pub fn chain_from_json(s: &str) -> Result<ChainSpec> {
    serde_json::from_str::<ChainFile>(s)?.into_chain()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelEntry {
    Value(f64),
    Text(String),
}

impl KernelEntry {
    fn from_f64(v: f64) -> Self {
        if v.is_infinite() { KernelEntry::Text("inf".into()) } else { KernelEntry::Value(v) }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            KernelEntry::Value(v) => Ok(*v),
            KernelEntry::Text(t) if t == "inf" => Ok(f64::INFINITY),
            KernelEntry::Text(t) => Err(Error::Format(format!("unexpected kernel entry {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub size: usize,
    pub rows: Vec<Vec<KernelEntry>>,
}

pub fn kernel_to_json(k: &KernelMatrix) -> Result<String> {
    let rows = (0..k.size()).map(|i| k.row(i).iter().map(|&v| KernelEntry::from_f64(v)).collect()).collect();
    to_json(&KernelFile { size: k.size(), rows })
}

pub fn kernel_from_json(s: &str) -> Result<KernelMatrix> {
    let f: KernelFile = serde_json::from_str(s)?;
    if f.rows.len() != f.size {
        return Err(Error::DimensionMismatch { expected: f.size, got: f.rows.len() });
    }
    let rows = f
        .rows
        .iter()
        .map(|r| r.iter().map(KernelEntry::to_f64).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    KernelMatrix::from_rows(&rows)
}

/// Nested tree node; `p` is the probability of the edge from the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub children: Vec<TreeNode>,
}

pub fn tree_from_nested(root: &TreeNode) -> Result<PercTree> {
    if root.p.is_some() {
        return Err(Error::InvalidTree("the root has no parent edge".into()));
    }
    let mut tree = PercTree::new();
    let mut stack: Vec<(usize, &TreeNode)> = root.children.iter().rev().map(|c| (0, c)).collect();
    // depth-first, left to right, so children keep their file order
    while let Some((parent, node)) = stack.pop() {
        let p = node.p.ok_or_else(|| Error::InvalidTree("non-root node without p".into()))?;
        let id = tree.add_child(parent, p)?;
        stack.extend(node.children.iter().rev().map(|c| (id, c)));
    }
    Ok(tree)
}

pub fn tree_to_nested(tree: &PercTree) -> TreeNode {
    fn build(tree: &PercTree, v: usize) -> TreeNode {
        TreeNode {
            p: tree.parent(v).map(|_| tree.edge_probability(v)),
            children: tree.children(v).iter().map(|&c| build(tree, c)).collect(),
        }
    }
    build(tree, tree.root())
}

pub fn tree_to_json(tree: &PercTree) -> Result<String> {
    to_json(&tree_to_nested(tree))
}

pub fn tree_from_json(s: &str) -> Result<PercTree> {
    tree_from_nested(&serde_json::from_str(s)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSizes {
    Uniform(f64),
    PerPoint(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudFile {
    pub d: usize,
    pub h: CellSizes,
    pub points: Vec<Vec<f64>>,
}

pub fn cloud_to_json(c: &PointCloud) -> Result<String> {
    let h = c.cell_sizes();
    let h = if h.windows(2).all(|w| w[0] == w[1]) && !h.is_empty() {
        CellSizes::Uniform(h[0])
    } else {
        CellSizes::PerPoint(h.to_vec())
    };
    to_json(&CloudFile { d: c.dim(), h, points: c.points().to_vec() })
}

pub fn cloud_from_json(s: &str) -> Result<PointCloud> {
    let f: CloudFile = serde_json::from_str(s)?;
    let h = match f.h {
        CellSizes::Uniform(v) => vec![v; f.points.len()],
        CellSizes::PerPoint(v) => v,
    };
    PointCloud::new(f.d, f.points, h, CloudSource::Explicit)
}

pub fn time_set_from_json(s: &str) -> Result<TimeSet> {
    TimeSet::build(serde_json::from_str::<TimeSetSpec>(s)?)
}

pub fn time_set_to_json(t: &TimeSet) -> Result<String> {
    to_json(&t.spec)
}

pub fn cantor_from_json(s: &str) -> Result<CantorSpec> {
    let c: CantorSpec = serde_json::from_str(s)?;
    c.validate()?;
    Ok(c)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
