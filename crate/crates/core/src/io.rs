//! JSON documents and atomic report writing.
//!
//! Measurements are written as decimal strings and read back from either
//! strings (`"3"`, `"0.25"`, `"7/2"`) or plain JSON numbers.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::metric::{validate_cross, CrossMetric, FiniteMetricSpace, ScaleFamily, DEFAULT_MIN_GAP};

/// Shortest decimal that reads back to the same `f64`.
pub fn format_decimal(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else if x != 0.0 && (x.abs() < 1e-5 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Decimal or `p/q`.
pub fn parse_decimal(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Number(s.to_string());
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberRepr {
    Str(String),
    Num(f64),
}

impl NumberRepr {
    fn value<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            NumberRepr::Num(x) => Ok(x),
            NumberRepr::Str(s) => parse_decimal(&s).map_err(E::custom),
        }
    }
}

/// `#[serde(with = "decimal")]` for `f64`.
pub mod decimal {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_decimal(*x))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        NumberRepr::deserialize(d)?.value()
    }
}

/// `#[serde(with = "decimal_opt")]` for `Option<f64>`.
pub mod decimal_opt {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&format_decimal(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        Option::<NumberRepr>::deserialize(d)?.map(NumberRepr::value).transpose()
    }
}

/// `#[serde(with = "decimal_vec")]` for `Vec<f64>`.
pub mod decimal_vec {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| format_decimal(*v)))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Vec::<NumberRepr>::deserialize(d)?.into_iter().map(NumberRepr::value).collect()
    }
}

/// `#[serde(with = "decimal_matrix")]` for row-major `Vec<Vec<f64>>`.
pub mod decimal_matrix {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|row| row.iter().map(|v| format_decimal(*v)).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<NumberRepr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(NumberRepr::value).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    pub basepoint: String,
    #[serde(with = "decimal_matrix")]
    pub dist: Vec<Vec<f64>>,
}

impl SpaceDoc {
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let dist = SquareMatrix::from_rows(self.dist.clone())?;
        let bp = self
            .points
            .iter()
            .position(|p| *p == self.basepoint)
            .ok_or_else(|| Error::UnknownLabel(self.basepoint.clone()))?;
        FiniteMetricSpace::new(self.points.clone(), dist, bp)
    }
}

impl From<&FiniteMetricSpace> for SpaceDoc {
    fn from(s: &FiniteMetricSpace) -> Self {
        Self {
            points: s.labels().to_vec(),
            basepoint: s.label(s.basepoint()).to_string(),
            dist: s.dist().rows(),
        }
    }
}

/// Cross block with its space given by a path relative to the cross file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossDoc {
    pub space_ref: String,
    #[serde(with = "decimal_matrix")]
    pub cross: Vec<Vec<f64>>,
    #[serde(with = "decimal", default = "default_gap")]
    pub min_gap: f64,
}

fn default_gap() -> f64 {
    DEFAULT_MIN_GAP
}

impl CrossDoc {
    pub fn new(space_ref: impl Into<String>, rho: &CrossMetric) -> Self {
        Self {
            space_ref: space_ref.into(),
            cross: rho.cross().rows(),
            min_gap: rho.min_gap(),
        }
    }

    pub fn to_cross(&self, space: Arc<FiniteMetricSpace>) -> Result<CrossMetric> {
        validate_cross(space, SquareMatrix::from_rows(self.cross.clone())?, self.min_gap)
    }
}

/// One stage of a family file, with its space inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    pub space: SpaceDoc,
    #[serde(with = "decimal_matrix")]
    pub cross: Vec<Vec<f64>>,
    #[serde(with = "decimal", default = "default_gap")]
    pub min_gap: f64,
}

/// `inclusions[t][i]` is the stage-`t+1` index of stage-`t` point `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    #[serde(with = "decimal_vec")]
    pub scales: Vec<f64>,
    pub stages: Vec<StageDoc>,
    pub inclusions: Vec<Vec<usize>>,
}

impl FamilyDoc {
    pub fn to_family(&self) -> Result<ScaleFamily> {
        let stages = self
            .stages
            .iter()
            .map(|s| {
                let space = Arc::new(s.space.to_space()?);
                validate_cross(space, SquareMatrix::from_rows(s.cross.clone())?, s.min_gap)
            })
            .collect::<Result<Vec<_>>>()?;
        ScaleFamily::new(self.scales.clone(), stages, self.inclusions.clone())
    }
}

impl From<&ScaleFamily> for FamilyDoc {
    fn from(f: &ScaleFamily) -> Self {
        Self {
            scales: f.scales().to_vec(),
            stages: f
                .stages()
                .iter()
                .map(|s| StageDoc {
                    space: SpaceDoc::from(&**s.space()),
                    cross: s.cross().rows(),
                    min_gap: s.min_gap(),
                })
                .collect(),
            inclusions: f.inclusions().to_vec(),
        }
    }
}

/// `children[l][i]`: level-`l+1` indices of the children of node `i` on level `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub depth: usize,
    pub children: Vec<Vec<Vec<usize>>>,
}

impl TreeDoc {
    pub fn to_tree(&self) -> Result<crate::tree::RootedTree> {
        crate::tree::RootedTree::new(self.depth, &self.children)
    }
}

impl From<&crate::tree::RootedTree> for TreeDoc {
    fn from(t: &crate::tree::RootedTree) -> Self {
        let mut children = vec![Vec::new(); t.depth()];
        for id in t.up_to_depth(t.depth().saturating_sub(1)) {
            if t.depth() == 0 {
                break;
            }
            let l = t.node_depth(id);
            let first_next = t.up_to_depth(l).end;
            children[l].push(t.children(id).iter().map(|c| c - first_next).collect());
        }
        Self {
            depth: t.depth(),
            children,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub n: usize,
    #[serde(with = "decimal_matrix")]
    pub directions: Vec<Vec<f64>>,
    #[serde(with = "decimal_vec")]
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumDoc {
    pub m: u32,
    pub directions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryDoc {
    #[serde(with = "decimal_matrix")]
    pub matrix: Vec<Vec<f64>>,
    pub strata: Vec<StratumDoc>,
}

/// Input of `sphi-enumerate`: the universe size of `PB(X_n)` and `Φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphiDoc {
    pub n: usize,
    pub phi: Vec<crate::sphi::PartialBijectionDoc>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Cross file plus the space it references.
pub fn read_cross(path: &Path) -> Result<CrossMetric> {
    let doc: CrossDoc = read_json(path)?;
    let space_path = resolve(path, &doc.space_ref);
    let space: SpaceDoc = read_json(&space_path)?;
    doc.to_cross(Arc::new(space.to_space()?))
}

fn resolve(from: &Path, rel: &str) -> PathBuf {
    from.parent().unwrap_or_else(|| Path::new(".")).join(rel)
}

/// Hex SHA-256 over the given byte strings in order.
pub fn digest<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(3.0), "3");
        assert_eq!(format_decimal(0.25), "0.25");
        assert_eq!(format_decimal(-2.0), "-2");
        assert_eq!(parse_decimal("7/2").unwrap(), 3.5);
        assert_eq!(parse_decimal(" 1e3 ").unwrap(), 1000.0);
        assert!(parse_decimal("1/0").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("inf").is_err());
        assert_eq!(format_decimal(3.5e-16), "3.5e-16");
        let x = 0.1 + 0.2;
        assert_eq!(parse_decimal(&format_decimal(x)).unwrap(), x);
    }

    #[test]
    fn space_round_trip() {
        let json = r#"{"points":["a","b","c"],"basepoint":"a","dist":[["0","1",2],["1","0","1"],["2","1","0"]]}"#;
        let doc: SpaceDoc = serde_json::from_str(json).unwrap();
        let s = doc.to_space().unwrap();
        assert_eq!(s.d(0, 2), 2.0);
        let back = serde_json::to_string(&SpaceDoc::from(&s)).unwrap();
        assert_eq!(back, r#"{"points":["a","b","c"],"basepoint":"a","dist":[["0","1","2"],["1","0","1"],["2","1","0"]]}"#);
    }

    #[test]
    fn malformed_reports_location() {
        let err = serde_json::from_str::<SpaceDoc>("{\"points\": [\"a\"],\n \"dist\": [[\"x\"]]}").unwrap_err();
        assert!(err.line() >= 1);
        let e = serde_json::from_str::<SpaceDoc>(r#"{"points":["a"],"basepoint":"a","dist":[["q"]]}"#).unwrap_err();
        assert!(e.to_string().contains("malformed number"));
    }

    #[test]
    fn tree_doc_round_trip() {
        let t = crate::tree::RootedTree::regular(2, 3).unwrap();
        let doc = TreeDoc::from(&t);
        assert_eq!(doc.children[0], vec![vec![0, 1]]);
        assert_eq!(doc.children[1], vec![vec![0, 1], vec![2, 3]]);
        let back = doc.to_tree().unwrap();
        assert_eq!(back.len(), 15);
        assert_eq!(TreeDoc::from(&back), doc);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn digest_is_framed() {
        assert_ne!(digest([b"ab".as_slice(), b"c"]), digest([b"a".as_slice(), b"bc"]));
    }
}
