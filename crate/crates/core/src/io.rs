//! Reading and writing spaces, loops, maps and fields.
//!
//! Space files are chosen by extension: `.csv` holds a distance matrix
//! (an optional header row of labels is detected), `.json` holds a
//! generator spec, a `{"matrix": …}` object or a `{"vertex_count", "edges"}`
//! graph, and anything else is an edge list of `u v [w]` lines with `#`
//! comments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::{GridSpec, SampledLoop, SampledMap, ScalarField};
use crate::error::{Error, Result};
use crate::gallery::{generate, GeneratorSpec};
use crate::space::{metric_from_graph, validate_metric, FiniteMetricSpace, GraphSpec};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SpaceJson {
    Generator(GeneratorSpec),
    Matrix {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Graph(GraphSpec),
}

pub fn read_space(path: &Path, tol_metric: f64) -> Result<FiniteMetricSpace> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_matrix_csv(&text, tol_metric),
        Some("json") => match serde_json::from_str::<SpaceJson>(&text)? {
            SpaceJson::Generator(spec) => generate(&spec),
            SpaceJson::Matrix { matrix, labels } => {
                let s = validate_metric(&matrix, tol_metric)?;
                match labels {
                    Some(l) => s.with_labels(l),
                    None => Ok(s),
                }
            }
            SpaceJson::Graph(g) => metric_from_graph(&g),
        },
        _ => metric_from_graph(&parse_edge_list(&text)?),
    }
}

pub fn parse_matrix_csv(text: &str, tol_metric: f64) -> Result<FiniteMetricSpace> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = None;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => labels = Some(record.iter().map(str::to_owned).collect::<Vec<_>>()),
            Err(e) => return Err(Error::Parse { line: line + 1, message: e.to_string() }),
        }
    }
    let space = validate_metric(&rows, tol_metric)?;
    match labels {
        Some(l) => space.with_labels(l),
        None => Ok(space),
    }
}

/// `u v [w]` per line, weight 1 when omitted. A line holding a single
/// integer before any edge sets the vertex count (to allow isolated
/// trailing vertices, which then fail the connectivity check).
pub fn parse_edge_list(text: &str) -> Result<GraphSpec> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [n] if edges.is_empty() && declared.is_none() => {
                declared = Some(n.parse().map_err(|e| err(format!("bad vertex count {n:?}: {e}")))?);
            }
            [u, v, rest @ ..] if rest.len() <= 1 => {
                let u: usize = u.parse().map_err(|e| err(format!("bad vertex {u:?}: {e}")))?;
                let v: usize = v.parse().map_err(|e| err(format!("bad vertex {v:?}: {e}")))?;
                let w: f64 = match rest.first() {
                    Some(w) => w.parse().map_err(|e| err(format!("bad weight {w:?}: {e}")))?,
                    None => 1.0,
                };
                edges.push((u, v, w));
            }
            _ => return Err(err(format!("expected `u v [w]`, got {line:?}"))),
        }
    }
    let seen = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    Ok(GraphSpec::new(declared.unwrap_or(seen).max(seen), edges))
}

pub fn write_matrix_csv(space: &FiniteMetricSpace, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(labels) = space.labels() {
        w.write_record(labels)?;
    }
    for row in space.to_rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves `reference` against the directory holding `file`.
fn resolve(file: &Path, reference: &str) -> PathBuf {
    let r = Path::new(reference);
    if r.is_absolute() {
        r.to_path_buf()
    } else {
        file.parent().unwrap_or(Path::new(".")).join(r)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_ref: Option<String>,
    /// Omitted times mean equal spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub points: Vec<usize>,
}

impl LoopFile {
    pub fn to_loop(&self) -> Result<SampledLoop> {
        match &self.times {
            Some(t) => SampledLoop::new(t.clone(), self.points.clone()),
            None => SampledLoop::uniform(self.points.clone()),
        }
    }
}

pub fn read_loop(path: &Path) -> Result<(SampledLoop, Option<PathBuf>)> {
    let f: LoopFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok((f.to_loop()?, f.space_ref.as_deref().map(|r| resolve(path, r))))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_ref: Option<String>,
    pub grid: GridSpec,
    pub values: Vec<Option<usize>>,
}

/// Reads a map file and the space it points into (`space` overrides `space_ref`).
pub fn read_map(path: &Path, space: Option<&Path>, tol_metric: f64) -> Result<(FiniteMetricSpace, SampledMap)> {
    let f: MapFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let space_path = match (space, &f.space_ref) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(r)) => resolve(path, r),
        (None, None) => return Err(Error::InvalidInput("map file has no space_ref and no space was given".into())),
    };
    let space = read_space(&space_path, tol_metric)?;
    let map = SampledMap::new(&space, f.grid, f.values)?;
    Ok((space, map))
}

pub fn map_file(map: &SampledMap, space_ref: Option<String>) -> MapFile {
    MapFile { space_ref, grid: map.grid.clone(), values: map.values.clone() }
}

/// A field file `{values, lip}`, validated against the space.
pub fn read_field(path: &Path, space: &FiniteMetricSpace) -> Result<ScalarField> {
    let f: ScalarField = serde_json::from_str(&fs::read_to_string(path)?)?;
    f.validate(space)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_lists() {
        let g = parse_edge_list("# a path\n0 1\n1 2 2.5 # heavy\n\n").unwrap();
        assert_eq!(g.vertex_count, 3);
        assert_eq!(g.edges, vec![(0, 1, 1.0), (1, 2, 2.5)]);
        let declared = parse_edge_list("4\n0 1\n").unwrap();
        assert_eq!(declared.vertex_count, 4);
        assert!(matches!(parse_edge_list("0 1\n1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_edge_list("0 1 2 3\n").is_err());
    }

    #[test]
    fn matrix_csv_with_and_without_header() {
        let s = parse_matrix_csv("0,1,2\n1,0,1\n2,1,0\n", 1e-9).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        let s = parse_matrix_csv("a,b\n0,3\n3,0\n", 1e-9).unwrap();
        assert_eq!(s.labels().unwrap(), ["a", "b"]);
        assert!(parse_matrix_csv("0,1\n1,x\n", 1e-9).is_err());
        assert!(parse_matrix_csv("0,1,5\n1,0,1\n5,1,0\n", 1e-9).is_err());
    }

    #[test]
    fn round_trip_csv() {
        let s = parse_matrix_csv("0,1.5\n1.5,0\n", 1e-9).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1.5\n1.5,0\n");
    }
}
