//! On-disk formats: frame files (JSON), coefficient files (CSV) and sampling
//! scheme files (JSON).
//!
//! Every floating-point number in these files is written as a decimal with 17
//! significant digits, enough to reproduce the original `f64` bit for bit.
//! Indices in files are 1-based.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use framebridge::sampling::{SamplePoint, SamplingScheme};
use framebridge::{CMatrix, Complex64, Frame};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::exit::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// An `f64` written with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exact(pub f64);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite number"));
        }
        RawValue::from_string(self.to_string())
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Exact)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Synthesis,
    Analysis,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Synthesis => "synthesis",
            Role::Analysis => "analysis",
        })
    }
}

/// A finite frame as stored on disk: `vectors[j][i] = [re, im]` is coordinate
/// `i` of frame vector `j + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub schema_version: u32,
    pub field: FieldTag,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    pub vectors: Vec<Vec<[Exact; 2]>>,
}

impl FrameFile {
    pub fn from_frame(frame: &Frame, role: Option<Role>) -> Self {
        let m = frame.as_matrix();
        let field = if m.iter().all(|z| z.im == 0.0) {
            FieldTag::Real
        } else {
            FieldTag::Complex
        };
        let vectors = m
            .column_iter()
            .map(|col| col.iter().map(|z| [Exact(z.re), Exact(z.im)]).collect())
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            field,
            dim: frame.dim(),
            role,
            vectors,
        }
    }

    pub fn to_frame(&self) -> Result<Frame, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported frame schema_version {}",
                self.schema_version
            )));
        }
        if self.vectors.is_empty() {
            return Err(CliError::Input("frame file has no vectors".into()));
        }
        for (j, v) in self.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(CliError::Input(format!(
                    "vector {} has {} coordinates, expected dim {}",
                    j + 1,
                    v.len(),
                    self.dim
                )));
            }
            if self.field == FieldTag::Real && v.iter().any(|[_, im]| im.0 != 0.0) {
                return Err(CliError::Input(format!(
                    "vector {} has an imaginary part in a real frame file",
                    j + 1
                )));
            }
        }
        let m = CMatrix::from_fn(self.dim, self.vectors.len(), |i, j| {
            let [re, im] = self.vectors[j][i];
            Complex64::new(re.0, im.0)
        });
        Frame::from_columns(m).map_err(CliError::from)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Input(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad frame file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_text(path, &self.to_json()?)
    }
}

/// Known coefficients keyed by 1-based index; absent indices are erasures.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientFile {
    pub values: BTreeMap<usize, Complex64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRow {
    index: usize,
    re: String,
    im: String,
}

impl CoefficientFile {
    /// Every entry of `values`, indexed from 1.
    pub fn complete(values: impl IntoIterator<Item = Complex64>) -> Self {
        Self {
            values: values
                .into_iter()
                .enumerate()
                .map(|(j, z)| (j + 1, z))
                .collect(),
        }
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| CliError::Input(format!("bad coefficient file: {e}")))?;
        if headers != vec!["index", "re", "im"] {
            return Err(CliError::Input(
                "coefficient file header must be index,re,im".into(),
            ));
        }
        let mut values = BTreeMap::new();
        for row in reader.deserialize::<CoefficientRow>() {
            let row = row.map_err(|e| CliError::Input(format!("bad coefficient row: {e}")))?;
            if row.index == 0 {
                return Err(CliError::Input("coefficient indices are 1-based".into()));
            }
            let z = Complex64::new(parse_number(&row.re)?, parse_number(&row.im)?);
            if values.insert(row.index, z).is_some() {
                return Err(CliError::Input(format!(
                    "coefficient index {} appears twice",
                    row.index
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for (&index, z) in &self.values {
            writer
                .serialize(CoefficientRow {
                    index,
                    re: Exact(z.re).to_string(),
                    im: Exact(z.im).to_string(),
                })
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Input(e.to_string()))?;
        if self.values.is_empty() {
            return Ok("index,re,im\n".into());
        }
        String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        Self::from_csv(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_text(path, &self.to_csv()?)
    }

    /// Largest index present.
    pub fn max_index(&self) -> usize {
        self.values.keys().next_back().copied().unwrap_or(0)
    }

    /// Dense list of length `len` with `None` for missing entries.
    pub fn to_erased(&self, len: usize) -> Result<Vec<Option<Complex64>>, CliError> {
        if self.max_index() > len {
            return Err(CliError::Input(format!(
                "coefficient index {} out of range 1..={len}",
                self.max_index()
            )));
        }
        Ok((1..=len).map(|j| self.values.get(&j).copied()).collect())
    }
}

fn parse_number(s: &str) -> Result<f64, CliError> {
    let x: f64 = s
        .parse()
        .map_err(|_| CliError::Input(format!("not a number: {s:?}")))?;
    if !x.is_finite() {
        return Err(CliError::Input(format!("non-finite number: {s:?}")));
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub index: i64,
    pub spacing: Exact,
}

/// A sampling scheme: kind, points `t = index · spacing` and the table
/// `value_table[j][k] = f_j(t_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub schema_version: u32,
    pub kind: String,
    pub space_dim: usize,
    pub synthesis_weight: Exact,
    pub points: Vec<PointRecord>,
    pub value_table: Vec<Vec<[Exact; 2]>>,
}

impl SchemeFile {
    pub fn from_scheme(scheme: &SamplingScheme) -> Self {
        let table = scheme.value_table();
        Self {
            schema_version: SCHEMA_VERSION,
            kind: scheme.kind().as_str().to_string(),
            space_dim: scheme.space_dim(),
            synthesis_weight: Exact(scheme.synthesis_weight()),
            points: scheme
                .points()
                .iter()
                .map(|p| PointRecord {
                    index: p.index,
                    spacing: Exact(p.spacing),
                })
                .collect(),
            value_table: table
                .row_iter()
                .map(|row| row.iter().map(|z| [Exact(z.re), Exact(z.im)]).collect())
                .collect(),
        }
    }

    /// Imported schemes are custom schemes: the table is kept, any induced
    /// dual pair is not.
    pub fn to_scheme(&self) -> Result<SamplingScheme, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported scheme schema_version {}",
                self.schema_version
            )));
        }
        let n = self.points.len();
        if self.value_table.len() != n || self.value_table.iter().any(|r| r.len() != n) {
            return Err(CliError::Input(format!(
                "value table must be {n} x {n} for {n} points"
            )));
        }
        let table = CMatrix::from_fn(n, n, |j, k| {
            let [re, im] = self.value_table[j][k];
            Complex64::new(re.0, im.0)
        });
        let points = self
            .points
            .iter()
            .map(|p| SamplePoint {
                index: p.index,
                spacing: p.spacing.0,
            })
            .collect();
        SamplingScheme::custom(points, table, self.space_dim, self.synthesis_weight.0)
            .map_err(CliError::from)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Input(format!("bad scheme file: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Input(e.to_string()))?;
        s.push('\n');
        write_text(path, &s)
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses `"2,4"` (1-based) into a sorted, deduplicated list.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: usize = part
            .parse()
            .map_err(|_| format!("not an index: {part:?}"))?;
        if i == 0 {
            return Err("indices are 1-based".into());
        }
        out.push(i);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use framebridge::fixtures;

    #[test]
    fn exact_formatting() {
        assert_eq!(Exact(1.0).to_string(), "1.0000000000000000e0");
        assert_eq!(Exact(-0.25).to_string(), "-2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(
            Exact(x).to_string().parse::<f64>().unwrap().to_bits(),
            x.to_bits()
        );
    }

    #[test]
    fn frame_file_round_trip() {
        let pair = fixtures::paper_2d();
        let file = FrameFile::from_frame(pair.synthesis(), Some(Role::Synthesis));
        assert_eq!(file.field, FieldTag::Real);
        let back = FrameFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_frame().unwrap(), *pair.synthesis());
    }

    #[test]
    fn frame_file_rejects_ragged_vectors() {
        let text = r#"{"schema_version":1,"field":"real","dim":2,"vectors":[[[1,0]]]}"#;
        let file = FrameFile::from_json(text).unwrap();
        assert!(file.to_frame().is_err());
    }

    #[test]
    fn frame_file_rejects_imaginary_parts_in_real_files() {
        let text = r#"{"schema_version":1,"field":"real","dim":1,"vectors":[[[1,0.5]]]}"#;
        assert!(FrameFile::from_json(text).unwrap().to_frame().is_err());
    }

    #[test]
    fn coefficient_csv_round_trip() {
        let mut file = CoefficientFile::default();
        file.values.insert(1, Complex64::new(3.0, 0.0));
        file.values.insert(3, Complex64::new(-1.0 / 3.0, 2e-300));
        let text = file.to_csv().unwrap();
        assert!(text.starts_with("index,re,im\n1,3.0000000000000000e0,"));
        assert_eq!(CoefficientFile::from_csv(&text).unwrap(), file);
        assert_eq!(
            file.to_erased(4).unwrap(),
            vec![
                Some(Complex64::new(3.0, 0.0)),
                None,
                Some(file.values[&3]),
                None
            ]
        );
        assert!(file.to_erased(2).is_err());
    }

    #[test]
    fn coefficient_csv_errors() {
        assert!(CoefficientFile::from_csv("i,re,im\n").is_err());
        assert!(CoefficientFile::from_csv("index,re,im\n0,1,0\n").is_err());
        assert!(CoefficientFile::from_csv("index,re,im\n1,1,0\n1,2,0\n").is_err());
        assert!(CoefficientFile::from_csv("index,re,im\n1,x,0\n").is_err());
        assert!(CoefficientFile::from_csv("index,re,im\n1,NaN,0\n").is_err());
        assert_eq!(
            CoefficientFile::from_csv("index,re,im\n")
                .unwrap()
                .values
                .len(),
            0
        );
    }

    #[test]
    fn index_lists() {
        assert_eq!(parse_index_list("4, 2,2").unwrap(), vec![2, 4]);
        assert_eq!(parse_index_list("").unwrap(), Vec::<usize>::new());
        assert!(parse_index_list("0").is_err());
        assert!(parse_index_list("a").is_err());
    }

    #[test]
    fn scheme_file_round_trip() {
        let scheme = framebridge::build_truncated_shannon(0.5, 3).unwrap();
        let file = SchemeFile::from_scheme(&scheme);
        let text = serde_json::to_string(&file).unwrap();
        let back: SchemeFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        let imported = back.to_scheme().unwrap();
        assert_eq!(imported.value_table(), scheme.value_table());
        assert_eq!(imported.points(), scheme.points());
    }
}
