use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{closure, Composition};

/// Where a dataset came from and the row sums it had before closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub row_sums: Vec<f64>,
}

/// `n` closed compositions with group labels.
///
/// Labels are indices into `group_names`, which are kept in sorted order so
/// the same file always yields the same label numbering. The values exactly
/// as read (before closure) are retained for re-export.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCompositionDataset {
    component_names: Vec<String>,
    label_name: String,
    raw: Vec<Vec<f64>>,
    rows: Vec<Composition>,
    labels: Vec<usize>,
    group_names: Vec<String>,
    provenance: Provenance,
}

impl LabeledCompositionDataset {
    /// Builds a dataset from raw non-negative rows and string labels.
    /// Row numbers in errors are 1-based.
    pub fn from_raw(
        component_names: Vec<String>,
        raw: Vec<Vec<f64>>,
        labels: Vec<String>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        if raw.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: labels.len(),
            });
        }
        if component_names.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 components, got {}",
                component_names.len()
            )));
        }
        let mut rows = Vec::with_capacity(raw.len());
        let mut row_sums = Vec::with_capacity(raw.len());
        for (i, r) in raw.iter().enumerate() {
            let row = i + 1;
            if r.len() != component_names.len() {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    message: format!(
                        "expected {} components, got {}",
                        component_names.len(),
                        r.len()
                    ),
                });
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: component_names[j].clone(),
                        message: "value is not finite".into(),
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeValue {
                        row,
                        column: component_names[j].clone(),
                    });
                }
            }
            let c = closure(r).map_err(|_| Error::AllZeroRow { row })?;
            row_sums.push(r.iter().sum());
            rows.push(c);
        }
        let group_names: Vec<String> = {
            let mut g: Vec<String> = labels.clone();
            g.sort();
            g.dedup();
            g
        };
        let index: BTreeMap<&str, usize> = group_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let labels = labels.iter().map(|l| index[l.as_str()]).collect();
        Ok(LabeledCompositionDataset {
            component_names,
            label_name: "group".into(),
            raw,
            rows,
            labels,
            group_names,
            provenance: Provenance {
                source: source.into(),
                row_sums,
            },
        })
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = name.into();
        self
    }

    pub fn component_names(&self) -> &[String] {
        &self.component_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn rows(&self) -> &[Composition] {
        &self.rows
    }

    /// Values as read, before closure.
    pub fn raw(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of parts `D`.
    pub fn dim(&self) -> usize {
        self.component_names.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_groups()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn has_zeros(&self) -> bool {
        self.rows.iter().any(Composition::has_zeros)
    }

    /// 1-based numbers of the rows containing at least one zero.
    pub fn rows_with_zeros(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.has_zeros())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn zero_counts(&self) -> Vec<usize> {
        self.rows.iter().map(Composition::zero_count).collect()
    }

    /// Writes the raw values with a header row and group names as labels.
    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        let mut header = self.component_names.clone();
        header.push(self.label_name.clone());
        w.write_record(&header).map_err(csv_err)?;
        for (r, &l) in self.raw.iter().zip(&self.labels) {
            let mut rec: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            rec.push(self.group_names[l].clone());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// How to read a delimited file into a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub label_column: String,
    /// Columns ignored entirely.
    #[serde(default)]
    pub drop_columns: Vec<String>,
    /// Component columns; `None` means every column not dropped or the label.
    #[serde(default)]
    pub component_columns: Option<Vec<String>>,
    #[serde(default = "default_delimiter")]
    pub delimiter: u8,
    /// Renames raw label values; when non-empty, unknown labels are errors.
    #[serde(default)]
    pub label_map: Vec<(String, String)>,
}

fn default_delimiter() -> u8 {
    b','
}

impl DatasetSchema {
    pub fn new(label_column: impl Into<String>) -> Self {
        DatasetSchema {
            label_column: label_column.into(),
            drop_columns: Vec::new(),
            component_columns: None,
            delimiter: b',',
            label_map: Vec::new(),
        }
    }

    pub fn drop_columns<I, S>(mut self, cols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.drop_columns = cols.into_iter().map(Into::into).collect();
        self
    }

    pub fn delimiter(mut self, delimiter: u8) -> Self {
        self.delimiter = delimiter;
        self
    }

    /// The UCI glass identification file with a header row: `Id` and the
    /// refractive index `RI` are dropped, leaving the eight oxides, and the
    /// numeric `Type` codes are mapped to glass categories.
    pub fn uci_glass() -> Self {
        let map = [
            ("1", "window float"),
            ("2", "window non-float"),
            ("3", "vehicle window"),
            ("5", "containers"),
            ("6", "tableware"),
            ("7", "headlamps"),
        ];
        DatasetSchema {
            label_column: "Type".into(),
            drop_columns: vec!["Id".into(), "RI".into()],
            component_columns: None,
            delimiter: b',',
            label_map: map
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

/// Reads a delimited table with one header row.
pub fn read_dataset<R: Read>(
    reader: R,
    schema: &DatasetSchema,
    source: impl Into<String>,
) -> Result<LabeledCompositionDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let label_idx = find(&schema.label_column)?;
    for d in &schema.drop_columns {
        find(d)?;
    }
    let component_idx: Vec<usize> = match &schema.component_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..header.len())
            .filter(|&i| i != label_idx && !schema.drop_columns.contains(&header[i]))
            .collect(),
    };
    if component_idx.contains(&label_idx) {
        return Err(Error::InvalidDataset(
            "label column listed as a component".into(),
        ));
    }
    let names: Vec<String> = component_idx.iter().map(|&i| header[i].clone()).collect();
    if names.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 component columns, found {}",
            names.len()
        )));
    }
    let label_map: BTreeMap<&str, &str> = schema
        .label_map
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(component_idx.len());
        for (&c, name) in component_idx.iter().zip(&names) {
            let cell = rec.get(c).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: name.clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            values.push(v);
        }
        let label = rec.get(label_idx).unwrap_or("");
        if label.is_empty() {
            return Err(Error::Parse {
                row,
                column: schema.label_column.clone(),
                message: "empty label".into(),
            });
        }
        let label = if label_map.is_empty() {
            label.to_owned()
        } else {
            match label_map.get(label) {
                Some(m) => (*m).to_owned(),
                None => {
                    return Err(Error::Parse {
                        row,
                        column: schema.label_column.clone(),
                        message: format!("unknown label '{label}'"),
                    })
                }
            }
        };
        raw.push(values);
        labels.push(label);
    }
    if raw.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    Ok(
        LabeledCompositionDataset::from_raw(names, raw, labels, source)?
            .with_label_name(schema.label_column.clone()),
    )
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    schema: &DatasetSchema,
) -> Result<LabeledCompositionDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_dataset(
        std::io::BufReader::new(file),
        schema,
        path.display().to_string(),
    )
}

/// Entry point for untrusted bytes: never panics, any malformed input is an error.
pub fn parse_dataset_bytes(
    bytes: &[u8],
    schema: &DatasetSchema,
) -> Result<LabeledCompositionDataset> {
    read_dataset(bytes, schema, "<bytes>")
}

#[cfg(test)]
mod tests {
    use super::*;

    const PERCENT: &str = "a,b,c,label\n50,30,20,x\n10,10,80,y\n25,25,50,x\n0,40,60,y\n";

    #[test]
    fn percentage_rows_are_closed() {
        let ds = read_dataset(PERCENT.as_bytes(), &DatasetSchema::new("label"), "t").unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.group_names(), &["x", "y"]);
        assert_eq!(ds.labels(), &[0, 1, 0, 1]);
        for r in ds.rows() {
            assert!((r.parts().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ds.provenance().row_sums, vec![100.0; 4]);
        assert_eq!(ds.rows()[3].parts()[0], 0.0);
        assert_eq!(ds.rows_with_zeros(), vec![4]);
    }

    #[test]
    fn negative_value_reports_row() {
        let text = "a,b,t\n1,2,x\n1,-2,y\n";
        let err = read_dataset(text.as_bytes(), &DatasetSchema::new("t"), "t").unwrap_err();
        assert_eq!(
            err,
            Error::NegativeValue {
                row: 2,
                column: "b".into()
            }
        );
    }

    #[test]
    fn all_zero_and_parse_errors() {
        let s = DatasetSchema::new("t");
        let err = read_dataset("a,b,t\n0,0,x\n".as_bytes(), &s, "t").unwrap_err();
        assert_eq!(err, Error::AllZeroRow { row: 1 });
        let err = read_dataset("a,b,t\n1,zz,x\n".as_bytes(), &s, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, ref column, .. } if column == "b"));
        let err = read_dataset("a,b,t\n1,inf,x\n".as_bytes(), &s, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
        let err = read_dataset("a,b,t\n1,2\n".as_bytes(), &s, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn missing_columns() {
        let err = read_dataset("".as_bytes(), &DatasetSchema::new("t"), "t").unwrap_err();
        assert_eq!(err, Error::MissingColumn("t".into()));
        let s = DatasetSchema::new("t").drop_columns(["nope"]);
        let err = read_dataset("a,b,t\n1,2,x\n".as_bytes(), &s, "t").unwrap_err();
        assert_eq!(err, Error::MissingColumn("nope".into()));
    }

    #[test]
    fn label_map_and_drop() {
        let text = "Id,RI,Na,Mg,Al,Si,K,Ca,Ba,Fe,Type\n1,1.52,13,4,1,72,0.1,8,0,0,1\n2,1.51,13,0,1,72,0.1,8,0,0.1,7\n";
        let ds = read_dataset(text.as_bytes(), &DatasetSchema::uci_glass(), "t").unwrap();
        assert_eq!(ds.dim(), 8);
        assert_eq!(ds.component_names()[0], "Na");
        assert_eq!(ds.group_names(), &["headlamps", "window float"]);
        let bad = text.replace(",7\n", ",4\n");
        assert!(read_dataset(bad.as_bytes(), &DatasetSchema::uci_glass(), "t").is_err());
    }

    #[test]
    fn semicolon_delimiter() {
        let text = "a;b;t\n1;3;x\n";
        let ds = read_dataset(
            text.as_bytes(),
            &DatasetSchema::new("t").delimiter(b';'),
            "t",
        )
        .unwrap();
        assert_eq!(ds.rows()[0].parts(), &[0.25, 0.75]);
    }

    #[test]
    fn write_then_read_is_identical() {
        let text = "a,b,c,label\n0.1,0.2,0.3,x\n1e-9,3,7.000000000000001,y\n";
        let ds = read_dataset(text.as_bytes(), &DatasetSchema::new("label"), "t").unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, b',').unwrap();
        let back = read_dataset(buf.as_slice(), &DatasetSchema::new("label"), "t").unwrap();
        assert_eq!(back, ds);
    }
}
