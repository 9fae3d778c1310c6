//! Reading inputs, hashing them and writing outputs atomically.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use simplex_clf::dataio::{read_dataset, DatasetSchema, LabeledCompositionDataset};

use crate::args::{DataArgs, Format, Preset};
use crate::CliError;

pub fn read_bytes(path: &str) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    if path == "-" {
        std::io::stdin()
            .read_to_end(&mut bytes)
            .context("reading standard input")
            .map_err(CliError::Input)?;
    } else {
        bytes = fs::read(path)
            .with_context(|| format!("reading {path}"))
            .map_err(CliError::Input)?;
    }
    Ok(bytes)
}

/// Tab when the header line has tabs but no commas.
pub fn sniff_delimiter(bytes: &[u8]) -> u8 {
    let header = bytes.split(|&b| b == b'\n').next().unwrap_or(&[]);
    if header.contains(&b'\t') && !header.contains(&b',') {
        b'\t'
    } else {
        b','
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn schema(args: &DataArgs, bytes: &[u8]) -> DatasetSchema {
    let schema = match args.preset {
        Some(Preset::Glass) => DatasetSchema::uci_glass(),
        None => DatasetSchema::new(args.label_col.clone()).drop_columns(args.drop_cols.clone()),
    };
    schema.delimiter(sniff_delimiter(bytes))
}

/// Identifies the input of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub sha256: String,
    pub n: usize,
    pub dim: usize,
    pub components: Vec<String>,
    pub groups: Vec<String>,
    pub group_sizes: Vec<usize>,
}

pub struct Loaded {
    pub ds: LabeledCompositionDataset,
    pub info: DatasetInfo,
}

pub fn load(args: &DataArgs) -> Result<Loaded, CliError> {
    let bytes = read_bytes(&args.data)?;
    let ds = read_dataset(bytes.as_slice(), &schema(args, &bytes), args.data.clone())
        .map_err(|e| CliError::from(e).context(format!("loading {}", args.data)))?;
    let info = DatasetInfo {
        source: args.data.clone(),
        sha256: sha256_hex(&bytes),
        n: ds.len(),
        dim: ds.dim(),
        components: ds.component_names().to_vec(),
        groups: ds.group_names().to_vec(),
        group_sizes: ds.group_sizes(),
    };
    Ok(Loaded { ds, info })
}

/// Shortest representation that reads back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), num)
}

/// A delimited table with a header row.
pub fn table(delimiter: u8, header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(Vec::new());
    let mut write = |rec: &[String]| w.write_record(rec).map_err(|e| CliError::Input(e.into()));
    write(header)?;
    for r in rows {
        write(r)?;
    }
    w.into_inner().map_err(|e| CliError::Input(anyhow!("{e}")))
}

pub fn delimiter(format: Format) -> u8 {
    match format {
        Format::Tsv => b'\t',
        _ => b',',
    }
}

pub fn extension(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Tsv => "tsv",
        Format::Csv => "csv",
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Input(e.into()))?;
    out.push(b'\n');
    Ok(out)
}

/// Outputs of one command. Nothing touches the file system until
/// [`Sink::commit`], so a failing command leaves no partial results.
pub struct Sink {
    dir: Option<PathBuf>,
    primary: Option<(String, Vec<u8>)>,
    extra: Vec<(String, Vec<u8>)>,
}

impl Sink {
    pub fn new(dir: Option<&str>) -> Self {
        Sink {
            dir: dir.map(PathBuf::from),
            primary: None,
            extra: Vec::new(),
        }
    }

    /// Written to standard output when there is no output directory.
    pub fn primary(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.primary = Some((name.into(), bytes));
    }

    /// Written only into the output directory.
    pub fn extra(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.extra.push((name.into(), bytes));
    }

    pub fn commit(self) -> Result<(), CliError> {
        let Some(dir) = self.dir else {
            if let Some((_, bytes)) = self.primary {
                let mut out = std::io::stdout().lock();
                match out.write_all(&bytes).and_then(|_| out.flush()) {
                    // a closed pipe (`| head`) is not an error
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                        return Err(CliError::Input(
                            anyhow::Error::new(e).context("writing standard output"),
                        ))
                    }
                    _ => {}
                }
            }
            return Ok(());
        };
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(CliError::Input)?;
        for (name, bytes) in self.primary.iter().chain(&self.extra) {
            write_atomic(&dir.join(name), bytes)
                .with_context(|| format!("writing {}", dir.join(name).display()))
                .map_err(CliError::Input)?;
        }
        Ok(())
    }
}

/// Writes to a temporary file in the same directory, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::other("output path has no file name"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffs_tabs() {
        assert_eq!(sniff_delimiter(b"a\tb\tlabel\n1\t2\tx\n"), b'\t');
        assert_eq!(sniff_delimiter(b"a,b,label\n"), b',');
        assert_eq!(sniff_delimiter(b""), b',');
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0, 1e-17, -2.5e300, 1.0 / 3.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt_num(None), "NA");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
