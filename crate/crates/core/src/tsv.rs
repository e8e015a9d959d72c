//! Line-oriented TSV reading and writing shared by every file format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One non-blank, non-comment line split on tabs.
pub struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

/// Reads `path` and calls `f` for every data line. Blank lines and lines
/// starting with `#` are skipped. Line numbers are 1-based.
pub fn for_each_record<F>(path: &Path, mut f: F) -> Result<()>
where
    F: FnMut(Record<'_>) -> Result<()>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        f(Record {
            line: i + 1,
            fields: line.split('\t').collect(),
        })?;
    }
    Ok(())
}

impl Record<'_> {
    /// Checks the field count is within `[min, max]`.
    pub fn expect_fields(&self, path: &Path, min: usize, max: usize) -> Result<()> {
        let n = self.fields.len();
        if n < min || n > max {
            let want = if min == max {
                format!("{min}")
            } else {
                format!("{min}-{max}")
            };
            return Err(Error::parse(
                path,
                self.line,
                format!("expected {want} tab-separated fields, found {n}"),
            ));
        }
        if let Some(i) = self.fields.iter().position(|f| f.is_empty()) {
            return Err(Error::parse(path, self.line, format!("field {} is empty", i + 1)));
        }
        Ok(())
    }

    pub fn parse_field<T: std::str::FromStr>(&self, path: &Path, idx: usize, what: &str) -> Result<T> {
        self.fields[idx]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, self.line, format!("invalid {what}: {:?}", self.fields[idx])))
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(file))
}

/// Writes every row produced by `rows` and flushes.
pub fn write_file<F>(path: &Path, rows: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    rows(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
