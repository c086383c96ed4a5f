//! File formats: scores, logits and features CSVs, curve exports and
//! metric reports.
//!
//! Every diagnostic names the file, the 1-based line and the column.

mod curves;
mod scores;
mod vectors;

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use curves::{read_surface, write_binned_curve, write_curve, write_surface};
pub use scores::{load_scores, read_scores, write_scores, write_scores_to};
pub use vectors::{load_features, load_logits, read_vectors, write_vectors, VectorKind};
pub use crate::report::{load_report, write_report, ReportFormat};

pub(crate) fn parse_error(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

pub(crate) fn schema_error(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

pub(crate) struct Rows<R> {
    reader: csv::Reader<R>,
    path: PathBuf,
    record: csv::StringRecord,
}

pub(crate) fn csv_reader<R: Read>(reader: R, path: &Path) -> Rows<R> {
    Rows {
        reader: csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader),
        path: path.to_path_buf(),
        record: csv::StringRecord::new(),
    }
}

impl<R: Read> Rows<R> {
    fn read(&mut self) -> Result<Option<usize>> {
        match self.reader.read_record(&mut self.record) {
            Ok(true) => Ok(Some(self.record.position().map_or(0, |p| p.line() as usize))),
            Ok(false) => Ok(None),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Err(parse_error(&self.path, line, "", e.to_string()))
            }
        }
    }

    pub fn header(&mut self) -> Result<Vec<String>> {
        match self.read()? {
            Some(_) => Ok(self.record.iter().map(|f| f.trim().to_string()).collect()),
            None => Err(parse_error(&self.path, 1, "", "missing header")),
        }
    }

    pub fn next_row(&mut self, header: &[String]) -> Result<Option<Row>> {
        let Some(line) = self.read()? else {
            return Ok(None);
        };
        let n = self.record.len();
        if n != header.len() {
            let column = header.get(n).or(header.last()).map_or("", String::as_str);
            return Err(parse_error(
                &self.path,
                line,
                column,
                format!("expected {} fields, found {n}", header.len()),
            ));
        }
        Ok(Some(Row {
            line,
            fields: self.record.iter().map(|f| f.trim().to_string()).collect(),
        }))
    }
}
