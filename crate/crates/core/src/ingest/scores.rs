use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{EvalSet, Population};
use crate::error::{Error, Result};

use super::{create, csv_reader, parse_error, schema_error, Row};

const FIXED: [&str; 3] = ["sample_id", "domain", "correct"];

/// Loads a scores CSV (`sample_id,domain,correct,<channel...>`).
pub fn load_scores(path: impl AsRef<Path>) -> Result<EvalSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores(file, path)
}

/// Parses scores CSV text; `path` only labels diagnostics.
pub fn read_scores(reader: impl Read, path: &Path) -> Result<EvalSet> {
    let mut rows = csv_reader(reader, path);
    let header = rows.header()?;
    for (i, expected) in FIXED.iter().enumerate() {
        if header.get(i).map(String::as_str) != Some(*expected) {
            return Err(parse_error(
                path,
                1,
                header.get(i).map_or(*expected, String::as_str),
                format!("missing header: expected `{}` first", FIXED.join(",")),
            ));
        }
    }
    let channels: Vec<String> = header[FIXED.len()..].to_vec();
    if channels.is_empty() {
        return Err(schema_error(path, 1, "correct", "no score channels after `correct`"));
    }
    for (i, name) in channels.iter().enumerate() {
        if name.is_empty() || channels[..i].contains(name) {
            return Err(schema_error(path, 1, name, "channel names must be unique and non-empty"));
        }
    }

    let mut sample_ids = Vec::new();
    let mut populations = Vec::new();
    let mut columns = vec![Vec::new(); channels.len()];
    while let Some(row) = rows.next_row(&header)? {
        let Row { line, fields } = row;
        let population = match (fields[1].as_str(), fields[2].as_str()) {
            ("id", "1") => Population::IdCorrect,
            ("id", "0") => Population::IdWrong,
            ("id", other) => {
                return Err(schema_error(
                    path,
                    line,
                    "correct",
                    format!("id rows need correct = 0 or 1, got `{other}`"),
                ))
            }
            ("ood", "") => Population::Ood,
            ("ood", other) => {
                return Err(schema_error(
                    path,
                    line,
                    "correct",
                    format!("ood rows must leave correct empty, got `{other}`"),
                ))
            }
            (other, _) => {
                return Err(schema_error(
                    path,
                    line,
                    "domain",
                    format!("domain must be `id` or `ood`, got `{other}`"),
                ))
            }
        };
        for ((column, name), text) in columns.iter_mut().zip(&channels).zip(&fields[3..]) {
            let value: f64 = text
                .trim()
                .parse()
                .map_err(|_| parse_error(path, line, name, format!("`{text}` is not a number")))?;
            if !value.is_finite() {
                return Err(schema_error(path, line, name, "scores must be finite"));
            }
            column.push(value);
        }
        sample_ids.push(fields[0].clone());
        populations.push(population);
    }
    if populations.is_empty() {
        return Err(Error::EmptySet);
    }
    EvalSet::from_columns(sample_ids, populations, channels.into_iter().zip(columns).collect())
}

/// Writes `set` as a scores CSV; numbers use shortest round-trip formatting.
pub fn write_scores(set: &EvalSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    write_scores_to(set, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_scores_to(set: &EvalSet, out: &mut impl Write) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = FIXED.to_vec();
    header.extend(set.channel_names().iter().map(String::as_str));
    writer.write_record(&header)?;
    let columns: Vec<&[f64]> = set
        .channel_names()
        .iter()
        .map(|c| set.channel(c).expect("listed channel"))
        .collect();
    for (i, (id, population)) in set.sample_ids().iter().zip(set.populations()).enumerate() {
        let correct = match population.correct() {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        let mut record = vec![
            id.clone(),
            population.origin().as_str().to_string(),
            correct.to_string(),
        ];
        record.extend(columns.iter().map(|c| c[i].to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()
}
