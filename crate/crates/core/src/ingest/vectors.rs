use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::Origin;
use crate::error::{Error, Result};
use crate::scoring::VectorRecord;

use super::{create, csv_reader, parse_error, schema_error};

const FIXED: [&str; 3] = ["sample_id", "domain", "label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    /// At least two columns; ID labels must index a column.
    Logits,
    Features,
}

/// Loads a logits CSV (`sample_id,domain,label,v0..v{C-1}`).
pub fn load_logits(path: impl AsRef<Path>) -> Result<Vec<VectorRecord>> {
    load(path.as_ref(), VectorKind::Logits)
}

/// Loads a features CSV (`sample_id,domain,label,v0..v{D-1}`).
pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<VectorRecord>> {
    load(path.as_ref(), VectorKind::Features)
}

fn load(path: &Path, kind: VectorKind) -> Result<Vec<VectorRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_vectors(file, path, kind)
}

pub fn read_vectors(reader: impl Read, path: &Path, kind: VectorKind) -> Result<Vec<VectorRecord>> {
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
    let width = header.len() - FIXED.len();
    let min_width = match kind {
        VectorKind::Logits => 2,
        VectorKind::Features => 1,
    };
    if width < min_width {
        return Err(schema_error(
            path,
            1,
            "label",
            format!("expected at least {min_width} value columns, found {width}"),
        ));
    }

    let mut out = Vec::new();
    while let Some(row) = rows.next_row(&header)? {
        let line = row.line;
        let fields = row.fields;
        let origin = match fields[1].as_str() {
            "id" => Origin::Id,
            "ood" => Origin::Ood,
            other => {
                return Err(schema_error(
                    path,
                    line,
                    "domain",
                    format!("domain must be `id` or `ood`, got `{other}`"),
                ))
            }
        };
        let label = match (origin, fields[2].as_str()) {
            (Origin::Ood, "") => None,
            (Origin::Ood, other) => {
                return Err(schema_error(
                    path,
                    line,
                    "label",
                    format!("ood rows must leave label empty, got `{other}`"),
                ))
            }
            (Origin::Id, text) => {
                let label: usize = text.parse().map_err(|_| {
                    schema_error(path, line, "label", format!("id rows need a class index, got `{text}`"))
                })?;
                if kind == VectorKind::Logits && label >= width {
                    return Err(schema_error(
                        path,
                        line,
                        "label",
                        format!("class index {label} out of range for {width} logits"),
                    ));
                }
                Some(label)
            }
        };
        let mut values = Vec::with_capacity(width);
        for (name, text) in header[FIXED.len()..].iter().zip(&fields[FIXED.len()..]) {
            let value: f64 = text
                .parse()
                .map_err(|_| parse_error(path, line, name, format!("`{text}` is not a number")))?;
            if !value.is_finite() {
                return Err(schema_error(path, line, name, "values must be finite"));
            }
            values.push(value);
        }
        out.push(VectorRecord {
            sample_id: fields[0].clone(),
            origin,
            label,
            values,
        });
    }
    Ok(out)
}

/// Writes records in the logits/features layout; all rows must share a width.
pub fn write_vectors(records: &[VectorRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let width = records.first().map_or(0, |r| r.values.len());
    if records.iter().any(|r| r.values.len() != width) {
        return Err(Error::InvalidArgument("rows must share one vector width".into()));
    }
    let mut out = create(path)?;
    let result = (|| {
        let mut writer = csv::Writer::from_writer(&mut out);
        let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
        header.extend((0..width).map(|i| format!("v{i}")));
        writer.write_record(&header)?;
        for r in records {
            let mut row = vec![
                r.sample_id.clone(),
                r.origin.as_str().to_string(),
                r.label.map(|l| l.to_string()).unwrap_or_default(),
            ];
            row.extend(r.values.iter().map(f64::to_string));
            writer.write_record(&row)?;
        }
        writer.flush()
    })();
    result.map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOGITS: &str = "\
sample_id,domain,label,v0,v1,v2
a,id,0,3.0,0.5,0.1
b,id,2,0.2,2.5,0.4
x,ood,,1.0,1.0,1.0
";

    fn parse(text: &str, kind: VectorKind) -> Result<Vec<VectorRecord>> {
        read_vectors(text.as_bytes(), Path::new("mem.csv"), kind)
    }

    #[test]
    fn loads_rows() {
        let rows = parse(LOGITS, VectorKind::Logits).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].label, Some(2));
        assert_eq!(rows[2].origin, Origin::Ood);
        assert_eq!(rows[0].values, vec![3.0, 0.5, 0.1]);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = parse(&LOGITS.replace("0.2,2.5,0.4", "0.2,2.5"), VectorKind::Logits).unwrap_err();
        assert_eq!(err.kind(), "ParseError");
        assert!(err.to_string().contains(":3:"));
    }

    #[test]
    fn label_checks() {
        let err = parse(&LOGITS.replace("b,id,2", "b,id,3"), VectorKind::Logits).unwrap_err();
        assert_eq!(err.kind(), "SchemaError");
        assert!(parse(&LOGITS.replace("b,id,2", "b,id,3"), VectorKind::Features).is_ok());
        let err = parse(&LOGITS.replace("x,ood,,", "x,ood,1,"), VectorKind::Logits).unwrap_err();
        assert_eq!(err.kind(), "SchemaError");
        let err = parse(&LOGITS.replace("a,id,0", "a,id,"), VectorKind::Logits).unwrap_err();
        assert_eq!(err.kind(), "SchemaError");
    }

    #[test]
    fn logits_need_two_classes() {
        let text = "sample_id,domain,label,v0\na,id,0,1.0\n";
        assert_eq!(parse(text, VectorKind::Logits).unwrap_err().kind(), "SchemaError");
        assert!(parse(text, VectorKind::Features).is_ok());
    }
}
