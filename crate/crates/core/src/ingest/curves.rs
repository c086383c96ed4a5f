use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::binning::{BinnedCurve, RiskCoveragePoint};
use crate::ds::SurfaceRow;
use crate::error::{Error, Result};

use super::{create, csv_reader, parse_error};

const SURFACE_HEADER: [&str; 5] = ["tau_id", "tau_ood", "coverage", "risk", "f1"];
const CURVE_HEADER: [&str; 3] = ["coverage", "risk", "threshold"];

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = create(path)?;
    let result = (|| {
        let mut writer = csv::Writer::from_writer(&mut out);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(&row)?;
        }
        writer.flush()
    })();
    result.map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes a threshold-pair surface sorted by coverage, then risk.
pub fn write_surface(rows: &[SurfaceRow], path: impl AsRef<Path>) -> Result<()> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        a.coverage
            .total_cmp(&b.coverage)
            .then(a.risk.total_cmp(&b.risk))
            .then(a.tau_ood.total_cmp(&b.tau_ood))
            .then(a.tau_id.total_cmp(&b.tau_id))
    });
    write_rows(
        path.as_ref(),
        &SURFACE_HEADER,
        sorted.iter().map(|r| {
            [r.tau_id, r.tau_ood, r.coverage, r.risk, r.f1]
                .iter()
                .map(f64::to_string)
                .collect()
        }),
    )
}

/// Writes single-threshold risk-coverage points sorted by coverage, then risk.
pub fn write_curve(points: &[RiskCoveragePoint], path: impl AsRef<Path>) -> Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.coverage
            .total_cmp(&b.coverage)
            .then(a.risk.total_cmp(&b.risk))
            .then(a.threshold.total_cmp(&b.threshold))
    });
    write_rows(
        path.as_ref(),
        &CURVE_HEADER,
        sorted.iter().map(|p| {
            [p.coverage, p.risk, p.threshold]
                .iter()
                .map(f64::to_string)
                .collect()
        }),
    )
}

/// Writes the filled per-bin risk: `bin,coverage_lo,coverage_hi,risk,filled`.
pub fn write_binned_curve(curve: &BinnedCurve, path: impl AsRef<Path>) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["bin", "coverage_lo", "coverage_hi", "risk", "filled"],
        (0..curve.k_bins()).map(|b| {
            let (lo, hi) = curve.edges(b);
            vec![
                b.to_string(),
                lo.to_string(),
                hi.to_string(),
                curve.risk()[b].to_string(),
                u8::from(curve.filled()[b]).to_string(),
            ]
        }),
    )
}

pub fn read_surface(path: impl AsRef<Path>) -> Result<Vec<SurfaceRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = csv_reader(file, path);
    let header = rows.header()?;
    if header != SURFACE_HEADER {
        return Err(parse_error(path, 1, "", "missing header"));
    }
    let mut out = Vec::new();
    while let Some(row) = rows.next_row(&header)? {
        let mut v = [0.0; 5];
        for ((slot, text), name) in v.iter_mut().zip(&row.fields).zip(SURFACE_HEADER) {
            *slot = text
                .parse()
                .map_err(|_| parse_error(path, row.line, name, format!("`{text}` is not a number")))?;
        }
        out.push(SurfaceRow {
            tau_id: v[0],
            tau_ood: v[1],
            coverage: v[2],
            risk: v[3],
            f1: v[4],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds::DoubleSweep;
    use crate::fixtures::five_sample;
    use crate::grid::ThresholdGrid;

    #[test]
    fn empty_surface_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_surface(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "tau_id,tau_ood,coverage,risk,f1\n");
    }

    #[test]
    fn fixture_surface_row() {
        let set = five_sample();
        let grid = ThresholdGrid::from_thresholds(vec![0.75], vec![0.5]).unwrap();
        let sweep = DoubleSweep::new(&set, "s_id", "s_ood", grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_surface(&sweep.surface(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0.75,0.5,0.6666666666666666,0,0.8");
        assert_eq!(read_surface(&path).unwrap(), sweep.surface());
    }

    #[test]
    fn surface_rows_sorted_and_reread() {
        let set = five_sample();
        let grid = ThresholdGrid::exhaustive(&set, "s_id", "s_ood").unwrap();
        let rows = DoubleSweep::new(&set, "s_id", "s_ood", grid).unwrap().surface();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_surface(&rows, &path).unwrap();
        let back = read_surface(&path).unwrap();
        assert_eq!(back.len(), rows.len());
        assert!(back
            .windows(2)
            .all(|w| (w[0].coverage, w[0].risk) <= (w[1].coverage, w[1].risk)));
        for row in &rows {
            assert!(back.contains(row));
        }
    }

    #[test]
    fn curve_and_bins() {
        let dir = tempfile::tempdir().unwrap();
        let points = [
            RiskCoveragePoint { coverage: 1.0, risk: 0.6, threshold: -1.0 },
            RiskCoveragePoint { coverage: 0.5, risk: 0.0, threshold: 0.8 },
        ];
        let path = dir.path().join("c.csv");
        write_curve(&points, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "coverage,risk,threshold\n0.5,0,0.8\n1,0.6,-1\n"
        );
        let curve = BinnedCurve::from_points([(0.5, 0.0), (1.0, 0.6)], 2).unwrap();
        let path = dir.path().join("b.csv");
        write_binned_curve(&curve, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "bin,coverage_lo,coverage_hi,risk,filled\n0,0,0.5,0,0\n1,0.5,1,0,1\n"
        );
    }
}
