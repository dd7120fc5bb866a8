use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rates::RateReport;

/// Identifies the run that produced a file: written as the first line of
/// every CSV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunStamp {
    pub config_sha256: String,
    pub seed: u64,
}

impl RunStamp {
    pub fn new(config_text: &str, seed: u64) -> Self {
        let digest = Sha256::digest(config_text.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { config_sha256, seed }
    }

    pub fn header_line(&self) -> String {
        format!("# config_sha256={} seed={}", self.config_sha256, self.seed)
    }
}

/// Shortest round-trip decimal form, in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, dir: &Path, name: &str, stamp: &RunStamp) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut buf = stamp.header_line().into_bytes();
        buf.push(b'\n');
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.columns).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        fs::write(&path, buf)?;
        Ok(path)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Reads `x,y` rows. `#` lines are comments and an optional first row
/// `x,y` is treated as a header.
pub fn read_dataset(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if i == 0 && record.iter().eq(["x", "y"]) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Data(format!("row {}: expected 2 columns, found {}", i + 1, record.len())));
        }
        let parse = |field: &str| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data(format!("row {}: '{field}' is not a finite number", i + 1)))
        };
        xs.push(parse(&record[0])?);
        ys.push(parse(&record[1])?);
    }
    if xs.is_empty() {
        return Err(Error::Data(format!("{}: no observations", path.display())));
    }
    Ok((xs, ys))
}

/// Log-log plot of the median error with its 10-90% band against `n`, and
/// the theoretical curve rescaled to the median at the geometric centre of
/// the grid.
pub fn rates_svg(report: &RateReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let rows = &report.rows;
    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).log10()).collect();
    let mid = rows.len() / 2;
    let scale = rows[mid].median / rows[mid].theoretical_rate;
    let theo: Vec<f64> = rows.iter().map(|r| (scale * r.theoretical_rate).log10()).collect();
    let med: Vec<f64> = rows.iter().map(|r| r.median.log10()).collect();
    let lo: Vec<f64> = rows.iter().map(|r| r.q10.max(f64::MIN_POSITIVE).log10()).collect();
    let hi: Vec<f64> = rows.iter().map(|r| r.q90.log10()).collect();

    let (x0, x1) = bounds(&lx);
    let (y0, y1) = bounds(lo.iter().chain(&hi).chain(&theo).chain(&med).copied().collect::<Vec<_>>().as_slice());
    let px = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-12) * (H - 2.0 * PAD);
    let points = |ys: &[f64]| {
        lx.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect::<Vec<_>>().join(" ")
    };

    let mut band: Vec<String> = lx.iter().zip(&hi).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    band.extend(lx.iter().zip(&lo).rev().map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))));

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    svg += &format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n");
    svg += &format!(
        "<line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = H - PAD,
        r = W - PAD
    );
    svg += &format!("<polygon points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.5\"/>\n", band.join(" "));
    svg += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n", points(&med));
    svg += &format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#cb181d\" stroke-dasharray=\"6 4\" stroke-width=\"2\"/>\n",
        points(&theo)
    );
    for (r, &x) in rows.iter().zip(&lx) {
        svg += &format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(x),
            H - PAD + 18.0,
            r.n
        );
    }
    svg += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">n (log scale)</text>\n",
        W / 2.0,
        H - 12.0
    );
    svg += &format!(
        "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">error (log10 {:.2} to {:.2})</text>\n",
        H / 2.0,
        H / 2.0,
        y0,
        y1
    );
    svg += &format!(
        "<text x=\"{}\" y=\"24\">median (slope {:.3}) vs theoretical (slope {:.3}, dashed)</text>\n",
        PAD, report.fitted_slope, report.theoretical_slope
    );
    svg += "</svg>\n";
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamp_is_sha256_of_text() {
        let s = RunStamp::new("abc", 9);
        assert_eq!(s.config_sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(s.header_line(), format!("# config_sha256={} seed=9", s.config_sha256));
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.25)]);
        let path = t.write(dir.path(), "t.csv", &RunStamp::new("", 1)).unwrap();
        let text = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config_sha256=e3b0c442"));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1,2.5e-1");
    }

    #[test]
    fn dataset_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "# comment\nx,y\n0.1, 1.0\n0.2,2\n").unwrap();
        assert_eq!(read_dataset(&path).unwrap(), (vec![0.1, 0.2], vec![1.0, 2.0]));
        fs::write(&path, "0.1,abc\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Data(_))));
        fs::write(&path, "0.1,1,2\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Data(_))));
        fs::write(&path, "").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Data(_))));
    }
}
