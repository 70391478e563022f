//! Artifact writers: CSV tables (UTF-8, header row, `.` decimals), a gnuplot
//! script referencing them, and per-phase wall-clock bookkeeping.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`;
/// `NaN` cells are left empty.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v.is_nan() {
        String::new()
    } else if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A CSV table assembled in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table { name: name.to_string(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.push_cells(row.iter().map(|&v| num(v)).collect());
    }

    pub fn push_cells(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> HarnessResult<PathBuf> {
        let path = dir.join(&self.name);
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(err) => HarnessError::io(&path, err),
            other => HarnessError::io(&path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        Ok(path)
    }
}

/// One panel of the plot script: `using x:y` series drawn from a CSV file.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub file: String,
    pub x: usize,
    pub ys: Vec<usize>,
    pub logscale_y: bool,
}

/// gnuplot script rendering each panel to its own PNG next to the CSVs.
pub fn plot_script(panels: &[Panel]) -> String {
    let mut s = String::from("# gnuplot script; run from the output directory: gnuplot plot.gp\n");
    s.push_str("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset grid\n");
    for (i, p) in panels.iter().enumerate() {
        s.push_str(&format!("\nset output 'plot_{}.png'\nset title '{}'\n", i + 1, p.title));
        s.push_str(if p.logscale_y { "set logscale y\n" } else { "unset logscale y\n" });
        let series: Vec<String> = p.ys.iter().map(|y| format!("'{}' using {}:{} with linespoints", p.file, p.x, y)).collect();
        s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    }
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> HarnessResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

/// Wall-clock per named phase, logged as each one finishes.
#[derive(Debug, Default)]
pub struct Phases {
    pub done: Vec<Phase>,
}

impl Phases {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> HarnessResult<T>) -> HarnessResult<T> {
        let start = Instant::now();
        let out = f();
        let seconds = start.elapsed().as_secs_f64();
        log::info!("phase {name}: {seconds:.3} s");
        self.done.push(Phase { name: name.to_string(), seconds });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_dot_decimals() {
        for v in [0.1, -2.5e-300, 1.0 / 3.0, 1e21, 7.0, 8.3e-11, 0.0] {
            let s = num(v);
            assert!(!s.contains(','));
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "");
        assert_eq!(num(8.5e-11), "8.5e-11");
        assert_eq!(num(2.0), "2");
    }

    #[test]
    fn table_is_written_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t.csv", &["a", "b"]);
        t.push(&[1.0, 0.25]);
        t.push_cells(vec!["x, y".into(), "2".into()]);
        let text = std::fs::read_to_string(t.write(dir.path()).unwrap()).unwrap();
        assert_eq!(text, "a,b\n1,0.25\n\"x, y\",2\n");
    }

    #[test]
    fn plot_script_references_files() {
        let s = plot_script(&[Panel { title: "t".into(), file: "f.csv".into(), x: 1, ys: vec![2, 3], logscale_y: true }]);
        assert!(s.contains("'f.csv' using 1:2") && s.contains("'f.csv' using 1:3") && s.contains("set logscale y"));
    }
}
