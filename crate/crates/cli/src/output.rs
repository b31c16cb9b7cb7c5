//! Deterministic CSV output: fixed 12-significant-digit scientific
//! notation, `.` decimal, empty fields for undefined values, no
//! timestamps. Identical configs produce identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v == 0.0 {
        // avoid the -0 artifact so equal values render identically
        "0.00000000000e0".into()
    } else {
        format!("{v:.11e}")
    }
}

pub enum CsvSink {
    Stdout(io::StdoutLock<'static>),
    File(BufWriter<File>),
}

impl CsvSink {
    pub fn open(path: &str) -> io::Result<Self> {
        if path == "-" {
            Ok(CsvSink::Stdout(io::stdout().lock()))
        } else {
            if let Some(parent) = Path::new(path).parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            Ok(CsvSink::File(BufWriter::new(File::create(path)?)))
        }
    }

    pub fn header(&mut self, columns: &[&str]) -> io::Result<()> {
        self.line(&columns.join(","))
    }

    pub fn row(&mut self, values: &[f64]) -> io::Result<()> {
        let cells: Vec<String> = values.iter().map(|&v| format_float(v)).collect();
        self.line(&cells.join(","))
    }

    fn line(&mut self, text: &str) -> io::Result<()> {
        match self {
            CsvSink::Stdout(w) => writeln!(w, "{text}"),
            CsvSink::File(w) => writeln!(w, "{text}"),
        }
    }

    pub fn finish(self) -> io::Result<()> {
        match self {
            CsvSink::Stdout(mut w) => w.flush(),
            CsvSink::File(mut w) => w.flush(),
        }
    }
}
