//! File outputs. CSV columns are `sweep,<label>_mean,<label>_stderr,...`,
//! UTF-8 with LF line endings, numbers at six significant digits and `NaN`
//! for failed points.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiment::{ExperimentResult, Metadata, Unit};
use crate::{Result, SimError};

/// `x` rounded to six significant digits. Idempotent, so a value written by
/// [`format_value`] parses back to itself.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Shortest text that parses back to `round_sig(x)`.
pub fn format_value(x: f64) -> String {
    let r = round_sig(x);
    if r.is_nan() {
        return "NaN".into();
    }
    if r == 0.0 || (1e-4..1e7).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn csv_string(result: &ExperimentResult) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["sweep".to_string()];
    for s in &result.series {
        header.push(format!("{}_mean", s.label));
        header.push(format!("{}_stderr", s.label));
    }
    writer.write_record(&header)?;
    for (i, x) in result.sweep.iter().enumerate() {
        let mut row = vec![format_value(*x)];
        for s in &result.series {
            row.push(format_value(s.mean[i]));
            row.push(format_value(s.stderr[i]));
        }
        writer.write_record(&row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| SimError::Config(format!("CSV buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Series read back from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub sweep: Vec<f64>,
    /// `(label, mean, stderr)` in column order.
    pub series: Vec<(String, Vec<f64>, Vec<f64>)>,
}

impl CsvTable {
    /// True when every value equals the in-memory one bit for bit (NaN
    /// matches NaN).
    pub fn matches(&self, result: &ExperimentResult) -> bool {
        let same = |a: &[f64], b: &[f64]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
        };
        same(
            &self.sweep,
            &result
                .sweep
                .iter()
                .map(|x| round_sig(*x))
                .collect::<Vec<_>>(),
        ) && self.series.len() == result.series.len()
            && self
                .series
                .iter()
                .zip(&result.series)
                .all(|((label, mean, se), s)| {
                    *label == s.label && same(mean, &s.mean) && same(se, &s.stderr)
                })
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.get(0) != Some("sweep") || header.len() % 2 != 1 {
        return Err(SimError::Config(
            "CSV header must be sweep followed by mean/stderr pairs".into(),
        ));
    }
    let mut labels = Vec::new();
    for pair in 0..header.len() / 2 {
        let mean = &header[1 + 2 * pair];
        let se = &header[2 + 2 * pair];
        let label = mean
            .strip_suffix("_mean")
            .filter(|l| se.strip_suffix("_stderr") == Some(*l))
            .ok_or_else(|| SimError::Config(format!("unpaired CSV columns {mean}, {se}")))?;
        labels.push(label.to_string());
    }
    let mut table = CsvTable {
        sweep: Vec::new(),
        series: labels
            .into_iter()
            .map(|l| (l, Vec::new(), Vec::new()))
            .collect(),
    };
    for record in reader.records() {
        let record = record?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| SimError::Config(format!("CSV value {:?}: {e}", &record[i])))
        };
        table.sweep.push(num(0)?);
        for (k, (_, mean, se)) in table.series.iter_mut().enumerate() {
            mean.push(num(1 + 2 * k)?);
            se.push(num(2 + 2 * k)?);
        }
    }
    Ok(table)
}

#[derive(Serialize)]
struct MetaFile<'a> {
    sweep_variable: &'a str,
    unit: Unit,
    metadata: &'a Metadata,
    runs: Vec<(&'a str, &'a [usize])>,
    errors: Vec<(&'a str, usize, &'a str)>,
    config: &'a serde_json::Value,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `<name>.csv` and `<name>.meta.json` (plus `<name>.svg` when
/// `plot` is set) into `dir`, returning the paths written.
pub fn write_outputs(
    result: &ExperimentResult,
    config: &serde_json::Value,
    dir: &Path,
    name: &str,
    plot: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    let csv_path = dir.join(format!("{name}.csv"));
    write(&csv_path, &csv_string(result)?)?;
    written.push(csv_path);

    let meta = MetaFile {
        sweep_variable: &result.sweep_variable,
        unit: result.unit,
        metadata: &result.metadata,
        runs: result
            .series
            .iter()
            .map(|s| (s.label.as_str(), s.runs.as_slice()))
            .collect(),
        errors: result
            .series
            .iter()
            .flat_map(|s| {
                s.errors
                    .iter()
                    .enumerate()
                    .filter_map(move |(i, e)| e.as_deref().map(|e| (s.label.as_str(), i, e)))
            })
            .collect(),
        config,
    };
    let meta_path = dir.join(format!("{name}.meta.json"));
    write(&meta_path, &(serde_json::to_string_pretty(&meta)? + "\n"))?;
    written.push(meta_path);

    if plot {
        let svg_path = dir.join(format!("{name}.svg"));
        write(&svg_path, &crate::plot::svg(result, name))?;
        written.push(svg_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(round_sig(47.81234567), 47.8123);
        assert_eq!(round_sig(-0.000123456789), -0.000123457);
        assert_eq!(format_value(47.81234567), "47.8123");
        assert_eq!(format_value(2.0), "2");
        assert_eq!(format_value(1.234567e-9), "1.23457e-9");
        assert_eq!(format_value(f64::NAN), "NaN");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-3.0e12), "-3e12");
    }

    #[test]
    fn formatted_values_parse_to_their_rounding() {
        for x in [
            1.0 / 3.0,
            1e-300,
            6.02214076e23,
            -42.4242424,
            99999.95,
            1e-4,
            9.999995e6,
        ] {
            let back: f64 = format_value(x).parse().unwrap();
            assert_eq!(back, round_sig(x), "{x}");
            assert_eq!(round_sig(back), back);
        }
    }
}
