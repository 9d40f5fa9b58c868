//! CSV emission: one file per trace with columns `t,value,markovian,backflow`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::runner::{run_label, Bundle, Run, SweepPoint};

pub const HEADER: &str = "t,value,markovian,backflow";

/// Shortest round-trip decimal of `v` rounded to 12 significant digits.
///
/// Zero prints as `0.000000000000`. Magnitudes outside `[1e-6, 1e15)` use exponent notation.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0.000000000000".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if (1e-6..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Rows for one run, in grid order.
pub fn render(point: &SweepPoint, run: &Run) -> String {
    let t = run.trace.times();
    let v = run.trace.values();
    let mut out = String::with_capacity(48 * t.len());
    out.push_str(HEADER);
    out.push('\n');
    for i in 0..t.len() {
        let markovian = point.verdicts[i].markovian;
        let backflow = run.backflow.intervals.iter().any(|&(a, b)| a <= t[i] && t[i] <= b);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_value(t[i]),
            format_value(v[i]),
            u8::from(markovian),
            u8::from(backflow)
        );
    }
    out
}

pub fn file_name(point: &SweepPoint, run: &Run) -> String {
    format!("{}.csv", run_label(point.sweep, run.state, run.witness, "_").replace('=', "_"))
}

/// Writes every trace of `bundle` into `dir`, plus `summary.txt`. Returns the CSV paths.
pub fn emit_csv(bundle: &Bundle, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for point in &bundle.points {
        for run in &point.runs {
            let path = dir.join(file_name(point, run));
            fs::write(&path, render(point, run)).map_err(io(&path))?;
            written.push(path);
        }
    }
    let path = dir.join("summary.txt");
    let mut summary = bundle.summary().join("\n");
    summary.push('\n');
    fs::write(&path, summary).map_err(io(&path))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Overrides};
    use crate::runner::run;

    #[test]
    fn number_format() {
        assert_eq!(format_value(0.0), "0.000000000000");
        assert_eq!(format_value(-0.0), "0.000000000000");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(format_value(8.0 / 599.0), "0.0133555926544");
        assert_eq!(format_value(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_value(-123456.7890123456), "-123456.789012");
        assert_eq!(format_value(1e-9), "1e-9");
        assert_eq!(format_value(1.23456789012345e-7), "1.23456789012e-7");
        for v in [0.3, 7.25, 1e-3, 99999.5] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn zero_trace_writes_zero_cells() {
        let cfg = ExperimentConfig::from_toml(
            "scenario = \"classical_noise_steering\"\nstate.kind = \"two_mode\"\ngrid.times = [1.0, 2.0, 3.0, 4.0]",
            &Overrides::default(),
        )
        .unwrap();
        let b = run(&cfg).unwrap();
        let p = &b.points[0];
        let text = render(p, &p.runs[0]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines.len(), 5);
        for line in &lines[1..] {
            assert_eq!(line.split(',').nth(1), Some("0.000000000000"), "{line}");
        }
        assert!(lines[4].starts_with("4,0.000000000000,0,0"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn emits_one_file_per_trace() {
        let cfg = ExperimentConfig::from_toml(
            "scenario = \"oscillating_noise\"\nevolution.eta0 = [0.8, 2.0]\ngrid.samples = 31\nwitnesses = [\"steering_AB\", \"entanglement_PPT\"]",
            &Overrides::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_csv(&run(&cfg).unwrap(), dir.path()).unwrap();
        assert_eq!(files.len(), 8);
        assert!(dir.path().join("steering_AB_three_mode_eta0_0.8.csv").exists());
        assert!(dir.path().join("summary.txt").exists());
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 32);
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let cfg = ExperimentConfig::from_toml(
            "scenario = \"classical_noise_steering\"\ngrid.samples = 3",
            &Overrides::default(),
        )
        .unwrap();
        let err = emit_csv(&run(&cfg).unwrap(), &file.path().join("sub")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
