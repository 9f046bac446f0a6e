//! Trajectory tables and their CSV / JSON encodings.

use std::io::{self, Write};
use std::path::Path;

use atomcav_core::correlations::{self, CorrelationRecord};
use atomcav_core::dynamics::{evolve_scenario, Method};
use atomcav_core::{Error, ExcitationSubspace, PureState, Scenario};
use serde::Serialize;

use crate::config::{Format, MethodChoice};

pub const DISCREPANCY_COLUMN: &str = "amp_discrepancy";

const MEASURES: [&str; 9] = [
    "M_a1", "M_a2", "M_f", "C_aa", "C_a1f", "C_a2f", "E_aa", "E_a1f", "E_a2f",
];

/// Column-major description plus row-major numeric data. Missing values
/// (atom-field concurrences above one excitation) are NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn amplitude_names(subspace: ExcitationSubspace) -> Vec<String> {
    if subspace.excitations() == 1 {
        (1..=3).map(|i| format!("a{i}")).collect()
    } else {
        (0..4).map(|i| format!("b{i}")).collect()
    }
}

fn push_amplitudes(row: &mut Vec<f64>, psi: &PureState) {
    for a in psi.amplitudes() {
        row.push(a.re);
        row.push(a.im);
    }
}

fn push_record(row: &mut Vec<f64>, r: &CorrelationRecord) {
    row.extend([
        r.m_a1,
        r.m_a2,
        r.m_f,
        r.c_aa,
        r.c_a1f.unwrap_or(f64::NAN),
        r.c_a2f.unwrap_or(f64::NAN),
        r.e_aa,
        r.e_a1f,
        r.e_a2f,
    ]);
}

/// Runs the scenario and tabulates one row per sample time.
///
/// With [`MethodChoice::Both`] the closed-form trajectory fills the main
/// columns and the RK4 amplitudes follow, prefixed `rk4_`, then the largest
/// complex amplitude difference between the two.
pub fn simulate(
    scenario: &Scenario,
    method: MethodChoice,
    dt: Option<f64>,
) -> Result<Table, Error> {
    let times = scenario.sample_times();
    let sub = scenario.subspace();
    let evolve = |m| evolve_scenario(scenario.schedule(), sub, m, &times, dt);
    let (main, compare) = match method {
        MethodChoice::ClosedForm => (evolve(Method::ClosedForm)?, None),
        MethodChoice::Rk4 => (evolve(Method::Rk4)?, None),
        MethodChoice::Both => (evolve(Method::ClosedForm)?, Some(evolve(Method::Rk4)?)),
    };

    let names = amplitude_names(sub);
    let mut columns = vec!["t".to_owned()];
    let complex = |prefix: &str| -> Vec<String> {
        names
            .iter()
            .flat_map(|n| [format!("{prefix}{n}_re"), format!("{prefix}{n}_im")])
            .collect()
    };
    columns.extend(complex(""));
    columns.extend(MEASURES.iter().map(|s| s.to_string()));
    if compare.is_some() {
        columns.extend(complex("rk4_"));
        columns.push(DISCREPANCY_COLUMN.to_owned());
    }

    let mut rows = Vec::with_capacity(main.len());
    for (k, (t, psi)) in main.iter().enumerate() {
        let mut row = vec![*t];
        push_amplitudes(&mut row, psi);
        push_record(&mut row, &correlations::record(psi, *t)?);
        if let Some(other) = &compare {
            let (_, phi) = &other[k];
            push_amplitudes(&mut row, phi);
            row.push(psi.max_distance(phi)?);
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// Shortest round-trip text for a float, switching to exponent notation for
/// very large or small magnitudes.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format_number(*v)))?;
    }
    w.flush()
}

/// `{"columns": [...], "rows": [[...], ...]}`, with NaN written as `null`.
pub fn write_json<W: Write>(table: &Table, mut out: W) -> io::Result<()> {
    serde_json::to_writer(&mut out, table)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn encode<W: Write>(table: &Table, format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(table, out),
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so the destination never holds a partial table.
pub fn write_atomic(table: &Table, format: Format, path: &Path) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    encode(table, format, io::BufWriter::new(tmp.as_file_mut()))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use atomcav_core::{PulseShape, ScenarioKind};

    fn singlet(samples: usize) -> Scenario {
        Scenario::build(ScenarioKind::SingletDjc, PulseShape::Constant, 1.0)
            .unwrap()
            .with_samples(samples)
            .unwrap()
    }

    #[test]
    fn column_layout() {
        let t = simulate(&singlet(4), MethodChoice::ClosedForm, None).unwrap();
        assert_eq!(t.columns.len(), 1 + 6 + 9);
        assert_eq!(t.columns[..3], ["t", "a1_re", "a1_im"]);
        assert_eq!(t.columns.last().unwrap(), "E_a2f");
        assert!(t.rows.iter().all(|r| r.len() == t.columns.len()));

        let both = simulate(&singlet(4), MethodChoice::Both, None).unwrap();
        assert_eq!(both.columns.len(), 16 + 6 + 1);
        assert_eq!(both.columns[16], "rk4_a1_re");
        assert!(both
            .column(DISCREPANCY_COLUMN)
            .unwrap()
            .iter()
            .all(|d| *d < 1e-7));
    }

    #[test]
    fn higher_block_columns() {
        let s = singlet(4)
            .with_subspace(ExcitationSubspace::new(2))
            .unwrap();
        let t = simulate(&s, MethodChoice::Rk4, None).unwrap();
        assert_eq!(t.columns[1], "b0_re");
        assert_eq!(t.columns.len(), 1 + 8 + 9);
        assert!(t.column("C_a1f").unwrap().iter().all(|v| v.is_nan()));
        assert!(simulate(&s, MethodChoice::ClosedForm, None).is_err());
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -0.1, 1e-17, 0.1 + 0.2, f64::MAX, 5e-324, -2.5e300] {
            assert_eq!(
                format_number(v).parse::<f64>().unwrap().to_bits(),
                v.to_bits()
            );
        }
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn json_writes_null_for_nan() {
        let t = Table {
            columns: vec!["x".into(), "y".into()],
            rows: vec![vec![0.5, f64::NAN]],
        };
        let mut buf = Vec::new();
        write_json(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"columns\":[\"x\",\"y\"],\"rows\":[[0.5,null]]}\n"
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        std::fs::write(&path, "stale").unwrap();
        let t = Table {
            columns: vec!["t".into()],
            rows: vec![vec![1.0]],
        };
        write_atomic(&t, Format::Csv, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "t\n1.0\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
