use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ControllerKind;
use super::metrics::{actuator_duty, variance_reduction};
use super::run::ExperimentRecord;
use crate::error::{Error, Result};
use crate::windfield::GridMode;

pub const CSV_HEADER: &str = "time,u1,u2,y1,y2,psi,omega,wind";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

pub fn record_csv(record: &ExperimentRecord) -> String {
    let s = &record.series;
    let mut out = String::with_capacity(s.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..s.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.time[k], s.u[k][0], s.u[k][1], s.y[k][0], s.y[k][1], s.psi[k], s.omega[k], s.wind[k]
        );
    }
    out
}

pub fn record_json(record: &ExperimentRecord) -> Result<String> {
    Ok(serde_json::to_string(record)?)
}

pub fn record_from_json(text: &str) -> Result<ExperimentRecord> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn export(record: &ExperimentRecord, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => record_csv(record),
        ExportFormat::Json => record_json(record)?,
    };
    write_file(path, &text)
}

/// Summary of one metric over several seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStat {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl CellStat {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        Some(Self {
            mean,
            std: crate::linalg::variance(xs).sqrt(),
            min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
            max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub mode: GridMode,
    pub wind_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<Option<CellStat>>,
}

/// Load-reduction grid (rows: controllers, columns: mode × speed) plus the
/// SPRC-versus-CIPC pitch-variance rows. Pitch rows are
/// `100 (1 − Var(u_sprc) / Var(u_cipc))`, positive when SPRC pitches less.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub columns: Vec<Column>,
    pub rows: Vec<TableRow>,
}

type CellKey = (usize, u64, u64);

/// Builds the comparison grid. Every controlled record is matched with the
/// baseline of the same column and seed set.
pub fn compare_table(records: &[ExperimentRecord]) -> Result<CompareTable> {
    let mut columns: Vec<Column> = Vec::new();
    let col_of = |columns: &mut Vec<Column>, r: &ExperimentRecord| {
        let c = Column {
            mode: r.config.mode,
            wind_speed: r.config.wind_speed,
        };
        match columns.iter().position(|x| *x == c) {
            Some(i) => i,
            None => {
                columns.push(c);
                columns.len() - 1
            }
        }
    };
    let mut by_kind: BTreeMap<(ControllerKind, CellKey), &ExperimentRecord> = BTreeMap::new();
    for r in records {
        let col = col_of(&mut columns, r);
        let key = (col, r.config.seeds.wind, r.config.seeds.noise);
        by_kind.insert((r.config.controller, key), r);
    }
    let ncol = columns.len();
    let mut reductions: BTreeMap<ControllerKind, Vec<Vec<f64>>> = BTreeMap::new();
    let mut duty: BTreeMap<ControllerKind, Vec<Vec<f64>>> = BTreeMap::new();
    for (&(kind, key), rec) in &by_kind {
        if kind == ControllerKind::None {
            continue;
        }
        let Some(base) = by_kind.get(&(ControllerKind::None, key)) else {
            return Err(Error::InvalidComparison(format!(
                "no baseline for {kind} at {:?} {} m/s (seeds {}/{})",
                columns[key.0].mode, columns[key.0].wind_speed, key.1, key.2
            )));
        };
        let vr = variance_reduction(base, rec)?;
        reductions.entry(kind).or_insert_with(|| vec![Vec::new(); ncol])[key.0].push(vr.pooled);
        if kind.is_sprc() {
            if let Some(cipc) = by_kind.get(&(ControllerKind::Cipc, key)) {
                let dc: f64 = actuator_duty(cipc).iter().sum();
                let ds: f64 = actuator_duty(rec).iter().sum();
                if dc > 0.0 {
                    duty.entry(kind).or_insert_with(|| vec![Vec::new(); ncol])[key.0]
                        .push(100.0 * (1.0 - ds / dc));
                }
            }
        }
    }
    let mut rows = Vec::new();
    let labels = [
        (ControllerKind::Cipc, "CIPC [%]"),
        (ControllerKind::Sprc1p, "SPRC 1P [%]"),
        (ControllerKind::Sprc1p2p, "SPRC 1P2P [%]"),
    ];
    for (kind, label) in labels {
        if let Some(cells) = reductions.get(&kind) {
            rows.push(TableRow {
                label: label.into(),
                cells: cells.iter().map(|c| CellStat::of(c)).collect(),
            });
        }
    }
    for (kind, label) in [
        (ControllerKind::Sprc1p, "Var(u) 1P [%]"),
        (ControllerKind::Sprc1p2p, "Var(u) 1P2P [%]"),
    ] {
        if let Some(cells) = duty.get(&kind) {
            rows.push(TableRow {
                label: label.into(),
                cells: cells.iter().map(|c| CellStat::of(c)).collect(),
            });
        }
    }
    Ok(CompareTable { columns, rows })
}

impl CompareTable {
    /// Fixed-width text rendering; cells show `mean ± std`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<18}", "");
        for c in &self.columns {
            let _ = write!(out, "{:>16}", format!("{} {:.1}", c.mode, c.wind_speed));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<18}", row.label);
            for cell in &row.cells {
                let txt = match cell {
                    Some(s) => format!("{:.1}±{:.1}", s.mean, s.std),
                    None => "-".into(),
                };
                let _ = write!(out, "{txt:>16}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,mode,wind_speed,mean,std,min,max,n\n");
        for row in &self.rows {
            for (c, cell) in self.columns.iter().zip(&row.cells) {
                if let Some(s) = cell {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        row.label, c.mode, c.wind_speed, s.mean, s.std, s.min, s.max, s.n
                    );
                }
            }
        }
        out
    }
}
