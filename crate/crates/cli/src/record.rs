//! Flat result records and their serialized forms.
//!
//! The CSV column order is fixed and documented here; floats are written
//! with 17 significant digits so parsing them back reproduces the exact
//! bits. Optional values (no surface estimate, no analytic reference) are
//! `NaN` in CSV and `null` in jsonlines. The `r` column holds the scan
//! abscissa: the window dilation for simulation modes, the intensity for
//! the atomic example. `index` is the realization index, or `-1` for
//! aggregate rows.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;

pub const CSV_HEADER: &str =
    "mode,n,m,gamma,base,direction,r,index,vol,surf,count,analytic_mean,analytic_var,seed";

/// Marker value of the `index` column for aggregate rows.
pub const AGGREGATE_INDEX: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub mode: String,
    pub n: u32,
    pub m: u32,
    pub gamma: f64,
    pub base: String,
    pub direction: String,
    pub r: f64,
    pub index: i64,
    pub vol: f64,
    pub surf: Option<f64>,
    pub count: u64,
    pub analytic_mean: Option<f64>,
    pub analytic_var: Option<f64>,
    pub seed: u64,
}

impl ResultRecord {
    pub fn is_aggregate(&self) -> bool {
        self.index == AGGREGATE_INDEX
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.mode,
            self.n,
            self.m,
            fmt_float(self.gamma),
            self.base,
            self.direction,
            fmt_float(self.r),
            self.index,
            fmt_float(self.vol),
            fmt_opt(self.surf),
            self.count,
            fmt_opt(self.analytic_mean),
            fmt_opt(self.analytic_var),
            self.seed,
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(format!("expected 14 fields, got {}", fields.len()));
        }
        Ok(ResultRecord {
            mode: fields[0].to_string(),
            n: parse(fields[1], "n")?,
            m: parse(fields[2], "m")?,
            gamma: parse(fields[3], "gamma")?,
            base: fields[4].to_string(),
            direction: fields[5].to_string(),
            r: parse(fields[6], "r")?,
            index: parse(fields[7], "index")?,
            vol: parse(fields[8], "vol")?,
            surf: parse_opt(fields[9], "surf")?,
            count: parse(fields[10], "count")?,
            analytic_mean: parse_opt(fields[11], "analytic_mean")?,
            analytic_var: parse_opt(fields[12], "analytic_var")?,
            seed: parse(fields[13], "seed")?,
        })
    }
}

/// 17 significant digits: enough for exact f64 round trips.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_float(v),
        None => "NaN".to_string(),
    }
}

fn parse<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    field
        .parse()
        .map_err(|e| format!("bad {name} field {field:?}: {e}"))
}

fn parse_opt(field: &str, name: &str) -> Result<Option<f64>, String> {
    if field == "NaN" {
        return Ok(None);
    }
    parse(field, name).map(Some)
}

/// Serializes records to a writer in the requested format. CSV always
/// starts with the fixed header, even for an empty record list.
pub fn write_records(
    records: &[ResultRecord],
    format: OutputFormat,
    out: &mut impl Write,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for record in records {
                writeln!(out, "{}", record.to_csv_line())?;
            }
        }
        OutputFormat::JsonLines => {
            for record in records {
                let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

pub fn emit(records: &[ResultRecord], format: OutputFormat, path: &Path) -> std::io::Result<()> {
    let mut buffer = Vec::new();
    write_records(records, format, &mut buffer)?;
    std::fs::write(path, buffer)
}

/// Parses serialized records back; the inverse of [`write_records`].
pub fn parse_records(text: &str, format: OutputFormat) -> Result<Vec<ResultRecord>, String> {
    match format {
        OutputFormat::Csv => {
            let mut lines = text.lines();
            match lines.next() {
                Some(header) if header == CSV_HEADER => {}
                other => return Err(format!("bad header: {other:?}")),
            }
            lines.map(ResultRecord::from_csv_line).collect()
        }
        OutputFormat::JsonLines => text
            .lines()
            .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
            .collect(),
    }
}

/// Canonical record ordering: by scan abscissa, then index (aggregates
/// first). Worker scheduling can never change sorted output.
pub fn sort_canonical(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.index.cmp(&b.index)));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<ResultRecord> {
        vec![
            ResultRecord {
                mode: "simulate".into(),
                n: 3,
                m: 1,
                gamma: 0.5,
                base: "ball(0.5)".into(),
                direction: "uniform".into(),
                r: 2.0,
                index: 0,
                vol: std::f64::consts::PI / 7.0,
                surf: Some(1.0 / 3.0),
                count: 17,
                analytic_mean: Some(1.360_385_408_227_432_5),
                analytic_var: None,
                seed: 42,
            },
            ResultRecord {
                mode: "simulate".into(),
                n: 3,
                m: 1,
                gamma: 0.5,
                base: "ball(0.5)".into(),
                direction: "uniform".into(),
                r: 2.0,
                index: AGGREGATE_INDEX,
                vol: 1e-300,
                surf: None,
                count: 2,
                analytic_mean: None,
                analytic_var: Some(2.220_446_049_250_313e-16),
                seed: 42,
            },
        ]
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let records = sample_records();
        let mut buf = Vec::new();
        write_records(&records, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_records(&text, OutputFormat::Csv).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn jsonlines_round_trip_is_exact() {
        let records = sample_records();
        let mut buf = Vec::new();
        write_records(&records, OutputFormat::JsonLines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_records(&text, OutputFormat::JsonLines).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn empty_record_list_writes_only_the_header() {
        let mut buf = Vec::new();
        write_records(&[], OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_schema_has_the_fixed_column_order() {
        assert_eq!(
            CSV_HEADER,
            "mode,n,m,gamma,base,direction,r,index,vol,surf,count,analytic_mean,analytic_var,seed"
        );
        let line = sample_records()[0].to_csv_line();
        assert_eq!(line.split(',').count(), 14);
    }

    #[test]
    fn canonical_sort_orders_by_r_then_index() {
        let mut records = sample_records();
        records[0].r = 4.0;
        let mut shuffled = vec![records[0].clone(), records[1].clone()];
        sort_canonical(&mut shuffled);
        assert_eq!(shuffled[0].index, AGGREGATE_INDEX);
        assert_eq!(shuffled[0].r, 2.0);
        assert_eq!(shuffled[1].r, 4.0);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ResultRecord::from_csv_line("too,few,fields").is_err());
        assert!(parse_records("not,the,header\n", OutputFormat::Csv).is_err());
    }
}
