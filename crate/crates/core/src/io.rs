//! CSV input and output for candidates, parameter samples and designs.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::criterion::FrequencyDesign;
use crate::error::{Error, Result};
use crate::factors::Level;
use crate::model::{CandidateSet, Design};

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => parse_err(path, format!("{kind:?}")),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A parsed CSV table: header plus string records.
struct Table {
    path: PathBuf,
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read<R: Read>(reader: R, path: &Path) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let records = rdr
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| csv_err(path, e))?;
        Ok(Table {
            path: path.to_path_buf(),
            header,
            records,
        })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.column(name)
            .ok_or_else(|| parse_err(&self.path, format!("missing column '{name}'")))
    }

    fn value<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T> {
        let s = &self.records[row][col];
        s.parse().map_err(|_| {
            parse_err(
                &self.path,
                format!("row {}: cannot parse '{s}' in column '{}'", row + 1, self.header[col]),
            )
        })
    }

    /// Candidate index of each row, from the factor label columns.
    fn points(&self, cands: &CandidateSet) -> Result<Vec<usize>> {
        let cols = cands
            .factor_names()
            .iter()
            .map(|f| self.require(f))
            .collect::<Result<Vec<_>>>()?;
        (0..self.records.len())
            .map(|r| {
                let point = cols
                    .iter()
                    .map(|&c| self.value::<Level>(r, c))
                    .collect::<Result<Vec<_>>>()?;
                cands
                    .find(&point)
                    .ok_or_else(|| parse_err(&self.path, format!("row {}: {point:?} is not a candidate point", r + 1)))
            })
            .collect()
    }
}

fn write_rows<W: Write>(w: W, path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        wtr.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parameter samples, one per row, with a header of effect names. Columns
/// are reordered to `effect_names`.
pub fn read_eta_samples(path: &Path, effect_names: &[String]) -> Result<Vec<Vec<f64>>> {
    read_eta_samples_from(open(path)?, path, effect_names)
}

pub fn read_eta_samples_from<R: Read>(reader: R, path: &Path, effect_names: &[String]) -> Result<Vec<Vec<f64>>> {
    let t = Table::read(reader, path)?;
    if t.header.len() != effect_names.len() {
        return Err(parse_err(
            path,
            format!(
                "expected {} effect columns, found {}",
                effect_names.len(),
                t.header.len()
            ),
        ));
    }
    let cols = effect_names.iter().map(|n| t.require(n)).collect::<Result<Vec<_>>>()?;
    if t.records.is_empty() {
        return Err(parse_err(path, "no parameter samples"));
    }
    (0..t.records.len())
        .map(|r| cols.iter().map(|&c| t.value::<f64>(r, c)).collect())
        .collect()
}

pub fn write_eta_samples<W: Write>(w: W, path: &Path, effect_names: &[String], samples: &[Vec<f64>]) -> Result<()> {
    write_rows(
        w,
        path,
        effect_names,
        samples.iter().map(|s| s.iter().map(f64::to_string).collect()),
    )
}

pub fn write_eta_samples_file(path: &Path, effect_names: &[String], samples: &[Vec<f64>]) -> Result<()> {
    write_eta_samples(create(path)?, path, effect_names, samples)
}

/// Candidate points with their expanded model rows.
pub fn write_candidates<W: Write>(w: W, path: &Path, cands: &CandidateSet) -> Result<()> {
    let mut header = vec!["point".to_string()];
    header.extend(cands.factor_names().iter().cloned());
    header.extend(cands.effect_names().iter().map(|e| format!("f_{e}")));
    let rows = (0..cands.len()).map(|i| {
        let mut r = vec![(i + 1).to_string()];
        r.extend(cands.point(i).iter().map(|l| l.to_string()));
        r.extend(cands.row(i).iter().map(|v| v.to_string()));
        r
    });
    write_rows(w, path, &header, rows)
}

/// One row per run with the factor levels of the run.
pub fn write_design<W: Write>(w: W, path: &Path, cands: &CandidateSet, design: &Design) -> Result<()> {
    let header = cands.factor_names().to_vec();
    let rows = design
        .indices()
        .iter()
        .map(|&i| cands.point(i).iter().map(|l| l.to_string()).collect());
    write_rows(w, path, &header, rows)
}

pub fn write_design_file(path: &Path, cands: &CandidateSet, design: &Design) -> Result<()> {
    write_design(create(path)?, path, cands, design)
}

pub fn read_design(path: &Path, cands: &CandidateSet) -> Result<Design> {
    read_design_from(open(path)?, path, cands)
}

/// Reads either one row per run, or one row per point with a `count`
/// column.
pub fn read_design_from<R: Read>(reader: R, path: &Path, cands: &CandidateSet) -> Result<Design> {
    let t = Table::read(reader, path)?;
    let pts = t.points(cands)?;
    let design = match t.column("count") {
        Some(c) => {
            let mut runs = Vec::new();
            for (r, &p) in pts.iter().enumerate() {
                let k: usize = t.value(r, c)?;
                runs.extend(std::iter::repeat_n(p, k));
            }
            Design::new(runs)
        }
        None => Design::new(pts),
    };
    if design.is_empty() {
        return Err(parse_err(path, "design has no runs"));
    }
    Ok(design)
}

/// Frequency design as `point, <factor levels>, frequency`, one row per
/// candidate.
pub fn write_frequency<W: Write>(w: W, path: &Path, cands: &CandidateSet, freq: &FrequencyDesign) -> Result<()> {
    let mut header = vec!["point".to_string()];
    header.extend(cands.factor_names().iter().cloned());
    header.push("frequency".into());
    let rows = (0..cands.len()).map(|i| {
        let mut r = vec![(i + 1).to_string()];
        r.extend(cands.point(i).iter().map(|l| l.to_string()));
        r.push(freq.values()[i].to_string());
        r
    });
    write_rows(w, path, &header, rows)
}

pub fn write_frequency_file(path: &Path, cands: &CandidateSet, freq: &FrequencyDesign) -> Result<()> {
    write_frequency(create(path)?, path, cands, freq)
}

pub fn read_frequency(path: &Path, cands: &CandidateSet) -> Result<FrequencyDesign> {
    read_frequency_from(open(path)?, path, cands)
}

/// Points missing from the file get frequency zero.
pub fn read_frequency_from<R: Read>(reader: R, path: &Path, cands: &CandidateSet) -> Result<FrequencyDesign> {
    let t = Table::read(reader, path)?;
    let pts = t.points(cands)?;
    let c = t.require("frequency")?;
    let mut freq = vec![0.0; cands.len()];
    for (r, &p) in pts.iter().enumerate() {
        freq[p] += t.value::<f64>(r, c)?;
    }
    FrequencyDesign::new(freq).map_err(|e| parse_err(path, e.to_string()))
}

/// Tables with factor label columns and one count column per design; any
/// column that is neither a factor nor `point` is read as a design.
pub fn read_count_table(path: &Path, cands: &CandidateSet) -> Result<Vec<(String, Design)>> {
    read_count_table_from(open(path)?, path, cands)
}

pub fn read_count_table_from<R: Read>(reader: R, path: &Path, cands: &CandidateSet) -> Result<Vec<(String, Design)>> {
    let t = Table::read(reader, path)?;
    let pts = t.points(cands)?;
    let mut out = Vec::new();
    for (c, name) in t.header.iter().enumerate() {
        if name == "point" || cands.factor_names().contains(name) {
            continue;
        }
        let mut counts = vec![0usize; cands.len()];
        for (r, &p) in pts.iter().enumerate() {
            counts[p] += t.value::<usize>(r, c)?;
        }
        out.push((name.clone(), Design::from_counts(&counts)));
    }
    Ok(out)
}
