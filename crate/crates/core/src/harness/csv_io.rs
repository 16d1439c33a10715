use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::run::TrialRow;
use crate::error::{Error, Result};

pub const HEADER: [&str; 18] = [
    "experiment", "topology", "n", "eta", "d", "p", "q", "beta", "scheme", "estimator", "mode", "m", "trial", "seed",
    "avg_precision", "avg_recall", "aux_key", "aux_value",
];

fn dec(x: f64) -> String {
    format!("{x:.6}")
}

fn record(r: &TrialRow, aux: Option<&(String, f64)>) -> Vec<String> {
    let mut v = vec![
        r.experiment.clone(),
        r.topology.clone(),
        r.n.to_string(),
        r.eta.to_string(),
        r.d.to_string(),
        dec(r.p),
        dec(r.q),
        dec(r.beta),
        r.scheme.clone(),
        r.estimator.clone(),
        r.mode.clone(),
        r.m.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        dec(r.avg_precision),
        dec(r.avg_recall),
    ];
    match aux {
        Some((k, x)) => v.extend([k.clone(), dec(*x)]),
        None => v.extend([String::new(), String::new()]),
    }
    v
}

/// Writes rows in long format: one line per auxiliary measurement, or a
/// single line with empty aux columns when a row has none.
pub fn write_csv_to<W: Write>(rows: &[TrialRow], w: W) -> std::result::Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        if r.aux.is_empty() {
            out.write_record(record(r, None))?;
        }
        for a in &r.aux {
            out.write_record(record(r, Some(a)))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[TrialRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid(format!("no rows to write to {}", path.display())));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(rows, BufWriter::new(file)).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

/// Reads a file written by [`write_csv`], regrouping consecutive lines of
/// the same trial into one row.
pub fn read_csv(path: &Path) -> Result<Vec<TrialRow>> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut rdr = csv::ReaderBuilder::new().from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, msg: "unexpected header".into() });
    }
    let mut rows: Vec<TrialRow> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |col: &str| Error::Parse { path: path.to_path_buf(), line, msg: format!("bad `{col}`") };
        let f = |c: usize| rec[c].parse::<f64>().map_err(|_| bad(HEADER[c]));
        let u = |c: usize| rec[c].parse::<usize>().map_err(|_| bad(HEADER[c]));
        let row = TrialRow {
            experiment: rec[0].to_string(),
            topology: rec[1].to_string(),
            n: u(2)?,
            eta: u(3)?,
            d: u(4)?,
            p: f(5)?,
            q: f(6)?,
            beta: f(7)?,
            scheme: rec[8].to_string(),
            estimator: rec[9].to_string(),
            mode: rec[10].to_string(),
            m: u(11)?,
            trial: u(12)?,
            seed: rec[13].parse().map_err(|_| bad("seed"))?,
            avg_precision: f(14)?,
            avg_recall: f(15)?,
            aux: Vec::new(),
        };
        let aux = (!rec[16].is_empty()).then(|| f(17).map(|x| (rec[16].to_string(), x))).transpose()?;
        match rows.last_mut() {
            Some(last) if same_trial(last, &row) => last.aux.extend(aux),
            _ => rows.push(TrialRow { aux: aux.into_iter().collect(), ..row }),
        }
    }
    Ok(rows)
}

fn same_trial(a: &TrialRow, b: &TrialRow) -> bool {
    let key = |r: &TrialRow| {
        (r.experiment.clone(), r.topology.clone(), r.n, r.eta, r.d, r.scheme.clone(), r.estimator.clone(), r.mode.clone(), r.m, r.trial, r.seed)
    };
    key(a) == key(b) && a.p == b.p && a.q == b.q && a.beta == b.beta
}
