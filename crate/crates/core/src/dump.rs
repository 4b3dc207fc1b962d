//! CSV particle dumps.
//!
//! Columns: `index,x_0..x_{d-1},raw_weight,eff_weight,bandwidth`. Floats are
//! written in shortest round-trip form so a dump reproduces the run exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::WeightedSampleSet;
use crate::policy::{ParticleStore, WeightKind};

fn header(d: usize) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    h.extend((0..d).map(|j| format!("x_{j}")));
    h.extend(["raw_weight", "eff_weight", "bandwidth"].map(String::from));
    h
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn write_rows<W: Write>(
    out: W,
    d: usize,
    rows: impl Iterator<Item = (usize, Vec<f64>)>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(d)).map_err(csv_err)?;
    for (i, vals) in rows {
        let mut rec = vec![i.to_string()];
        rec.extend(vals.into_iter().map(fmt));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Internal(format!("csv: {other:?}")),
    }
}

/// Writes every particle with its raw weight, `W_{i,N}` and bandwidth.
pub fn write_particle_dump<W: Write>(out: W, store: &ParticleStore) -> Result<()> {
    let d = store.dim();
    let eff = store.effective_weights();
    write_rows(
        out,
        d,
        (0..store.len()).map(|i| {
            let mut v = store.position(i).to_vec();
            v.extend([store.raw_weight(i), eff[i], store.bandwidth(i)]);
            (i, v)
        }),
    )
}

pub fn save_particle_dump(path: &Path, store: &ParticleStore) -> Result<()> {
    write_particle_dump(BufWriter::new(File::create(path)?), store)
}

/// Writes a weighted set in the dump schema; both weight columns carry the
/// set's weights and the bandwidth column is zero.
pub fn write_sample_dump<W: Write>(out: W, set: &WeightedSampleSet) -> Result<()> {
    write_rows(
        out,
        set.dim(),
        (0..set.len()).map(|i| {
            let mut v = set.point(i).to_vec();
            let w = set.weights()[i];
            v.extend([w, w, 0.0]);
            (i, v)
        }),
    )
}

pub fn save_sample_dump(path: &Path, set: &WeightedSampleSet) -> Result<()> {
    write_sample_dump(BufWriter::new(File::create(path)?), set)
}

/// Writes unweighted points with header `x_0..x_{d-1}`.
pub fn save_points(path: &Path, points: &[f64], d: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?));
    w.write_record((0..d).map(|j| format!("x_{j}"))).map_err(csv_err)?;
    for row in points.chunks_exact(d) {
        w.write_record(row.iter().map(|&v| fmt(v))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of a particle dump.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleDump {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub raw_weights: Vec<f64>,
    pub effective_weights: Vec<f64>,
    pub bandwidths: Vec<f64>,
}

impl ParticleDump {
    pub fn len(&self) -> usize {
        self.raw_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_weights.is_empty()
    }

    pub fn to_sample_set(&self, kind: WeightKind) -> Result<WeightedSampleSet> {
        let w = match kind {
            WeightKind::Raw => self.raw_weights.clone(),
            WeightKind::Effective => self.effective_weights.clone(),
        };
        WeightedSampleSet::new(self.positions.clone(), self.dim, w)
    }
}

pub fn read_particle_dump(path: &Path) -> Result<ParticleDump> {
    let parse_err = |row: usize, message: String| Error::Parse { path: path.to_path_buf(), row, message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let ncol = headers.len();
    if ncol < 5 || &headers[0] != "index" || &headers[ncol - 3] != "raw_weight" {
        return Err(parse_err(1, "not a particle dump header".into()));
    }
    let dim = ncol - 4;
    let mut dump = ParticleDump {
        dim,
        positions: Vec::new(),
        raw_weights: Vec::new(),
        effective_weights: Vec::new(),
        bandwidths: Vec::new(),
    };
    for (k, rec) in r.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        if rec.len() != ncol {
            return Err(parse_err(row, format!("expected {ncol} fields, got {}", rec.len())));
        }
        let mut vals = Vec::with_capacity(ncol - 1);
        for field in rec.iter().skip(1) {
            vals.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(row, format!("`{field}`: {e}")))?,
            );
        }
        dump.positions.extend_from_slice(&vals[..dim]);
        dump.raw_weights.push(vals[dim]);
        dump.effective_weights.push(vals[dim + 1]);
        dump.bandwidths.push(vals[dim + 2]);
    }
    Ok(dump)
}
