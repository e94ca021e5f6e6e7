//! CSV writers with fixed columns, `{:.16e}` floats (17 significant digits) and LF endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::amortize::MetricRecord;
use crate::error::{Error, Result};
use crate::particles::ParticleSet;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct Sink<W: Write> {
    inner: ::csv::Writer<W>,
}

impl<W: Write> Sink<W> {
    fn new(w: W) -> Self {
        let inner = ::csv::WriterBuilder::new()
            .terminator(::csv::Terminator::Any(b'\n'))
            .from_writer(w);
        Self { inner }
    }

    fn record<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(csv_err)
    }

    fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_err(e: ::csv::Error) -> Error {
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Particle dump: header `z0,…,z{d-1}`, one row per particle.
pub struct ParticleWriter;

impl ParticleWriter {
    pub fn to_writer<W: Write>(w: W, p: &ParticleSet) -> Result<W> {
        let mut s = Sink::new(w);
        s.record((0..p.dim()).map(|j| format!("z{j}")))?;
        for r in p.rows() {
            s.record(r.iter().map(|x| format_float(*x)))?;
        }
        s.finish()
    }

    pub fn write(path: &Path, p: &ParticleSet) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::file(path, e))?;
        Self::to_writer(BufWriter::new(f), p)?.flush()?;
        Ok(())
    }
}

/// Training metrics: `iteration,rule,ksd_u,seconds,theta_hash`.
pub struct MetricsWriter;

impl MetricsWriter {
    pub const HEADER: [&'static str; 5] = ["iteration", "rule", "ksd_u", "seconds", "theta_hash"];

    pub fn to_writer<W: Write>(w: W, records: &[MetricRecord]) -> Result<W> {
        let mut s = Sink::new(w);
        s.record(Self::HEADER)?;
        for r in records {
            s.record([
                r.iteration.to_string(),
                r.rule.to_string(),
                format_float(r.ksd_u),
                format_float(r.seconds),
                r.theta_hash.clone(),
            ])?;
        }
        s.finish()
    }

    pub fn write(path: &Path, records: &[MetricRecord]) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::file(path, e))?;
        Self::to_writer(BufWriter::new(f), records)?.flush()?;
        Ok(())
    }
}

/// One row of an MSE or classification table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub family: String,
    pub method: String,
    pub steps: usize,
    pub spec: String,
    pub n: usize,
    pub trial: usize,
    pub value: f64,
}

/// Evaluation tables: `family,method,T,spec,n,trial,value`.
pub struct TableWriter;

impl TableWriter {
    pub const HEADER: [&'static str; 7] = ["family", "method", "T", "spec", "n", "trial", "value"];

    pub fn to_writer<W: Write>(w: W, rows: &[TableRow]) -> Result<W> {
        let mut s = Sink::new(w);
        s.record(Self::HEADER)?;
        for r in rows {
            s.record([
                r.family.clone(),
                r.method.clone(),
                r.steps.to_string(),
                r.spec.clone(),
                r.n.to_string(),
                r.trial.to_string(),
                format_float(r.value),
            ])?;
        }
        s.finish()
    }

    pub fn write(path: &Path, rows: &[TableRow]) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::file(path, e))?;
        Self::to_writer(BufWriter::new(f), rows)?.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, std::f64::consts::PI] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn particle_csv_layout() {
        let p = ParticleSet::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let bytes = ParticleWriter::to_writer(Vec::new(), &p).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            "z0,z1\n1.0000000000000000e0,2.0000000000000000e0\n3.0000000000000000e0,4.0000000000000000e0\n"
        );
    }

    #[test]
    fn table_csv_layout() {
        let row = TableRow {
            family: "gmm".into(),
            method: "power-decay(a=-2,b=1)".into(),
            steps: 15,
            spec: "identity".into(),
            n: 1000,
            trial: 3,
            value: 0.5,
        };
        let text = String::from_utf8(TableWriter::to_writer(Vec::new(), &[row]).unwrap()).unwrap();
        assert_eq!(
            text,
            "family,method,T,spec,n,trial,value\ngmm,\"power-decay(a=-2,b=1)\",15,identity,1000,3,5.0000000000000000e-1\n"
        );
    }
}
