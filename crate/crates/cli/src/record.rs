//! CSV rows for single runs and benchmark cells.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const RUN_COLUMNS: [&str; 10] = [
    "method",
    "dims",
    "ranks",
    "order",
    "eta",
    "seed",
    "threads",
    "rel_residual",
    "seconds",
    "iters_per_mode",
];

pub const BENCH_EXTRA: [&str; 7] = [
    "trials",
    "failures",
    "rel_residual_stdev",
    "seconds_stdev",
    "als_seconds",
    "als_seconds_stdev",
    "speedup",
];

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub method: String,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub order: String,
    /// Only set for ALS-based methods.
    pub eta: Option<f64>,
    pub seed: u64,
    pub threads: usize,
    pub rel_residual: f64,
    pub seconds: f64,
    /// Empty unless ALS ran; indexed by mode.
    pub iters_per_mode: Vec<usize>,
}

pub fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

impl RunRecord {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            join(&self.dims, "x"),
            join(&self.ranks, "x"),
            self.order.clone(),
            self.eta.map(|e| format!("{e:e}")).unwrap_or_default(),
            self.seed.to_string(),
            self.threads.to_string(),
            format!("{:e}", self.rel_residual),
            format!("{:.6}", self.seconds),
            join(&self.iters_per_mode, ";"),
        ]
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &[String], path: &Path) -> CliResult<()> {
    w.write_record(row).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}
