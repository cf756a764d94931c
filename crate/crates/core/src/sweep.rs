//! Echo surfaces over a (lambda, t) grid and revival analysis of traces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::echo::{loschmidt_echo, EchoTrace};
use crate::error::{Error, Result};
use crate::model::BathParams;
use crate::spectrum::ModeTable;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `steps` uniformly spaced points from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidAxis("steps must be >= 1".into()));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidAxis("endpoints must be finite".into()));
        }
        if stop < start {
            return Err(Error::InvalidAxis(format!("stop {stop} < start {start}")));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.steps == 1 {
            return self.start;
        }
        if i + 1 == self.steps {
            return self.stop;
        }
        self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.point(i)).collect()
    }
}

/// Echo values, one row per lambda point and one column per time point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub t_axis: Axis,
    pub lambda_axis: Axis,
    pub base: BathParams,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.t_axis.steps;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.t_axis.steps)
    }

    /// `min_t L` for every lambda row.
    pub fn row_minima(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// Number of lambda rows whose minimum drops below `threshold`.
    pub fn decayed_rows(&self, threshold: f64) -> usize {
        self.row_minima().iter().filter(|&&m| m < threshold).count()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn surface_row(base: &BathParams, lambda: f64, times: &[f64]) -> Result<Vec<f64>> {
    let table = ModeTable::build(&base.with_lambda(lambda))?;
    Ok(times.iter().map(|&t| loschmidt_echo(&table, t)).collect())
}

/// Echo surface on the global rayon pool.
pub fn surface(base: &BathParams, lambda_axis: Axis, t_axis: Axis) -> Result<SweepGrid> {
    let base = base.validate()?;
    let times = t_axis.points();
    let rows: Vec<Vec<f64>> = lambda_axis
        .points()
        .into_par_iter()
        .map(|lambda| surface_row(&base, lambda, &times))
        .collect::<Result<_>>()?;
    Ok(SweepGrid {
        t_axis,
        lambda_axis,
        base,
        values: rows.concat(),
    })
}

/// Echo surface on a dedicated pool of `workers` threads; `1` runs inline.
pub fn surface_with_workers(
    base: &BathParams,
    lambda_axis: Axis,
    t_axis: Axis,
    workers: usize,
) -> Result<SweepGrid> {
    if workers <= 1 {
        let base = base.validate()?;
        let times = t_axis.points();
        let mut values = Vec::with_capacity(lambda_axis.steps * t_axis.steps);
        for lambda in lambda_axis.points() {
            values.extend(surface_row(&base, lambda, &times)?);
        }
        return Ok(SweepGrid {
            t_axis,
            lambda_axis,
            base,
            values,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| surface(base, lambda_axis, t_axis))
}

/// Revival detection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Minimum height of a revival peak.
    pub threshold: f64,
    /// Minimum index distance between accepted peaks.
    pub min_separation: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            min_separation: 3,
        }
    }
}

/// Interior local maxima of `values` at or above the threshold. Within
/// `min_separation` samples only the taller peak is kept.
pub fn revival_peaks(values: &[f64], opts: PeakOptions) -> Vec<usize> {
    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let v = values[i];
        if v < opts.threshold || v < values[i - 1] || v <= values[i + 1] {
            continue;
        }
        match peaks.last_mut() {
            Some(last) if i - *last < opts.min_separation => {
                if v > values[*last] {
                    *last = i;
                }
            }
            _ => peaks.push(i),
        }
    }
    peaks
}

/// Mean spacing in time between successive revival peaks, `None` with fewer than two.
pub fn quasiperiod_with(trace: &EchoTrace, opts: PeakOptions) -> Option<f64> {
    let peaks = revival_peaks(&trace.l_values, opts);
    if peaks.len() < 2 {
        return None;
    }
    let first = trace.times[peaks[0]];
    let last = trace.times[*peaks.last()?];
    Some((last - first) / (peaks.len() - 1) as f64)
}

pub fn quasiperiod(trace: &EchoTrace) -> Option<f64> {
    quasiperiod_with(trace, PeakOptions::default())
}

/// Time of the first revival peak.
pub fn first_revival(trace: &EchoTrace, opts: PeakOptions) -> Option<f64> {
    revival_peaks(&trace.l_values, opts)
        .first()
        .map(|&i| trace.times[i])
}

#[derive(Debug, Serialize)]
struct GridSidecar<'a> {
    n_sites: usize,
    gamma: f64,
    lambda_axis: &'a Axis,
    t_axis: &'a Axis,
    delta: f64,
    phi: f64,
    tool_version: &'a str,
}

/// Sidecar path for an output file: `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Grid as CSV: header `lambda,<t values>`, then one row per lambda.
pub fn write_grid_csv<W: Write>(grid: &SweepGrid, mut out: W) -> std::io::Result<()> {
    write!(out, "lambda")?;
    for t in grid.t_axis.points() {
        write!(out, ",{t}")?;
    }
    writeln!(out)?;
    for (lambda, row) in grid.lambda_axis.points().iter().zip(grid.rows()) {
        write!(out, "{lambda}")?;
        for v in row {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn grid_sidecar_json(grid: &SweepGrid) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&GridSidecar {
        n_sites: grid.base.n_sites,
        gamma: grid.base.gamma,
        lambda_axis: &grid.lambda_axis,
        t_axis: &grid.t_axis,
        delta: grid.base.delta,
        phi: grid.base.phi,
        tool_version: TOOL_VERSION,
    })
}

/// Writes the CSV grid to `path` and its parameters to [`sidecar_path`].
pub fn write_grid(grid: &SweepGrid, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_grid_csv(grid, &mut out)?;
    out.flush()?;
    let mut meta = grid_sidecar_json(grid)?;
    meta.push('\n');
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}
