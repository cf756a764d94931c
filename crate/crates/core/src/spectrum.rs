//! Single-mode free-fermion quantities: quasiparticle energies and Bogoliubov angles.
//!
//! For momentum `q` and field `h`, the mode is described by the vector
//! `(cos q - h, gamma sin q)`. Its length is the energy and its polar angle,
//! taken in `[0, pi]`, is the Bogoliubov angle. The sine branch is fixed by
//! `sin theta = gamma sin q / eps >= 0`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::model::{momentum, BathParams};

#[cfg(debug_assertions)]
pub mod counter {
    //! Counts constructed mode entries; debug builds only.
    use std::sync::atomic::{AtomicUsize, Ordering};

    static MODE_ENTRIES: AtomicUsize = AtomicUsize::new(0);

    pub(crate) fn bump(n: usize) {
        MODE_ENTRIES.fetch_add(n, Ordering::Relaxed);
    }

    pub fn mode_entries_built() -> usize {
        MODE_ENTRIES.load(Ordering::Relaxed)
    }
}

fn mode_vector(q: f64, gamma: f64, field: f64) -> (f64, f64) {
    // `+ 0.0` maps a signed zero (gamma = -0.0) onto +0.0 so the angle stays in [0, pi].
    (q.cos() - field, gamma * q.sin() + 0.0)
}

/// `eps(q) = sqrt((cos q - h)^2 + gamma^2 sin^2 q)`.
pub fn energy_at(q: f64, gamma: f64, field: f64) -> f64 {
    let (x, y) = mode_vector(q, gamma, field);
    x.hypot(y)
}

/// Bogoliubov angle in `[0, pi]`; zero at the degenerate point `eps = 0`.
pub fn angle_at(q: f64, gamma: f64, field: f64) -> f64 {
    let (x, y) = mode_vector(q, gamma, field);
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    y.atan2(x)
}

pub fn energy(k: usize, n_sites: usize, gamma: f64, field: f64) -> Result<f64> {
    Ok(energy_at(momentum(k, n_sites)?, gamma, field))
}

pub fn bog_angle(k: usize, n_sites: usize, gamma: f64, field: f64) -> Result<f64> {
    Ok(angle_at(momentum(k, n_sites)?, gamma, field))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEntry {
    pub k: usize,
    pub momentum: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub theta0: f64,
    pub theta1: f64,
    /// `(theta0 - theta1) / 2`.
    pub dtheta: f64,
    /// `sin^2(2 dtheta)`, the depth of this mode's echo factor.
    pub weight: f64,
}

impl ModeEntry {
    fn new(k: usize, q: f64, params: &BathParams) -> Self {
        let (h0, h1) = (params.field(0), params.field(1));
        let theta0 = angle_at(q, params.gamma, h0);
        let theta1 = angle_at(q, params.gamma, h1);
        let dtheta = 0.5 * (theta0 - theta1);
        let s = (2.0 * dtheta).sin();
        Self {
            k,
            momentum: q,
            eps0: energy_at(q, params.gamma, h0),
            eps1: energy_at(q, params.gamma, h1),
            theta0,
            theta1,
            dtheta,
            weight: s * s,
        }
    }
}

/// Per-mode quantities for `k = 1..=M`, built once per parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub params: BathParams,
    pub entries: Vec<ModeEntry>,
}

impl ModeTable {
    pub fn build(params: &BathParams) -> Result<Self> {
        let params = params.validate()?;
        let m = params.mode_count();
        let n = params.n_sites as f64;
        let entries = (1..=m)
            .map(|k| ModeEntry::new(k, 2.0 * PI * k as f64 / n, &params))
            .collect();
        #[cfg(debug_assertions)]
        counter::bump(m);
        Ok(Self { params, entries })
    }

    /// Same per-mode quantities on an arbitrary momentum grid. Entry `i` gets label `k = i + 1`.
    pub fn with_momenta(params: &BathParams, momenta: &[f64]) -> Result<Self> {
        let params = params.validate()?;
        let entries = momenta
            .iter()
            .enumerate()
            .map(|(i, &q)| ModeEntry::new(i + 1, q, &params))
            .collect();
        #[cfg(debug_assertions)]
        counter::bump(momenta.len());
        Ok(Self { params, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the table as CSV: `k,momentum,eps0,eps1,theta0,theta1,dtheta`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,momentum,eps0,eps1,theta0,theta1,dtheta")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.k, e.momentum, e.eps0, e.eps1, e.theta0, e.theta1, e.dtheta
            )?;
        }
        Ok(())
    }
}

pub fn build_mode_table(params: &BathParams) -> Result<ModeTable> {
    ModeTable::build(params)
}
