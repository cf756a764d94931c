//! Exact diagonalization of the periodic XY ring.
//!
//! Basis states are bit strings; bit `l` set means spin `l` points down
//! (`sigma^z_l = -1`). The Hamiltonian is applied matrix-free.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::krylov::{lowest_eigenpair, propagate, Operator};
use crate::echo::loschmidt_echo;
use crate::error::{Error, Result};
use crate::model::BathParams;
use crate::spectrum::ModeTable;

pub const ED_MAX_SITES: usize = 13;

/// Spin-chain time per unit of analytic time.
///
/// The quasiparticle energies of the spin Hamiltonian are `2 eps_k`, while the
/// analytic echo is written with `eps_k`; analytic time `t` is spin time `t / 2`.
pub const ED_TIME_SCALE: f64 = 0.5;

/// Gap below which the ground level counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

const EIGEN_TOL: f64 = 1e-11;
const KRYLOV_DIM: usize = 24;
const STEP_TOL: f64 = 1e-12;

/// `-sum_l [(1+g)/2 X_l X_{l+1} + (1-g)/2 Y_l Y_{l+1} + h Z_l]` on a ring, rotated by `phi` about z.
#[derive(Debug, Clone)]
pub struct SpinChain {
    n_sites: usize,
    field: f64,
    /// Amplitudes for a bond flip from equal bits `00 -> 11`, `11 -> 00`, and unequal bits.
    pair_down: Complex64,
    pair_up: Complex64,
    hop: f64,
}

impl SpinChain {
    pub fn new(params: &BathParams, j: u8) -> Self {
        let g = params.gamma;
        Self {
            n_sites: params.n_sites,
            field: params.field(j),
            pair_down: -g * Complex64::cis(-2.0 * params.phi),
            pair_up: -g * Complex64::cis(2.0 * params.phi),
            hop: -1.0,
        }
    }
}

impl Operator for SpinChain {
    fn dim(&self) -> usize {
        1 << self.n_sites
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n_sites;
        for (s, ys) in y.iter_mut().enumerate() {
            let down = s.count_ones() as f64;
            let mut acc = x[s] * (-self.field * (n as f64 - 2.0 * down));
            for l in 0..n {
                let r = (l + 1) % n;
                let src = s ^ (1 << l) ^ (1 << r);
                let (bl, br) = ((src >> l) & 1, (src >> r) & 1);
                let amp = match (bl, br) {
                    (0, 0) => self.pair_down,
                    (1, 1) => self.pair_up,
                    _ => Complex64::new(self.hop, 0.0),
                };
                acc += amp * x[src];
            }
            *ys = acc;
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Distance to the next level.
    pub gap: f64,
    /// Eigenvalue of `prod_l sigma^z_l`, i.e. `(-1)^(number of fermions)`.
    pub parity: i8,
    pub vector: Vec<Complex64>,
}

fn random_start(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn check_size(params: &BathParams) -> Result<BathParams> {
    let params = params.validate()?;
    if params.n_sites > ED_MAX_SITES {
        return Err(Error::ChainTooLarge {
            n: params.n_sites,
            max: ED_MAX_SITES,
        });
    }
    Ok(params)
}

/// Ground state of bath Hamiltonian `j`. Fails if the lowest level is degenerate.
pub fn ed_ground_state(params: &BathParams, j: u8) -> Result<GroundState> {
    let params = check_size(params)?;
    let h = SpinChain::new(&params, j);
    let dim = h.dim();
    let ground = lowest_eigenpair(&h, &random_start(dim, 7), &[], EIGEN_TOL, 200);
    if ground.residual > EIGEN_TOL {
        return Err(Error::NoConvergence(ground.residual));
    }
    let excited = lowest_eigenpair(
        &h,
        &random_start(dim, 11),
        std::slice::from_ref(&ground.vector),
        EIGEN_TOL,
        200,
    );
    let gap = excited.value - ground.value;
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateGroundState { gap });
    }

    let mut vector = ground.vector;
    let big = vector
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = big.conj() / big.norm();
    vector.iter_mut().for_each(|v| *v *= rot);

    let even: f64 = vector
        .iter()
        .enumerate()
        .map(|(s, v)| {
            if s.count_ones() % 2 == 0 {
                v.norm_sqr()
            } else {
                -v.norm_sqr()
            }
        })
        .sum();
    Ok(GroundState {
        energy: ground.value,
        gap,
        parity: if even >= 0.0 { 1 } else { -1 },
        vector,
    })
}

/// Momenta of the paired modes in the ground state's parity sector: antiperiodic
/// `pi (2n + 1) / N` for even fermion number, periodic `2 pi n / N` for odd.
pub fn sector_momenta(n_sites: usize, parity: i8) -> Vec<f64> {
    let m = (n_sites - 1) / 2;
    let n = n_sites as f64;
    (0..m)
        .map(|i| {
            let i = i as f64;
            if parity > 0 {
                std::f64::consts::PI * (2.0 * i + 1.0) / n
            } else {
                2.0 * std::f64::consts::PI * (i + 1.0) / n
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EDResult {
    pub n_sites: usize,
    pub times: Vec<f64>,
    pub l_ed: Vec<f64>,
    /// Closed-form echo on the `2 pi k / N` grid.
    pub l_analytic: Vec<f64>,
    /// `max_t |l_ed - l_analytic|`.
    pub max_abs_dev: f64,
    /// Closed-form echo on the momentum grid of the ground state's parity sector.
    pub l_sector: Vec<f64>,
    pub max_sector_dev: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub parity: i8,
    pub substeps: usize,
}

/// Echo from brute-force time evolution of the full chain.
///
/// `times` are in analytic units and must be non-negative and non-decreasing.
pub fn ed_loschmidt(params: &BathParams, times: &[f64]) -> Result<EDResult> {
    let params = check_size(params)?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidTimes("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidTimes("times must be non-decreasing".into()));
    }
    let ground = ed_ground_state(&params, 0)?;
    let h1 = SpinChain::new(&params, 1);

    let mut psi = ground.vector.clone();
    let mut now = 0.0;
    let mut substeps = 0;
    let mut l_ed = Vec::with_capacity(times.len());
    for &t in times {
        let target = t * ED_TIME_SCALE;
        if target > now {
            substeps += propagate(&h1, &mut psi, target - now, KRYLOV_DIM, STEP_TOL);
            now = target;
        }
        let overlap: Complex64 = ground
            .vector
            .iter()
            .zip(&psi)
            .map(|(a, b)| a.conj() * b)
            .sum();
        l_ed.push(overlap.norm_sqr());
    }

    let table = ModeTable::build(&params)?;
    let sector = ModeTable::with_momenta(&params, &sector_momenta(params.n_sites, ground.parity))?;
    let l_analytic: Vec<f64> = times.iter().map(|&t| loschmidt_echo(&table, t)).collect();
    let l_sector: Vec<f64> = times.iter().map(|&t| loschmidt_echo(&sector, t)).collect();
    let max_dev = |other: &[f64]| {
        l_ed.iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    Ok(EDResult {
        n_sites: params.n_sites,
        times: times.to_vec(),
        max_abs_dev: max_dev(&l_analytic),
        max_sector_dev: max_dev(&l_sector),
        l_ed,
        l_analytic,
        l_sector,
        ground_energy: ground.energy,
        gap: ground.gap,
        parity: ground.parity,
        substeps,
    })
}

impl EDResult {
    /// CSV with header `t,L_ed,L_analytic,abs_dev`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,L_ed,L_analytic,abs_dev")?;
        for ((t, a), b) in self.times.iter().zip(&self.l_ed).zip(&self.l_analytic) {
            writeln!(out, "{t},{a},{b},{}", (a - b).abs())?;
        }
        Ok(())
    }
}
