//! Per-mode Fock-space oracle for the decoherence factor.
//!
//! Basis order is `|n_k n_-k>` = `{|00>, |01>, |10>, |11>}`, with mode `k` first in
//! the Jordan-Wigner ordering so that `c_-k` carries a parity string on mode `k`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::echo::mode_factor;
use crate::error::{Error, Result};
use crate::model::{momentum, BathParams};
use crate::spectrum::{angle_at, energy_at, ModeEntry};

type M4 = Matrix4<Complex64>;
type V4 = Vector4<Complex64>;

const KERNEL_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn annihilate_k() -> M4 {
    let mut m = M4::zeros();
    m[(0, 2)] = c(1.0); // |10> -> |00>
    m[(1, 3)] = c(1.0); // |11> -> |01>
    m
}

fn annihilate_minus_k() -> M4 {
    let mut m = M4::zeros();
    m[(0, 1)] = c(1.0); // |01> -> |00>
    m[(2, 3)] = c(-1.0); // |11> -> -|10>, string on mode k
    m
}

/// The pair `(k, -k)` with Bogoliubov operators for both bath Hamiltonians.
#[derive(Debug, Clone)]
pub struct ModePair {
    theta: [f64; 2],
    eps: [f64; 2],
    phase: Complex64,
    ck: M4,
    cmk: M4,
}

impl ModePair {
    pub fn new(k: usize, params: &BathParams) -> Result<Self> {
        let params = params.validate()?;
        let q = momentum(k, params.n_sites)?;
        let g = params.gamma;
        Ok(Self {
            theta: [
                angle_at(q, g, params.field(0)),
                angle_at(q, g, params.field(1)),
            ],
            eps: [
                energy_at(q, g, params.field(0)),
                energy_at(q, g, params.field(1)),
            ],
            phase: Complex64::cis(2.0 * params.phi),
            ck: annihilate_k(),
            cmk: annihilate_minus_k(),
        })
    }

    /// `(mu_k, mu_-k)` for bath Hamiltonian `j`.
    pub fn annihilators(&self, j: usize) -> (M4, M4) {
        let (s, co) = (0.5 * self.theta[j]).sin_cos();
        let i = Complex64::i();
        let mu_k = self.ck * c(co) - self.cmk.adjoint() * (i * self.phase * s);
        let mu_mk = self.cmk * c(co) + self.ck.adjoint() * (i * self.phase * s);
        (mu_k, mu_mk)
    }

    /// Pair share of `H_j`: `eps (n_k + n_-k - 2)` in the quasiparticle modes.
    pub fn hamiltonian(&self, j: usize) -> M4 {
        let (a, b) = self.annihilators(j);
        (a.adjoint() * a + b.adjoint() * b - M4::identity() * c(2.0)) * c(self.eps[j])
    }

    /// Normalized state annihilated by both `mu_k` and `mu_-k` of Hamiltonian `j`.
    /// The largest-magnitude component is made real and positive.
    pub fn vacuum(&self, j: usize) -> Result<V4> {
        let (a, b) = self.annihilators(j);
        let gram = a.adjoint() * a + b.adjoint() * b;
        let eig = gram.symmetric_eigen();
        let zero: Vec<usize> = (0..4)
            .filter(|&i| eig.eigenvalues[i].abs() < KERNEL_TOL)
            .collect();
        if zero.len() != 1 {
            return Err(Error::KernelNotFound(zero.len()));
        }
        let v: V4 = eig.eigenvectors.column(zero[0]).into_owned();
        Ok(fix_phase(v.normalize()))
    }

    /// `mu_k^(0)+ |vacuum_0>`: mode `k` singly excited above the initial ground state.
    pub fn excited(&self) -> Result<V4> {
        let (a, _) = self.annihilators(0);
        let v = a.adjoint() * self.vacuum(0)?;
        Ok(fix_phase(v.normalize()))
    }
}

fn fix_phase(v: V4) -> V4 {
    let big = v
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(c(1.0));
    if big.norm() == 0.0 {
        return v;
    }
    v * (big.conj() / big.norm())
}

/// `<psi| exp(-i H t) |psi>` through the eigendecomposition of the Hermitian `H`.
fn evolved_overlap(h: &M4, psi: &V4, t: f64) -> Complex64 {
    let eig = h.symmetric_eigen();
    (0..4)
        .map(|n| {
            let amp = eig.eigenvectors.column(n).dotc(psi);
            amp.norm_sqr() * Complex64::cis(-eig.eigenvalues[n] * t)
        })
        .sum()
}

/// Overlap `<Phi0| exp(-i H_1 t) |Phi0>` restricted to the pair `(k, -k)`.
pub fn fock_mode_overlap(k: usize, params: &BathParams, t: f64) -> Result<Complex64> {
    let pair = ModePair::new(k, params)?;
    let psi = pair.vacuum(0)?;
    Ok(evolved_overlap(&pair.hamiltonian(1), &psi, t))
}

/// Same overlap with mode `k` singly excited.
pub fn excited_mode_overlap(k: usize, params: &BathParams, t: f64) -> Result<Complex64> {
    let pair = ModePair::new(k, params)?;
    let psi = pair.excited()?;
    Ok(evolved_overlap(&pair.hamiltonian(1), &psi, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockModeResult {
    pub k: usize,
    pub t: f64,
    pub r_closed: Complex64,
    pub r_oracle: Complex64,
    pub abs_diff: f64,
}

/// Compares the closed-form pair factor with the Fock-space overlap.
pub fn fock_mode_check(k: usize, params: &BathParams, t: f64) -> Result<FockModeResult> {
    let params = params.validate()?;
    let q = momentum(k, params.n_sites)?;
    let entry = crate::spectrum::ModeTable::with_momenta(&params, &[q])?.entries[0];
    let r_closed = mode_factor(&ModeEntry { k, ..entry }, t);
    let r_oracle = fock_mode_overlap(k, &params, t)?;
    Ok(FockModeResult {
        k,
        t,
        r_closed,
        r_oracle,
        abs_diff: (r_closed - r_oracle).norm(),
    })
}
