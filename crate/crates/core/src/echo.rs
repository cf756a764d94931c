//! Decoherence factor, Loschmidt echo and the central qubit's reduced state.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BathParams, CentralQubit, ExcitationPattern};
use crate::spectrum::{ModeEntry, ModeTable};

/// Slack on `|R| <= 1` accepted by [`reduced_density`].
pub const FACTOR_TOL: f64 = 1e-10;

/// Per-mode factor `sin^2(dtheta) + cos^2(dtheta) exp(2 i eps1 t)`.
pub fn mode_factor(e: &ModeEntry, t: f64) -> Complex64 {
    // 1 + cos^2 (e^{ix} - 1): exactly one at t = 0
    let c = e.dtheta.cos();
    Complex64::new(1.0, 0.0) + c * c * (Complex64::cis(2.0 * e.eps1 * t) - 1.0)
}

/// Per-mode echo `1 - sin^2(2 dtheta) sin^2(eps1 t)`.
#[inline]
pub fn mode_echo(e: &ModeEntry, t: f64) -> f64 {
    let s = (e.eps1 * t).sin();
    1.0 - e.weight * s * s
}

/// Complex decoherence factor `R(t)`, a product over all modes.
pub fn decoherence_factor(table: &ModeTable, t: f64) -> Complex64 {
    table
        .entries
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, e| acc * mode_factor(e, t))
}

/// `L(t) = prod_k [1 - sin^2(2 dtheta_k) sin^2(eps1_k t)]`.
///
/// Plain double-precision product; values below the subnormal range flush to zero.
pub fn loschmidt_echo(table: &ModeTable, t: f64) -> f64 {
    table.entries.iter().map(|e| mode_echo(e, t)).product()
}

/// Natural log of the echo, accumulated as a sum. `-inf` when a factor vanishes.
pub fn log_loschmidt_echo(table: &ModeTable, t: f64) -> f64 {
    table.entries.iter().map(|e| mode_echo(e, t).ln()).sum()
}

/// Echo of a bath prepared with the modes in `pattern` singly excited.
/// Excited modes drop out of the product.
pub fn excited_echo(table: &ModeTable, pattern: &ExcitationPattern, t: f64) -> Result<f64> {
    let m = table.len();
    if let Some(&k) = pattern.modes().last() {
        if k > m {
            return Err(Error::ModeOutOfRange { k, max: m });
        }
    }
    Ok(table
        .entries
        .iter()
        .filter(|e| !pattern.contains(e.k))
        .map(|e| mode_echo(e, t))
        .product())
}

/// Sampled echo (and optionally the complex factor) over a list of times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchoTrace {
    pub times: Vec<f64>,
    pub l_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<Complex64>>,
}

impl EchoTrace {
    pub fn from_table(table: &ModeTable, times: &[f64], with_r: bool) -> Self {
        let l_values = times.iter().map(|&t| loschmidt_echo(table, t)).collect();
        let r_values = with_r.then(|| {
            times
                .iter()
                .map(|&t| decoherence_factor(table, t))
                .collect()
        });
        Self {
            times: times.to_vec(),
            l_values,
            r_values,
        }
    }

    pub fn excited(table: &ModeTable, pattern: &ExcitationPattern, times: &[f64]) -> Result<Self> {
        let l_values = times
            .iter()
            .map(|&t| excited_echo(table, pattern, t))
            .collect::<Result<_>>()?;
        Ok(Self {
            times: times.to_vec(),
            l_values,
            r_values: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min_l(&self) -> f64 {
        self.l_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_l(&self) -> f64 {
        self.l_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `t,L` or `t,L,Re_R,Im_R`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        match &self.r_values {
            Some(r) => {
                writeln!(out, "t,L,Re_R,Im_R")?;
                for ((t, l), r) in self.times.iter().zip(&self.l_values).zip(r) {
                    writeln!(out, "{t},{l},{},{}", r.re, r.im)?;
                }
            }
            None => {
                writeln!(out, "t,L")?;
                for (t, l) in self.times.iter().zip(&self.l_values) {
                    writeln!(out, "{t},{l}")?;
                }
            }
        }
        Ok(())
    }
}

/// Builds the mode table once and samples `L` and `R` at each time.
pub fn echo_trace(params: &BathParams, times: &[f64]) -> Result<EchoTrace> {
    let table = ModeTable::build(params)?;
    Ok(EchoTrace::from_table(&table, times, true))
}

/// 2x2 density matrix in the `{|0>, |1>}` basis, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMatrix2 {
    pub entries: [[Complex64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries;
        (a * a + b * c + c * b + d * d).re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [[a, b], _] = self.entries;
        let mean = 0.5 * (a.re + self.entries[1][1].re);
        let half_gap = (0.25 * (a.re - self.entries[1][1].re).powi(2) + b.norm_sqr()).sqrt();
        [mean + half_gap, mean - half_gap]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let e = &self.entries;
        (e[0][0].im).abs() <= tol
            && (e[1][1].im).abs() <= tol
            && (e[0][1] - e[1][0].conj()).norm() <= tol
    }
}

/// Reduced state of the central qubit given the decoherence factor `r` at time `t`.
pub fn reduced_density(qubit: &CentralQubit, r: Complex64, t: f64) -> Result<DensityMatrix2> {
    let modulus = r.norm();
    if modulus.is_nan() || modulus > 1.0 + FACTOR_TOL {
        return Err(Error::InvalidFactor(modulus));
    }
    let off = qubit.alpha * qubit.beta.conj() * Complex64::cis(-qubit.w_e * t) * r;
    Ok(DensityMatrix2 {
        entries: [
            [Complex64::new(qubit.alpha.norm_sqr(), 0.0), off],
            [off.conj(), Complex64::new(qubit.beta.norm_sqr(), 0.0)],
        ],
    })
}

/// `P = 1 - 2 |alpha beta|^2 (1 - L)`.
pub fn purity(qubit: &CentralQubit, l: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::OutOfRange(l));
    }
    let ab = qubit.alpha.norm_sqr() * qubit.beta.norm_sqr();
    Ok(1.0 - 2.0 * ab * (1.0 - l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn table(n: usize, g: f64, l: f64, d: f64) -> ModeTable {
        ModeTable::build(&BathParams::new(n, g, l, d).unwrap()).unwrap()
    }

    #[test]
    fn unity_at_time_zero() {
        let t = table(201, 1.0, 0.9, 0.1);
        assert_eq!(decoherence_factor(&t, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(loschmidt_echo(&t, 0.0), 1.0);
        assert_eq!(log_loschmidt_echo(&t, 0.0), 0.0);
    }

    #[test]
    fn zero_coupling_is_pure_phase() {
        let t = table(101, 0.7, 0.3, 0.0);
        for i in 0..50 {
            let r = decoherence_factor(&t, i as f64 * 0.37);
            assert!((r.norm() - 1.0).abs() < 1e-12);
            assert_eq!(loschmidt_echo(&t, i as f64 * 0.37), 1.0);
        }
    }

    #[test]
    fn critical_valley_decays_deeply() {
        let t = table(201, 1.0, 0.9, 0.1);
        let min = (0..=400)
            .map(|i| decoherence_factor(&t, i as f64 * 0.05).norm_sqr())
            .fold(1.0, f64::min);
        assert!(min < 0.1, "{min}");
    }

    #[test]
    fn xx_bath_never_decoheres() {
        for (n, l, d) in [(11, 0.3, 0.1), (201, -0.5, 0.4), (57, 0.99, -0.3)] {
            let tab = table(n, 0.0, l, d);
            for i in 0..200 {
                assert_eq!(loschmidt_echo(&tab, i as f64 * 0.5), 1.0);
            }
        }
    }

    #[test]
    fn log_accumulator_agrees() {
        let t = table(201, 0.4, 0.9, 0.1);
        for i in 1..100 {
            let time = i as f64 * 0.2;
            let l = loschmidt_echo(&t, time);
            assert!((log_loschmidt_echo(&t, time) - l.ln()).abs() < 1e-10 * (1.0 + l.ln().abs()));
        }
    }

    #[test]
    fn excited_edge_cases() {
        let t = table(101, 0.8, 0.95, 0.05);
        let full = ExcitationPattern::full(50);
        let none = ExcitationPattern::ground();
        for i in 0..100 {
            let time = i as f64 * 0.3;
            assert_eq!(excited_echo(&t, &full, time).unwrap(), 1.0);
            assert_eq!(
                excited_echo(&t, &none, time).unwrap(),
                loschmidt_echo(&t, time)
            );
        }
        let xx = table(101, 0.0, 0.4, 0.2);
        let some = ExcitationPattern::parse("2,9-20,44", 50).unwrap();
        assert_eq!(excited_echo(&xx, &some, 3.7).unwrap(), 1.0);
        let big = ExcitationPattern::full(60);
        assert!(matches!(
            excited_echo(&t, &big, 1.0),
            Err(Error::ModeOutOfRange { k: 60, max: 50 })
        ));
    }

    #[test]
    fn trace_at_zero() {
        let p = BathParams::new(21, 1.0, 0.5, 0.1).unwrap();
        let tr = echo_trace(&p, &[0.0]).unwrap();
        assert_eq!(tr.l_values, vec![1.0]);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,L,Re_R,Im_R\n0,1,1,0\n");
    }

    #[test]
    fn density_matrix_examples() {
        let q = CentralQubit::equal_superposition();
        let pure = reduced_density(&q, Complex64::new(1.0, 0.0), 0.0).unwrap();
        for row in pure.entries {
            for x in row {
                assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
        let dephased = reduced_density(&q, Complex64::new(0.0, 0.0), 2.0).unwrap();
        assert_eq!(dephased.entries[0][1], Complex64::new(0.0, 0.0));

        // [[1/2, 1/4], [1/4, 1/2]] has eigenvalues 3/4 and 1/4.
        let half = reduced_density(&q, Complex64::new(0.5, 0.0), 0.0).unwrap();
        let [hi, lo] = half.eigenvalues();
        assert!((hi - 0.75).abs() < 1e-15 && (lo - 0.25).abs() < 1e-15);
        assert!((half.purity() - 0.625).abs() < 1e-15);

        assert!(matches!(
            reduced_density(&q, Complex64::new(1.1, 0.0), 0.0),
            Err(Error::InvalidFactor(_))
        ));
    }

    #[test]
    fn level_splitting_rotates_coherence() {
        let q = CentralQubit::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            2.0,
        )
        .unwrap();
        let rho = reduced_density(&q, Complex64::new(1.0, 0.0), 0.25).unwrap();
        let expected = 0.5 * Complex64::cis(-0.5);
        assert!((rho.entries[0][1] - expected).norm() < 1e-15);
    }

    #[test]
    fn purity_examples() {
        let q = CentralQubit::equal_superposition();
        assert_eq!(purity(&q, 1.0).unwrap(), 1.0);
        assert!((purity(&q, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let basis =
            CentralQubit::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0).unwrap();
        assert_eq!(purity(&basis, 0.3).unwrap(), 1.0);
        assert!(matches!(purity(&q, 1.5), Err(Error::OutOfRange(_))));
    }

    fn arb_params() -> impl Strategy<Value = BathParams> {
        (
            1usize..110,
            0.0f64..1.5,
            -2.0f64..2.0,
            -0.5f64..0.5,
            0.0f64..3.0,
        )
            .prop_map(|(m, g, l, d, phi)| {
                BathParams::new(2 * m + 1, g, l, d).unwrap().with_phi(phi)
            })
    }

    proptest! {
        #[test]
        fn echo_bounded_and_matches_factor(p in arb_params(), t in 0.0f64..50.0) {
            let tab = ModeTable::build(&p).unwrap();
            let l = loschmidt_echo(&tab, t);
            let r = decoherence_factor(&tab, t);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&l));
            prop_assert!(r.norm() <= 1.0 + 1e-12);
            prop_assert!((r.norm_sqr() - l).abs() < 1e-10);
            let reversed: f64 = tab.entries.iter().rev().map(|e| mode_echo(e, t)).product();
            prop_assert!((reversed - l).abs() <= 1e-12);
        }

        #[test]
        fn echo_is_phi_independent(p in arb_params(), t in 0.0f64..50.0) {
            let base = loschmidt_echo(&ModeTable::build(&p.with_phi(0.0)).unwrap(), t);
            for phi in [0.3, 1.7] {
                let other = loschmidt_echo(&ModeTable::build(&p.with_phi(phi)).unwrap(), t);
                prop_assert!((other - base).abs() <= 1e-15);
            }
        }

        #[test]
        fn xx_echo_is_one(m in 1usize..150, l in -2.0f64..2.0, d in -0.5f64..0.5, t in 0.0f64..100.0) {
            let tab = ModeTable::build(&BathParams::new(2 * m + 1, 0.0, l, d).unwrap()).unwrap();
            prop_assert!((loschmidt_echo(&tab, t) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn removing_a_mode_never_lowers_echo(p in arb_params(), t in 0.0f64..30.0, seed in 0usize..1000) {
            let tab = ModeTable::build(&p).unwrap();
            let m = tab.len();
            let chosen: Vec<usize> = (1..=m).filter(|k| (k * 7 + seed) % 3 == 0).collect();
            let pattern = ExcitationPattern::new(chosen.clone(), m).unwrap();
            let base = excited_echo(&tab, &pattern, t).unwrap();
            let extra = (seed % m) + 1;
            if !pattern.contains(extra) {
                let mut more = chosen;
                more.push(extra);
                let bigger = ExcitationPattern::new(more, m).unwrap();
                prop_assert!(excited_echo(&tab, &bigger, t).unwrap() >= base);
            }
        }

        #[test]
        fn density_purity_consistent(
            a in (-1.0f64..1.0, -1.0f64..1.0),
            b in (-1.0f64..1.0, -1.0f64..1.0),
            r in (0.0f64..1.0, 0.0f64..std::f64::consts::TAU),
            w in -3.0f64..3.0,
            t in 0.0f64..10.0,
        ) {
            let alpha = Complex64::new(a.0, a.1);
            let beta = Complex64::new(b.0, b.1);
            prop_assume!(alpha.norm() + beta.norm() > 1e-3);
            let q = CentralQubit::normalized(alpha, beta, w).unwrap();
            let r = Complex64::from_polar(r.0, r.1);
            let rho = reduced_density(&q, r, t).unwrap();
            prop_assert!(rho.is_hermitian(1e-12));
            prop_assert!((rho.trace() - 1.0).norm() <= 1e-12);
            prop_assert!(rho.eigenvalues()[1] >= -1e-12);
            prop_assert!((rho.purity() - purity(&q, r.norm_sqr()).unwrap()).abs() <= 1e-12);
        }
    }
}
