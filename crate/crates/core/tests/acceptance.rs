//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line to stderr
//! (written directly, so it shows even when output is captured) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use loschmidt_core::oracles::{
    ed_loschmidt, excited_mode_overlap, fock_mode_check, fock_mode_overlap,
};
use loschmidt_core::sweep::{quasiperiod, surface_with_workers};
use loschmidt_core::{
    build_mode_table, excited_echo, loschmidt_echo, purity, reduced_density, Axis, BathParams,
    CentralQubit, EchoTrace, ExcitationPattern, ModeTable,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: String) {
    let line = format!(
        "[{}] {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn times(t_max: f64, steps: usize) -> Vec<f64> {
    Axis::new(0.0, t_max, steps).unwrap().points()
}

#[test]
fn c1_vanishing_decoherence_for_xx_bath() {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let ts = times(50.0, 500);
    let mut worst: f64 = 0.0;
    for n in [11, 101, 201] {
        for lambda in [-0.5, 0.0, 0.5, 0.9] {
            for delta in [0.05, 0.1] {
                let table =
                    build_mode_table(&BathParams::new(n, 0.0, lambda, delta).unwrap()).unwrap();
                for &t in &ts {
                    worst = worst.max((loschmidt_echo(&table, t) - 1.0).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= TOL && elapsed < Duration::from_secs(1);
    report(
        "C1 vanishing decoherence (gamma=0)",
        pass,
        format!("max |L-1| = {worst:e} (tol {TOL:e}), {elapsed:.2?} (limit 1 s)"),
    );
    assert!(pass);
}

#[test]
fn c2_per_mode_oracle_equivalence() {
    const TOL: f64 = 1e-10;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=100usize);
        let k = rng.gen_range(1..=m);
        let params = BathParams::new(
            2 * m + 1,
            rng.gen_range(0.0..=1.5),
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-0.5..=0.5),
        )
        .unwrap();
        let t = rng.gen_range(0.0..=50.0);
        worst = worst.max(fock_mode_check(k, &params, t).unwrap().abs_diff);
    }
    let elapsed = start.elapsed();
    let pass = worst <= TOL && elapsed < Duration::from_secs(10);
    report(
        "C2 per-mode Fock oracle vs closed form",
        pass,
        format!("1000 tuples, max |diff| = {worst:e} (tol {TOL:e}), {elapsed:.2?} (limit 10 s)"),
    );
    assert!(pass);
}

#[test]
fn c3_ed_convergence() {
    const XX_TOL: f64 = 1e-10;
    let start = Instant::now();
    let ts = times(5.0, 100);
    let devs: Vec<(usize, f64, f64)> = [7, 9, 11]
        .iter()
        .map(|&n| {
            let r = ed_loschmidt(&BathParams::new(n, 1.0, 0.9, 0.1).unwrap(), &ts).unwrap();
            (n, r.max_abs_dev, r.max_sector_dev)
        })
        .collect();
    let nonincreasing = devs.windows(2).all(|w| w[1].1 <= w[0].1);
    let xx = ed_loschmidt(&BathParams::new(11, 0.0, 0.9, 0.1).unwrap(), &ts).unwrap();
    let xx_dev = xx.l_ed.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = nonincreasing && xx_dev <= XX_TOL && elapsed < Duration::from_secs(120);
    let per_n: Vec<String> = devs
        .iter()
        .map(|(n, d, s)| format!("N={n}: {d:.4e} (sector grid {s:.1e})"))
        .collect();
    report(
        "C3 ED convergence in N",
        pass,
        format!(
            "max_abs_dev {} nonincreasing={nonincreasing}; gamma=0 N=11 max |L_ED-1| = {xx_dev:e} (tol {XX_TOL:e}); {elapsed:.2?}",
            per_n.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn c4_criticality_enhanced_decay() {
    // Frozen from the first validated run: min over t in [0, 20] (201 samples).
    const GOLDEN_VALLEY: f64 = 4.012_944_608_230_104e-2;
    const GOLDEN_FAR: f64 = 9.686_681_852_906_572e-1;
    let start = Instant::now();
    let ts = times(20.0, 201);
    let floor = |lambda: f64| {
        let table = build_mode_table(&BathParams::new(201, 1.0, lambda, 0.1).unwrap()).unwrap();
        ts.iter()
            .map(|&t| loschmidt_echo(&table, t))
            .fold(f64::INFINITY, f64::min)
    };
    let (valley, far) = (floor(0.9), floor(2.0));
    let elapsed = start.elapsed();
    let goldens = (valley - GOLDEN_VALLEY).abs() < 1e-12 && (far - GOLDEN_FAR).abs() < 1e-12;
    let pass = valley * 10.0 <= far && goldens && elapsed < Duration::from_secs(1);
    report(
        "C4 criticality-enhanced decay",
        pass,
        format!(
            "min L(lambda=0.9) = {valley:.6e}, min L(lambda=2.0) = {far:.6e}, ratio {:.2} (need >= 10), goldens match={goldens}, {elapsed:.2?}",
            far / valley
        ),
    );
    assert!(pass);
}

#[test]
fn c5_widening_decay_region() {
    const THRESHOLD: f64 = 0.1;
    let start = Instant::now();
    let la = Axis::new(0.0, 2.0, 201).unwrap();
    let ta = Axis::new(0.0, 20.0, 201).unwrap();
    let counts: Vec<usize> = [1.0, 0.4, 0.1]
        .iter()
        .map(|&g| {
            surface_with_workers(&BathParams::new(201, g, 0.9, 0.1).unwrap(), la, ta, 1)
                .unwrap()
                .decayed_rows(THRESHOLD)
        })
        .collect();
    let elapsed = start.elapsed();
    let pass = counts[0] < counts[1] && counts[1] < counts[2] && elapsed < Duration::from_secs(30);
    report(
        "C5 widening decay region",
        pass,
        format!("decayed lambda points for gamma 1.0/0.4/0.1 = {counts:?}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn c6_excited_state_laws() {
    const FULL_TOL: f64 = 1e-12;
    const ORACLE_TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut full_dev, mut oracle_dev, mut empty_exact) = (0.0f64, 0.0f64, true);
    for _ in 0..40 {
        let m = rng.gen_range(1..=30usize);
        let params = BathParams::new(
            2 * m + 1,
            rng.gen_range(0.0..=1.5),
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-0.5..=0.5),
        )
        .unwrap();
        let table = ModeTable::build(&params).unwrap();
        let chosen: Vec<usize> = (1..=m).filter(|_| rng.gen_bool(0.4)).collect();
        let pattern = ExcitationPattern::new(chosen, m).unwrap();
        let full = ExcitationPattern::full(m);
        for _ in 0..5 {
            let t = rng.gen_range(0.0..=50.0);
            full_dev = full_dev.max((excited_echo(&table, &full, t).unwrap() - 1.0).abs());
            empty_exact &= excited_echo(&table, &ExcitationPattern::ground(), t).unwrap()
                == loschmidt_echo(&table, t);
            let reconstructed: f64 = (1..=m)
                .map(|k| {
                    let r = if pattern.contains(k) {
                        excited_mode_overlap(k, &params, t).unwrap()
                    } else {
                        fock_mode_overlap(k, &params, t).unwrap()
                    };
                    r.norm_sqr()
                })
                .product();
            oracle_dev =
                oracle_dev.max((excited_echo(&table, &pattern, t).unwrap() - reconstructed).abs());
        }
    }
    let pass = full_dev <= FULL_TOL && oracle_dev <= ORACLE_TOL && empty_exact;
    report(
        "C6 excited-state laws",
        pass,
        format!(
            "full pattern max |L-1| = {full_dev:e} (tol {FULL_TOL:e}); partial vs Fock reconstruction {oracle_dev:e} (tol {ORACLE_TOL:e}); empty pattern exact={empty_exact}"
        ),
    );
    assert!(pass);
}

#[test]
fn c7_purity_consistency() {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let qubit = CentralQubit::normalized(a, b, rng.gen_range(-2.0..2.0)).unwrap();
        let r = Complex64::from_polar(
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let t = rng.gen_range(0.0..20.0);
        let rho = reduced_density(&qubit, r, t).unwrap();
        let p = purity(&qubit, r.norm_sqr()).unwrap();
        worst = worst.max((rho.purity() - p).abs());
    }
    let pass = worst <= TOL;
    report(
        "C7 purity consistency",
        pass,
        format!("1000 samples, max |Tr rho^2 - P| = {worst:e} (tol {TOL:e})"),
    );
    assert!(pass);
}

#[test]
fn c8_quasiperiod_scaling() {
    const REL_TOL: f64 = 0.10;
    // Frozen from the first validated run.
    const GOLDEN_SMALL: f64 = 50.716_666_666_666_66;
    const GOLDEN_LARGE: f64 = 100.75;
    let ts = times(250.0, 5001);
    let qp = |n: usize| {
        let table = build_mode_table(&BathParams::new(n, 1.0, 0.9, 0.1).unwrap()).unwrap();
        quasiperiod(&EchoTrace::from_table(&table, &ts, false))
    };
    let (small, large) = (qp(101), qp(201));
    let (pass, detail) = match (small, large) {
        (Some(s), Some(l)) => {
            let size_ratio = 201.0 / 101.0;
            let ratio = l / s;
            let rel = (ratio / size_ratio - 1.0).abs();
            let goldens = (s - GOLDEN_SMALL).abs() < 1e-9 && (l - GOLDEN_LARGE).abs() < 1e-9;
            (
                rel <= REL_TOL && goldens,
                format!(
                    "quasiperiod N=101: {s:.4}, N=201: {l:.4}; ratio {ratio:.4} vs size ratio {size_ratio:.4} (rel err {rel:.3}, tol {REL_TOL}); goldens match={goldens}"
                ),
            )
        }
        other => (false, format!("revivals not detected: {other:?}")),
    };
    report("C8 quasiperiod scaling with N", pass, detail);
    assert!(pass);
}

#[test]
fn c9_surface_performance() {
    const SINGLE_LIMIT: Duration = Duration::from_secs(5);
    const MIN_SPEEDUP: f64 = 2.0;
    let base = BathParams::new(201, 1.0, 0.9, 0.1).unwrap();
    let la = Axis::new(0.0, 2.0, 201).unwrap();
    let ta = Axis::new(0.0, 20.0, 201).unwrap();
    let best = |workers: usize| {
        let mut best = Duration::MAX;
        let mut grid = None;
        for _ in 0..3 {
            let start = Instant::now();
            let g = surface_with_workers(&base, la, ta, workers).unwrap();
            best = best.min(start.elapsed());
            grid = Some(g);
        }
        (best, grid.unwrap())
    };
    let (t1, g1) = best(1);
    let (t4, g4) = best(4);
    let identical = g1
        .values
        .iter()
        .zip(&g4.values)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let pass = t1 < SINGLE_LIMIT && speedup >= MIN_SPEEDUP && identical;
    report(
        "C9 surface performance",
        pass,
        format!(
            "201x201 at N=201: 1 worker {t1:.2?} (limit {SINGLE_LIMIT:?}), 4 workers {t4:.2?}, speedup {speedup:.2} (need >= {MIN_SPEEDUP}), bit-identical={identical}, available cores {cores}"
        ),
    );
    assert!(pass);
}
