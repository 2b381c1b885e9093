//! Acceptance suite: one test per verification criterion, each printing a
//! PASS/FAIL line with its measured numbers (run with --nocapture to see the
//! lines for passing tests).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soqt::evolve::{propagator_analytic, propagator_components};
use soqt::experiment::{
    bloch_distance, bloch_fidelity, concurrence, delta_error_curve, evolve_state, measure,
    prepare_direct, sweep_bloch_grid, BlochState, EvolutionMethod, NoiseKind, NoiseSpec,
    TomographyConfig, DEFAULT_J12_HZ,
};
use soqt::model::{
    hamiltonian_matrix, model_a_xyx, model_b_xxz, model_c_minus, model_c_plus, spectrum, XyzParams,
};
use soqt::optimize::{
    failure_check, maximize_delta, pure_optimum_params, PureOptimumSpec, DISORDERED_MAX,
};
use soqt::pulsesim::{
    compile_unitary, exact_decomposition_sequence, exact_decomposition_timing, gate_fidelity,
    trotter_propagator, trotter_segment,
};
use soqt::qmat::{expm_hermitian, CMat, DensityMatrix, C64};
use soqt::transfer::{
    abs_delta_analytic, error_coefficients, reconstruct, transfer_matrix, AssistantState,
    JointProbabilities,
};
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::time::Instant;

fn random_params(rng: &mut impl Rng) -> XyzParams {
    XyzParams::new(
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
    )
}

fn pure_max() -> f64 {
    1.0 / (12.0 * 3f64.sqrt())
}

#[test]
fn criterion_01_analytic_spectrum_matches_diagonalization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let h = hamiltonian_matrix(&p);
        let s = spectrum(&p);
        for k in 0..4 {
            for i in 0..4 {
                let mut hv = C64::new(0.0, 0.0);
                for j in 0..4 {
                    hv += h.get(i, j) * C64::new(s.vectors[k][j], 0.0);
                }
                worst = worst.max((hv - C64::new(s.lambdas[k] * s.vectors[k][i], 0.0)).norm());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && elapsed < 5.0;
    println!(
        "criterion 1: {} - eigen residual max {worst:.3e} (< 1e-10), runtime {elapsed:.2}s (< 5s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_02_propagator_closed_form_and_block_structure() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst_prop: f64 = 0.0;
    let mut worst_block: f64 = 0.0;
    const BLOCK: [(usize, usize); 8] = [
        (0, 0),
        (1, 1),
        (2, 2),
        (3, 3),
        (0, 3),
        (3, 0),
        (1, 2),
        (2, 1),
    ];
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let tau = rng.gen_range(0.05..6.0);
        let u = propagator_analytic(&p, tau).u;
        let oracle = expm_hermitian(&hamiltonian_matrix(&p), tau).unwrap();
        worst_prop = worst_prop.max(u.max_abs_diff(&oracle));
        for i in 0..4 {
            for j in 0..4 {
                if !BLOCK.contains(&(i, j)) {
                    worst_block = worst_block.max(u.get(i, j).norm());
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_prop < 1e-10 && worst_block < 1e-14 && elapsed < 5.0;
    println!(
        "criterion 2: {} - closed form vs expm {worst_prop:.3e} (< 1e-10), off-block {worst_block:.3e} (< 1e-14), runtime {elapsed:.2}s (< 5s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_03_determinant_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_delta: f64 = 0.0;
    let mut worst_det_rel: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let tau = rng.gen_range(0.05..6.0);
        let eps = rng.gen_range(0.0..1.0);
        let u = propagator_analytic(&p, tau);
        let tm = transfer_matrix(&AssistantState::new(eps), &u);
        worst_delta = worst_delta.max((tm.abs_delta - abs_delta_analytic(&p, tau, eps)).abs());
        let want = C64::new(0.0, -0.25) * tm.delta;
        worst_det_rel = worst_det_rel.max((tm.m_tilde.det() - want).norm());
    }
    let pass = worst_delta < 1e-10 && worst_det_rel < 1e-10;
    println!(
        "criterion 3: {} - closed-form |Delta| vs brute force {worst_delta:.3e}, det(m_tilde)+i/4*Delta {worst_det_rel:.3e} (both < 1e-10)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_04_paper_optima() {
    let mut fails = Vec::new();
    for (name, p) in [
        ("XYX", model_a_xyx()),
        ("XXZ", model_b_xxz()),
        ("XZ+", model_c_plus()),
        ("XZ-", model_c_minus()),
    ] {
        let v = abs_delta_analytic(&p, FRAC_PI_4, 0.0);
        if (v - DISORDERED_MAX).abs() >= 1e-12 {
            fails.push(format!("{name}: {v}"));
        }
    }
    let spec = PureOptimumSpec::paper_default();
    let p_opt = pure_optimum_params(&spec, 1.0);
    let v_opt = abs_delta_analytic(&p_opt, 1.0, 1.0);
    if (v_opt - pure_max()).abs() >= 1e-9 {
        fails.push(format!("constructed optimum: {v_opt}"));
    }
    let p_printed = XyzParams::new(1.1458, -0.2935, 3.3820, -1.2747, 0.0);
    let v_printed = abs_delta_analytic(&p_printed, 1.0, 1.0);
    if (v_printed - pure_max()).abs() >= 1e-3 {
        fails.push(format!("printed optimum: {v_printed}"));
    }
    let pass = fails.is_empty();
    println!(
        "criterion 4: {} - disordered models at 1/32 (1e-12), constructed pure optimum {v_opt:.12} vs 1/(12 sqrt 3) (1e-9), printed Hamiltonian within 1e-3{}",
        if pass { "PASS" } else { "FAIL" },
        if fails.is_empty() { String::new() } else { format!("; failures: {fails:?}") }
    );
    assert!(pass);
}

#[test]
fn criterion_05_optimizer_reaches_extremes_and_is_monotone() {
    let start = Instant::now();
    let budget = 200_000;
    let r0 = maximize_delta(0.0, None, 2024, budget);
    let r1 = maximize_delta(1.0, None, 2024, budget);
    let again = maximize_delta(0.0, None, 2024, budget);
    let deterministic =
        r0.abs_delta.to_bits() == again.abs_delta.to_bits() && r0.params == again.params;
    let mut grid = Vec::new();
    for k in 0..=10 {
        let eps = k as f64 / 10.0;
        grid.push(maximize_delta(eps, None, 2024, 60_000).abs_delta);
    }
    let monotone = grid.windows(2).all(|w| w[1] >= w[0] - 1e-5);
    let elapsed = start.elapsed().as_secs_f64();
    let ok0 = (r0.abs_delta - DISORDERED_MAX).abs() < 1e-5 && r0.evaluations <= budget + 16;
    let ok1 = (r1.abs_delta - pure_max()).abs() < 1e-5 && r1.evaluations <= budget + 16;
    let pass = ok0 && ok1 && deterministic && monotone && elapsed < 60.0;
    println!(
        "criterion 5: {} - eps=0: {:.8} (target {:.8}), eps=1: {:.8} (target {:.8}), deterministic {}, 11-point grid nondecreasing {} {:?}, runtime {:.1}s (< 60s)",
        if pass { "PASS" } else { "FAIL" },
        r0.abs_delta,
        DISORDERED_MAX,
        r1.abs_delta,
        pure_max(),
        deterministic,
        monotone,
        grid.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(),
        elapsed
    );
    assert!(pass);
}

#[test]
fn criterion_06_failure_manifolds() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst: f64 = 0.0;
    let mut all_fired = true;
    let sample = |p: XyzParams, tau: f64, eps: f64, worst: &mut f64, fired: &mut bool| {
        let rep = failure_check(&p, tau, eps);
        *worst = worst.max(rep.abs_delta);
        *fired &= rep.is_singular;
    };
    for _ in 0..100 {
        // Ising
        sample(
            XyzParams::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                0.0,
                0.0,
                rng.gen_range(-5.0..5.0),
            ),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..1.0),
            &mut worst,
            &mut all_fired,
        );
        // no field
        sample(
            XyzParams::new(
                0.0,
                0.0,
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..1.0),
            &mut worst,
            &mut all_fired,
        );
        // zero anisotropies: b1 = b2, jx = jy
        let (b, j) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        sample(
            XyzParams::new(b, b, j, j, rng.gen_range(-5.0..5.0)),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..1.0),
            &mut worst,
            &mut all_fired,
        );
        // disordered assistant with Jz tau = n pi
        let jz = rng.gen_range(0.5..4.0);
        let n = rng.gen_range(1..8) as f64;
        sample(
            XyzParams::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                jz,
            ),
            n * PI / jz,
            0.0,
            &mut worst,
            &mut all_fired,
        );
        // two of {jx, jy, b1, b2} zero at eps = 0
        sample(
            XyzParams::new(
                rng.gen_range(-5.0..5.0),
                0.0,
                0.0,
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ),
            rng.gen_range(0.1..10.0),
            0.0,
            &mut worst,
            &mut all_fired,
        );
    }
    let pass = worst < 1e-10 && all_fired;
    println!(
        "criterion 6: {} - 5 x 100 manifold samples, worst |Delta| {worst:.3e} (< 1e-10), predicates always fired: {all_fired}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_07_trotter_fidelity_and_orders() {
    let p = model_c_plus();
    let exact = propagator_analytic(&p, FRAC_PI_4).u;
    let f = gate_fidelity(&exact, &trotter_propagator(&p, FRAC_PI_4, 2)).unwrap();
    let fid_ok = (f.squared() - 0.9958).abs() < 5e-4;

    let h = hamiltonian_matrix(&p);
    let mut local = Vec::new();
    for dt in [0.2, 0.1, 0.05, 0.025] {
        let diff = trotter_segment(&p, dt).sub(&expm_hermitian(&h, dt).unwrap());
        local.push(
            diff.entries()
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt(),
        );
    }
    let local_slopes: Vec<f64> = local.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let local_ok = local_slopes.iter().all(|s| (s - 3.0).abs() < 0.3);

    let mut global = Vec::new();
    for m in [2u32, 4, 8, 16] {
        let diff = trotter_propagator(&p, FRAC_PI_4, m).sub(&exact);
        global.push(
            diff.entries()
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt(),
        );
    }
    let global_slopes: Vec<f64> = global.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let global_ok = global_slopes.iter().all(|s| (s - 2.0).abs() < 0.2);

    let pass = fid_ok && local_ok && global_ok;
    println!(
        "criterion 7: {} - m=2 squared overlap {:.6} (0.9958 +- 5e-4; |overlap| = {:.6}), local-order slopes {:?} (3.0 +- 0.3), global-order slopes {:?} (2.0 +- 0.2)",
        if pass { "PASS" } else { "FAIL" },
        f.squared(),
        f.magnitude,
        local_slopes.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
        global_slopes.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
    );
    assert!(pass);
}

#[test]
fn criterion_08_exact_decomposition_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let tau = rng.gen_range(0.05..6.0);
        let seq = exact_decomposition_sequence(&p, tau, DEFAULT_J12_HZ);
        let compiled = compile_unitary(&seq).unwrap();
        let f = gate_fidelity(&propagator_analytic(&p, tau).u, &compiled).unwrap();
        worst = worst.min(f.magnitude);
    }
    let pass = worst > 1.0 - 1e-9;
    println!(
        "criterion 8 (fidelity): {} - 100 random draws, worst phase-insensitive fidelity {worst:.12} (1 within 1e-9)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_08_model_c_timing_constants() {
    // The compile convention is pinned by the short-period sequence, whose
    // printed delay constants reproduce the segment product bit-exactly.
    // Under that same convention the basis-change delays that actually attain
    // fidelity 1 are exactly half of the printed tau_1 = 1/(4 J12),
    // tau_2 = 3/(4 J12); the remaining constants match exactly. This check
    // asserts the printed values and therefore fails, documenting the
    // factor-of-two inconsistency rather than hiding it.
    let j12 = DEFAULT_J12_HZ;
    let t = exact_decomposition_timing(&model_c_plus(), FRAC_PI_4, j12);
    let checks = [
        ("tau1 * J12", t.tau1 * j12, 0.25),
        ("tau2 * J12", t.tau2 * j12, 0.75),
        ("tau3 * J12", t.tau3 * j12, 0.25),
        ("beta1", t.beta1, PI * (2.0 + 2f64.sqrt()) / 4.0),
        ("beta2", t.beta2, PI * (2.0 - 2f64.sqrt()) / 4.0),
    ];
    let mut fails = Vec::new();
    for (name, got, want) in checks {
        if (got - want).abs() > 1e-12 {
            fails.push(format!("{name}: emitted {got}, printed constant {want}"));
        }
    }
    let pass = fails.is_empty();
    println!(
        "criterion 8 (model-c constants): {} - tau3/beta1/beta2 match exactly; {}",
        if pass { "PASS" } else { "FAIL" },
        if fails.is_empty() {
            "tau1/tau2 also match".to_string()
        } else {
            format!(
                "deviations: {fails:?} (the emitted delays are the ones that reach fidelity 1; see the fidelity criterion)"
            )
        }
    );
    assert!(pass, "{fails:?}");
}

#[test]
fn criterion_09_noiseless_end_to_end() {
    let base = TomographyConfig {
        params: model_c_plus(),
        tau: FRAC_PI_4,
        epsilon: 0.0,
        method: EvolutionMethod::Analytic,
        noise: NoiseSpec::none(),
    };
    let analytic = sweep_bloch_grid(&base, &[1.0, 0.5]).unwrap();
    let worst_distance = analytic
        .records
        .iter()
        .map(|r| r.distance)
        .fold(0.0, f64::max);
    let mut trotter_cfg = base;
    trotter_cfg.method = EvolutionMethod::Trotter(2);
    let trotter = sweep_bloch_grid(&trotter_cfg, &[1.0, 0.5]).unwrap();
    let min_fav_full = trotter
        .aggregates
        .iter()
        .map(|a| a.fidelity_avg)
        .fold(1.0, f64::min);
    let min_fav_half = trotter
        .aggregates
        .iter()
        .map(|a| a.fidelity_avg_half_phi)
        .fold(1.0, f64::min);
    let pass = worst_distance < 1e-8 && min_fav_full >= 0.99 && min_fav_half >= 0.99;
    println!(
        "criterion 9: {} - analytic worst distance {worst_distance:.3e} (< 1e-8); Trotter(2) F_av full-grid {min_fav_full:.6}, 13-phi grid {min_fav_half:.6} (>= 0.99)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

struct NoisyMc {
    mean_distance: f64,
    violations: usize,
    violations_physical: usize,
    physical: usize,
    samples: usize,
}

fn noisy_monte_carlo(r: f64, sigma: f64, seed: u64) -> NoisyMc {
    let p = model_c_plus();
    let u = propagator_analytic(&p, FRAC_PI_4);
    let tm = transfer_matrix(&AssistantState::new(0.0), &u);
    let mut dist_sum = 0.0;
    let mut violations = 0;
    let mut violations_physical = 0;
    let mut physical = 0;
    let mut samples = 0;
    let mut index = 0u64;
    for ti in 0..9 {
        let theta = ti as f64 * PI / 8.0;
        for pj in 0..13 {
            let phi = pj as f64 * PI / 12.0;
            let state = BlochState::new(r, theta.min(PI), phi);
            let rho0 = prepare_direct(&state, 0.0);
            let s_in = state.bloch_vector();
            for _ in 0..90 {
                let noise = NoiseSpec {
                    kind: NoiseKind::Gaussian(sigma),
                    seed: seed.wrapping_add(index),
                };
                index += 1;
                let probs = measure(&rho0, &u.u, &noise);
                let rec = reconstruct(&probs, &tm).unwrap();
                let d = bloch_distance(&s_in, &rec.s);
                let f = bloch_fidelity(&s_in, &rec.s);
                dist_sum += d;
                samples += 1;
                let upper = (1.0 - f * f).max(0.0).sqrt();
                let violated = !(1.0 - f <= d + 1e-12 && d <= upper + 1e-12);
                if violated {
                    violations += 1;
                }
                let norm = rec.s.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm <= 1.0 {
                    physical += 1;
                    if violated {
                        violations_physical += 1;
                    }
                }
            }
        }
    }
    NoisyMc {
        mean_distance: dist_sum / samples as f64,
        violations,
        violations_physical,
        physical,
        samples,
    }
}

#[test]
fn criterion_10_noisy_mean_distance() {
    // Faithful run at the stated sigma = 0.05. The spec's own measure()
    // contract predicts mean distance ~ E_quad * sigma = 2 sqrt(3) * 0.05 =
    // 0.17, which is what we measure; the quoted targets 0.04 / 0.03
    // correspond to the relative reading of "Delta P ~ 5%" (sigma ~ 0.0125),
    // also printed below for reference.
    let mc1 = noisy_monte_carlo(1.0, 0.05, 9001);
    let mc05 = noisy_monte_carlo(0.5, 0.05, 9002);
    let window1 = (0.7 * 0.04, 1.3 * 0.04);
    let window05 = (0.7 * 0.03, 1.3 * 0.03);
    let ok1 = mc1.mean_distance >= window1.0 && mc1.mean_distance <= window1.1;
    let ok05 = mc05.mean_distance >= window05.0 && mc05.mean_distance <= window05.1;
    let ref1 = noisy_monte_carlo(1.0, 0.0125, 9003);
    let ref05 = noisy_monte_carlo(0.5, 0.0125, 9004);
    let pass = ok1 && ok05;
    println!(
        "criterion 10 (mean distance): {} - sigma=0.05: D_av(r=1) = {:.4} vs window [{:.3}, {:.3}], D_av(r=1/2) = {:.4} vs [{:.3}, {:.3}] over {} samples each; for reference sigma=0.0125 gives {:.4} / {:.4}",
        if pass { "PASS" } else { "FAIL" },
        mc1.mean_distance,
        window1.0,
        window1.1,
        mc05.mean_distance,
        window05.0,
        window05.1,
        mc1.samples,
        ref1.mean_distance,
        ref05.mean_distance,
    );
    assert!(
        pass,
        "mean distances {:.4} / {:.4} outside the +-30% windows of 0.04 / 0.03",
        mc1.mean_distance, mc05.mean_distance
    );
}

#[test]
fn criterion_10_fidelity_distance_bound() {
    // 1 - F <= D <= sqrt(1 - F^2) per sample. The upper bound provably fails
    // for radially-outward nonphysical reconstructions (the overlap fidelity
    // is not the Uhlmann fidelity there), so this faithful check documents
    // the violation rate; every violation sits outside the Bloch ball.
    let mc1 = noisy_monte_carlo(1.0, 0.05, 9001);
    let mc05 = noisy_monte_carlo(0.5, 0.05, 9002);
    let pass = mc1.violations == 0 && mc05.violations == 0;
    println!(
        "criterion 10 (F/D bound): {} - r=1: {}/{} samples violate ({} among the {} physical ones); r=1/2: {}/{} violate ({} physical)",
        if pass { "PASS" } else { "FAIL" },
        mc1.violations,
        mc1.samples,
        mc1.violations_physical,
        mc1.physical,
        mc05.violations,
        mc05.samples,
        mc05.violations_physical,
    );
    assert!(
        pass,
        "bound violated by {} of {} samples at r=1 (all nonphysical reconstructions)",
        mc1.violations, mc1.samples
    );
}

/// Indices of strict-or-plateau local extrema.
fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len() - 1)
        .filter(|&i| {
            values[i].is_finite()
                && values[i] <= values[i - 1]
                && values[i] <= values[i + 1]
                && (values[i] < values[i - 1] || values[i] < values[i + 1])
        })
        .collect()
}

fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len() - 1)
        .filter(|&i| {
            values[i] >= values[i - 1]
                && values[i] >= values[i + 1]
                && (values[i] > values[i - 1] || values[i] > values[i + 1])
        })
        .collect()
}

fn curve_offsets(epsilon: f64) -> Vec<usize> {
    let grid: Vec<f64> = (1..=500).map(|i| i as f64 * TAU / 500.0).collect();
    let curve = delta_error_curve(&model_c_plus(), epsilon, &grid);
    let e: Vec<f64> = curve.iter().map(|c| c.error_coeff).collect();
    let d: Vec<f64> = curve.iter().map(|c| c.abs_delta).collect();
    let maxima = local_maxima(&d);
    local_minima(&e)
        .into_iter()
        .map(|i| maxima.iter().map(|&j| i.abs_diff(j)).min().unwrap())
        .collect()
}

#[test]
fn criterion_11_error_minima_near_delta_maxima() {
    // Clause A: every local minimum of E within one grid step of a |Delta|
    // maximum. Clause B: at least one pair not exactly coincident. At
    // epsilon = 0 the model-(c) symmetry pins both extrema to the same tau
    // (A holds, B fails); at epsilon > 0 the minima move 2-4 steps away
    // (B holds, A fails). No configuration satisfies both; the measured
    // offsets are printed for each.
    let offsets0 = curve_offsets(0.0);
    let offsets03 = curve_offsets(0.3);
    let eval = |offsets: &[usize]| {
        let a = !offsets.is_empty() && offsets.iter().all(|&d| d <= 1);
        let b = offsets.iter().any(|&d| d >= 1);
        (a, b)
    };
    let (a0, b0) = eval(&offsets0);
    let (a3, b3) = eval(&offsets03);
    let pass = (a0 && b0) || (a3 && b3);
    println!(
        "criterion 11 (curve): {} - eps=0 offsets {offsets0:?} (within-one-step {a0}, non-coincident-pair {b0}); eps=0.3 offsets {offsets03:?} (within-one-step {a3}, non-coincident-pair {b3})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "no configuration satisfies both clauses: eps=0 -> ({a0}, {b0}), eps=0.3 -> ({a3}, {b3})"
    );
}

#[test]
fn criterion_11_finite_difference_matches_cofactor_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 200 {
        let p = random_params(&mut rng);
        let tau = rng.gen_range(0.1..6.0);
        let eps = rng.gen_range(0.0..1.0);
        let u = propagator_analytic(&p, tau);
        let tm = transfer_matrix(&AssistantState::new(eps), &u);
        if tm.abs_delta <= 1e-3 {
            continue;
        }
        let ec = error_coefficients(&tm).unwrap();
        let s = [
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ];
        let state = bloch_state_from(s);
        let probs = measure(&prepare_direct(&state, eps), &u.u, &NoiseSpec::none());
        let base = reconstruct(&probs, &tm).unwrap();
        let h = 1e-6;
        let shifted = JointProbabilities::from_array(probs.as_array().map(|v| v + h));
        let rec = reconstruct(&shifted, &tm).unwrap();
        for (nu, want) in [ec.ex, ec.ey, ec.ez].iter().enumerate() {
            worst = worst.max(((rec.s[nu] - base.s[nu]) / h - want).abs());
        }
        tested += 1;
    }
    let pass = worst < 1e-4;
    println!(
        "criterion 11 (FD check): {} - equal-shift finite difference vs cofactor formula, worst deviation {worst:.3e} (< 1e-4, 200 draws)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

fn bloch_state_from(s: [f64; 3]) -> BlochState {
    let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < 1e-15 {
        return BlochState::new(0.0, 0.0, 0.0);
    }
    let theta = (s[2] / r).acos();
    let phi = s[1].atan2(s[0]);
    BlochState::new(r, theta, phi)
}

#[test]
fn criterion_12_concurrence() {
    // product states
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let mut worst_product: f64 = 0.0;
    for _ in 0..50 {
        let st = BlochState::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..TAU),
        );
        let rho = prepare_direct(&st, rng.gen_range(0.0..1.0));
        worst_product = worst_product.max(concurrence(&rho));
    }
    // Bell state
    let mut bell = CMat::zeros(4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        bell.set(i, j, C64::new(0.5, 0.0));
    }
    let c_bell = concurrence(&DensityMatrix::new(bell).unwrap());
    // mixed-state trajectory
    let p = model_c_plus();
    let st = BlochState::new(0.8, FRAC_PI_4, PI / 6.0);
    let rho0 = prepare_direct(&st, 0.0);
    let mut max_c: f64 = 0.0;
    let mut witness = None;
    for k in 0..=500 {
        let tau = k as f64 * TAU / 500.0;
        if tau == 0.0 {
            continue;
        }
        let u = propagator_analytic(&p, tau);
        let c = concurrence(&evolve_state(&rho0, &u.u));
        max_c = max_c.max(c);
        if witness.is_none() && c < 0.05 {
            let cfg = TomographyConfig {
                params: p,
                tau,
                epsilon: 0.0,
                method: EvolutionMethod::Analytic,
                noise: NoiseSpec::none(),
            };
            if let Ok(rec) = soqt::experiment::run_tomography(&st, &cfg) {
                if rec.distance < 1e-8 {
                    witness = Some((tau, c, rec.distance));
                }
            }
        }
    }
    let pass =
        worst_product < 1e-10 && (c_bell - 1.0).abs() < 1e-12 && max_c <= 0.2 && witness.is_some();
    println!(
        "criterion 12: {} - product-state C max {worst_product:.3e} (< 1e-10), Bell C = {c_bell:.15} (1 within 1e-12), mixed-state max_tau C = {max_c:.4} (<= 0.2), witness tau with C < 0.05 and exact reconstruction: {witness:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn propagator_components_commute_on_random_draws() {
    // supporting invariant used by several criteria: the three commuting
    // factors reassemble the propagator
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let tau = rng.gen_range(0.05..6.0);
        let (u_zz, u_0, u_2) = propagator_components(&p, tau);
        let prod = u_zz.mul(&u_0).mul(&u_2);
        assert!(prod.max_abs_diff(&propagator_analytic(&p, tau).u) < 1e-12);
    }
}
