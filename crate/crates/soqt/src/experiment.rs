//! End-to-end simulated experiment: state preparation, coupling evolution
//! (analytic, short-period expansion, or exact decomposition), measurement
//! with configurable noise, reconstruction, and the derived metrics
//! (fidelity, trace distance, error curves, concurrence).

use crate::evolve::propagator_analytic;
use crate::model::XyzParams;
use crate::pulsesim::{
    self, compile, exact_decomposition_sequence, trotter_propagator, NmrParams, PulseEvent,
    PulseSequence, PulseTarget, RotationAxis,
};
use crate::qmat::{self, kron, CMat, DensityMatrix, C64};
use crate::seed_mix;
use crate::transfer::{
    self, error_amplification, probabilities_of_state, reconstruct, transfer_matrix,
    AssistantState, JointProbabilities, TransferError, TransferMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

/// Proton-carbon scalar coupling of the chloroform reference system, Hz.
/// Compiled sequences do not depend on the value (delays scale as 1/J12).
pub const DEFAULT_J12_HZ: f64 = 214.95;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// A qubit state in spherical Bloch coordinates.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BlochState {
    r: f64,
    theta: f64,
    phi: f64,
}

impl BlochState {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&r),
            "radius must be in [0, 1], got {r}"
        );
        assert!(
            (0.0..=PI).contains(&theta),
            "polar angle must be in [0, pi]"
        );
        BlochState {
            r,
            theta,
            phi: phi.rem_euclid(TAU),
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        [
            self.r * self.theta.sin() * self.phi.cos(),
            self.r * self.theta.sin() * self.phi.sin(),
            self.r * self.theta.cos(),
        ]
    }

    /// rho = 1/2 (1 + s . sigma).
    pub fn density(&self) -> DensityMatrix {
        let s = self.bloch_vector();
        let m = CMat::identity(2)
            .scale(C64::new(0.5, 0.0))
            .add(&qmat::spin_x().scale(C64::new(s[0], 0.0)))
            .add(&qmat::spin_y().scale(C64::new(s[1], 0.0)))
            .add(&qmat::spin_z().scale(C64::new(s[2], 0.0)));
        DensityMatrix::new_unchecked(m)
    }
}

/// Measurement-noise model. All randomness derives from the stored seed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum NoiseKind {
    None,
    /// i.i.d. additive N(0, sigma) on each probability, then the four values
    /// are rescaled so they sum to one (the normalization the experiment
    /// imposes).
    Gaussian(f64),
    /// Multinomial sampling with the given number of shots; returns the
    /// empirical frequencies.
    Shots(u64),
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            kind: NoiseKind::None,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseSpec { seed, ..self }
    }
}

fn gaussian_sample(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Conjugate a state by a (unitary) evolution operator.
pub fn evolve_state(rho: &DensityMatrix, u: &CMat) -> DensityMatrix {
    DensityMatrix::new_unchecked(u.conjugate(rho.mat()))
}

/// rho (x) (1/2 + epsilon S_z).
pub fn prepare_direct(state: &BlochState, epsilon: f64) -> DensityMatrix {
    let xi = AssistantState::new(epsilon).matrix();
    DensityMatrix::new_unchecked(kron(state.density().mat(), &xi).expect("2x2"))
}

/// Pulse-sequence preparation from the reference deviation state
/// 1/4 + 1/2 Sz1 (unit polarization on the system, none on the assistant):
/// [arccos r]_y1 [pi/2]_y2 - gradient - [theta]_(phi+pi/2)1.
pub fn prepare_by_sequence(state: &BlochState) -> DensityMatrix {
    let seq = PulseSequence {
        events: vec![
            PulseEvent::Rotation {
                target: PulseTarget::System,
                axis: RotationAxis::y(),
                angle: state.r().acos(),
            },
            PulseEvent::Rotation {
                target: PulseTarget::Assistant,
                axis: RotationAxis::y(),
                angle: FRAC_PI_2,
            },
            PulseEvent::Gradient,
            PulseEvent::Rotation {
                target: PulseTarget::System,
                axis: RotationAxis::Xy(state.phi() + FRAC_PI_2),
                angle: state.theta(),
            },
        ],
        nmr: NmrParams {
            omega1: 0.0,
            omega2: 0.0,
            j12_hz: DEFAULT_J12_HZ,
        },
    };
    let reference = CMat::diag(&[
        C64::new(0.5, 0.0),
        C64::new(0.5, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ]);
    DensityMatrix::new_unchecked(compile(&seq).apply(&reference))
}

/// Evolve, project, and apply the configured noise. `u` is the realized
/// coupling evolution (analytic or approximate).
pub fn measure(rho0: &DensityMatrix, u: &CMat, noise: &NoiseSpec) -> JointProbabilities {
    let exact = probabilities_of_state(&u.conjugate(rho0.mat()));
    match noise.kind {
        NoiseKind::None => exact,
        NoiseKind::Gaussian(sigma) => {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            let mut p = exact.as_array();
            for v in &mut p {
                *v += sigma * gaussian_sample(&mut rng);
            }
            let sum: f64 = p.iter().sum();
            for v in &mut p {
                *v /= sum;
            }
            JointProbabilities::from_array(p)
        }
        NoiseKind::Shots(n) => {
            assert!(n >= 1);
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            let clamped: Vec<f64> = exact.as_array().iter().map(|v| v.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            let mut cdf = [0.0; 4];
            let mut acc = 0.0;
            for (i, v) in clamped.iter().enumerate() {
                acc += v / total;
                cdf[i] = acc;
            }
            cdf[3] = 1.0;
            let mut counts = [0u64; 4];
            for _ in 0..n {
                let x: f64 = rng.gen();
                let k = cdf.iter().position(|&c| x <= c).unwrap_or(3);
                counts[k] += 1;
            }
            // frequencies summing to exactly one
            let mut freq = counts.map(|c| c as f64 / n as f64);
            freq[3] = 1.0 - freq[0] - freq[1] - freq[2];
            JointProbabilities::from_array(freq)
        }
    }
}

/// Simulated readout: rotate both spins so the x-projectors become
/// populations, dephase, and report the spectral line amplitudes together
/// with the populations recovered from them by least squares.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReadoutAmplitudes {
    pub proton: [f64; 2],
    pub carbon: [f64; 2],
    /// Populations solved from the four amplitudes plus normalization.
    pub populations: [f64; 4],
}

pub fn readout_amplitudes(rho_tau: &DensityMatrix) -> ReadoutAmplitudes {
    let seq = PulseSequence {
        events: vec![
            PulseEvent::Rotation {
                target: PulseTarget::Both,
                axis: RotationAxis::minus_y(),
                angle: FRAC_PI_2,
            },
            PulseEvent::Gradient,
        ],
        nmr: NmrParams {
            omega1: 0.0,
            omega2: 0.0,
            j12_hz: DEFAULT_J12_HZ,
        },
    };
    let after = compile(&seq).apply(rho_tau.mat());
    let n: Vec<f64> = (0..4).map(|i| after.get(i, i).re).collect();
    // line amplitudes are population differences across each spin's
    // transitions: proton lines split by the assistant state and vice versa
    let proton = [n[0] - n[2], n[1] - n[3]];
    let carbon = [n[0] - n[1], n[2] - n[3]];
    let populations = populations_from_amplitudes(&proton, &carbon);
    ReadoutAmplitudes {
        proton,
        carbon,
        populations,
    }
}

/// Least-squares solve of the overdetermined system {four amplitude
/// differences, sum = 1} for the populations.
pub fn populations_from_amplitudes(proton: &[f64; 2], carbon: &[f64; 2]) -> [f64; 4] {
    const ROWS: [[f64; 4]; 5] = [
        [1.0, 0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0, -1.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
        [1.0, 1.0, 1.0, 1.0],
    ];
    let b = [proton[0], proton[1], carbon[0], carbon[1], 1.0];
    // normal equations A^T A x = A^T b (A has full column rank)
    let ata = CMat::from_fn(4, |i, j| {
        C64::new(ROWS.iter().map(|row| row[i] * row[j]).sum::<f64>(), 0.0)
    });
    let atb: Vec<C64> = (0..4)
        .map(|i| {
            C64::new(
                ROWS.iter()
                    .zip(&b)
                    .map(|(row, bv)| row[i] * bv)
                    .sum::<f64>(),
                0.0,
            )
        })
        .collect();
    let x = ata.solve(&atb).expect("normal equations are nonsingular");
    [x[0].re, x[1].re, x[2].re, x[3].re]
}

/// How the coupling propagator is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvolutionMethod {
    Analytic,
    /// Short-period expansion with the given segment count.
    Trotter(u32),
    ExactDecomposition,
}

#[derive(Clone, Copy, Debug)]
pub struct TomographyConfig {
    pub params: XyzParams,
    pub tau: f64,
    pub epsilon: f64,
    pub method: EvolutionMethod,
    pub noise: NoiseSpec,
}

impl TomographyConfig {
    /// The realized evolution operator for this configuration.
    pub fn evolution(&self) -> CMat {
        match self.method {
            EvolutionMethod::Analytic => propagator_analytic(&self.params, self.tau).u,
            EvolutionMethod::Trotter(m) => trotter_propagator(&self.params, self.tau, m),
            EvolutionMethod::ExactDecomposition => {
                let seq = exact_decomposition_sequence(&self.params, self.tau, DEFAULT_J12_HZ);
                pulsesim::compile_unitary(&seq).expect("sequence has no gradients")
            }
        }
    }

    /// The designed transfer matrix (always analytic: the map is inverted
    /// with the theoretical M even when the evolution is approximate,
    /// exactly as the measurement scheme operates).
    pub fn designed_transfer(&self) -> TransferMatrix {
        let u = propagator_analytic(&self.params, self.tau);
        transfer_matrix(&AssistantState::new(self.epsilon), &u)
    }
}

/// One tomography run: inputs, reconstruction, and metrics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub s_in: [f64; 3],
    pub s_out: [f64; 3],
    pub non_physical: bool,
    pub fidelity: f64,
    pub distance: f64,
}

/// Overlap fidelity Tr(rho_in rho_out)/sqrt(Tr rho_in^2 Tr rho_out^2) in
/// Bloch form.
pub fn bloch_fidelity(s_in: &[f64; 3], s_out: &[f64; 3]) -> f64 {
    let dot: f64 = s_in.iter().zip(s_out).map(|(a, b)| a * b).sum();
    let n_in: f64 = s_in.iter().map(|v| v * v).sum();
    let n_out: f64 = s_out.iter().map(|v| v * v).sum();
    (1.0 + dot) / ((1.0 + n_in) * (1.0 + n_out)).sqrt()
}

/// Trace distance |s_out - s_in| / 2.
pub fn bloch_distance(s_in: &[f64; 3], s_out: &[f64; 3]) -> f64 {
    0.5 * s_in
        .iter()
        .zip(s_out)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Prepare, evolve with the configured realization, measure, reconstruct
/// with the designed transfer matrix, and score.
pub fn run_tomography(
    state: &BlochState,
    config: &TomographyConfig,
) -> Result<SweepRecord, ExperimentError> {
    let tm = config.designed_transfer();
    if tm.abs_delta <= transfer::SINGULARITY_THRESHOLD {
        return Err(TransferError::SingularTransfer {
            abs_delta: tm.abs_delta,
        }
        .into());
    }
    let u = config.evolution();
    run_with(state, config, &tm, &u)
}

/// Same as `run_tomography` with the transfer matrix and evolution reused
/// across calls (grid sweeps).
fn run_with(
    state: &BlochState,
    config: &TomographyConfig,
    tm: &TransferMatrix,
    u: &CMat,
) -> Result<SweepRecord, ExperimentError> {
    let rho0 = prepare_direct(state, config.epsilon);
    let probs = measure(&rho0, u, &config.noise);
    let rec = reconstruct(&probs, tm)?;
    let s_in = state.bloch_vector();
    Ok(SweepRecord {
        r: state.r(),
        theta: state.theta(),
        phi: state.phi(),
        s_in,
        s_out: rec.s,
        non_physical: rec.non_physical,
        fidelity: bloch_fidelity(&s_in, &rec.s),
        distance: bloch_distance(&s_in, &rec.s),
    })
}

/// The baseline of three incompatible measurements: the Bloch vector read
/// directly from expectation values of the Pauli operators.
pub fn conventional_tomography(state: &BlochState) -> [f64; 3] {
    let rho = state.density();
    let expect = |op: &CMat| op.mul(rho.mat()).trace().re;
    [
        expect(&qmat::sigma_x()),
        expect(&qmat::sigma_y()),
        expect(&qmat::sigma_z()),
    ]
}

/// Grid aggregate for one radius, over the full phi range and over the
/// 13-point phi <= pi subrange.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub r: f64,
    pub fidelity_avg: f64,
    pub distance_avg: f64,
    pub fidelity_avg_half_phi: f64,
    pub distance_avg_half_phi: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<SweepAggregate>,
}

pub const THETA_STEPS: usize = 9; // 0 ..= pi, step pi/8
pub const PHI_STEPS: usize = 25; // 0 ..= 2 pi, step pi/12

/// Bloch-sphere grid sweep: theta from 0 to pi in steps of pi/8, phi from 0
/// to 2 pi in steps of pi/12 (inclusive), per radius. Per-point noise seeds
/// derive from the record index, so results are independent of evaluation
/// order.
pub fn sweep_bloch_grid(
    config: &TomographyConfig,
    r_values: &[f64],
) -> Result<SweepResult, ExperimentError> {
    let tm = config.designed_transfer();
    if tm.abs_delta <= transfer::SINGULARITY_THRESHOLD {
        return Err(TransferError::SingularTransfer {
            abs_delta: tm.abs_delta,
        }
        .into());
    }
    let u = config.evolution();
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    let mut index = 0u64;
    for &r in r_values {
        let (mut f_sum, mut d_sum, mut n) = (0.0, 0.0, 0usize);
        let (mut f_half, mut d_half, mut n_half) = (0.0, 0.0, 0usize);
        for ti in 0..THETA_STEPS {
            let theta = ti as f64 * PI / 8.0;
            for pj in 0..PHI_STEPS {
                let phi = pj as f64 * PI / 12.0;
                let state = BlochState::new(r, theta.min(PI), phi);
                let mut cfg = *config;
                cfg.noise = config.noise.with_seed(seed_mix(config.noise.seed, index));
                let mut rec = run_with(&state, &cfg, &tm, &u)?;
                // keep the grid label (phi = 2 pi wraps to 0 in the state)
                rec.phi = phi;
                f_sum += rec.fidelity;
                d_sum += rec.distance;
                n += 1;
                if pj <= 12 {
                    f_half += rec.fidelity;
                    d_half += rec.distance;
                    n_half += 1;
                }
                records.push(rec);
                index += 1;
            }
        }
        aggregates.push(SweepAggregate {
            r,
            fidelity_avg: f_sum / n as f64,
            distance_avg: d_sum / n as f64,
            fidelity_avg_half_phi: f_half / n_half as f64,
            distance_avg_half_phi: d_half / n_half as f64,
        });
    }
    Ok(SweepResult {
        records,
        aggregates,
    })
}

/// Wootters concurrence of a two-qubit state, via the Hermitian form:
/// the chi_k are the eigenvalues of sqrt(sqrt(rho) rho~ sqrt(rho)) with
/// rho~ = (sigma_y x sigma_y) rho* (sigma_y x sigma_y).
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    assert_eq!(rho.dim(), 4);
    let yy = kron(&qmat::sigma_y(), &qmat::sigma_y()).expect("2x2");
    let spin_flipped = yy.mul(&rho.mat().conj()).mul(&yy);
    let (vals, vecs) = qmat::eigh(rho.mat()).expect("density matrix is Hermitian");
    // sqrt(rho), clamping tiny negative eigenvalues
    let mut sqrt_rho = CMat::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += vecs.get(i, k) * vals[k].max(0.0).sqrt() * vecs.get(j, k).conj();
            }
            sqrt_rho.set(i, j, acc);
        }
    }
    let m = sqrt_rho.mul(&spin_flipped).mul(&sqrt_rho);
    let (mvals, _) = qmat::eigh(&m).expect("Hermitian by construction");
    let mut chi: Vec<f64> = mvals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    chi.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (chi[0] - chi[1] - chi[2] - chi[3]).max(0.0)
}

/// One row of the error/entanglement curve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub abs_delta: f64,
    /// Per-probability RMS amplification; infinite at singular points.
    pub error_coeff: f64,
    /// error_coeff * abs_delta.
    pub product: f64,
    /// Concurrence of the four tracked initial states after the evolution.
    pub concurrence: [f64; 4],
}

/// The four initial states tracked by the entanglement curve: three pure
/// axes states and one partially mixed general state.
pub fn curve_states() -> [BlochState; 4] {
    [
        BlochState::new(1.0, FRAC_PI_2, 0.0),
        BlochState::new(1.0, FRAC_PI_2, FRAC_PI_2),
        BlochState::new(1.0, 0.0, 0.0),
        BlochState::new(0.8, PI / 4.0, PI / 6.0),
    ]
}

/// Sweep tau: |Delta|, the error amplification (infinity below the
/// singularity threshold), their product, and the concurrence trajectories.
pub fn delta_error_curve(params: &XyzParams, epsilon: f64, tau_grid: &[f64]) -> Vec<CurvePoint> {
    let states = curve_states();
    let xi = AssistantState::new(epsilon);
    tau_grid
        .iter()
        .map(|&tau| {
            let u = propagator_analytic(params, tau);
            let tm = transfer_matrix(&xi, &u);
            let error_coeff = if tm.abs_delta <= transfer::SINGULARITY_THRESHOLD {
                f64::INFINITY
            } else {
                error_amplification(&tm).expect("nonsingular").e
            };
            let c = states.map(|st| {
                let rho0 = prepare_direct(&st, epsilon);
                concurrence(&DensityMatrix::new_unchecked(u.u.conjugate(rho0.mat())))
            });
            CurvePoint {
                tau,
                abs_delta: tm.abs_delta,
                error_coeff,
                product: if error_coeff.is_finite() {
                    error_coeff * tm.abs_delta
                } else {
                    f64::INFINITY
                },
                concurrence: c,
            }
        })
        .collect()
}
