//! NMR pulse-sequence simulation: rotations, delays under the natural
//! two-spin Hamiltonian, gradient dephasing, and the two realizations of the
//! coupling propagator (short-period expansion and exact decomposition).
//!
//! Conventions: a rotation event [theta]_nu applies exp(-i theta n.S) (right
//! handed); a delay of t seconds evolves under
//! H = omega1 Sz1 + omega2 Sz2 + 2 pi J12 Sz1 Sz2 with J12 in Hz.

use crate::model::{self, XyzParams};
use crate::qmat::{kron, CMat, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("sequence cannot realize this Hamiltonian: {0}")]
    UnsupportedModel(String),
    #[error("input is not unitary (deviation {deviation:.3e})")]
    NonUnitaryInput { deviation: f64 },
    #[error("sequence contains a gradient but a strictly unitary channel was requested")]
    GradientInUnitaryContext,
}

/// Rotating-frame offsets (rad/s) and the scalar coupling (Hz).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NmrParams {
    pub omega1: f64,
    pub omega2: f64,
    #[serde(rename = "j12Hz")]
    pub j12_hz: f64,
}

/// Rotation axis: a unit vector in the xy-plane given by its azimuth, or +-z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RotationAxis {
    /// Azimuthal angle in the xy-plane: 0 = x, pi/2 = y.
    Xy(f64),
    Z,
    MinusZ,
}

impl RotationAxis {
    pub fn x() -> Self {
        RotationAxis::Xy(0.0)
    }
    pub fn y() -> Self {
        RotationAxis::Xy(FRAC_PI_2)
    }
    pub fn minus_x() -> Self {
        RotationAxis::Xy(PI)
    }
    pub fn minus_y() -> Self {
        RotationAxis::Xy(3.0 * FRAC_PI_2)
    }

    fn unit_vector(&self) -> [f64; 3] {
        match self {
            RotationAxis::Xy(phi) => [phi.cos(), phi.sin(), 0.0],
            RotationAxis::Z => [0.0, 0.0, 1.0],
            RotationAxis::MinusZ => [0.0, 0.0, -1.0],
        }
    }
}

impl fmt::Display for RotationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationAxis::Z => write!(f, "z"),
            RotationAxis::MinusZ => write!(f, "-z"),
            RotationAxis::Xy(phi) => {
                let wrapped = phi.rem_euclid(TAU);
                let named = [
                    (0.0, "x"),
                    (FRAC_PI_2, "y"),
                    (PI, "-x"),
                    (3.0 * FRAC_PI_2, "-y"),
                ];
                for (v, name) in named {
                    if (wrapped - v).abs() < 1e-12 {
                        return write!(f, "{name}");
                    }
                }
                write!(f, "xy:{wrapped}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseTarget {
    System,
    Assistant,
    Both,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum PulseEvent {
    Rotation {
        target: PulseTarget,
        axis: RotationAxis,
        angle: f64,
    },
    Delay {
        duration: f64,
    },
    Gradient,
}

fn rot(target: PulseTarget, axis: RotationAxis, angle: f64) -> PulseEvent {
    PulseEvent::Rotation {
        target,
        axis,
        angle,
    }
}

#[derive(Clone, Debug)]
pub struct PulseSequence {
    pub events: Vec<PulseEvent>,
    pub nmr: NmrParams,
}

impl PulseSequence {
    /// One event per line: `rot q=1 axis=y angle=1.5708`, `delay t=2.9e-4`,
    /// `grad`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            match ev {
                PulseEvent::Rotation {
                    target,
                    axis,
                    angle,
                } => {
                    let q = match target {
                        PulseTarget::System => "1",
                        PulseTarget::Assistant => "2",
                        PulseTarget::Both => "both",
                    };
                    out.push_str(&format!("rot q={q} axis={axis} angle={angle}\n"));
                }
                PulseEvent::Delay { duration } => {
                    out.push_str(&format!("delay t={duration}\n"));
                }
                PulseEvent::Gradient => out.push_str("grad\n"),
            }
        }
        out
    }
}

/// Single-qubit rotation exp(-i angle n.S) embedded into the two-qubit space.
fn rotation_matrix(target: PulseTarget, axis: RotationAxis, angle: f64) -> CMat {
    let n = axis.unit_vector();
    let gen2 = crate::qmat::spin_x()
        .scale(C64::new(n[0], 0.0))
        .add(&crate::qmat::spin_y().scale(C64::new(n[1], 0.0)))
        .add(&crate::qmat::spin_z().scale(C64::new(n[2], 0.0)));
    // (n.S)^2 = 1/4, so the exponential closes after one term
    let u2 = CMat::identity(2)
        .scale(C64::new((angle / 2.0).cos(), 0.0))
        .add(&gen2.scale(C64::new(0.0, -2.0 * (angle / 2.0).sin())));
    let id = CMat::identity(2);
    match target {
        PulseTarget::System => kron(&u2, &id).expect("2x2"),
        PulseTarget::Assistant => kron(&id, &u2).expect("2x2"),
        PulseTarget::Both => kron(&u2, &u2).expect("2x2"),
    }
}

/// Free evolution for `t` seconds under the natural two-spin Hamiltonian
/// (diagonal, so the phases are closed form).
fn delay_matrix(nmr: &NmrParams, t: f64) -> CMat {
    let phases = [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)].map(|(m1, m2)| {
        let e = nmr.omega1 * m1 + nmr.omega2 * m2 + TAU * nmr.j12_hz * m1 * m2;
        (-C64::i() * e * t).exp()
    });
    CMat::diag(&phases)
}

/// Zero every density-matrix element whose coherence order (difference of
/// total S_z quantum numbers between bra and ket) is nonzero. Retains the
/// populations and the zero-quantum pair; models a pulsed z-gradient.
pub fn gradient_dephase(rho: &CMat) -> CMat {
    assert_eq!(rho.dim(), 4);
    const ORDER: [i32; 4] = [1, 0, 0, -1];
    CMat::from_fn(4, |i, j| {
        if ORDER[i] == ORDER[j] {
            rho.get(i, j)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// A compiled pulse sequence: a plain unitary, or a composite map when the
/// sequence contains gradients.
#[derive(Clone, Debug)]
pub enum QuantumChannel {
    Unitary(CMat),
    Composite(Vec<ChannelStep>),
}

#[derive(Clone, Debug)]
pub enum ChannelStep {
    Unitary(CMat),
    Dephase,
}

impl QuantumChannel {
    pub fn apply(&self, rho: &CMat) -> CMat {
        match self {
            QuantumChannel::Unitary(u) => u.conjugate(rho),
            QuantumChannel::Composite(steps) => {
                let mut state = rho.clone();
                for step in steps {
                    state = match step {
                        ChannelStep::Unitary(u) => u.conjugate(&state),
                        ChannelStep::Dephase => gradient_dephase(&state),
                    };
                }
                state
            }
        }
    }

    pub fn unitary(&self) -> Option<&CMat> {
        match self {
            QuantumChannel::Unitary(u) => Some(u),
            QuantumChannel::Composite(_) => None,
        }
    }
}

/// Left-to-right composition of the sequence events.
pub fn compile(seq: &PulseSequence) -> QuantumChannel {
    let mut steps: Vec<ChannelStep> = Vec::new();
    let mut acc = CMat::identity(4);
    let mut has_gradient = false;
    for ev in &seq.events {
        match ev {
            PulseEvent::Rotation {
                target,
                axis,
                angle,
            } => {
                acc = rotation_matrix(*target, *axis, *angle).mul(&acc);
            }
            PulseEvent::Delay { duration } => {
                acc = delay_matrix(&seq.nmr, *duration).mul(&acc);
            }
            PulseEvent::Gradient => {
                has_gradient = true;
                steps.push(ChannelStep::Unitary(acc));
                steps.push(ChannelStep::Dephase);
                acc = CMat::identity(4);
            }
        }
    }
    if !has_gradient {
        return QuantumChannel::Unitary(acc);
    }
    steps.push(ChannelStep::Unitary(acc));
    QuantumChannel::Composite(steps)
}

/// Compile a sequence that must be purely unitary.
pub fn compile_unitary(seq: &PulseSequence) -> Result<CMat, PulseError> {
    match compile(seq) {
        QuantumChannel::Unitary(u) => Ok(u),
        QuantumChannel::Composite(_) => Err(PulseError::GradientInUnitaryContext),
    }
}

/// Exact diagonal sub-propagator exp(-i (Hz + Hzz) t).
fn u_z_exact(p: &XyzParams, t: f64) -> CMat {
    let phases = [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)].map(|(m1, m2)| {
        let e = p.b1 * m1 + p.b2 * m2 + p.jz * m1 * m2;
        (-C64::i() * e * t).exp()
    });
    CMat::diag(&phases)
}

/// Exact transverse sub-propagator exp(-i Hxy t); Hxy mixes the two
/// pi_z-symmetric pairs only.
fn u_xy_exact(p: &XyzParams, t: f64) -> CMat {
    let dq = (p.jx - p.jy) / 4.0; // double-quantum coupling
    let zq = (p.jx + p.jy) / 4.0; // zero-quantum (flip-flop) coupling
    let i = C64::i();
    let mut u = CMat::zeros(4);
    u.set(0, 0, C64::new((dq * t).cos(), 0.0));
    u.set(3, 3, C64::new((dq * t).cos(), 0.0));
    u.set(0, 3, -i * (dq * t).sin());
    u.set(3, 0, -i * (dq * t).sin());
    u.set(1, 1, C64::new((zq * t).cos(), 0.0));
    u.set(2, 2, C64::new((zq * t).cos(), 0.0));
    u.set(1, 2, -i * (zq * t).sin());
    u.set(2, 1, -i * (zq * t).sin());
    u
}

/// One symmetrized short-period segment U_z(dt/2) U_xy(dt) U_z(dt/2), built
/// from exact sub-propagators; the caller concatenates m of them.
pub fn trotter_segment(p: &XyzParams, dt: f64) -> CMat {
    let half = u_z_exact(p, dt / 2.0);
    half.mul(&u_xy_exact(p, dt)).mul(&half)
}

/// The m-fold segment product approximating exp(-i H tau).
pub fn trotter_propagator(p: &XyzParams, tau: f64, m: u32) -> CMat {
    assert!(m >= 1);
    let seg = trotter_segment(p, tau / m as f64);
    let mut u = seg.clone();
    for _ in 1..m {
        u = seg.mul(&u);
    }
    u
}

/// Pulse-sequence realization of the short-period expansion for the XZ-model
/// family (jy = 0, jx > 0, jz > 0, |B_k| = sqrt(2)/2 Jz so the spectrometer
/// offsets sit at +-sqrt(2) pi J12).
pub fn trotter_sequence(
    p: &XyzParams,
    tau: f64,
    m: u32,
    j12_hz: f64,
) -> Result<PulseSequence, PulseError> {
    assert!(m >= 1);
    if p.jy != 0.0 {
        return Err(PulseError::UnsupportedModel(format!(
            "transverse exchange must be x-only (jy = {})",
            p.jy
        )));
    }
    if p.jz <= 0.0 || p.jx <= 0.0 {
        return Err(PulseError::UnsupportedModel(format!(
            "realization needs jx > 0 and jz > 0 (jx = {}, jz = {})",
            p.jx, p.jz
        )));
    }
    let target = 2f64.sqrt() / 2.0 * p.jz;
    if (p.b1.abs() - target).abs() > 1e-9 || (p.b2.abs() - target).abs() > 1e-9 {
        return Err(PulseError::UnsupportedModel(format!(
            "fields must satisfy |B_k| = sqrt(2) Jz / 2 = {target} (got {}, {})",
            p.b1, p.b2
        )));
    }
    let dt = tau / m as f64;
    let d1 = p.jz * dt / (4.0 * PI * j12_hz);
    let d2 = p.jx * dt / (TAU * j12_hz);
    let omega1 = p.b1 * TAU * j12_hz / p.jz;
    let omega2 = p.b2 * TAU * j12_hz / p.jz;
    let mut events = Vec::new();
    for _ in 0..m {
        events.extend_from_slice(&[
            PulseEvent::Delay { duration: d1 },
            rot(PulseTarget::Both, RotationAxis::y(), FRAC_PI_2),
            PulseEvent::Delay { duration: d2 / 2.0 },
            rot(PulseTarget::Both, RotationAxis::minus_y(), PI),
            PulseEvent::Delay { duration: d2 / 2.0 },
            rot(PulseTarget::Both, RotationAxis::y(), FRAC_PI_2),
            PulseEvent::Delay { duration: d1 },
        ]);
    }
    Ok(PulseSequence {
        events,
        nmr: NmrParams {
            omega1,
            omega2,
            j12_hz,
        },
    })
}

/// Delay and angle constants of the exact-decomposition sequence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExactDecompositionTiming {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Azimuth of the phi pulses: x for theta1 >= theta2, -x otherwise.
    pub phi_is_x: bool,
}

pub fn exact_decomposition_timing(
    p: &XyzParams,
    tau: f64,
    j12_hz: f64,
) -> ExactDecompositionTiming {
    let d = model::derive(p);
    let s = model::spectrum(p);
    let l = s.lambdas;
    let mut tau3 = (l[0] - l[1] - l[2] + l[3]) * tau / (TAU * j12_hz);
    // shift by the coupling period (a global sign only) until realizable
    while tau3 < 0.0 {
        tau3 += 2.0 / j12_hz;
    }
    ExactDecompositionTiming {
        tau1: (d.theta1 - d.theta2).abs() / (TAU * j12_hz),
        tau2: (d.theta1 + d.theta2) / (TAU * j12_hz),
        tau3,
        beta1: (l[0] + l[1] - l[2] - l[3]) * tau / 2.0,
        beta2: (l[0] - l[1] + l[2] - l[3]) * tau / 2.0,
        phi_is_x: d.theta1 >= d.theta2,
    }
}

/// The basis-change subsequence: two refocused coupling blocks sandwiched by
/// pi/2 pulses, producing the double-quantum rotation by theta1 and the
/// zero-quantum rotation by -theta2 that diagonalize the XYZ Hamiltonian.
fn basis_change_events(timing: &ExactDecompositionTiming) -> Vec<PulseEvent> {
    let phi = if timing.phi_is_x {
        RotationAxis::x()
    } else {
        RotationAxis::minus_x()
    };
    vec![
        rot(PulseTarget::System, RotationAxis::minus_y(), FRAC_PI_2),
        rot(PulseTarget::Assistant, phi, FRAC_PI_2),
        PulseEvent::Delay {
            duration: timing.tau1 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::y(), PI),
        rot(PulseTarget::Assistant, RotationAxis::minus_x(), PI),
        PulseEvent::Delay {
            duration: timing.tau1 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::minus_x(), FRAC_PI_2),
        rot(PulseTarget::Assistant, RotationAxis::y(), FRAC_PI_2),
        PulseEvent::Delay {
            duration: timing.tau2 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::x(), PI),
        rot(PulseTarget::Assistant, RotationAxis::minus_y(), PI),
        PulseEvent::Delay {
            duration: timing.tau2 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::minus_x(), FRAC_PI_2),
        rot(PulseTarget::System, RotationAxis::minus_y(), FRAC_PI_2),
        rot(PulseTarget::Assistant, RotationAxis::y(), FRAC_PI_2),
        rot(PulseTarget::Assistant, phi, FRAC_PI_2),
    ]
}

/// Time-reversed conjugate of the basis change: reversed order, negated
/// pulse angles, and each coupling block's delay complemented to a full
/// coupling period so the block realizes the inverse rotation with positive
/// delays (the full period is a global sign).
fn reversed_basis_change_events(timing: &ExactDecompositionTiming, j12_hz: f64) -> Vec<PulseEvent> {
    let forward = basis_change_events(timing);
    let complement = |delay: f64| (2.0 / j12_hz - 2.0 * delay) / 2.0;
    let mut out = Vec::with_capacity(forward.len());
    for ev in forward.into_iter().rev() {
        out.push(match ev {
            PulseEvent::Rotation {
                target,
                axis,
                angle,
            } => rot(target, axis, -angle),
            PulseEvent::Delay { duration } => PulseEvent::Delay {
                duration: complement(duration),
            },
            PulseEvent::Gradient => PulseEvent::Gradient,
        });
    }
    out
}

/// Evolution under the diagonalized Hamiltonian: a refocused coupling block
/// for the Sz1 Sz2 phase plus composite z-rotations by beta1, beta2.
fn diagonal_events(timing: &ExactDecompositionTiming) -> Vec<PulseEvent> {
    vec![
        PulseEvent::Delay {
            duration: timing.tau3 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::x(), PI),
        rot(PulseTarget::Assistant, RotationAxis::x(), PI),
        PulseEvent::Delay {
            duration: timing.tau3 / 2.0,
        },
        rot(PulseTarget::System, RotationAxis::x(), FRAC_PI_2),
        rot(PulseTarget::Assistant, RotationAxis::x(), FRAC_PI_2),
        rot(PulseTarget::System, RotationAxis::y(), timing.beta1),
        rot(PulseTarget::Assistant, RotationAxis::y(), timing.beta2),
        rot(PulseTarget::System, RotationAxis::x(), FRAC_PI_2),
        rot(PulseTarget::Assistant, RotationAxis::x(), FRAC_PI_2),
    ]
}

/// Exact pulse-sequence realization of exp(-i H tau): inverse basis change,
/// diagonal evolution, basis change. Matches the analytic propagator up to a
/// global phase for every parameter set.
pub fn exact_decomposition_sequence(p: &XyzParams, tau: f64, j12_hz: f64) -> PulseSequence {
    assert!(j12_hz > 0.0, "coupling must be positive");
    let timing = exact_decomposition_timing(p, tau, j12_hz);
    let mut events = reversed_basis_change_events(&timing, j12_hz);
    events.extend(diagonal_events(&timing));
    events.extend(basis_change_events(&timing));
    PulseSequence {
        events,
        nmr: NmrParams {
            omega1: 0.0,
            omega2: 0.0,
            j12_hz,
        },
    }
}

/// Gate overlap Tr(u^dag v)/4 and derived fidelity figures.
#[derive(Clone, Copy, Debug)]
pub struct GateFidelity {
    /// Complex overlap; phase-sensitive.
    pub raw: C64,
    /// |Tr(u^dag v)|/4, 1 iff v = e^{i a} u.
    pub magnitude: f64,
}

impl GateFidelity {
    /// Squared overlap |Tr(u^dag v)/4|^2, the process-style figure quoted
    /// for the short-period expansion.
    pub fn squared(&self) -> f64 {
        self.magnitude * self.magnitude
    }
}

pub fn gate_fidelity(u: &CMat, v: &CMat) -> Result<GateFidelity, PulseError> {
    for m in [u, v] {
        let dev = m.mul(&m.adjoint()).max_abs_diff(&CMat::identity(m.dim()));
        if dev > 1e-8 {
            return Err(PulseError::NonUnitaryInput { deviation: dev });
        }
    }
    let raw = u.adjoint().mul(v).trace() / C64::new(4.0, 0.0);
    Ok(GateFidelity {
        raw,
        magnitude: raw.norm(),
    })
}
