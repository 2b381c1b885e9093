//! The measurement map: joint probabilities of the single factorized
//! x-observable, the transfer matrix, its determinant, the inverse map, and
//! error-propagation coefficients.
//!
//! The transfer matrix is always built by feeding the four elementary
//! density-matrix elements through the exact linear map; the closed-form
//! determinant expression serves as an independent cross-check.

use crate::evolve::Propagator;
use crate::model::{self, XyzParams};
use crate::qmat::{self, kron, CMat, DensityMatrix, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reconstruction refuses to invert below this determinant magnitude; error
/// amplification beyond ~1e6 makes results meaningless at double precision.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("transfer matrix is singular (|Delta| = {abs_delta:.3e})")]
    SingularTransfer { abs_delta: f64 },
}

/// Assistant preparation xi = 1/2 + epsilon * S_z.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AssistantState {
    epsilon: f64,
}

impl AssistantState {
    pub fn new(epsilon: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&epsilon),
            "polarization must be in [0, 1], got {epsilon}"
        );
        AssistantState { epsilon }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn matrix(&self) -> CMat {
        CMat::identity(2)
            .scale(C64::new(0.5, 0.0))
            .add(&qmat::spin_z().scale(C64::new(self.epsilon, 0.0)))
    }
}

/// Joint outcome probabilities of the factorized x-observable; index 1 is
/// the +x outcome. Serializes as the on-disk probability record.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JointProbabilities {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl JointProbabilities {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p11, self.p12, self.p21, self.p22]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        JointProbabilities {
            p11: a[0],
            p12: a[1],
            p21: a[2],
            p22: a[3],
        }
    }

    pub fn sum(&self) -> f64 {
        self.p11 + self.p12 + self.p21 + self.p22
    }
}

/// Projector (1/2 - (-1)^k S_x) (x) (1/2 - (-1)^q S_x), k, q in {1, 2}.
fn projector(k: usize, q: usize) -> CMat {
    let half = CMat::identity(2).scale(C64::new(0.5, 0.0));
    let sign = |n: usize| if n % 2 == 1 { 1.0 } else { -1.0 };
    let pk = half.add(&qmat::spin_x().scale(C64::new(sign(k), 0.0)));
    let pq = half.add(&qmat::spin_x().scale(C64::new(sign(q), 0.0)));
    kron(&pk, &pq).expect("2x2 factors")
}

fn projectors() -> [CMat; 4] {
    [
        projector(1, 1),
        projector(1, 2),
        projector(2, 1),
        projector(2, 2),
    ]
}

/// Complex outcome traces of an arbitrary (not necessarily Hermitian) evolved
/// two-qubit operator. Internal building block of the transfer matrix.
fn outcome_traces(rho_tau: &CMat) -> [C64; 4] {
    let projs = projectors();
    let mut out = [C64::new(0.0, 0.0); 4];
    for (o, pr) in out.iter_mut().zip(projs.iter()) {
        *o = pr.mul(rho_tau).trace();
    }
    out
}

/// Joint probabilities of an already-evolved two-qubit density matrix.
pub fn probabilities_of_state(rho_tau: &CMat) -> JointProbabilities {
    let t = outcome_traces(rho_tau);
    JointProbabilities::from_array([t[0].re, t[1].re, t[2].re, t[3].re])
}

/// Exact joint probabilities for system state rho, assistant xi, coupling
/// propagator u.
pub fn joint_probabilities(
    rho: &DensityMatrix,
    xi: &AssistantState,
    u: &Propagator,
) -> JointProbabilities {
    assert_eq!(rho.dim(), 2);
    let joint = kron(rho.mat(), &xi.matrix()).expect("2x2 inputs");
    probabilities_of_state(&u.u.conjugate(&joint))
}

/// Fixed change of basis (1, s_x, s_y, s_z) -> (rho11, rho12, rho21, rho22),
/// up to the overall 1/2: rho = 1/2 (1 + s . sigma).
fn bloch_to_elements() -> CMat {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let i = C64::i();
    CMat::from_rows(
        4,
        &[&[o, z, z, o], &[z, o, -i, z], &[z, o, i, z], &[o, z, z, -o]],
    )
}

/// The transfer matrix in both bases, with its determinant.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    /// Map from (rho11, rho12, rho21, rho22) to (P11, P12, P21, P22).
    pub m: CMat,
    /// Map from (1, s_x, s_y, s_z) to the probabilities; real up to roundoff.
    pub m_tilde: CMat,
    pub delta: C64,
    pub abs_delta: f64,
}

/// Build the transfer matrix column by column from the elementary matrices
/// E_ij (not physical states; the map is linear).
pub fn transfer_matrix(xi: &AssistantState, u: &Propagator) -> TransferMatrix {
    let xim = xi.matrix();
    let mut m = CMat::zeros(4);
    let elements = [(0, 0), (0, 1), (1, 0), (1, 1)];
    for (col, &(i, j)) in elements.iter().enumerate() {
        let mut e = CMat::zeros(2);
        e.set(i, j, C64::new(1.0, 0.0));
        let joint = kron(&e, &xim).expect("2x2 inputs");
        let traces = outcome_traces(&u.u.conjugate(&joint));
        for (row, t) in traces.iter().enumerate() {
            m.set(row, col, *t);
        }
    }
    let m_tilde = m.mul(&bloch_to_elements()).scale(C64::new(0.5, 0.0));
    let delta = m.det();
    TransferMatrix {
        m,
        m_tilde,
        delta,
        abs_delta: delta.norm(),
    }
}

/// Closed-form |Delta| evaluated directly from the derived parameters.
pub fn abs_delta_analytic(p: &XyzParams, tau: f64, epsilon: f64) -> f64 {
    let d = model::derive(p);
    let (st1, st2) = (d.sin_theta1(), d.sin_theta2());
    let (se1, se2) = ((d.eta1 * tau).sin(), (d.eta2 * tau).sin());
    let x1 = d.sin_2theta1() * se1 * se1;
    let x2 = d.sin_2theta2() * se2 * se2;
    let term0 = (1.0 - epsilon * epsilon) * (-p.jz * tau).sin() * (x1 * x1 - x2 * x2);
    let term1 = 2.0
        * epsilon
        * (x1 + x2)
        * ((1.0 - 2.0 * st1 * st1 * se1 * se1) * st2 * (2.0 * d.eta2 * tau).sin()
            - (1.0 - 2.0 * st2 * st2 * se2 * se2) * st1 * (2.0 * d.eta1 * tau).sin());
    (term0 + term1).abs() / 32.0
}

/// Result of inverting the measurement map: the reconstructed Bloch vector,
/// flagged (not clipped) when it lies outside the Bloch ball.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Reconstruction {
    pub s: [f64; 3],
    pub non_physical: bool,
}

impl Reconstruction {
    pub fn norm(&self) -> f64 {
        self.s.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Radially project a reconstructed vector onto the Bloch ball. Optional
/// utility for downstream consumers; the library itself reports raw values.
pub fn clamp_to_bloch_ball(s: [f64; 3]) -> [f64; 3] {
    let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n <= 1.0 {
        s
    } else {
        [s[0] / n, s[1] / n, s[2] / n]
    }
}

/// Invert the measurement map: solve m_tilde (1, s)^T = P.
pub fn reconstruct(
    probs: &JointProbabilities,
    tm: &TransferMatrix,
) -> Result<Reconstruction, TransferError> {
    if tm.abs_delta <= SINGULARITY_THRESHOLD {
        return Err(TransferError::SingularTransfer {
            abs_delta: tm.abs_delta,
        });
    }
    let b: Vec<C64> = probs.as_array().iter().map(|&v| C64::new(v, 0.0)).collect();
    let v = tm.m_tilde.solve(&b).expect("nonsingular by threshold");
    let imag = v[1..].iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    debug_assert!(imag < 1e-8, "imaginary residue {imag} in reconstruction");
    let s = [v[1].re, v[2].re, v[3].re];
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(Reconstruction {
        s,
        non_physical: norm > 1.0 + 1e-6,
    })
}

/// Error-propagation coefficients.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErrorCoefficients {
    pub ex: f64,
    pub ey: f64,
    pub ez: f64,
    /// E = 1/2 sqrt(Ex^2 + Ey^2 + Ez^2).
    pub e: f64,
}

fn coefficients_from(es: [f64; 3]) -> ErrorCoefficients {
    ErrorCoefficients {
        ex: es[0],
        ey: es[1],
        ez: es[2],
        e: 0.5 * (es[0] * es[0] + es[1] * es[1] + es[2] * es[2]).sqrt(),
    }
}

/// Cofactor-sum error coefficients: E_nu = (1/det m_tilde) sum_k A_{k,col},
/// the sensitivity of s_nu to a shift applied equally to all four
/// probabilities.
///
/// Note this quantity is identically zero whenever the first column of
/// m_tilde is uniform, which holds for every Hamiltonian and time at
/// epsilon = 0; see `error_amplification` for the per-probability figure.
pub fn error_coefficients(tm: &TransferMatrix) -> Result<ErrorCoefficients, TransferError> {
    if tm.abs_delta <= 1e-12 {
        return Err(TransferError::SingularTransfer {
            abs_delta: tm.abs_delta,
        });
    }
    let det = tm.m_tilde.det();
    let mut es = [0.0; 3];
    for (nu, e) in es.iter_mut().enumerate() {
        let col = nu + 1;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..4 {
            acc += tm.m_tilde.cofactor(k, col);
        }
        let v = acc / det;
        debug_assert!(v.im.abs() < 1e-8, "imaginary error coefficient {v}");
        *e = v.re;
    }
    Ok(coefficients_from(es))
}

/// Per-probability RMS amplification: E_nu is the Euclidean norm of row
/// nu + 1 of the inverse map, so E * sigma is the RMS Bloch-vector error for
/// independent noise of scale sigma on each probability. This is the
/// quantity that diverges as |Delta| -> 0 and whose minima track the |Delta|
/// maxima.
pub fn error_amplification(tm: &TransferMatrix) -> Result<ErrorCoefficients, TransferError> {
    if tm.abs_delta <= 1e-12 {
        return Err(TransferError::SingularTransfer {
            abs_delta: tm.abs_delta,
        });
    }
    // row nu of the inverse = solution of m_tilde^T y = e_nu
    let transpose = CMat::from_fn(4, |i, j| tm.m_tilde.get(j, i));
    let mut es = [0.0; 3];
    for (nu, e) in es.iter_mut().enumerate() {
        let mut rhs = vec![C64::new(0.0, 0.0); 4];
        rhs[nu + 1] = C64::new(1.0, 0.0);
        let row = transpose.solve(&rhs).expect("nonsingular by threshold");
        *e = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    }
    Ok(coefficients_from(es))
}

/// Diagnostic-only variant with the observable replaced by z-components.
/// Every outcome operator then lives in the pi_z-invariant subspace, so the
/// map cannot have full rank.
#[cfg(test)]
fn z_observable_transfer_matrix(xi: &AssistantState, u: &Propagator) -> CMat {
    let half = CMat::identity(2).scale(C64::new(0.5, 0.0));
    let sign = |n: usize| if n % 2 == 1 { 1.0 } else { -1.0 };
    let proj = |k: usize, q: usize| {
        let pk = half.add(&qmat::spin_z().scale(C64::new(sign(k), 0.0)));
        let pq = half.add(&qmat::spin_z().scale(C64::new(sign(q), 0.0)));
        kron(&pk, &pq).unwrap()
    };
    let projs = [proj(1, 1), proj(1, 2), proj(2, 1), proj(2, 2)];
    let xim = xi.matrix();
    let mut m = CMat::zeros(4);
    for (col, &(i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
        let mut e = CMat::zeros(2);
        e.set(i, j, C64::new(1.0, 0.0));
        let rho_tau = u.u.conjugate(&kron(&e, &xim).unwrap());
        for (row, pr) in projs.iter().enumerate() {
            m.set(row, col, pr.mul(&rho_tau).trace());
        }
    }
    m
}
