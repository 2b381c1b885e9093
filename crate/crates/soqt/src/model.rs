//! Heisenberg XYZ Hamiltonian: parameters, derived quantities, and the
//! closed-form eigensystem.
//!
//! H = B1 Sz1 + B2 Sz2 + Jx Sx1 Sx2 + Jy Sy1 Sy2 + Jz Sz1 Sz2, hbar = 1,
//! all parameters angular frequencies.

use crate::qmat::{CMat, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// The five Heisenberg XYZ parameters. This struct is also the canonical
/// on-disk JSON Hamiltonian format consumed by the CLI.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct XyzParams {
    pub b1: f64,
    pub b2: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl XyzParams {
    pub fn new(b1: f64, b2: f64, jx: f64, jy: f64, jz: f64) -> Self {
        XyzParams { b1, b2, jx, jy, jz }
    }

    pub fn is_finite(&self) -> bool {
        [self.b1, self.b2, self.jx, self.jy, self.jz]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Quantities derived from the XYZ parameters.
///
/// The anisotropies are stored as products, not ratios: `b_diff` = (B1-B2)/2
/// = B*gamma_B and `j_diff` = (Jx-Jy)/4 = J*gamma_J/2, which stay finite when
/// B or J vanish. Degenerate eta_k = 0 takes theta_k = 0.
#[derive(Clone, Copy, Debug)]
pub struct DerivedParams {
    pub b_avg: f64,
    pub b_diff: f64,
    pub j_avg: f64,
    pub j_diff: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Mixing angles of the double- and zero-quantum blocks, in [0, 2*pi).
    pub theta1: f64,
    pub theta2: f64,
    pub jz: f64,
}

/// Half-angle cosine/sine with the sign convention sgn(0) = +1: the cosine
/// is taken nonnegative when the diagonal part is, otherwise the sine carries
/// the sign of the coupling. Both branches avoid cancellation.
fn half_angles(eta: f64, diag: f64, coupling: f64) -> (f64, f64) {
    if eta == 0.0 {
        return (1.0, 0.0);
    }
    if diag >= 0.0 {
        let c = ((eta + diag) / (2.0 * eta)).sqrt();
        let s = coupling / (2.0 * eta * (eta + diag)).sqrt();
        (c, s)
    } else {
        let sgn = if coupling >= 0.0 { 1.0 } else { -1.0 };
        let s = sgn * ((eta - diag) / (2.0 * eta)).sqrt();
        let c = coupling.abs() / (2.0 * eta * (eta - diag)).sqrt();
        (c, s)
    }
}

impl DerivedParams {
    pub fn cos_half_theta1(&self) -> f64 {
        (self.theta1 / 2.0).cos()
    }
    pub fn sin_half_theta1(&self) -> f64 {
        (self.theta1 / 2.0).sin()
    }
    pub fn cos_half_theta2(&self) -> f64 {
        (self.theta2 / 2.0).cos()
    }
    pub fn sin_half_theta2(&self) -> f64 {
        (self.theta2 / 2.0).sin()
    }

    pub fn cos_theta1(&self) -> f64 {
        if self.eta1 == 0.0 {
            1.0
        } else {
            self.b_avg / self.eta1
        }
    }
    pub fn sin_theta1(&self) -> f64 {
        if self.eta1 == 0.0 {
            0.0
        } else {
            self.j_diff / self.eta1
        }
    }
    pub fn cos_theta2(&self) -> f64 {
        if self.eta2 == 0.0 {
            1.0
        } else {
            self.b_diff / self.eta2
        }
    }
    pub fn sin_theta2(&self) -> f64 {
        if self.eta2 == 0.0 {
            0.0
        } else {
            self.j_avg / 2.0 / self.eta2
        }
    }

    pub fn sin_2theta1(&self) -> f64 {
        2.0 * self.sin_theta1() * self.cos_theta1()
    }
    pub fn sin_2theta2(&self) -> f64 {
        2.0 * self.sin_theta2() * self.cos_theta2()
    }
}

/// Average/difference parameters, eta frequencies and mixing angles.
pub fn derive(p: &XyzParams) -> DerivedParams {
    let b_avg = (p.b1 + p.b2) / 2.0;
    let b_diff = (p.b1 - p.b2) / 2.0;
    let j_avg = (p.jx + p.jy) / 2.0;
    let j_diff = (p.jx - p.jy) / 4.0;
    let eta1 = b_avg.hypot(j_diff);
    let eta2 = b_diff.hypot(j_avg / 2.0);
    let (c1, s1) = half_angles(eta1, b_avg, j_diff);
    let (c2, s2) = half_angles(eta2, b_diff, j_avg / 2.0);
    let theta1 = (2.0 * s1.atan2(c1)).rem_euclid(TAU);
    let theta2 = (2.0 * s2.atan2(c2)).rem_euclid(TAU);
    DerivedParams {
        b_avg,
        b_diff,
        j_avg,
        j_diff,
        eta1,
        eta2,
        theta1,
        theta2,
        jz: p.jz,
    }
}

/// Dense 4x4 Hamiltonian matrix in the fixed computational basis.
pub fn hamiltonian_matrix(p: &XyzParams) -> CMat {
    let d = derive(p);
    let q = p.jz / 4.0;
    let mut h = CMat::zeros(4);
    let r = |v: f64| C64::new(v, 0.0);
    h.set(0, 0, r(q + d.b_avg));
    h.set(1, 1, r(-q + d.b_diff));
    h.set(2, 2, r(-q - d.b_diff));
    h.set(3, 3, r(q - d.b_avg));
    h.set(0, 3, r(d.j_diff));
    h.set(3, 0, r(d.j_diff));
    h.set(1, 2, r(d.j_avg / 2.0));
    h.set(2, 1, r(d.j_avg / 2.0));
    h
}

/// Closed-form eigensystem. Eigenvalue/eigenvector pairing is positional
/// (lambda_1..lambda_4), not sorted by magnitude.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub lambdas: [f64; 4],
    /// Real eigenvectors as rows, in the pairing order of `lambdas`.
    pub vectors: [[f64; 4]; 4],
}

pub fn spectrum(p: &XyzParams) -> Spectrum {
    let d = derive(p);
    let q = p.jz / 4.0;
    let lambdas = [q + d.eta1, -q + d.eta2, -q - d.eta2, q - d.eta1];
    let (c1, s1) = (d.cos_half_theta1(), d.sin_half_theta1());
    let (c2, s2) = (d.cos_half_theta2(), d.sin_half_theta2());
    let vectors = [
        [c1, 0.0, 0.0, s1],
        [0.0, c2, s2, 0.0],
        [0.0, -s2, c2, 0.0],
        [-s1, 0.0, 0.0, c1],
    ];
    Spectrum { lambdas, vectors }
}

/// XZ-model optimal Hamiltonian, plus-sign variant of the field term:
/// sqrt(2)(Sz1 + Sz2) + 4 sqrt(2) Sx1 Sx2 + 2 Sz1 Sz2.
pub fn model_c_plus() -> XyzParams {
    let s = 2f64.sqrt();
    XyzParams::new(s, s, 4.0 * s, 0.0, 2.0)
}

/// XZ-model optimal Hamiltonian, minus-sign variant.
pub fn model_c_minus() -> XyzParams {
    let s = 2f64.sqrt();
    XyzParams::new(s, -s, 4.0 * s, 0.0, 2.0)
}

/// XYX-model optimal Hamiltonian.
pub fn model_a_xyx() -> XyzParams {
    let s = 2f64.sqrt();
    XyzParams::new(s, s, 2.0, 2.0 * (1.0 - 2.0 * s), 2.0)
}

/// XXZ-model optimal Hamiltonian.
pub fn model_b_xxz() -> XyzParams {
    let s = 2f64.sqrt();
    XyzParams::new(s, -s, 2.0 * s, 2.0 * s, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::eigh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn random_params(rng: &mut impl Rng) -> XyzParams {
        XyzParams::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        )
    }

    #[test]
    fn zero_params_give_zero_matrix() {
        let h = hamiltonian_matrix(&XyzParams::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(h.max_abs_diff(&CMat::zeros(4)) == 0.0);
    }

    #[test]
    fn model_c_matrix_entries() {
        // expand by hand for the XZ model: (1,1) = Jz/4 + B, (1,4) = (Jx-Jy)/4,
        // (2,3) = (Jx+Jy)/4
        let h = hamiltonian_matrix(&model_c_plus());
        let s = 2f64.sqrt();
        assert!((h.get(0, 0).re - (0.5 + s)).abs() < 1e-15);
        assert!((h.get(0, 3).re - s).abs() < 1e-15);
        assert!((h.get(1, 2).re - s).abs() < 1e-15);
        assert!(h.is_hermitian(1e-15));
    }

    #[test]
    fn ising_matrix_is_diagonal() {
        let h = hamiltonian_matrix(&XyzParams::new(1.3, -0.4, 0.0, 0.0, 2.1));
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(h.get(i, j), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn derive_model_c_plus() {
        let d = derive(&model_c_plus());
        assert!((d.eta1 - 2.0).abs() < 1e-12);
        assert!((d.eta2 - 2f64.sqrt()).abs() < 1e-12);
        assert!((d.sin_2theta1() - 1.0).abs() < 1e-12);
        assert!(d.sin_2theta2().abs() < 1e-12);
        assert!((d.theta1 - FRAC_PI_4).abs() < 1e-12);
        assert!((d.theta2 - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn derive_model_c_minus() {
        let d = derive(&model_c_minus());
        assert!((d.eta1 - 2f64.sqrt()).abs() < 1e-12);
        assert!((d.eta2 - 2.0).abs() < 1e-12);
        assert!(d.sin_2theta1().abs() < 1e-12);
        assert!((d.sin_2theta2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derive_zero_anisotropy_limits() {
        // jx = jy, b1 = b2: j_diff = 0 and b_diff = 0
        let d = derive(&XyzParams::new(1.1, 1.1, 0.8, 0.8, 0.3));
        assert_eq!(d.j_diff, 0.0);
        assert_eq!(d.b_diff, 0.0);
        assert!(d.sin_theta1().abs() < 1e-15);
        // eta2 = J/2 > 0 with zero diagonal part: theta2 = pi/2
        assert!((d.cos_half_theta2() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn derived_angles_reproduce_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let d = derive(&p);
            assert!((d.eta1 - d.b_avg.hypot(d.j_diff)).abs() < 1e-12);
            assert!((d.eta2 - d.b_diff.hypot(d.j_avg / 2.0)).abs() < 1e-12);
            if d.eta1 > 0.0 {
                assert!((d.cos_theta1() - d.b_avg / d.eta1).abs() < 1e-12);
                assert!((d.sin_theta1() - d.j_diff / d.eta1).abs() < 1e-12);
                // stored theta agrees with its half-angle construction
                let c = d.cos_half_theta1();
                let s = d.sin_half_theta1();
                assert!((2.0 * s * c - d.sin_theta1()).abs() < 1e-12);
                assert!((c * c - s * s - d.cos_theta1()).abs() < 1e-12);
            }
            if d.eta2 > 0.0 {
                assert!((d.cos_theta2() - d.b_diff / d.eta2).abs() < 1e-12);
                assert!((d.sin_theta2() - d.j_avg / 2.0 / d.eta2).abs() < 1e-12);
            }
            assert!((0.0..TAU).contains(&d.theta1));
            assert!((0.0..TAU).contains(&d.theta2));
        }
    }

    #[test]
    fn spectrum_zero_params() {
        let s = spectrum(&XyzParams::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(s.lambdas.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn spectrum_model_c_plus_values() {
        let s = spectrum(&model_c_plus());
        let r2 = 2f64.sqrt();
        let want = [2.5, r2 - 0.5, -r2 - 0.5, -1.5];
        for (a, b) in s.lambdas.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_matches_dense_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let h = hamiltonian_matrix(&p);
            let s = spectrum(&p);
            // eigen equation residual
            for k in 0..4 {
                for i in 0..4 {
                    let mut hv = C64::new(0.0, 0.0);
                    for j in 0..4 {
                        hv += h.get(i, j) * C64::new(s.vectors[k][j], 0.0);
                    }
                    let res = (hv - C64::new(s.lambdas[k] * s.vectors[k][i], 0.0)).norm();
                    assert!(res < 1e-10, "residual {res}");
                }
            }
            // orthonormality
            for a in 0..4 {
                for b in 0..4 {
                    let dot: f64 = (0..4).map(|i| s.vectors[a][i] * s.vectors[b][i]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
            // eigenvalues agree with a numerical diagonalization (sorted)
            let (num, _) = eigh(&h).unwrap();
            let mut ana = s.lambdas;
            ana.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (a, n) in ana.iter().zip(&num) {
                assert!((a - n).abs() < 1e-10);
            }
            // trace(H) = 0 always, so the eigenvalues sum to zero
            assert!(s.lambdas.iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn ising_eigenvectors_are_computational_basis() {
        let s = spectrum(&XyzParams::new(2.0, 0.7, 0.0, 0.0, 1.0));
        for k in 0..4 {
            let nonzero: Vec<usize> = (0..4).filter(|&i| s.vectors[k][i].abs() > 1e-14).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((s.vectors[k][nonzero[0]].abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = model_c_plus();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"b1\""));
        let q: XyzParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let r: XyzParams =
            serde_json::from_str(r#"{"b1":1.0,"b2":2.0,"jx":0.5,"jy":-0.5,"jz":0.0}"#).unwrap();
        assert_eq!(r.b2, 2.0);
    }

    #[test]
    fn theta_wrap_covers_negative_half_angles() {
        // b_avg < 0 with zero coupling puts theta at pi (sin half-angle 1)
        let d = derive(&XyzParams::new(-1.0, -1.0, 0.0, 0.0, 0.0));
        assert!((d.theta1 - PI).abs() < 1e-12);
    }
}
