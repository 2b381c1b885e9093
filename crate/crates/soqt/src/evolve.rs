//! Closed-form propagator U(tau) = exp(-i H tau) of the coupled evolution.
//!
//! The evolution is block diagonal: populations plus the double-quantum pair
//! (|00>,|11>) and the zero-quantum pair (|01>,|10>) evolve among themselves,
//! single-quantum coherences pick up phases only. The propagator is therefore
//! fully described by six coefficients.

use crate::model::{self, DerivedParams, XyzParams};
use crate::qmat::{CMat, C64};

/// Propagator with its coefficient representation: diagonal (a1, a2, a3, a4),
/// d on the zero-quantum pair (2,3)/(3,2), b on the double-quantum pair
/// (1,4)/(4,1).
#[derive(Clone, Debug)]
pub struct Propagator {
    pub tau: f64,
    pub u: CMat,
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
    pub a4: C64,
    pub b: C64,
    pub d: C64,
}

impl Propagator {
    /// Reassemble the matrix from the six coefficients.
    pub fn matrix_from_coeffs(&self) -> CMat {
        assemble(self.a1, self.a2, self.a3, self.a4, self.b, self.d)
    }
}

fn assemble(a1: C64, a2: C64, a3: C64, a4: C64, b: C64, d: C64) -> CMat {
    let mut u = CMat::zeros(4);
    u.set(0, 0, a1);
    u.set(1, 1, a2);
    u.set(2, 2, a3);
    u.set(3, 3, a4);
    u.set(1, 2, d);
    u.set(2, 1, d);
    u.set(0, 3, b);
    u.set(3, 0, b);
    u
}

/// Analytic propagator from the closed-form eigensystem.
pub fn propagator_analytic(p: &XyzParams, tau: f64) -> Propagator {
    let d = model::derive(p);
    let s = model::spectrum(p);
    let e: Vec<C64> = s
        .lambdas
        .iter()
        .map(|&l| (-C64::i() * l * tau).exp())
        .collect();
    let (c1, s1) = (d.cos_half_theta1(), d.sin_half_theta1());
    let (c2, s2) = (d.cos_half_theta2(), d.sin_half_theta2());
    let a1 = c1 * c1 * e[0] + s1 * s1 * e[3];
    let a2 = c2 * c2 * e[1] + s2 * s2 * e[2];
    let a3 = s2 * s2 * e[1] + c2 * c2 * e[2];
    let a4 = s1 * s1 * e[0] + c1 * c1 * e[3];
    let b = 0.5 * d.sin_theta1() * (e[0] - e[3]);
    let dd = 0.5 * d.sin_theta2() * (e[1] - e[2]);
    Propagator {
        tau,
        u: assemble(a1, a2, a3, a4, b, dd),
        a1,
        a2,
        a3,
        a4,
        b,
        d: dd,
    }
}

/// One commuting factor: evolution generated by a 2x2 block Hamiltonian
/// eta * (cos(theta) sigma_z + sin(theta) sigma_x) acting on the given index
/// pair, identity elsewhere.
fn block_evolution(pair: (usize, usize), eta: f64, cos_t: f64, sin_t: f64, tau: f64) -> CMat {
    let mut u = CMat::identity(4);
    let (c, s) = ((eta * tau).cos(), (eta * tau).sin());
    let i = C64::i();
    let (p, q) = pair;
    u.set(p, p, C64::new(c, 0.0) - i * s * cos_t);
    u.set(q, q, C64::new(c, 0.0) + i * s * cos_t);
    u.set(p, q, -i * s * sin_t);
    u.set(q, p, -i * s * sin_t);
    u
}

/// The three mutually commuting factors U_zz, U_0, U_2 whose product is the
/// full propagator.
pub fn propagator_components(p: &XyzParams, tau: f64) -> (CMat, CMat, CMat) {
    let d: DerivedParams = model::derive(p);
    // U_zz = exp(-i Jz tau Sz1 Sz2): diagonal phases exp(-+ i Jz tau / 4)
    let phase_out = (-C64::i() * (p.jz * tau / 4.0)).exp();
    let phase_in = (C64::i() * (p.jz * tau / 4.0)).exp();
    let u_zz = CMat::diag(&[phase_out, phase_in, phase_in, phase_out]);
    // U_0 acts on the zero-quantum pair, U_2 on the double-quantum pair
    let u_0 = block_evolution((1, 2), d.eta2, d.cos_theta2(), d.sin_theta2(), tau);
    let u_2 = block_evolution((0, 3), d.eta1, d.cos_theta1(), d.sin_theta1(), tau);
    (u_zz, u_0, u_2)
}
