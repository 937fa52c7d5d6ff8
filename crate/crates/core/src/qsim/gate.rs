use serde::{Deserialize, Serialize};

use super::C64;
use crate::prelude::*;
use crate::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Supported gate kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    U3,
    RX,
    RY,
    RZ,
    H,
    CNOT,
    CRX,
    RXX,
    RYY,
    RZZ,
    RZX,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::U3,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::H,
        GateKind::CNOT,
        GateKind::CRX,
        GateKind::RXX,
        GateKind::RYY,
        GateKind::RZZ,
        GateKind::RZX,
    ];

    /// Number of angles the gate consumes.
    pub fn n_angles(self) -> usize {
        match self {
            GateKind::U3 => 3,
            GateKind::H | GateKind::CNOT => 0,
            _ => 1,
        }
    }

    pub fn n_targets(self) -> usize {
        match self {
            GateKind::U3 | GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::H => 1,
            _ => 2,
        }
    }

    /// Shift rule applicable to each angle of this gate.
    pub fn shift_rule(self) -> Option<ShiftRule> {
        match self {
            GateKind::H | GateKind::CNOT => None,
            GateKind::CRX => Some(ShiftRule::FourTerm),
            _ => Some(ShiftRule::TwoTerm),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let upper = name.to_ascii_uppercase();
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == upper)
            .ok_or(Error::UnsupportedGate(name.to_owned()))
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U3 => "U3",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::H => "H",
            GateKind::CNOT => "CNOT",
            GateKind::CRX => "CRX",
            GateKind::RXX => "RXX",
            GateKind::RYY => "RYY",
            GateKind::RZZ => "RZZ",
            GateKind::RZX => "RZX",
        }
    }
}

/// Parameter-shift recipe for a single angle.
///
/// `TwoTerm` covers generators with eigenvalues ±1/2. `FourTerm` covers the
/// controlled rotation, whose generator has eigenvalues {0, ±1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    TwoTerm,
    FourTerm,
}

impl ShiftRule {
    /// `(shift, coefficient)` pairs: `df/dθ = Σ c·[f(θ+s) − f(θ−s)]`.
    pub fn terms(self) -> &'static [(f64, f64)] {
        use core::f64::consts::{FRAC_PI_2, SQRT_2};
        const C_PLUS: f64 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
        const C_MINUS: f64 = -(SQRT_2 - 1.0) / (4.0 * SQRT_2);
        match self {
            ShiftRule::TwoTerm => &[(FRAC_PI_2, 0.5)],
            ShiftRule::FourTerm => &[(FRAC_PI_2, C_PLUS), (3.0 * FRAC_PI_2, C_MINUS)],
        }
    }
}

/// Matrix of a gate, 2×2 or 4×4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = c(0.0, 0.0);
const ONE: C64 = c(1.0, 0.0);

fn cis(phase: f64) -> C64 {
    let (s, co) = phase.sin_cos();
    c(co, s)
}

/// Matrix for `kind` at the given angles.
pub fn gate_matrix(kind: GateKind, angles: &[f64]) -> Result<GateMatrix> {
    if angles.len() != kind.n_angles() {
        return Err(Error::shape("gate angles", kind.n_angles(), angles.len()));
    }
    let half = |i: usize| (angles[i] * 0.5).sin_cos();
    Ok(match kind {
        GateKind::U3 => {
            let (theta, phi, lambda) = (angles[0], angles[1], angles[2]);
            let (s, co) = (theta * 0.5).sin_cos();
            GateMatrix::One([
                [c(co, 0.0), -cis(lambda) * s],
                [cis(phi) * s, cis(phi + lambda) * co],
            ])
        }
        GateKind::RX => {
            let (s, co) = half(0);
            GateMatrix::One([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        GateKind::RY => {
            let (s, co) = half(0);
            GateMatrix::One([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        GateKind::RZ => {
            let (s, co) = half(0);
            GateMatrix::One([[c(co, -s), ZERO], [ZERO, c(co, s)]])
        }
        GateKind::H => {
            let r = core::f64::consts::FRAC_1_SQRT_2;
            GateMatrix::One([[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]])
        }
        GateKind::CNOT => GateMatrix::Two([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
            [ZERO, ZERO, ONE, ZERO],
        ]),
        GateKind::CRX => {
            let (s, co) = half(0);
            let (cc, ms) = (c(co, 0.0), c(0.0, -s));
            GateMatrix::Two([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ONE, ZERO, ZERO],
                [ZERO, ZERO, cc, ms],
                [ZERO, ZERO, ms, cc],
            ])
        }
        GateKind::RXX => {
            let (s, co) = half(0);
            let (cc, ms) = (c(co, 0.0), c(0.0, -s));
            GateMatrix::Two([
                [cc, ZERO, ZERO, ms],
                [ZERO, cc, ms, ZERO],
                [ZERO, ms, cc, ZERO],
                [ms, ZERO, ZERO, cc],
            ])
        }
        GateKind::RYY => {
            let (s, co) = half(0);
            let (cc, ms, ps) = (c(co, 0.0), c(0.0, -s), c(0.0, s));
            GateMatrix::Two([
                [cc, ZERO, ZERO, ps],
                [ZERO, cc, ms, ZERO],
                [ZERO, ms, cc, ZERO],
                [ps, ZERO, ZERO, cc],
            ])
        }
        GateKind::RZZ => {
            let (s, co) = half(0);
            let (m, p) = (c(co, -s), c(co, s));
            GateMatrix::Two([
                [m, ZERO, ZERO, ZERO],
                [ZERO, p, ZERO, ZERO],
                [ZERO, ZERO, p, ZERO],
                [ZERO, ZERO, ZERO, m],
            ])
        }
        // exp(-iθ/2 Z⊗X) = diag(RX(θ), RX(−θ)) in the |a b⟩ basis.
        GateKind::RZX => {
            let (s, co) = half(0);
            let (cc, ms, ps) = (c(co, 0.0), c(0.0, -s), c(0.0, s));
            GateMatrix::Two([
                [cc, ms, ZERO, ZERO],
                [ms, cc, ZERO, ZERO],
                [ZERO, ZERO, cc, ps],
                [ZERO, ZERO, ps, cc],
            ])
        }
    })
}
