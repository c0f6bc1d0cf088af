//! Ising anyon bookkeeping.
//!
//! Charges follow the fusion rules `ψ×ψ = 1`, `ψ×σ = σ`, `σ×σ = 1 + ψ`. The
//! quantum state of the σ anyons is tracked as a signed perfect pairing of
//! their Majorana modes ([`ChannelAlgebra`]), decorated with lattice positions
//! and pair strings ([`PairingState`]). A dense Jordan–Wigner simulation in
//! [`oracle`] serves as the reference implementation for small systems.

mod algebra;
mod field;
pub mod oracle;
mod pairing;

use serde::{Deserialize, Serialize};

pub use algebra::{ChannelAlgebra, MeasureResult, OutcomeProbability};
pub use field::FermionField;
pub use pairing::{Crossing, FusionRecord, MoveRecord, PairingState};

pub type ModeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Charge {
    Vacuum,
    Psi,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fusion {
    Definite(Charge),
    NeedsMeasurement,
}

pub fn fuse_charges(x: Charge, y: Charge) -> Fusion {
    use Charge::*;
    match (x, y) {
        (Vacuum, c) | (c, Vacuum) => Fusion::Definite(c),
        (Psi, Psi) => Fusion::Definite(Vacuum),
        (Psi, Sigma) | (Sigma, Psi) => Fusion::Definite(Sigma),
        (Sigma, Sigma) => Fusion::NeedsMeasurement,
    }
}

/// Fusion channel of a σ pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Vacuum,
    Psi,
}

impl Channel {
    pub fn flip(self) -> Channel {
        match self {
            Channel::Vacuum => Channel::Psi,
            Channel::Psi => Channel::Vacuum,
        }
    }

    /// Product of signs, with vacuum as `+1` and ψ as `-1`.
    pub fn times(self, other: Channel) -> Channel {
        if self == other {
            Channel::Vacuum
        } else {
            Channel::Psi
        }
    }

    pub fn is_psi(self) -> bool {
        self == Channel::Psi
    }

    pub fn sign(self) -> i8 {
        match self {
            Channel::Vacuum => 1,
            Channel::Psi => -1,
        }
    }

    pub fn charge(self) -> Charge {
        match self {
            Channel::Vacuum => Charge::Vacuum,
            Channel::Psi => Charge::Psi,
        }
    }
}
