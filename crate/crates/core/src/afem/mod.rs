//! Residual estimators, bulk marking, the adaptive loop for the conforming
//! and the Crouzeix–Raviart method, and numerical checks of estimator
//! stability and discrete reliability on mesh pairs.

pub mod adaptive;
pub mod axioms;
pub mod estimate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fem::SpaceKind;

pub use adaptive::{afem_run, AfemConfig, AfemHistory, AfemRecord};
pub use axioms::{check_axioms, check_axioms_with, pair_constants, AxiomCheck};
pub use estimate::{dorfler_mark, estimate, EstimatorBreakdown};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Conforming P1.
    Cfem,
    /// Crouzeix–Raviart.
    Crfem,
}

impl Method {
    pub fn space_kind(self) -> SpaceKind {
        match self {
            Method::Cfem => SpaceKind::S1Zero,
            Method::Crfem => SpaceKind::CrZero,
        }
    }

    /// Estimators only read gradients, so either boundary variant of the
    /// matching family is accepted.
    pub fn accepts(self, kind: SpaceKind) -> bool {
        match self {
            Method::Cfem => kind.is_conforming(),
            Method::Crfem => kind.is_cr(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cfem => "cfem",
            Method::Crfem => "crfem",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "cfem" | "p1" | "courant" => Ok(Method::Cfem),
            "cr" | "crfem" => Ok(Method::Crfem),
            other => Err(Error::Precondition(format!("unknown method '{other}' (use cfem or crfem)"))),
        }
    }
}
