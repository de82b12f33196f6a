//! ISS-Lyapunov certificates, regional gain bundles, sampling-based checks
//! and merged max-type Lyapunov functions.

mod assumptions;
mod implication;
mod merged;
mod report;
mod sampling;
mod theorem2;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynError, InterconnectedSystem, StateFn};
use crate::scalar_fn::{ComparisonFunction, Gain, GainError};

pub use assumptions::{
    check_global_small_gain, verify_global_assumptions, verify_local_assumptions, CheckOptions, DiniMode,
    OrientationPolicy,
};
pub use implication::check_regional_implication;
pub use merged::{build_merged_lyapunov, level_constant, BridgeSpec, MergedLyapunov, Role, GLOBAL_BRIDGE_END};
pub use report::{CheckReport, Violation};
pub use sampling::{radical_inverse, ComponentSet, Halton, ProductSampler, SamplingOptions};
pub use theorem2::{inclusion_chain, verify_theorem2, Theorem2Options, Theorem2Outcome};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error("region sampler produced no states: {0}")]
    EmptySample(String),
    #[error("containment failed at {state:?}: {detail}")]
    ContainmentFailed { state: Vec<f64>, detail: String },
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = CertError> = std::result::Result<T, E>;

/// Directional derivative of a storage function from its own component and
/// the matching block of the vector field.
pub type DiniOracle = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Subsystem a storage function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Z,
}

/// Region of validity of a certificate, stated through its own storage value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Sublevel(f64),
    Superlevel(f64),
    All,
}

impl Region {
    pub fn contains(&self, value: f64) -> bool {
        match *self {
            Region::Sublevel(m) => value <= m,
            Region::Superlevel(m) => value >= m,
            Region::All => true,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Sublevel(m) => write!(f, "storage <= {m}"),
            Region::Superlevel(m) => write!(f, "storage >= {m}"),
            Region::All => write!(f, "all states"),
        }
    }
}

/// Storage function of one subsystem with its sandwich bounds and decay rate.
#[derive(Clone)]
pub struct StorageFunction {
    pub name: String,
    pub side: Side,
    /// Evaluated on the subsystem's own component.
    pub storage: StateFn,
    pub lower_bound: Arc<ComparisonFunction>,
    pub upper_bound: Arc<ComparisonFunction>,
    pub decay: StateFn,
    pub oracle: Option<DiniOracle>,
}

impl fmt::Debug for StorageFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StorageFunction").field("name", &self.name).field("side", &self.side).finish_non_exhaustive()
    }
}

impl StorageFunction {
    /// Own component of a stacked state.
    pub fn component<'a>(&self, y: &'a [f64], n: usize) -> &'a [f64] {
        match self.side {
            Side::X => &y[..n],
            Side::Z => &y[n..],
        }
    }

    pub fn eval(&self, own: &[f64]) -> f64 {
        (self.storage)(own)
    }
}

/// A storage function together with its gain and region: the implication
/// `storage ≥ gain(other storage) ⇒ D⁺storage ≤ −decay` on `region`.
#[derive(Clone, Debug)]
pub struct IssCertificate {
    pub storage: StorageFunction,
    pub gain: Gain,
    pub region: Region,
}

/// Gains and thresholds of the regional small-gain setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionalGainBundle {
    pub local_gain: Gain,
    pub m_local: f64,
    pub global_gain: Gain,
    pub m_global: f64,
    pub cross_gain: Arc<ComparisonFunction>,
}

impl RegionalGainBundle {
    pub fn b_local(&self) -> f64 {
        self.local_gain.limit_at_infinity()
    }

    pub fn b_global(&self) -> f64 {
        self.global_gain.limit_at_infinity()
    }
}

/// The interconnection with one storage function per subsystem.
#[derive(Clone, Debug)]
pub struct Interconnection {
    pub system: InterconnectedSystem,
    pub v: StorageFunction,
    pub w: StorageFunction,
}

impl Interconnection {
    pub fn local_certificate(&self, bundle: &RegionalGainBundle) -> IssCertificate {
        IssCertificate { storage: self.v.clone(), gain: bundle.local_gain.clone(), region: Region::Sublevel(bundle.m_local) }
    }

    pub fn global_certificate(&self, bundle: &RegionalGainBundle) -> IssCertificate {
        IssCertificate { storage: self.v.clone(), gain: bundle.global_gain.clone(), region: Region::Superlevel(bundle.m_global) }
    }

    pub fn cross_certificate(&self, bundle: &RegionalGainBundle) -> IssCertificate {
        IssCertificate { storage: self.w.clone(), gain: Gain::Continuous(bundle.cross_gain.clone()), region: Region::All }
    }
}
