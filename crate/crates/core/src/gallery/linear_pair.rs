//! `ẋ = −x + z/2`, `ż = −z + x/2` with `V = |x|`, `W = |z|`: every regional
//! assumption holds, including the threshold order `M_g < M_ℓ`.

use std::sync::Arc;

use crate::certificates::{
    build_merged_lyapunov, verify_theorem2, Interconnection, MergedLyapunov, RegionalGainBundle, Role,
    SamplingOptions, Side, Theorem2Options, Theorem2Outcome,
};
use crate::dynamics::{Field, InterconnectedSystem};
use crate::scalar_fn::{ComparisonFunction, Gain};

use super::example1::norm_storage;
use super::ExampleError;

pub const COUPLING: f64 = 0.5;
pub const EPS: f64 = 0.05;
pub const M_LOCAL: f64 = 1.0;
pub const M_GLOBAL: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct LinearPair {
    /// `(0.5 / 0.95) s`, used in both directions.
    pub gain: Arc<ComparisonFunction>,
    pub inter: Interconnection,
    pub bundle: RegionalGainBundle,
}

impl LinearPair {
    pub fn new() -> Result<Self, ExampleError> {
        let gain = Arc::new(ComparisonFunction::linear(COUPLING / (1.0 - EPS)));
        let f: Field = Arc::new(|x, z, o| o[0] = -x[0] + COUPLING * z[0]);
        let g: Field = Arc::new(|x, z, o| o[0] = -z[0] + COUPLING * x[0]);
        let v = norm_storage("V", Side::X, Arc::new(|x: &[f64]| EPS * x[0].abs()));
        let w = norm_storage("W", Side::Z, Arc::new(|z: &[f64]| EPS * z[0].abs()));
        let inter = Interconnection { system: InterconnectedSystem::new(1, 1, f, g)?, v, w };
        let bundle = RegionalGainBundle {
            local_gain: Gain::Continuous(gain.clone()),
            m_local: M_LOCAL,
            global_gain: Gain::Continuous(gain.clone()),
            m_global: M_GLOBAL,
            cross_gain: gain.clone(),
        };
        Ok(LinearPair { gain, inter, bundle })
    }

    pub fn merged_local(&self, sampling: &SamplingOptions) -> Result<MergedLyapunov, ExampleError> {
        Ok(build_merged_lyapunov(Role::Local, &self.bundle.local_bridge_spec()?, &self.inter, M_LOCAL, sampling)?)
    }

    pub fn merged_global(&self, sampling: &SamplingOptions) -> Result<MergedLyapunov, ExampleError> {
        Ok(build_merged_lyapunov(Role::Global, &self.bundle.global_bridge_spec()?, &self.inter, M_GLOBAL, sampling)?)
    }

    pub fn theorem2(&self, local: &MergedLyapunov, opts: &Theorem2Options) -> Result<Theorem2Outcome, ExampleError> {
        let gtg = Arc::new(self.bundle.global_kinf_bridge()?.function);
        Ok(verify_theorem2(&self.bundle, &self.inter, local, &gtg, opts)?)
    }
}
