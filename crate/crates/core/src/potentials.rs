//! Finite-support central potentials.
//!
//! Everything downstream (basis matrix elements, the exact solver) assumes a
//! piecewise-constant radial potential that vanishes identically beyond a
//! support radius `r0`. The well+barrier benchmark is the one first-class
//! construction; arbitrary segment lists are accepted through [`PotentialSpec`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("segment radii must be strictly increasing and positive (segment {index}: r_end = {r_end})")]
    BadSegmentOrder { index: usize, r_end: f64 },
    #[error("potential needs at least one segment")]
    Empty,
    #[error("segment value must be finite (segment {index})")]
    NonFiniteValue { index: usize },
    #[error("negative radius r = {r}")]
    NegativeRadius { r: f64 },
    #[error("well+barrier parameters invalid: {reason}")]
    BadWellBarrier { reason: String },
}

/// One constant piece of the potential: `value` on `[r_start, r_end)` where
/// `r_start` is the previous segment's `r_end` (or 0 for the first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_end: f64,
    pub value: f64,
}

/// Piecewise-constant central potential with finite support.
///
/// The potential is identically zero for `r >= support_radius()`. Values at
/// breakpoints belong to the segment on the right (right-continuous
/// convention); matching conditions never sample exactly at breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    segments: Vec<Segment>,
}

impl PotentialSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self, PotentialError> {
        if segments.is_empty() {
            return Err(PotentialError::Empty);
        }
        let mut prev = 0.0;
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.r_end > prev) || !seg.r_end.is_finite() {
                return Err(PotentialError::BadSegmentOrder {
                    index,
                    r_end: seg.r_end,
                });
            }
            if !seg.value.is_finite() {
                return Err(PotentialError::NonFiniteValue { index });
            }
            prev = seg.r_end;
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Radius beyond which the potential is exactly zero.
    pub fn support_radius(&self) -> f64 {
        self.segments.last().map(|s| s.r_end).unwrap_or(0.0)
    }

    /// Piecewise lookup; exactly 0 for `r >= support_radius()`.
    pub fn evaluate(&self, r: f64) -> Result<f64, PotentialError> {
        if r < 0.0 || !r.is_finite() {
            return Err(PotentialError::NegativeRadius { r });
        }
        for seg in &self.segments {
            if r < seg.r_end {
                return Ok(seg.value);
            }
        }
        Ok(0.0)
    }
}

/// Parameters of the well+barrier benchmark potential: depth `-v0` on
/// `[0, delta)`, height `+lambda` on `[delta, r0)`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellBarrierParams {
    pub v0: f64,
    pub delta: f64,
    pub r0: f64,
    pub lambda: f64,
}

impl WellBarrierParams {
    pub fn validate(&self) -> Result<(), PotentialError> {
        let bad = |reason: &str| PotentialError::BadWellBarrier {
            reason: reason.to_string(),
        };
        if !(self.v0 >= 0.0) {
            return Err(bad(&format!("v0 = {} must be >= 0", self.v0)));
        }
        if !(self.lambda >= 0.0) {
            return Err(bad(&format!("lambda = {} must be >= 0", self.lambda)));
        }
        if !(self.delta > 0.0 && self.r0 > self.delta) {
            return Err(bad(&format!(
                "need 0 < delta < r0, got delta = {}, r0 = {}",
                self.delta, self.r0
            )));
        }
        if !(self.v0.is_finite() && self.lambda.is_finite() && self.r0.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        Ok(())
    }
}

/// Well+barrier parameters with the barrier height left free, for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellBarrierTemplate {
    pub v0: f64,
    pub delta: f64,
    pub r0: f64,
}

impl WellBarrierTemplate {
    pub fn with_lambda(&self, lambda: f64) -> WellBarrierParams {
        WellBarrierParams {
            v0: self.v0,
            delta: self.delta,
            r0: self.r0,
            lambda,
        }
    }
}

/// Builds the two-segment well+barrier potential from validated parameters.
pub fn well_barrier(params: WellBarrierParams) -> Result<PotentialSpec, PotentialError> {
    params.validate()?;
    PotentialSpec::new(vec![
        Segment {
            r_end: params.delta,
            value: -params.v0,
        },
        Segment {
            r_end: params.r0,
            value: params.lambda,
        },
    ])
}
