use serde::{Deserialize, Serialize};

use super::{tail, GainError, GainRepr, Piece, Pieces, Result, ScalarGain, TailBound, SEAM_TOL};

/// Upward jump of a piecewise gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub left: f64,
    pub right: f64,
}

/// Nondecreasing gain, strictly increasing on each piece, with upward jumps
/// allowed at breakpoints. Evaluation at a jump returns the right limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GainRepr", into = "GainRepr")]
pub struct PiecewiseGain {
    inner: Pieces,
    jumps: Vec<Jump>,
}

impl PiecewiseGain {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let inner = Pieces::new(pieces)?;
        let mut jumps = Vec::new();
        for (at, left, right) in inner.seams()? {
            if right < left - SEAM_TOL {
                return Err(GainError::Invalid(format!("downward jump at {at}: {left} -> {right}")));
            }
            if right > left + SEAM_TOL {
                jumps.push(Jump { at, left, right });
            }
        }
        Ok(PiecewiseGain { inner, jumps })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.inner.pieces
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.inner.eval(s)
    }

    /// Left limit, which differs from [`eval`](Self::eval) only at jumps.
    pub fn left_limit(&self, s: f64) -> Result<f64> {
        match self.jumps.iter().find(|j| j.at == s) {
            Some(j) => Ok(j.left),
            None => self.eval(s),
        }
    }

    pub fn limit_at_infinity(&self) -> f64 {
        self.inner.last().segment.limit()
    }

    /// Same pieces with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        PiecewiseGain::new(super::scale_pieces(&self.inner.pieces, factor))
    }
}

impl ScalarGain for PiecewiseGain {
    fn eval(&self, s: f64) -> Result<f64> {
        PiecewiseGain::eval(self, s)
    }
    fn limit_at_infinity(&self) -> f64 {
        PiecewiseGain::limit_at_infinity(self)
    }
    fn upper_tail(&self) -> Option<TailBound> {
        let last = self.inner.last();
        tail::segment_tail(&last.segment, last.start)
    }
}

impl From<PiecewiseGain> for GainRepr {
    fn from(g: PiecewiseGain) -> Self {
        GainRepr::from_pieces(&g.inner.pieces)
    }
}

impl TryFrom<GainRepr> for PiecewiseGain {
    type Error = GainError;
    fn try_from(r: GainRepr) -> Result<Self> {
        PiecewiseGain::new(r.into_pieces())
    }
}
