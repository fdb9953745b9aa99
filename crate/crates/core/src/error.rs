use thiserror::Error;

use crate::field::expr::ParseError;
use crate::geom::{Point, Region};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid region [{xmin}, {xmax}] x [{ymin}, {ymax}]")]
    InvalidRegion { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },

    #[error("non-finite {what} at {at}")]
    NonFinite { what: &'static str, at: Point },

    #[error("interval enclosure failed over {region} (split the box)")]
    EnclosureFailure { region: Region },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{point} is not a critical point (|F| = {residual:e})")]
    NotCriticalPoint { point: Point, residual: f64 },

    #[error("integration aborted: {0}")]
    Integration(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("returns are already inward at r = {r}; no period annulus resolved")]
    NoPeriodAnnulus { r: f64 },

    #[error("no inward return regime found up to r = {r_max}")]
    NoInwardRegime { r_max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
