use thiserror::Error;

use crate::model::ParamError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("m = {m} is excluded here: {reason}")]
    RejectM { m: f64, reason: &'static str },
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("negative radicand in {which}: {value}")]
    SqrtDomain { which: &'static str, value: f64 },
    #[error("vanishing denominator in {which} at Omega = {omega}")]
    DenomZero { which: &'static str, omega: f64 },
    #[error("relation '{relation}' violated, residual {residual:e}")]
    Inconsistent {
        relation: &'static str,
        residual: f64,
    },
    #[error("Omega collapsed at t = {t}")]
    OmegaCollapse { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("no real Omega velocity at the requested start: Omega'^2 = {deficit:e}")]
    TurningPointStall { deficit: f64 },
    #[error("sample point ({x}, {y}) at t = {t} lies outside the plasma support")]
    GridOutsideSupport { x: f64, y: f64, t: f64 },
    #[error("time {t} outside the available span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
}

pub(crate) fn sqrt_checked(which: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value.sqrt())
    } else {
        Err(Error::SqrtDomain { which, value })
    }
}
