use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_START_OFFSET: f64 = 1e-4;
pub const DEFAULT_PHI_FLOOR: f64 = 1e-12;
pub const DEFAULT_OVERFLOW_GUARD: f64 = 1e12;
pub const DEFAULT_SERIES_ORDER: usize = 8;

/// The integer pair `(m, k)` and the numerical settings shared by every
/// computation.
///
/// `m` is the complex dimension of `M^m_k` and `k` the power of the
/// tautological bundle; `m > k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub m: u32,
    pub k: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Distance from a singular endpoint at which integration is launched.
    pub start_offset: f64,
    /// Smallest `|φ|` for which the right-hand side is evaluated.
    pub phi_floor: f64,
    /// Integration stops once any field exceeds this magnitude.
    pub overflow_guard: f64,
    /// Highest power kept in the endpoint series expansion (at least 2).
    pub series_order: usize,
}

impl Params {
    pub fn new(m: u32, k: u32) -> Result<Self> {
        let params = Self {
            m,
            k,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            start_offset: DEFAULT_START_OFFSET,
            phi_floor: DEFAULT_PHI_FLOOR,
            overflow_guard: DEFAULT_OVERFLOW_GUARD,
            series_order: DEFAULT_SERIES_ORDER,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_start_offset(mut self, start_offset: f64) -> Result<Self> {
        self.start_offset = start_offset;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > self.k && self.k > 0) {
            return Err(Error::InvalidParams(format!(
                "need m > k > 0, got m = {}, k = {}",
                self.m, self.k
            )));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidParams(format!(
                "tolerances must be positive, got rel_tol = {}, abs_tol = {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !positive(self.start_offset) || self.start_offset > 1e-2 {
            return Err(Error::InvalidParams(format!(
                "start_offset must lie in (0, 1e-2], got {}",
                self.start_offset
            )));
        }
        if !positive(self.phi_floor) || !positive(self.overflow_guard) {
            return Err(Error::InvalidParams(
                "phi_floor and overflow_guard must be positive".into(),
            ));
        }
        if self.series_order < 2 {
            return Err(Error::InvalidParams(format!(
                "series_order must be at least 2, got {}",
                self.series_order
            )));
        }
        Ok(())
    }

    pub fn mf(&self) -> f64 {
        f64::from(self.m)
    }

    pub fn kf(&self) -> f64 {
        f64::from(self.k)
    }
}
