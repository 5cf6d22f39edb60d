//! Exponential smoothing of vector streams.

use crate::error::{Error, Result};
use crate::geom::{Frame, Vec3};

/// Smoothing factor `delta` in `(0, 1]`; 1 passes the input through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    delta: f64,
}

impl FilterConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!("smoothing factor {delta} is outside (0, 1]")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { delta: 0.25 }
    }
}

/// Streaming form of [`low_pass`].
#[derive(Clone, Copy, Debug)]
pub struct LowPass<F: Frame> {
    delta: f64,
    state: Option<Vec3<F>>,
}

impl<F: Frame> LowPass<F> {
    pub fn new(cfg: FilterConfig) -> Self {
        Self { delta: cfg.delta, state: None }
    }

    pub fn update(&mut self, r: Vec3<F>) -> Vec3<F> {
        let s = match self.state {
            None => r,
            Some(prev) => prev * (1.0 - self.delta) + r * self.delta,
        };
        self.state = Some(s);
        s
    }
}

/// `s(0) = r(0)`, `s(i) = s(i−1) + δ·(r(i) − s(i−1))` per component.
pub fn low_pass<F: Frame>(stream: &[Vec3<F>], cfg: FilterConfig) -> Result<Vec<Vec3<F>>> {
    if stream.is_empty() {
        return Err(Error::invalid("cannot filter an empty stream"));
    }
    let mut lp = LowPass::new(cfg);
    Ok(stream.iter().map(|&r| lp.update(r)).collect())
}

/// Scalar exponential moving average, seeded with the first value.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ema {
    alpha: f64,
    state: Option<f64>,
}

impl Ema {
    pub(crate) fn new(alpha: f64) -> Self {
        Self { alpha, state: None }
    }

    pub(crate) fn update(&mut self, x: f64) -> f64 {
        let s = match self.state {
            None => x,
            Some(prev) => prev + self.alpha * (x - prev),
        };
        self.state = Some(s);
        s
    }
}
