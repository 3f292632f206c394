//! Stationary behaviour of the per-node backoff chains.
//!
//! Both MACs share one chain shape: windows double from `w0` up to stage
//! `m`, the chain then stays at the maximum window for `extra` further
//! stages and finally resets to stage 0. Wi-Fi DCF has `extra = 1`; the LAA
//! chain has `extra = e_l`. A node transmits whenever its counter is 0, so
//! the per-slot transmission probability is `sum_j b[j, 0]`.

use crate::error::{Error, Result};
use crate::params::MAX_RETRY_LIMIT;

/// Width of the band around `p = 1/2` where the `1 - 2p` pole is evaluated
/// through its removable form.
pub const POLE_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Wifi,
    Laa,
}

/// Shape of a backoff chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffChain {
    pub kind: ChainKind,
    pub w0: u32,
    pub m: u32,
    /// Stages spent at the maximum window after stage `m`.
    pub extra: u32,
}

impl BackoffChain {
    pub fn wifi(w0: u32, m: u32) -> Self {
        BackoffChain {
            kind: ChainKind::Wifi,
            w0,
            m,
            extra: 1,
        }
    }

    pub fn laa(w0: u32, m: u32, retry_limit: u32) -> Self {
        BackoffChain {
            kind: ChainKind::Laa,
            w0,
            m,
            extra: retry_limit,
        }
    }

    /// Index of the last stage.
    pub fn last_stage(&self) -> u32 {
        self.m + self.extra
    }

    /// Contention window used at `stage`.
    pub fn window(&self, stage: u32) -> u64 {
        u64::from(self.w0) << stage.min(self.m)
    }

    fn check(&self) -> Result<()> {
        if self.w0 < 1 {
            return Err(Error::Domain("minimum window must be at least 1".into()));
        }
        if self.m > 30 {
            return Err(Error::Domain("maximum stage must be at most 30".into()));
        }
        if self.kind == ChainKind::Laa && self.extra > MAX_RETRY_LIMIT {
            return Err(Error::Domain(format!(
                "retry limit {} outside 0..={MAX_RETRY_LIMIT}",
                self.extra
            )));
        }
        Ok(())
    }

    fn check_p(p: f64) -> Result<()> {
        if p.is_nan() || p < 0.0 {
            return Err(Error::Domain(format!("collision probability {p} is negative")));
        }
        if p >= 1.0 {
            return Err(Error::Domain(
                "collision probability 1: the chain never completes a transmission".into(),
            ));
        }
        Ok(())
    }

    /// `(1 - (2p)^(m+1)) / (1 - 2p)`, switching to the finite geometric
    /// sum inside the pole band.
    fn doubling_ratio(&self, p: f64) -> f64 {
        let k = self.m + 1;
        if (1.0 - 2.0 * p).abs() < POLE_BAND {
            (0..k).map(|j| (2.0 * p).powi(j as i32)).sum()
        } else {
            (1.0 - (2.0 * p).powi(k as i32)) / (1.0 - 2.0 * p)
        }
    }

    /// Transmission probability per slot for collision probability `p`.
    pub fn tau(&self, p: f64) -> Result<f64> {
        self.check()?;
        Self::check_p(p)?;
        Ok(self.tau_closed_form(p))
    }

    fn tau_closed_form(&self, p: f64) -> f64 {
        let w0 = f64::from(self.w0);
        let last = (self.last_stage() + 1) as i32;
        let tail = 1.0 - p.powi(last);
        let grow = (1.0 - p) * self.doubling_ratio(p) / tail;
        let hold = 2f64.powi(self.m as i32) * (p.powi(self.m as i32 + 1) - p.powi(last)) / tail;
        2.0 / (w0 * (grow + hold) + 1.0)
    }

    /// Closed form over the whole interval `[0, 1]`. At `p = 1` the limit
    /// (every stage visited once per cycle) is returned.
    pub(crate) fn tau_clamped(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p < 1.0 {
            return self.tau_closed_form(p);
        }
        let stages = f64::from(self.last_stage() + 1);
        let w0 = f64::from(self.w0);
        let windows = (2f64.powi(self.m as i32 + 1) - 1.0)
            + f64::from(self.extra) * 2f64.powi(self.m as i32);
        2.0 * stages / (w0 * windows + stages)
    }

    /// Probability of state `(0, 0)` from the normalisation condition.
    pub fn b00(&self, p: f64) -> Result<f64> {
        self.check()?;
        Self::check_p(p)?;
        let w0 = f64::from(self.w0);
        let last = (self.last_stage() + 1) as i32;
        let hold =
            2f64.powi(self.m as i32) * (p.powi(self.m as i32 + 1) - p.powi(last)) / (1.0 - p);
        let visits = (1.0 - p.powi(last)) / (1.0 - p);
        Ok(2.0 / (w0 * (self.doubling_ratio(p) + hold) + visits))
    }

    /// Full stationary distribution over `(stage, counter)`.
    pub fn stationary(&self, p: f64) -> Result<StationaryDistribution> {
        let b00 = self.b00(p)?;
        let stages = (0..=self.last_stage())
            .map(|j| {
                let head = p.powi(j as i32) * b00;
                let w = self.window(j);
                (0..w)
                    .map(|k| (w - k) as f64 / w as f64 * head)
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(StationaryDistribution {
            chain_kind: self.kind,
            b00,
            stages,
        })
    }
}

/// Stationary probabilities `b[j][k]` of a backoff chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub chain_kind: ChainKind,
    pub b00: f64,
    stages: Vec<Vec<f64>>,
}

impl StationaryDistribution {
    pub fn get(&self, stage: usize, counter: usize) -> Option<f64> {
        self.stages.get(stage).and_then(|s| s.get(counter)).copied()
    }

    pub fn stage(&self, stage: usize) -> &[f64] {
        &self.stages[stage]
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().flatten().sum()
    }

    /// Probability of sitting at counter 0 in any stage.
    pub fn transmit_probability(&self) -> f64 {
        self.stages.iter().map(|s| s[0]).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.stages
            .iter()
            .enumerate()
            .flat_map(|(j, s)| s.iter().enumerate().map(move |(k, &b)| ((j, k), b)))
    }
}

/// Wi-Fi DCF transmission probability.
pub fn wifi_tau(w0: u32, m: u32, p_w: f64) -> Result<f64> {
    BackoffChain::wifi(w0, m).tau(p_w)
}

/// LAA LBT transmission probability.
pub fn laa_tau(w0: u32, m: u32, retry_limit: u32, p_l: f64) -> Result<f64> {
    BackoffChain::laa(w0, m, retry_limit).tau(p_l)
}

pub fn wifi_stationary(w0: u32, m: u32, p_w: f64) -> Result<StationaryDistribution> {
    BackoffChain::wifi(w0, m).stationary(p_w)
}

pub fn laa_stationary(
    w0: u32,
    m: u32,
    retry_limit: u32,
    p_l: f64,
) -> Result<StationaryDistribution> {
    BackoffChain::laa(w0, m, retry_limit).stationary(p_l)
}
