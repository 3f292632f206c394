//! Parameter sets for both MACs and the combined coexistence scenario.
//!
//! Times are microseconds, rates are Mbps, sizes are bytes. A byte count
//! divided by a rate in Mbps is turned into airtime as `8 * bytes / rate`.

use crate::error::{Error, Result};

/// Largest LAA retry limit after reaching the maximum stage.
pub const MAX_RETRY_LIMIT: u32 = 8;

/// Longest TXOP an LAA node may hold, in µs.
pub const MAX_TXOP_US: f64 = 10_000.0;

/// Data symbols per subframe over total symbols (one PDCCH symbol out of 14).
pub const DEFAULT_PDCCH_FRACTION: f64 = 13.0 / 14.0;

/// Airtime in µs of `bytes` sent at `rate_mbps`.
pub fn airtime_us(bytes: u32, rate_mbps: f64) -> f64 {
    8.0 * f64::from(bytes) / rate_mbps
}

/// Wi-Fi DCF contention and frame-timing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WifiParams {
    /// Minimum contention window, in slots.
    pub w0: u32,
    /// Maximum backoff stage. The chain holds stage `m` for one extra attempt.
    pub m: u32,
    pub payload_bytes: u32,
    pub data_rate_mbps: f64,
    /// Control rate used for the ACK.
    pub control_rate_mbps: f64,
    pub phy_header_us: f64,
    pub mac_header_bytes: u32,
    pub ack_bytes: u32,
    pub difs_us: f64,
    pub sifs_us: f64,
    pub slot_us: f64,
    pub prop_delay_us: f64,
}

impl Default for WifiParams {
    fn default() -> Self {
        WifiParams {
            w0: 16,
            m: 6,
            payload_bytes: 2048,
            data_rate_mbps: 9.0,
            control_rate_mbps: 6.0,
            phy_header_us: 20.0,
            mac_header_bytes: 34,
            ack_bytes: 14,
            difs_us: 34.0,
            sifs_us: 16.0,
            slot_us: 9.0,
            prop_delay_us: 0.1,
        }
    }
}

/// Frame airtimes derived from byte counts and rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAirtimes {
    /// Payload duration.
    pub psize_us: f64,
    pub mach_us: f64,
    pub ack_us: f64,
}

impl WifiParams {
    pub fn with_contention(mut self, w0: u32, m: u32) -> Self {
        self.w0 = w0;
        self.m = m;
        self
    }

    pub fn with_rate(mut self, data_rate_mbps: f64) -> Self {
        self.data_rate_mbps = data_rate_mbps;
        self
    }

    /// Payload, MAC header and ACK airtimes. The MAC header rides the data
    /// rate and the ACK the control rate.
    pub fn derived_durations(&self) -> FrameAirtimes {
        FrameAirtimes {
            psize_us: airtime_us(self.payload_bytes, self.data_rate_mbps),
            mach_us: airtime_us(self.mac_header_bytes, self.data_rate_mbps),
            ack_us: airtime_us(self.ack_bytes, self.control_rate_mbps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w0 < 1 {
            return Err(Error::invalid("wifi.w0", "must be at least 1"));
        }
        if self.m > 20 {
            return Err(Error::invalid("wifi.m", "must be at most 20"));
        }
        if self.payload_bytes < 1 {
            return Err(Error::invalid("wifi.payload_bytes", "must be at least 1"));
        }
        positive("wifi.data_rate_mbps", self.data_rate_mbps)?;
        positive("wifi.control_rate_mbps", self.control_rate_mbps)?;
        positive("wifi.phy_header_us", self.phy_header_us)?;
        if self.mac_header_bytes < 1 {
            return Err(Error::invalid("wifi.mac_header_bytes", "must be at least 1"));
        }
        if self.ack_bytes < 1 {
            return Err(Error::invalid("wifi.ack_bytes", "must be at least 1"));
        }
        positive("wifi.difs_us", self.difs_us)?;
        positive("wifi.sifs_us", self.sifs_us)?;
        positive("wifi.slot_us", self.slot_us)?;
        positive("wifi.prop_delay_us", self.prop_delay_us)?;
        Ok(())
    }
}

/// LTE-LAA channel access priority class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorityClass {
    P1,
    P2,
    P3,
    P4,
}

impl PriorityClass {
    pub fn from_id(class_id: u8) -> Result<Self> {
        match class_id {
            1 => Ok(PriorityClass::P1),
            2 => Ok(PriorityClass::P2),
            3 => Ok(PriorityClass::P3),
            4 => Ok(PriorityClass::P4),
            other => Err(Error::Domain(format!(
                "unknown LAA priority class {other}, expected 1..=4"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            PriorityClass::P1 => 1,
            PriorityClass::P2 => 2,
            PriorityClass::P3 => 3,
            PriorityClass::P4 => 4,
        }
    }

    /// `(defer_us, w0, m, txop_us)`. Classes 3 and 4 use 8 ms unless
    /// `long_txop` selects the 10 ms variant.
    fn table(self, long_txop: bool) -> (f64, u32, u32, f64) {
        let long = if long_txop { 10_000.0 } else { 8_000.0 };
        match self {
            PriorityClass::P1 => (25.0, 4, 1, 2_000.0),
            PriorityClass::P2 => (25.0, 8, 1, 3_000.0),
            PriorityClass::P3 => (43.0, 16, 2, long),
            PriorityClass::P4 => (79.0, 16, 6, long),
        }
    }
}

/// LTE-LAA LBT contention and transmission parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaaParams {
    pub w0: u32,
    pub m: u32,
    /// Extra attempts at the maximum window before the stage resets.
    pub retry_limit: u32,
    pub defer_us: f64,
    pub txop_us: f64,
    /// Delay before the next transmission (slot alignment plus reservation).
    pub next_tx_delay_us: f64,
    pub data_rate_mbps: f64,
    pub pdcch_fraction: f64,
}

impl Default for LaaParams {
    fn default() -> Self {
        LaaParams::priority_class(PriorityClass::P3, false)
    }
}

impl LaaParams {
    pub fn priority_class(class: PriorityClass, long_txop: bool) -> Self {
        let (defer_us, w0, m, txop_us) = class.table(long_txop);
        LaaParams {
            w0,
            m,
            retry_limit: 1,
            defer_us,
            txop_us,
            next_tx_delay_us: 500.0,
            data_rate_mbps: 7.8,
            pdcch_fraction: DEFAULT_PDCCH_FRACTION,
        }
    }

    pub fn with_contention(mut self, w0: u32, m: u32) -> Self {
        self.w0 = w0;
        self.m = m;
        self
    }

    pub fn with_rate(mut self, data_rate_mbps: f64) -> Self {
        self.data_rate_mbps = data_rate_mbps;
        self
    }

    pub fn with_txop(mut self, txop_us: f64) -> Self {
        self.txop_us = txop_us;
        self
    }

    pub fn with_retry_limit(mut self, retry_limit: u32) -> Self {
        self.retry_limit = retry_limit;
        self
    }

    /// Data airtime inside one TXOP.
    pub fn data_airtime_us(&self) -> f64 {
        self.pdcch_fraction * self.txop_us
    }

    pub fn validate(&self) -> Result<()> {
        if self.w0 < 1 {
            return Err(Error::invalid("laa.w0", "must be at least 1"));
        }
        if self.m > 20 {
            return Err(Error::invalid("laa.m", "must be at most 20"));
        }
        if self.retry_limit > MAX_RETRY_LIMIT {
            return Err(Error::invalid(
                "laa.retry_limit",
                format!("must be in 0..={MAX_RETRY_LIMIT}"),
            ));
        }
        positive("laa.defer_us", self.defer_us)?;
        positive("laa.txop_us", self.txop_us)?;
        if self.txop_us > MAX_TXOP_US {
            return Err(Error::invalid(
                "laa.txop_us",
                format!("must not exceed {MAX_TXOP_US} µs"),
            ));
        }
        positive("laa.next_tx_delay_us", self.next_tx_delay_us)?;
        positive("laa.data_rate_mbps", self.data_rate_mbps)?;
        if !(self.pdcch_fraction > 0.0 && self.pdcch_fraction <= 1.0) {
            return Err(Error::invalid("laa.pdcch_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Table preset for an LAA priority class: retry limit 1 and a 500 µs
/// next-transmission delay.
pub fn load_priority_class(class_id: u8) -> Result<LaaParams> {
    Ok(LaaParams::priority_class(
        PriorityClass::from_id(class_id)?,
        false,
    ))
}

/// Co-located Wi-Fi and LAA networks sharing one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub n_wifi: u32,
    pub n_laa: u32,
    pub wifi: WifiParams,
    pub laa: LaaParams,
    /// Cross-network detection probability of a Wi-Fi node.
    pub p_dw: f64,
    /// Cross-network detection probability of an LAA node.
    pub p_dl: f64,
    /// Forces `retry_limit = 0` and `next_tx_delay_us = difs_us`.
    pub comparison_mode: bool,
}

impl Scenario {
    /// Validated scenario with perfect cross detection.
    pub fn new(n_wifi: u32, n_laa: u32, wifi: WifiParams, laa: LaaParams) -> Result<Self> {
        let s = Scenario {
            n_wifi,
            n_laa,
            wifi,
            laa,
            p_dw: 1.0,
            p_dl: 1.0,
            comparison_mode: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_detection(mut self, p_dw: f64, p_dl: f64) -> Result<Self> {
        self.p_dw = p_dw;
        self.p_dl = p_dl;
        self.validate()?;
        Ok(self)
    }

    pub fn with_comparison_mode(mut self, on: bool) -> Self {
        self.comparison_mode = on;
        self
    }

    pub fn with_nodes(mut self, n_wifi: u32, n_laa: u32) -> Result<Self> {
        self.n_wifi = n_wifi;
        self.n_laa = n_laa;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_wifi == 0 && self.n_laa == 0 {
            return Err(Error::invalid("n_wifi", "n_wifi + n_laa must be at least 1"));
        }
        self.wifi.validate()?;
        self.laa.validate()?;
        probability("p_dw", self.p_dw)?;
        probability("p_dl", self.p_dl)?;
        Ok(())
    }

    /// The parameters actually used by every engine: comparison mode
    /// overrides are applied, everything else is copied.
    pub fn effective(&self) -> Scenario {
        let mut s = *self;
        if s.comparison_mode {
            s.laa.retry_limit = 0;
            s.laa.next_tx_delay_us = s.wifi.difs_us;
        }
        s
    }

    pub fn total_nodes(&self) -> u32 {
        self.n_wifi + self.n_laa
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn probability(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}
