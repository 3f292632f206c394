//! Event probabilities, event durations, mean event time and throughput.
//!
//! A generic channel event is one of: idle slot, Wi-Fi success, LAA
//! success, Wi-Fi-only collision, LAA-only collision, or a cross collision
//! between the two networks. Cross collisions last as long as the longer of
//! the two collision durations.

use crate::error::{Error, Result};
use crate::params::{LaaParams, Scenario, WifiParams};
use crate::solver::{solve_coexistence, solve_wifi_only, Solution, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProbabilities {
    /// At least one Wi-Fi node transmits.
    pub p_trw: f64,
    /// Exactly one Wi-Fi node transmits, given at least one does.
    pub p_sw: f64,
    pub p_trl: f64,
    pub p_sl: f64,
}

/// Probability that at least one of `n` nodes transmits, and the
/// conditional probability that exactly one does (0 when nobody can).
fn network_activity(n: u32, tau: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p_tr = 1.0 - (1.0 - tau).powi(n as i32);
    if p_tr <= 0.0 {
        return (0.0, 0.0);
    }
    let p_s = f64::from(n) * tau * (1.0 - tau).powi(n as i32 - 1) / p_tr;
    (p_tr, p_s)
}

pub fn event_probabilities(sol: &Solution, n_w: u32, n_l: u32) -> EventProbabilities {
    let (p_trw, p_sw) = network_activity(n_w, sol.tau_w);
    let (p_trl, p_sl) = network_activity(n_l, sol.tau_l);
    EventProbabilities {
        p_trw,
        p_sw,
        p_trl,
        p_sl,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventDurations {
    pub t_sw: f64,
    pub t_cw: f64,
    pub t_sl: f64,
    pub t_cl: f64,
    pub t_cc: f64,
}

pub fn event_durations(w: &WifiParams, l: &LaaParams) -> EventDurations {
    let f = w.derived_durations();
    let frame = f.mach_us + w.phy_header_us + f.psize_us;
    let t_sw = frame + w.sifs_us + w.prop_delay_us + f.ack_us + w.difs_us + w.prop_delay_us;
    let t_cw = frame + w.difs_us + w.prop_delay_us;
    let t_sl = l.txop_us + l.next_tx_delay_us;
    let t_cl = t_sl;
    EventDurations {
        t_sw,
        t_cw,
        t_sl,
        t_cl,
        t_cc: t_cw.max(t_cl),
    }
}

/// Classes of channel events, in the order used by [`EventWeights`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventClass {
    Idle,
    WifiSuccess,
    LaaSuccess,
    WifiCollision,
    LaaCollision,
    CrossCollision,
}

impl EventClass {
    pub const ALL: [EventClass; 6] = [
        EventClass::Idle,
        EventClass::WifiSuccess,
        EventClass::LaaSuccess,
        EventClass::WifiCollision,
        EventClass::LaaCollision,
        EventClass::CrossCollision,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EventClass::Idle => "idle",
            EventClass::WifiSuccess => "wifi-success",
            EventClass::LaaSuccess => "laa-success",
            EventClass::WifiCollision => "wifi-collision",
            EventClass::LaaCollision => "laa-collision",
            EventClass::CrossCollision => "cross-collision",
        }
    }
}

/// Probability of each event class in a generic slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventWeights(pub [f64; 6]);

impl EventWeights {
    pub fn from_probabilities(ep: &EventProbabilities) -> Self {
        let EventProbabilities {
            p_trw,
            p_sw,
            p_trl,
            p_sl,
        } = *ep;
        let cross = p_trw * p_sw * p_trl * p_sl
            + p_trw * p_sw * p_trl * (1.0 - p_sl)
            + p_trw * (1.0 - p_sw) * p_trl * p_sl
            + p_trw * (1.0 - p_sw) * p_trl * (1.0 - p_sl);
        EventWeights([
            (1.0 - p_trw) * (1.0 - p_trl),
            p_trw * p_sw * (1.0 - p_trl),
            p_trl * p_sl * (1.0 - p_trw),
            p_trw * (1.0 - p_sw) * (1.0 - p_trl),
            p_trl * (1.0 - p_sl) * (1.0 - p_trw),
            cross,
        ])
    }

    pub fn get(&self, class: EventClass) -> f64 {
        self.0[class.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Mean duration of a generic event, in µs.
pub fn expected_event_time(ep: &EventProbabilities, ed: &EventDurations, slot_us: f64) -> f64 {
    let w = EventWeights::from_probabilities(ep);
    let durations = [slot_us, ed.t_sw, ed.t_sl, ed.t_cw, ed.t_cl, ed.t_cc];
    w.0.iter().zip(durations).map(|(p, t)| p * t).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub p_trw: f64,
    pub p_sw: f64,
    pub p_trl: f64,
    pub p_sl: f64,
    pub t_sw: f64,
    pub t_cw: f64,
    pub t_sl: f64,
    pub t_cl: f64,
    pub t_cc: f64,
    pub t_e: f64,
    pub tput_wifi_mbps: f64,
    pub tput_laa_mbps: f64,
    pub per_user_wifi_mbps: f64,
    pub per_user_laa_mbps: f64,
}

impl ThroughputReport {
    pub fn total_mbps(&self) -> f64 {
        self.tput_wifi_mbps + self.tput_laa_mbps
    }
}

fn per_user(total: f64, n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        total / f64::from(n)
    }
}

/// Throughput of both networks at a solved fixed point.
pub fn coexistence_throughput(s: &Scenario, sol: &Solution) -> ThroughputReport {
    let s = s.effective();
    let ep = event_probabilities(sol, s.n_wifi, s.n_laa);
    let ed = event_durations(&s.wifi, &s.laa);
    let t_e = expected_event_time(&ep, &ed, s.wifi.slot_us);
    let psize = s.wifi.derived_durations().psize_us;

    // µs of airtime times Mbps gives bits; bits per µs is Mbps.
    let wifi_bits = ep.p_trw * ep.p_sw * (1.0 - ep.p_trl) * psize * s.wifi.data_rate_mbps;
    let laa_bits = ep.p_trl * ep.p_sl * (1.0 - ep.p_trw) * s.laa.data_airtime_us() * s.laa.data_rate_mbps;
    let tput_wifi_mbps = wifi_bits / t_e;
    let tput_laa_mbps = laa_bits / t_e;

    ThroughputReport {
        p_trw: ep.p_trw,
        p_sw: ep.p_sw,
        p_trl: ep.p_trl,
        p_sl: ep.p_sl,
        t_sw: ed.t_sw,
        t_cw: ed.t_cw,
        t_sl: ed.t_sl,
        t_cl: ed.t_cl,
        t_cc: ed.t_cc,
        t_e,
        tput_wifi_mbps,
        tput_laa_mbps,
        per_user_wifi_mbps: per_user(tput_wifi_mbps, s.n_wifi),
        per_user_laa_mbps: per_user(tput_laa_mbps, s.n_laa),
    }
}

/// Solve and evaluate a scenario in one step.
pub fn analyze(s: &Scenario, cfg: &SolverConfig) -> Result<(Solution, ThroughputReport)> {
    let sol = solve_coexistence(s, cfg)?;
    Ok((sol, coexistence_throughput(s, &sol)))
}

/// Saturation throughput of `n` Wi-Fi nodes alone on the channel.
pub fn wifi_only_throughput(n: u32, w: &WifiParams, cfg: &SolverConfig) -> Result<ThroughputReport> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one node is required"));
    }
    w.validate()?;
    let sol = solve_wifi_only(n, w.w0, w.m, cfg)?;
    let tau = sol.tau_w;
    let nf = f64::from(n);
    let p_tr = 1.0 - (1.0 - tau).powi(n as i32);
    let p_s = nf * tau * (1.0 - tau).powi(n as i32 - 1) / p_tr;
    let ed = event_durations(w, &LaaParams::default());
    let psize = w.derived_durations().psize_us;
    let slot_time = (1.0 - p_tr) * w.slot_us + p_tr * p_s * ed.t_sw + p_tr * (1.0 - p_s) * ed.t_cw;
    let tput = p_s * p_tr * psize * w.data_rate_mbps / slot_time;
    Ok(ThroughputReport {
        p_trw: p_tr,
        p_sw: p_s,
        p_trl: 0.0,
        p_sl: 0.0,
        t_sw: ed.t_sw,
        t_cw: ed.t_cw,
        t_sl: 0.0,
        t_cl: 0.0,
        t_cc: ed.t_cw,
        t_e: slot_time,
        tput_wifi_mbps: tput,
        tput_laa_mbps: 0.0,
        per_user_wifi_mbps: tput / nf,
        per_user_laa_mbps: 0.0,
    })
}
