//! Slot-level Monte-Carlo simulation of saturated Wi-Fi and LAA nodes.
//!
//! The simulator uses the same abstraction as the analytical model: time is
//! a sequence of channel events. In each event every node whose counter is
//! 0 transmits; the event is an idle slot, a success, an intra-network
//! collision or a cross collision, with the durations of the analytical
//! model. Nodes that did not transmit decrement their counter once per
//! event, i.e. counters are held through busy periods and resume after.
//! Transmitters then update their backoff stage and draw a fresh counter.
//!
//! With imperfect cross detection, a node that is the only transmitter of
//! its own network but overlaps the other network registers the failure
//! (and doubles its window) only with its detection probability; otherwise
//! it proceeds as after a success. The event itself is still a cross
//! collision and delivers nothing.

use std::io::Write;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::markov::BackoffChain;
use crate::params::Scenario;
use crate::throughput::{event_durations, EventClass, EventDurations};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub horizon_events: u64,
    pub seed: u64,
    pub warmup_events: u64,
}

impl SimConfig {
    pub fn new(scenario: Scenario) -> Self {
        SimConfig {
            scenario,
            horizon_events: 2_000_000,
            seed: 0,
            warmup_events: 10_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon_events: u64) -> Self {
        self.horizon_events = horizon_events;
        self
    }

    pub fn with_warmup(mut self, warmup_events: u64) -> Self {
        self.warmup_events = warmup_events;
        self
    }

    pub fn measured_events(&self) -> u64 {
        self.horizon_events.saturating_sub(self.warmup_events)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.horizon_events <= self.warmup_events {
            return Err(Error::invalid(
                "sim.horizon_events",
                "must exceed the number of warm-up events",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventCounts(pub [u64; 6]);

impl EventCounts {
    pub fn get(&self, class: EventClass) -> u64 {
        self.0[class.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Batch-means standard errors of the reported metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStderr {
    pub tput_wifi_mbps: f64,
    pub tput_laa_mbps: f64,
    pub tau_w: f64,
    pub tau_l: f64,
    pub p_w: f64,
    pub p_l: f64,
    pub event_frequency: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub tput_wifi_mbps: f64,
    pub tput_laa_mbps: f64,
    /// Transmissions per node per event.
    pub measured_tau_w: f64,
    pub measured_tau_l: f64,
    /// Share of transmissions that registered a collision.
    pub measured_p_w: f64,
    pub measured_p_l: f64,
    pub event_counts: EventCounts,
    pub stderr: SimStderr,
    pub events: u64,
    pub simulated_time_us: f64,
}

impl SimReport {
    pub fn event_frequency(&self, class: EventClass) -> f64 {
        self.event_counts.get(class) as f64 / self.events as f64
    }

    pub fn mean_event_time_us(&self) -> f64 {
        self.simulated_time_us / self.events as f64
    }

    pub fn total_mbps(&self) -> f64 {
        self.tput_wifi_mbps + self.tput_laa_mbps
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    events: u64,
    time_us: f64,
    bits_w: f64,
    bits_l: f64,
    attempts_w: u64,
    collisions_w: u64,
    attempts_l: u64,
    collisions_l: u64,
    counts: [u64; 6],
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.events += o.events;
        self.time_us += o.time_us;
        self.bits_w += o.bits_w;
        self.bits_l += o.bits_l;
        self.attempts_w += o.attempts_w;
        self.collisions_w += o.collisions_w;
        self.attempts_l += o.attempts_l;
        self.collisions_l += o.collisions_l;
        for (a, b) in self.counts.iter_mut().zip(o.counts) {
            *a += b;
        }
    }

    /// `[tput_w, tput_l, tau_w, tau_l, p_w, p_l, freq x 6]`
    fn metrics(&self, n_w: u32, n_l: u32) -> [f64; 12] {
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        let ev = self.events as f64;
        let mut out = [0.0; 12];
        out[0] = ratio(self.bits_w, self.time_us);
        out[1] = ratio(self.bits_l, self.time_us);
        out[2] = ratio(self.attempts_w as f64, ev * f64::from(n_w));
        out[3] = ratio(self.attempts_l as f64, ev * f64::from(n_l));
        out[4] = ratio(self.collisions_w as f64, self.attempts_w as f64);
        out[5] = ratio(self.collisions_l as f64, self.attempts_l as f64);
        for (i, c) in self.counts.iter().enumerate() {
            out[6 + i] = ratio(*c as f64, ev);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Station {
    laa: bool,
    stage: u32,
    counter: u64,
}

struct Engine {
    n_w: u32,
    n_l: u32,
    wifi: BackoffChain,
    laa: BackoffChain,
    wifi_draw: Vec<Uniform<u64>>,
    laa_draw: Vec<Uniform<u64>>,
    durations: EventDurations,
    slot_us: f64,
    wifi_bits: f64,
    laa_bits: f64,
    p_dw: f64,
    p_dl: f64,
    stations: Vec<Station>,
    rng: ChaCha8Rng,
}

fn stage_draws(chain: &BackoffChain) -> Vec<Uniform<u64>> {
    (0..=chain.last_stage())
        .map(|j| Uniform::new(0, chain.window(j)).expect("window is at least 1"))
        .collect()
}

/// Decide whether a transmitter that collided only with the other network
/// registers the collision.
fn registers(rng: &mut ChaCha8Rng, p_detect: f64) -> bool {
    if p_detect >= 1.0 {
        true
    } else if p_detect <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p_detect
    }
}

impl Engine {
    fn new(cfg: &SimConfig, with_detection: bool) -> Self {
        let s = cfg.scenario.effective();
        let wifi = BackoffChain::wifi(s.wifi.w0, s.wifi.m);
        let laa = BackoffChain::laa(s.laa.w0, s.laa.m, s.laa.retry_limit);
        let (p_dw, p_dl) = if with_detection { (s.p_dw, s.p_dl) } else { (1.0, 1.0) };
        let mut e = Engine {
            n_w: s.n_wifi,
            n_l: s.n_laa,
            wifi,
            laa,
            wifi_draw: stage_draws(&wifi),
            laa_draw: stage_draws(&laa),
            durations: event_durations(&s.wifi, &s.laa),
            slot_us: s.wifi.slot_us,
            wifi_bits: s.wifi.derived_durations().psize_us * s.wifi.data_rate_mbps,
            laa_bits: s.laa.data_airtime_us() * s.laa.data_rate_mbps,
            p_dw,
            p_dl,
            stations: Vec::with_capacity(s.total_nodes() as usize),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        };
        for i in 0..s.total_nodes() {
            let laa = i >= s.n_wifi;
            let counter = e.draw(laa, 0);
            e.stations.push(Station {
                laa,
                stage: 0,
                counter,
            });
        }
        e
    }

    fn draw(&mut self, laa: bool, stage: u32) -> u64 {
        let d = if laa {
            &self.laa_draw[stage as usize]
        } else {
            &self.wifi_draw[stage as usize]
        };
        d.sample(&mut self.rng)
    }

    fn classify(&self, kw: u32, kl: u32) -> (EventClass, f64) {
        let d = &self.durations;
        match (kw, kl) {
            (0, 0) => (EventClass::Idle, self.slot_us),
            (1, 0) => (EventClass::WifiSuccess, d.t_sw),
            (0, 1) => (EventClass::LaaSuccess, d.t_sl),
            (_, 0) => (EventClass::WifiCollision, d.t_cw),
            (0, _) => (EventClass::LaaCollision, d.t_cl),
            _ => (EventClass::CrossCollision, d.t_cc),
        }
    }

    fn step(&mut self, tally: &mut Tally) -> (EventClass, f64) {
        let (mut kw, mut kl) = (0u32, 0u32);
        for st in &self.stations {
            if st.counter == 0 {
                if st.laa {
                    kl += 1;
                } else {
                    kw += 1;
                }
            }
        }
        let (class, duration) = self.classify(kw, kl);
        tally.events += 1;
        tally.time_us += duration;
        tally.counts[class.index()] += 1;
        match class {
            EventClass::WifiSuccess => tally.bits_w += self.wifi_bits,
            EventClass::LaaSuccess => tally.bits_l += self.laa_bits,
            _ => {}
        }

        for i in 0..self.stations.len() {
            let st = self.stations[i];
            if st.counter > 0 {
                self.stations[i].counter -= 1;
                continue;
            }
            let (own, other, p_detect, chain) = if st.laa {
                (kl, kw, self.p_dl, self.laa)
            } else {
                (kw, kl, self.p_dw, self.wifi)
            };
            let collided = if own > 1 {
                true
            } else if other > 0 {
                registers(&mut self.rng, p_detect)
            } else {
                false
            };
            if st.laa {
                tally.attempts_l += 1;
                tally.collisions_l += u64::from(collided);
            } else {
                tally.attempts_w += 1;
                tally.collisions_w += u64::from(collided);
            }
            let stage = if collided && st.stage < chain.last_stage() {
                st.stage + 1
            } else {
                0
            };
            let counter = self.draw(st.laa, stage);
            self.stations[i] = Station {
                laa: st.laa,
                stage,
                counter,
            };
        }
        (class, duration)
    }

    fn write_header(&self, w: &mut dyn Write) -> std::io::Result<()> {
        write!(w, "event,class,duration_us")?;
        for (i, st) in self.stations.iter().enumerate() {
            let (tag, idx) = if st.laa {
                ("laa", i - self.n_w as usize)
            } else {
                ("wifi", i)
            };
            write!(w, ",{tag}{idx}_stage,{tag}{idx}_counter")?;
        }
        writeln!(w)
    }
}

fn run(cfg: &SimConfig, with_detection: bool, mut trace: Option<&mut dyn Write>) -> Result<SimReport> {
    cfg.validate()?;
    let mut engine = Engine::new(cfg, with_detection);
    let io = |e: std::io::Error| Error::Io(e.to_string());

    if let Some(w) = trace.as_deref_mut() {
        engine.write_header(w).map_err(io)?;
    }
    let mut snapshot = Vec::new();
    let mut scratch = Tally::default();
    for _ in 0..cfg.warmup_events {
        engine.step(&mut scratch);
    }

    let measured = cfg.measured_events();
    let batches = BATCHES.min(measured);
    let mut batch_tallies = Vec::with_capacity(batches as usize);
    let mut done = 0u64;
    for b in 0..batches {
        let end = (b + 1) * measured / batches;
        let mut tally = Tally::default();
        while done < end {
            if let Some(w) = trace.as_deref_mut() {
                snapshot.clear();
                snapshot.extend(engine.stations.iter().map(|s| (s.stage, s.counter)));
                let (class, duration) = engine.step(&mut tally);
                write!(w, "{done},{},{duration}", class.name()).map_err(io)?;
                for (stage, counter) in &snapshot {
                    write!(w, ",{stage},{counter}").map_err(io)?;
                }
                writeln!(w).map_err(io)?;
            } else {
                engine.step(&mut tally);
            }
            done += 1;
        }
        batch_tallies.push(tally);
    }

    let mut total = Tally::default();
    for t in &batch_tallies {
        total.add(t);
    }
    let (n_w, n_l) = (engine.n_w, engine.n_l);
    let point = total.metrics(n_w, n_l);
    let per_batch: Vec<[f64; 12]> = batch_tallies.iter().map(|t| t.metrics(n_w, n_l)).collect();
    let se = batch_stderr(&per_batch);

    let mut event_frequency = [0.0; 6];
    event_frequency.copy_from_slice(&se[6..]);
    Ok(SimReport {
        tput_wifi_mbps: point[0],
        tput_laa_mbps: point[1],
        measured_tau_w: point[2],
        measured_tau_l: point[3],
        measured_p_w: point[4],
        measured_p_l: point[5],
        event_counts: EventCounts(total.counts),
        stderr: SimStderr {
            tput_wifi_mbps: se[0],
            tput_laa_mbps: se[1],
            tau_w: se[2],
            tau_l: se[3],
            p_w: se[4],
            p_l: se[5],
            event_frequency,
        },
        events: total.events,
        simulated_time_us: total.time_us,
    })
}

fn batch_stderr(batches: &[[f64; 12]]) -> [f64; 12] {
    let mut out = [0.0; 12];
    let b = batches.len();
    if b < 2 {
        return out;
    }
    for (i, o) in out.iter_mut().enumerate() {
        let mean = batches.iter().map(|x| x[i]).sum::<f64>() / b as f64;
        let var = batches.iter().map(|x| (x[i] - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
        *o = (var / b as f64).sqrt();
    }
    out
}

/// Simulate with perfect cross detection.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    run(cfg, false, None)
}

/// Simulate with the scenario's cross detection probabilities.
pub fn simulate_with_detection(cfg: &SimConfig) -> Result<SimReport> {
    run(cfg, true, None)
}

/// Like [`simulate_with_detection`], also writing one CSV line per measured
/// event with every node's stage and counter before the event.
pub fn simulate_with_trace(cfg: &SimConfig, trace: &mut dyn Write) -> Result<SimReport> {
    run(cfg, true, Some(trace))
}

/// Independent replications with seeds `seed, seed + 1, ...`.
pub fn replicate(cfg: &SimConfig, count: u64, exec: Execution) -> Result<Vec<SimReport>> {
    let configs: Vec<SimConfig> = (0..count)
        .map(|i| cfg.with_seed(cfg.seed.wrapping_add(i)))
        .collect();
    exec.map(&configs, simulate_with_detection)
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{LaaParams, WifiParams};

    fn small(n_w: u32, n_l: u32) -> SimConfig {
        let s = Scenario::new(n_w, n_l, WifiParams::default(), LaaParams::default()).unwrap();
        SimConfig::new(s).with_horizon(20_000).with_warmup(1_000).with_seed(7)
    }

    #[test]
    fn counts_cover_measured_events() {
        let r = simulate(&small(3, 2)).unwrap();
        assert_eq!(r.event_counts.total(), 19_000);
        assert_eq!(r.events, 19_000);
        assert!(r.tput_wifi_mbps >= 0.0 && r.tput_laa_mbps >= 0.0);
    }

    #[test]
    fn lone_node_never_collides() {
        let r = simulate(&small(1, 0)).unwrap();
        assert_eq!(r.measured_p_w, 0.0);
        assert_eq!(r.event_counts.get(EventClass::WifiCollision), 0);
        assert_eq!(r.event_counts.get(EventClass::CrossCollision), 0);
        assert_eq!(r.measured_tau_l, 0.0);
    }

    #[test]
    fn same_seed_same_report() {
        let a = simulate(&small(2, 2)).unwrap();
        let b = simulate(&small(2, 2)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&small(2, 2).with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn warmup_must_be_shorter_than_horizon() {
        let cfg = small(1, 1).with_horizon(10).with_warmup(10);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { .. })));
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn trace_has_one_line_per_event() {
        let cfg = small(2, 1).with_horizon(1_050).with_warmup(1_000);
        let mut buf = Vec::new();
        let r = simulate_with_trace(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "event,class,duration_us,wifi0_stage,wifi0_counter,wifi1_stage,wifi1_counter,laa0_stage,laa0_counter"
        );
        assert_eq!(lines.len(), 51);
        assert_eq!(lines[1].split(',').count(), 9);
        // tracing must not perturb the random stream
        assert_eq!(r, simulate_with_detection(&cfg).unwrap());
    }

    #[test]
    fn replications_use_consecutive_seeds() {
        let cfg = small(2, 1);
        let reps = replicate(&cfg, 3, Execution::Sequential).unwrap();
        let par = replicate(&cfg, 3, Execution::Parallel).unwrap();
        assert_eq!(reps, par);
        assert_eq!(reps[1], simulate_with_detection(&cfg.with_seed(8)).unwrap());
    }
}
