//! CSV rows for scenario runs and sweeps.
//!
//! Every file starts with a `# coexist <version>` line followed by a header
//! row. Rows echo the effective parameters (after comparison-mode
//! overrides). Numbers use Rust's shortest round-trip formatting, so output
//! is byte-stable for identical inputs. Cells that do not apply to a row are
//! left empty.

use coexist::mcsim::SimReport;
use coexist::sweep::SweepPoint;
use coexist::throughput::{event_durations, EventClass, ThroughputReport};
use coexist::{Error, Scenario, Solution, SolveMethod};

pub const VERSION_LINE: &str = concat!("# coexist ", env!("CARGO_PKG_VERSION"));

/// Ordered `(column, value)` pairs of one row.
#[derive(Debug, Clone, Default)]
pub struct Row(Vec<(&'static str, String)>);

impl Row {
    fn push(&mut self, column: &'static str, value: impl ToString) {
        self.0.push((column, value.to_string()));
    }

    fn blank(&mut self, columns: &[&'static str]) {
        for &c in columns {
            self.0.push((c, String::new()));
        }
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.0.iter().map(|(c, _)| *c).collect()
    }

    pub fn values(&self) -> Vec<&str> {
        self.0.iter().map(|(_, v)| v.as_str()).collect()
    }

    pub fn get(&self, column: &str) -> Option<&str> {
        self.0.iter().find(|(c, _)| *c == column).map(|(_, v)| v.as_str())
    }
}

/// Render rows as CSV with the version line and a header row.
pub fn to_csv(rows: &[Row]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.columns())?;
    }
    for r in rows {
        w.write_record(r.values())?;
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    let body = String::from_utf8(body).expect("csv output is utf-8");
    Ok(format!("{VERSION_LINE}\n{body}"))
}

fn push_params(row: &mut Row, s: &Scenario) {
    let w = &s.wifi;
    let l = &s.laa;
    row.push("n_wifi", s.n_wifi);
    row.push("n_laa", s.n_laa);
    row.push("comparison_mode", s.comparison_mode);
    row.push("wifi_w0", w.w0);
    row.push("wifi_m", w.m);
    row.push("wifi_payload_bytes", w.payload_bytes);
    row.push("wifi_data_rate_mbps", w.data_rate_mbps);
    row.push("wifi_control_rate_mbps", w.control_rate_mbps);
    row.push("wifi_phy_header_us", w.phy_header_us);
    row.push("wifi_mac_header_bytes", w.mac_header_bytes);
    row.push("wifi_ack_bytes", w.ack_bytes);
    row.push("wifi_difs_us", w.difs_us);
    row.push("wifi_sifs_us", w.sifs_us);
    row.push("wifi_slot_us", w.slot_us);
    row.push("wifi_prop_delay_us", w.prop_delay_us);
    row.push("laa_w0", l.w0);
    row.push("laa_m", l.m);
    row.push("laa_retry_limit", l.retry_limit);
    row.push("laa_defer_us", l.defer_us);
    row.push("laa_txop_us", l.txop_us);
    row.push("laa_next_tx_delay_us", l.next_tx_delay_us);
    row.push("laa_data_rate_mbps", l.data_rate_mbps);
    row.push("laa_pdcch_fraction", l.pdcch_fraction);
    row.push("p_dw", s.p_dw);
    row.push("p_dl", s.p_dl);
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::DampedIteration => "damped",
        SolveMethod::Bisection => "bisection",
    }
}

fn per_user(total: f64, n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        total / f64::from(n)
    }
}

const SOLUTION_COLUMNS: [&str; 7] = ["tau_w", "tau_l", "p_w", "p_l", "residual", "iterations", "method"];
const EVENT_COLUMNS: [&str; 4] = ["p_trw", "p_sw", "p_trl", "p_sl"];
const SIM_COLUMNS: [&str; 6] = [
    "seed",
    "horizon_events",
    "warmup_events",
    "stderr_tput_wifi_mbps",
    "stderr_tput_laa_mbps",
    "stderr_tau_w",
];
const SIM_TAIL: [&str; 3] = ["stderr_tau_l", "stderr_p_w", "stderr_p_l"];
const FREQ_COLUMNS: [&str; 6] = [
    "freq_idle",
    "freq_wifi_success",
    "freq_laa_success",
    "freq_wifi_collision",
    "freq_laa_collision",
    "freq_cross_collision",
];

fn push_tail(row: &mut Row, s: &Scenario, wifi: f64, laa: f64, t_e: f64) {
    let d = event_durations(&s.wifi, &s.laa);
    row.push("t_sw_us", d.t_sw);
    row.push("t_cw_us", d.t_cw);
    row.push("t_sl_us", d.t_sl);
    row.push("t_cl_us", d.t_cl);
    row.push("t_cc_us", d.t_cc);
    row.push("t_e_us", t_e);
    row.push("tput_wifi_mbps", wifi);
    row.push("tput_laa_mbps", laa);
    row.push("tput_total_mbps", wifi + laa);
    row.push("per_user_wifi_mbps", per_user(wifi, s.n_wifi));
    row.push("per_user_laa_mbps", per_user(laa, s.n_laa));
}

fn head(name: &str, engine: &str, status: &str, s: &Scenario) -> Row {
    let mut row = Row::default();
    row.push("scenario", name);
    row.push("engine", engine);
    row.push("status", status);
    push_params(&mut row, s);
    row
}

/// Row for a converged analytical solve. `s` must be the effective scenario.
pub fn analytic_row(name: &str, s: &Scenario, sol: &Solution, r: &ThroughputReport) -> Row {
    let mut row = head(name, "analytic", "ok", s);
    row.push("tau_w", sol.tau_w);
    row.push("tau_l", sol.tau_l);
    row.push("p_w", sol.p_w);
    row.push("p_l", sol.p_l);
    row.push("residual", sol.residual);
    row.push("iterations", sol.iterations);
    row.push("method", method_name(sol.method));
    row.push("p_trw", r.p_trw);
    row.push("p_sw", r.p_sw);
    row.push("p_trl", r.p_trl);
    row.push("p_sl", r.p_sl);
    let weights = coexist::throughput::EventWeights::from_probabilities(&coexist::throughput::EventProbabilities {
        p_trw: r.p_trw,
        p_sw: r.p_sw,
        p_trl: r.p_trl,
        p_sl: r.p_sl,
    });
    for (c, class) in FREQ_COLUMNS.iter().zip(EventClass::ALL) {
        row.push(c, weights.get(class));
    }
    row.blank(&SIM_COLUMNS);
    row.blank(&SIM_TAIL);
    push_tail(&mut row, s, r.tput_wifi_mbps, r.tput_laa_mbps, r.t_e);
    row
}

/// Row for a solve that failed to converge, reporting the last iterate.
pub fn failed_row(name: &str, s: &Scenario, err: &Error) -> Row {
    let mut row = head(name, "analytic", "no_convergence", s);
    match err {
        Error::NoConvergence {
            tau_w,
            tau_l,
            residual,
            iterations,
        } => {
            row.push("tau_w", tau_w);
            row.push("tau_l", tau_l);
            row.blank(&["p_w", "p_l"]);
            row.push("residual", residual);
            row.push("iterations", iterations);
            row.blank(&["method"]);
        }
        _ => row.blank(&SOLUTION_COLUMNS),
    }
    row.blank(&EVENT_COLUMNS);
    row.blank(&FREQ_COLUMNS);
    row.blank(&SIM_COLUMNS);
    row.blank(&SIM_TAIL);
    let d = event_durations(&s.wifi, &s.laa);
    row.push("t_sw_us", d.t_sw);
    row.push("t_cw_us", d.t_cw);
    row.push("t_sl_us", d.t_sl);
    row.push("t_cl_us", d.t_cl);
    row.push("t_cc_us", d.t_cc);
    row.blank(&[
        "t_e_us",
        "tput_wifi_mbps",
        "tput_laa_mbps",
        "tput_total_mbps",
        "per_user_wifi_mbps",
        "per_user_laa_mbps",
    ]);
    row
}

/// Row for a Monte-Carlo run. `tau_*` and `p_*` are the measured values.
pub fn simulate_row(name: &str, s: &Scenario, seed: u64, horizon: u64, warmup: u64, r: &SimReport) -> Row {
    let mut row = head(name, "simulate", "ok", s);
    row.push("tau_w", r.measured_tau_w);
    row.push("tau_l", r.measured_tau_l);
    row.push("p_w", r.measured_p_w);
    row.push("p_l", r.measured_p_l);
    row.blank(&["residual", "iterations", "method"]);
    row.blank(&EVENT_COLUMNS);
    for (c, class) in FREQ_COLUMNS.iter().zip(EventClass::ALL) {
        row.push(c, r.event_frequency(class));
    }
    row.push("seed", seed);
    row.push("horizon_events", horizon);
    row.push("warmup_events", warmup);
    row.push("stderr_tput_wifi_mbps", r.stderr.tput_wifi_mbps);
    row.push("stderr_tput_laa_mbps", r.stderr.tput_laa_mbps);
    row.push("stderr_tau_w", r.stderr.tau_w);
    row.push("stderr_tau_l", r.stderr.tau_l);
    row.push("stderr_p_w", r.stderr.p_w);
    row.push("stderr_p_l", r.stderr.p_l);
    push_tail(&mut row, s, r.tput_wifi_mbps, r.tput_laa_mbps, r.mean_event_time_us());
    row
}

pub fn sweep_status(p: &SweepPoint) -> &'static str {
    if !p.converged() {
        "no_convergence"
    } else if p.multiple_fixed_points() {
        "multiple_fixed_points"
    } else {
        "ok"
    }
}

/// Row for one sweep point: Wi-Fi-only baseline of `n_wifi + n_laa`
/// stations next to the coexistence network.
pub fn sweep_row(label: &str, axis: &str, p: &SweepPoint) -> Row {
    let s = &p.scenario;
    let mut row = Row::default();
    row.push("sweep", label);
    row.push("axis", axis);
    row.push("value", p.value);
    row.push("status", sweep_status(p));
    row.push("fixed_points", p.fixed_points);
    push_params(&mut row, s);
    let n = s.total_nodes();
    match &p.baseline {
        Ok(b) => {
            row.push("wifi_only_nodes", n);
            row.push("wifi_only_total_mbps", b.tput_wifi_mbps);
            row.push("wifi_only_per_user_mbps", per_user(b.tput_wifi_mbps, n));
        }
        Err(_) => {
            row.push("wifi_only_nodes", n);
            row.blank(&["wifi_only_total_mbps", "wifi_only_per_user_mbps"]);
        }
    }
    match &p.coexistence {
        Ok((sol, r)) => {
            row.push("tau_w", sol.tau_w);
            row.push("tau_l", sol.tau_l);
            row.push("p_w", sol.p_w);
            row.push("p_l", sol.p_l);
            row.push("residual", sol.residual);
            row.push("iterations", sol.iterations);
            row.push("t_e_us", r.t_e);
            row.push("coex_wifi_mbps", r.tput_wifi_mbps);
            row.push("coex_laa_mbps", r.tput_laa_mbps);
            row.push("coex_total_mbps", r.total_mbps());
            row.push("coex_per_user_wifi_mbps", per_user(r.tput_wifi_mbps, s.n_wifi));
            row.push("coex_per_user_laa_mbps", per_user(r.tput_laa_mbps, s.n_laa));
        }
        Err(e) => {
            if let Error::NoConvergence {
                tau_w,
                tau_l,
                residual,
                iterations,
            } = e
            {
                row.push("tau_w", tau_w);
                row.push("tau_l", tau_l);
                row.blank(&["p_w", "p_l"]);
                row.push("residual", residual);
                row.push("iterations", iterations);
            } else {
                row.blank(&["tau_w", "tau_l", "p_w", "p_l", "residual", "iterations"]);
            }
            row.blank(&[
                "t_e_us",
                "coex_wifi_mbps",
                "coex_laa_mbps",
                "coex_total_mbps",
                "coex_per_user_wifi_mbps",
                "coex_per_user_laa_mbps",
            ]);
        }
    }
    row
}

/// Row for one energy-detector evaluation.
pub fn detect_row(c: &coexist::EdConfig, snr_db: f64, probability: f64) -> Row {
    let mut row = Row::default();
    row.push("threshold_dbm", c.threshold_dbm);
    row.push("snr_db", snr_db);
    row.push("signal_power_dbm", c.signal_power_dbm);
    row.push("noise_power_dbm", c.noise_power_dbm);
    row.push("samples", c.samples);
    row.push("detection_probability", probability);
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use coexist::{analyze, LaaParams, SolverConfig, WifiParams};

    fn scenario() -> Scenario {
        Scenario::new(2, 1, WifiParams::default(), LaaParams::default())
            .unwrap()
            .with_comparison_mode(true)
    }

    #[test]
    fn rows_share_columns() {
        let s = scenario().effective();
        let (sol, r) = analyze(&s, &SolverConfig::default()).unwrap();
        let a = analytic_row("x", &s, &sol, &r);
        let err = Error::NoConvergence {
            tau_w: 0.1,
            tau_l: 0.2,
            residual: 1e-3,
            iterations: 5,
        };
        let f = failed_row("x", &s, &err);
        let sim = coexist::simulate(&coexist::SimConfig::new(s).with_horizon(20_000)).unwrap();
        let m = simulate_row("x", &s, 0, 20_000, 10_000, &sim);
        assert_eq!(a.columns(), f.columns());
        assert_eq!(a.columns(), m.columns());
    }

    #[test]
    fn effective_parameters_echoed() {
        let s = scenario().effective();
        let (sol, r) = analyze(&s, &SolverConfig::default()).unwrap();
        let row = analytic_row("x", &s, &sol, &r);
        assert_eq!(row.get("laa_retry_limit"), Some("0"));
        assert_eq!(row.get("laa_next_tx_delay_us"), Some("34"));
        assert_eq!(row.get("comparison_mode"), Some("true"));
    }

    #[test]
    fn csv_starts_with_version() {
        let mut row = Row::default();
        row.push("a", "x,y");
        let text = to_csv(&[row]).unwrap();
        assert_eq!(text, format!("{VERSION_LINE}\na\n\"x,y\"\n"));
    }
}
