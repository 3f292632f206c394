//! One-dimensional parameter sweeps.
//!
//! Each point pairs the coexistence result with a Wi-Fi-only network of
//! the same total size. Points are independent and may be evaluated in
//! parallel; results are returned in axis order.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioSpec;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::{Scenario, MAX_RETRY_LIMIT};
use crate::solver::{CoupledSystem, Solution, SolverConfig};
use crate::throughput::{coexistence_throughput, wifi_only_throughput, ThroughputReport};

/// Grid size used to look for additional fixed points at each sweep point.
pub const FIXED_POINT_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `N` nodes split evenly, `n_wifi = n_laa = N / 2`.
    TotalNodes,
    /// `n_wifi` takes the axis value and `n_laa = total - n_wifi`.
    NodeSplit,
    /// LAA retry limit `e_l`.
    RetryLimit,
    /// Wi-Fi detection probability `p_dw`.
    DetectionWifi,
    /// LAA detection probability `p_dl`.
    DetectionLaa,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::TotalNodes => "total_nodes",
            SweepAxis::NodeSplit => "node_split",
            SweepAxis::RetryLimit => "retry_limit",
            SweepAxis::DetectionWifi => "detection_wifi",
            SweepAxis::DetectionLaa => "detection_laa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub label: String,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Fixed total for [`SweepAxis::NodeSplit`].
    pub total: Option<u32>,
    pub base: Scenario,
}

fn integral(field: &str, v: f64) -> Result<u32> {
    if v.fract() != 0.0 || !(0.0..=f64::from(u32::MAX)).contains(&v) {
        return Err(Error::invalid(field, format!("{v} is not a non-negative integer")));
    }
    Ok(v as u32)
}

impl SweepSpec {
    /// Scenario evaluated at one axis value.
    pub fn point_scenario(&self, value: f64) -> Result<Scenario> {
        let field = format!("{}.values", self.label);
        let b = self.base;
        match self.axis {
            SweepAxis::TotalNodes => {
                let n = integral(&field, value)?;
                if n == 0 || n % 2 != 0 {
                    return Err(Error::invalid(field, format!("total_nodes needs a positive even value, got {n}")));
                }
                b.with_nodes(n / 2, n / 2)
            }
            SweepAxis::NodeSplit => {
                let total = self
                    .total
                    .ok_or_else(|| Error::invalid(format!("{}.total", self.label), "required for node_split"))?;
                let nw = integral(&field, value)?;
                if nw > total {
                    return Err(Error::invalid(field, format!("n_wifi {nw} exceeds total {total}")));
                }
                b.with_nodes(nw, total - nw)
            }
            SweepAxis::RetryLimit => {
                let e = integral(&field, value)?;
                if e > MAX_RETRY_LIMIT {
                    return Err(Error::invalid(field, format!("retry limit {e} exceeds {MAX_RETRY_LIMIT}")));
                }
                let mut s = b;
                s.laa = s.laa.with_retry_limit(e);
                s.validate()?;
                Ok(s)
            }
            SweepAxis::DetectionWifi => {
                let p_dl = b.p_dl;
                b.with_detection(value, p_dl)
                    .map_err(|_| Error::invalid(field, format!("{value} is not a probability")))
            }
            SweepAxis::DetectionLaa => {
                let p_dw = b.p_dw;
                b.with_detection(p_dw, value)
                    .map_err(|_| Error::invalid(field, format!("{value} is not a probability")))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid(format!("{}.values", self.label), "must not be empty"));
        }
        for &v in &self.values {
            self.point_scenario(v)?;
        }
        Ok(())
    }
}

/// Result at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Effective scenario after comparison-mode overrides.
    pub scenario: Scenario,
    /// Wi-Fi-only network with `n_wifi + n_laa` stations.
    pub baseline: Result<ThroughputReport>,
    pub coexistence: Result<(Solution, ThroughputReport)>,
    /// Number of distinct fixed points found by the grid scan.
    pub fixed_points: usize,
}

impl SweepPoint {
    pub fn converged(&self) -> bool {
        self.baseline.is_ok() && self.coexistence.is_ok()
    }

    pub fn multiple_fixed_points(&self) -> bool {
        self.fixed_points > 1
    }
}

fn evaluate(value: f64, s: Scenario, cfg: &SolverConfig) -> SweepPoint {
    let eff = s.effective();
    let baseline = wifi_only_throughput(eff.total_nodes(), &eff.wifi, cfg);
    let system = CoupledSystem::from_scenario(&eff);
    let coexistence = system.solve(cfg).map(|sol| {
        let report = coexistence_throughput(&eff, &sol);
        (sol, report)
    });
    let fixed_points = system.scan_fixed_points(FIXED_POINT_SCAN).len();
    SweepPoint {
        value,
        scenario: eff,
        baseline,
        coexistence,
        fixed_points,
    }
}

/// Evaluate every point of the sweep. Input errors abort the sweep;
/// numerical failures are reported per point.
pub fn run_sweep(spec: &SweepSpec, cfg: &SolverConfig, exec: Execution) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    spec.validate()?;
    let points = spec
        .values
        .iter()
        .map(|&v| Ok((v, spec.point_scenario(v)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(exec.map(&points, |(v, s)| evaluate(*v, *s, cfg)))
}

/// Axis value written as a TOML integer or float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum AxisValue {
    Int(i64),
    Float(f64),
}

impl AxisValue {
    fn get(self) -> f64 {
        match self {
            AxisValue::Int(v) => v as f64,
            AxisValue::Float(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepEntry {
    label: String,
    axis: SweepAxis,
    values: Vec<AxisValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total: Option<i64>,
    #[serde(default)]
    base: ScenarioSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sweep: Vec<SweepEntry>,
}

/// Parse a file of `[[sweep]]` entries. The base scenario's node counts may
/// be omitted; they default to one node of each kind and are replaced by
/// the axis where it controls them.
pub fn parse_sweeps(text: &str) -> Result<Vec<SweepSpec>> {
    let file: SweepFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_owned()))?;
    if file.sweep.is_empty() {
        return Err(Error::invalid("sweep", "file contains no sweeps"));
    }
    file.sweep
        .into_iter()
        .map(|entry| {
            let prefix = entry.label.clone();
            let mut base = entry.base.clone();
            base.n_wifi.get_or_insert(1);
            base.n_laa.get_or_insert(1);
            let base = base.to_scenario().map_err(|e| match e {
                Error::InvalidParameter { field, reason } => {
                    Error::invalid(format!("{prefix}.base.{field}"), reason)
                }
                other => other,
            })?;
            let total = entry
                .total
                .map(|t| {
                    u32::try_from(t).map_err(|_| Error::invalid(format!("{prefix}.total"), "must be non-negative"))
                })
                .transpose()?;
            let spec = SweepSpec {
                label: entry.label,
                axis: entry.axis,
                values: entry.values.into_iter().map(AxisValue::get).collect(),
                total,
                base,
            };
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}
