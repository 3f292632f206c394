//! TOML scenario files.
//!
//! A file holds either one scenario at the top level or a list of named
//! scenarios under `[[scenario]]`. Every parameter is optional and falls
//! back to the Table defaults; LAA parameters may start from a priority
//! class preset. Example:
//!
//! ```toml
//! name = "table4_case3_r9"
//! n_wifi = 1
//! n_laa = 1
//! comparison_mode = true   # retry_limit = 0, next_tx_delay_us = difs_us
//!
//! [wifi]
//! w0 = 16
//! m = 2
//! data_rate_mbps = 9.0
//!
//! [laa]
//! class = 3                # defer 43 µs, W'0 16, m' 2, TXOP 8 ms
//! data_rate_mbps = 7.8
//!
//! [detection]
//! p_dw = 1.0               # or a `wifi_ed = { ... }` energy detector
//! p_dl = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::ed::{detection_probability, EdConfig};
use crate::error::{Error, Result};
use crate::params::{LaaParams, PriorityClass, Scenario, WifiParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WifiSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload_bytes: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_rate_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_rate_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phy_header_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mac_header_bytes: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ack_bytes: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difs_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sifs_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop_delay_us: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaaSpec {
    /// Priority class preset applied before the explicit fields.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<i64>,
    /// Use the 10 ms TXOP for classes 3 and 4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_txop: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry_limit: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defer_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub txop_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_tx_delay_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_rate_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pdcch_fraction: Option<f64>,
}

/// Energy detector settings. Give either `signal_power_dbm` or `snr_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdSpec {
    pub threshold_dbm: f64,
    pub noise_power_dbm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub samples: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_dw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_dl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wifi_ed: Option<EdSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laa_ed: Option<EdSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_wifi: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_laa: Option<i64>,
    #[serde(default)]
    pub comparison_mode: bool,
    #[serde(default)]
    pub wifi: WifiSpec,
    #[serde(default)]
    pub laa: LaaSpec,
    #[serde(default)]
    pub detection: DetectionSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioCollection {
    scenario: Vec<ScenarioSpec>,
}

/// A scenario with the name it carries in its file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: Scenario,
}

fn count(field: &str, v: i64) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(field, format!("must be a non-negative integer, got {v}")))
}

fn ed_probability(field: &str, spec: &EdSpec) -> Result<f64> {
    let signal = match (spec.signal_power_dbm, spec.snr_db) {
        (Some(s), None) => s,
        (None, Some(snr)) => spec.noise_power_dbm + snr,
        _ => {
            return Err(Error::invalid(
                field,
                "give exactly one of signal_power_dbm or snr_db",
            ))
        }
    };
    let cfg = EdConfig {
        threshold_dbm: spec.threshold_dbm,
        signal_power_dbm: signal,
        noise_power_dbm: spec.noise_power_dbm,
        samples: count(&format!("{field}.samples"), spec.samples)?,
    };
    cfg.validate()
        .map_err(|e| match e {
            Error::InvalidParameter { field: f, reason } => {
                Error::invalid(f.replacen("ed", field, 1), reason)
            }
            other => other,
        })?;
    Ok(detection_probability(&cfg))
}

impl WifiSpec {
    pub fn to_params(&self) -> Result<WifiParams> {
        let mut w = WifiParams::default();
        if let Some(v) = self.w0 {
            w.w0 = count("wifi.w0", v)?;
        }
        if let Some(v) = self.m {
            w.m = count("wifi.m", v)?;
        }
        if let Some(v) = self.payload_bytes {
            w.payload_bytes = count("wifi.payload_bytes", v)?;
        }
        if let Some(v) = self.mac_header_bytes {
            w.mac_header_bytes = count("wifi.mac_header_bytes", v)?;
        }
        if let Some(v) = self.ack_bytes {
            w.ack_bytes = count("wifi.ack_bytes", v)?;
        }
        w.data_rate_mbps = self.data_rate_mbps.unwrap_or(w.data_rate_mbps);
        w.control_rate_mbps = self.control_rate_mbps.unwrap_or(w.control_rate_mbps);
        w.phy_header_us = self.phy_header_us.unwrap_or(w.phy_header_us);
        w.difs_us = self.difs_us.unwrap_or(w.difs_us);
        w.sifs_us = self.sifs_us.unwrap_or(w.sifs_us);
        w.slot_us = self.slot_us.unwrap_or(w.slot_us);
        w.prop_delay_us = self.prop_delay_us.unwrap_or(w.prop_delay_us);
        w.validate()?;
        Ok(w)
    }

    pub fn from_params(w: &WifiParams) -> Self {
        WifiSpec {
            w0: Some(w.w0.into()),
            m: Some(w.m.into()),
            payload_bytes: Some(w.payload_bytes.into()),
            data_rate_mbps: Some(w.data_rate_mbps),
            control_rate_mbps: Some(w.control_rate_mbps),
            phy_header_us: Some(w.phy_header_us),
            mac_header_bytes: Some(w.mac_header_bytes.into()),
            ack_bytes: Some(w.ack_bytes.into()),
            difs_us: Some(w.difs_us),
            sifs_us: Some(w.sifs_us),
            slot_us: Some(w.slot_us),
            prop_delay_us: Some(w.prop_delay_us),
        }
    }
}

impl LaaSpec {
    pub fn to_params(&self) -> Result<LaaParams> {
        let class = match self.class {
            None => PriorityClass::P3,
            Some(id) => u8::try_from(id)
                .ok()
                .and_then(|id| PriorityClass::from_id(id).ok())
                .ok_or_else(|| Error::invalid("laa.class", format!("unknown priority class {id}")))?,
        };
        let mut l = LaaParams::priority_class(class, self.long_txop.unwrap_or(false));
        if let Some(v) = self.w0 {
            l.w0 = count("laa.w0", v)?;
        }
        if let Some(v) = self.m {
            l.m = count("laa.m", v)?;
        }
        if let Some(v) = self.retry_limit {
            l.retry_limit = count("laa.retry_limit", v)?;
        }
        l.defer_us = self.defer_us.unwrap_or(l.defer_us);
        l.txop_us = self.txop_us.unwrap_or(l.txop_us);
        l.next_tx_delay_us = self.next_tx_delay_us.unwrap_or(l.next_tx_delay_us);
        l.data_rate_mbps = self.data_rate_mbps.unwrap_or(l.data_rate_mbps);
        l.pdcch_fraction = self.pdcch_fraction.unwrap_or(l.pdcch_fraction);
        l.validate()?;
        Ok(l)
    }

    pub fn from_params(l: &LaaParams) -> Self {
        LaaSpec {
            class: None,
            long_txop: None,
            w0: Some(l.w0.into()),
            m: Some(l.m.into()),
            retry_limit: Some(l.retry_limit.into()),
            defer_us: Some(l.defer_us),
            txop_us: Some(l.txop_us),
            next_tx_delay_us: Some(l.next_tx_delay_us),
            data_rate_mbps: Some(l.data_rate_mbps),
            pdcch_fraction: Some(l.pdcch_fraction),
        }
    }
}

impl DetectionSpec {
    fn resolve(&self) -> Result<(f64, f64)> {
        let p_dw = match (self.p_dw, &self.wifi_ed) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid("detection.p_dw", "conflicts with detection.wifi_ed"))
            }
            (Some(p), None) => p,
            (None, Some(ed)) => ed_probability("detection.wifi_ed", ed)?,
            (None, None) => 1.0,
        };
        let p_dl = match (self.p_dl, &self.laa_ed) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid("detection.p_dl", "conflicts with detection.laa_ed"))
            }
            (Some(p), None) => p,
            (None, Some(ed)) => ed_probability("detection.laa_ed", ed)?,
            (None, None) => 1.0,
        };
        Ok((p_dw, p_dl))
    }
}

impl ScenarioSpec {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let n_wifi = count(
            "n_wifi",
            self.n_wifi.ok_or_else(|| Error::invalid("n_wifi", "missing"))?,
        )?;
        let n_laa = count(
            "n_laa",
            self.n_laa.ok_or_else(|| Error::invalid("n_laa", "missing"))?,
        )?;
        let (p_dw, p_dl) = self.detection.resolve()?;
        let s = Scenario {
            n_wifi,
            n_laa,
            wifi: self.wifi.to_params()?,
            laa: self.laa.to_params()?,
            p_dw,
            p_dl,
            comparison_mode: self.comparison_mode,
        };
        s.validate()?;
        Ok(s)
    }

    /// Fully explicit spec for a scenario.
    pub fn from_scenario(name: Option<&str>, s: &Scenario) -> Self {
        ScenarioSpec {
            name: name.map(str::to_owned),
            n_wifi: Some(s.n_wifi.into()),
            n_laa: Some(s.n_laa.into()),
            comparison_mode: s.comparison_mode,
            wifi: WifiSpec::from_params(&s.wifi),
            laa: LaaSpec::from_params(&s.laa),
            detection: DetectionSpec {
                p_dw: Some(s.p_dw),
                p_dl: Some(s.p_dl),
                wifi_ed: None,
                laa_ed: None,
            },
        }
    }
}

fn parse_error(e: toml::de::Error) -> Error {
    Error::Parse(e.to_string().trim_end().to_owned())
}

/// Parse a scenario file holding one scenario or a `[[scenario]]` list.
pub fn parse_scenarios(text: &str) -> Result<Vec<NamedScenario>> {
    let table: toml::Table = toml::from_str(text).map_err(parse_error)?;
    let specs = if table.contains_key("scenario") {
        let c: ScenarioCollection = toml::from_str(text).map_err(parse_error)?;
        c.scenario
    } else {
        vec![toml::from_str::<ScenarioSpec>(text).map_err(parse_error)?]
    };
    if specs.is_empty() {
        return Err(Error::invalid("scenario", "file contains no scenarios"));
    }
    let many = specs.len() > 1;
    specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let scenario = spec.to_scenario().map_err(|e| match e {
                Error::InvalidParameter { field, reason } if many => {
                    Error::invalid(format!("scenario[{i}].{field}"), reason)
                }
                other => other,
            })?;
            let name = spec.name.clone().unwrap_or_else(|| format!("scenario{i}"));
            Ok(NamedScenario { name, scenario })
        })
        .collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut all = parse_scenarios(text)?;
    if all.len() != 1 {
        return Err(Error::invalid("scenario", "expected exactly one scenario"));
    }
    Ok(all.remove(0).scenario)
}

/// Serialize a scenario with every parameter written out.
pub fn to_toml(name: Option<&str>, s: &Scenario) -> String {
    toml::to_string(&ScenarioSpec::from_scenario(name, s)).expect("scenario spec is serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::load_priority_class;

    #[test]
    fn defaults_fill_missing_fields() {
        let s = parse_scenario("n_wifi = 2\nn_laa = 1\n").unwrap();
        assert_eq!(s.wifi, WifiParams::default());
        assert_eq!(s.laa, load_priority_class(3).unwrap());
        assert_eq!((s.p_dw, s.p_dl), (1.0, 1.0));
        assert!(!s.comparison_mode);
    }

    #[test]
    fn class_preset_then_overrides() {
        let s = parse_scenario(
            "n_wifi = 1\nn_laa = 1\n[laa]\nclass = 1\ndata_rate_mbps = 15.6\nretry_limit = 3\n",
        )
        .unwrap();
        assert_eq!(s.laa.w0, 4);
        assert_eq!(s.laa.txop_us, 2000.0);
        assert_eq!(s.laa.retry_limit, 3);
        assert_eq!(s.laa.data_rate_mbps, 15.6);
    }

    #[test]
    fn negative_txop_names_field() {
        let err = parse_scenario("n_wifi = 1\nn_laa = 1\n[laa]\ntxop_us = -2000.0\n").unwrap_err();
        assert!(err.to_string().contains("laa.txop_us"), "{err}");
    }

    #[test]
    fn negative_count_names_field() {
        let err = parse_scenario("n_wifi = 1\nn_laa = 1\n[wifi]\nw0 = -4\n").unwrap_err();
        assert!(err.to_string().contains("wifi.w0"), "{err}");
        let err = parse_scenario("n_wifi = -1\nn_laa = 1\n").unwrap_err();
        assert!(err.to_string().contains("n_wifi"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_scenario("n_wifi = 1\nn_laa = 1\n[wifi]\nw00 = 4\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("w00"), "{err}");
    }

    #[test]
    fn energy_detector_sets_probability() {
        let s = parse_scenario(
            "n_wifi = 1\nn_laa = 1\n[detection.wifi_ed]\nthreshold_dbm = -72.0\nsnr_db = 22.0\nnoise_power_dbm = -94.0\nsamples = 680\n",
        )
        .unwrap();
        assert!((s.p_dw - 0.546).abs() < 0.005, "{}", s.p_dw);
        assert_eq!(s.p_dl, 1.0);
    }

    #[test]
    fn conflicting_detection_rejected() {
        let text = "n_wifi = 1\nn_laa = 1\n[detection]\np_dw = 0.5\n[detection.wifi_ed]\nthreshold_dbm = -72.0\nsnr_db = 22.0\nnoise_power_dbm = -94.0\nsamples = 680\n";
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("detection.p_dw"), "{err}");
    }

    #[test]
    fn collections_are_named_and_indexed() {
        let text = "[[scenario]]\nname = \"a\"\nn_wifi = 1\nn_laa = 0\n[[scenario]]\nn_wifi = 1\nn_laa = 1\n[scenario.laa]\ntxop_us = 0.0\n";
        let err = parse_scenarios(text).unwrap_err();
        assert!(err.to_string().contains("scenario[1].laa.txop_us"), "{err}");
        let ok = parse_scenarios("[[scenario]]\nname = \"a\"\nn_wifi = 1\nn_laa = 0\n[[scenario]]\nn_wifi = 2\nn_laa = 2\n").unwrap();
        assert_eq!(ok[0].name, "a");
        assert_eq!(ok[1].name, "scenario1");
    }
}
