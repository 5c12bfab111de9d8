//! Scenario documents (TOML) and output writers.
//!
//! ```toml
//! duration_s = 60.0
//! seed = 42
//!
//! [medium]
//! path_loss_exponent = 2.0
//!
//! [traffic]
//! min_s = 0.5
//! max_s = 2.0
//! packet_airtime_s = 0.004
//!
//! [[nodes]]
//! id = 1
//! x_m = 0.0
//! y_m = 0.0
//! antenna = { type = "cardioid", orientation_deg = 60.0, peak_gain_dbi = 6.0, beamwidth_deg = 180.0 }
//! radio = { sensitivity_dbm = -90.0 }
//! ```
//!
//! Omitted keys take the defaults below. Unknown keys are rejected.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaConfig, ParametricFamily, PatternFamily};
use crate::engine::{Scenario, TrafficModel};
use crate::error::{Error, Result, Violation};
use crate::geometry::{normalize_deg, Position};
use crate::linkbudget::{MediumParams, RadioConfig};
use crate::node::{NodeId, NodeState};

pub const DEFAULT_PACKET_AIRTIME_S: f64 = 0.004;
pub const DEFAULT_DURATION_S: f64 = 60.0;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub medium: MediumDoc,
    #[serde(default)]
    pub traffic: TrafficDoc,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference_threshold_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_airtime_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default)]
    pub antenna: AntennaDoc,
    #[serde(default)]
    pub radio: RadioDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaKind {
    Omni,
    Cardioid,
    Dipole,
    Table,
}

impl AntennaKind {
    fn of(p: &PatternFamily) -> Self {
        match p {
            PatternFamily::Omni => AntennaKind::Omni,
            PatternFamily::Cardioid { .. } => AntennaKind::Cardioid,
            PatternFamily::Dipole { .. } => AntennaKind::Dipole,
            PatternFamily::Table { .. } => AntennaKind::Table,
        }
    }

    fn default_beamwidth_deg(self) -> f64 {
        match self {
            AntennaKind::Cardioid => 180.0,
            AntennaKind::Dipole => 90.0,
            AntennaKind::Omni | AntennaKind::Table => 360.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaDoc {
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AntennaKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_gain_dbi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamwidth_deg: Option<f64>,
    /// `[angle_deg, relative_gain_db]` pairs, table patterns only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

impl AntennaDoc {
    /// Build an antenna from this document. With a `base`, missing fields
    /// are taken from it (partial updates); without one, defaults apply and
    /// directional antennas must state their orientation.
    pub fn resolve(&self, base: Option<&AntennaConfig>, path: &str, out: &mut Vec<Violation>) -> Option<AntennaConfig> {
        let base_kind = base.map(|b| AntennaKind::of(&b.pattern));
        let kind = self.kind.or(base_kind).unwrap_or(AntennaKind::Omni);
        let errors_before = out.len();

        let orientation = match (self.orientation_deg, base) {
            (Some(o), _) => o,
            (None, Some(b)) => b.orientation_deg,
            (None, None) if kind != AntennaKind::Omni => {
                out.push(Violation::new(
                    format!("{path}.orientation_deg"),
                    format!("required for a {} antenna", kind_name(kind)),
                ));
                0.0
            }
            (None, None) => 0.0,
        };
        let orientation = match normalize_deg(orientation) {
            Ok(o) => o,
            Err(_) => {
                out.push(Violation::new(format!("{path}.orientation_deg"), "must be finite"));
                0.0
            }
        };
        let peak_gain_dbi = self.peak_gain_dbi.or(base.map(|b| b.peak_gain_dbi)).unwrap_or(0.0);
        let beamwidth_deg = match self.beamwidth_deg {
            Some(b) => b,
            None if base_kind == Some(kind) => base.map(|b| b.beamwidth_deg).unwrap_or(360.0),
            None => kind.default_beamwidth_deg(),
        };

        let pattern = match kind {
            AntennaKind::Omni => {
                if self.samples.is_some() {
                    out.push(Violation::new(
                        format!("{path}.samples"),
                        "only valid for table antennas",
                    ));
                }
                Some(PatternFamily::Omni)
            }
            AntennaKind::Cardioid | AntennaKind::Dipole => {
                if self.samples.is_some() {
                    out.push(Violation::new(
                        format!("{path}.samples"),
                        "only valid for table antennas",
                    ));
                }
                let family = if kind == AntennaKind::Cardioid {
                    ParametricFamily::Cardioid
                } else {
                    ParametricFamily::Dipole
                };
                match crate::antenna::calibrate_exponent(family, beamwidth_deg) {
                    Ok(k) => Some(family.with_exponent(k)),
                    Err(e) => {
                        out.push(Violation::new(format!("{path}.beamwidth_deg"), e.to_string()));
                        None
                    }
                }
            }
            AntennaKind::Table => {
                let samples = match (&self.samples, base.map(|b| &b.pattern)) {
                    (Some(s), _) => Some(s.iter().map(|&[a, g]| (a, g)).collect()),
                    (None, Some(PatternFamily::Table { samples })) => Some(samples.clone()),
                    (None, _) => None,
                };
                match samples {
                    Some(samples) => Some(PatternFamily::Table { samples }),
                    None => {
                        out.push(Violation::new(
                            format!("{path}.samples"),
                            "required for a table antenna",
                        ));
                        None
                    }
                }
            }
        };

        let cfg = AntennaConfig {
            pattern: pattern?,
            orientation_deg: orientation,
            peak_gain_dbi,
            beamwidth_deg,
        };
        cfg.validate(path, out);
        // report pattern violations under the document's field names
        for v in &mut out[errors_before..] {
            v.path = v.path.replace(".pattern.samples", ".samples");
        }
        (out.len() == errors_before).then_some(cfg)
    }

    pub fn from_config(a: &AntennaConfig) -> Self {
        let samples = match &a.pattern {
            PatternFamily::Table { samples } => Some(samples.iter().map(|&(x, g)| [x, g]).collect()),
            _ => None,
        };
        Self {
            kind: Some(AntennaKind::of(&a.pattern)),
            orientation_deg: Some(a.orientation_deg),
            peak_gain_dbi: Some(a.peak_gain_dbi),
            beamwidth_deg: Some(a.beamwidth_deg),
            samples,
        }
    }
}

fn kind_name(k: AntennaKind) -> &'static str {
    match k {
        AntennaKind::Omni => "omni",
        AntennaKind::Cardioid => "cardioid",
        AntennaKind::Dipole => "dipole",
        AntennaKind::Table => "table",
    }
}

impl RadioDoc {
    pub fn resolve(&self, base: &RadioConfig) -> RadioConfig {
        RadioConfig {
            tx_power_dbm: self.tx_power_dbm.unwrap_or(base.tx_power_dbm),
            sensitivity_dbm: self.sensitivity_dbm.unwrap_or(base.sensitivity_dbm),
            frequency_hz: self.frequency_hz.unwrap_or(base.frequency_hz),
        }
    }

    pub fn from_config(r: &RadioConfig) -> Self {
        Self {
            tx_power_dbm: Some(r.tx_power_dbm),
            sensitivity_dbm: Some(r.sensitivity_dbm),
            frequency_hz: Some(r.frequency_hz),
        }
    }
}

impl NodeDoc {
    pub fn from_state(n: &NodeState) -> Self {
        Self {
            id: n.id.0,
            x_m: n.position.x,
            y_m: n.position.y,
            antenna: AntennaDoc::from_config(&n.antenna),
            radio: RadioDoc::from_config(&n.radio),
        }
    }
}

impl ScenarioDocument {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            duration_s: Some(s.duration_s),
            seed: Some(s.seed),
            medium: MediumDoc {
                path_loss_exponent: Some(s.medium.path_loss_exponent),
                reference_distance_m: Some(s.medium.reference_distance_m),
                interference_threshold_dbm: Some(s.medium.interference_threshold_dbm),
                capture_threshold_db: Some(s.medium.capture_threshold_db),
            },
            traffic: TrafficDoc {
                min_s: Some(s.traffic.min_interval_s),
                max_s: Some(s.traffic.max_interval_s),
                packet_airtime_s: Some(s.packet_airtime_s),
            },
            nodes: s.nodes.iter().map(NodeDoc::from_state).collect(),
        }
    }

    /// Fill defaults and validate every invariant.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let dm = MediumParams::default();
        let dt = TrafficModel::default();
        let dr = RadioConfig::default();
        let mut violations = Vec::new();

        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let path = format!("nodes[{i}]");
            if let Some(antenna) = n.antenna.resolve(None, &format!("{path}.antenna"), &mut violations) {
                nodes.push(NodeState {
                    id: NodeId(n.id),
                    position: Position::new(n.x_m, n.y_m),
                    antenna,
                    radio: n.radio.resolve(&dr),
                });
            }
        }

        let scenario = Scenario {
            nodes,
            medium: MediumParams {
                path_loss_exponent: self.medium.path_loss_exponent.unwrap_or(dm.path_loss_exponent),
                reference_distance_m: self.medium.reference_distance_m.unwrap_or(dm.reference_distance_m),
                interference_threshold_dbm: self
                    .medium
                    .interference_threshold_dbm
                    .unwrap_or(dm.interference_threshold_dbm),
                capture_threshold_db: self.medium.capture_threshold_db.unwrap_or(dm.capture_threshold_db),
            },
            traffic: TrafficModel {
                min_interval_s: self.traffic.min_s.unwrap_or(dt.min_interval_s),
                max_interval_s: self.traffic.max_s.unwrap_or(dt.max_interval_s),
            },
            packet_airtime_s: self.traffic.packet_airtime_s.unwrap_or(DEFAULT_PACKET_AIRTIME_S),
            duration_s: self.duration_s.unwrap_or(DEFAULT_DURATION_S),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        };
        if violations.is_empty() {
            violations = scenario.violations();
        }
        if violations.is_empty() {
            Ok(scenario)
        } else {
            Err(Error::Validation(violations))
        }
    }
}

pub fn parse_document(text: &str) -> Result<ScenarioDocument> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((1, 1));
        Error::Syntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_document(text)?.to_scenario()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Serialize a scenario with every field explicit.
pub fn emit_scenario(s: &Scenario) -> Result<String> {
    toml::to_string(&ScenarioDocument::from_scenario(s)).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Write via a temporary file in the same directory and rename over `path`.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
