//! Received power from transmit power, the two direction-dependent antenna
//! gains and log-distance path loss, plus the sensitivity and interference
//! threshold predicates.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::geometry::{bearing_deg, distance_m};
use crate::node::NodeState;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub frequency_hz: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 0.0,
            sensitivity_dbm: -90.0,
            frequency_hz: 2.4e9,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        if !self.tx_power_dbm.is_finite() {
            out.push(Violation::new(format!("{path}.tx_power_dbm"), "must be finite"));
        }
        if !self.sensitivity_dbm.is_finite() {
            out.push(Violation::new(format!("{path}.sensitivity_dbm"), "must be finite"));
        } else if self.tx_power_dbm.is_finite() && self.sensitivity_dbm >= self.tx_power_dbm + 200.0 {
            out.push(Violation::new(
                format!("{path}.sensitivity_dbm"),
                "must be below tx_power_dbm + 200",
            ));
        }
        if !self.frequency_hz.is_finite() || self.frequency_hz <= 0.0 {
            out.push(Violation::new(
                format!("{path}.frequency_hz"),
                format!("must be positive and finite, got {}", self.frequency_hz),
            ));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub interference_threshold_dbm: f64,
    pub capture_threshold_db: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        Self {
            path_loss_exponent: 2.0,
            reference_distance_m: 1.0,
            interference_threshold_dbm: -100.0,
            capture_threshold_db: 3.0,
        }
    }
}

impl MediumParams {
    pub fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        let mut check = |name: &str, ok: bool, what: &str, v: f64| {
            if !ok {
                out.push(Violation::new(format!("{path}.{name}"), format!("{what}, got {v}")));
            }
        };
        let n = self.path_loss_exponent;
        check(
            "path_loss_exponent",
            n.is_finite() && n >= 1.0,
            "must be finite and >= 1",
            n,
        );
        let d0 = self.reference_distance_m;
        check(
            "reference_distance_m",
            d0.is_finite() && d0 > 0.0,
            "must be finite and > 0",
            d0,
        );
        let it = self.interference_threshold_dbm;
        check("interference_threshold_dbm", it.is_finite(), "must be finite", it);
        let c = self.capture_threshold_db;
        check(
            "capture_threshold_db",
            c.is_finite() && c >= 0.0,
            "must be finite and >= 0",
            c,
        );
    }
}

/// Log-distance path loss anchored at free-space loss over the reference
/// distance. Distances inside the reference distance are clamped to it.
pub fn path_loss_db(distance_m: f64, params: &MediumParams, frequency_hz: f64) -> f64 {
    let d0 = params.reference_distance_m;
    let wavelength = SPEED_OF_LIGHT_M_S / frequency_hz;
    let anchor = 20.0 * (4.0 * PI * d0 / wavelength).log10();
    anchor + 10.0 * params.path_loss_exponent * (distance_m.max(d0) / d0).log10()
}

/// Every term of the link equation for one directed pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudgetReport {
    pub prx_dbm: f64,
    pub ptx_dbm: f64,
    pub gtx_dbi: f64,
    pub grx_dbi: f64,
    pub pl_db: f64,
    pub distance_m: f64,
    pub tx_offset_deg: f64,
    pub rx_offset_deg: f64,
}

impl LinkBudgetReport {
    /// Received power from its terms. The two gains are summed first so
    /// that swapping transmitter and receiver gives bit-identical results.
    pub fn combine(ptx_dbm: f64, gtx_dbi: f64, grx_dbi: f64, pl_db: f64) -> f64 {
        ptx_dbm + (gtx_dbi + grx_dbi) - pl_db
    }

    pub fn identity_holds(&self) -> bool {
        self.prx_dbm == Self::combine(self.ptx_dbm, self.gtx_dbi, self.grx_dbi, self.pl_db)
    }
}

impl fmt::Display for LinkBudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "prx_dbm = {:.3}", self.prx_dbm)?;
        writeln!(f, "ptx_dbm = {:.3}", self.ptx_dbm)?;
        writeln!(f, "gtx_dbi = {:.3}", self.gtx_dbi)?;
        writeln!(f, "grx_dbi = {:.3}", self.grx_dbi)?;
        writeln!(f, "pl_db = {:.3}", self.pl_db)?;
        writeln!(f, "distance_m = {:.3}", self.distance_m)?;
        writeln!(f, "tx_offset_deg = {:.3}", self.tx_offset_deg)?;
        write!(f, "rx_offset_deg = {:.3}", self.rx_offset_deg)
    }
}

pub fn received_power_dbm(tx: &NodeState, rx: &NodeState, params: &MediumParams) -> Result<LinkBudgetReport> {
    if tx.radio.frequency_hz != rx.radio.frequency_hz {
        return Err(Error::ChannelMismatch {
            tx_hz: tx.radio.frequency_hz,
            rx_hz: rx.radio.frequency_hz,
        });
    }
    let towards_rx = bearing_deg(tx.position, rx.position).map_err(|_| Error::CoincidentNodes(tx.id, rx.id))?;
    let towards_tx = bearing_deg(rx.position, tx.position).map_err(|_| Error::CoincidentNodes(tx.id, rx.id))?;

    let gtx_dbi = tx.antenna.gain_dbi(towards_rx)?;
    let grx_dbi = rx.antenna.gain_dbi(towards_tx)?;
    let distance = distance_m(tx.position, rx.position);
    let pl_db = path_loss_db(distance, params, tx.radio.frequency_hz);
    let ptx_dbm = tx.radio.tx_power_dbm;

    Ok(LinkBudgetReport {
        prx_dbm: LinkBudgetReport::combine(ptx_dbm, gtx_dbi, grx_dbi, pl_db),
        ptx_dbm,
        gtx_dbi,
        grx_dbi,
        pl_db,
        distance_m: distance,
        tx_offset_deg: tx.antenna.offset_deg(towards_rx)?,
        rx_offset_deg: rx.antenna.offset_deg(towards_tx)?,
    })
}

/// True iff the received power strictly exceeds the receiver's sensitivity.
pub fn link_exists(tx: &NodeState, rx: &NodeState, params: &MediumParams) -> Result<bool> {
    Ok(received_power_dbm(tx, rx, params)?.prx_dbm > rx.radio.sensitivity_dbm)
}

/// True iff `tx`'s power at `victim` strictly exceeds the interference threshold.
pub fn interferes(tx: &NodeState, victim: &NodeState, params: &MediumParams) -> Result<bool> {
    Ok(received_power_dbm(tx, victim, params)?.prx_dbm > params.interference_threshold_dbm)
}
