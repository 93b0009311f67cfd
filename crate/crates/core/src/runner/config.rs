//! Scenario configuration: a JSON object whose omitted fields take the
//! defaults below (the standard four-group, three-user cell).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mc::{Rates, Scenario, SweepPoint};
use crate::schemes::{ImpairmentParams, PowerAllocation, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Outage,
    Ergodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Mc,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Total BS antennas `M` (both polarizations).
    pub antennas: usize,
    pub groups: usize,
    pub users: usize,
    pub m_bar: usize,
    /// Group whose users are simulated.
    pub group: usize,
    pub azimuths_deg: Vec<f64>,
    pub group_distance_m: f64,
    pub group_radius_m: f64,
    pub user_distances_m: Vec<f64>,
    pub spacing_wavelengths: f64,
    /// Path-loss `ζ = delta · d^{-eta}`.
    pub delta: f64,
    pub eta: f64,
    pub alpha: f64,
    /// Private powers; `(1-α)/U` each when absent.
    pub beta: Option<Vec<f64>>,
    pub noma: Option<Vec<f64>>,
    pub impairments: Vec<ImpairmentParams>,
    pub snr_db: Vec<f64>,
    pub rate_common: f64,
    pub rate_private: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub analyses: Vec<Analysis>,
    pub sources: Vec<Source>,
    pub trials_outage: u64,
    pub trials_ergodic: u64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            antennas: 100,
            groups: 4,
            users: 3,
            m_bar: 6,
            group: 0,
            azimuths_deg: vec![30.0, -10.0, -50.0, 70.0],
            group_distance_m: 170.0,
            group_radius_m: 30.0,
            user_distances_m: vec![200.0, 170.0, 140.0],
            spacing_wavelengths: 0.5,
            delta: 4e4,
            eta: 2.5,
            alpha: 0.7,
            beta: None,
            noma: None,
            impairments: vec![ImpairmentParams::new(0.0, 0.0, 0.0)],
            snr_db: (0..=16).map(|k| 2.0 * k as f64).collect(),
            rate_common: 0.5,
            rate_private: vec![0.1, 1.0, 2.0],
            schemes: vec![Scheme::Pmux],
            analyses: vec![Analysis::Outage],
            sources: vec![Source::Analytic, Source::Mc],
            trials_outage: 100_000,
            trials_ergodic: 20_000,
            seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn power_allocation(&self) -> PowerAllocation {
        let mut p = PowerAllocation::uniform(self.alpha, self.users);
        if let Some(b) = &self.beta {
            p.beta = b.clone();
        }
        if let Some(n) = &self.noma {
            p.noma = n.clone();
        }
        p
    }

    pub fn rates(&self) -> Rates {
        Rates {
            common: self.rate_common,
            private: self.rate_private.clone(),
        }
    }

    /// SNR-major grid of every (SNR, impairment) pair.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut v = Vec::with_capacity(self.snr_db.len() * self.impairments.len());
        for &imp in &self.impairments {
            for &snr_db in &self.snr_db {
                v.push(SweepPoint { snr_db, imp });
            }
        }
        v
    }

    /// Structural checks and the precoder feasibility inequalities. The
    /// covariance-dependent inequalities need [`Scenario::from_config`],
    /// which [`load_config`] also runs.
    pub fn validate(&self) -> Result<()> {
        if !self.antennas.is_multiple_of(2) || self.antennas < 4 {
            return Err(Error::Config(format!(
                "antennas = {} must be even and >= 4",
                self.antennas
            )));
        }
        if !self.m_bar.is_multiple_of(2) || self.m_bar == 0 {
            return Err(Error::Config(format!(
                "m_bar = {} must be even and positive",
                self.m_bar
            )));
        }
        if self.groups == 0 || self.users == 0 {
            return Err(Error::Config("groups and users must be >= 1".into()));
        }
        if self.m_bar / 2 < self.users {
            return Err(Error::Infeasible(format!(
                "M_bar/2 > U - 1 violated: {} <= {}",
                self.m_bar / 2,
                self.users - 1
            )));
        }
        if self.m_bar > self.antennas {
            return Err(Error::Infeasible(format!(
                "M_bar = {} exceeds M = {}",
                self.m_bar, self.antennas
            )));
        }
        if self.group >= self.groups {
            return Err(Error::Config(format!(
                "group = {} but only {} groups",
                self.group, self.groups
            )));
        }
        let lens = [
            ("azimuths_deg", self.azimuths_deg.len(), self.groups),
            ("user_distances_m", self.user_distances_m.len(), self.users),
            ("rate_private", self.rate_private.len(), self.users),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::Config(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        if !(self.delta > 0.0) || !(self.eta > 0.0) || !(self.spacing_wavelengths > 0.0) {
            return Err(Error::Config(
                "delta, eta and spacing_wavelengths must be positive".into(),
            ));
        }
        self.power_allocation().validate()?;
        if self.impairments.is_empty() || self.snr_db.is_empty() {
            return Err(Error::Config(
                "impairments and snr_db must be nonempty".into(),
            ));
        }
        for imp in &self.impairments {
            imp.validate()?;
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db entries must be finite".into()));
        }
        if !(self.rate_common >= 0.0) || self.rate_private.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Config("target rates must be nonnegative".into()));
        }
        if self.schemes.is_empty() || self.analyses.is_empty() || self.sources.is_empty() {
            return Err(Error::Config(
                "schemes, analyses and sources must be nonempty".into(),
            ));
        }
        if self.trials_outage == 0 || self.trials_ergodic == 0 {
            return Err(Error::Config("trial counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses a config from JSON text; an empty or whitespace-only text gives
/// the defaults.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let value: Value = if text.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(text)?
    };
    from_value(value)
}

fn from_value(value: Value) -> Result<SystemConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("field '{path}': {}", e.inner()))
    })
}

/// Parses, validates and checks the geometry-dependent feasibility of a
/// config given as a path or inline JSON (text starting with `{`).
pub fn load_config(path_or_text: &str) -> Result<SystemConfig> {
    let t = path_or_text.trim_start();
    let text = if t.starts_with('{') || t.is_empty() {
        path_or_text.to_string()
    } else {
        std::fs::read_to_string(path_or_text)?
    };
    let cfg = parse_config(&text)?;
    check(&cfg)?;
    Ok(cfg)
}

/// Full validation, including building the covariances and outer precoder.
pub fn check(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    Scenario::from_config(cfg)?;
    Ok(())
}

/// Applies `key=value` overrides; the value is read as JSON and falls back
/// to a plain string. Dotted keys reach into nested objects.
pub fn apply_overrides(cfg: &SystemConfig, overrides: &[String]) -> Result<SystemConfig> {
    let mut v = serde_json::to_value(cfg)?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{o}' is not of the form key=value")))?;
        let val: Value =
            serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut v;
        for part in key.trim().split('.') {
            let obj = slot.as_object_mut().ok_or_else(|| {
                Error::Config(format!(
                    "override key '{key}' does not name an object field"
                ))
            })?;
            slot = obj.entry(part.to_string()).or_insert(Value::Null);
        }
        *slot = val;
    }
    from_value(v)
}
