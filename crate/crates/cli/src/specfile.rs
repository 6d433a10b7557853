//! JSON system description.

use std::path::Path;

use polling_core::{DensityMode, Discipline, QueueSpec, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema_version: String,
    pub discipline: Discipline,
    pub rho: f64,
    pub queues: Vec<QueueEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueEntry {
    pub mean_service: f64,
    pub scv_service: f64,
    pub mean_interarrival_at_saturation: f64,
    pub scv_interarrival: f64,
    pub mean_switchover: f64,
    pub scv_switchover: f64,
    #[serde(default = "default_density_mode")]
    pub density_mode: DensityMode,
}

fn default_density_mode() -> DensityMode {
    DensityMode::TwoMomentApprox
}

impl From<&QueueEntry> for QueueSpec {
    fn from(q: &QueueEntry) -> Self {
        QueueSpec {
            mean_service: q.mean_service,
            scv_service: q.scv_service,
            mean_interarrival_at_saturation: q.mean_interarrival_at_saturation,
            scv_interarrival: q.scv_interarrival,
            mean_switchover: q.mean_switchover,
            scv_switchover: q.scv_switchover,
            density_mode: q.density_mode,
        }
    }
}

impl From<&QueueSpec> for QueueEntry {
    fn from(q: &QueueSpec) -> Self {
        QueueEntry {
            mean_service: q.mean_service,
            scv_service: q.scv_service,
            mean_interarrival_at_saturation: q.mean_interarrival_at_saturation,
            scv_interarrival: q.scv_interarrival,
            mean_switchover: q.mean_switchover,
            scv_switchover: q.scv_switchover,
            density_mode: q.density_mode,
        }
    }
}

impl SpecFile {
    #[cfg(test)]
    pub fn from_system(spec: &SystemSpec) -> Self {
        SpecFile {
            schema_version: SCHEMA_VERSION.to_string(),
            discipline: spec.discipline(),
            rho: spec.rho(),
            queues: spec.queues().iter().map(QueueEntry::from).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: SpecFile =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid spec file: {e}")))?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {:?}; expected {SCHEMA_VERSION:?}",
                self.schema_version
            )));
        }
        let mut numbers = vec![("rho".to_string(), self.rho)];
        for (i, q) in self.queues.iter().enumerate() {
            for (name, v) in [
                ("mean_service", q.mean_service),
                ("scv_service", q.scv_service),
                ("mean_interarrival_at_saturation", q.mean_interarrival_at_saturation),
                ("scv_interarrival", q.scv_interarrival),
                ("mean_switchover", q.mean_switchover),
                ("scv_switchover", q.scv_switchover),
            ] {
                numbers.push((format!("queues[{i}].{name}"), v));
            }
            if let DensityMode::UserValue(v) = q.density_mode {
                numbers.push((format!("queues[{i}].density_mode.user_value"), v));
            }
        }
        match numbers.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, v)) => Err(CliError::Validation(format!("{name} must be finite, got {v}"))),
            None => Ok(()),
        }
    }

    /// Builds the validated system, optionally at a different load.
    pub fn system(&self, rho: Option<f64>) -> Result<SystemSpec, CliError> {
        let queues = self.queues.iter().map(QueueSpec::from).collect();
        Ok(SystemSpec::new(queues, self.discipline, rho.unwrap_or(self.rho))?)
    }
}
