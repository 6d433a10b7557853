//! System description, the load-scaling convention and the aggregate
//! moments every approximation formula consumes.
//!
//! A system is described at saturation: each queue carries the mean
//! interarrival time `E[Â_i]` it would see at total load 1, and a single
//! scalar `rho` scales all arrival streams at once (`A_i = Â_i / rho`).
//! Squared coefficients of variation are invariant under that scaling.
//!
//! Switch-over `S_i` is incurred when the server leaves queue `i` for queue
//! `i + 1`. All queue indices are cyclic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;

/// Tolerance on `sum(rho_hat) == 1` before a spec is rejected.
pub const LOAD_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    Exhaustive,
    Gated,
}

impl Discipline {
    pub fn name(self) -> &'static str {
        match self {
            Discipline::Exhaustive => "exhaustive",
            Discipline::Gated => "gated",
        }
    }

    /// `-1` for exhaustive, `+1` for gated: the sign in the `(1 ∓ rho_i)` factors.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Discipline::Exhaustive => -1.0,
            Discipline::Gated => 1.0,
        }
    }
}

impl std::fmt::Display for Discipline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the interarrival density term `E[Â_i] ĝ_i(0)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    /// Piecewise two-moment rule: `2c/(c+1)` above 1, `c^4` at or below.
    TwoMomentApprox,
    /// Balanced-means hyperexponential fit (scv >= 1).
    ExactH2,
    /// Erlang(k-1)/Erlang(k) mixture fit (scv <= 1).
    ExactMixedErlang,
    /// Poisson arrivals (scv = 1).
    ExactExponential,
    /// Caller-supplied value.
    UserValue(f64),
}

impl DensityMode {
    pub fn name(self) -> &'static str {
        match self {
            DensityMode::TwoMomentApprox => "two_moment_approx",
            DensityMode::ExactH2 => "exact_h2",
            DensityMode::ExactMixedErlang => "exact_mixed_erlang",
            DensityMode::ExactExponential => "exact_exponential",
            DensityMode::UserValue(_) => "user_value",
        }
    }

    /// The exact mode matching the family a two-moment fit would pick.
    pub fn exact_for_scv(scv: f64) -> Self {
        if scv > 1.0 {
            DensityMode::ExactH2
        } else if scv < 1.0 {
            DensityMode::ExactMixedErlang
        } else {
            DensityMode::ExactExponential
        }
    }
}

/// One queue, described at saturation load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueSpec {
    pub mean_service: f64,
    pub scv_service: f64,
    /// `E[Â_i]`: the mean interarrival time when the total load is 1.
    pub mean_interarrival_at_saturation: f64,
    pub scv_interarrival: f64,
    /// Mean switch-over incurred when the server leaves this queue.
    pub mean_switchover: f64,
    pub scv_switchover: f64,
    pub density_mode: DensityMode,
}

impl QueueSpec {
    /// Poisson arrivals at saturation rate `1 / mean_interarrival_at_saturation`,
    /// exponential service and switch-over.
    pub fn markovian(mean_service: f64, mean_interarrival_at_saturation: f64, mean_switchover: f64) -> Self {
        QueueSpec {
            mean_service,
            scv_service: 1.0,
            mean_interarrival_at_saturation,
            scv_interarrival: 1.0,
            mean_switchover,
            scv_switchover: 1.0,
            density_mode: DensityMode::ExactExponential,
        }
    }

    pub fn rho_hat(&self) -> f64 {
        self.mean_service / self.mean_interarrival_at_saturation
    }

    pub fn lambda_hat(&self) -> f64 {
        1.0 / self.mean_interarrival_at_saturation
    }

    pub fn second_moment_service(&self) -> f64 {
        (1.0 + self.scv_service) * self.mean_service * self.mean_service
    }

    pub fn var_service(&self) -> f64 {
        self.scv_service * self.mean_service * self.mean_service
    }

    pub fn var_switchover(&self) -> f64 {
        self.scv_switchover * self.mean_switchover * self.mean_switchover
    }

    pub fn var_interarrival_at_saturation(&self) -> f64 {
        self.scv_interarrival * self.mean_interarrival_at_saturation * self.mean_interarrival_at_saturation
    }

    pub fn is_poisson(&self) -> bool {
        self.scv_interarrival == 1.0
    }

    fn validate(&self, queue: usize) -> Result<()> {
        let bad = |field, value, reason| Error::InvalidParameter { queue, field, value, reason };
        let positive = |field, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(bad(field, value, "must be finite and > 0"))
            }
        };
        let nonneg = |field, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(bad(field, value, "must be finite and >= 0"))
            }
        };
        positive("mean_service", self.mean_service)?;
        positive("mean_interarrival_at_saturation", self.mean_interarrival_at_saturation)?;
        nonneg("mean_switchover", self.mean_switchover)?;
        nonneg("scv_service", self.scv_service)?;
        nonneg("scv_interarrival", self.scv_interarrival)?;
        nonneg("scv_switchover", self.scv_switchover)?;

        let scv = self.scv_interarrival;
        let mismatch = |mode: DensityMode| Error::DensityModeMismatch { queue, mode: mode.name(), scv };
        match self.density_mode {
            DensityMode::TwoMomentApprox => {}
            m @ DensityMode::ExactH2 if scv < 1.0 => return Err(mismatch(m)),
            m @ DensityMode::ExactMixedErlang if scv > 1.0 => return Err(mismatch(m)),
            m @ DensityMode::ExactExponential if scv != 1.0 => return Err(mismatch(m)),
            DensityMode::UserValue(v) => nonneg("density_mode.user_value", v)?,
            _ => {}
        }
        Ok(())
    }

    fn density_term(&self) -> f64 {
        let scv = self.scv_interarrival;
        match self.density_mode {
            DensityMode::TwoMomentApprox => fit::density_at_zero_two_moment_approx(scv),
            DensityMode::ExactExponential => 1.0,
            DensityMode::ExactH2 | DensityMode::ExactMixedErlang => {
                // Validated moments; the fit cannot fail here.
                let dist = fit::fit_two_moments(self.mean_interarrival_at_saturation, scv)
                    .expect("validated interarrival moments");
                fit::density_at_zero(&dist)
            }
            DensityMode::UserValue(v) => v,
        }
    }
}

/// A full N-queue polling system at total load `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    queues: Vec<QueueSpec>,
    discipline: Discipline,
    rho: f64,
}

impl SystemSpec {
    pub fn new(queues: Vec<QueueSpec>, discipline: Discipline, rho: f64) -> Result<Self> {
        let spec = SystemSpec { queues, discipline, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from the actual per-queue arrival rates `lambda_i` at the
    /// operating point. The total load is `sum(lambda_i E[B_i])` and the
    /// saturation interarrival means are `rho / lambda_i`.
    ///
    /// `queues[i].mean_interarrival_at_saturation` is ignored and overwritten.
    pub fn from_arrival_rates(mut queues: Vec<QueueSpec>, rates: &[f64], discipline: Discipline) -> Result<Self> {
        if queues.len() != rates.len() {
            return Err(Error::InvalidConfig(format!(
                "{} arrival rates given for {} queues",
                rates.len(),
                queues.len()
            )));
        }
        for (i, &rate) in rates.iter().enumerate() {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::InvalidParameter {
                    queue: i,
                    field: "arrival_rate",
                    value: rate,
                    reason: "must be finite and > 0",
                });
            }
        }
        let rho: f64 = queues.iter().zip(rates).map(|(q, r)| q.mean_service * r).sum();
        for (q, r) in queues.iter_mut().zip(rates) {
            q.mean_interarrival_at_saturation = rho / r;
        }
        SystemSpec::new(queues, discipline, rho)
    }

    pub fn validate(&self) -> Result<()> {
        if self.queues.is_empty() {
            return Err(Error::EmptySystem);
        }
        if !(self.rho.is_finite() && (0.0..1.0).contains(&self.rho)) {
            return Err(Error::LoadOutOfRange(self.rho));
        }
        for (i, q) in self.queues.iter().enumerate() {
            q.validate(i)?;
        }
        let es: f64 = self.queues.iter().map(|q| q.mean_switchover).sum();
        if es <= 0.0 {
            return Err(Error::ZeroTotalSwitchover);
        }
        let sum: f64 = self.queues.iter().map(QueueSpec::rho_hat).sum();
        if (sum - 1.0).abs() > LOAD_SUM_TOLERANCE {
            return Err(Error::UnnormalizedLoads { sum });
        }
        Ok(())
    }

    pub fn queues(&self) -> &[QueueSpec] {
        &self.queues
    }

    pub fn queue(&self, i: usize) -> &QueueSpec {
        &self.queues[i % self.queues.len()]
    }

    pub fn n(&self) -> usize {
        self.queues.len()
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_discipline(&self, discipline: Discipline) -> Self {
        SystemSpec { discipline, ..self.clone() }
    }

    /// Same system at a different total load.
    pub fn scale_to_load(&self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && (0.0..1.0).contains(&rho)) {
            return Err(Error::LoadOutOfRange(rho));
        }
        Ok(SystemSpec { rho, ..self.clone() })
    }

    /// `rho_i = rho * rho_hat_i`.
    pub fn queue_load(&self, i: usize) -> f64 {
        self.rho * self.queue(i).rho_hat()
    }

    /// Actual arrival rate `lambda_i = rho / E[Â_i]`.
    pub fn arrival_rate(&self, i: usize) -> f64 {
        self.rho / self.queue(i).mean_interarrival_at_saturation
    }

    /// Actual mean interarrival time `E[A_i] = E[Â_i] / rho`; infinite at zero load.
    pub fn effective_mean_interarrival(&self, i: usize) -> f64 {
        self.queue(i).mean_interarrival_at_saturation / self.rho
    }

    pub fn total_switchover(&self) -> f64 {
        self.queues.iter().map(|q| q.mean_switchover).sum()
    }

    pub fn all_poisson(&self) -> bool {
        self.queues.iter().all(QueueSpec::is_poisson)
    }
}

/// Load-independent aggregates of a [`SystemSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedMoments {
    pub rho_hat: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    /// `E[S]`, total mean switch-over per cycle.
    pub es_total: f64,
    pub var_s: Vec<f64>,
    pub var_s_total: f64,
    /// `E[S^res]`.
    pub es_res: f64,
    /// `E[B^res]` of an arbitrary customer.
    pub eb_res_global: f64,
    pub eb_res_per_queue: Vec<f64>,
    pub sigma_sq: f64,
    /// `E[Â_i] ĝ_i(0)` per queue.
    pub density_term: Vec<f64>,
}

impl DerivedMoments {
    pub fn n(&self) -> usize {
        self.rho_hat.len()
    }
}

pub fn derive_moments(spec: &SystemSpec) -> Result<DerivedMoments> {
    spec.validate()?;
    let qs = spec.queues();

    let rho_hat: Vec<f64> = qs.iter().map(QueueSpec::rho_hat).collect();
    let lambda_hat: Vec<f64> = qs.iter().map(QueueSpec::lambda_hat).collect();

    let es_total: f64 = qs.iter().map(|q| q.mean_switchover).sum();
    let var_s: Vec<f64> = qs.iter().map(QueueSpec::var_switchover).collect();
    let var_s_total: f64 = var_s.iter().sum();
    let es_res = (var_s_total + es_total * es_total) / (2.0 * es_total);

    let first: f64 = qs.iter().map(|q| q.lambda_hat() * q.mean_service).sum();
    let second: f64 = qs.iter().map(|q| q.lambda_hat() * q.second_moment_service()).sum();
    let eb_res_global = second / (2.0 * first);
    let eb_res_per_queue = qs
        .iter()
        .map(|q| (1.0 + q.scv_service) * q.mean_service / 2.0)
        .collect();

    let sigma_sq = qs
        .iter()
        .map(|q| {
            let rh = q.rho_hat();
            q.lambda_hat() * (q.var_service() + rh * rh * q.var_interarrival_at_saturation())
        })
        .sum();

    let density_term = qs.iter().map(QueueSpec::density_term).collect();

    Ok(DerivedMoments {
        rho_hat,
        lambda_hat,
        es_total,
        var_s,
        var_s_total,
        es_res,
        eb_res_global,
        eb_res_per_queue,
        sigma_sq,
        density_term,
    })
}
