//! Closed-form mean waiting time machinery.
//!
//! The main approximation interpolates between the light-traffic value and
//! slope at `rho = 0` and the heavy-traffic scaled delay `omega_i`:
//!
//! ```text
//! E[W_i](rho) = (K0_i + K1_i rho + K2_i rho^2) / (1 - rho)
//! ```
//!
//! with `K0_i = E[S^res]`, `K0_i + K1_i` the light-traffic slope and
//! `K0_i + K1_i + K2_i = omega_i`. The single-limit comparators (light
//! traffic only, heavy traffic only, large switch-over) and the classic
//! pseudo-conservation-law estimate live here too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_moments, DerivedMoments, Discipline, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Interpolation,
    LtOnly,
    HtOnly,
    LargeS,
    PclBased,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Interpolation,
        Method::LtOnly,
        Method::HtOnly,
        Method::LargeS,
        Method::PclBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Interpolation => "interpolation",
            Method::LtOnly => "lt_only",
            Method::HtOnly => "ht_only",
            Method::LargeS => "large_s",
            Method::PclBased => "pcl_based",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm || m.name().replace('_', "") == norm)
            .ok_or_else(|| {
                format!(
                    "unknown method {s:?}; expected one of interpolation, lt_only, ht_only, large_s, pcl_based"
                )
            })
    }
}

/// Numerator coefficients of the interpolation for one queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub queue_index: usize,
}

impl InterpolationConstants {
    /// `(1 - rho) E[W]` as `rho -> 1`.
    pub fn omega(&self) -> f64 {
        self.k0 + self.k1 + self.k2
    }

    /// Derivative of the interpolation at `rho = 0`.
    pub fn slope_at_zero(&self) -> f64 {
        self.k0 + self.k1
    }

    pub fn eval(&self, rho: f64) -> f64 {
        (self.k0 + self.k1 * rho + self.k2 * rho * rho) / (1.0 - rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueWait {
    pub mean_wait: f64,
    pub mean_queue_length: f64,
    /// Attached for [`Method::Interpolation`] only.
    pub constants: Option<InterpolationConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaitingTimeResult {
    pub method: Method,
    pub discipline: Discipline,
    pub rho: f64,
    pub queues: Vec<QueueWait>,
}

impl WaitingTimeResult {
    pub fn mean_waits(&self) -> Vec<f64> {
        self.queues.iter().map(|q| q.mean_wait).collect()
    }

    /// Queues whose estimate came out negative. Reported, never clamped.
    pub fn negative_queues(&self) -> Vec<usize> {
        self.queues
            .iter()
            .enumerate()
            .filter(|(_, q)| q.mean_wait < 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_index(dm: &DerivedMoments, i: usize) -> Result<()> {
    if i >= dm.n() {
        return Err(Error::QueueIndex { index: i, n: dm.n() });
    }
    if dm.es_total <= 0.0 {
        return Err(Error::ZeroTotalSwitchover);
    }
    Ok(())
}

/// `sum_{j=0}^{N-1} sum_{k=0}^{j} rho_hat_{i+k} V[S_{i+j}]`, indices mod N.
pub fn switchover_variance_sum(dm: &DerivedMoments, i: usize) -> f64 {
    let n = dm.n();
    let mut load_prefix = 0.0;
    let mut total = 0.0;
    for j in 0..n {
        load_prefix += dm.rho_hat[(i + j) % n];
        total += load_prefix * dm.var_s[(i + j) % n];
    }
    total
}

/// Mean asymptotic scaled delay `omega_i = lim (1 - rho) E[W_i]`.
pub fn heavy_traffic_omega(dm: &DerivedMoments, discipline: Discipline, i: usize) -> Result<f64> {
    check_index(dm, i)?;
    let sign = discipline.sign();
    let factor = (1.0 + sign * dm.rho_hat[i]) / 2.0;
    let denom: f64 = dm.rho_hat.iter().map(|r| r * (1.0 + sign * r)).sum();
    // Exhaustive with a single queue: (1 - rho_hat) / sum rho_hat (1 - rho_hat) -> 1.
    let load_ratio = if denom == 0.0 { 1.0 } else { 2.0 * factor / denom };
    Ok(load_ratio * dm.sigma_sq / 2.0 + factor * dm.es_total)
}

/// Coefficient of `rho` in the light-traffic expansion of `E[W_i]`.
pub fn light_traffic_slope(dm: &DerivedMoments, discipline: Discipline, i: usize) -> Result<f64> {
    check_index(dm, i)?;
    let n = dm.n();
    let rh = dm.rho_hat[i];
    let mut later_sum = 0.0;
    for k in 1..n {
        let var_between: f64 = (0..k).map(|j| dm.var_s[(i + j) % n]).sum();
        later_sum += dm.rho_hat[(i + k) % n] * var_between;
    }
    let exhaustive = rh * (dm.density_term[i] - 1.0) * dm.eb_res_per_queue[i]
        + dm.eb_res_global
        + (1.0 - rh) * (dm.es_total - dm.es_res)
        + later_sum / dm.es_total;
    Ok(match discipline {
        Discipline::Exhaustive => exhaustive,
        Discipline::Gated => exhaustive + rh * dm.es_total,
    })
}

fn k1_common(dm: &DerivedMoments, i: usize) -> f64 {
    let rh = dm.rho_hat[i];
    rh * (dm.density_term[i] - 1.0) * dm.eb_res_per_queue[i] + dm.eb_res_global
        - switchover_variance_sum(dm, i) / dm.es_total
}

pub fn constants_exhaustive(dm: &DerivedMoments, i: usize) -> Result<InterpolationConstants> {
    let omega = heavy_traffic_omega(dm, Discipline::Exhaustive, i)?;
    let k0 = dm.es_res;
    let k1 = k1_common(dm, i) + dm.rho_hat[i] * (dm.es_res - dm.es_total);
    Ok(InterpolationConstants { k0, k1, k2: omega - k0 - k1, queue_index: i })
}

pub fn constants_gated(dm: &DerivedMoments, i: usize) -> Result<InterpolationConstants> {
    let omega = heavy_traffic_omega(dm, Discipline::Gated, i)?;
    let k0 = dm.es_res;
    let k1 = k1_common(dm, i) + dm.rho_hat[i] * dm.es_res;
    Ok(InterpolationConstants { k0, k1, k2: omega - k0 - k1, queue_index: i })
}

pub fn constants(dm: &DerivedMoments, discipline: Discipline, i: usize) -> Result<InterpolationConstants> {
    match discipline {
        Discipline::Exhaustive => constants_exhaustive(dm, i),
        Discipline::Gated => constants_gated(dm, i),
    }
}

fn assemble(
    spec: &SystemSpec,
    method: Method,
    waits: impl IntoIterator<Item = (f64, Option<InterpolationConstants>)>,
) -> WaitingTimeResult {
    let rho = spec.rho();
    let queues = waits
        .into_iter()
        .enumerate()
        .map(|(i, (mean_wait, constants))| {
            let q = spec.queue(i);
            QueueWait {
                mean_wait,
                mean_queue_length: rho * (mean_wait + q.mean_service) / q.mean_interarrival_at_saturation,
                constants,
            }
        })
        .collect();
    WaitingTimeResult { method, discipline: spec.discipline(), rho, queues }
}

pub fn mean_wait_interpolation(spec: &SystemSpec) -> Result<WaitingTimeResult> {
    let dm = derive_moments(spec)?;
    let rho = spec.rho();
    let waits = (0..spec.n())
        .map(|i| constants(&dm, spec.discipline(), i).map(|c| (c.eval(rho), Some(c))))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, Method::Interpolation, waits))
}

/// Light-traffic-only comparator: keeps the value and slope at zero load and
/// drops the heavy-traffic condition, `(K0 + (slope - K0) rho) / (1 - rho)`.
pub fn mean_wait_lt_only(spec: &SystemSpec) -> Result<WaitingTimeResult> {
    let dm = derive_moments(spec)?;
    let rho = spec.rho();
    let waits = (0..spec.n())
        .map(|i| {
            let slope = light_traffic_slope(&dm, spec.discipline(), i)?;
            Ok(((dm.es_res + (slope - dm.es_res) * rho) / (1.0 - rho), None))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, Method::LtOnly, waits))
}

pub fn mean_wait_ht_only(spec: &SystemSpec) -> Result<WaitingTimeResult> {
    let dm = derive_moments(spec)?;
    let rho = spec.rho();
    let waits = (0..spec.n())
        .map(|i| Ok((heavy_traffic_omega(&dm, spec.discipline(), i)? / (1.0 - rho), None)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, Method::HtOnly, waits))
}

/// Large switch-over limit `E[S] (1 ∓ rho_i) / (2 (1 - rho))`.
pub fn mean_wait_large_s(spec: &SystemSpec) -> Result<WaitingTimeResult> {
    spec.validate()?;
    let rho = spec.rho();
    let es = spec.total_switchover();
    let sign = spec.discipline().sign();
    let waits = (0..spec.n())
        .map(|i| (es * (1.0 + sign * spec.queue_load(i)) / (2.0 * (1.0 - rho)), None))
        .collect::<Vec<_>>();
    Ok(assemble(spec, Method::LargeS, waits))
}

/// Right-hand side of the pseudo-conservation law for `sum rho_i E[W_i]`,
/// exact under Poisson arrivals. Evaluated from the moments regardless of
/// the arrival laws.
pub fn pcl_rhs(spec: &SystemSpec) -> Result<f64> {
    let dm = derive_moments(spec)?;
    let rho = spec.rho();
    let sum_sq: f64 = (0..spec.n()).map(|j| spec.queue_load(j).powi(2)).sum();
    let work_left = match spec.discipline() {
        Discipline::Exhaustive => 0.0,
        Discipline::Gated => sum_sq * dm.es_total / (1.0 - rho),
    };
    Ok(rho * rho / (1.0 - rho) * dm.eb_res_global
        + rho * dm.es_res
        + dm.es_total / 2.0 * (rho * rho - sum_sq) / (1.0 - rho)
        + work_left)
}

/// Classic Poisson-arrival estimate `E[W_i] = (1 ∓ rho_i) E[C^res]` with the
/// common residual cycle solved from the pseudo-conservation law.
pub fn mean_wait_pcl_based(spec: &SystemSpec) -> Result<WaitingTimeResult> {
    let dm = derive_moments(spec)?;
    let sign = spec.discipline().sign();
    if spec.rho() == 0.0 {
        // 0/0; every method agrees on E[S^res] at zero load.
        let waits = vec![(dm.es_res, None); spec.n()];
        return Ok(assemble(spec, Method::PclBased, waits));
    }
    let weights: Vec<f64> = (0..spec.n())
        .map(|i| 1.0 + sign * spec.queue_load(i))
        .collect();
    let denom: f64 = weights.iter().enumerate().map(|(i, w)| spec.queue_load(i) * w).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateLoad);
    }
    let residual_cycle = pcl_rhs(spec)? / denom;
    Ok(assemble(
        spec,
        Method::PclBased,
        weights.into_iter().map(|w| (w * residual_cycle, None)),
    ))
}

/// `sum rho_i E[W_i,app] - pcl_rhs`; zero up to rounding for Poisson arrivals.
pub fn pcl_residual(spec: &SystemSpec) -> Result<f64> {
    let res = mean_wait_interpolation(spec)?;
    let weighted: f64 = res
        .queues
        .iter()
        .enumerate()
        .map(|(i, q)| spec.queue_load(i) * q.mean_wait)
        .sum();
    Ok(weighted - pcl_rhs(spec)?)
}

pub fn mean_wait(spec: &SystemSpec, method: Method) -> Result<WaitingTimeResult> {
    match method {
        Method::Interpolation => mean_wait_interpolation(spec),
        Method::LtOnly => mean_wait_lt_only(spec),
        Method::HtOnly => mean_wait_ht_only(spec),
        Method::LargeS => mean_wait_large_s(spec),
        Method::PclBased => mean_wait_pcl_based(spec),
    }
}
