//! Reference formulas evaluated directly from the raw queue parameters, and
//! random system generators. Nothing here calls into the approximation code.

#![allow(dead_code)]

use polling_core::{DensityMode, Discipline, QueueSpec, SystemSpec};
use rand::Rng;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Relative comparison against the magnitude of the terms that make up the
/// value, for quantities that can cancel to zero.
pub fn close_in_scale(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * (a.abs().max(b.abs()) + scale)
}

/// Natural time scale of a system: total switch-over plus residual service.
pub fn time_scale(spec: &SystemSpec) -> f64 {
    total_switchover(spec) + residual_service_mix(spec)
}

fn cyc(spec: &SystemSpec, i: usize) -> &QueueSpec {
    &spec.queues()[i % spec.n()]
}

fn rho_hat(q: &QueueSpec) -> f64 {
    q.mean_service / q.mean_interarrival_at_saturation
}

fn var_s(q: &QueueSpec) -> f64 {
    q.scv_switchover * q.mean_switchover * q.mean_switchover
}

pub fn total_switchover(spec: &SystemSpec) -> f64 {
    spec.queues().iter().map(|q| q.mean_switchover).sum()
}

pub fn residual_switchover(spec: &SystemSpec) -> f64 {
    let es = total_switchover(spec);
    let var: f64 = spec.queues().iter().map(var_s).sum();
    (var + es * es) / (2.0 * es)
}

fn second_moment_service(q: &QueueSpec) -> f64 {
    (1.0 + q.scv_service) * q.mean_service * q.mean_service
}

fn residual_service(q: &QueueSpec) -> f64 {
    second_moment_service(q) / (2.0 * q.mean_service)
}

/// Residual of the service time of an arbitrary customer.
pub fn residual_service_mix(spec: &SystemSpec) -> f64 {
    let num: f64 = spec
        .queues()
        .iter()
        .map(|q| second_moment_service(q) / q.mean_interarrival_at_saturation)
        .sum();
    let den: f64 = spec.queues().iter().map(rho_hat).sum();
    num / (2.0 * den)
}

/// Mean interarrival time times the interarrival density at zero, from the
/// distribution families directly.
pub fn density_term(q: &QueueSpec) -> f64 {
    let c = q.scv_interarrival;
    match q.density_mode {
        DensityMode::UserValue(v) => v,
        DensityMode::ExactExponential => 1.0,
        DensityMode::ExactH2 => 2.0 * c / (c + 1.0),
        DensityMode::TwoMomentApprox => {
            if c > 1.0 {
                2.0 * c / (c + 1.0)
            } else {
                c.powi(4)
            }
        }
        DensityMode::ExactMixedErlang => mixed_erlang_density(c),
    }
}

/// Mixture of Erlang(k-1) and Erlang(k) with a common rate, k = ceil(1/c).
/// Only Erlang(1) components have positive density at zero.
fn mixed_erlang_density(c: f64) -> f64 {
    let kf = (1.0 / c).ceil();
    let k = if (1.0 / c - (1.0 / c).round()).abs() < 1e-9 { (1.0 / c).round() } else { kf };
    let p = ((k * c - (k * (1.0 + c) - k * k * c).max(0.0).sqrt()) / (1.0 + c)).clamp(0.0, 1.0);
    let rate_times_mean = k - p;
    if k == 1.0 {
        (1.0 - p) * rate_times_mean
    } else if k == 2.0 {
        p * rate_times_mean
    } else {
        0.0
    }
}

/// Coefficient of rho in the light-traffic expansion, written in the
/// original summation order `k = i+1..i+N-1`, `j = i..k-1`.
pub fn light_traffic_slope(spec: &SystemSpec, i: usize) -> f64 {
    let n = spec.n();
    let qi = cyc(spec, i);
    let es = total_switchover(spec);
    let es_res = residual_switchover(spec);
    let rh = rho_hat(qi);
    let mut double = 0.0;
    for k in (i + 1)..(i + n) {
        let mut inner = 0.0;
        for j in i..k {
            inner += var_s(cyc(spec, j));
        }
        double += rho_hat(cyc(spec, k)) * inner;
    }
    let exhaustive = rh * (density_term(qi) - 1.0) * residual_service(qi)
        + residual_service_mix(spec)
        + (1.0 - rh) * (es - es_res)
        + double / es;
    match spec.discipline() {
        Discipline::Exhaustive => exhaustive,
        Discipline::Gated => exhaustive + rh * es,
    }
}

/// `sum_{j=0}^{N-1} sum_{k=0}^{j} rho_hat_{i+k} V[S_{i+j}]` by plain nested loops.
pub fn naive_variance_double_sum(spec: &SystemSpec, i: usize) -> f64 {
    let n = spec.n();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..=j {
            total += rho_hat(cyc(spec, i + k)) * var_s(cyc(spec, i + j));
        }
    }
    total
}

/// The linear coefficient K1 exactly as displayed for each discipline.
pub fn k1_displayed(spec: &SystemSpec, i: usize) -> f64 {
    let qi = cyc(spec, i);
    let rh = rho_hat(qi);
    let es = total_switchover(spec);
    let es_res = residual_switchover(spec);
    let common = rh * (density_term(qi) - 1.0) * residual_service(qi) + residual_service_mix(spec)
        - naive_variance_double_sum(spec, i) / es;
    match spec.discipline() {
        Discipline::Exhaustive => common + rh * (es_res - es),
        Discipline::Gated => common + rh * es_res,
    }
}

pub fn sigma_sq(spec: &SystemSpec) -> f64 {
    spec.queues()
        .iter()
        .map(|q| {
            let lam = 1.0 / q.mean_interarrival_at_saturation;
            let var_b = q.scv_service * q.mean_service * q.mean_service;
            let var_a = q.scv_interarrival * q.mean_interarrival_at_saturation * q.mean_interarrival_at_saturation;
            lam * (var_b + rho_hat(q) * rho_hat(q) * var_a)
        })
        .sum()
}

/// Heavy-traffic scaled delay. A single exhaustive queue is a GI/G/1 queue
/// with vacations, whose limit is Kingman's `sigma^2 / 2`.
pub fn omega(spec: &SystemSpec, i: usize) -> f64 {
    let sign = match spec.discipline() {
        Discipline::Exhaustive => -1.0,
        Discipline::Gated => 1.0,
    };
    if spec.n() == 1 && sign < 0.0 {
        return sigma_sq(spec) / 2.0;
    }
    let rh = rho_hat(cyc(spec, i));
    let den: f64 = spec.queues().iter().map(|q| rho_hat(q) * (1.0 + sign * rho_hat(q))).sum();
    (1.0 + sign * rh) / 2.0 * (sigma_sq(spec) / den + total_switchover(spec))
}

/// Right-hand side of the pseudo-conservation law at the spec's load.
pub fn pcl_rhs(spec: &SystemSpec) -> f64 {
    let rho = spec.rho();
    let es = total_switchover(spec);
    let loads: Vec<f64> = spec.queues().iter().map(|q| rho * rho_hat(q)).collect();
    let sum_sq: f64 = loads.iter().map(|r| r * r).sum();
    let z = match spec.discipline() {
        Discipline::Exhaustive => 0.0,
        Discipline::Gated => sum_sq * es / (1.0 - rho),
    };
    rho * rho / (1.0 - rho) * residual_service_mix(spec)
        + rho * residual_switchover(spec)
        + es / 2.0 * (rho * rho - sum_sq) / (1.0 - rho)
        + z
}

/// Exact mean waiting time in a symmetric Poisson system.
pub fn symmetric_wait(spec: &SystemSpec) -> f64 {
    let rho = spec.rho();
    let n = spec.n() as f64;
    let es = total_switchover(spec);
    let spread = match spec.discipline() {
        Discipline::Exhaustive => 1.0 - 1.0 / n,
        Discipline::Gated => 1.0 + 1.0 / n,
    };
    rho / (1.0 - rho) * residual_service_mix(spec) + residual_switchover(spec) + rho * spread / (1.0 - rho) * es / 2.0
}

pub fn random_shares(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

fn random_interarrival(rng: &mut impl Rng, poisson: bool) -> (f64, DensityMode) {
    if poisson {
        let mode = if rng.random_bool(0.5) { DensityMode::ExactExponential } else { DensityMode::TwoMomentApprox };
        return (1.0, mode);
    }
    match rng.random_range(0..4) {
        0 => (rng.random_range(1.1..5.0), DensityMode::ExactH2),
        1 => (rng.random_range(0.1..0.95), DensityMode::ExactMixedErlang),
        2 => (rng.random_range(0.1..5.0), DensityMode::TwoMomentApprox),
        _ => (rng.random_range(0.1..5.0), DensityMode::UserValue(rng.random_range(0.0..2.0))),
    }
}

/// A valid system with random loads, service laws, switch-overs and
/// interarrival laws.
pub fn random_spec(rng: &mut impl Rng, discipline: Discipline, poisson: bool) -> SystemSpec {
    let n = rng.random_range(1..=6);
    let shares = random_shares(rng, n);
    let queues = shares
        .iter()
        .map(|&share| {
            let mean_service = rng.random_range(0.05..3.0);
            let (scv_interarrival, density_mode) = random_interarrival(rng, poisson);
            QueueSpec {
                mean_service,
                scv_service: rng.random_range(0.0..4.0),
                mean_interarrival_at_saturation: mean_service / share,
                scv_interarrival,
                mean_switchover: rng.random_range(0.01..3.0),
                scv_switchover: rng.random_range(0.0..3.0),
                density_mode,
            }
        })
        .collect();
    SystemSpec::new(queues, discipline, rng.random_range(0.0..0.99)).expect("generated spec is valid")
}

/// Symmetric Poisson system: equal shares and service laws, unequal mean
/// switch-over times with a common variance.
pub fn symmetric_spec(n: usize, discipline: Discipline, rho: f64, scv_service: f64, var_switchover: f64) -> SystemSpec {
    let queues = (0..n)
        .map(|i| {
            let mean_switchover = 0.3 + 0.45 * i as f64;
            QueueSpec {
                mean_service: 0.8,
                scv_service,
                mean_interarrival_at_saturation: 0.8 * n as f64,
                scv_interarrival: 1.0,
                mean_switchover,
                scv_switchover: var_switchover / (mean_switchover * mean_switchover),
                density_mode: DensityMode::ExactExponential,
            }
        })
        .collect();
    SystemSpec::new(queues, discipline, rho).unwrap()
}

/// Single Poisson queue with exponential service of mean 1 and a constant
/// switch-over (vacation) of length 1.
pub fn vacation_spec(discipline: Discipline, rho: f64) -> SystemSpec {
    let q = QueueSpec {
        scv_switchover: 0.0,
        ..QueueSpec::markovian(1.0, 1.0, 1.0)
    };
    SystemSpec::new(vec![q], discipline, rho).unwrap()
}

/// Three Poisson queues with unequal loads and service laws and constant
/// switch-over times scaled by `scale`.
pub fn large_switchover_spec(discipline: Discipline, rho: f64, scale: f64) -> SystemSpec {
    let shares = [0.15, 0.35, 0.5];
    let services = [0.5, 1.0, 2.0];
    let switchovers = [1.0, 2.0, 0.5];
    let queues = (0..3)
        .map(|i| QueueSpec {
            mean_service: services[i],
            scv_service: 0.5 + i as f64,
            mean_interarrival_at_saturation: services[i] / shares[i],
            scv_interarrival: 1.0,
            mean_switchover: switchovers[i] * scale,
            scv_switchover: 0.0,
            density_mode: DensityMode::ExactExponential,
        })
        .collect();
    SystemSpec::new(queues, discipline, rho).unwrap()
}
