//! Discrete-event simulation of a cyclic polling system with renewal arrivals.
//!
//! The server visits queues `0, 1, ..., N-1, 0, ...`, serves queue `i`
//! according to the discipline, then incurs switch-over `S_i`. Every
//! interarrival, service and switch-over time is drawn from the two-moment
//! fit of the corresponding law.
//!
//! Arrival streams only interact through the server, so each queue keeps its
//! own renewal stream and materialises arrivals lazily whenever the server
//! looks at it. Tie rules at equal timestamps: arrival before service
//! completion before switch completion; an arrival exactly at a gate-closing
//! epoch stays behind the gate.
//!
//! A cycle starts at the beginning of a visit to queue 0. Runs are counted in
//! cycles: `warmup_cycles` are discarded, `measured_cycles` are split into
//! `batch_count` contiguous batches per replication, and all batches of all
//! replications feed batch-means confidence intervals.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{fit_two_moments, Sampler};
use crate::model::{Discipline, SystemSpec};
use crate::stats::{ratio_estimate, RatioEstimate};

/// Run lengths and seeding. The defaults (10^4 warm-up cycles, 10^5 measured
/// cycles, 10 replications, 20 batches each) are a choice, not a calibrated
/// precision target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub warmup_cycles: u64,
    pub measured_cycles: u64,
    pub replications: u32,
    pub base_seed: u64,
    pub batch_count: u32,
    /// Upper bound on customers served plus visits over all replications.
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            warmup_cycles: 10_000,
            measured_cycles: 100_000,
            replications: 10,
            base_seed: 0x5eed,
            batch_count: 20,
            max_events: 20_000_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_cycles == 0 || self.measured_cycles == 0 || self.batch_count == 0 {
            return Err(Error::InvalidConfig(
                "warmup_cycles, measured_cycles and batch_count must be positive".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.measured_cycles < 100 * (self.batch_count as u64) {
            return Err(Error::InvalidConfig(format!(
                "measured_cycles ({}) must be at least 100 x batch_count ({})",
                self.measured_cycles, self.batch_count
            )));
        }
        if (self.replications as u64) * (self.batch_count as u64) < 2 {
            return Err(Error::InvalidConfig(
                "need at least two batches in total for a confidence interval".into(),
            ));
        }
        Ok(())
    }

    fn total_cycles(&self) -> u64 {
        self.warmup_cycles + self.measured_cycles
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueSimEstimate {
    pub mean_wait: f64,
    /// 95% half-width.
    pub ci_half_width: f64,
    /// Customers whose service started during measurement.
    pub samples: u64,
    pub mean_queue_length: f64,
    pub queue_length_ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub queues: Vec<QueueSimEstimate>,
    pub samples: u64,
    /// Fraction of measured time the server spent serving.
    pub realized_load: f64,
    pub realized_load_ci_half_width: f64,
    pub mean_cycle: f64,
    pub mean_cycle_ci_half_width: f64,
    pub replications: u32,
    pub batches: usize,
    pub config: SimConfig,
}

impl SimEstimate {
    pub fn mean_waits(&self) -> Vec<f64> {
        self.queues.iter().map(|q| q.mean_wait).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    VisitBegin,
    ServiceBegin { arrived_at: f64 },
    ServiceEnd,
    /// `waiting` counts customers already arrived but not yet served.
    VisitEnd { waiting: usize },
    SwitchEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub queue: usize,
    pub cycle: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

struct QueueState {
    waiting: VecDeque<f64>,
    next_arrival: f64,
    interarrival: Sampler,
    service: Sampler,
    switchover: Option<Sampler>,
}

impl QueueState {
    /// Moves every arrival up to `until` into the waiting line; `inclusive`
    /// decides whether an arrival exactly at `until` counts.
    fn admit(&mut self, until: f64, inclusive: bool, rng: &mut ChaCha8Rng) {
        while self.next_arrival < until || (inclusive && self.next_arrival == until) {
            self.waiting.push_back(self.next_arrival);
            self.next_arrival += self.interarrival.sample(rng);
        }
    }
}

#[derive(Debug, Clone, Default)]
struct BatchTotals {
    wait_sum: Vec<f64>,
    sojourn_sum: Vec<f64>,
    count: Vec<f64>,
    busy: f64,
    duration: f64,
    cycles: f64,
}

#[derive(Debug, Clone)]
struct ReplicationStats {
    batches: Vec<BatchTotals>,
}

fn build_queues(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<Vec<QueueState>> {
    let mut queues = Vec::with_capacity(spec.n());
    for i in 0..spec.n() {
        let q = spec.queue(i);
        let interarrival = fit_two_moments(spec.effective_mean_interarrival(i), q.scv_interarrival)?.sampler();
        let service = fit_two_moments(q.mean_service, q.scv_service)?.sampler();
        let switchover = if q.mean_switchover > 0.0 {
            Some(fit_two_moments(q.mean_switchover, q.scv_switchover)?.sampler())
        } else {
            None
        };
        let first = interarrival.sample(rng);
        queues.push(QueueState {
            waiting: VecDeque::new(),
            next_arrival: first,
            interarrival,
            service,
            switchover,
        });
    }
    Ok(queues)
}

fn replication_rng(base_seed: u64, replication: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(replication as u64);
    rng
}

/// Expected number of customers plus visits for a full run, used to refuse
/// hopeless runs before starting them.
pub fn expected_events(spec: &SystemSpec, cfg: &SimConfig) -> f64 {
    let cycle = spec.total_switchover() / (1.0 - spec.rho());
    let per_cycle: f64 = (0..spec.n()).map(|i| spec.arrival_rate(i) * cycle).sum::<f64>() + spec.n() as f64;
    per_cycle * cfg.total_cycles() as f64 * cfg.replications as f64
}

fn run_replication(
    spec: &SystemSpec,
    cfg: &SimConfig,
    replication: u32,
    event_cap: u64,
    mut observer: Option<&mut dyn FnMut(&EventRecord)>,
) -> Result<ReplicationStats> {
    let n = spec.n();
    let mut rng = replication_rng(cfg.base_seed, replication);
    let mut queues = build_queues(spec, &mut rng)?;
    let gated = spec.discipline() == Discipline::Gated;

    let empty = BatchTotals {
        wait_sum: vec![0.0; n],
        sojourn_sum: vec![0.0; n],
        count: vec![0.0; n],
        ..Default::default()
    };
    let mut batches = vec![empty; cfg.batch_count as usize];

    let mut emit = |rec: EventRecord| {
        if let Some(obs) = observer.as_mut() {
            obs(&rec);
        }
    };

    let mut t = 0.0f64;
    let mut events = 0u64;
    for cycle in 0..cfg.total_cycles() {
        let mut batch = cycle
            .checked_sub(cfg.warmup_cycles)
            .map(|c| &mut batches[(c * cfg.batch_count as u64 / cfg.measured_cycles) as usize]);
        let cycle_start = t;
        for (i, q) in queues.iter_mut().enumerate() {
            emit(EventRecord { time: t, queue: i, cycle, kind: EventKind::VisitBegin });
            // Gated: only customers strictly before the visit start are behind the gate.
            let mut gate = if gated {
                q.admit(t, false, &mut rng);
                q.waiting.len()
            } else {
                usize::MAX
            };
            let visit_start = t;
            loop {
                if !gated {
                    q.admit(t, true, &mut rng);
                }
                if gate == 0 {
                    break;
                }
                let Some(arrived) = q.waiting.pop_front() else { break };
                gate = gate.saturating_sub(1);
                emit(EventRecord { time: t, queue: i, cycle, kind: EventKind::ServiceBegin { arrived_at: arrived } });
                let service = q.service.sample(&mut rng);
                if let Some(b) = batch.as_deref_mut() {
                    b.wait_sum[i] += t - arrived;
                    b.sojourn_sum[i] += t + service - arrived;
                    b.count[i] += 1.0;
                }
                t += service;
                emit(EventRecord { time: t, queue: i, cycle, kind: EventKind::ServiceEnd });
                events += 1;
            }
            if let Some(b) = batch.as_deref_mut() {
                b.busy += t - visit_start;
            }
            // Customers that arrived during a gated visit join the line now so the
            // backlog count is exact; they would be admitted at the next visit anyway.
            q.admit(t, true, &mut rng);
            emit(EventRecord { time: t, queue: i, cycle, kind: EventKind::VisitEnd { waiting: q.waiting.len() } });
            if let Some(s) = &q.switchover {
                t += s.sample(&mut rng);
            }
            emit(EventRecord { time: t, queue: i, cycle, kind: EventKind::SwitchEnd });
        }
        events += n as u64;
        if events > event_cap {
            return Err(Error::NumericalBudget { events, cap: event_cap });
        }
        if let Some(b) = batch.as_deref_mut() {
            b.duration += t - cycle_start;
            b.cycles += 1.0;
        }
    }
    Ok(ReplicationStats { batches })
}

fn check_runnable(spec: &SystemSpec, cfg: &SimConfig) -> Result<()> {
    spec.validate()?;
    cfg.validate()?;
    if spec.rho() == 0.0 {
        return Err(Error::ZeroLoad);
    }
    let expected = expected_events(spec, cfg);
    if expected > cfg.max_events as f64 {
        return Err(Error::NumericalBudget { events: expected as u64, cap: cfg.max_events });
    }
    Ok(())
}

/// Runs `cfg.replications` independent replications in parallel and pools
/// their batches.
pub fn simulate(spec: &SystemSpec, cfg: &SimConfig) -> Result<SimEstimate> {
    check_runnable(spec, cfg)?;
    let per_replication_cap = cfg.max_events / cfg.replications as u64;
    let reps = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(spec, cfg, r, per_replication_cap, None))
        .collect::<Result<Vec<_>>>()?;
    aggregate(spec, cfg, &reps)
}

/// Runs a single replication sequentially, reporting every server event to
/// `observer`. Replication `r` here is bit-identical to replication `r` of
/// [`simulate`].
pub fn simulate_replication_with_events(
    spec: &SystemSpec,
    cfg: &SimConfig,
    replication: u32,
    observer: &mut dyn FnMut(&EventRecord),
) -> Result<SimEstimate> {
    check_runnable(spec, cfg)?;
    let single = SimConfig { replications: 1, ..*cfg };
    let stats = run_replication(spec, cfg, replication, cfg.max_events, Some(observer))?;
    aggregate(spec, &single, &[stats])
}

fn aggregate(spec: &SystemSpec, cfg: &SimConfig, reps: &[ReplicationStats]) -> Result<SimEstimate> {
    let batches: Vec<&BatchTotals> = reps.iter().flat_map(|r| r.batches.iter()).collect();
    let series = |f: &dyn Fn(&BatchTotals) -> f64| batches.iter().map(|b| f(b)).collect::<Vec<f64>>();

    let duration = series(&|b| b.duration);
    let mut queues = Vec::with_capacity(spec.n());
    let mut total = 0u64;
    for i in 0..spec.n() {
        let count = series(&|b| b.count[i]);
        let samples = count.iter().sum::<f64>() as u64;
        if samples == 0 {
            return Err(Error::InvalidConfig(format!(
                "no customer of queue {i} was served during measurement; increase measured_cycles"
            )));
        }
        total += samples;
        let wait = ratio_estimate(&series(&|b| b.wait_sum[i]), &count);
        let length = ratio_estimate(&series(&|b| b.sojourn_sum[i]), &duration);
        queues.push(QueueSimEstimate {
            mean_wait: wait.value,
            ci_half_width: wait.half_width,
            samples,
            mean_queue_length: length.value,
            queue_length_ci_half_width: length.half_width,
        });
    }
    let RatioEstimate { value: load, half_width: load_hw } = ratio_estimate(&series(&|b| b.busy), &duration);
    let cycle = ratio_estimate(&duration, &series(&|b| b.cycles));

    Ok(SimEstimate {
        queues,
        samples: total,
        realized_load: load,
        realized_load_ci_half_width: load_hw,
        mean_cycle: cycle.value,
        mean_cycle_ci_half_width: cycle.half_width,
        replications: cfg.replications,
        batches: batches.len(),
        config: *cfg,
    })
}
