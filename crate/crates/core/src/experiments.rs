//! Test-bed regeneration and approximation-versus-simulation comparisons.
//!
//! The grid crosses the number of queues, the load, the three SCVs, the
//! arrival and service imbalances and the switch-over to service ratio.
//! Arrival rates at saturation step linearly from largest (queue 1) to
//! smallest (queue N) with average 1; mean service times grow linearly with
//! `E[B_N] = I_B E[B_1]` and are normalised so that `sum lambda_i E[B_i] = 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{mean_wait, Method};
use crate::error::{Error, Result};
use crate::model::{DensityMode, Discipline, QueueSpec, SystemSpec};
use crate::sim::{simulate, SimConfig};

/// Relative CI half-width above which an oracle value is flagged as imprecise.
pub const DEFAULT_CI_FLAG: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBedCase {
    pub n_queues: usize,
    pub rho: f64,
    pub scv_a: f64,
    pub scv_b: f64,
    pub scv_s: f64,
    pub imbalance_a: f64,
    pub imbalance_b: f64,
    pub switch_service_ratio: f64,
}

impl TestBedCase {
    pub fn is_poisson(&self) -> bool {
        self.scv_a == 1.0
    }

    pub fn is_balanced(&self) -> bool {
        self.imbalance_a == 1.0 && self.imbalance_b == 1.0
    }
}

/// Value lists for each test-bed dimension, enumerated in this field order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_queues: Vec<usize>,
    pub rho: Vec<f64>,
    pub scv_a: Vec<f64>,
    pub scv_b: Vec<f64>,
    pub scv_s: Vec<f64>,
    pub imbalance_a: Vec<f64>,
    pub imbalance_b: Vec<f64>,
    pub switch_service_ratio: Vec<f64>,
}

impl Grid {
    /// The 2304-case base test bed.
    pub fn table1() -> Self {
        Grid {
            n_queues: vec![2, 3, 4, 5],
            rho: vec![0.1, 0.3, 0.5, 0.7, 0.9, 0.99],
            scv_a: vec![0.25, 1.0, 2.0],
            scv_b: vec![0.25, 1.0],
            scv_s: vec![0.25, 1.0],
            imbalance_a: vec![1.0, 5.0],
            imbalance_b: vec![1.0, 5.0],
            switch_service_ratio: vec![1.0, 5.0],
        }
    }

    /// Poisson arrivals with highly variable service and switch-over times (768 cases).
    pub fn high_scv() -> Self {
        Grid {
            scv_a: vec![1.0],
            scv_b: vec![2.0, 5.0],
            scv_s: vec![2.0, 5.0],
            ..Grid::table1()
        }
    }

    pub fn enumerate(&self) -> Vec<TestBedCase> {
        let mut cases = Vec::new();
        for &n_queues in &self.n_queues {
            for &rho in &self.rho {
                for &scv_a in &self.scv_a {
                    for &scv_b in &self.scv_b {
                        for &scv_s in &self.scv_s {
                            for &imbalance_a in &self.imbalance_a {
                                for &imbalance_b in &self.imbalance_b {
                                    for &switch_service_ratio in &self.switch_service_ratio {
                                        cases.push(TestBedCase {
                                            n_queues,
                                            rho,
                                            scv_a,
                                            scv_b,
                                            scv_s,
                                            imbalance_a,
                                            imbalance_b,
                                            switch_service_ratio,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        cases
    }
}

pub fn enumerate_testbed() -> Vec<TestBedCase> {
    Grid::table1().enumerate()
}

/// Saturation arrival rates: linear in `i`, average 1, first/last = `imbalance`.
pub fn saturation_rates(n: usize, imbalance: f64) -> Vec<f64> {
    let first = 2.0 * imbalance / (1.0 + imbalance);
    let last = first / imbalance;
    linear(n, first, last)
}

fn linear(n: usize, first: f64, last: f64) -> Vec<f64> {
    if n == 1 {
        return vec![first];
    }
    (0..n)
        .map(|i| first + (last - first) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn materialize_case(case: &TestBedCase, discipline: Discipline) -> Result<SystemSpec> {
    let n = case.n_queues;
    let rates = saturation_rates(n, case.imbalance_a);
    let shape = linear(n, 1.0, case.imbalance_b);
    let scale = 1.0 / rates.iter().zip(&shape).map(|(l, b)| l * b).sum::<f64>();
    let queues = rates
        .iter()
        .zip(&shape)
        .map(|(&rate, &b)| {
            let mean_service = scale * b;
            QueueSpec {
                mean_service,
                scv_service: case.scv_b,
                mean_interarrival_at_saturation: 1.0 / rate,
                scv_interarrival: case.scv_a,
                mean_switchover: case.switch_service_ratio * mean_service,
                scv_switchover: case.scv_s,
                density_mode: DensityMode::exact_for_scv(case.scv_a),
            }
        })
        .collect();
    SystemSpec::new(queues, discipline, case.rho)
}

/// Why a system is known to be reproduced exactly by the interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactClass {
    /// Poisson arrivals, equal loads, identical service laws, equal switch-over variances.
    Symmetric,
    /// Exhaustive two-queue system meeting the load/imbalance constraint.
    TwoQueueConstraint,
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

pub fn is_symmetric_poisson(spec: &SystemSpec, tol: f64) -> bool {
    let q0 = spec.queue(0);
    spec.all_poisson()
        && spec.queues().iter().all(|q| {
            rel_eq(q.rho_hat(), q0.rho_hat(), tol)
                && rel_eq(q.mean_service, q0.mean_service, tol)
                && rel_eq(q.scv_service, q0.scv_service, tol)
                && rel_eq(q.var_switchover(), q0.var_switchover(), tol)
        })
}

/// Two exhaustive Poisson queues with equal service and switch-over laws and
/// `rho = (1 + I^2) / (2 I) - c_S / (1 + c_B) * E[S_i] / E[B_i]`, `I = rho_hat_1 / rho_hat_2`.
pub fn satisfies_two_queue_constraint(spec: &SystemSpec, tol: f64) -> bool {
    if spec.n() != 2 || spec.discipline() != Discipline::Exhaustive || !spec.all_poisson() {
        return false;
    }
    let (a, b) = (spec.queue(0), spec.queue(1));
    let same = rel_eq(a.mean_service, b.mean_service, tol)
        && rel_eq(a.mean_switchover, b.mean_switchover, tol)
        && rel_eq(a.scv_service, b.scv_service, tol)
        && rel_eq(a.scv_switchover, b.scv_switchover, tol);
    if !same {
        return false;
    }
    let imbalance = a.rho_hat() / b.rho_hat();
    let target = (1.0 + imbalance * imbalance) / (2.0 * imbalance)
        - a.scv_switchover / (1.0 + a.scv_service) * a.mean_switchover / a.mean_service;
    (spec.rho() - target).abs() <= tol
}

pub fn classify_exact(spec: &SystemSpec) -> Option<ExactClass> {
    const TOL: f64 = 1e-9;
    if is_symmetric_poisson(spec, TOL) {
        Some(ExactClass::Symmetric)
    } else if satisfies_two_queue_constraint(spec, TOL) {
        Some(ExactClass::TwoQueueConstraint)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// Every case with Poisson arrivals.
    Poisson,
    /// Non-Poisson cases, a fixed number per (N, rho) cell; the same
    /// combination of the remaining factors is used for every N. A grid
    /// without non-Poisson arrivals is sampled as is.
    Sampled { per_cell: usize, seed: u64 },
    Full,
}

impl Subset {
    pub const DESK_SAMPLE: Subset = Subset::Sampled { per_cell: 4, seed: 2010 };

    pub fn select(self, grid: &Grid) -> Vec<TestBedCase> {
        let all = grid.enumerate();
        match self {
            Subset::Full => all,
            Subset::Poisson => all.into_iter().filter(TestBedCase::is_poisson).collect(),
            Subset::Sampled { per_cell, seed } => {
                let mut scv_a: Vec<f64> = grid.scv_a.iter().copied().filter(|&c| c != 1.0).collect();
                if scv_a.is_empty() {
                    scv_a = grid.scv_a.clone();
                }
                let template = Grid { n_queues: vec![grid.n_queues[0]], rho: vec![grid.rho[0]], scv_a, ..grid.clone() };
                let mut combos = template.enumerate();
                combos.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let mut picked = Vec::new();
                for &n_queues in &grid.n_queues {
                    for (r, &rho) in grid.rho.iter().enumerate() {
                        for j in 0..per_cell {
                            let c = combos[(r * per_cell + j) % combos.len()];
                            picked.push(TestBedCase { n_queues, rho, ..c });
                        }
                    }
                }
                picked
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Simulation,
}

/// Simulation settings for a comparison run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConfig {
    pub sim: SimConfig,
    /// Lengthen runs for `rho > 0.9` by `0.1 / (1 - rho)`.
    pub scale_heavy_loads: bool,
    /// Measured cycles that the heavy-load scaling starts from; defaults to
    /// `sim.measured_cycles`. Each heavy-load cycle carries about
    /// `1 / (1 - rho)` times as many events, so a smaller base keeps the
    /// cost of those cases in check.
    pub heavy_base_cycles: Option<u64>,
    pub ci_flag: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            sim: SimConfig::default(),
            scale_heavy_loads: true,
            heavy_base_cycles: None,
            ci_flag: DEFAULT_CI_FLAG,
        }
    }
}

impl ComparisonConfig {
    pub fn sim_for(&self, case_index: usize, rho: f64) -> SimConfig {
        let mut cfg = self.sim;
        cfg.base_seed = self.sim.base_seed.wrapping_add((case_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        if self.scale_heavy_loads && rho > 0.9 {
            let base = self.heavy_base_cycles.unwrap_or(cfg.measured_cycles);
            let factor = 0.1 / (1.0 - rho) * base as f64 / cfg.measured_cycles as f64;
            let batches = cfg.batch_count as u64;
            cfg.measured_cycles = ((cfg.measured_cycles as f64 * factor).round() as u64).div_ceil(batches) * batches;
            cfg.warmup_cycles = (cfg.warmup_cycles as f64 * factor).ceil() as u64;
        }
        cfg
    }
}

/// One (case, queue, method) observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub case_index: usize,
    pub n_queues: usize,
    pub rho: f64,
    pub scv_a: f64,
    pub scv_b: f64,
    pub scv_s: f64,
    pub imbalance_a: f64,
    pub imbalance_b: f64,
    pub switch_service_ratio: f64,
    pub discipline: Discipline,
    pub queue: usize,
    pub method: Method,
    pub approximation: f64,
    pub oracle: f64,
    pub ci_half_width: f64,
    /// `|approximation - oracle| / oracle`.
    pub rel_error: f64,
    /// Signed `(approximation - oracle) / oracle`.
    pub signed_error: f64,
    pub ci_flagged: bool,
}

impl RawRow {
    pub fn case(&self) -> TestBedCase {
        TestBedCase {
            n_queues: self.n_queues,
            rho: self.rho,
            scv_a: self.scv_a,
            scv_b: self.scv_b,
            scv_s: self.scv_s,
            imbalance_a: self.imbalance_a,
            imbalance_b: self.imbalance_b,
            switch_service_ratio: self.switch_service_ratio,
        }
    }
}

/// Runs every case through the simulator once and evaluates each method
/// against it. Cases run in parallel; rows come back in case order.
pub fn run_comparison(
    cases: &[TestBedCase],
    discipline: Discipline,
    methods: &[Method],
    oracle: Oracle,
    cfg: &ComparisonConfig,
) -> Result<ErrorReport> {
    let Oracle::Simulation = oracle;
    let per_case = cases
        .par_iter()
        .enumerate()
        .map(|(index, case)| compare_case(index, case, discipline, methods, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport { rows: per_case.into_iter().flatten().collect() })
}

fn compare_case(
    index: usize,
    case: &TestBedCase,
    discipline: Discipline,
    methods: &[Method],
    cfg: &ComparisonConfig,
) -> Result<Vec<RawRow>> {
    let spec = materialize_case(case, discipline)?;
    let est = simulate(&spec, &cfg.sim_for(index, case.rho))?;
    let mut rows = Vec::with_capacity(methods.len() * spec.n());
    for &method in methods {
        let approx = mean_wait(&spec, method)?;
        for (queue, (a, e)) in approx.queues.iter().zip(&est.queues).enumerate() {
            let signed = (a.mean_wait - e.mean_wait) / e.mean_wait;
            rows.push(RawRow {
                case_index: index,
                n_queues: case.n_queues,
                rho: case.rho,
                scv_a: case.scv_a,
                scv_b: case.scv_b,
                scv_s: case.scv_s,
                imbalance_a: case.imbalance_a,
                imbalance_b: case.imbalance_b,
                switch_service_ratio: case.switch_service_ratio,
                discipline,
                queue,
                method,
                approximation: a.mean_wait,
                oracle: e.mean_wait,
                ci_half_width: e.ci_half_width,
                rel_error: signed.abs(),
                signed_error: signed,
                ci_flagged: e.ci_half_width > cfg.ci_flag * e.mean_wait,
            });
        }
    }
    Ok(rows)
}

/// Upper edges of the 5-point error bins; the last bin is open.
pub const BIN_EDGES: [f64; 4] = [0.05, 0.10, 0.15, 0.20];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    Load,
    ScvArrival,
    Imbalance,
}

impl Facet {
    fn key(self, row: &RawRow) -> String {
        match self {
            Facet::Load => format!("{:.2}", row.rho),
            Facet::ScvArrival => format!("{}", row.scv_a),
            Facet::Imbalance => format!("IA={} IB={}", row.imbalance_a, row.imbalance_b),
        }
    }

    fn title(self) -> &'static str {
        match self {
            Facet::Load => "load",
            Facet::ScvArrival => "scv interarrival",
            Facet::Imbalance => "imbalance interarrival/service",
        }
    }
}

/// A rectangular table: one row per number of queues.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<f64>)>,
    /// Observations behind each cell.
    pub counts: Vec<Vec<usize>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for c in &self.columns {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for (n, values) in &self.rows {
            let _ = write!(out, "{n}");
            for v in values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.columns.iter().map(|c| c.len()).max().unwrap_or(0).max(8);
        let mut out = format!("{} ({})\n", self.title, self.name);
        let _ = write!(out, "{:>3} |", "N");
        for c in &self.columns {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        let _ = writeln!(out, "{}", "-".repeat(5 + self.columns.len() * (width + 1)));
        for (n, values) in &self.rows {
            let _ = write!(out, "{n:>3} |");
            for v in values {
                if v.is_nan() {
                    let _ = write!(out, " {:>width$}", "-");
                } else {
                    let _ = write!(out, " {v:>width$.2}");
                }
            }
            out.push('\n');
        }
        let total: usize = self.counts.iter().flatten().sum();
        let _ = writeln!(out, "({total} observations)");
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Raw per-queue comparison rows; every table is computed from these alone.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<RawRow>,
}

impl ErrorReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Data(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_csv(data: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(data.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<RawRow>, _>>()
            .map_err(|e| Error::Data(e.to_string()))?;
        Ok(ErrorReport { rows })
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m: Vec<Method> = self.rows.iter().map(|r| r.method).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn filter(&self, keep: impl Fn(&RawRow) -> bool) -> ErrorReport {
        ErrorReport { rows: self.rows.iter().filter(|r| keep(r)).copied().collect() }
    }

    fn errors_by_n(&self, method: Method) -> BTreeMap<usize, Vec<f64>> {
        let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.method == method) {
            by_n.entry(r.n_queues).or_default().push(r.rel_error);
        }
        by_n
    }

    /// Mean relative error (as a fraction) per number of queues.
    pub fn mean_by_n(&self, method: Method) -> BTreeMap<usize, f64> {
        self.errors_by_n(method)
            .into_iter()
            .map(|(n, e)| (n, e.iter().sum::<f64>() / e.len() as f64))
            .collect()
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.ci_flagged).count()
    }

    /// Percentage of relative errors per 5-point bin, per number of queues.
    pub fn bin_table(&self, name: &str, method: Method) -> Table {
        let mut columns: Vec<String> = Vec::new();
        let mut lower = 0.0;
        for edge in BIN_EDGES {
            columns.push(format!("{:.0}-{:.0}%", lower * 100.0, edge * 100.0));
            lower = edge;
        }
        columns.push(format!(">={:.0}%", lower * 100.0));
        let mut rows = Vec::new();
        let mut counts = Vec::new();
        for (n, errors) in self.errors_by_n(method) {
            let mut hits = vec![0usize; columns.len()];
            for e in &errors {
                let bin = BIN_EDGES.iter().position(|&edge| *e < edge).unwrap_or(BIN_EDGES.len());
                hits[bin] += 1;
            }
            let total = errors.len() as f64;
            rows.push((n, hits.iter().map(|&h| 100.0 * h as f64 / total).collect()));
            counts.push(hits);
        }
        Table {
            name: name.to_string(),
            title: format!("{method}: relative error bins (% of queues)"),
            columns,
            rows,
            counts,
        }
    }

    /// Mean relative error (%) per number of queues and facet level.
    pub fn facet_table(&self, name: &str, method: Method, facet: Facet) -> Table {
        let mut levels: Vec<(f64, f64, String)> = Vec::new();
        let mut cells: BTreeMap<(usize, String), (f64, usize)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.method == method) {
            let key = facet.key(r);
            let order = match facet {
                Facet::Load => (r.rho, 0.0),
                Facet::ScvArrival => (r.scv_a, 0.0),
                Facet::Imbalance => (r.imbalance_a, r.imbalance_b),
            };
            if !levels.iter().any(|(_, _, k)| *k == key) {
                levels.push((order.0, order.1, key.clone()));
            }
            let cell = cells.entry((r.n_queues, key)).or_insert((0.0, 0));
            cell.0 += r.rel_error;
            cell.1 += 1;
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut ns: Vec<usize> = cells.keys().map(|(n, _)| *n).collect();
        ns.dedup();
        let mut rows = Vec::new();
        let mut counts = Vec::new();
        for n in ns {
            let mut values = Vec::new();
            let mut cnt = Vec::new();
            for (_, _, key) in &levels {
                let (sum, c) = cells.get(&(n, key.clone())).copied().unwrap_or((0.0, 0));
                values.push(if c == 0 { f64::NAN } else { 100.0 * sum / c as f64 });
                cnt.push(c);
            }
            rows.push((n, values));
            counts.push(cnt);
        }
        Table {
            name: name.to_string(),
            title: format!("{method}: mean relative error (%) by {}", facet.title()),
            columns: levels.into_iter().map(|(_, _, k)| k).collect(),
            rows,
            counts,
        }
    }

    /// The standard table set for one discipline. Exhaustive runs yield the
    /// bins and facet tables for the interpolation, load tables for the
    /// single-limit comparators and the Poisson-only interpolation/PCL bins;
    /// gated runs yield the bins and facet tables. A report built on the
    /// high-SCV grid yields only its bin table.
    pub fn standard_tables(&self, discipline: Discipline) -> Vec<Table> {
        let methods = self.methods();
        let has = |m: Method| methods.contains(&m);
        let mut tables = Vec::new();
        if !self.rows.is_empty() && self.rows.iter().all(|r| r.scv_b > 1.0 && r.scv_s > 1.0) {
            if has(Method::Interpolation) {
                tables.push(self.bin_table("table4", Method::Interpolation));
            }
            return tables;
        }
        let (bins, facets) = match discipline {
            Discipline::Exhaustive => ("table2", ["table3a", "table3b", "table3c"]),
            Discipline::Gated => ("table7", ["table8a", "table8b", "table8c"]),
        };
        if has(Method::Interpolation) {
            tables.push(self.bin_table(bins, Method::Interpolation));
            for (name, facet) in facets.iter().zip([Facet::Load, Facet::ScvArrival, Facet::Imbalance]) {
                tables.push(self.facet_table(name, Method::Interpolation, facet));
            }
        }
        if discipline == Discipline::Exhaustive {
            for (name, m) in [("table5a", Method::HtOnly), ("table5b", Method::LargeS), ("table5c", Method::LtOnly)] {
                if has(m) {
                    tables.push(self.facet_table(name, m, Facet::Load));
                }
            }
            let poisson = self.filter(|r| r.scv_a == 1.0);
            if !poisson.rows.is_empty() {
                for (name, m) in [("table6a", Method::Interpolation), ("table6b", Method::PclBased)] {
                    if has(m) {
                        tables.push(poisson.bin_table(name, m));
                    }
                }
            }
        }
        tables
    }
}

/// Ready-made systems.
pub mod presets {
    use super::*;

    /// Three queues with load shares 0.1/0.3/0.6, exponential service and
    /// switch-over of mean 1, hyperexponential arrivals with scv 3.
    pub fn showcase(rho: f64) -> Result<SystemSpec> {
        let queues = [0.1, 0.3, 0.6]
            .iter()
            .map(|&share| QueueSpec {
                scv_interarrival: 3.0,
                density_mode: DensityMode::ExactH2,
                ..QueueSpec::markovian(1.0, 1.0 / share, 1.0)
            })
            .collect();
        SystemSpec::new(queues, Discipline::Exhaustive, rho)
    }

    /// Two Poisson queues with switch-over five times shorter than service
    /// (`E[B] = 9/40`, `E[S_i] = 9/200`) and `lambda_1 = 5 lambda_2`.
    pub fn small_switchover(rho: f64) -> Result<SystemSpec> {
        let b = 9.0 / 40.0;
        let total_rate = 1.0 / b;
        let rates = [total_rate * 5.0 / 6.0, total_rate / 6.0];
        let queues = rates
            .iter()
            .map(|r| QueueSpec::markovian(b, 1.0 / r, 9.0 / 200.0))
            .collect();
        SystemSpec::new(queues, Discipline::Exhaustive, rho)
    }
}
