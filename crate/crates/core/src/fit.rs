//! Two-moment distribution fitting and the interarrival density-at-zero term.
//!
//! The fitted families are the usual ones for a two-moment match:
//! a balanced-means two-phase hyperexponential above scv 1, a mixture of
//! Erlang(k-1) and Erlang(k) with a common rate below it, the exponential at
//! exactly 1 and a point mass at 0.
//!
//! The same fits drive both the light-traffic density term and the
//! simulator's random variates.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};

/// Erlang phases summed directly up to this shape; a gamma sampler beyond.
const DIRECT_ERLANG_MAX: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitKind {
    Deterministic,
    Exponential { rate: f64 },
    /// Phase 1 with probability `p` at rate `mu1`, otherwise rate `mu2`;
    /// `p / mu1 == (1 - p) / mu2`.
    HyperExp2Balanced { p: f64, mu1: f64, mu2: f64 },
    /// Erlang(k-1) with probability `p`, otherwise Erlang(k), both at rate `mu`.
    MixedErlang { k: u64, p: f64, mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedDistribution {
    pub kind: FitKind,
    pub mean: f64,
    pub scv: f64,
}

fn check_moments(mean: f64, scv: f64) -> Result<()> {
    if mean.is_finite() && mean > 0.0 && scv.is_finite() && scv >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMoment { mean, scv })
    }
}

/// `k = ceil(1 / scv)`, snapping to the integer when `1 / scv` is one up to rounding
/// (so scv = 1/3 gives k = 3, not 4).
fn erlang_order(scv: f64) -> u64 {
    let inv = 1.0 / scv;
    let nearest = inv.round();
    if (inv - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        inv.ceil() as u64
    }
}

pub fn fit_two_moments(mean: f64, scv: f64) -> Result<FittedDistribution> {
    check_moments(mean, scv)?;
    let kind = if scv == 0.0 {
        FitKind::Deterministic
    } else if scv == 1.0 {
        FitKind::Exponential { rate: 1.0 / mean }
    } else if scv > 1.0 {
        let r = ((scv - 1.0) / (scv + 1.0)).sqrt();
        FitKind::HyperExp2Balanced {
            p: 0.5 * (1.0 + r),
            mu1: (1.0 + r) / mean,
            mu2: (1.0 - r) / mean,
        }
    } else {
        let k = erlang_order(scv);
        let kf = k as f64;
        let radicand = (kf * (1.0 + scv) - kf * kf * scv).max(0.0);
        let p = ((kf * scv - radicand.sqrt()) / (1.0 + scv)).clamp(0.0, 1.0);
        FitKind::MixedErlang { k, p, mu: (kf - p) / mean }
    };
    Ok(FittedDistribution { kind, mean, scv })
}

impl FittedDistribution {
    /// First and second raw moments computed from the fitted parameters.
    pub fn raw_moments(&self) -> (f64, f64) {
        match self.kind {
            FitKind::Deterministic => (self.mean, self.mean * self.mean),
            FitKind::Exponential { rate } => (1.0 / rate, 2.0 / (rate * rate)),
            FitKind::HyperExp2Balanced { p, mu1, mu2 } => (
                p / mu1 + (1.0 - p) / mu2,
                2.0 * p / (mu1 * mu1) + 2.0 * (1.0 - p) / (mu2 * mu2),
            ),
            FitKind::MixedErlang { k, p, mu } => {
                let k = k as f64;
                (
                    (p * (k - 1.0) + (1.0 - p) * k) / mu,
                    (p * (k - 1.0) * k + (1.0 - p) * k * (k + 1.0)) / (mu * mu),
                )
            }
        }
    }

    pub fn realized_mean(&self) -> f64 {
        self.raw_moments().0
    }

    pub fn realized_scv(&self) -> f64 {
        let (m1, m2) = self.raw_moments();
        (m2 - m1 * m1) / (m1 * m1)
    }

    pub fn sampler(&self) -> Sampler {
        let inner = match self.kind {
            FitKind::Deterministic => SamplerKind::Constant(self.mean),
            FitKind::Exponential { rate } => SamplerKind::Exp { scale: 1.0 / rate },
            FitKind::HyperExp2Balanced { p, mu1, mu2 } => SamplerKind::H2 {
                p,
                scale1: 1.0 / mu1,
                scale2: 1.0 / mu2,
            },
            FitKind::MixedErlang { k, p, mu } => SamplerKind::Erlang {
                p,
                short: ErlangSampler::new(k - 1, mu),
                long: ErlangSampler::new(k, mu),
            },
        };
        Sampler(inner)
    }
}

/// `E[A] g(0)` for the fitted law. Scale-free: it does not depend on the mean.
pub fn density_at_zero(dist: &FittedDistribution) -> f64 {
    match dist.kind {
        FitKind::Deterministic => 0.0,
        FitKind::Exponential { .. } => 1.0,
        FitKind::HyperExp2Balanced { p, mu1, mu2 } => dist.mean * (p * mu1 + (1.0 - p) * mu2),
        FitKind::MixedErlang { k, p, mu } => match k {
            // Erlang(1) is the only phase with positive density at 0.
            1 => dist.mean * (1.0 - p) * mu,
            2 => dist.mean * p * mu,
            _ => 0.0,
        },
    }
}

/// Piecewise two-moment rule for `E[A] g(0)`: `2c/(c+1)` for `c > 1`, `c^4` otherwise.
pub fn density_at_zero_two_moment_approx(scv: f64) -> f64 {
    if scv > 1.0 {
        2.0 * scv / (scv + 1.0)
    } else {
        scv.powi(4)
    }
}

/// One variate from `dist`. Prefer [`FittedDistribution::sampler`] in loops.
pub fn sample<R: Rng + ?Sized>(dist: &FittedDistribution, rng: &mut R) -> f64 {
    dist.sampler().sample(rng)
}

#[derive(Debug, Clone)]
enum ErlangSampler {
    Zero,
    Direct { k: u64, scale: f64 },
    Gamma(Gamma<f64>),
}

impl ErlangSampler {
    fn new(k: u64, rate: f64) -> Self {
        match k {
            0 => ErlangSampler::Zero,
            k if k <= DIRECT_ERLANG_MAX => ErlangSampler::Direct { k, scale: 1.0 / rate },
            k => ErlangSampler::Gamma(Gamma::new(k as f64, 1.0 / rate).expect("positive shape and scale")),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErlangSampler::Zero => 0.0,
            ErlangSampler::Direct { k, scale } => {
                let mut total = 0.0;
                for _ in 0..*k {
                    let e: f64 = rng.sample(Exp1);
                    total += e;
                }
                total * scale
            }
            ErlangSampler::Gamma(g) => g.sample(rng),
        }
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Constant(f64),
    Exp { scale: f64 },
    H2 { p: f64, scale1: f64, scale2: f64 },
    Erlang { p: f64, short: ErlangSampler, long: ErlangSampler },
}

/// Prepared variate generator for a [`FittedDistribution`].
#[derive(Debug, Clone)]
pub struct Sampler(SamplerKind);

impl Distribution<f64> for Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.0 {
            SamplerKind::Constant(c) => *c,
            SamplerKind::Exp { scale } => {
                let e: f64 = rng.sample(Exp1);
                e * scale
            }
            SamplerKind::H2 { p, scale1, scale2 } => {
                let scale = if rng.random::<f64>() < *p { scale1 } else { scale2 };
                let e: f64 = rng.sample(Exp1);
                e * scale
            }
            SamplerKind::Erlang { p, short, long } => {
                if rng.random::<f64>() < *p {
                    short.sample(rng)
                } else {
                    long.sample(rng)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_scv_is_exponential() {
        let d = fit_two_moments(1.0, 1.0).unwrap();
        assert_eq!(d.kind, FitKind::Exponential { rate: 1.0 });
        assert_eq!(density_at_zero(&d), 1.0);
    }

    #[test]
    fn h2_for_scv_three() {
        let d = fit_two_moments(1.0, 3.0).unwrap();
        let FitKind::HyperExp2Balanced { p, mu1, mu2 } = d.kind else {
            panic!("expected H2, got {:?}", d.kind)
        };
        assert!((p - 0.5 * (1.0 + 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((p / mu1 - (1.0 - p) / mu2).abs() < 1e-12);
        assert!((density_at_zero(&d) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_erlang_order() {
        let d = fit_two_moments(1.0, 0.25).unwrap();
        assert!(matches!(d.kind, FitKind::MixedErlang { k: 4, .. }));
        assert_eq!(density_at_zero(&d), 0.0);
        let third = fit_two_moments(2.0, 1.0 / 3.0).unwrap();
        assert!(matches!(third.kind, FitKind::MixedErlang { k: 3, .. }));
    }

    #[test]
    fn k_two_density_is_p_two_minus_p() {
        let d = fit_two_moments(3.0, 0.7).unwrap();
        let FitKind::MixedErlang { k, p, .. } = d.kind else { panic!() };
        assert_eq!(k, 2);
        assert!(p > 0.0 && p < 1.0);
        assert!((density_at_zero(&d) - p * (2.0 - p)).abs() < 1e-14);
    }

    #[test]
    fn zero_scv_is_deterministic() {
        let d = fit_two_moments(2.0, 0.0).unwrap();
        assert_eq!(d.kind, FitKind::Deterministic);
        assert_eq!(density_at_zero(&d), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(sample(&d, &mut rng), 2.0);
        }
    }

    #[test]
    fn rejects_invalid_moments() {
        assert!(fit_two_moments(0.0, 1.0).is_err());
        assert!(fit_two_moments(1.0, -0.1).is_err());
        assert!(fit_two_moments(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn two_moment_rule_values() {
        assert_eq!(density_at_zero_two_moment_approx(1.0), 1.0);
        assert!((density_at_zero_two_moment_approx(1.0 + 1e-12) - 1.0).abs() < 1e-11);
        assert!((density_at_zero_two_moment_approx(2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(density_at_zero_two_moment_approx(0.25), 0.00390625);
    }

    fn sample_stats(dist: &FittedDistribution, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = dist.sampler();
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.sample(&mut rng);
            sum += x;
            sum2 += x * x;
        }
        let m = sum / n as f64;
        let var = sum2 / n as f64 - m * m;
        (m, var / (m * m))
    }

    #[test]
    fn exponential_sample_mean() {
        let (m, _) = sample_stats(&fit_two_moments(1.0, 1.0).unwrap(), 1_000_000, 7);
        // sd of the mean is 1e-3
        assert!((0.99..=1.01).contains(&m), "mean {m}");
    }

    #[test]
    fn h2_sample_scv() {
        let (m, scv) = sample_stats(&fit_two_moments(1.0, 3.0).unwrap(), 1_000_000, 11);
        assert!((0.99..=1.01).contains(&m), "mean {m}");
        assert!((2.9..=3.1).contains(&scv), "scv {scv}");
    }

    #[test]
    fn mixed_erlang_sample_moments() {
        for (scv, seed) in [(0.25, 3), (0.6, 4), (0.01, 5)] {
            let (m, s) = sample_stats(&fit_two_moments(2.0, scv).unwrap(), 400_000, seed);
            assert!((m - 2.0).abs() < 0.01, "scv {scv}: mean {m}");
            assert!((s - scv).abs() < 0.03 * scv.max(0.1), "scv {scv}: got {s}");
        }
    }

    proptest! {
        #[test]
        fn fit_reproduces_moments(mean in 1e-3f64..1e3, scv in 0.0f64..20.0) {
            let d = fit_two_moments(mean, scv).unwrap();
            prop_assert!((d.realized_mean() - mean).abs() <= 1e-10 * mean);
            prop_assert!((d.realized_scv() - scv).abs() <= 1e-10 * scv.max(1.0));
            match d.kind {
                FitKind::Deterministic => prop_assert_eq!(scv, 0.0),
                FitKind::Exponential { .. } => prop_assert_eq!(scv, 1.0),
                FitKind::HyperExp2Balanced { p, mu1, mu2 } => {
                    prop_assert!(scv > 1.0);
                    prop_assert!((p / mu1 - (1.0 - p) / mu2).abs() <= 1e-10 * mean);
                }
                FitKind::MixedErlang { p, .. } => {
                    prop_assert!(scv > 0.0 && scv < 1.0);
                    prop_assert!((0.0..=1.0).contains(&p));
                }
            }
        }

        #[test]
        fn density_is_scale_free(scv in 0.0f64..20.0, a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let da = density_at_zero(&fit_two_moments(a, scv).unwrap());
            let db = density_at_zero(&fit_two_moments(b, scv).unwrap());
            prop_assert!((da - db).abs() <= 1e-12);
        }

        #[test]
        fn exact_h2_density_matches_two_moment_rule(scv in 1.0f64..50.0) {
            let exact = density_at_zero(&fit_two_moments(1.0, scv).unwrap());
            prop_assert!((exact - density_at_zero_two_moment_approx(scv)).abs() <= 1e-12);
        }
    }
}
