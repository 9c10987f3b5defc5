//! Seeded random scenarios and the multi-trial comparison runner.

use std::ops::RangeInclusive;

use crate::admission::LoadState;
use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::FlowSpec;
use crate::scenario::Scenario;
use crate::schedulers::{schedule, Algorithm, SchedulerConfig, DEFAULT_MIN_BURST};

/// Redraws allowed per mobile station before generation gives up.
pub const MAX_ATTEMPTS: usize = 1000;

/// 64-bit LCG with Knuth's MMIX constants.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state
    }

    /// Uniform-ish integer in `[a, b]`.
    pub fn range(&mut self, a: u64, b: u64) -> u64 {
        debug_assert!(a <= b);
        let span = (b - a).wrapping_add(1);
        let x = self.next_u64() >> 33;
        if span == 0 {
            a.wrapping_add(x)
        } else {
            a + x % span
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioParams {
    pub n_ms: usize,
    pub frames: usize,
    /// Data size per SDU, in whole units.
    pub demand: RangeInclusive<u64>,
    pub period: RangeInclusive<usize>,
    pub capacity: Amount,
    pub min_burst_size: Amount,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n_ms: 10,
            frames: 100,
            demand: 1..=360,
            period: 4..=44,
            capacity: Amount::from_units(360),
            min_burst_size: DEFAULT_MIN_BURST,
        }
    }
}

fn check_ranges(demand: &RangeInclusive<u64>, period: &RangeInclusive<usize>, capacity: Amount) -> Result<()> {
    if demand.is_empty() || *demand.start() == 0 {
        return Err(Error::InvalidScenario(format!("invalid demand range {demand:?}")));
    }
    if period.is_empty() || *period.start() == 0 {
        return Err(Error::InvalidScenario(format!("invalid period range {period:?}")));
    }
    if capacity.is_zero() {
        return Err(Error::InvalidScenario("capacity must be positive".into()));
    }
    Ok(())
}

/// Draw `n_ms` flows (ids 1..=n_ms), each as a (demand, period) pair,
/// redrawing any pair that would push the load past `capacity`.
pub fn generate_scenario(
    seed: u64,
    n_ms: usize,
    demand: RangeInclusive<u64>,
    period: RangeInclusive<usize>,
    capacity: Amount,
) -> Result<Scenario> {
    check_ranges(&demand, &period, capacity)?;
    let mut rng = Lcg64::new(seed);
    let mut load = LoadState::new(capacity);
    let mut flows = Vec::with_capacity(n_ms);
    for i in 0..n_ms {
        let id = i as u32 + 1;
        let accepted = (0..MAX_ATTEMPTS).find_map(|_| {
            let d = rng.range(*demand.start(), *demand.end());
            let p = rng.range(*period.start() as u64, *period.end() as u64) as usize;
            let f = FlowSpec::units(id, d, p);
            load.admit(&f).is_accepted().then_some(f)
        });
        match accepted {
            Some(f) => flows.push(f),
            None => {
                return Err(Error::Generation {
                    seed,
                    station: id as usize,
                    attempts: MAX_ATTEMPTS,
                })
            }
        }
    }
    Ok(Scenario {
        capacity: Some(capacity),
        flows,
        ..Scenario::default()
    })
}

/// Aggregate results of one algorithm over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub trials: usize,
    /// Trials that could not be generated or scheduled.
    pub failures: usize,
    /// Over every frame with at least one burst, across successful trials.
    pub bursts_mean: f64,
    pub bursts_std: f64,
    /// Over every flow of every successful trial.
    pub jitter_mean: f64,
    pub jitter_std: f64,
    /// Successful trials in which some flow had positive jitter.
    pub jitter_nonzero_trials: usize,
}

#[derive(Default)]
struct Samples {
    bursts: Vec<f64>,
    jitter: Vec<f64>,
    nonzero: usize,
    failures: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Run every algorithm on the same scenario per trial; trial `k` uses seed
/// `base_seed + k`. Failed trials are counted and skipped.
pub fn run_trials(
    base_seed: u64,
    trials: usize,
    params: &ScenarioParams,
    algorithms: &[Algorithm],
) -> Result<Vec<TrialSummary>> {
    if trials == 0 {
        return Err(Error::InvalidScenario("at least one trial is required".into()));
    }
    if params.frames == 0 {
        return Err(Error::InvalidScenario("at least one frame is required".into()));
    }
    check_ranges(&params.demand, &params.period, params.capacity)?;
    let mut samples: Vec<Samples> = algorithms.iter().map(|_| Samples::default()).collect();
    for k in 0..trials {
        let seed = base_seed.wrapping_add(k as u64);
        let sc = match generate_scenario(seed, params.n_ms, params.demand.clone(), params.period.clone(), params.capacity) {
            Ok(sc) => sc,
            Err(e) => {
                log::warn!("trial {k}: {e}");
                samples.iter_mut().for_each(|s| s.failures += 1);
                continue;
            }
        };
        for (&algorithm, s) in algorithms.iter().zip(&mut samples) {
            let cfg = SchedulerConfig {
                algorithm,
                min_burst_size: params.min_burst_size,
                capacity: params.capacity,
                horizon: params.frames,
            };
            let run = match schedule(&sc.flows, &[], &cfg) {
                Ok(run) => run,
                Err(e) => {
                    log::warn!("trial {k} ({algorithm}): {e}");
                    s.failures += 1;
                    continue;
                }
            };
            let m = metrics::compute(&run.grid, &sc.flows, &[]);
            s.bursts.extend(m.bursts_per_frame.iter().filter(|&&b| b > 0).map(|&b| b as f64));
            let jitters: Vec<f64> = m
                .per_flow
                .iter()
                .filter_map(|f| f.jitter)
                .map(|j| *j.numer() as f64 / *j.denom() as f64)
                .collect();
            if jitters.iter().any(|&j| j > 0.0) {
                s.nonzero += 1;
            }
            s.jitter.extend(jitters);
        }
    }
    Ok(algorithms
        .iter()
        .zip(samples)
        .map(|(&algorithm, s)| {
            let (bursts_mean, bursts_std) = mean_std(&s.bursts);
            let (jitter_mean, jitter_std) = mean_std(&s.jitter);
            TrialSummary {
                algorithm,
                seed: base_seed,
                trials,
                failures: s.failures,
                bursts_mean,
                bursts_std,
                jitter_mean,
                jitter_std,
                jitter_nonzero_trials: s.nonzero,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admission::required_load;

    #[test]
    fn lcg_matches_reference_steps() {
        // Reference: state' = state * a + c mod 2^64, computed in u128.
        let (a, c) = (6364136223846793005u128, 1442695040888963407u128);
        let mut s = 42u128;
        let mut rng = Lcg64::new(42);
        for _ in 0..100 {
            s = (s * a + c) % (1u128 << 64);
            assert_eq!(rng.next_u64() as u128, s);
        }
        let mut rng = Lcg64::new(7);
        let s1 = (7u128 * a + c) % (1u128 << 64);
        assert_eq!(rng.range(4, 44) as u128, 4 + ((s1 >> 33) % 41));
    }

    #[test]
    fn same_seed_same_scenario() {
        let a = generate_scenario(9, 10, 1..=360, 4..=44, Amount::from_units(360)).unwrap();
        let b = generate_scenario(9, 10, 1..=360, 4..=44, Amount::from_units(360)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.flows.len(), 10);
        assert!(required_load(&a.flows) <= Amount::from_units(360));
    }

    #[test]
    fn tiny_ranges_are_trivially_admitted() {
        let sc = generate_scenario(0, 3, 1..=1, 4..=4, Amount::from_units(1)).unwrap();
        assert_eq!(required_load(&sc.flows), Amount::from_hundredths(75));
    }

    #[test]
    fn exhausted_redraws_echo_the_seed() {
        let err = generate_scenario(5, 2, 10..=10, 1..=1, Amount::from_units(15)).unwrap_err();
        assert_eq!(
            err,
            Error::Generation {
                seed: 5,
                station: 2,
                attempts: MAX_ATTEMPTS
            }
        );
    }

    #[test]
    fn single_station_gives_one_burst_everywhere() {
        let params = ScenarioParams {
            n_ms: 1,
            frames: 40,
            ..ScenarioParams::default()
        };
        let out = run_trials(3, 1, &params, &Algorithm::ALL).unwrap();
        for s in out {
            assert_eq!((s.bursts_mean, s.bursts_std, s.failures), (1.0, 0.0, 0), "{}", s.algorithm);
        }
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(run_trials(0, 0, &ScenarioParams::default(), &Algorithm::ALL).is_err());
    }
}
