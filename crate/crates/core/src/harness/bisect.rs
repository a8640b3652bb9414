use super::ExperimentOptions;
use crate::engine::{run, HboaConfig, RunResult};
use crate::rng::derive_seed;
use crate::{Error, Problem, Result, RngStream};

#[derive(Clone, Debug)]
pub struct BisectionResult {
    pub population: usize,
    /// Largest failing size seen below `population`, if any.
    pub last_fail: Option<usize>,
    /// The successful runs at `population`.
    pub runs: Vec<RunResult>,
    /// Population sizes tried, in order.
    pub tried: Vec<usize>,
}

impl BisectionResult {
    pub fn mean_evaluations(&self) -> f64 {
        self.runs.iter().map(|r| r.evaluations).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_time_ms(&self) -> f64 {
        self.runs.iter().map(|r| r.elapsed_ms).sum::<f64>() / self.runs.len() as f64
    }
}

/// Doubling from `start` until `trial` passes, then binary search between the
/// last failure and the first pass until their ratio is within `tolerance`.
/// Returns the passing size, the last failing size and the pass payload.
pub fn bisect_with<T>(
    start: usize,
    cap: usize,
    tolerance: f64,
    mut trial: impl FnMut(usize) -> Result<Option<T>>,
) -> Result<(usize, Option<usize>, T)> {
    assert!(start >= 1 && tolerance > 1.0);
    let mut low = None;
    let mut size = start;
    let (mut high, mut payload) = loop {
        if size > cap {
            return Err(Error::UnsolvableAtCap { cap });
        }
        match trial(size)? {
            Some(p) => break (size, p),
            None => {
                low = Some(size);
                size *= 2;
            }
        }
    };
    while let Some(lo) = low {
        if high as f64 / lo as f64 <= tolerance || high - lo <= 1 {
            break;
        }
        let mid = lo + (high - lo) / 2;
        match trial(mid)? {
            Some(p) => {
                high = mid;
                payload = p;
            }
            None => low = Some(mid),
        }
    }
    Ok((high, low, payload))
}

/// Smallest population (within the tolerance) for which all of
/// `opts.runs` independent runs find the optimum.
///
/// Run `r` at population `N` is seeded with `derive(seed, [N, r])`, so two
/// configurations bisected with the same seed see identical random streams
/// wherever their populations coincide.
pub fn bisect_population(
    problem: &Problem,
    template: &HboaConfig,
    opts: &ExperimentOptions,
    seed: u64,
) -> Result<BisectionResult> {
    if problem.known_optimum().is_none() {
        return Err(Error::Config("bisection needs a known optimum".into()));
    }
    template.validate(problem)?;
    let mut tried = Vec::new();
    let (population, last_fail, runs) = bisect_with(
        opts.start_population,
        opts.max_population,
        opts.tolerance,
        |size| {
            tried.push(size);
            let cfg = template.clone().with_population(size);
            let mut runs = Vec::with_capacity(opts.runs);
            for r in 0..opts.runs {
                let mut rng = RngStream::new(derive_seed(seed, &[size as u64, r as u64]));
                let result = run(problem, &cfg, &mut rng)?;
                if !result.success {
                    return Ok(None);
                }
                runs.push(result);
            }
            Ok(Some(runs))
        },
    )?;
    Ok(BisectionResult {
        population,
        last_fail,
        runs,
        tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::LocalSearch;
    use crate::{AdfSpec, Subfunction};

    #[test]
    fn threshold_predicate() {
        let (n, low, ()) = bisect_with(32, 1 << 20, 1.05, |n| Ok((n >= 100).then_some(()))).unwrap();
        assert!((100..=105).contains(&n), "{n}");
        let lo = low.unwrap();
        assert!(n as f64 / lo as f64 <= 1.05);
    }

    #[test]
    fn immediate_pass_returns_start() {
        let (n, low, ()) = bisect_with(32, 1 << 20, 1.05, |_| Ok(Some(()))).unwrap();
        assert_eq!((n, low), (32, None));
    }

    #[test]
    fn never_passing_hits_cap() {
        let err = bisect_with(32, 1 << 20, 1.05, |_| Ok(None::<()>)).unwrap_err();
        assert!(matches!(err, Error::UnsolvableAtCap { cap } if cap == 1 << 20));
    }

    #[test]
    fn hill_climbable_problem_bisects_to_floor() {
        let terms = (0..16)
            .map(|v| Subfunction::new(vec![v], vec![0.0, 1.0]).unwrap())
            .collect();
        let p = Problem::custom(AdfSpec::new(16, terms).unwrap(), Some(16.0), LocalSearch::HillClimb);
        let r = bisect_population(&p, &HboaConfig::default(), &ExperimentOptions::default(), 1).unwrap();
        assert_eq!(r.population, 32);
        assert_eq!(r.runs.len(), 10);
        assert_eq!(r.tried, vec![32]);
    }
}
