//! Experiment bodies. Each returns a status, a JSON result and optionally
//! the spectrum written to `spectrum.csv`.

pub mod carleman;
pub mod inequalities;
pub mod lattice;
pub mod oscillator;
pub mod riesz;
pub mod trace;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schatten_core::{LabError, SingularSpectrum, Verdict};
use serde_json::Value;

use crate::config::{parse_intervals, parse_real_list};
use crate::CliError;

pub struct Outcome {
    pub status: Verdict,
    pub result: Value,
    pub spectrum: Option<SingularSpectrum>,
}

/// Typed access to validated parameter strings.
pub struct Params<'a> {
    values: &'a BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    pub fn new(values: &'a BTreeMap<String, String>) -> Self {
        Self { values }
    }

    fn raw(&self, key: &str) -> Result<&'a str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Usage(format!("missing parameter {key}")))
    }

    fn bad(key: &str, value: &str) -> CliError {
        CliError::Usage(format!("parameter {key}=`{value}` is malformed"))
    }

    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v))
    }

    /// `None` for `auto`.
    pub fn real_or_auto(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key)? {
            "auto" => Ok(None),
            _ => self.real(key).map(Some),
        }
    }

    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v))
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(key)?;
        parse_real_list(v).ok_or_else(|| Self::bad(key, v))
    }

    pub fn intervals(&self, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        let v = self.raw(key)?;
        parse_intervals(v).ok_or_else(|| Self::bad(key, v))
    }

    pub fn text(&self, key: &str) -> Result<&'a str, CliError> {
        self.raw(key)
    }
}

/// Attaches the experiment name to a core error.
pub(crate) fn lab(experiment: &'static str) -> impl Fn(LabError) -> CliError {
    move |source| CliError::Lab {
        experiment: experiment.to_owned(),
        source,
    }
}

/// Independent stream `trial` of the seeded generator, so trial results do
/// not depend on how trials are spread over threads.
pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `f(0..n)` in order, computed on at most `threads` scoped threads.
pub(crate) fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| scope.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(f).collect::<Vec<T>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// `Consistent` when every check passed, `Violated` otherwise.
pub(crate) fn all_hold(checks: &BTreeMap<&str, bool>) -> Verdict {
    if checks.values().all(|&ok| ok) {
        Verdict::Consistent
    } else {
        Verdict::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_map_preserves_order() {
        for threads in [1, 2, 3, 8] {
            let v = parallel_map(10, threads, |i| i * i);
            assert_eq!(v, (0..10).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(parallel_map(0, 4, |i| i).is_empty());
    }

    #[test]
    fn trial_streams_differ_and_repeat() {
        let a: f64 = trial_rng(5, 0).random();
        let b: f64 = trial_rng(5, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(5, 0).random::<f64>());
    }
}
