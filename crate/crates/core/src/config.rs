use std::time::Duration;

/// Explicit resource budgets shared by every engine and scheme.
///
/// Exceeding a budget is reported as [`crate::Error::Budget`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest cycle length `peak_scan` will walk.
    pub scan_budget: u64,
    /// Largest number of order epochs `peak_events` will evaluate.
    pub events_budget: u64,
    /// Largest item count accepted by the integer-program engine.
    pub ip_dimension_budget: usize,
    /// Largest number of shift vectors `brute_optimum` will enumerate.
    pub brute_budget: u64,
    /// Largest number of guesses a scheme may enumerate.
    pub guess_budget: u64,
    /// Widest interval `primes_in_range` will sieve.
    pub sieve_budget: u64,
    /// Continuous exhaustive search tries shifts in multiples of `1/brute_grid`.
    pub brute_grid: u64,
    /// Wall-clock limit per LP solve.
    pub lp_time_limit: Duration,
    /// Job counts up to this size are balanced by exact search.
    pub exact_balance_jobs: usize,
    /// Worker threads for the parallel reductions; 1 means sequential.
    pub jobs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scan_budget: 10_000_000,
            events_budget: 10_000_000,
            ip_dimension_budget: 12,
            brute_budget: 10_000_000,
            guess_budget: 1_000_000,
            sieve_budget: 100_000_000,
            brute_grid: 4,
            lp_time_limit: Duration::from_secs(30),
            exact_balance_jobs: 15,
            jobs: 1,
        }
    }
}

impl SolverConfig {
    /// Runs `f` on a dedicated pool of `jobs` threads (at least one).
    pub(crate) fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match rayon::ThreadPoolBuilder::new().num_threads(self.jobs.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
}
