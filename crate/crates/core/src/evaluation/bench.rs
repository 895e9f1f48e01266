//! Runtime benchmark of embedding-based clustering against a latency mock of
//! NLI-based clustering.
//!
//! The NLI path is modelled as one cross-encoder call per unordered pair of
//! responses, P(P-1)/2 calls per question, each costing a fixed latency.
//! No model is run.

use std::cell::Cell;
use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clustering::{greedy_cluster, hac_average_linkage, DEFAULT_DISTANCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::math::{dot, pairwise_similarity};
use crate::types::EmbeddingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchAlgorithm {
    HacAverage,
    Greedy,
    MockNli,
}

impl BenchAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            BenchAlgorithm::HacAverage => "hac_average",
            BenchAlgorithm::Greedy => "greedy",
            BenchAlgorithm::MockNli => "mock_nli",
        }
    }
}

impl fmt::Display for BenchAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One timing: median seconds per run over `repetitions` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub p: usize,
    pub algorithm: BenchAlgorithm,
    pub wall_time: f64,
    pub repetitions: usize,
}

impl BenchSample {
    pub const CSV_HEADER: &'static str = "p,algorithm,median_seconds,repetitions";

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{:.9},{}",
            self.p, self.algorithm, self.wall_time, self.repetitions
        )
    }
}

/// How the mock charges its per-call latency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliLatency {
    /// Add `calls * latency` to the measured time without sleeping.
    Simulated(Duration),
    /// Sleep for the latency inside every call.
    Sleep(Duration),
}

impl NliLatency {
    pub fn per_call(self) -> Duration {
        match self {
            NliLatency::Simulated(d) | NliLatency::Sleep(d) => d,
        }
    }
}

/// Stand-in for a pairwise entailment model. Two responses "entail" each other
/// when their cosine similarity is at least `1 - threshold`.
#[derive(Debug)]
pub struct MockNli {
    latency: NliLatency,
    threshold: f64,
    calls: Cell<u64>,
}

impl MockNli {
    pub fn new(latency: NliLatency) -> Self {
        MockNli {
            latency,
            threshold: DEFAULT_DISTANCE_THRESHOLD,
            calls: Cell::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    /// Latency charged so far but not slept.
    pub fn simulated_time(&self) -> Duration {
        match self.latency {
            NliLatency::Simulated(d) => d * self.calls() as u32,
            NliLatency::Sleep(_) => Duration::ZERO,
        }
    }

    pub fn reset(&self) {
        self.calls.set(0);
    }

    /// One bidirectional entailment check between unit vectors.
    pub fn equivalent(&self, a: &[f64], b: &[f64]) -> bool {
        self.calls.set(self.calls.get() + 1);
        if let NliLatency::Sleep(d) = self.latency {
            if !d.is_zero() {
                std::thread::sleep(d);
            }
        }
        1.0 - dot(a, b) <= self.threshold
    }
}

/// Cluster by calling the mock on every unordered pair and taking connected
/// components. Returns the component id of each response.
pub fn mock_nli_cluster(em: &EmbeddingMatrix, nli: &MockNli) -> Vec<usize> {
    let unit = em.normalized();
    let p = unit.rows();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..p {
        for j in i + 1..p {
            if nli.equivalent(unit.row(i), unit.row(j)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    (0..p).map(|i| find(&mut parent, i)).collect()
}

/// `p` random unit vectors of dimension `dim`.
pub fn random_unit_vectors(p: usize, dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    EmbeddingMatrix::from_rows_normalized(&rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub p_values: Vec<usize>,
    pub dim: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// `None` skips the mock NLI timings.
    pub mock_nli: Option<NliLatency>,
    /// Each repetition loops until at least this much time has elapsed and
    /// reports the mean per run, so tiny inputs are not dominated by timer
    /// resolution.
    pub min_run_time: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            p_values: vec![10, 25, 50, 100, 200],
            dim: 384,
            repetitions: 5,
            seed: 0,
            mock_nli: Some(NliLatency::Simulated(Duration::from_millis(10))),
            min_run_time: Duration::from_millis(2),
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Median seconds per call of `f`; `f` returns extra (simulated) seconds to
/// add to each call.
fn time_runs<F: FnMut() -> f64>(repetitions: usize, min_run_time: Duration, mut f: F) -> f64 {
    let runs = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            let mut n = 0u32;
            let mut extra = 0.0;
            loop {
                extra += f();
                n += 1;
                if start.elapsed() >= min_run_time {
                    break;
                }
            }
            (start.elapsed().as_secs_f64() + extra) / f64::from(n)
        })
        .collect();
    median(runs)
}

/// Time similarity + clustering (both procedures) and, optionally, the NLI
/// mock on random unit vectors for each `P`. Runs single-threaded.
pub fn bench_clustering(cfg: &BenchConfig) -> Result<Vec<BenchSample>> {
    if cfg.repetitions < 3 {
        return Err(Error::InvalidParameter(format!(
            "bench needs at least 3 repetitions, got {}",
            cfg.repetitions
        )));
    }
    if cfg.dim == 0 {
        return Err(Error::InvalidParameter(
            "bench dimension must be positive".into(),
        ));
    }
    let mut samples = Vec::new();
    for (i, &p) in cfg.p_values.iter().enumerate() {
        if p == 0 {
            return Err(Error::InvalidParameter("P must be positive".into()));
        }
        let em = random_unit_vectors(p, cfg.dim, cfg.seed.wrapping_add(i as u64))?;
        let threshold = DEFAULT_DISTANCE_THRESHOLD;

        let hac = time_runs(cfg.repetitions, cfg.min_run_time, || {
            let sm = pairwise_similarity(&em);
            std::hint::black_box(hac_average_linkage(&sm, threshold).map(|c| c.k).ok());
            0.0
        });
        samples.push(BenchSample {
            p,
            algorithm: BenchAlgorithm::HacAverage,
            wall_time: hac,
            repetitions: cfg.repetitions,
        });

        let greedy = time_runs(cfg.repetitions, cfg.min_run_time, || {
            let sm = pairwise_similarity(&em);
            std::hint::black_box(greedy_cluster(&sm, threshold).map(|c| c.k).ok());
            0.0
        });
        samples.push(BenchSample {
            p,
            algorithm: BenchAlgorithm::Greedy,
            wall_time: greedy,
            repetitions: cfg.repetitions,
        });

        if let Some(latency) = cfg.mock_nli {
            let nli = MockNli::new(latency);
            // sleeping runs are long enough on their own
            let min_run = match latency {
                NliLatency::Sleep(d) if !d.is_zero() => Duration::ZERO,
                _ => cfg.min_run_time,
            };
            let mock = time_runs(cfg.repetitions, min_run, || {
                nli.reset();
                std::hint::black_box(mock_nli_cluster(&em, &nli));
                nli.simulated_time().as_secs_f64()
            });
            samples.push(BenchSample {
                p,
                algorithm: BenchAlgorithm::MockNli,
                wall_time: mock,
                repetitions: cfg.repetitions,
            });
        }
    }
    Ok(samples)
}

/// Least-squares slope of `ln(time)` against `ln(P)` for one algorithm.
pub fn fit_exponent(samples: &[BenchSample], algorithm: BenchAlgorithm) -> Option<f64> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.algorithm == algorithm && s.wall_time > 0.0)
        .map(|s| ((s.p as f64).ln(), s.wall_time.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_calls_every_pair_once() {
        for p in [1usize, 2, 7, 40] {
            let em = random_unit_vectors(p, 16, 3).unwrap();
            let nli = MockNli::new(NliLatency::Simulated(Duration::from_millis(10)));
            mock_nli_cluster(&em, &nli);
            assert_eq!(nli.calls(), (p * (p - 1) / 2) as u64);
            assert_eq!(
                nli.simulated_time(),
                Duration::from_millis(10) * nli.calls() as u32
            );
        }
    }

    #[test]
    fn mock_groups_duplicates() {
        let em = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.001]])
            .unwrap();
        let nli = MockNli::new(NliLatency::Simulated(Duration::ZERO));
        assert_eq!(mock_nli_cluster(&em, &nli), vec![0, 1, 0]);
    }

    #[test]
    fn random_vectors_are_unit_and_seeded() {
        let a = random_unit_vectors(5, 8, 42).unwrap();
        let b = random_unit_vectors(5, 8, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter_rows().all(|r| (dot(r, r) - 1.0).abs() < 1e-12));
        assert_ne!(a, random_unit_vectors(5, 8, 43).unwrap());
    }

    #[test]
    fn exponent_of_exact_power_law() {
        let samples: Vec<BenchSample> = [10usize, 20, 40, 80]
            .iter()
            .map(|&p| BenchSample {
                p,
                algorithm: BenchAlgorithm::Greedy,
                wall_time: 3e-9 * (p as f64).powi(2),
                repetitions: 3,
            })
            .collect();
        let e = fit_exponent(&samples, BenchAlgorithm::Greedy).unwrap();
        assert!((e - 2.0).abs() < 1e-9);
        assert_eq!(fit_exponent(&samples, BenchAlgorithm::MockNli), None);
    }

    #[test]
    fn bench_small_run() {
        let cfg = BenchConfig {
            p_values: vec![4, 8],
            dim: 8,
            repetitions: 3,
            seed: 1,
            mock_nli: Some(NliLatency::Simulated(Duration::from_millis(10))),
            min_run_time: Duration::ZERO,
        };
        let samples = bench_clustering(&cfg).unwrap();
        assert_eq!(samples.len(), 6);
        let mock8 = samples
            .iter()
            .find(|s| s.p == 8 && s.algorithm == BenchAlgorithm::MockNli)
            .unwrap();
        // 28 calls at 10 ms each
        assert!(mock8.wall_time >= 0.28);
        assert_eq!(
            mock8.to_csv_line().split(',').collect::<Vec<_>>()[..2],
            ["8", "mock_nli"]
        );
    }

    #[test]
    fn bench_rejects_few_repetitions() {
        let cfg = BenchConfig {
            repetitions: 2,
            ..BenchConfig::default()
        };
        assert!(bench_clustering(&cfg).is_err());
    }
}
