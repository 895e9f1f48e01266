//! Seeded synthetic corpus with planted semantic structure.
//!
//! Every question has a truth direction. Accurate questions sample all (or all
//! but one) answers as paraphrases of the truth; hallucinated questions spread
//! their answers over at least three modes, with fewer than half on the truth.
//! Paraphrases of one mode have pairwise cosine similarity inside
//! `paraphrase_band`; answers from different modes have similarity at most
//! `max(mode_overlap)`.
//!
//! Answer vectors are built from an orthonormal basis so these bounds hold
//! exactly, not just in expectation:
//!
//! ```text
//! center_m = sqrt(rho) * z + sqrt(1 - rho) * e_m
//! answer   = c * center_m + sqrt(1 - c^2) * u_j,   c in [sqrt(lo), sqrt(hi)]
//! ```

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::DatasetRecord;
use crate::error::{Error, Result};

const ENTITIES: [&str; 32] = [
    "Earth",
    "Saturn",
    "Mars",
    "Venus",
    "Jupiter",
    "Neptune",
    "Mercury",
    "Uranus",
    "Moon River",
    "Paris",
    "Lisbon",
    "Oslo",
    "Nairobi",
    "Lima",
    "Hanoi",
    "Quito",
    "Copper",
    "Argon",
    "Cobalt",
    "Helium",
    "Insulin",
    "Pepsin",
    "Keratin",
    "Myosin",
    "Beethoven",
    "Haydn",
    "Chopin",
    "Liszt",
    "Danube",
    "Volga",
    "Mekong",
    "Orinoco",
];

const TEMPLATES: [&str; 6] = [
    "{}",
    "It is {}",
    "The answer is {}",
    "I think it could be {}",
    "{}, I believe",
    "Probably {}",
];

const MAX_WRONG_MODES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub questions: usize,
    /// Answers per question (P).
    pub generations: usize,
    pub dim: usize,
    pub seed: u64,
    /// Fraction of questions planted as hallucinations.
    pub hallucination_rate: f64,
    /// Pairwise cosine similarity range among paraphrases of one mode.
    pub paraphrase_band: (f64, f64),
    /// Range of the cosine similarity between distinct mode centers.
    pub mode_overlap: (f64, f64),
    /// Probability that an accurate question carries one off-mode answer.
    pub stray_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            questions: 200,
            generations: 10,
            dim: 128,
            seed: 0,
            hallucination_rate: 0.5,
            paraphrase_band: (0.96, 0.99),
            mode_overlap: (0.0, 0.3),
            stray_rate: 0.3,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.generations < 4 {
            return bad(format!(
                "synthetic corpus needs at least 4 generations, got {}",
                self.generations
            ));
        }
        if self.dim < self.generations + MAX_WRONG_MODES + 2 {
            return bad(format!(
                "dimension {} too small for {} generations",
                self.dim, self.generations
            ));
        }
        let (lo, hi) = self.paraphrase_band;
        if !(0.0 < lo && lo <= hi && hi <= 1.0) {
            return bad(format!("invalid paraphrase band ({lo}, {hi})"));
        }
        let (olo, ohi) = self.mode_overlap;
        if !(0.0 <= olo && olo <= ohi && ohi < 1.0) {
            return bad(format!("invalid mode overlap ({olo}, {ohi})"));
        }
        if !(0.0..=1.0).contains(&self.hallucination_rate)
            || !(0.0..=1.0).contains(&self.stray_rate)
        {
            return bad("rates must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Whether a synthetic question was planted as a hallucination; read back
/// from its id.
pub fn planted_hallucination(record: &DatasetRecord) -> Option<bool> {
    record.id.rsplit('-').next().and_then(|tag| match tag {
        "h" => Some(true),
        "a" => Some(false),
        _ => None,
    })
}

fn orthonormal_basis(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn combine(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
}

fn question(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    index: usize,
    hallucinated: bool,
) -> DatasetRecord {
    let p = cfg.generations;
    let basis = orthonormal_basis(rng, 2 + MAX_WRONG_MODES + p, cfg.dim);
    let shared = &basis[0];
    let mode_dirs = &basis[1..2 + MAX_WRONG_MODES];
    let noise_dirs = &basis[2 + MAX_WRONG_MODES..];

    let rho = rng.random_range(cfg.mode_overlap.0..=cfg.mode_overlap.1);
    let centers: Vec<Vec<f64>> = mode_dirs
        .iter()
        .map(|e| combine(rho.sqrt(), shared, (1.0 - rho).sqrt(), e))
        .collect();

    let mut entities: Vec<&str> = ENTITIES.to_vec();
    entities.shuffle(rng);

    // mode 0 is the truth
    let mut modes: Vec<usize> = Vec::with_capacity(p);
    if hallucinated {
        let on_truth = rng.random_range(0..=((p - 1) / 2).min(3));
        let wrong = rng.random_range(3..=MAX_WRONG_MODES.min(p - on_truth));
        modes.extend(std::iter::repeat_n(0, on_truth));
        modes.extend(1..=wrong);
        while modes.len() < p {
            modes.push(rng.random_range(1..=wrong));
        }
    } else {
        modes.extend(std::iter::repeat_n(0, p));
        if rng.random_bool(cfg.stray_rate) {
            modes[p - 1] = 1;
        }
    }
    modes.shuffle(rng);

    let (lo, hi) = (cfg.paraphrase_band.0.sqrt(), cfg.paraphrase_band.1.sqrt());
    let mut answers = Vec::with_capacity(p);
    let mut embeddings = Vec::with_capacity(p);
    for (j, &m) in modes.iter().enumerate() {
        let c = if lo < hi {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        embeddings.push(combine(
            c,
            &centers[m],
            (1.0 - c * c).max(0.0).sqrt(),
            &noise_dirs[j],
        ));
        let template = TEMPLATES[rng.random_range(0..TEMPLATES.len())];
        answers.push(template.replace("{}", entities[m]));
    }

    DatasetRecord {
        id: format!("synth-{index:04}-{}", if hallucinated { "h" } else { "a" }),
        question: format!("Synthetic question {index}: which entity is meant?"),
        answers,
        canonical_answer: Some(entities[0].to_string()),
        context: None,
        embeddings: Some(embeddings),
        canonical_embedding: Some(centers[0].clone()),
    }
}

/// Generate the corpus. Identical configs give identical output.
pub fn synth_corpus(cfg: &SynthConfig) -> Result<Vec<DatasetRecord>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hallucinated_count = (cfg.questions as f64 * cfg.hallucination_rate).round() as usize;
    let mut flags: Vec<bool> = (0..cfg.questions).map(|i| i < hallucinated_count).collect();
    flags.shuffle(&mut rng);
    Ok(flags
        .into_iter()
        .enumerate()
        .map(|(i, h)| question(&mut rng, cfg, i, h))
        .collect())
}
