use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sindex_core::evaluation::{
    ablate_algorithm, ablate_generations, ablate_threshold, bench_clustering, fit_exponent,
    AblationTable, BenchAlgorithm, BenchConfig, BenchSample, NliLatency, DEFAULT_GENERATION_SWEEP,
    DEFAULT_SIMILARITY_SWEEP,
};
use sindex_core::{clustering::format_merge_trace, evaluate, LabelPolicy, ScoringConfig};
use sindex_io::pipeline;
use sindex_io::records::{load_eval_records, write_jsonl};
use sindex_io::{
    load_dataset, synth_corpus, Config, DatasetRecord, Embedder, EmbeddingCache, EmbeddingService,
    HttpEmbeddingService, SynthConfig,
};

use crate::{Cli, ClusterArgs, Command, EmbedArgs, Format, LabelArgs, Policy, Sweep};

/// A failure reported as one `sindex-error: <kind>: <message>` line.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl fmt::Display) -> Self {
        CliError {
            kind,
            message: message.to_string(),
        }
    }
}

impl From<sindex_io::Error> for CliError {
    fn from(e: sindex_io::Error) -> Self {
        CliError::new(e.kind(), e)
    }
}

impl From<sindex_core::Error> for CliError {
    fn from(e: sindex_core::Error) -> Self {
        sindex_io::Error::from(e).into()
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new("io", e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::resolve(cli.config.as_deref())?;
    match cli.command {
        Command::Embed { dataset, embed } => {
            apply_embed(&mut cfg, &embed);
            cfg.validate()?;
            let records = load_dataset(&dataset)?;
            with_embedder(&cfg, |e| {
                let summary = pipeline::embed_dataset(&records, &cfg, e)?;
                println!(
                    "embedded {} inputs, {} new cache entries, {} total",
                    summary.inputs,
                    summary.new_entries,
                    e.cache.len()
                );
                Ok(())
            })
        }
        Command::Cluster {
            dataset,
            id,
            cluster,
            embed,
        } => {
            apply_embed(&mut cfg, &embed);
            apply_cluster(&mut cfg, &cluster);
            cfg.validate()?;
            let records = load_dataset(&dataset)?;
            let record = records
                .iter()
                .find(|r| r.id == id)
                .ok_or_else(|| CliError::new("input", format!("no question with id {id:?}")))?;
            let (c, report) = with_embedder(&cfg, |e| Ok(pipeline::score(record, &cfg, Some(e))?))?;
            print_clustering(record, &c, &report, &cfg)
        }
        Command::Score {
            dataset,
            measures,
            cluster,
            embed,
            out,
        } => {
            apply_embed(&mut cfg, &embed);
            apply_cluster(&mut cfg, &cluster);
            if let Some(m) = measures {
                cfg.measures = m;
            }
            cfg.validate()?;
            let records = load_dataset(&dataset)?;
            let scores = with_embedder(&cfg, |e| {
                Ok(pipeline::score_records(&records, &cfg, Some(e))?)
            })?;
            write_lines(out.as_deref(), &scores)
        }
        Command::Label {
            dataset,
            label,
            measures,
            cluster,
            embed,
            out,
        } => {
            apply_embed(&mut cfg, &embed);
            apply_cluster(&mut cfg, &cluster);
            apply_label(&mut cfg, &label);
            if let Some(m) = measures {
                cfg.measures = m;
            }
            cfg.validate()?;
            let records = load_dataset(&dataset)?;
            let evals = with_embedder(&cfg, |e| {
                Ok(pipeline::eval_records(&records, &cfg, Some(e))?)
            })?;
            write_lines(out.as_deref(), &evals)
        }
        Command::Eval { records, format } => {
            let records = load_eval_records(&records)?;
            let table = evaluate(&records)?;
            print!(
                "{}",
                match format {
                    Format::Text => table.to_text(),
                    Format::Csv => table.to_csv(),
                }
            );
            Ok(())
        }
        Command::Ablate {
            dataset,
            sweep,
            values,
            measures,
            format,
            label,
            cluster,
            embed,
        } => {
            apply_embed(&mut cfg, &embed);
            apply_cluster(&mut cfg, &cluster);
            apply_label(&mut cfg, &label);
            if let Some(m) = measures {
                cfg.measures = m;
            }
            if sweep == Sweep::Generations && embed.generations.is_none() {
                // labels and the largest P need every available answer
                cfg.generations = usize::MAX;
            }
            cfg.validate()?;
            let records = load_dataset(&dataset)?;
            let corpus = with_embedder(&cfg, |e| {
                Ok(pipeline::prepare_corpus(&records, &cfg, Some(e))?)
            })?;
            let table = ablate(&corpus, sweep, values.as_deref(), &cfg)?;
            print!(
                "{}",
                match format {
                    Format::Text => table.to_text(),
                    Format::Csv => table.to_csv(),
                }
            );
            Ok(())
        }
        Command::Bench {
            max_p,
            dim,
            repetitions,
            seed,
            mock_nli_latency_ms,
            mock_nli_sleep,
            no_mock_nli,
        } => {
            let latency = Duration::from_millis(mock_nli_latency_ms);
            let mock_nli = match (no_mock_nli, mock_nli_sleep) {
                (true, _) => None,
                (false, true) => Some(NliLatency::Sleep(latency)),
                (false, false) => Some(NliLatency::Simulated(latency)),
            };
            let bench = BenchConfig {
                p_values: bench_p_values(max_p)?,
                dim,
                repetitions,
                seed,
                mock_nli,
                ..BenchConfig::default()
            };
            let samples = bench_clustering(&bench)?;
            print_bench(&samples)
        }
        Command::Synth {
            questions,
            seed,
            generations,
            dim,
            out,
        } => {
            let synth = SynthConfig {
                questions,
                generations,
                dim,
                seed: seed.unwrap_or(cfg.seed),
                ..SynthConfig::default()
            };
            let records = synth_corpus(&synth)?;
            write_dataset(out.as_deref(), &records)
        }
    }
}

fn apply_embed(cfg: &mut Config, args: &EmbedArgs) {
    if let Some(c) = &args.cache {
        cfg.cache = c.clone();
    }
    if let Some(e) = &args.endpoint {
        cfg.endpoint = Some(e.clone());
    }
    if let Some(m) = &args.model {
        cfg.model = m.clone();
    }
    if let Some(g) = args.generations {
        cfg.generations = g;
    }
}

fn apply_cluster(cfg: &mut Config, args: &ClusterArgs) {
    if let Some(a) = args.algo {
        cfg.algorithm = a;
    }
    if let Some(t) = args.threshold {
        cfg.distance_threshold = t;
    }
}

fn apply_label(cfg: &mut Config, args: &LabelArgs) {
    if let Some(t) = args.label_threshold {
        cfg.label_threshold = t;
    }
    match args.policy {
        Some(Policy::Majority) => cfg.label_policy = LabelPolicy::Majority,
        Some(Policy::LowTempReference) => {
            cfg.label_policy = LabelPolicy::LowTempReference {
                index: args.reference_index,
            }
        }
        None => {}
    }
}

/// Run `f` with an embedder over the configured cache and service, saving
/// the cache afterwards if anything was added.
fn with_embedder<T>(cfg: &Config, f: impl FnOnce(&mut Embedder<'_>) -> Result<T>) -> Result<T> {
    let cache = EmbeddingCache::load(&cfg.cache)?;
    let service = cfg
        .endpoint
        .as_deref()
        .map(HttpEmbeddingService::new)
        .transpose()?;
    let mut embedder = Embedder::new(
        cache,
        service.as_ref().map(|s| s as &dyn EmbeddingService),
        cfg.model.clone(),
    )
    .with_batch_size(cfg.batch_size);
    let out = f(&mut embedder);
    // keep whatever was fetched before a failure
    if embedder.is_dirty() {
        embedder.cache.save(&cfg.cache)?;
    }
    out
}

fn print_clustering(
    record: &DatasetRecord,
    c: &sindex_core::Clustering,
    report: &sindex_core::ScoreReport,
    cfg: &Config,
) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "question {}: {}", record.id, record.question)?;
    writeln!(
        out,
        "algorithm {} threshold {} k {}",
        c.algorithm.name(),
        c.threshold,
        c.k
    )?;
    let answers = &record.answers[..c.len()];
    for (id, members) in c.members().iter().enumerate() {
        let texts: Vec<&str> = members.iter().map(|&i| answers[i].as_str()).collect();
        let indices: Vec<String> = members.iter().map(|i| i.to_string()).collect();
        writeln!(
            out,
            "cluster {id} [{}] p={:.4} p'={:.4} {:?}",
            indices.join(" "),
            report.proportions[id],
            report.adjusted_proportions[id],
            texts
        )?;
    }
    for m in &cfg.measures {
        writeln!(out, "{} {:.6}", m.name(), report.get(*m))?;
    }
    writeln!(out, "merges")?;
    write!(out, "{}", format_merge_trace(&c.merge_trace))?;
    Ok(())
}

fn ablate(
    corpus: &[sindex_core::PreparedQuestion],
    sweep: Sweep,
    values: Option<&[String]>,
    cfg: &Config,
) -> Result<AblationTable> {
    let scoring = ScoringConfig {
        threshold: cfg.distance_threshold,
        algorithm: cfg.algorithm,
    };
    Ok(match sweep {
        Sweep::Threshold => {
            let sims = match values {
                Some(v) => parse_values::<f64>(v)?,
                None => DEFAULT_SIMILARITY_SWEEP.to_vec(),
            };
            ablate_threshold(corpus, &sims, cfg.algorithm, &cfg.measures)?
        }
        Sweep::Generations => {
            let ps = match values {
                Some(v) => parse_values::<usize>(v)?,
                None => {
                    let max = corpus.iter().map(|q| q.responses.len()).min().unwrap_or(0);
                    DEFAULT_GENERATION_SWEEP
                        .into_iter()
                        .filter(|&p| p <= max)
                        .collect()
                }
            };
            ablate_generations(corpus, &ps, &scoring, &cfg.measures)?
        }
        Sweep::Algorithm => ablate_algorithm(corpus, cfg.distance_threshold, &cfg.measures)?,
    })
}

fn parse_values<T: std::str::FromStr>(values: &[String]) -> Result<Vec<T>> {
    values
        .iter()
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::new("input", format!("bad sweep value {v:?}")))
        })
        .collect()
}

/// The default P grid up to `max_p`, always ending at `max_p`.
fn bench_p_values(max_p: usize) -> Result<Vec<usize>> {
    if max_p < 2 {
        return Err(CliError::new("input", "--max-p must be at least 2"));
    }
    let mut ps: Vec<usize> = BenchConfig::default()
        .p_values
        .into_iter()
        .filter(|&p| p < max_p)
        .collect();
    ps.push(max_p);
    Ok(ps)
}

fn print_bench(samples: &[BenchSample]) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", BenchSample::CSV_HEADER)?;
    for s in samples {
        writeln!(out, "{}", s.to_csv_line())?;
    }
    for alg in [
        BenchAlgorithm::HacAverage,
        BenchAlgorithm::Greedy,
        BenchAlgorithm::MockNli,
    ] {
        if let Some(e) = fit_exponent(samples, alg) {
            eprintln!("exponent {alg} {e:.3}");
        }
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::new("io", format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_lines<T: Serialize>(path: Option<&Path>, items: &[T]) -> Result<()> {
    let mut w = output(path)?;
    write_jsonl(&mut w, items)?;
    w.flush()?;
    Ok(())
}

fn write_dataset(path: Option<&Path>, records: &[DatasetRecord]) -> Result<()> {
    match path {
        Some(p) => Ok(sindex_io::write_dataset(p, records)?),
        None => {
            let mut w = output(None)?;
            sindex_io::dataset::write_dataset_to(&mut w, records)?;
            w.flush()?;
            Ok(())
        }
    }
}
