//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::criterion::{efficiency, Evaluator, FrequencyDesign, Objective};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{CandidateSet, Design, ModelSpec};
use crate::regularity::BoundsReport;
use crate::search::{baseline_design, global_design, local_search, sample_nonsingular, BaselineKind};

#[derive(Debug, Parser)]
#[command(
    name = "qqdesign",
    version,
    about = "Bayesian D-optimal designs for paired continuous and binary responses"
)]
pub struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for global searches.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Experiment config (JSON).
    #[arg(short, long)]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the full factorial candidate set with its model matrix.
    Candidates {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Replication and run-size bounds as JSON.
    Bounds {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        eta: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        /// Design whose distinct points are checked; all candidates otherwise.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Local design for one parameter value.
    Local {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        eta: PathBuf,
        /// Row of the parameter file to use (0-based).
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Global frequency design over sampled parameter values.
    Global {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the parameter samples used.
        #[arg(long)]
        eta_out: Option<PathBuf>,
    },
    /// Linear, binary-response and combined reference designs.
    Baselines {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        eta: PathBuf,
        #[arg(long, default_value_t = 0)]
        row: usize,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Per-sample efficiency of design A relative to design B.
    Efficiency {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        design_a: PathBuf,
        #[arg(long)]
        design_b: PathBuf,
        #[arg(long)]
        eta_samples: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Draw an exact design from a frequency design.
    Sample {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        freq: PathBuf,
        #[arg(short)]
        n: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialises");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|source| Error::Io {
        path: p.to_path_buf(),
        source,
    })
}

struct Loaded {
    cfg: ExperimentConfig,
    model: ModelSpec,
    cands: CandidateSet,
}

fn load(arg: &ConfigArg) -> Result<Loaded> {
    let cfg = ExperimentConfig::load(&arg.config)?;
    let model = cfg.model()?;
    let cands = CandidateSet::full_factorial(&model);
    Ok(Loaded { cfg, model, cands })
}

fn eta_row(path: &Path, model: &ModelSpec, row: usize) -> Result<Vec<f64>> {
    let mut rows = io::read_eta_samples(path, &model.effect_names())?;
    if row >= rows.len() {
        return Err(Error::Config(format!(
            "{}: row {row} requested but the file has {} rows",
            path.display(),
            rows.len()
        )));
    }
    Ok(rows.swap_remove(row))
}

/// A discrete design, or a frequency design when the file has a
/// `frequency` column.
enum AnyDesign {
    Exact(Design),
    Continuous(FrequencyDesign),
}

fn read_any_design(path: &Path, cands: &CandidateSet) -> Result<AnyDesign> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let header = text.lines().next().unwrap_or("");
    if header.split(',').any(|h| h.trim() == "frequency") {
        Ok(AnyDesign::Continuous(io::read_frequency_from(
            text.as_bytes(),
            path,
            cands,
        )?))
    } else {
        Ok(AnyDesign::Exact(io::read_design_from(text.as_bytes(), path, cands)?))
    }
}

impl AnyDesign {
    fn q(&self, eval: &Evaluator<'_>, n: usize) -> Result<f64> {
        match self {
            AnyDesign::Exact(d) => eval.q_value(d),
            AnyDesign::Continuous(f) => eval.continuous_q(f, n),
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match &cli.command {
        Command::Candidates { cfg, output } => {
            let l = load(cfg)?;
            let f = std::fs::File::create(output).map_err(|source| Error::Io {
                path: output.clone(),
                source,
            })?;
            io::write_candidates(f, output, &l.cands)
        }
        Command::Bounds {
            cfg,
            eta,
            kappa,
            design,
            output,
        } => {
            let l = load(cfg)?;
            let eta = eta_row(eta, &l.model, 0)?;
            let pis = l.cands.probabilities(&eta, l.cfg.criterion.link)?;
            let points = match design {
                Some(p) => io::read_design(p, &l.cands)?.support(),
                None => (0..l.cands.len()).collect(),
            };
            let sub: Vec<f64> = points.iter().map(|&i| pis[i]).collect();
            let report = BoundsReport::new(&sub, l.model.q(), *kappa)?;
            write_json(
                output.as_deref(),
                &json!({ "points": points.iter().map(|i| i + 1).collect::<Vec<_>>(), "bounds": report }),
            )
        }
        Command::Local {
            cfg,
            eta,
            row,
            output,
            report,
        } => {
            let l = load(cfg)?;
            let eta = eta_row(eta, &l.model, *row)?;
            let objective = l.cfg.objective(&l.model)?;
            let sc = l.cfg.search_config(cli.seed);
            let r = local_search(&l.cands, &eta, &objective, &sc)?;
            io::write_design_file(output, &l.cands, &r.design)?;
            write_json(
                report.as_deref(),
                &json!({
                    "q": r.q,
                    "n": r.design.n(),
                    "distinct": r.design.distinct(),
                    "restart_values": r.restart_values,
                    "accepted_exchanges": r.accepted,
                    "seed": sc.seed,
                }),
            )
        }
        Command::Global {
            cfg,
            output,
            report,
            eta_out,
        } => {
            let l = load(cfg)?;
            let sc = l.cfg.search_config(cli.seed);
            let etas = l.cfg.eta_samples(&l.model, &mut ChaCha8Rng::seed_from_u64(sc.seed))?;
            if let Some(p) = eta_out {
                io::write_eta_samples_file(p, &l.model.effect_names(), &etas)?;
            }
            let objective = l.cfg.objective(&l.model)?;
            let g = global_design(&l.cands, &etas, &objective, &sc)?;
            io::write_frequency_file(output, &l.cands, &g.freq)?;
            write_json(
                report.as_deref(),
                &json!({
                    "B": g.b,
                    "n": sc.n,
                    "seed": sc.seed,
                    "local_q": g.per_eta.iter().map(|o| o.q).collect::<Vec<_>>(),
                    "failures": g.failures,
                    "support_size": g.counts.iter().filter(|&&c| c > 0).count(),
                }),
            )
        }
        Command::Baselines { cfg, eta, row, output } => {
            let l = load(cfg)?;
            let eta = eta_row(eta, &l.model, *row)?;
            let sc = l.cfg.search_config(cli.seed);
            let link = l.cfg.criterion.link;
            create_dir(output)?;
            let eval = Evaluator::new(&l.cands, &eta, &l.cfg.objective(&l.model)?)?;
            let mut summary = serde_json::Map::new();
            for (file, kind) in [
                ("d_l.csv", BaselineKind::LinearD),
                ("d_g.csv", BaselineKind::GlmLocalD),
                ("d_c.csv", BaselineKind::combined(sc.n)),
            ] {
                let d = baseline_design(kind, &l.cands, &eta, link, &sc)?;
                io::write_design_file(&output.join(file), &l.cands, &d)?;
                summary.insert(kind.label().into(), json!({ "file": file, "q": eval.q_value(&d).ok() }));
            }
            write_json(Some(&output.join("summary.json")), &summary)
        }
        Command::Efficiency {
            cfg,
            design_a,
            design_b,
            eta_samples,
            output,
        } => {
            let l = load(cfg)?;
            let a = read_any_design(design_a, &l.cands)?;
            let b = read_any_design(design_b, &l.cands)?;
            let etas = io::read_eta_samples(eta_samples, &l.model.effect_names())?;
            let objective = l.cfg.objective(&l.model)?;
            let n = l.cfg.search.n;
            let q = l.model.q();
            let mut rows = Vec::with_capacity(etas.len());
            for (k, eta) in etas.iter().enumerate() {
                let eval = Evaluator::new(&l.cands, eta, &objective)?;
                let (qa, qb) = (a.q(&eval, n)?, b.q(&eval, n)?);
                rows.push(vec![
                    (k + 1).to_string(),
                    qa.to_string(),
                    qb.to_string(),
                    efficiency(qa, qb, q).to_string(),
                ]);
            }
            let mut w = csv::Writer::from_path(output).map_err(|e| Error::Parse {
                path: output.clone(),
                message: e.to_string(),
            })?;
            let werr = |e: csv::Error| Error::Parse {
                path: output.clone(),
                message: e.to_string(),
            };
            w.write_record(["sample", "q_a", "q_b", "efficiency"]).map_err(werr)?;
            for r in rows {
                w.write_record(&r).map_err(werr)?;
            }
            w.flush().map_err(|source| Error::Io {
                path: output.clone(),
                source,
            })
        }
        Command::Sample { cfg, freq, n, output } => {
            let l = load(cfg)?;
            let f = io::read_frequency(freq, &l.cands)?;
            // Nonsingularity only depends on the rank of the selected rows.
            let eval = Evaluator::new(&l.cands, &vec![0.0; l.model.q()], &Objective::LinearD)?;
            let mut rng = ChaCha8Rng::seed_from_u64(l.cfg.search_config(cli.seed).seed);
            let d = sample_nonsingular(&eval, &f, *n, &mut rng)?;
            io::write_design_file(output, &l.cands, &d)
        }
    }
}
