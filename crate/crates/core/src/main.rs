use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use housenav::audit::{audit, render_table};
use housenav::config::load_config;
use housenav::generator::build_dataset;
use housenav::ground_truth::TrajectoryGroundTruth;
use housenav::io::{read_dataset, read_video, render_ascii, validate_dir, write_dataset};
use housenav::oracle::run_agreement;
use housenav::question::{builtin_templates, execute, template_by_id, Bindings, ExecContext, Outcome, TemplateRecord};
use housenav::scene::{House, Lexicon};

const EXIT_IO: u8 = 3;
const EXIT_INVARIANT: u8 = 4;
const EXIT_GENERATION: u8 = 5;

#[derive(Parser)]
#[command(name = "housenav", version, about = "Generate, check and audit synthetic house question/answer datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset directory.
    Gen {
        /// TOML config; defaults apply to anything it leaves out.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "HOUSENAV_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        houses: Option<usize>,
        #[arg(long, env = "HOUSENAV_OUT")]
        out: PathBuf,
        #[arg(long)]
        questions_per_video: Option<usize>,
        #[arg(long)]
        videos_per_house: Option<usize>,
        /// Do not store four-to-one frame sub-sampling indices.
        #[arg(long)]
        no_subsample: bool,
        /// Worker threads; 0 uses all cores, 1 runs serially.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write top-down ASCII maps under debug/ (not part of the dataset).
        #[arg(long)]
        debug_render: bool,
        /// Write into a non-empty directory.
        #[arg(long)]
        force: bool,
    },
    /// Print statistics and majority baselines for a dataset.
    Audit {
        #[arg(long)]
        dataset: PathBuf,
        /// Write the full report as JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Run one template program on a ground-truth file.
    Exec {
        /// Per-video ground-truth file (dataset JSONL) or a ground-truth JSON document.
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        template: u8,
        /// JSON object mapping slot names (e.g. "attr", "obj_type1", "attr{0}") to values.
        #[arg(long)]
        bindings: PathBuf,
        /// House JSON; by default looked up in the dataset containing the ground-truth file.
        #[arg(long)]
        house: Option<PathBuf>,
        /// Lexicon JSON; by default the dataset's lexicon, else the built-in one.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Compare the program executor with the enumeration oracle on random worlds.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a dataset directory's schema, digests and invariants.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Print the template table as JSON.
    Templates,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

type CmdResult = Result<(), Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(fail(EXIT_IO))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(fail(EXIT_IO))
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    config: Option<PathBuf>,
    seed: u64,
    houses: Option<usize>,
    out: PathBuf,
    questions_per_video: Option<usize>,
    videos_per_house: Option<usize>,
    no_subsample: bool,
    jobs: usize,
    debug_render: bool,
    force: bool,
) -> CmdResult {
    let mut cfg = load_config(config.as_deref()).map_err(|e| fail(EXIT_GENERATION)(e.into()))?;
    if let Some(h) = houses {
        cfg.houses = h;
    }
    if let Some(q) = questions_per_video {
        cfg.quota.questions_per_video = q;
    }
    if let Some(v) = videos_per_house {
        cfg.videos_per_house = v;
    }
    if no_subsample {
        cfg.subsample = false;
    }
    if !force && out.is_dir() && fs::read_dir(&out).map(|mut d| d.next().is_some()).unwrap_or(false) {
        return Err(fail(EXIT_IO)(anyhow!("{} is not empty (pass --force to write anyway)", out.display())));
    }
    let d = build_dataset(&cfg, seed, jobs).map_err(|e| fail(EXIT_GENERATION)(e.into()))?;
    let m = write_dataset(&d, &out).map_err(|e| fail(EXIT_IO)(e.into()))?;
    if debug_render {
        let dir = out.join("debug");
        fs::create_dir_all(&dir).map_err(|e| fail(EXIT_IO)(e.into()))?;
        for h in &d.houses {
            let text = render_ascii(&h.house, h.videos.first().map(|v| &v.trajectory));
            fs::write(dir.join(format!("{}.txt", h.house.id)), text).map_err(|e| fail(EXIT_IO)(e.into()))?;
        }
    }
    let videos: usize = m.splits.values().map(|s| s.videos.len()).sum();
    let questions: usize = m.splits.values().map(|s| s.questions.len()).sum();
    println!("wrote {} houses, {videos} videos, {questions} questions to {}", d.houses.len(), out.display());
    for (split, l) in &m.splits {
        println!("  {:<10} {:>4} houses {:>6} videos {:>6} questions", split.as_str(), l.houses.len(), l.videos.len(), l.questions.len());
    }
    println!("content digest {}", m.content_digest);
    Ok(())
}

fn cmd_audit(dataset: PathBuf, report_out: Option<PathBuf>) -> CmdResult {
    let d = read_dataset(&dataset).map_err(|e| fail(EXIT_IO)(e.into()))?;
    let r = audit(&d).map_err(|e| fail(EXIT_INVARIANT)(e.into()))?;
    print!("{}", render_table(&r));
    if let Some(path) = report_out {
        let text = serde_json::to_string_pretty(&r).expect("report serializes");
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display())).map_err(fail(EXIT_IO))?;
    }
    Ok(())
}

/// Dataset root for a `<root>/<split>/videos/<video>.jsonl` path.
fn dataset_root(gt: &Path) -> Option<&Path> {
    gt.parent()?.parent()?.parent()
}

fn cmd_exec(gt_path: PathBuf, template: u8, bindings: PathBuf, house: Option<PathBuf>, lexicon: Option<PathBuf>) -> CmdResult {
    let t = template_by_id(template).ok_or_else(|| fail(EXIT_INVARIANT)(anyhow!("no template with id {template} (1-28)")))?;
    let gt: TrajectoryGroundTruth = match read_video(&gt_path) {
        Ok(v) => v.gt,
        Err(_) => read_json(&gt_path)?,
    };
    let root = dataset_root(&gt_path);
    let house_path = match house {
        Some(p) => p,
        None => root
            .map(|r| r.join("houses").join(format!("{}.json", gt.house_id)))
            .filter(|p| p.is_file())
            .ok_or_else(|| fail(EXIT_IO)(anyhow!("house {} not found next to the ground truth; pass --house", gt.house_id)))?,
    };
    let house: House = read_json(&house_path)?;
    let lexicon: Lexicon = match lexicon {
        Some(p) => read_json(&p)?,
        None => match root.map(|r| r.join("lexicon.json")).filter(|p| p.is_file()) {
            Some(p) => read_json(&p)?,
            None => Lexicon::default(),
        },
    };
    let b: Bindings = read_json(&bindings)?;
    let out = execute(&t.program, ExecContext { house: &house, gt: &gt, lexicon: &lexicon }, &b)
        .map_err(|e| fail(EXIT_INVARIANT)(e.into()))?;
    match out {
        Outcome::Answer(a) => println!("{a}"),
        Outcome::Invalid(r) => println!("Invalid ({r:?})"),
    }
    Ok(())
}

fn cmd_oracle(n: usize, seed: u64) -> CmdResult {
    let r = run_agreement(n, seed);
    println!("{}/{} agree", r.agreeing_worlds, r.worlds);
    println!("{} template checks, {} disagreements", r.checks, r.disagreements.len());
    for d in r.disagreements.iter().take(10) {
        println!("  world {} template {}: executor {:?}, oracle {:?}", d.world, d.template, d.executor, d.oracle);
    }
    if r.all_agree() {
        Ok(())
    } else {
        Err(fail(EXIT_INVARIANT)(anyhow!("executor and oracle disagree")))
    }
}

fn cmd_validate(dataset: PathBuf) -> CmdResult {
    let v = validate_dir(&dataset).map_err(|e| fail(EXIT_IO)(e.into()))?;
    if v.is_empty() {
        println!("ok: {} passes every check", dataset.display());
        return Ok(());
    }
    for x in &v {
        println!("{x}");
    }
    Err(fail(EXIT_INVARIANT)(anyhow!("{} violations", v.len())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { config, seed, houses, out, questions_per_video, videos_per_house, no_subsample, jobs, debug_render, force } => {
            cmd_gen(config, seed, houses, out, questions_per_video, videos_per_house, no_subsample, jobs, debug_render, force)
        }
        Command::Audit { dataset, report_out } => cmd_audit(dataset, report_out),
        Command::Exec { gt, template, bindings, house, lexicon } => cmd_exec(gt, template, bindings, house, lexicon),
        Command::Oracle { n, seed } => cmd_oracle(n, seed),
        Command::Validate { dataset } => cmd_validate(dataset),
        Command::Templates => {
            let table: Vec<TemplateRecord> = builtin_templates().iter().map(|t| t.record()).collect();
            println!("{}", serde_json::to_string_pretty(&table).expect("table serializes"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
