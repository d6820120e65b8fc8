use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mvqc::classifiers::ClassifierId;
use mvqc::harness::{
    enroll_dataset, load_dataset, parse_separation, read_report, render, run_experiment, synth_generate,
    verify_sample, DatasetManifest, GridConfig, IrisMass, Modality, ReportFormat, SynthParams, TemplateDocument,
};
use mvqc::moments::MomentKind;
use mvqc::quadtree::TileOrder;

#[derive(Parser)]
#[command(name = "mvqc", version, about = "Minimum-variance quadtree component biometric verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enroll every subject of a manifest and write one template per subject.
    Enroll {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Directory receiving `<subject>.json` templates.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check one sample against a template. Exit code 0 accepts, 1 rejects.
    Verify {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        /// Rule to apply; defaults to the first one stored in the template.
        #[arg(long)]
        classifier: Option<ClassifierId>,
    },
    /// Run an experiment grid over a manifest and write the report.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Report path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a synthetic corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        subjects: usize,
        #[arg(long, default_value = "signature")]
        modality: Modality,
        /// Positive number, or low / medium / high.
        #[arg(long, default_value = "high", value_parser = parse_separation)]
        separation: f64,
        /// Genuine samples per subject (default depends on modality).
        #[arg(long)]
        genuine: Option<usize>,
        /// Training samples per subject (default depends on modality).
        #[arg(long)]
        training_count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a JSON report to another format.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Experiment settings: a JSON config file, then per-field overrides.
#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    d1: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    kind: Option<Vec<MomentKind>>,
    #[arg(long, value_delimiter = ',')]
    classifier: Option<Vec<ClassifierId>>,
    #[arg(long)]
    modality: Option<Modality>,
    #[arg(long = "offset-1", alias = "offset_1")]
    offset_1: Option<i64>,
    #[arg(long = "offset-2", alias = "offset_2")]
    offset_2: Option<i64>,
    #[arg(long = "swap-axes", alias = "swap_axes")]
    swap_axes: Option<bool>,
    #[arg(long = "tile-order", alias = "tile_order")]
    tile_order: Option<TileOrder>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "iris-mass", alias = "iris_mass")]
    iris_mass: Option<IrisMass>,
    #[arg(long = "max-imposters", alias = "max_imposters")]
    max_imposters: Option<usize>,
    #[arg(long = "imposter-training", alias = "imposter_training")]
    imposter_training: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Preprocess samples on first use instead of up front.
    #[arg(long)]
    lazy: bool,
}

impl GridArgs {
    fn resolve(&self) -> Result<GridConfig> {
        let mut c = match &self.config {
            Some(p) => GridConfig::read(p)?,
            None => GridConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(d1, b, kind, classifier, swap_axes, tile_order, seed, iris_mass, imposter_training);
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    c.$field = self.$field;
                }
            )*};
        }
        set_opt!(modality, offset_1, offset_2, max_imposters, threads);
        if self.lazy {
            c.eager = false;
        }
        c.validate()?;
        Ok(c)
    }
}

fn load(manifest: &Path, cfg: &GridConfig) -> Result<mvqc::harness::Dataset> {
    let database = DatasetManifest::read(manifest)?.database;
    Ok(load_dataset(manifest, cfg.preprocess_options(&database), cfg.eager)?)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Enroll { manifest, grid, out } => {
            let cfg = grid.resolve()?;
            let ds = load(&manifest, &cfg)?;
            let options = cfg.preprocess_options(&ds.manifest().database);
            let docs = enroll_dataset(&ds, &cfg, options)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for doc in &docs {
                doc.write(&out.join(format!("{}.json", doc.template.subject_id)))?;
            }
            eprintln!("enrolled {} subjects into {}", docs.len(), out.display());
        }
        Command::Verify { template, sample, classifier } => {
            let doc = TemplateDocument::read(&template)?;
            let (decision, value) = verify_sample(&doc, &sample, classifier)?;
            let verdict = if decision.accept { "accept" } else { "reject" };
            println!("{verdict} score={} summation={value}", decision.score);
            return Ok(if decision.accept { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Evaluate { manifest, grid, format, out, timing } => {
            let cfg = grid.resolve()?;
            let ds = load(&manifest, &cfg)?;
            let report = run_experiment(&ds, &cfg, timing)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_output(out.as_deref(), &render(&report, format))?;
        }
        Command::Synth { seed, subjects, modality, separation, genuine, training_count, out } => {
            let defaults = SynthParams::new(modality);
            let params = SynthParams {
                seed,
                subjects,
                modality,
                separation,
                genuine: genuine.unwrap_or(defaults.genuine),
                training_count: training_count.unwrap_or(defaults.training_count),
            };
            if params.genuine <= params.training_count {
                bail!("need more genuine samples than training samples to leave something to test");
            }
            let m = synth_generate(&params, &out)?;
            eprintln!("wrote {} subjects to {}", m.subjects.len(), out.join("manifest.json").display());
        }
        Command::Report { input, format, out } => {
            let report = read_report(&input)?;
            write_output(out.as_deref(), &render(&report, format))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
