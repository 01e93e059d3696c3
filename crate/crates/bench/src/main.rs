use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpp_bench::config::{ExperimentConfig, Purpose};
use dpp_bench::dataset::load_dataset;
use dpp_bench::experiments::{
    bench_classification, bench_reconstruction, bench_robustness, embedding_csv, landmarks_csv, run_embed,
    run_sample,
};
use dpp_bench::plotdata::{emit_plotdata, PlotKind};
use dpp_bench::results::metadata_header;
use dpp_bench::{BenchError, ResultTable};
use dpp_landmarks::datasets::write_csv_to;

#[derive(Parser)]
#[command(name = "dpp-landmarks", version, about = "DPP landmark selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured dataset as point CSV (ground truth goes to `<out>.truth.csv`).
    Generate(Common),
    /// Draw one landmark set and write its indices and coordinates.
    Sample(Common),
    /// Sample, build the landmark graph, embed and extend to all points.
    Embed(Common),
    /// Nyström reconstruction error per sampler and landmark count.
    BenchRecon(Common),
    /// Embedding quality across graph metrics and neighbor counts.
    BenchRobust(Common),
    /// 1-nearest-neighbor accuracy in the extended embedding.
    BenchClassify(Common),
    /// Convert a result table or embedding into plot series.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        /// error-vs-k, score-vs-knn, bars or scatter.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn output_path(cfg: &ExperimentConfig) -> Result<&Path, BenchError> {
    cfg.output
        .as_deref()
        .ok_or_else(|| BenchError::Config(vec!["no output path: set \"output\" or pass --out".into()]))
}

fn write(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_table(cfg: &ExperimentConfig, table: &ResultTable) -> Result<(), BenchError> {
    let path = output_path(cfg)?;
    table.write_csv(path)?;
    log::info!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(())
}

fn header(command: &str, cfg: &ExperimentConfig, mut notes: Vec<String>) -> String {
    notes.extend(cfg.note.clone());
    metadata_header(command, cfg.seed, &cfg.to_json(), &notes)
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load(&common)?;
            cfg.validate(Purpose::Generate)?;
            let path = output_path(&cfg)?;
            let data = load_dataset(&cfg.dataset)?;
            let mut text = header("generate", &cfg, Vec::new()).into_bytes();
            write_csv_to(&data.train, &mut text)?;
            write(path, &String::from_utf8(text).expect("csv output is utf-8"))?;
            if let Some(truth) = data.train.truth() {
                let mut t = header("generate", &cfg, vec!["ground-truth coordinates".into()]);
                let names: Vec<String> = (0..truth.nrows()).map(|j| format!("truth{j}")).collect();
                t.push_str(&names.join(","));
                t.push('\n');
                for col in truth.column_iter() {
                    let cells: Vec<String> = col.iter().map(f64::to_string).collect();
                    t.push_str(&cells.join(","));
                    t.push('\n');
                }
                write(&path.with_extension("truth.csv"), &t)?;
            }
        }
        Command::Sample(common) => {
            let cfg = load(&common)?;
            let path = output_path(&cfg)?.to_owned();
            let out = run_sample(&cfg)?;
            let text = landmarks_csv(&out.dataset.train, &out.selection, &header("sample", &cfg, Vec::new()))?;
            write(&path, &text)?;
        }
        Command::Embed(common) => {
            let cfg = load(&common)?;
            let path = output_path(&cfg)?.to_owned();
            let (data, out) = run_embed(&cfg)?;
            let mut notes = vec![format!(
                "landmark graph: {} edges, {} components",
                out.edges, out.components
            )];
            if let Some(e) = out.reconstruction_error {
                notes.push(format!("nystrom trace-norm error: {e}"));
            }
            let text = embedding_csv(&data.train, &out, &header("embed", &cfg, notes))?;
            write(&path, &text)?;
        }
        Command::BenchRecon(common) => {
            let cfg = load(&common)?;
            output_path(&cfg)?;
            write_table(&cfg, &bench_reconstruction(&cfg)?)?;
        }
        Command::BenchRobust(common) => {
            let cfg = load(&common)?;
            output_path(&cfg)?;
            write_table(&cfg, &bench_robustness(&cfg)?)?;
        }
        Command::BenchClassify(common) => {
            let cfg = load(&common)?;
            output_path(&cfg)?;
            write_table(&cfg, &bench_classification(&cfg)?)?;
        }
        Command::Plotdata { input, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            emit_plotdata(&input, kind, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
