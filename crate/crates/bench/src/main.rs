use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use smapy::{Dataset, DatasetKind, Engine, GeneratorSpec, LinearParams, ModelKind};
use smapy_bench::boundary::{boundary_grid, Extent, SavedModel};
use smapy_bench::experiment::{refit, reproduce, table_text, ExperimentConfig};
use smapy_bench::grid::{LinearGrid, SmapyGrid};
use smapy_bench::search::{grid_search_linear, grid_search_smapy, Protocol, ResultRecord};

#[derive(Parser)]
#[command(name = "smapy", version, about = "Cooperative hypercube tiling classifier benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a standardized toy data set as `x1,x2,y` CSV.
    GenData {
        #[arg(long)]
        dataset: DatasetKind,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip z-scoring.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Step 1: grid search of a linear learner with k-fold CV.
    FitLinear {
        #[arg(long)]
        kind: ModelKind,
        /// `default` or a JSON file holding a linear grid.
        #[arg(long, default_value = "default")]
        grid: String,
        #[command(flatten)]
        common: FitArgs,
    },
    /// Step 2: grid search of the engine around a step-1 winner.
    FitSmapy {
        #[arg(long)]
        kind: ModelKind,
        /// Step-1 record (or bare linear parameters) as JSON.
        #[arg(long)]
        linear_params: Option<PathBuf>,
        /// `default` or a JSON file holding an engine grid.
        #[arg(long, default_value = "default")]
        grid: String,
        #[command(flatten)]
        common: FitArgs,
    },
    /// Export the predictions of a saved model on a regular lattice.
    Boundary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        /// Data whose extent (plus a 0.5 margin) is covered; defaults to the
        /// extent remembered by an engine snapshot.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole experiment and write results, tables and boundaries.
    Reproduce {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    /// CSV produced by `gen-data`; otherwise `--dataset` is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "circles")]
    dataset: DatasetKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    cv: usize,
    #[arg(long, default_value_t = 0)]
    cv_seed: u64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    /// Write the winning record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the winner retrained on all rows here.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Write one JSON cycle report per line while retraining the winner.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl FitArgs {
    fn protocol(&self) -> Protocol {
        Protocol { folds: self.cv, cv_seed: self.cv_seed, epochs: self.epochs, fit_seed: 0 }
    }

    fn load(&self) -> Result<(Dataset<f64>, DatasetKind)> {
        match &self.data {
            Some(path) => Ok((Dataset::load_csv(path)?, self.dataset)),
            None => Ok((GeneratorSpec::reference(self.dataset, self.n, self.seed).generate()?, self.dataset)),
        }
    }

    fn finish(&self, record: &ResultRecord, data: &Dataset<f64>) -> Result<()> {
        emit(self.out.as_deref(), &serde_json::to_string_pretty(record)?)?;
        if self.model_out.is_none() && self.trace.is_none() {
            return Ok(());
        }
        let model = match (&record.smapy_params, &self.trace) {
            (Some(cfg), Some(trace)) => {
                let file = fs::File::create(trace).with_context(|| format!("creating {}", trace.display()))?;
                let mut w = BufWriter::new(file);
                let mut e = Engine::new(cfg.clone(), record.linear_params.clone(), data.dim())?;
                e.train_traced(&data.x, &data.y, |r| {
                    serde_json::to_writer(&mut w, r)?;
                    writeln!(w)?;
                    Ok(())
                })?;
                w.flush()?;
                SavedModel::Smapy(e)
            }
            (None, Some(_)) => bail!("--trace records engine cycles and only applies to fit-smapy"),
            _ => refit(record, data, &self.protocol())?,
        };
        if let Some(path) = &self.model_out {
            write_file(path, &serde_json::to_string(&model)?)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn linear_grid(arg: &str) -> Result<LinearGrid> {
    if arg == "default" {
        return Ok(LinearGrid::default());
    }
    let g: LinearGrid = read_json(Path::new(arg))?;
    g.validate()?;
    Ok(g)
}

fn load_linear_params(path: &Path, kind: ModelKind) -> Result<LinearParams<f64>> {
    let value: serde_json::Value = read_json(path)?;
    let params: LinearParams<f64> = match value.get("linear_params") {
        Some(inner) => serde_json::from_value(inner.clone())?,
        None => serde_json::from_value(value)?,
    };
    if params.kind != kind {
        bail!("{} holds {:?} parameters but --kind is {:?}", path.display(), params.kind, kind);
    }
    params.validate()?;
    Ok(params)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { dataset, n, seed, raw, out } => {
            let spec = GeneratorSpec { standardized: !raw, ..GeneratorSpec::reference(dataset, n, seed) };
            spec.generate::<f64>()?.save_csv(&out)?;
            let mut manifest = out.clone().into_os_string();
            manifest.push(".json");
            write_file(Path::new(&manifest), &serde_json::to_string_pretty(&spec)?)?;
        }
        Command::FitLinear { kind, grid, common } => {
            let grid = linear_grid(&grid)?;
            let (data, dataset) = common.load()?;
            let record = grid_search_linear(&data, &LinearParams::new(kind), &grid, &common.protocol(), dataset)?;
            common.finish(&record, &data)?;
        }
        Command::FitSmapy { kind, linear_params, grid, common } => {
            let grid = if grid == "default" { SmapyGrid::default() } else { read_json(Path::new(&grid))? };
            let base = ExperimentConfig::default().engine.base();
            grid.validate(&base)?;
            let (data, dataset) = common.load()?;
            let protocol = common.protocol();
            let linear = match linear_params {
                Some(path) => load_linear_params(&path, kind)?,
                None => {
                    grid_search_linear(&data, &LinearParams::new(kind), &LinearGrid::default(), &protocol, dataset)?
                        .linear_params
                }
            };
            let record = grid_search_smapy(&data, &linear, &base, &grid, &protocol, dataset)?;
            common.finish(&record, &data)?;
        }
        Command::Boundary { model, step, data, out } => {
            let model: SavedModel = read_json(&model)?;
            let extent = match data {
                Some(path) => Extent::of(&Dataset::load_csv(path)?)?,
                None => model.extent().context("a linear model does not know its data extent; pass --data")?,
            };
            emit(out.as_deref(), boundary_grid(&model, extent, step)?.to_csv().trim_end())?;
        }
        Command::Reproduce { config, out } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let records = reproduce(&cfg, &out)?;
            print!("{}", table_text(&records));
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
