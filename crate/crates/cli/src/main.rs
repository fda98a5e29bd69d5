use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pt_anneal::sweep_io::{
    emit_csv, emit_heatmap_svg, run_sweep_with, Axis, AxisName, ModelKind, ResultTable, Spacing, SweepJob, Target,
};

#[derive(Parser)]
#[command(name = "anneal", version, about = "PT-symmetric qubit-chain annealing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous spectrum of H(s)
    Spectrum(Common),
    /// Evolution under a frozen Hamiltonian
    EvolveStatic(Common),
    /// Evolution under the linear annealing schedule
    EvolveDriven(Common),
    /// Ground-state fidelity after annealing the full chain
    Anneal(Common),
    /// Analytic non-Hermitian Landau-Zener-Stueckelberg probability
    Lzs(Common),
    /// Exceptional points of the full chain on [0, 1]
    Ep(Common),
    /// Run the job described by --config, whatever its target
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Full,
    Effective,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Args)]
struct Common {
    /// JSON job file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    /// Fixed s (full model) or s_tilde0 (effective static evolution)
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long = "n-qubits")]
    n_qubits: Option<usize>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "t-samples")]
    t_samples: Option<usize>,
    /// Sweep axis as name:min:max:count[:linear|log]; replaces an axis of the same name
    #[arg(long, value_name = "SPEC")]
    grid: Vec<String>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Output stem; writes <stem>.csv and <stem>.meta.json. Without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Column shown in the heatmap
    #[arg(long)]
    z: Option<String>,
    /// Worker threads; defaults to the number of cores
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_grid(spec: &str) -> Result<Axis> {
    let parts: Vec<&str> = spec.split(':').collect();
    if !(4..=5).contains(&parts.len()) {
        bail!("--grid expects name:min:max:count[:spacing], got {spec:?}");
    }
    let name = AxisName::parse(parts[0]).ok_or_else(|| anyhow!("unknown axis {:?}", parts[0]))?;
    let min = parts[1].parse().with_context(|| format!("bad min in {spec:?}"))?;
    let max = parts[2].parse().with_context(|| format!("bad max in {spec:?}"))?;
    let count = parts[3].parse().with_context(|| format!("bad count in {spec:?}"))?;
    let spacing = match parts.get(4).copied() {
        None | Some("linear") => Spacing::Linear,
        Some("log") => Spacing::Log,
        Some(other) => bail!("unknown spacing {other:?}"),
    };
    Ok(Axis { name, min, max, count, spacing })
}

fn build_job(target: Option<Target>, c: &Common) -> Result<SweepJob> {
    let mut job = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SweepJob::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SweepJob::new(target.ok_or_else(|| anyhow!("sweep requires --config"))?),
    };
    if let Some(t) = target {
        if t != job.target {
            bail!("config target {:?} does not match subcommand {:?}", job.target, t);
        }
    }
    if let Some(m) = c.model {
        job.model = match m {
            Model::Full => ModelKind::Full,
            Model::Effective => ModelKind::Effective,
        };
    }
    let f = &mut job.fixed;
    f.gamma = c.gamma.or(f.gamma);
    f.k = c.k.or(f.k);
    f.epsilon = c.epsilon.or(f.epsilon);
    f.g = c.g.or(f.g);
    f.n_qubits = c.n_qubits.or(f.n_qubits);
    f.t_max = c.t_max.or(f.t_max);
    f.t_samples = c.t_samples.or(f.t_samples);
    if let Some(s0) = c.s0 {
        if job.target == Target::StaticEvolve && job.model == ModelKind::Effective {
            f.s_tilde0 = Some(s0);
        } else {
            f.s = Some(s0);
        }
    }
    for spec in &c.grid {
        let axis = parse_grid(spec)?;
        match job.axes.iter_mut().find(|a| a.name == axis.name) {
            Some(slot) => *slot = axis,
            None => job.axes.push(axis),
        }
    }
    job.validate()?;
    Ok(job)
}

fn default_z(table: &ResultTable, job: &SweepJob) -> Option<String> {
    let preferred: &[&str] = match job.target {
        Target::Qaa | Target::Lzs => &["p_ground"],
        Target::Spectrum => &["broken_pairs"],
        Target::StaticEvolve => &["decay", "ln_norm"],
        Target::DrivenEvolve => &["p_up", "p_0"],
        Target::EpFind => &["ep_count"],
    };
    preferred.iter().find(|n| table.column_index(n).is_some()).map(|s| s.to_string())
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut name = stem.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn run(target: Option<Target>, c: &Common) -> Result<bool> {
    let job = build_job(target, c)?;
    if c.format == Format::CsvSvg && (job.axes.len() != 2 || c.out.is_none()) {
        bail!("--format csv+svg needs exactly two axes and --out");
    }
    let table = run_sweep_with(&job, c.jobs)?;
    match &c.out {
        Some(stem) => {
            let csv_path = with_extension(stem, "csv");
            emit_csv(&table, &csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
            if c.format == Format::CsvSvg {
                let z = c.z.clone().or_else(|| default_z(&table, &job)).ok_or_else(|| anyhow!("no heatmap column; pass --z"))?;
                let svg_path = with_extension(stem, "svg");
                emit_heatmap_svg(&table, job.axes[1].name.as_str(), job.axes[0].name.as_str(), &z, &svg_path)?;
            }
        }
        None => print!("{}", table.to_csv_string()?),
    }
    let failed = table.failed_rows();
    if !failed.is_empty() {
        log::warn!("{} of {} rows recorded a numerical failure", failed.len(), table.rows.len());
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (target, common) = match &cli.command {
        Command::Spectrum(c) => (Some(Target::Spectrum), c),
        Command::EvolveStatic(c) => (Some(Target::StaticEvolve), c),
        Command::EvolveDriven(c) => (Some(Target::DrivenEvolve), c),
        Command::Anneal(c) => (Some(Target::Qaa), c),
        Command::Lzs(c) => (Some(Target::Lzs), c),
        Command::Ep(c) => (Some(Target::EpFind), c),
        Command::Sweep(c) => (None, c),
    };
    match run(target, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
