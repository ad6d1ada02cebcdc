use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qjump::amplitude::{decompose_fx, hd_contribution_profile};
use qjump::analysis::{
    conditional_mc_sample, covariance_csv, fxpath_csv, hdprofile_csv, local_covariance,
    occurrence_grid, regions_csv, square_region_sums, GaussianModel, NeighborhoodOptions,
};
use qjump::io::{load_instance, save_instance};
use qjump::landscape::energy_landscape;
use qjump::lattice::{generate_lattice_instance, random_regular_instance, LatticeSpec};
use qjump::local_search::TieBreak;
use qjump::params::{GammaScaling, InfParams};
use qjump::pipeline::{
    filter_instances, fixed_budget_comparison, reference_ground, Bench, BenchmarkRun, FilterConfig,
    SolverSpec,
};
use qjump::qjump::{tts, QjumpConfig};
use qjump::sampler::{Backend, SamplerConfig};
use qjump::seed::derive_seed;
use qjump::statevector::{disagreement_angle, MixerKind};
use qjump::{Bitstring, Instance};

#[derive(Parser)]
#[command(name = "qjump", version, about = "Warm-started circuit sampling with local search for Ising problems")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Parameter table replacing the bundled one.
    #[arg(long, global = true)]
    params_file: Option<PathBuf>,
    /// Print wall-clock time to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances as JSON files.
    Generate(GenerateArgs),
    /// Generate instances and keep the hardest ones.
    Filter(FilterArgs),
    /// Benchmark one solver on one instance.
    Solve {
        #[command(subcommand)]
        solver: SolveCmd,
    },
    /// Time to solution from a per-run time and success probability.
    Tts(TtsArgs),
    /// Run every solver within a fixed modelled time budget.
    Compare(CompareArgs),
    /// Analyses exported as CSV or JSON.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
}

#[derive(Args)]
struct LatticeArgs {
    /// Lattice size parameter; the full lattice has 2L(L+1) sites.
    #[arg(long, default_value_t = 3)]
    l: usize,
    /// Remove the last K sites.
    #[arg(long, default_value_t = 0, conflicts_with = "mask")]
    trim: usize,
    /// Comma-separated sites to remove.
    #[arg(long, value_delimiter = ',')]
    mask: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2.0)]
    sigma_j: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_h: f64,
}

impl LatticeArgs {
    fn spec(&self) -> LatticeSpec {
        match &self.mask {
            Some(m) => LatticeSpec::masked(self.l, m.clone()),
            None if self.trim > 0 => LatticeSpec::trimmed(self.l, self.trim),
            None => LatticeSpec::full(self.l),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Random regular graph with this many sites instead of the lattice.
    #[arg(long)]
    regular: Option<usize>,
    #[arg(long, default_value_t = 4)]
    degree: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 50)]
    keep_tts: usize,
    #[arg(long, default_value_t = 20)]
    keep_cjump: usize,
    #[arg(long, default_value_t = 700)]
    sa_sweeps: usize,
    #[arg(long, default_value_t = 100)]
    sa_runs: usize,
    #[arg(long, default_value_t = 0.2)]
    cjump_eta: f64,
    #[arg(long, default_value_t = 20)]
    cjump_m: usize,
    #[arg(long, default_value_t = 12)]
    cjump_iterations: usize,
    #[arg(long, default_value_t = 100)]
    cjump_runs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MixerArg {
    Transverse,
    Rotated,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Divide,
    Multiply,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Lowest,
    Highest,
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[arg(long, default_value_t = MixerArg::Rotated, value_enum)]
    mixer: MixerArg,
    #[arg(long, default_value_t = ScalingArg::Divide, value_enum)]
    scaling: ScalingArg,
    #[arg(long, default_value_t = TieArg::Lowest, value_enum)]
    tie: TieArg,
}

impl CircuitArgs {
    fn mixer(&self) -> MixerKind {
        match self.mixer {
            MixerArg::Transverse => MixerKind::Transverse,
            MixerArg::Rotated => MixerKind::WarmStartRotated,
        }
    }
    fn scaling(&self) -> GammaScaling {
        match self.scaling {
            ScalingArg::Divide => GammaScaling::DivideByRescale,
            ScalingArg::Multiply => GammaScaling::MultiplyByRescale,
        }
    }
    fn tie(&self) -> TieBreak {
        match self.tie {
            TieArg::Lowest => TieBreak::LowestIndex,
            TieArg::Highest => TieBreak::HighestIndex,
        }
    }
}

#[derive(Args, Clone)]
struct LoopArgs {
    #[arg(long = "L", default_value_t = 2)]
    l: usize,
    #[arg(long = "Q", default_value_t = 20)]
    q: usize,
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long = "M", default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 12)]
    iterations: usize,
    #[command(flatten)]
    circuit: CircuitArgs,
}

impl LoopArgs {
    fn config(&self, backend: Backend, seed: u64) -> QjumpConfig {
        QjumpConfig {
            sampler: SamplerConfig {
                l: self.l,
                q: self.q,
                alpha: self.alpha,
                m: self.m,
                backend,
                mixer: self.circuit.mixer(),
                scaling: self.circuit.scaling(),
            },
            iterations: self.iterations,
            seed,
            initial: None,
            tie: self.circuit.tie(),
        }
    }
}

#[derive(Args, Clone)]
struct RunOut {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// One-line CSV summary.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SolveCmd {
    Sa {
        #[command(flatten)]
        io: RunOut,
        #[arg(long, default_value_t = 700)]
        sweeps: usize,
    },
    Qjump {
        #[command(flatten)]
        io: RunOut,
        #[command(flatten)]
        opts: LoopArgs,
    },
    Qaoa {
        #[command(flatten)]
        io: RunOut,
        #[arg(long = "Q", default_value_t = 6)]
        q: usize,
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Qjump loop with random bit flips in place of the circuit.
    Cjump {
        #[command(flatten)]
        io: RunOut,
        #[command(flatten)]
        opts: LoopArgs,
        #[arg(long, default_value_t = 0.2)]
        eta: f64,
    },
}

#[derive(Args)]
struct TtsArgs {
    /// Time per run in any unit.
    #[arg(long, requires = "p_s", conflicts_with = "run")]
    t_r: Option<f64>,
    #[arg(long)]
    p_s: Option<f64>,
    /// Report written by `solve`.
    #[arg(long)]
    run: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 40.0)]
    budget_ms: f64,
    #[command(flatten)]
    opts: LoopArgs,
    #[arg(long, default_value_t = 6)]
    qaoa_q: usize,
    #[arg(long, default_value_t = 700)]
    sa_sweeps: usize,
    /// Runs used to estimate each solver's run time.
    #[arg(long, default_value_t = 10)]
    pilot: usize,
    #[arg(long, default_value_t = 1.0)]
    aspect: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Report written by `solve`; its final solutions are binned.
    #[arg(long)]
    run: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    box_e: f64,
    #[arg(long, default_value_t = 2.0)]
    box_hd: f64,
    #[arg(long, default_value_t = 1.0)]
    aspect: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    Grid(GridArgs),
    Regions(GridArgs),
    /// Components of the one-layer amplitude from the uniform start.
    Fxpath {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        x: Bitstring,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Hdprofile {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        x: Bitstring,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Gaussmodel {
        #[arg(long, requires = "cov", conflicts_with = "instance")]
        sigma_e: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        cov: Option<f64>,
        #[arg(long, requires_all = ["x", "beta"])]
        instance: Option<PathBuf>,
        #[arg(long)]
        x: Option<Bitstring>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local energy-distance covariance of conditional Monte Carlo samples.
    Condmc {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        x: Bitstring,
        #[arg(long)]
        s_circ: Bitstring,
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long, default_value_t = 256)]
        draws: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => write_stdout(text)?,
    }
    Ok(())
}

// A closed pipe (e.g. `| head`) is not an error.
fn write_stdout(text: &str) -> CliResult<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load(path: &Path) -> CliResult<Instance> {
    Ok(load_instance(path)?)
}

fn solve(cli: &Cli, inf: &InfParams, cmd: &SolveCmd) -> CliResult<()> {
    let (io, spec) = match cmd {
        SolveCmd::Sa { io, sweeps } => (io, SolverSpec::Sa {
            sweeps: *sweeps,
            seed: cli.seed,
        }),
        SolveCmd::Qjump { io, opts } => (io, SolverSpec::Qjump(opts.config(Backend::Statevector, cli.seed))),
        SolveCmd::Qaoa { io, q, circuit } => (io, SolverSpec::QaoaLs {
            q: *q,
            seed: cli.seed,
            tie: circuit.tie(),
            scaling: circuit.scaling(),
        }),
        SolveCmd::Cjump { io, opts, eta } => (
            io,
            SolverSpec::ClassicalJump(opts.config(Backend::ClassicalRandom { eta: *eta }, cli.seed)),
        ),
    };
    let inst = load(&io.instance)?;
    let ground = reference_ground(&inst, derive_seed(cli.seed, u64::MAX))?;
    let report = Bench::new(&inst, &ground, inf).run(&spec, io.runs)?;
    emit(io.out.as_deref(), &json(&report)?)?;
    if let Some(c) = &io.csv {
        emit(Some(c), &report.summary_csv())?;
    }
    Ok(())
}

fn generate(cli: &Cli, a: &GenerateArgs) -> CliResult<()> {
    fs::create_dir_all(&a.out)?;
    for i in 0..a.count {
        let seed = derive_seed(cli.seed, i as u64);
        let inst: Instance = match a.regular {
            Some(n) => random_regular_instance(n, a.degree, seed, a.lattice.sigma_j, a.lattice.sigma_h)?,
            None => generate_lattice_instance(&a.lattice.spec(), seed, a.lattice.sigma_j, a.lattice.sigma_h)?,
        };
        let mut meta = inst.meta.clone();
        meta.id = Some(format!("inst-{i:05}"));
        let inst = inst.with_meta(meta);
        save_instance(&inst, &a.out.join(format!("inst-{i:05}.json")))?;
    }
    Ok(())
}

fn filter(cli: &Cli, inf: &InfParams, a: &FilterArgs) -> CliResult<()> {
    let cjump = QjumpConfig {
        sampler: SamplerConfig {
            l: 2,
            q: 20,
            alpha: 0.0,
            m: a.cjump_m,
            backend: Backend::ClassicalRandom { eta: a.cjump_eta },
            mixer: MixerKind::default(),
            scaling: GammaScaling::default(),
        },
        iterations: a.cjump_iterations,
        seed: derive_seed(cli.seed, 1 << 32),
        initial: None,
        tie: TieBreak::default(),
    };
    let cfg = FilterConfig {
        count: a.count,
        lattice: a.lattice.spec(),
        sigma_j: a.lattice.sigma_j,
        sigma_h: a.lattice.sigma_h,
        sa_sweeps: a.sa_sweeps,
        sa_runs: a.sa_runs,
        keep_tts: a.keep_tts,
        keep_cjump: a.keep_cjump,
        cjump,
        cjump_runs: a.cjump_runs,
        seed: cli.seed,
    };
    let out = filter_instances(&cfg, inf)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("ranking.csv"), out.ranking_csv())?;
    for inst in &out.kept {
        let id = inst.meta.id.clone().unwrap_or_default();
        save_instance(inst, &a.out.join(format!("{id}.json")))?;
    }
    Ok(())
}

fn tts_cmd(a: &TtsArgs) -> CliResult<()> {
    let (t_r, p_s) = match (&a.run, a.t_r, a.p_s) {
        (Some(path), _, _) => {
            let r: BenchmarkRun = serde_json::from_str(&fs::read_to_string(path)?)?;
            (r.t_r_ns, r.p_s)
        }
        (None, Some(t), Some(p)) => (t, p),
        _ => return Err("give --run, or both --t-r and --p-s".into()),
    };
    let t = tts(t_r, p_s)?;
    #[derive(Serialize)]
    struct Out {
        t_r: f64,
        p_s: f64,
        tts: f64,
        infinite: bool,
    }
    write_stdout(&json(&Out {
        t_r,
        p_s,
        tts: t.value,
        infinite: t.infinite,
    })?)
}

fn compare(cli: &Cli, inf: &InfParams, a: &CompareArgs) -> CliResult<()> {
    let inst = load(&a.instance)?;
    let ground = reference_ground(&inst, derive_seed(cli.seed, u64::MAX))?;
    let bench = Bench::new(&inst, &ground, inf);
    let specs = [
        SolverSpec::Qjump(a.opts.config(Backend::Statevector, cli.seed)),
        SolverSpec::QaoaLs {
            q: a.qaoa_q,
            seed: cli.seed,
            tie: a.opts.circuit.tie(),
            scaling: a.opts.circuit.scaling(),
        },
        SolverSpec::Sa {
            sweeps: a.sa_sweeps,
            seed: cli.seed,
        },
    ];
    let outcomes = fixed_budget_comparison(&bench, &specs, a.budget_ms * 1e6, a.pilot, a.aspect)?;
    fs::create_dir_all(&a.out)?;
    let mut summary = String::from("# qjump compare v1\nalgorithm,t_r_ns,runs\n");
    for o in &outcomes {
        let name = o.algorithm.name().replace('+', "_");
        fs::write(a.out.join(format!("grid_{name}.csv")), o.grid.to_csv())?;
        fs::write(a.out.join(format!("regions_{name}.csv")), regions_csv(&o.region_counts))?;
        summary.push_str(&format!("{},{},{}\n", o.algorithm.name(), o.t_r_ns, o.runs));
    }
    fs::write(a.out.join("summary.csv"), summary)?;
    Ok(())
}

fn analyze(cli: &Cli, cmd: &AnalyzeCmd) -> CliResult<()> {
    match cmd {
        AnalyzeCmd::Grid(g) | AnalyzeCmd::Regions(g) => {
            let inst = load(&g.instance)?;
            let run: BenchmarkRun = serde_json::from_str(&fs::read_to_string(&g.run)?)?;
            let bests: Vec<Bitstring> = run.runs.iter().map(|r| r.best.clone()).collect();
            let grid = occurrence_grid(&inst, &bests, &run.ground, g.box_e, g.box_hd)?;
            let text = if matches!(cmd, AnalyzeCmd::Grid(_)) {
                grid.to_csv()
            } else {
                regions_csv(&square_region_sums(&grid.normalized(), inst.n(), g.aspect))
            };
            emit(g.out.as_deref(), &text)
        }
        AnalyzeCmd::Fxpath {
            instance,
            x,
            gamma,
            beta,
            out,
        } => {
            let inst = load(instance)?;
            emit(out.as_deref(), &fxpath_csv(&decompose_fx(&inst, x, *gamma, *beta)?))
        }
        AnalyzeCmd::Hdprofile { instance, x, beta, out } => {
            let inst = load(instance)?;
            emit(out.as_deref(), &hdprofile_csv(&hd_contribution_profile(&inst, x, *beta)?))
        }
        AnalyzeCmd::Gaussmodel {
            sigma_e,
            cov,
            instance,
            x,
            beta,
            out,
        } => {
            let model = match (sigma_e, cov, instance, x, beta) {
                (Some(s), Some(c), _, _, _) => GaussianModel::new(*s, *c)?,
                (_, _, Some(path), Some(x), Some(b)) => {
                    let inst = load(path)?;
                    GaussianModel::from_landscape(&energy_landscape(&inst)?, x, *b)?
                }
                _ => return Err("give --sigma-e and --cov, or --instance, --x and --beta".into()),
            };
            #[derive(Serialize)]
            struct Out {
                sigma_e: f64,
                cov: f64,
                gamma_star: f64,
                peak: f64,
            }
            emit(
                out.as_deref(),
                &json(&Out {
                    sigma_e: model.sigma_e,
                    cov: model.cov,
                    gamma_star: model.gamma_star(),
                    peak: model.peak(),
                })?,
            )
        }
        AnalyzeCmd::Condmc {
            instance,
            x,
            s_circ,
            alpha,
            beta,
            m,
            radius,
            draws,
            out,
        } => {
            let inst = load(instance)?;
            let theta = disagreement_angle(*alpha);
            let samples = conditional_mc_sample(x, s_circ, theta, *beta, *m, cli.seed)?;
            let rows = local_covariance(
                &inst,
                x,
                &samples,
                NeighborhoodOptions {
                    radius: *radius,
                    draws: *draws,
                    seed: derive_seed(cli.seed, 1),
                    ..Default::default()
                },
            )?;
            emit(out.as_deref(), &covariance_csv(&rows))
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    let inf = match &cli.params_file {
        Some(p) => InfParams::load(p)?,
        None => InfParams::bundled(),
    };
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Filter(a) => filter(cli, &inf, a),
        Command::Solve { solver } => solve(cli, &inf, solver),
        Command::Tts(a) => tts_cmd(a),
        Command::Compare(a) => compare(cli, &inf, a),
        Command::Analyze { what } => analyze(cli, what),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    if cli.timing {
        eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
