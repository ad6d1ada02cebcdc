//! Benchmarks of the four solvers, instance filtering and fixed-budget
//! comparisons. All times here are modelled hardware times in nanoseconds.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{occurrence_grid, square_region_sums, OccurrenceGrid};
use crate::anneal::{run_sa_restarts, sa_time_model, SaConfig, SaTimeConstants};
use crate::cost_model::{reference_timing, CostModel, Overlap, QuantumTiming, RunStats};
use crate::error::{invalid, Result};
use crate::ising::{Bitstring, IsingInstance, InstanceMeta};
use crate::landscape::{brute_force_ground, GroundState};
use crate::lattice::{generate_lattice_instance, LatticeSpec};
use crate::local_search::TieBreak;
use crate::params::{GammaScaling, InfParams};
use crate::qjump::{run_qjump_repeated, tts, QjumpConfig, QjumpTrace, Tts};
use crate::sampler::{Backend, Sampler, SamplerConfig};
use crate::seed::derive_seed;
use crate::statevector::MixerKind;

/// Largest `n` whose ground state is found by enumeration here.
pub const EXACT_GROUND_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Qjump,
    Sa,
    #[serde(rename = "qaoa+ls")]
    QaoaLs,
    ClassicalJump,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qjump => "qjump",
            Algorithm::Sa => "sa",
            Algorithm::QaoaLs => "qaoa+ls",
            Algorithm::ClassicalJump => "classical-jump",
        }
    }
}

/// Solver and its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum SolverSpec {
    Qjump(QjumpConfig),
    /// Qjump loop with the classical random-flip sampler.
    ClassicalJump(QjumpConfig),
    /// One `Q`-layer circuit sample per run followed by local search.
    #[serde(rename = "qaoa+ls")]
    QaoaLs {
        q: usize,
        seed: u64,
        #[serde(default)]
        tie: TieBreak,
        #[serde(default)]
        scaling: GammaScaling,
    },
    Sa { sweeps: usize, seed: u64 },
}

impl SolverSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SolverSpec::Qjump(_) => Algorithm::Qjump,
            SolverSpec::ClassicalJump(_) => Algorithm::ClassicalJump,
            SolverSpec::QaoaLs { .. } => Algorithm::QaoaLs,
            SolverSpec::Sa { .. } => Algorithm::Sa,
        }
    }

    /// The equivalent single-iteration Qjump configuration of a QAOA run.
    pub fn qaoa_as_qjump(q: usize, seed: u64, tie: TieBreak, scaling: GammaScaling) -> QjumpConfig {
        QjumpConfig {
            sampler: SamplerConfig {
                l: q,
                q,
                alpha: 0.0,
                m: 1,
                backend: Backend::Statevector,
                mixer: MixerKind::default(),
                scaling,
            },
            iterations: 1,
            seed,
            initial: None,
            tie,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best: Bitstring,
    pub e_best: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub instance: String,
    pub algorithm: Algorithm,
    pub spec: SolverSpec,
    pub ground: GroundState,
    pub runs: Vec<RunResult>,
    pub p_s: f64,
    /// Modelled time per run.
    pub t_r_ns: f64,
    pub tts_ns: Tts,
    /// Mean flip ratio and descent steps (Qjump-style solvers) or SA
    /// acceptance in `eta`.
    pub stats: RunStats,
}

impl BenchmarkRun {
    /// One line per run: index, energy, hit flag, bitstring.
    pub fn runs_csv(&self) -> String {
        let mut s = String::from("# qjump runs v1\nrun,e_best,hit,best\n");
        for (i, r) in self.runs.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{},{}", r.e_best, r.hit as u8, r.best);
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "# qjump summary v1\ninstance,algorithm,runs,p_s,t_r_ns,tts_ns,tts_infinite\n{},{},{},{},{},{},{}\n",
            self.instance,
            self.algorithm.name(),
            self.runs.len(),
            self.p_s,
            self.t_r_ns,
            self.tts_ns.value,
            self.tts_ns.infinite as u8
        )
    }
}

/// Exact ground state when enumeration is affordable, otherwise the best of
/// a large annealing ensemble marked uncertified.
pub fn reference_ground(inst: &IsingInstance<f64>, seed: u64) -> Result<GroundState> {
    if inst.n() <= EXACT_GROUND_CAP {
        return brute_force_ground(inst);
    }
    let cfg = SaConfig::auto(inst, 5000, seed)?;
    let results = run_sa_restarts(inst, &cfg, 256, false)?;
    let e = results.iter().map(|r| r.e_best).fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<Bitstring> = results
        .iter()
        .filter(|r| (r.e_best - e).abs() <= 1e-9)
        .map(|r| r.best.clone())
        .collect();
    minimizers.sort();
    minimizers.dedup();
    Ok(GroundState {
        energy: e,
        minimizers,
        certified: false,
    })
}

/// Cost model with the reference constants of the closest tabulated size.
pub fn nearest_cost_model(n: usize) -> CostModel {
    let size = [60usize, 84, 104]
        .into_iter()
        .min_by_key(|s| s.abs_diff(n))
        .expect("non-empty");
    CostModel {
        quantum: QuantumTiming::default(),
        classical: reference_timing(size).expect("tabulated"),
    }
}

/// Shared context of a benchmark on one instance.
pub struct Bench<'a> {
    pub inst: &'a IsingInstance<f64>,
    pub ground: &'a GroundState,
    pub inf: &'a InfParams,
    pub cost: CostModel,
    pub sa_time: SaTimeConstants,
}

impl<'a> Bench<'a> {
    pub fn new(inst: &'a IsingInstance<f64>, ground: &'a GroundState, inf: &'a InfParams) -> Self {
        Bench {
            inst,
            ground,
            inf,
            cost: nearest_cost_model(inst.n()),
            sa_time: SaTimeConstants::default(),
        }
    }

    fn id(&self) -> String {
        self.inst.meta.id.clone().unwrap_or_else(|| "instance".into())
    }

    fn finish(&self, spec: &SolverSpec, runs: Vec<RunResult>, t_r_ns: f64, stats: RunStats) -> Result<BenchmarkRun> {
        let p_s = if runs.is_empty() {
            0.0
        } else {
            runs.iter().filter(|r| r.hit).count() as f64 / runs.len() as f64
        };
        Ok(BenchmarkRun {
            instance: self.id(),
            algorithm: spec.algorithm(),
            spec: spec.clone(),
            ground: self.ground.clone(),
            runs,
            p_s,
            t_r_ns,
            tts_ns: tts(t_r_ns, p_s)?,
            stats,
        })
    }

    fn from_traces(&self, traces: &[QjumpTrace]) -> Vec<RunResult> {
        traces
            .iter()
            .map(|t| RunResult {
                best: t.best.clone(),
                e_best: t.e_best,
                hit: self.ground.is_hit(t.e_best),
            })
            .collect()
    }

    /// `runs` independent runs of `spec`.
    pub fn run(&self, spec: &SolverSpec, runs: usize) -> Result<BenchmarkRun> {
        let n = self.inst.n();
        match spec {
            SolverSpec::Qjump(cfg) | SolverSpec::ClassicalJump(cfg) => {
                let sampler = Sampler::new(self.inst, self.inf, cfg.sampler.clone())?;
                let traces = run_qjump_repeated(&sampler, cfg, runs)?;
                let stats = RunStats::from_traces(&traces);
                let t_r = self.cost.qjump_run_ns(
                    cfg.sampler.l,
                    cfg.sampler.m,
                    cfg.iterations,
                    n,
                    stats,
                    Overlap::Pipelined,
                );
                self.finish(spec, self.from_traces(&traces), t_r, stats)
            }
            SolverSpec::QaoaLs { q, seed, tie, scaling } => {
                let cfg = SolverSpec::qaoa_as_qjump(*q, *seed, *tie, *scaling);
                let sampler = Sampler::new(self.inst, self.inf, cfg.sampler.clone())?;
                let traces = run_qjump_repeated(&sampler, &cfg, runs)?;
                let stats = RunStats::from_traces(&traces);
                let t_r = self.cost.qaoa_run_ns(*q, n, stats);
                self.finish(spec, self.from_traces(&traces), t_r, stats)
            }
            SolverSpec::Sa { sweeps, seed } => {
                let cfg = SaConfig::auto(self.inst, *sweeps, *seed)?;
                let results = run_sa_restarts(self.inst, &cfg, runs, false)?;
                let acc = if results.is_empty() {
                    0.0
                } else {
                    results.iter().map(|r| r.stats.acceptance()).sum::<f64>() / results.len() as f64
                };
                let t_r = sa_time_model(n, *sweeps, acc, self.sa_time)?;
                let out = results
                    .into_iter()
                    .map(|r| RunResult {
                        hit: self.ground.is_hit(r.e_best),
                        best: r.best,
                        e_best: r.e_best,
                    })
                    .collect();
                self.finish(spec, out, t_r, RunStats { eta: acc, n_ls: 0.0 })
            }
        }
    }
}

/// Per-algorithm outcome of a fixed-budget comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetOutcome {
    pub algorithm: Algorithm,
    pub t_r_ns: f64,
    pub runs: usize,
    /// Unnormalised counts of the final solutions.
    pub grid: OccurrenceGrid,
    /// Solution counts inside the square regions `0..=n`.
    pub region_counts: Vec<(usize, f64)>,
}

/// Runs every solver as many times as fits in `budget_ns`. The run time of
/// each solver is estimated from `pilot` runs first; those runs are the
/// prefix of the full set.
pub fn fixed_budget_comparison(
    bench: &Bench<'_>,
    specs: &[SolverSpec],
    budget_ns: f64,
    pilot: usize,
    aspect: f64,
) -> Result<Vec<BudgetOutcome>> {
    specs
        .iter()
        .map(|spec| {
            let probe = bench.run(spec, pilot.max(1))?;
            let runs = crate::cost_model::runs_in_budget(budget_ns, probe.t_r_ns)?;
            if runs == 0 {
                eprintln!(
                    "warning: budget {budget_ns} ns is below one {} run ({} ns)",
                    spec.algorithm().name(),
                    probe.t_r_ns
                );
            }
            let full = bench.run(spec, runs)?;
            let bests: Vec<Bitstring> = full.runs.iter().map(|r| r.best.clone()).collect();
            let grid = occurrence_grid(bench.inst, &bests, bench.ground, 0.01, 2.0)?;
            let region_counts = square_region_sums(&grid, bench.inst.n(), aspect);
            Ok(BudgetOutcome {
                algorithm: spec.algorithm(),
                t_r_ns: probe.t_r_ns,
                runs,
                grid,
                region_counts,
            })
        })
        .collect()
}

/// Settings of the two-stage hardness filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub count: usize,
    pub lattice: LatticeSpec,
    pub sigma_j: f64,
    pub sigma_h: f64,
    pub sa_sweeps: usize,
    pub sa_runs: usize,
    pub keep_tts: usize,
    pub keep_cjump: usize,
    /// Classical-jump configuration used for the second ranking.
    pub cjump: QjumpConfig,
    pub cjump_runs: usize,
    pub seed: u64,
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.count >= self.keep_tts && self.keep_tts >= self.keep_cjump && self.keep_cjump >= 1) {
            return Err(invalid(
                "keep",
                format!(
                    "need count >= keep_tts >= keep_cjump >= 1, got {} >= {} >= {}",
                    self.count, self.keep_tts, self.keep_cjump
                ),
            ));
        }
        if !matches!(self.cjump.sampler.backend, Backend::ClassicalRandom { .. }) {
            return Err(invalid("cjump", "second stage needs the classical random backend"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEntry {
    pub id: String,
    pub seed: u64,
    pub ground_energy: f64,
    pub certified: bool,
    pub sa_p_s: f64,
    pub sa_tts_ns: f64,
    pub stage1_rank: usize,
    pub cjump_p_s: Option<f64>,
    pub stage2_rank: Option<usize>,
    pub kept: bool,
}

pub struct FilterOutcome {
    /// Every generated instance in stage-1 rank order.
    pub entries: Vec<FilterEntry>,
    /// Kept instances, hardest first.
    pub kept: Vec<IsingInstance<f64>>,
}

impl FilterOutcome {
    pub fn ranking_csv(&self) -> String {
        let mut s = String::from(
            "# qjump ranking v1\nid,seed,ground_energy,certified,sa_p_s,sa_tts_ns,stage1_rank,cjump_p_s,stage2_rank,kept\n",
        );
        for e in &self.entries {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                e.id,
                e.seed,
                e.ground_energy,
                e.certified as u8,
                e.sa_p_s,
                e.sa_tts_ns,
                e.stage1_rank,
                opt(e.cjump_p_s.map(|v| v.to_string())),
                opt(e.stage2_rank.map(|v| v.to_string())),
                e.kept as u8
            );
        }
        s
    }
}

/// Generates `count` lattice instances, keeps the `keep_tts` with the
/// largest annealing time-to-solution, then the `keep_cjump` of those with
/// the lowest classical-jump success probability.
pub fn filter_instances(cfg: &FilterConfig, inf: &InfParams) -> Result<FilterOutcome> {
    cfg.validate()?;
    let generated = (0..cfg.count)
        .into_par_iter()
        .map(|i| -> Result<(IsingInstance<f64>, GroundState, BenchmarkRun)> {
            let seed = derive_seed(cfg.seed, i as u64);
            let inst = generate_lattice_instance::<f64>(&cfg.lattice, seed, cfg.sigma_j, cfg.sigma_h)?;
            let meta = InstanceMeta {
                id: Some(format!("inst-{i:05}")),
                ..inst.meta.clone()
            };
            let inst = inst.with_meta(meta);
            let ground = reference_ground(&inst, seed)?;
            let sa = Bench::new(&inst, &ground, inf).run(
                &SolverSpec::Sa {
                    sweeps: cfg.sa_sweeps,
                    seed,
                },
                cfg.sa_runs,
            )?;
            Ok((inst, ground, sa))
        })
        .collect::<Result<Vec<_>>>()?;

    // Hardest first; an infinite TTS outranks every finite one.
    let mut order: Vec<usize> = (0..generated.len()).collect();
    order.sort_by(|&a, &b| {
        let ta = generated[a].2.tts_ns.value;
        let tb = generated[b].2.tts_ns.value;
        tb.total_cmp(&ta).then(a.cmp(&b))
    });
    let stage1: Vec<usize> = order.iter().copied().take(cfg.keep_tts).collect();

    let cj: Vec<f64> = stage1
        .par_iter()
        .map(|&i| {
            let (inst, ground, _) = &generated[i];
            let spec = SolverSpec::ClassicalJump(QjumpConfig {
                seed: derive_seed(cfg.cjump.seed, i as u64),
                ..cfg.cjump.clone()
            });
            Bench::new(inst, ground, inf).run(&spec, cfg.cjump_runs).map(|r| r.p_s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order2: Vec<usize> = (0..stage1.len()).collect();
    order2.sort_by(|&a, &b| cj[a].total_cmp(&cj[b]).then(a.cmp(&b)));

    let mut entries: Vec<FilterEntry> = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let (inst, ground, sa) = &generated[i];
            FilterEntry {
                id: inst.meta.id.clone().unwrap_or_default(),
                seed: inst.meta.seed.unwrap_or_default(),
                ground_energy: ground.energy,
                certified: ground.certified,
                sa_p_s: sa.p_s,
                sa_tts_ns: sa.tts_ns.value,
                stage1_rank: rank,
                cjump_p_s: None,
                stage2_rank: None,
                kept: false,
            }
        })
        .collect();
    let mut kept = Vec::with_capacity(cfg.keep_cjump);
    for (rank2, &k) in order2.iter().enumerate() {
        let e = &mut entries[k];
        e.cjump_p_s = Some(cj[k]);
        e.stage2_rank = Some(rank2);
        if rank2 < cfg.keep_cjump {
            e.kept = true;
            kept.push(generated[stage1[k]].0.clone());
        }
    }
    Ok(FilterOutcome { entries, kept })
}
