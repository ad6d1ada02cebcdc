//! Runtime estimates for a Qjump run on envisioned hardware: a quantum
//! stream of circuit blocks overlapped with a classical local-search stream.
//! All times are in nanoseconds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qjump::{QjumpConfig, QjumpTrace};

/// Timings of one circuit execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumTiming {
    pub reset_ns: f64,
    pub layer_ns: f64,
    pub measure_ns: f64,
    pub feedback_ns: f64,
    /// Layers before the first cost layer (encoder).
    pub prep_layers: usize,
    /// Layers per cost plus mixer round on the lattice.
    pub layers_per_round: usize,
}

impl Default for QuantumTiming {
    fn default() -> Self {
        QuantumTiming {
            reset_ns: 200.0,
            layer_ns: 40.0,
            measure_ns: 500.0,
            feedback_ns: 500.0,
            prep_layers: 1,
            layers_per_round: 16,
        }
    }
}

/// Measured classical kernel costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTiming {
    /// Flip a bit and update the flip-energy list.
    pub t_sf: f64,
    /// Find the minimum of the flip-energy list.
    pub t_ml: f64,
    /// Pick the best solution of an iteration and hand it back.
    pub t_po: f64,
}

/// Reference constants for the three benchmark sizes (60, 84, 104).
pub fn reference_timing(n: usize) -> Option<ClassicalTiming> {
    let (t_sf, t_ml, t_po) = match n {
        60 => (25.3, 87.7, 1378.8),
        84 => (27.8, 107.6, 1260.6),
        104 => (28.6, 128.2, 1249.2),
        _ => return None,
    };
    Some(ClassicalTiming { t_sf, t_ml, t_po })
}

/// Coarse classical block: one energy evaluation plus a number of descent
/// steps at a flat cost each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTiming {
    pub energy_ns: f64,
    pub step_ns: f64,
}

impl Default for BlockTiming {
    fn default() -> Self {
        BlockTiming {
            energy_ns: 500.0,
            step_ns: 160.0,
        }
    }
}

impl BlockTiming {
    pub fn classical_block_ns(&self, steps: f64) -> f64 {
        self.energy_ns + steps * self.step_ns
    }
}

/// How the quantum and classical streams share time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overlap {
    /// Circuit `k + 1` runs while sample `k` is searched.
    #[default]
    Pipelined,
    /// Each sample waits for the previous search. Upper bound.
    Serial,
}

/// Per-sample statistics that drive the classical cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Mean fraction of bits replayed from the reference solution.
    pub eta: f64,
    /// Mean descent steps.
    pub n_ls: f64,
}

impl RunStats {
    pub fn from_traces(traces: &[QjumpTrace]) -> Self {
        let k = traces.len().max(1) as f64;
        RunStats {
            eta: traces.iter().map(|t| t.mean_flip_ratio()).sum::<f64>() / k,
            n_ls: traces.iter().map(|t| t.mean_n_ls()).sum::<f64>() / k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub quantum: QuantumTiming,
    pub classical: ClassicalTiming,
}

impl CostModel {
    /// Default quantum timings with the reference classical constants.
    pub fn for_size(n: usize) -> Result<Self> {
        let classical = reference_timing(n).ok_or_else(|| {
            invalid(
                "n",
                format!("no reference classical timings for n = {n} (have 60, 84, 104)"),
            )
        })?;
        Ok(CostModel {
            quantum: QuantumTiming::default(),
            classical,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.quantum;
        let c = &self.classical;
        for (name, v) in [
            ("reset_ns", q.reset_ns),
            ("layer_ns", q.layer_ns),
            ("measure_ns", q.measure_ns),
            ("feedback_ns", q.feedback_ns),
            ("t_sf", c.t_sf),
            ("t_ml", c.t_ml),
            ("t_po", c.t_po),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} is not a positive time")));
            }
        }
        Ok(())
    }

    /// Circuit depth of an `L`-round sampler.
    pub fn circuit_depth(&self, l: usize) -> usize {
        self.quantum.prep_layers + self.quantum.layers_per_round * l
    }

    pub fn quantum_block_ns(&self, depth: usize) -> f64 {
        let q = &self.quantum;
        q.reset_ns + depth as f64 * q.layer_ns + q.measure_ns + q.feedback_ns
    }

    /// Local search on one sample: replay `eta * n` flips, then `n_ls`
    /// steepest steps.
    pub fn local_search_ns(&self, n: usize, stats: RunStats) -> f64 {
        let c = &self.classical;
        stats.eta * n as f64 * c.t_sf + stats.n_ls * (c.t_ml + c.t_sf)
    }

    /// One iteration of `m` samples.
    pub fn iteration_ns(&self, l: usize, m: usize, n: usize, stats: RunStats, overlap: Overlap) -> f64 {
        let t_q = self.quantum_block_ns(self.circuit_depth(l));
        let t_c = self.local_search_ns(n, stats);
        let m = m as f64;
        match overlap {
            Overlap::Pipelined => t_q + m * t_q.max(t_c) + self.classical.t_po,
            Overlap::Serial => m * (t_q + t_c) + self.classical.t_po,
        }
    }

    /// One full Qjump run.
    pub fn qjump_run_ns(
        &self,
        l: usize,
        m: usize,
        iterations: usize,
        n: usize,
        stats: RunStats,
        overlap: Overlap,
    ) -> f64 {
        iterations as f64 * self.iteration_ns(l, m, n, stats, overlap)
    }

    /// One QAOA shot at depth `q` with local search overlapped.
    pub fn qaoa_run_ns(&self, q: usize, n: usize, stats: RunStats) -> f64 {
        let t_q = self.quantum_block_ns(self.circuit_depth(q));
        t_q.max(self.local_search_ns(n, stats))
    }
}

/// Per-run time of a Qjump configuration.
pub fn estimate_runtime(
    config: &QjumpConfig,
    model: &CostModel,
    n: usize,
    stats: RunStats,
    overlap: Overlap,
) -> Result<f64> {
    config.validate()?;
    model.validate()?;
    Ok(model.qjump_run_ns(
        config.sampler.l,
        config.sampler.m,
        config.iterations,
        n,
        stats,
        overlap,
    ))
}

/// Whole runs that fit in `budget_ns`.
pub fn runs_in_budget(budget_ns: f64, run_ns: f64) -> Result<usize> {
    if !(run_ns > 0.0) {
        return Err(invalid("run time", format!("{run_ns} is not positive")));
    }
    if !(budget_ns >= 0.0) {
        return Err(invalid("budget", format!("{budget_ns} is negative")));
    }
    // Tolerate rounding when the budget is an exact multiple.
    Ok((budget_ns / run_ns * (1.0 + 1e-12)).floor() as usize)
}
