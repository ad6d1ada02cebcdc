//! The hybrid loop: sample around the incumbent, descend every sample, keep
//! the best, repeat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ising::{hamming, Bitstring};
use crate::landscape::GroundState;
use crate::local_search::{greedy_descent, TieBreak};
use crate::sampler::{Backend, Sampler, SamplerConfig};
use crate::scalar::Real;
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QjumpConfig {
    pub sampler: SamplerConfig,
    pub iterations: usize,
    pub seed: u64,
    /// Reference solution for the first iteration. Without it the classical
    /// backend starts from uniformly random bitstrings.
    #[serde(default)]
    pub initial: Option<Bitstring>,
    #[serde(default)]
    pub tie: TieBreak,
}

impl QjumpConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if self.iterations == 0 {
            return Err(invalid("iterations", "need at least one iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub alpha: f64,
    /// Encoder input of this iteration.
    pub s_circ: Bitstring,
    /// Best solution after this iteration, incumbent included.
    pub best: Bitstring,
    pub e_best: f64,
    /// Descent steps per sample.
    pub n_ls: Vec<usize>,
    /// Hamming distance of each raw sample from `s_circ`.
    pub flips: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QjumpTrace {
    pub iterations: Vec<IterationRecord>,
    pub best: Bitstring,
    pub e_best: f64,
}

impl QjumpTrace {
    /// Mean descent steps over all samples.
    pub fn mean_n_ls(&self) -> f64 {
        mean(self.iterations.iter().flat_map(|r| r.n_ls.iter().copied()))
    }

    /// Mean fraction of bits a sample differs from its encoder input.
    pub fn mean_flip_ratio(&self) -> f64 {
        let n = self.best.len().max(1) as f64;
        mean(self.iterations.iter().flat_map(|r| r.flips.iter().copied())) / n
    }
}

fn mean(it: impl Iterator<Item = usize>) -> f64 {
    let (s, c) = it.fold((0usize, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s as f64 / c as f64
    }
}

fn uniform_samples(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Bitstring> {
    (0..m)
        .map(|_| Bitstring::from_bits((0..n).map(|_| rng.random_range(0..2u8)).collect()).expect("binary"))
        .collect()
}

/// One Qjump run. The first iteration samples the `alpha = 0` circuit; each
/// later one warm-starts from the best solution so far.
pub fn run_qjump<T: Real>(sampler: &Sampler<'_, T>, config: &QjumpConfig) -> Result<QjumpTrace> {
    config.validate()?;
    let inst = sampler.instance();
    let n = inst.n();
    let m = sampler.config().m;
    if let Some(s) = &config.initial {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: s.len(),
            });
        }
    }
    let mut incumbent: Option<(Bitstring, T)> = None;
    let mut records = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, it as u64));
        let (s_circ, alpha) = match &incumbent {
            Some((s, _)) => (s.clone(), config.sampler.alpha),
            None => (
                config.initial.clone().unwrap_or_else(|| Bitstring::zeros(n)),
                0.0,
            ),
        };
        let samples = match (incumbent.is_none(), config.initial.is_none(), config.sampler.backend) {
            (true, true, Backend::ClassicalRandom { .. }) => uniform_samples(n, m, &mut rng),
            _ => sampler.draw(&s_circ, alpha, &mut rng)?,
        };
        let table = inst.delta_table(&s_circ)?;
        let results = samples
            .par_iter()
            .map(|x| greedy_descent(inst, &s_circ, &table, x, config.tie))
            .collect::<Result<Vec<_>>>()?;

        let mut n_ls = Vec::with_capacity(m);
        let mut flips = Vec::with_capacity(m);
        for (x, r) in samples.iter().zip(results) {
            n_ls.push(r.n_ls);
            flips.push(hamming(x, &s_circ)?);
            let better = match &incumbent {
                Some((_, e)) => r.e_star < *e,
                None => true,
            };
            if better {
                incumbent = Some((r.s_star, r.e_star));
            }
        }
        let (best, e_best) = incumbent.clone().expect("at least one sample");
        records.push(IterationRecord {
            alpha,
            s_circ,
            best,
            e_best: e_best.as_f64(),
            n_ls,
            flips,
        });
    }
    let (best, e_best) = incumbent.expect("at least one iteration");
    Ok(QjumpTrace {
        iterations: records,
        best,
        e_best: e_best.as_f64(),
    })
}

/// Independent runs with seeds derived from `config.seed`, in parallel.
pub fn run_qjump_repeated<T: Real>(
    sampler: &Sampler<'_, T>,
    config: &QjumpConfig,
    runs: usize,
) -> Result<Vec<QjumpTrace>> {
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = QjumpConfig {
                seed: derive_seed(config.seed ^ 0x9e37_79b9_7f4a_7c15, r as u64),
                ..config.clone()
            };
            run_qjump(sampler, &cfg)
        })
        .collect()
}

/// Fraction of runs whose best energy hits the ground state.
pub fn success_probability(e_best: &[f64], ground: &GroundState) -> f64 {
    if e_best.is_empty() {
        return 0.0;
    }
    e_best.iter().filter(|&&e| ground.is_hit(e)).count() as f64 / e_best.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tts {
    pub value: f64,
    /// Set when no run succeeded; `value` is then infinite.
    pub infinite: bool,
}

/// Time to reach the target with 99% confidence from per-run time `t_r`
/// and per-run success probability `p_s`.
pub fn tts(t_r: f64, p_s: f64) -> Result<Tts> {
    if !(0.0..=1.0).contains(&p_s) {
        return Err(invalid("p_s", format!("{p_s} outside [0, 1]")));
    }
    if !(t_r >= 0.0) || !t_r.is_finite() {
        return Err(invalid("t_r", format!("{t_r} is not a finite non-negative time")));
    }
    if p_s == 0.0 {
        return Ok(Tts {
            value: f64::INFINITY,
            infinite: true,
        });
    }
    let value = if p_s >= 0.99 {
        t_r
    } else {
        t_r * 0.01f64.ln() / (-p_s).ln_1p()
    };
    Ok(Tts {
        value,
        infinite: false,
    })
}
