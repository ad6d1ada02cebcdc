//! Sampler front end: `[L, Q]` circuits simulated exactly, or independent
//! random bit flips as the classical counterpart.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ising::{Bitstring, IsingInstance};
use crate::landscape::energy_landscape_capped;
use crate::params::{build_schedule, GammaScaling, InfParams, ParamSchedule};
use crate::scalar::Real;
use crate::statevector::{
    run_circuit_with_landscape, sample_distribution, MixerKind, STATEVECTOR_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    Statevector,
    /// Flip each bit of the reference solution with probability `eta`.
    ClassicalRandom { eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub l: usize,
    pub q: usize,
    pub alpha: f64,
    pub m: usize,
    pub backend: Backend,
    #[serde(default)]
    pub mixer: MixerKind,
    #[serde(default)]
    pub scaling: GammaScaling,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l > self.q {
            return Err(invalid(
                "L",
                format!("need 1 <= L <= Q, got L = {}, Q = {}", self.l, self.q),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", format!("{} outside [0, 1]", self.alpha)));
        }
        if self.m == 0 {
            return Err(invalid("M", "need at least one sample"));
        }
        if let Backend::ClassicalRandom { eta } = self.backend {
            check_eta(eta)?;
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("{eta} outside [0, 1]")));
    }
    Ok(())
}

/// Flips each bit of `s_circ` independently with probability `eta`.
pub fn classical_random_sample_with(
    s_circ: &Bitstring,
    eta: f64,
    m: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Bitstring>> {
    check_eta(eta)?;
    Ok((0..m)
        .map(|_| {
            let mut s = s_circ.clone();
            for j in 0..s.len() {
                if rng.random::<f64>() < eta {
                    s.flip(j);
                }
            }
            s
        })
        .collect())
}

pub fn classical_random_sample(
    s_circ: &Bitstring,
    eta: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<Bitstring>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    classical_random_sample_with(s_circ, eta, m, &mut rng)
}

/// Prepared sampler for one instance. The statevector backend caches the
/// energy landscape and the transferred angles.
pub struct Sampler<'a, T> {
    inst: &'a IsingInstance<T>,
    config: SamplerConfig,
    schedule: Option<ParamSchedule>,
    energies: Vec<T>,
    // At alpha = 0 the output does not depend on the reference solution.
    uniform_start: OnceLock<Vec<f64>>,
}

impl<'a, T: Real> Sampler<'a, T> {
    pub fn new(inst: &'a IsingInstance<T>, inf: &InfParams, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let (schedule, energies) = match config.backend {
            Backend::Statevector => {
                if inst.n() > STATEVECTOR_CAP {
                    return Err(Error::TooLarge {
                        what: "statevector simulation (use the conditional Monte Carlo model instead)",
                        n: inst.n(),
                        cap: STATEVECTOR_CAP,
                    });
                }
                let schedule = build_schedule(inf, inst, config.l, config.q, config.scaling)?;
                (Some(schedule), energy_landscape_capped(inst, STATEVECTOR_CAP)?)
            }
            Backend::ClassicalRandom { .. } => (None, Vec::new()),
        };
        Ok(Sampler {
            inst,
            config,
            schedule,
            energies,
            uniform_start: OnceLock::new(),
        })
    }

    /// Statevector sampler with explicit circuit angles instead of a
    /// transferred schedule.
    pub fn with_layers(
        inst: &'a IsingInstance<T>,
        config: SamplerConfig,
        layers: &[(f64, f64)],
    ) -> Result<Self> {
        config.validate()?;
        let gammas = layers.iter().map(|l| l.0).collect();
        // Stored as tabulated angles; `circuit_layers` negates beta back.
        let betas = layers.iter().map(|l| -l.1).collect();
        let schedule = ParamSchedule::explicit(gammas, betas)?;
        Ok(Sampler {
            inst,
            config: SamplerConfig {
                backend: Backend::Statevector,
                ..config
            },
            schedule: Some(schedule),
            energies: energy_landscape_capped(inst, STATEVECTOR_CAP)?,
            uniform_start: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn instance(&self) -> &IsingInstance<T> {
        self.inst
    }

    pub fn schedule(&self) -> Option<&ParamSchedule> {
        self.schedule.as_ref()
    }

    /// Cached energy of every basis state (statevector backend only).
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Exact output distribution of the circuit warm-started at `s_circ`.
    pub fn distribution(&self, s_circ: &Bitstring, alpha: f64) -> Result<Vec<f64>> {
        let schedule = self.schedule.as_ref().ok_or_else(|| {
            invalid("backend", "output distribution needs the statevector backend")
        })?;
        if s_circ.len() != self.inst.n() {
            return Err(Error::LengthMismatch {
                expected: self.inst.n(),
                got: s_circ.len(),
            });
        }
        let run = || -> Result<Vec<f64>> {
            let state = run_circuit_with_landscape(
                &self.energies,
                s_circ,
                alpha,
                &schedule.circuit_layers(),
                self.config.mixer,
            )?;
            Ok(state.probabilities())
        };
        if alpha == 0.0 {
            if let Some(p) = self.uniform_start.get() {
                return Ok(p.clone());
            }
            let p = run()?;
            return Ok(self.uniform_start.get_or_init(|| p).clone());
        }
        run()
    }

    /// `config.m` samples around `s_circ`.
    pub fn draw(&self, s_circ: &Bitstring, alpha: f64, rng: &mut impl Rng) -> Result<Vec<Bitstring>> {
        match self.config.backend {
            Backend::Statevector => {
                let probs = self.distribution(s_circ, alpha)?;
                Ok(sample_distribution(&probs, self.inst.n(), self.config.m, rng))
            }
            Backend::ClassicalRandom { eta } => {
                classical_random_sample_with(s_circ, eta, self.config.m, rng)
            }
        }
    }
}

/// Expected fraction of bits differing from `s_circ` under `probs`.
pub fn mean_flip_ratio(probs: &[f64], s_circ: &Bitstring) -> f64 {
    let n = s_circ.len();
    if n == 0 {
        return 0.0;
    }
    let o = s_circ.to_index();
    let total: f64 = probs.iter().sum();
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * (i ^ o).count_ones() as f64)
        .sum::<f64>()
        / (total * n as f64)
}

/// Exact distribution of the classical random flip sampler.
pub fn classical_distribution(s_circ: &Bitstring, eta: f64) -> Result<Vec<f64>> {
    check_eta(eta)?;
    let n = s_circ.len();
    if n > STATEVECTOR_CAP {
        return Err(Error::TooLarge {
            what: "classical flip distribution",
            n,
            cap: STATEVECTOR_CAP,
        });
    }
    let weights: Vec<f64> = (0..=n)
        .map(|d| eta.powi(d as i32) * (1.0 - eta).powi((n - d) as i32))
        .collect();
    let o = s_circ.to_index();
    Ok((0..1usize << n)
        .map(|i| weights[(i ^ o).count_ones() as usize])
        .collect())
}
