//! Dense statevector simulation of the sampling circuit.
//!
//! Basis index `i` holds bitstring `Bitstring::from_index(i, n)`, so qubit
//! `j` is bit `j` of the index.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ising::{Bitstring, IsingInstance};
use crate::landscape::energy_landscape_capped;
use crate::scalar::Real;

/// Largest `n` simulated as a dense statevector.
pub const STATEVECTOR_CAP: usize = 24;

// Below this many amplitudes the layers run single-threaded.
const PAR_BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    n: usize,
    amps: Vec<Complex<T>>,
}

/// Mixer applied after each cost layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixerKind {
    /// `exp(-i beta X)` on every qubit.
    Transverse,
    /// `exp(-i beta (sin(theta_j) X + cos(theta_j) Z))`, the transverse mixer
    /// rotated into the frame of the encoder angle of each qubit. Identical
    /// to `Transverse` at `alpha = 0`.
    #[default]
    WarmStartRotated,
}

/// Encoder angle for a bit of the reference solution.
pub fn encoder_angle(bit: u8, alpha: f64) -> f64 {
    let p = 0.5 + (bit as f64 - 0.5) * alpha;
    2.0 * p.clamp(0.0, 1.0).sqrt().asin()
}

/// Angle whose half-angle sine is the per-bit probability of disagreeing
/// with the reference solution.
pub fn disagreement_angle(alpha: f64) -> f64 {
    2.0 * (0.5 - 0.5 * alpha).clamp(0.0, 1.0).sqrt().asin()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    Ok(())
}

fn check_cap(n: usize) -> Result<()> {
    if n > STATEVECTOR_CAP {
        return Err(Error::TooLarge {
            what: "statevector simulation (use the conditional Monte Carlo model instead)",
            n,
            cap: STATEVECTOR_CAP,
        });
    }
    Ok(())
}

impl<T: Real> Statevector<T> {
    /// Computational basis state `|s>`.
    pub fn basis(s: &Bitstring) -> Result<Self> {
        check_cap(s.len())?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << s.len()];
        amps[s.to_index()] = Complex::new(T::one(), T::zero());
        Ok(Statevector { n: s.len(), amps })
    }

    /// Product state with qubit `j` in `Y(theta_j)|0>`.
    pub fn encode(s_circ: &Bitstring, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = s_circ.len();
        check_cap(n)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[0] = Complex::new(T::one(), T::zero());
        for j in 0..n {
            let half = encoder_angle(s_circ.get(j), alpha) / 2.0;
            let (c, s) = (T::lit(half.cos()), T::lit(half.sin()));
            let stride = 1 << j;
            for i in 0..stride {
                let a = amps[i];
                amps[i + stride] = a * s;
                amps[i] = a * c;
            }
        }
        Ok(Statevector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, s: &Bitstring) -> Complex<T> {
        self.amps[s.to_index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        // Sequential so the result does not depend on the thread count.
        self.amps.iter().map(|a| a.norm_sqr().as_f64()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.par_iter().map(|a| a.norm_sqr().as_f64()).collect()
    }

    /// Multiplies each amplitude by `exp(-i gamma E)` given the energy of
    /// every basis state.
    pub fn apply_phases(&mut self, energies: &[T], gamma: f64) -> Result<()> {
        if energies.len() != self.amps.len() {
            return Err(Error::LengthMismatch {
                expected: self.amps.len(),
                got: energies.len(),
            });
        }
        let g = T::lit(gamma);
        self.amps
            .par_iter_mut()
            .with_min_len(PAR_BLOCK)
            .zip(energies.par_iter().with_min_len(PAR_BLOCK))
            .for_each(|(a, &e)| {
                let phi = -g * e;
                *a = *a * Complex::new(phi.cos(), phi.sin());
            });
        Ok(())
    }

    /// Cost layer `exp(-i gamma H)`; computes the energy landscape.
    pub fn apply_cost(&mut self, inst: &IsingInstance<T>, gamma: f64) -> Result<()> {
        if inst.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: inst.n(),
            });
        }
        let energies = energy_landscape_capped(inst, STATEVECTOR_CAP)?;
        self.apply_phases(&energies, gamma)
    }

    /// Applies the 2x2 unitary `u` (row-major) to qubit `j`.
    pub fn apply_single(&mut self, j: usize, u: [[Complex<T>; 2]; 2]) {
        let stride = 1usize << j;
        let pair_block = stride << 1;
        let block = pair_block.max(PAR_BLOCK).min(self.amps.len());
        let kernel = |chunk: &mut [Complex<T>]| {
            for pair in chunk.chunks_mut(pair_block) {
                let (lo, hi) = pair.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = u[0][0] * x + u[0][1] * y;
                    *b = u[1][0] * x + u[1][1] * y;
                }
            }
        };
        if self.amps.len() > PAR_BLOCK {
            self.amps.par_chunks_mut(block).for_each(kernel);
        } else {
            kernel(&mut self.amps);
        }
    }

    /// `exp(-i beta X)` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let c = Complex::new(T::lit(beta.cos()), T::zero());
        let s = Complex::new(T::zero(), T::lit(-beta.sin()));
        for j in 0..self.n {
            self.apply_single(j, [[c, s], [s, c]]);
        }
    }

    /// `exp(-i beta (sin(theta_j) X + cos(theta_j) Z))` with the encoder
    /// angles of `s_circ`.
    pub fn apply_rotated_mixer(&mut self, beta: f64, s_circ: &Bitstring, alpha: f64) {
        let (cb, sb) = (beta.cos(), beta.sin());
        for j in 0..self.n {
            let th = encoder_angle(s_circ.get(j), alpha);
            let diag0 = Complex::new(T::lit(cb), T::lit(-sb * th.cos()));
            let diag1 = Complex::new(T::lit(cb), T::lit(sb * th.cos()));
            let off = Complex::new(T::zero(), T::lit(-sb * th.sin()));
            self.apply_single(j, [[diag0, off], [off, diag1]]);
        }
    }

    /// `m` independent measurements in the computational basis.
    pub fn sample(&self, m: usize, seed: u64) -> Vec<Bitstring> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_distribution(&self.probabilities(), self.n, m, &mut rng)
    }
}

/// Inverse-CDF draws from a (not necessarily normalised) distribution over
/// basis indices.
pub fn sample_distribution(
    probs: &[f64],
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Vec<Bitstring> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    (0..m)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            // First index whose cumulative mass exceeds u; skips zero-mass
            // entries.
            let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
            Bitstring::from_index(i, n)
        })
        .collect()
}

/// Encoder followed by `(gamma, beta)` cost/mixer layers, with the energy
/// landscape supplied by the caller.
pub fn run_circuit_with_landscape<T: Real>(
    energies: &[T],
    s_circ: &Bitstring,
    alpha: f64,
    layers: &[(f64, f64)],
    mixer: MixerKind,
) -> Result<Statevector<T>> {
    let mut state = Statevector::encode(s_circ, alpha)?;
    for &(gamma, beta) in layers {
        state.apply_phases(energies, gamma)?;
        match mixer {
            MixerKind::Transverse => state.apply_mixer(beta),
            MixerKind::WarmStartRotated => state.apply_rotated_mixer(beta, s_circ, alpha),
        }
    }
    Ok(state)
}

/// Encoder followed by `(gamma, beta)` cost/mixer layers.
pub fn run_circuit<T: Real>(
    inst: &IsingInstance<T>,
    s_circ: &Bitstring,
    alpha: f64,
    layers: &[(f64, f64)],
    mixer: MixerKind,
) -> Result<Statevector<T>> {
    check_cap(inst.n())?;
    if s_circ.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: s_circ.len(),
        });
    }
    let energies = if layers.is_empty() {
        Vec::new()
    } else {
        energy_landscape_capped(inst, STATEVECTOR_CAP)?
    };
    run_circuit_with_landscape(&energies, s_circ, alpha, layers, mixer)
}
