//! Closed-form single-layer amplitudes evaluated by exhaustive sums over
//! the `2^n` configurations, plus the per-configuration decomposition of the
//! uniform-start amplitude.
//!
//! All sums use circuit angles: cost `exp(-i gamma E)` and transverse mixer
//! `exp(-i beta X)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Bitstring, IsingInstance};
use crate::landscape::energy_landscape_capped;
use crate::scalar::Real;

/// Largest `n` for the exhaustive closed-form sums.
pub const EXHAUSTIVE_CAP: usize = 20;

fn landscape<T: Real>(inst: &IsingInstance<T>) -> Result<Vec<f64>> {
    if inst.n() > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge {
            what: "exhaustive amplitude sum",
            n: inst.n(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    Ok(energy_landscape_capped(inst, EXHAUSTIVE_CAP)?
        .into_iter()
        .map(|e| e.as_f64())
        .collect())
}

fn check_len(n: usize, s: &Bitstring) -> Result<()> {
    if s.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: s.len(),
        });
    }
    Ok(())
}

/// `<x| exp(-i beta X)^{(x)n} |y>` for each Hamming distance `d`:
/// `cos^(n-d)(beta) (-i sin beta)^d`.
fn mixer_elements(n: usize, beta: f64) -> Vec<Complex64> {
    let minus_i_sin = Complex64::new(0.0, -beta.sin());
    (0..=n)
        .map(|d| Complex64::new(beta.cos().powi((n - d) as i32), 0.0) * minus_i_sin.powi(d as i32))
        .collect()
}

/// Uniform-start single-layer amplitude
/// `2^(-n/2) cos^n(beta) sum_y exp(-i(gamma E_y + pi d_xy / 2)) tan^d_xy(beta)`,
/// evaluated without dividing by `cos(beta)`.
pub fn uniform_amplitude<T: Real>(
    inst: &IsingInstance<T>,
    s_x: &Bitstring,
    gamma: f64,
    beta: f64,
) -> Result<Complex64> {
    check_len(inst.n(), s_x)?;
    let energies = landscape(inst)?;
    let n = inst.n();
    let w = mixer_elements(n, beta);
    let x = s_x.to_index();
    let sum: Complex64 = energies
        .iter()
        .enumerate()
        .map(|(y, &e)| w[(x ^ y).count_ones() as usize] * Complex64::from_polar(1.0, -gamma * e))
        .sum();
    Ok(sum * 2f64.powf(-(n as f64) / 2.0))
}

/// Warm-start single-layer amplitude with the transverse mixer, for an
/// encoder whose every qubit disagrees with `s_circ` with amplitude
/// `sin(theta/2)`:
/// `cos^n(theta/2) cos^n(beta) sum_y exp(-i gamma E_y) tan^d_oy(theta/2) (-i tan beta)^d_xy`.
///
/// `theta = pi/2` recovers [`uniform_amplitude`].
pub fn ws_amplitude_closed_form<T: Real>(
    inst: &IsingInstance<T>,
    s_circ: &Bitstring,
    s_x: &Bitstring,
    theta: f64,
    gamma: f64,
    beta: f64,
) -> Result<Complex64> {
    check_len(inst.n(), s_circ)?;
    check_len(inst.n(), s_x)?;
    let energies = landscape(inst)?;
    let n = inst.n();
    let w = mixer_elements(n, beta);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let enc: Vec<f64> = (0..=n)
        .map(|d| c.powi((n - d) as i32) * s.powi(d as i32))
        .collect();
    let (o, x) = (s_circ.to_index(), s_x.to_index());
    Ok(energies
        .iter()
        .enumerate()
        .map(|(y, &e)| {
            enc[(o ^ y).count_ones() as usize]
                * w[(x ^ y).count_ones() as usize]
                * Complex64::from_polar(1.0, -gamma * e)
        })
        .sum())
}

/// The warm-start amplitude in its factored textbook form
/// `cos^n(theta/2) (cos b + i sin b cos theta)^n sum_y exp(-i gamma E_y)
///  tan^d_oy(theta/2) (i sin theta sin b / (cos b + i sin b cos theta))^d_xy`.
///
/// It equals the rotated-mixer circuit with mixer angle `-b` whenever
/// `s_x = s_circ` or `theta = pi/2`; elsewhere it is an approximation.
pub fn ws_amplitude_factored<T: Real>(
    inst: &IsingInstance<T>,
    s_circ: &Bitstring,
    s_x: &Bitstring,
    theta: f64,
    gamma: f64,
    b: f64,
) -> Result<Complex64> {
    check_len(inst.n(), s_circ)?;
    check_len(inst.n(), s_x)?;
    let energies = landscape(inst)?;
    let n = inst.n() as i32;
    let base = Complex64::new(b.cos(), b.sin() * theta.cos());
    let ratio = Complex64::new(0.0, theta.sin() * b.sin()) / base;
    let t = (theta / 2.0).tan();
    let (o, x) = (s_circ.to_index(), s_x.to_index());
    let sum: Complex64 = energies
        .iter()
        .enumerate()
        .map(|(y, &e)| {
            Complex64::from_polar(1.0, -gamma * e)
                * t.powi((o ^ y).count_ones() as i32)
                * ratio.powi((x ^ y).count_ones() as i32)
        })
        .sum();
    Ok(sum * (theta / 2.0).cos().powi(n) * base.powi(n))
}

/// One term of the uniform-start amplitude sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub y: Bitstring,
    pub d: usize,
    pub energy: f64,
    pub re: f64,
    pub im: f64,
}

/// Terms of the uniform-start amplitude ordered by Hamming distance from
/// `s_x`, then by energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDecomposition {
    pub components: Vec<Component>,
}

impl AmplitudeDecomposition {
    pub fn total(&self) -> Complex64 {
        self.components
            .iter()
            .map(|c| Complex64::new(c.re, c.im))
            .sum()
    }

    /// Running sums starting from the origin; consecutive points trace the
    /// path whose end-to-end distance is `|F_x|`.
    pub fn path(&self) -> Vec<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.components.len() + 1);
        out.push(acc);
        for c in &self.components {
            acc += Complex64::new(c.re, c.im);
            out.push(acc);
        }
        out
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let max_d = self.components.iter().map(|c| c.d).max().unwrap_or(0);
        let mut sizes = vec![0; max_d + 1];
        for c in &self.components {
            sizes[c.d] += 1;
        }
        sizes
    }
}

pub fn decompose_fx<T: Real>(
    inst: &IsingInstance<T>,
    s_x: &Bitstring,
    gamma: f64,
    beta: f64,
) -> Result<AmplitudeDecomposition> {
    check_len(inst.n(), s_x)?;
    let energies = landscape(inst)?;
    let n = inst.n();
    let w = mixer_elements(n, beta);
    let norm = 2f64.powf(-(n as f64) / 2.0);
    let x = s_x.to_index();
    let mut components: Vec<Component> = energies
        .iter()
        .enumerate()
        .map(|(y, &e)| {
            let d = (x ^ y).count_ones() as usize;
            let v = w[d] * Complex64::from_polar(norm, -gamma * e);
            Component {
                y: Bitstring::from_index(y, n),
                d,
                energy: e,
                re: v.re,
                im: v.im,
            }
        })
        .collect();
    components.sort_by(|a, b| {
        a.d.cmp(&b.d)
            .then(a.energy.total_cmp(&b.energy))
            .then(a.y.cmp(&b.y))
    });
    Ok(AmplitudeDecomposition { components })
}

/// Per Hamming distance: number of configurations, `tan^d(beta)`, product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdContribution {
    pub d: usize,
    pub count: u64,
    pub weight: f64,
    pub product: f64,
}

pub fn hd_contribution_profile<T: Real>(
    inst: &IsingInstance<T>,
    s_x: &Bitstring,
    beta: f64,
) -> Result<Vec<HdContribution>> {
    check_len(inst.n(), s_x)?;
    let n = inst.n();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge {
            what: "Hamming-distance profile",
            n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let x = s_x.to_index();
    let mut counts = vec![0u64; n + 1];
    for y in 0..(1usize << n) {
        counts[(x ^ y).count_ones() as usize] += 1;
    }
    let t = beta.tan().abs();
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(d, count)| {
            let weight = t.powi(d as i32);
            HdContribution {
                d,
                count,
                weight,
                product: count as f64 * weight,
            }
        })
        .collect())
}
