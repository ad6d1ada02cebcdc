//! Energy versus Hamming distance statistics: occurrence grids, square
//! region sums, the Gaussian peak model, conditional Monte Carlo sampling of
//! the one-layer weight and local covariances.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeDecomposition, HdContribution};
use crate::error::{invalid, Error, Result};
use crate::ising::{hamming, Bitstring, IsingInstance};
use crate::landscape::GroundState;
use crate::scalar::Real;
use crate::seed::derive_seed;

pub const CSV_VERSION: u32 = 1;

fn csv_header(kind: &str, columns: &str) -> String {
    format!("# qjump {kind} v{CSV_VERSION}\n{columns}\n")
}

/// Mass per (energy box, Hamming box). Energy axis is `1 - E/E_g`, the
/// Hamming axis is the distance to the nearest ground-state minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceGrid {
    pub box_e: f64,
    pub box_hd: f64,
    pub ground: GroundState,
    pub cells: BTreeMap<(usize, usize), f64>,
    pub total: f64,
}

/// One binned item: energy, distance to ground, weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub energy: f64,
    pub hd: usize,
    pub weight: f64,
}

impl OccurrenceGrid {
    pub fn empty(ground: GroundState, box_e: f64, box_hd: f64) -> Result<Self> {
        if !(ground.energy < 0.0) {
            return Err(invalid(
                "E_g",
                format!("{} must be negative for the approximation ratio", ground.energy),
            ));
        }
        if !(box_e > 0.0) || !(box_hd > 0.0) {
            return Err(invalid("box size", "must be positive"));
        }
        Ok(OccurrenceGrid {
            box_e,
            box_hd,
            ground,
            cells: BTreeMap::new(),
            total: 0.0,
        })
    }

    /// Box index of a point.
    pub fn cell_of(&self, energy: f64, hd: usize) -> (usize, usize) {
        let e_g = self.ground.energy;
        let r = (1.0 - energy / e_g).max(0.0);
        (
            (r / self.box_e + 1e-9).floor() as usize,
            (hd as f64 / self.box_hd + 1e-9).floor() as usize,
        )
    }

    pub fn add(&mut self, p: GridPoint) {
        let c = self.cell_of(p.energy, p.hd);
        *self.cells.entry(c).or_insert(0.0) += p.weight;
        self.total += p.weight;
    }

    /// Copy scaled to unit total mass.
    pub fn normalized(&self) -> Self {
        let mut g = self.clone();
        if self.total > 0.0 {
            for v in g.cells.values_mut() {
                *v /= self.total;
            }
            g.total = 1.0;
        }
        g
    }

    /// Energy-axis marginal, indexed by energy box.
    pub fn energy_marginal(&self) -> BTreeMap<usize, f64> {
        let mut m = BTreeMap::new();
        for (&(e, _), &v) in &self.cells {
            *m.entry(e).or_insert(0.0) += v;
        }
        m
    }

    pub fn to_csv(&self) -> String {
        let mut s = csv_header("grid", "box_e_index,box_hd_index,count");
        for (&(e, h), &v) in &self.cells {
            let _ = writeln!(s, "{e},{h},{v}");
        }
        s
    }
}

/// Grid of sample bitstrings. A sample below an uncertified ground energy
/// replaces the reference and everything is binned against the new one.
pub fn occurrence_grid<T: Real>(
    inst: &IsingInstance<T>,
    samples: &[Bitstring],
    ground: &GroundState,
    box_e: f64,
    box_hd: f64,
) -> Result<OccurrenceGrid> {
    let energies = samples
        .iter()
        .map(|s| inst.energy(s).map(|e| e.as_f64()))
        .collect::<Result<Vec<_>>>()?;
    let mut ground = ground.clone();
    let lowest = energies.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < ground.energy - 1e-9 {
        if ground.certified {
            return Err(invalid(
                "E_g",
                format!("sample energy {lowest} is below the certified ground energy {}", ground.energy),
            ));
        }
        let mut minimizers: Vec<Bitstring> = samples
            .iter()
            .zip(&energies)
            .filter(|(_, &e)| (e - lowest).abs() <= 1e-9)
            .map(|(s, _)| s.clone())
            .collect();
        minimizers.sort();
        minimizers.dedup();
        ground = GroundState {
            energy: lowest,
            minimizers,
            certified: false,
        };
    }
    let mut grid = OccurrenceGrid::empty(ground, box_e, box_hd)?;
    for (s, e) in samples.iter().zip(energies) {
        let hd = grid.ground.distance(s)?;
        grid.add(GridPoint {
            energy: e,
            hd,
            weight: 1.0,
        });
    }
    Ok(grid)
}

/// Grid of an exact distribution over all basis states.
pub fn occurrence_grid_exact<T: Real>(
    energies: &[T],
    probs: &[f64],
    ground: &GroundState,
    box_e: f64,
    box_hd: f64,
) -> Result<OccurrenceGrid> {
    if energies.len() != probs.len() {
        return Err(Error::LengthMismatch {
            expected: energies.len(),
            got: probs.len(),
        });
    }
    let n = energies.len().trailing_zeros() as usize;
    let targets: Vec<usize> = ground.minimizers.iter().map(|m| m.to_index()).collect();
    let mut grid = OccurrenceGrid::empty(ground.clone(), box_e, box_hd)?;
    for (i, (&e, &p)) in energies.iter().zip(probs).enumerate() {
        if p == 0.0 {
            continue;
        }
        let hd = targets
            .iter()
            .map(|t| (i ^ t).count_ones() as usize)
            .min()
            .unwrap_or(n);
        grid.add(GridPoint {
            energy: e.as_f64(),
            hd,
            weight: p,
        });
    }
    Ok(grid)
}

/// Mass inside the square region `d` anchored at the origin: Hamming
/// distance below `d` and `1 - R` below `aspect * d * box_e / box_hd`.
/// Only whole boxes count.
pub fn region_mass(grid: &OccurrenceGrid, d: usize, aspect: f64) -> f64 {
    let hd_limit = d as f64;
    let e_limit = aspect * d as f64 * grid.box_e / grid.box_hd;
    grid.cells
        .iter()
        .filter(|(&(e, h), _)| {
            (h as f64 + 1.0) * grid.box_hd <= hd_limit + 1e-9
                && (e as f64 + 1.0) * grid.box_e <= e_limit + 1e-9
        })
        .map(|(_, v)| v)
        .fold(0.0, |a, b| a + b)
}

/// `region_mass` for every region index `0..=max_d`.
pub fn square_region_sums(grid: &OccurrenceGrid, max_d: usize, aspect: f64) -> Vec<(usize, f64)> {
    (0..=max_d).map(|d| (d, region_mass(grid, d, aspect))).collect()
}

pub fn regions_csv(sums: &[(usize, f64)]) -> String {
    let mut s = csv_header("regions", "hd_index,mass");
    for (d, m) in sums {
        let _ = writeln!(s, "{d},{m}");
    }
    s
}

/// Peak model for the sampling probability as a function of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub sigma_e: f64,
    pub cov: f64,
}

impl GaussianModel {
    pub fn new(sigma_e: f64, cov: f64) -> Result<Self> {
        if !(sigma_e > 0.0) || !sigma_e.is_finite() || !cov.is_finite() {
            return Err(invalid("sigma_E", format!("need sigma_E > 0 and finite Cov, got {sigma_e}, {cov}")));
        }
        Ok(GaussianModel { sigma_e, cov })
    }

    /// Relative probability `exp(-gamma^2 sigma^2 - pi gamma Cov)`.
    pub fn prob(&self, gamma: f64) -> f64 {
        self.log_prob(gamma).exp()
    }

    pub fn log_prob(&self, gamma: f64) -> f64 {
        -gamma * gamma * self.sigma_e * self.sigma_e - std::f64::consts::PI * gamma * self.cov
    }

    /// Energy spread over all configurations and the covariance of energy
    /// with `d(x, y)` under the `|tan(beta)|^d` weighting.
    pub fn from_landscape<T: Real>(energies: &[T], s_x: &Bitstring, beta: f64) -> Result<Self> {
        let n = s_x.len();
        if energies.len() != 1usize << n {
            return Err(Error::LengthMismatch {
                expected: 1usize << n,
                got: energies.len(),
            });
        }
        let k = energies.len() as f64;
        let mean = energies.iter().map(|e| e.as_f64()).sum::<f64>() / k;
        let var = energies.iter().map(|e| (e.as_f64() - mean).powi(2)).sum::<f64>() / k;
        let t = beta.tan().abs();
        let pow: Vec<f64> = (0..=n).map(|d| t.powi(d as i32)).collect();
        let x = s_x.to_index();
        let (mut z, mut me, mut md) = (0.0, 0.0, 0.0);
        for (y, e) in energies.iter().enumerate() {
            let d = (x ^ y).count_ones() as usize;
            z += pow[d];
            me += pow[d] * e.as_f64();
            md += pow[d] * d as f64;
        }
        let (me, md) = (me / z, md / z);
        let cov = energies
            .iter()
            .enumerate()
            .map(|(y, e)| {
                let d = (x ^ y).count_ones() as usize;
                pow[d] * (e.as_f64() - me) * (d as f64 - md)
            })
            .sum::<f64>()
            / z;
        GaussianModel::new(var.sqrt(), cov)
    }

    pub fn gamma_star(&self) -> f64 {
        -std::f64::consts::PI * self.cov / (2.0 * self.sigma_e * self.sigma_e)
    }

    /// Value at the peak, `exp(pi^2 Cov^2 / (4 sigma^2))`.
    pub fn peak(&self) -> f64 {
        let pi = std::f64::consts::PI;
        (pi * pi * self.cov * self.cov / (4.0 * self.sigma_e * self.sigma_e)).exp()
    }
}

/// Per-site magnitude of the Hamming factor of the one-layer weight.
pub fn hamming_factor(theta: f64, beta: f64) -> f64 {
    let (sb, cb) = beta.sin_cos();
    let num = (theta.sin() * sb).abs();
    let den = (cb * cb + sb * sb * theta.cos().powi(2)).sqrt();
    num / den
}

/// Log-weights per unit of `d(s_circ, y)` and `d(x, y)`.
fn log_factors(theta: f64, beta: f64) -> (f64, f64) {
    ((theta / 2.0).tan().ln(), hamming_factor(theta, beta).ln())
}

/// Number of `y` with given distances to `s_circ` and `x`, and the
/// unnormalised weight of each, as `(d_circ, d_x, count, weight)`.
pub fn level_set_weights(n: usize, k: usize, theta: f64, beta: f64) -> Vec<(usize, usize, f64, f64)> {
    let (lt, lw) = log_factors(theta, beta);
    let binom = |n: usize, r: usize| -> f64 {
        (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let mut out = Vec::new();
    // i flips where s_circ and x agree, j where they differ.
    for i in 0..=n - k {
        for j in 0..=k {
            let a = i + j;
            let b = i + k - j;
            let lw_ab = if a == 0 { 0.0 } else { a as f64 * lt } + if b == 0 { 0.0 } else { b as f64 * lw };
            out.push((a, b, binom(n - k, i) * binom(k, j), lw_ab.exp()));
        }
    }
    out
}

/// Normalised probability of each `(d_circ, d_x)` level set.
pub fn level_set_distribution(n: usize, k: usize, theta: f64, beta: f64) -> Result<BTreeMap<(usize, usize), f64>> {
    let mut m = BTreeMap::new();
    let mut z = 0.0;
    for (a, b, c, w) in level_set_weights(n, k, theta, beta) {
        *m.entry((a, b)).or_insert(0.0) += c * w;
        z += c * w;
    }
    if !(z > 0.0) {
        return Err(Error::EmptySupport("all level-set weights vanish".into()));
    }
    for v in m.values_mut() {
        *v /= z;
    }
    Ok(m)
}

/// Single-bit-flip Metropolis draws from the one-layer weight
/// `tan(theta/2)^d(s_circ, y) * w^d(x, y)`. One recorded sample per sweep
/// of `n` proposals, over independent parallel chains.
pub fn conditional_mc_sample(
    s_x: &Bitstring,
    s_circ: &Bitstring,
    theta: f64,
    beta: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<Bitstring>> {
    let n = s_x.len();
    if s_circ.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: s_circ.len(),
        });
    }
    if !(0.0..std::f64::consts::PI).contains(&theta) {
        return Err(invalid("theta", format!("{theta} outside [0, pi)")));
    }
    let (lt, lw) = log_factors(theta, beta);
    let k = hamming(s_x, s_circ)?;
    let start = match (lt == f64::NEG_INFINITY, lw == f64::NEG_INFINITY) {
        (true, true) if k > 0 => {
            return Err(Error::EmptySupport(
                "theta = 0 puts all weight on s_circ, which differs from the target".into(),
            ))
        }
        (false, true) => s_x.clone(),
        _ => s_circ.clone(),
    };
    if n == 0 {
        return Ok(vec![start; m]);
    }
    const CHAINS: usize = 16;
    let burn_in = 64;
    let per_chain = m.div_ceil(CHAINS);
    let mut chains: Vec<Vec<Bitstring>> = (0..CHAINS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let mut y = start.clone();
            let mut out = Vec::with_capacity(per_chain);
            for sweep in 0..burn_in + per_chain {
                for _ in 0..n {
                    let j = rng.random_range(0..n);
                    let dc = if y.get(j) == s_circ.get(j) { 1.0 } else { -1.0 };
                    let dx = if y.get(j) == s_x.get(j) { 1.0 } else { -1.0 };
                    let mut log_ratio = 0.0;
                    if lt != 0.0 {
                        log_ratio += dc * lt;
                    }
                    if lw != 0.0 {
                        log_ratio += dx * lw;
                    }
                    if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                        y.flip(j);
                    }
                }
                if sweep >= burn_in {
                    out.push(y.clone());
                }
            }
            out
        })
        .collect();
    let mut all: Vec<Bitstring> = chains.iter_mut().flat_map(std::mem::take).collect();
    all.truncate(m);
    Ok(all)
}

/// Covariance of energy and distance to `s_x` around samples with a given
/// distance to `s_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub d: usize,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// Options for [`local_covariance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodOptions {
    pub radius: usize,
    /// Neighbourhoods larger than this are sampled instead of enumerated.
    pub max_neighbors: usize,
    /// Uniform draws from the ball when sampling.
    pub draws: usize,
    pub seed: u64,
}

impl Default for NeighborhoodOptions {
    fn default() -> Self {
        NeighborhoodOptions {
            radius: 4,
            max_neighbors: 4096,
            draws: 256,
            seed: 0,
        }
    }
}

fn ball_size(n: usize, r: usize) -> f64 {
    let mut total = 0.0;
    let mut c = 1.0;
    for k in 0..=r.min(n) {
        total += c;
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    total
}

fn covariance(xs: &[(f64, f64)]) -> f64 {
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let (mx, my) = xs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / k, my / k);
    xs.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (k - 1.0)
}

// Enumerates every flip set of size <= r, depth first, updating the table
// incrementally.
fn walk_ball<T: Real>(
    inst: &IsingInstance<T>,
    s: &mut Bitstring,
    table: &mut crate::ising::DeltaTable<T>,
    from: usize,
    left: usize,
    d_x: usize,
    s_x: &Bitstring,
    out: &mut Vec<(f64, f64)>,
) {
    out.push((table.energy.as_f64(), d_x as f64));
    if left == 0 {
        return;
    }
    for j in from..inst.n() {
        let nd = if s.get(j) == s_x.get(j) { d_x + 1 } else { d_x - 1 };
        table.flip(inst, s, j);
        walk_ball(inst, s, table, j + 1, left - 1, nd, s_x, out);
        table.flip(inst, s, j);
    }
}

/// Covariance between `E_z` and `d(s_x, z)` over `z` within `radius` of each
/// sample, averaged per `d(s_x, y)`.
pub fn local_covariance<T: Real>(
    inst: &IsingInstance<T>,
    s_x: &Bitstring,
    samples: &[Bitstring],
    opts: NeighborhoodOptions,
) -> Result<Vec<CovarianceRow>> {
    let n = inst.n();
    if s_x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: s_x.len(),
        });
    }
    let exhaustive = ball_size(n, opts.radius) <= opts.max_neighbors as f64;
    // Cumulative shell sizes for uniform draws from the ball.
    let shells: Vec<f64> = (0..=opts.radius.min(n))
        .scan(0.0, |acc, r| {
            *acc += ball_size(n, r) - if r == 0 { 0.0 } else { ball_size(n, r - 1) };
            Some(*acc)
        })
        .collect();
    let per_sample = samples
        .par_iter()
        .enumerate()
        .map(|(i, y)| -> Result<(usize, f64)> {
            let d_y = hamming(s_x, y)?;
            let mut s = y.clone();
            let mut table = inst.delta_table(&s)?;
            let mut pts = Vec::new();
            if exhaustive {
                walk_ball(inst, &mut s, &mut table, 0, opts.radius, d_y, s_x, &mut pts);
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i as u64));
                for _ in 0..opts.draws {
                    let u = rng.random::<f64>() * shells[shells.len() - 1];
                    let r = shells.iter().position(|&c| u < c).unwrap_or(shells.len() - 1);
                    let picks = rand::seq::index::sample(&mut rng, n, r);
                    let mut z = s.clone();
                    let mut t = table.clone();
                    for j in picks.iter() {
                        t.flip(inst, &mut z, j);
                    }
                    pts.push((t.energy.as_f64(), hamming(s_x, &z)? as f64));
                }
            }
            Ok((d_y, covariance(&pts)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (d, c) in per_sample {
        groups.entry(d).or_default().push(c);
    }
    Ok(groups
        .into_iter()
        .map(|(d, v)| {
            let k = v.len() as f64;
            let mean = v.iter().sum::<f64>() / k;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            CovarianceRow {
                d,
                count: v.len(),
                mean,
                std,
            }
        })
        .collect())
}

pub fn covariance_csv(rows: &[CovarianceRow]) -> String {
    let mut s = csv_header("covariance", "d_xy,count,mean,std");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.d, r.count, r.mean, r.std);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipStats {
    pub mean: f64,
    pub std: f64,
    /// Number of samples at each Hamming distance `0..=n`.
    pub histogram: Vec<u64>,
}

/// Fraction of bits each sample differs from `s_circ`.
pub fn flip_ratio_stats(samples: &[Bitstring], s_circ: &Bitstring) -> Result<FlipStats> {
    if samples.is_empty() {
        return Err(invalid("samples", "empty sample set"));
    }
    let n = s_circ.len();
    let mut histogram = vec![0u64; n + 1];
    let mut ratios = Vec::with_capacity(samples.len());
    for s in samples {
        let d = hamming(s, s_circ)?;
        histogram[d] += 1;
        ratios.push(if n == 0 { 0.0 } else { d as f64 / n as f64 });
    }
    let k = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / k;
    let std = if ratios.len() > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(FlipStats {
        mean,
        std,
        histogram,
    })
}

/// Components and running sum of an amplitude decomposition.
pub fn fxpath_csv(dec: &AmplitudeDecomposition) -> String {
    let mut s = csv_header("fxpath", "y,d,energy,re,im,path_re,path_im");
    for (c, p) in dec.components.iter().zip(dec.path()) {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", c.y, c.d, c.energy, c.re, c.im, p.re, p.im);
    }
    s
}

pub fn hdprofile_csv(rows: &[HdContribution]) -> String {
    let mut s = csv_header("hdprofile", "d,count,weight,product");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.d, r.count, r.weight, r.product);
    }
    s
}
