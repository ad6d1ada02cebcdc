//! Exhaustive enumeration of small landscapes.
//!
//! Configurations are visited in Gray-code order so each step is a single
//! flip applied through a [`DeltaTable`](crate::ising::DeltaTable).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Bitstring, IsingInstance};
use crate::scalar::Real;

/// Default cap on `n` for exhaustive ground-state search.
pub const BRUTE_FORCE_CAP: usize = 26;
/// Default cap on `n` for storing a full `2^n` energy table.
pub const LANDSCAPE_CAP: usize = 24;

/// Reference ground energy and every configuration attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub minimizers: Vec<Bitstring>,
    /// `true` when established by exhaustive search.
    pub certified: bool,
}

impl GroundState {
    /// Minimum Hamming distance from `s` to any minimizer.
    pub fn distance(&self, s: &Bitstring) -> Result<usize> {
        let mut best = usize::MAX;
        for m in &self.minimizers {
            best = best.min(crate::ising::hamming(m, s)?);
        }
        if best == usize::MAX {
            return Err(Error::MissingGround("no minimizers recorded".into()));
        }
        Ok(best)
    }

    pub fn is_hit(&self, energy: f64) -> bool {
        energy <= self.energy + 1e-9
    }
}

fn for_each_gray<T: Real>(inst: &IsingInstance<T>, mut visit: impl FnMut(usize, T)) {
    let n = inst.n();
    let mut s = Bitstring::zeros(n);
    let mut table = inst.delta_table(&s).expect("length matches");
    let mut index = 0usize;
    visit(index, table.energy);
    for step in 1..(1usize << n) {
        let j = step.trailing_zeros() as usize;
        table.flip(inst, &mut s, j);
        index ^= 1 << j;
        visit(index, table.energy);
    }
}

/// Energy of every configuration, indexed by [`Bitstring::to_index`].
pub fn energy_landscape<T: Real>(inst: &IsingInstance<T>) -> Result<Vec<T>> {
    energy_landscape_capped(inst, LANDSCAPE_CAP)
}

pub fn energy_landscape_capped<T: Real>(inst: &IsingInstance<T>, cap: usize) -> Result<Vec<T>> {
    if inst.n() > cap {
        return Err(Error::TooLarge {
            what: "energy landscape",
            n: inst.n(),
            cap,
        });
    }
    let mut out = vec![T::zero(); 1 << inst.n()];
    for_each_gray(inst, |i, e| out[i] = e);
    Ok(out)
}

/// Exhaustive ground state with all (degenerate) minimizers.
pub fn brute_force_ground<T: Real>(inst: &IsingInstance<T>) -> Result<GroundState> {
    brute_force_ground_capped(inst, BRUTE_FORCE_CAP)
}

pub fn brute_force_ground_capped<T: Real>(
    inst: &IsingInstance<T>,
    cap: usize,
) -> Result<GroundState> {
    if inst.n() > cap {
        return Err(Error::TooLarge {
            what: "brute-force ground state",
            n: inst.n(),
            cap,
        });
    }
    // Gray-code accumulation drifts slightly; collect near-minimal candidates
    // and settle them with direct evaluation.
    let tol = 1e-7;
    let mut best = f64::INFINITY;
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for_each_gray(inst, |i, e| {
        let e = e.as_f64();
        if e < best - tol {
            best = e;
            candidates.retain(|&(_, c)| c <= best + tol);
        }
        if e <= best + tol {
            candidates.push((i, e));
        }
    });
    let exact: Vec<(Bitstring, f64)> = candidates
        .into_iter()
        .map(|(i, _)| {
            let b = Bitstring::from_index(i, inst.n());
            let e = inst.energy(&b).expect("length matches").as_f64();
            (b, e)
        })
        .collect();
    let energy = exact.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let scale = 1e-9 * (1.0 + energy.abs());
    let mut minimizers: Vec<Bitstring> = exact
        .into_iter()
        .filter(|(_, e)| *e <= energy + scale)
        .map(|(b, _)| b)
        .collect();
    minimizers.sort();
    Ok(GroundState {
        energy,
        minimizers,
        certified: true,
    })
}

/// Ground state read off a precomputed landscape.
pub fn ground_from_landscape<T: Real>(energies: &[T], n: usize) -> GroundState {
    let energy = energies
        .iter()
        .map(|e| e.as_f64())
        .fold(f64::INFINITY, f64::min);
    let scale = 1e-9 * (1.0 + energy.abs());
    let minimizers = energies
        .iter()
        .enumerate()
        .filter(|(_, e)| e.as_f64() <= energy + scale)
        .map(|(i, _)| Bitstring::from_index(i, n))
        .collect();
    GroundState {
        energy,
        minimizers,
        certified: true,
    }
}
