//! Steepest-descent local search and energy basins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{hamming, Bitstring, DeltaTable, IsingInstance};
use crate::landscape::{GroundState, LANDSCAPE_CAP};
use crate::scalar::Real;

/// Which bit wins when several share the most negative flip energy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    pub s_star: Bitstring,
    pub e_star: T,
    pub table_star: DeltaTable<T>,
    /// Descent steps taken.
    pub n_ls: usize,
    /// Flips replayed from the reference configuration to reach the candidate.
    pub replay_flips: usize,
    /// Hamming distance between the candidate and `s_star`.
    pub flips_from_input: usize,
}

/// Bit to flip next, or `None` at a local minimum.
#[inline]
pub fn steepest_bit<T: Real>(deltas: &[T], tie: TieBreak) -> Option<usize> {
    let mut best = None;
    let mut best_val = T::zero();
    for (j, &d) in deltas.iter().enumerate() {
        let better = match tie {
            TieBreak::LowestIndex => d < best_val,
            TieBreak::HighestIndex => d < best_val || (best.is_some() && d == best_val),
        };
        if better {
            best = Some(j);
            best_val = d;
        }
    }
    best
}

/// Runs steepest descent in place; returns the number of flips.
pub fn descend<T: Real>(
    inst: &IsingInstance<T>,
    s: &mut Bitstring,
    table: &mut DeltaTable<T>,
    tie: TieBreak,
) -> usize {
    let mut steps = 0;
    while let Some(j) = steepest_bit(&table.deltas, tie) {
        table.flip(inst, s, j);
        steps += 1;
    }
    steps
}

/// Replays the flips from `s_circ` to `candidate` on a copy of `table_circ`,
/// then descends. In debug builds the reference table is checked first.
pub fn greedy_descent<T: Real>(
    inst: &IsingInstance<T>,
    s_circ: &Bitstring,
    table_circ: &DeltaTable<T>,
    candidate: &Bitstring,
    tie: TieBreak,
) -> Result<SearchResult<T>> {
    if s_circ.len() != inst.n() || candidate.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: if s_circ.len() != inst.n() {
                s_circ.len()
            } else {
                candidate.len()
            },
        });
    }
    #[cfg(debug_assertions)]
    table_circ.verify(inst, s_circ, 1e-9)?;

    let mut s = s_circ.clone();
    let mut table = table_circ.clone();
    let mut replay_flips = 0;
    for j in 0..inst.n() {
        if s.get(j) != candidate.get(j) {
            table.flip(inst, &mut s, j);
            replay_flips += 1;
        }
    }
    let n_ls = descend(inst, &mut s, &mut table, tie);
    let flips_from_input = hamming(candidate, &s)?;
    Ok(SearchResult {
        e_star: table.energy,
        s_star: s,
        table_star: table,
        n_ls,
        replay_flips,
        flips_from_input,
    })
}

/// Local minimum reached from `s` by steepest descent.
pub fn basin_of<T: Real>(inst: &IsingInstance<T>, s: &Bitstring, tie: TieBreak) -> Result<Bitstring> {
    let mut s = s.clone();
    let mut table = inst.delta_table(&s)?;
    descend(inst, &mut s, &mut table, tie);
    Ok(s)
}

/// Attractor index for every configuration (indexed as
/// [`Bitstring::to_index`]), for `n <= 24`.
pub fn basin_map<T: Real>(inst: &IsingInstance<T>, tie: TieBreak) -> Result<Vec<u32>> {
    let n = inst.n();
    if n > LANDSCAPE_CAP {
        return Err(Error::TooLarge {
            what: "basin map",
            n,
            cap: LANDSCAPE_CAP,
        });
    }
    // One steepest step per configuration, Gray-code walks over the low bits
    // in parallel blocks.
    let high = n.min(6);
    let low = n - high;
    let mut next = vec![0u32; 1 << n];
    next.par_chunks_mut(1 << low)
        .enumerate()
        .for_each(|(block, out)| {
            let base = block << low;
            let mut s = Bitstring::from_index(base, n);
            let mut table = inst.delta_table(&s).expect("length matches");
            let mut index = base;
            let mut record = |index: usize, table: &DeltaTable<T>| {
                out[index - base] = match steepest_bit(&table.deltas, tie) {
                    Some(j) => (index ^ (1 << j)) as u32,
                    None => index as u32,
                };
            };
            record(index, &table);
            for step in 1..(1usize << low) {
                let j = step.trailing_zeros() as usize;
                table.flip(inst, &mut s, j);
                index ^= 1 << j;
                record(index, &table);
            }
        });
    // Pointer jumping until every entry is a fixed point.
    loop {
        let jumped: Vec<u32> = next.par_iter().map(|&t| next[t as usize]).collect();
        if jumped == next {
            return Ok(next);
        }
        next = jumped;
    }
}

/// Probability mass of a full distribution whose basin attractor is a
/// global minimum.
pub fn global_basin_probability<T: Real>(
    inst: &IsingInstance<T>,
    probs: &[f64],
    ground: &GroundState,
    tie: TieBreak,
) -> Result<f64> {
    let map = basin_map(inst, tie)?;
    global_basin_probability_with_map(probs, ground, &map)
}

/// As [`global_basin_probability`], reusing a precomputed basin map.
pub fn global_basin_probability_with_map(
    probs: &[f64],
    ground: &GroundState,
    map: &[u32],
) -> Result<f64> {
    if probs.len() != map.len() {
        return Err(Error::LengthMismatch {
            expected: map.len(),
            got: probs.len(),
        });
    }
    if ground.minimizers.is_empty() {
        return Err(Error::MissingGround("no minimizers recorded".into()));
    }
    let global: std::collections::HashSet<usize> =
        ground.minimizers.iter().map(Bitstring::to_index).collect();
    Ok(probs
        .iter()
        .zip(map)
        .filter(|(_, &a)| global.contains(&(a as usize)))
        .map(|(p, _)| p)
        .fold(0.0, |a, b| a + b))
}

/// Fraction of `samples` whose descent ends at the ground energy.
pub fn global_basin_fraction<T: Real>(
    inst: &IsingInstance<T>,
    samples: &[Bitstring],
    ground: &GroundState,
    tie: TieBreak,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySupport("no samples".into()));
    }
    let mut hits = 0usize;
    for s in samples {
        let m = basin_of(inst, s, tie)?;
        if ground.is_hit(inst.energy(&m)?.as_f64()) {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples.len() as f64)
}
