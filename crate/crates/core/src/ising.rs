//! Ising instances, bitstrings and incrementally maintained flip energies.
//!
//! Energies follow `E(s) = -sum_{j<k} J_jk s_j s_k - sum_j h_j s_j` with the
//! spin of bit `b` equal to `1 - 2b`, so bit 0 is spin up.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A spin configuration stored as one byte per site, each `0` or `1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bitstring(Vec<u8>);

impl Bitstring {
    pub fn zeros(n: usize) -> Self {
        Bitstring(vec![0; n])
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParameter {
                name: "bits",
                message: format!("bit {pos} has value {}", bits[pos]),
            });
        }
        Ok(Bitstring(bits))
    }

    /// Bit `j` is bit `j` of `index` (site 0 is least significant).
    pub fn from_index(index: usize, n: usize) -> Self {
        Bitstring((0..n).map(|j| ((index >> j) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> usize {
        debug_assert!(self.0.len() <= usize::BITS as usize);
        self.0
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | ((b as usize) << j))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    #[inline]
    pub fn get(&self, j: usize) -> u8 {
        self.0[j]
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        self.0[j] ^= 1;
    }

    /// Spin value `1 - 2 b_j`.
    #[inline]
    pub fn spin<T: Real>(&self, j: usize) -> T {
        if self.0[j] == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    pub fn complement(&self) -> Self {
        Bitstring(self.0.iter().map(|b| b ^ 1).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::InvalidParameter {
                    name: "bitstring",
                    message: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

impl TryFrom<String> for Bitstring {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Bitstring> for String {
    fn from(b: Bitstring) -> String {
        b.to_string()
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming(a: &Bitstring, b: &Bitstring) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count())
}

/// Free-form provenance stored alongside an instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<crate::lattice::LatticeSpec>,
}

/// An Ising problem on `n` sites. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance<T> {
    n: usize,
    edges: Vec<(usize, usize, T)>,
    fields: Vec<T>,
    // CSR adjacency, both directions.
    adj_start: Vec<usize>,
    adj_site: Vec<u32>,
    adj_coupling: Vec<T>,
    pub meta: InstanceMeta,
}

impl<T: Real> IsingInstance<T> {
    /// Builds an instance, canonicalising every edge to `j < k`.
    ///
    /// Rejects self-loops, duplicate pairs, out-of-range sites and
    /// non-finite values.
    pub fn new(n: usize, edges: Vec<(usize, usize, T)>, fields: Vec<T>) -> Result<Self> {
        if fields.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidInstance(format!("too many sites: {n}")));
        }
        if let Some(j) = fields.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidInstance(format!("field h[{j}] is not finite")));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (i, (a, b, w)) in edges.into_iter().enumerate() {
            if a == b {
                return Err(Error::InvalidInstance(format!("edge {i}: self-loop on site {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge {i}: ({a}, {b}) out of range for n = {n}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInstance(format!("edge {i}: coupling is not finite")));
            }
            canon.push((a.min(b), a.max(b), w));
        }
        let mut keys: Vec<(usize, usize)> = canon.iter().map(|&(j, k, _)| (j, k)).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut degree = vec![0usize; n];
        for &(j, k, _) in &canon {
            degree[j] += 1;
            degree[k] += 1;
        }
        let mut adj_start = Vec::with_capacity(n + 1);
        adj_start.push(0);
        for d in &degree {
            adj_start.push(adj_start.last().unwrap() + d);
        }
        let mut fill = adj_start[..n].to_vec();
        let mut adj_site = vec![0u32; 2 * canon.len()];
        let mut adj_coupling = vec![T::zero(); 2 * canon.len()];
        for &(j, k, w) in &canon {
            adj_site[fill[j]] = k as u32;
            adj_coupling[fill[j]] = w;
            fill[j] += 1;
            adj_site[fill[k]] = j as u32;
            adj_coupling[fill[k]] = w;
            fill[k] += 1;
        }

        Ok(IsingInstance {
            n,
            edges: canon,
            fields,
            adj_start,
            adj_site,
            adj_coupling,
            meta: InstanceMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    #[inline]
    pub fn degree(&self, j: usize) -> usize {
        self.adj_start[j + 1] - self.adj_start[j]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|j| self.degree(j)).max().unwrap_or(0)
    }

    /// Neighbours of `j` with the connecting coupling.
    #[inline]
    pub fn neighbors(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.adj_start[j]..self.adj_start[j + 1];
        self.adj_site[r.clone()]
            .iter()
            .zip(&self.adj_coupling[r])
            .map(|(&k, &w)| (k as usize, w))
    }

    /// Converts the scalar type (e.g. `f64` instance to `f32`).
    pub fn cast<U: Real>(&self) -> IsingInstance<U> {
        let edges = self
            .edges
            .iter()
            .map(|&(j, k, w)| (j, k, U::lit(w.as_f64())))
            .collect();
        let fields = self.fields.iter().map(|&h| U::lit(h.as_f64())).collect();
        IsingInstance::new(self.n, edges, fields)
            .expect("cast preserves validity")
            .with_meta(self.meta.clone())
    }

    /// Same graph with every coupling and field multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let edges = self.edges.iter().map(|&(j, k, w)| (j, k, w * c)).collect();
        let fields = self.fields.iter().map(|&h| h * c).collect();
        IsingInstance::new(self.n, edges, fields)
            .expect("scaling preserves validity")
            .with_meta(self.meta.clone())
    }

    fn check_len(&self, s: &Bitstring) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        Ok(())
    }

    /// Local field `sum_k J_jk s_k + h_j` acting on site `j`.
    #[inline]
    fn local_field(&self, s: &Bitstring, j: usize) -> T {
        self.neighbors(j)
            .fold(self.fields[j], |acc, (k, w)| acc + w * s.spin::<T>(k))
    }

    pub fn energy(&self, s: &Bitstring) -> Result<T> {
        self.check_len(s)?;
        let coupling: T = self
            .edges
            .iter()
            .map(|&(j, k, w)| w * s.spin::<T>(j) * s.spin::<T>(k))
            .sum();
        let field: T = self
            .fields
            .iter()
            .enumerate()
            .map(|(j, &h)| h * s.spin::<T>(j))
            .sum();
        Ok(-coupling - field)
    }

    pub fn delta_table(&self, s: &Bitstring) -> Result<DeltaTable<T>> {
        self.check_len(s)?;
        let two = T::lit(2.0);
        let deltas = (0..self.n)
            .map(|j| two * s.spin::<T>(j) * self.local_field(s, j))
            .collect();
        Ok(DeltaTable {
            deltas,
            energy: self.energy(s)?,
        })
    }
}

/// Energy change for flipping each bit of the current configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable<T> {
    pub deltas: Vec<T>,
    pub energy: T,
}

impl<T: Real> DeltaTable<T> {
    /// Flips bit `j` of `s` and updates the table in `O(degree(j))`.
    ///
    /// Callers must pass the configuration the table was built for.
    #[inline]
    pub fn flip(&mut self, inst: &IsingInstance<T>, s: &mut Bitstring, j: usize) {
        let d = self.deltas[j];
        self.energy += d;
        self.deltas[j] = -d;
        s.flip(j);
        let sj: T = s.spin(j);
        let four = T::lit(4.0);
        for (k, w) in inst.neighbors(j) {
            self.deltas[k] += four * w * sj * s.spin::<T>(k);
        }
    }

    /// Compares against a from-scratch rebuild for `s`. The energy entry is
    /// reported as site `n`.
    pub fn verify(&self, inst: &IsingInstance<T>, s: &Bitstring, tol: f64) -> Result<()> {
        let fresh = inst.delta_table(s)?;
        if self.deltas.len() != fresh.deltas.len() {
            return Err(Error::LengthMismatch {
                expected: fresh.deltas.len(),
                got: self.deltas.len(),
            });
        }
        let entries = self
            .deltas
            .iter()
            .zip(&fresh.deltas)
            .chain(std::iter::once((&self.energy, &fresh.energy)));
        for (site, (a, b)) in entries.enumerate() {
            let (stored, expected) = (a.as_f64(), b.as_f64());
            if (stored - expected).abs() > tol * (1.0 + expected.abs()) {
                return Err(Error::InconsistentTable {
                    site,
                    stored,
                    expected,
                });
            }
        }
        Ok(())
    }
}

/// Flips bit `j`, keeping `table` consistent with `s`.
pub fn apply_flip<T: Real>(
    inst: &IsingInstance<T>,
    s: &mut Bitstring,
    table: &mut DeltaTable<T>,
    j: usize,
) -> Result<()> {
    if j >= inst.n() {
        return Err(Error::IndexOutOfRange { index: j, n: inst.n() });
    }
    if s.len() != inst.n() || table.deltas.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: s.len().min(table.deltas.len()),
        });
    }
    table.flip(inst, s, j);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(j: f64) -> IsingInstance<f64> {
        IsingInstance::new(2, vec![(0, 1, j)], vec![0.0, 0.0]).unwrap()
    }

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn random_instance(n: usize, p: f64, seed: u64) -> IsingInstance<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((j, k, rng.random_range(-2.0..2.0)));
                }
            }
        }
        let fields = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        IsingInstance::new(n, edges, fields).unwrap()
    }

    fn random_bits(n: usize, rng: &mut impl Rng) -> Bitstring {
        Bitstring::from_bits((0..n).map(|_| rng.random_range(0..2u8)).collect()).unwrap()
    }

    // Term-by-term recompute over all ordered pairs of a dense matrix.
    fn naive_energy(inst: &IsingInstance<f64>, s: &Bitstring) -> f64 {
        let n = inst.n();
        let mut jm = vec![vec![0.0; n]; n];
        for &(j, k, w) in inst.edges() {
            jm[j][k] = w;
            jm[k][j] = w;
        }
        let sig: Vec<f64> = s.bits().iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
        let mut e = 0.0;
        for j in 0..n {
            for k in 0..n {
                e -= 0.5 * jm[j][k] * sig[j] * sig[k];
            }
            e -= inst.fields()[j] * sig[j];
        }
        e
    }

    #[test]
    fn energy_small_cases() {
        assert_eq!(pair(1.0).energy(&bs("00")).unwrap(), -1.0);
        assert_eq!(pair(1.0).energy(&bs("01")).unwrap(), 1.0);
        let single = IsingInstance::new(1, vec![], vec![1.0]).unwrap();
        assert_eq!(single.energy(&bs("0")).unwrap(), -1.0);
    }

    #[test]
    fn energy_matches_naive_recompute() {
        let inst = random_instance(16, 0.3, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = random_bits(16, &mut rng);
            let e = inst.energy(&s).unwrap();
            assert!((e - naive_energy(&inst, &s)).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_rejects_length_mismatch() {
        assert!(matches!(
            pair(1.0).energy(&bs("000")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn delta_table_small_cases() {
        let t = pair(1.0).delta_table(&bs("00")).unwrap();
        assert_eq!(t.deltas, vec![2.0, 2.0]);
        assert_eq!(t.energy, -1.0);
        let single = IsingInstance::new(1, vec![], vec![1.0]).unwrap();
        let t = single.delta_table(&bs("1")).unwrap();
        assert_eq!(t.deltas, vec![-2.0]);
        assert_eq!(t.energy, 1.0);
    }

    #[test]
    fn delta_table_matches_brute_force_flips() {
        let inst = random_instance(16, 0.3, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_bits(16, &mut rng);
        let t = inst.delta_table(&s).unwrap();
        let e0 = inst.energy(&s).unwrap();
        for j in 0..16 {
            let mut f = s.clone();
            f.flip(j);
            assert!((t.deltas[j] - (inst.energy(&f).unwrap() - e0)).abs() < 1e-9);
        }
    }

    #[test]
    fn flip_updates_pair() {
        let inst = pair(1.0);
        let mut s = bs("00");
        let mut t = inst.delta_table(&s).unwrap();
        apply_flip(&inst, &mut s, &mut t, 0).unwrap();
        assert_eq!(s, bs("10"));
        assert_eq!(t.energy, 1.0);
        assert_eq!(t.deltas, vec![-2.0, -2.0]);
        assert!(matches!(
            apply_flip(&inst, &mut s, &mut t, 2),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn double_flip_is_identity() {
        let inst = random_instance(12, 0.4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = random_bits(12, &mut rng);
        let t0 = inst.delta_table(&s0).unwrap();
        for j in 0..12 {
            let (mut s, mut t) = (s0.clone(), t0.clone());
            apply_flip(&inst, &mut s, &mut t, j).unwrap();
            apply_flip(&inst, &mut s, &mut t, j).unwrap();
            assert_eq!(s, s0);
            for (a, b) in t.deltas.iter().zip(&t0.deltas) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((t.energy - t0.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn long_flip_sequence_matches_rebuild() {
        let inst = crate::lattice::generate_lattice_instance::<f64>(
            &crate::lattice::LatticeSpec::masked(7, (104..112).collect()),
            99,
            2.0,
            1.0,
        )
        .unwrap();
        assert_eq!(inst.n(), 104);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = random_bits(104, &mut rng);
        let mut t = inst.delta_table(&s).unwrap();
        for _ in 0..1000 {
            let j = rng.random_range(0..104);
            apply_flip(&inst, &mut s, &mut t, j).unwrap();
        }
        let fresh = inst.delta_table(&s).unwrap();
        for (a, b) in t.deltas.iter().zip(&fresh.deltas) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((t.energy - fresh.energy).abs() < 1e-9);
    }

    #[test]
    fn hamming_cases() {
        assert_eq!(hamming(&bs("0000"), &bs("0000")).unwrap(), 0);
        assert_eq!(hamming(&bs("0000"), &bs("1111")).unwrap(), 4);
        assert_eq!(hamming(&bs("0101"), &bs("0110")).unwrap(), 2);
        assert!(hamming(&bs("01"), &bs("011")).is_err());
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(IsingInstance::new(2, vec![(0, 0, 1.0)], vec![0.0; 2]).is_err());
        assert!(IsingInstance::new(2, vec![(0, 1, 1.0), (1, 0, 2.0)], vec![0.0; 2]).is_err());
        assert!(IsingInstance::new(2, vec![(0, 2, 1.0)], vec![0.0; 2]).is_err());
        assert!(IsingInstance::new(2, vec![(0, 1, f64::NAN)], vec![0.0; 2]).is_err());
        assert!(IsingInstance::new(2, vec![], vec![0.0; 3]).is_err());
    }

    #[test]
    fn adjacency_mirrors_edges() {
        let inst = random_instance(10, 0.5, 5);
        let mut from_adj = Vec::new();
        for j in 0..10 {
            for (k, w) in inst.neighbors(j) {
                if j < k {
                    from_adj.push((j, k, w));
                }
            }
        }
        let mut edges = inst.edges().to_vec();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        from_adj.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        assert_eq!(edges, from_adj);
    }

    #[test]
    fn bitstring_index_round_trip() {
        let b = Bitstring::from_index(0b1011, 5);
        assert_eq!(b.to_string(), "11010");
        assert_eq!(b.to_index(), 0b1011);
    }

    #[test]
    fn f32_instance_agrees_with_f64() {
        let inst = random_instance(10, 0.4, 8);
        let inst32: IsingInstance<f32> = inst.cast();
        let s = bs("0110100111");
        let e64 = inst.energy(&s).unwrap();
        let e32 = inst32.energy(&s).unwrap() as f64;
        assert!((e64 - e32).abs() < 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn zero_field_energy_is_flip_symmetric(seed in 0u64..1000, idx in 0usize..(1 << 10)) {
            let mut inst = random_instance(10, 0.5, seed);
            inst = IsingInstance::new(10, inst.edges().to_vec(), vec![0.0; 10]).unwrap();
            let s = Bitstring::from_index(idx, 10);
            let a = inst.energy(&s).unwrap();
            let b = inst.energy(&s.complement()).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn replayed_energy_matches_direct(seed in 0u64..1000, path in proptest::collection::vec(0usize..12, 0..60)) {
            let inst = random_instance(12, 0.4, seed);
            let mut s = Bitstring::from_index(seed as usize % 4096, 12);
            let mut t = inst.delta_table(&s).unwrap();
            for j in path {
                apply_flip(&inst, &mut s, &mut t, j).unwrap();
            }
            proptest::prop_assert!((t.energy - inst.energy(&s).unwrap()).abs() < 1e-9);
        }
    }
}
