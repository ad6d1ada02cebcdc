//! Instance generators: the rotated square lattice used for benchmarks and
//! random regular graphs for landscape studies.
//!
//! The rotated lattice has `2L` rows of `L + 1` sites; odd rows sit half a
//! spacing to the right, and every site couples to its (up to four) diagonal
//! neighbours in the adjacent rows. That gives `2L(L+1)` sites.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ising::{InstanceMeta, IsingInstance};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub l: usize,
    /// Sites (full-lattice numbering) removed together with their edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<usize>>,
}

impl LatticeSpec {
    pub fn full(l: usize) -> Self {
        LatticeSpec { l, mask: None }
    }

    pub fn masked(l: usize, removed: Vec<usize>) -> Self {
        LatticeSpec {
            l,
            mask: Some(removed),
        }
    }

    /// Drops the last `k` sites of the full lattice.
    pub fn trimmed(l: usize, k: usize) -> Self {
        let total = Self::full_site_count(l);
        Self::masked(l, (total.saturating_sub(k)..total).collect())
    }

    pub fn full_site_count(l: usize) -> usize {
        2 * l * (l + 1)
    }

    pub fn rows(&self) -> usize {
        2 * self.l
    }

    pub fn cols(&self) -> usize {
        self.l + 1
    }

    /// Nearest-neighbour pairs of the full lattice, `j < k`.
    pub fn full_edges(&self) -> Vec<(usize, usize)> {
        let (rows, cols) = (self.rows(), self.cols());
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows.saturating_sub(1) {
            for c in 0..cols {
                // Even rows: diagonals land on columns c-1 and c of the next
                // row; odd rows: on c and c+1.
                let targets: [Option<usize>; 2] = if r % 2 == 0 {
                    [c.checked_sub(1), Some(c)]
                } else {
                    [Some(c), (c + 1 < cols).then_some(c + 1)]
                };
                for t in targets.into_iter().flatten() {
                    edges.push((id(r, c), id(r + 1, t)));
                }
            }
        }
        edges
    }

    fn validate(&self) -> Result<Vec<bool>> {
        if self.l == 0 {
            return Err(invalid("L", "edge length must be at least 1"));
        }
        let total = Self::full_site_count(self.l);
        let mut keep = vec![true; total];
        if let Some(mask) = &self.mask {
            for &m in mask {
                if m >= total {
                    return Err(invalid(
                        "mask",
                        format!("site {m} outside lattice of {total} sites"),
                    ));
                }
                if !keep[m] {
                    return Err(invalid("mask", format!("site {m} listed twice")));
                }
                keep[m] = false;
            }
        }
        if !keep.iter().any(|&k| k) {
            return Err(invalid("mask", "mask removes every site"));
        }
        Ok(keep)
    }
}

/// Random couplings `J ~ N(0, sigma_j^2)` and fields `h ~ N(0, sigma_h^2)` on
/// the rotated lattice. Values are drawn on the full lattice before masking,
/// so masking never changes the surviving weights.
pub fn generate_lattice_instance<T: Real>(
    spec: &LatticeSpec,
    seed: u64,
    sigma_j: f64,
    sigma_h: f64,
) -> Result<IsingInstance<T>> {
    let keep = spec.validate()?;
    let (dj, dh) = normals(sigma_j, sigma_h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full_edges = spec.full_edges();
    let couplings: Vec<f64> = full_edges.iter().map(|_| dj.sample(&mut rng)).collect();
    let fields: Vec<f64> = keep.iter().map(|_| dh.sample(&mut rng)).collect();

    let mut renumber = vec![usize::MAX; keep.len()];
    let mut next = 0;
    for (site, &k) in keep.iter().enumerate() {
        if k {
            renumber[site] = next;
            next += 1;
        }
    }
    let edges = full_edges
        .iter()
        .zip(&couplings)
        .filter(|((a, b), _)| keep[*a] && keep[*b])
        .map(|(&(a, b), &w)| (renumber[a], renumber[b], T::lit(w)))
        .collect();
    let h = fields
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(&x, _)| T::lit(x))
        .collect();
    Ok(IsingInstance::new(next, edges, h)?.with_meta(InstanceMeta {
        id: None,
        seed: Some(seed),
        generator: Some(format!("rotated-lattice sigma_j={sigma_j} sigma_h={sigma_h}")),
        lattice: Some(spec.clone()),
    }))
}

/// Random `degree`-regular simple graph (configuration model with restarts)
/// with Gaussian couplings and fields.
pub fn random_regular_instance<T: Real>(
    n: usize,
    degree: usize,
    seed: u64,
    sigma_j: f64,
    sigma_h: f64,
) -> Result<IsingInstance<T>> {
    if degree >= n || (n * degree) % 2 != 0 {
        return Err(invalid(
            "degree",
            format!("no simple {degree}-regular graph on {n} vertices"),
        ));
    }
    let (dj, dh) = normals(sigma_j, sigma_h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = 'attempt: loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::BTreeSet::new();
        for chunk in stubs.chunks(2) {
            let (a, b) = (chunk[0].min(chunk[1]), chunk[0].max(chunk[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
        }
        break seen.into_iter().collect::<Vec<_>>();
    };
    let edges = pairs
        .into_iter()
        .map(|(a, b)| (a, b, T::lit(dj.sample(&mut rng))))
        .collect();
    let fields = (0..n).map(|_| T::lit(dh.sample(&mut rng))).collect();
    Ok(IsingInstance::new(n, edges, fields)?.with_meta(InstanceMeta {
        id: None,
        seed: Some(seed),
        generator: Some(format!(
            "random-regular degree={degree} sigma_j={sigma_j} sigma_h={sigma_h}"
        )),
        lattice: None,
    }))
}

fn normals(sigma_j: f64, sigma_h: f64) -> Result<(Normal<f64>, Normal<f64>)> {
    let mk = |name: &'static str, s: f64| {
        Normal::new(0.0, s).map_err(|e| Error::InvalidParameter {
            name,
            message: e.to_string(),
        })
    };
    Ok((mk("sigma_j", sigma_j)?, mk("sigma_h", sigma_h)?))
}
