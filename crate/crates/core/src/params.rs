//! Layer angles for an `[L, Q]` sampler: the first `L` layers of a depth-`Q`
//! schedule tabulated for unweighted large-girth regular graphs, rescaled to
//! the weights and degree of a concrete instance.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ising::IsingInstance;
use crate::scalar::Real;

const BUNDLED: &str = include_str!("../data/inf_params.json");
pub const PARAMS_FORMAT: &str = "qjump-params";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ParamsFile {
    format: String,
    version: u32,
    #[serde(default)]
    source: Option<String>,
    depths: BTreeMap<String, DepthParams>,
}

/// Tabulated dimensionless angles per depth.
#[derive(Debug, Clone, PartialEq)]
pub struct InfParams {
    depths: BTreeMap<usize, DepthParams>,
    /// Use [`linear_ramp`] for depths absent from the table.
    pub ramp_fallback: bool,
}

/// `t_l = (l - 1/2)/Q`, `gamma_l = 0.75 t_l`, `beta_l = 0.75 (1 - t_l)`.
pub fn linear_ramp(q: usize) -> DepthParams {
    let t = |l: usize| (l as f64 + 0.5) / q as f64;
    DepthParams {
        gammas: (0..q).map(|l| 0.75 * t(l)).collect(),
        betas: (0..q).map(|l| 0.75 * (1.0 - t(l))).collect(),
    }
}

impl InfParams {
    /// The table shipped with the crate (depths 1 to 20).
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled parameter table is valid")
    }

    /// No table at all; every depth uses the linear ramp.
    pub fn ramp_only() -> Self {
        InfParams {
            depths: BTreeMap::new(),
            ramp_fallback: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(text)?;
        if file.format != PARAMS_FORMAT {
            return Err(invalid(
                "params",
                format!("expected format {PARAMS_FORMAT:?}, found {:?}", file.format),
            ));
        }
        let mut depths = BTreeMap::new();
        for (key, p) in file.depths {
            let q: usize = key
                .parse()
                .map_err(|_| invalid("params", format!("depth key {key:?} is not an integer")))?;
            if q == 0 || p.gammas.len() != q || p.betas.len() != q {
                return Err(invalid(
                    "params",
                    format!(
                        "depth {q}: expected {q} gammas and betas, got {} and {}",
                        p.gammas.len(),
                        p.betas.len()
                    ),
                ));
            }
            if p.gammas.iter().chain(&p.betas).any(|x| !x.is_finite()) {
                return Err(invalid("params", format!("depth {q}: non-finite angle")));
            }
            depths.insert(q, p);
        }
        Ok(InfParams {
            depths,
            ramp_fallback: false,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn available(&self) -> Vec<usize> {
        self.depths.keys().copied().collect()
    }

    pub fn depth(&self, q: usize) -> Result<DepthParams> {
        match self.depths.get(&q) {
            Some(p) => Ok(p.clone()),
            None if self.ramp_fallback && q > 0 => Ok(linear_ramp(q)),
            None => Err(Error::MissingDepth {
                q,
                available: self.available(),
            }),
        }
    }
}

/// How the weight scale `A` enters the cost angles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaScaling {
    /// `gamma_l = arctan(1/sqrt(D-1)) gamma_inf_l / A`: the phases `gamma E`
    /// are invariant under a global rescaling of the weights.
    #[default]
    DivideByRescale,
    /// `gamma_l = A arctan(1/sqrt(D-1)) gamma_inf_l`, taken at face value.
    MultiplyByRescale,
}

/// Concrete per-layer angles for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub l: usize,
    pub q: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub a: f64,
    pub d: f64,
    pub scaling: GammaScaling,
}

impl ParamSchedule {
    /// Explicit angles, e.g. for tests.
    pub fn explicit(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(invalid("schedule", "gammas and betas differ in length"));
        }
        let l = gammas.len();
        Ok(ParamSchedule {
            l,
            q: l,
            gammas,
            betas,
            a: 1.0,
            d: f64::NAN,
            scaling: GammaScaling::default(),
        })
    }

    /// Angles as applied by the simulator, `(gamma_l, -beta_l)` per layer.
    ///
    /// The tabulated angles lower the energy when the mixer turns the other
    /// way from `exp(-i beta X)`; the simulator's cost layer is
    /// `exp(-i gamma E)`, so the mixer angle is negated here.
    pub fn circuit_layers(&self) -> Vec<(f64, f64)> {
        self.gammas
            .iter()
            .zip(&self.betas)
            .map(|(&g, &b)| (g, -b))
            .collect()
    }
}

/// `sqrt(mean of nonzero J^2 + mean of nonzero h^2)`; an empty class
/// contributes zero.
pub fn rescale_factor<T: Real>(inst: &IsingInstance<T>) -> Result<f64> {
    let mean_sq = |vals: &mut dyn Iterator<Item = f64>| {
        let (mut sum, mut count) = (0.0, 0usize);
        for v in vals.filter(|v| *v != 0.0) {
            sum += v * v;
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    };
    let a2 = mean_sq(&mut inst.edges().iter().map(|e| e.2.as_f64()))
        + mean_sq(&mut inst.fields().iter().map(|h| h.as_f64()));
    if a2 == 0.0 {
        return Err(Error::Degenerate("all couplings and fields are zero".into()));
    }
    Ok(a2.sqrt())
}

/// Average degree over nonzero couplings: `2 * #edges / n`.
pub fn average_degree<T: Real>(inst: &IsingInstance<T>) -> f64 {
    if inst.n() == 0 {
        return 0.0;
    }
    let nonzero = inst.edges().iter().filter(|e| e.2 != T::zero()).count();
    2.0 * nonzero as f64 / inst.n() as f64
}

/// First `l` layers of the depth-`q` table, rescaled for `inst`.
pub fn build_schedule<T: Real>(
    inf: &InfParams,
    inst: &IsingInstance<T>,
    l: usize,
    q: usize,
    scaling: GammaScaling,
) -> Result<ParamSchedule> {
    if l == 0 || l > q {
        return Err(invalid("L", format!("need 1 <= L <= Q, got L = {l}, Q = {q}")));
    }
    let table = inf.depth(q)?;
    let a = rescale_factor(inst)?;
    let d = average_degree(inst);
    if d <= 1.0 {
        return Err(invalid(
            "D",
            format!("average degree {d} <= 1 leaves the angle transfer undefined"),
        ));
    }
    let angle = (1.0 / (d - 1.0).sqrt()).atan();
    let factor = match scaling {
        GammaScaling::DivideByRescale => angle / a,
        GammaScaling::MultiplyByRescale => angle * a,
    };
    Ok(ParamSchedule {
        l,
        q,
        gammas: table.gammas[..l].iter().map(|g| factor * g).collect(),
        betas: table.betas[..l].to_vec(),
        a,
        d,
        scaling,
    })
}
