use gauss_quad::GaussHermite;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cases::{f_case, CaseConstants, TheoremCase, ARG_CLAMP};
use crate::error::{invalid, Result};
use crate::gp_sim::{MixingVector, VectorProcessSpec};
use crate::seed::{replication_rng, Stream};
use crate::stats::{compensated_sum, MeanEstimate};

/// Mixing parameters of the limit: `r_kk` and the covariance of `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiterbargParams {
    pub p: usize,
    pub r_diag: Vec<f64>,
    pub mixing: MixingVector,
}

impl PiterbargParams {
    pub fn from_spec(spec: &VectorProcessSpec) -> Self {
        Self {
            p: spec.p(),
            r_diag: spec.r_diag(),
            mixing: spec.mixing(),
        }
    }

    /// `p` components without long-range dependence.
    pub fn weak(p: usize) -> Self {
        Self {
            p,
            r_diag: vec![0.0; p],
            mixing: MixingVector::identity(p),
        }
    }

    pub fn weakly_dependent(&self) -> bool {
        self.r_diag.iter().all(|&r| r == 0.0)
    }
}

/// How `E[exp(-sum f_k e^{-r_kk + sqrt(2 r_kk) Z_k})]` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum Integration {
    /// Closed form when all `r_kk = 0`, Gauss–Hermite(64) for `p = 1`,
    /// Monte Carlo otherwise.
    Auto,
    GaussHermite { order: usize },
    MonteCarlo { reps: usize, seed: u64 },
}

impl Default for Integration {
    fn default() -> Self {
        Integration::Auto
    }
}

const AUTO_MC_REPS: usize = 200_000;
const AUTO_MC_SEED: u64 = 0x6d69_7869_6e67;

/// Quadrature or sampled nodes for `Z`, prepared once.
#[derive(Debug, Clone)]
enum Nodes {
    /// No mixing: the weight is identically 1.
    Degenerate,
    /// `(weight, e^{-r_k + sqrt(2 r_k) Z_k} for each k)`
    Weighted(Vec<(f64, Vec<f64>)>),
}

/// The limiting distribution `G` for one case shared by all
/// components.
#[derive(Debug, Clone)]
pub struct PiterbargLaw {
    pub params: PiterbargParams,
    pub case: TheoremCase,
    pub constants: CaseConstants,
    nodes: Nodes,
    monte_carlo: bool,
}

fn mixture_factors(r_diag: &[f64], z: &[f64]) -> Vec<f64> {
    r_diag
        .iter()
        .zip(z)
        .map(|(&r, &zk)| (-r + (2.0 * r).sqrt() * zk).exp())
        .collect()
}

impl PiterbargLaw {
    pub fn new(
        params: PiterbargParams,
        case: TheoremCase,
        constants: CaseConstants,
        integration: Integration,
    ) -> Result<Self> {
        case.validate()?;
        let p = params.p;
        if params.r_diag.len() != p || params.mixing.p != p {
            return Err(invalid("Piterbarg parameters have inconsistent dimension"));
        }
        let chol = params.mixing.cholesky()?;
        let integration = match integration {
            Integration::Auto if params.weakly_dependent() => None,
            Integration::Auto if p == 1 => Some(Integration::GaussHermite { order: 64 }),
            Integration::Auto => Some(Integration::MonteCarlo {
                reps: AUTO_MC_REPS,
                seed: AUTO_MC_SEED,
            }),
            other if params.weakly_dependent() => {
                // integrators still run; the weight is 1 at every node
                Some(other)
            }
            other => Some(other),
        };
        let correlate = |xi: &[f64]| -> Vec<f64> {
            (0..p)
                .map(|i| (0..=i).map(|j| chol[i * p + j] * xi[j]).sum())
                .collect()
        };
        let (nodes, monte_carlo) = match integration {
            None => (Nodes::Degenerate, false),
            Some(Integration::GaussHermite { order }) => {
                if p > 3 {
                    return Err(invalid("tensor Gauss-Hermite is limited to p <= 3"));
                }
                let rule = GaussHermite::new(order)
                    .map_err(|_| invalid(format!("invalid Gauss-Hermite order {order}")))?;
                let one: Vec<(f64, f64)> = rule
                    .as_node_weight_pairs()
                    .iter()
                    .map(|&(x, w)| (std::f64::consts::SQRT_2 * x, w / std::f64::consts::PI.sqrt()))
                    .collect();
                let mut out = Vec::with_capacity(one.len().pow(p as u32));
                let mut idx = vec![0usize; p];
                loop {
                    let xi: Vec<f64> = idx.iter().map(|&i| one[i].0).collect();
                    let w: f64 = idx.iter().map(|&i| one[i].1).product();
                    out.push((w, mixture_factors(&params.r_diag, &correlate(&xi))));
                    let mut k = 0;
                    while k < p {
                        idx[k] += 1;
                        if idx[k] < one.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == p {
                        break;
                    }
                }
                (Nodes::Weighted(out), false)
            }
            Some(Integration::MonteCarlo { reps, seed }) => {
                if reps == 0 {
                    return Err(invalid("Monte Carlo integration needs reps > 0"));
                }
                let w = 1.0 / reps as f64;
                let out = (0..reps)
                    .map(|i| {
                        let mut rng = replication_rng(seed, Stream::Mixing, i as u64);
                        let xi: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
                        (w, mixture_factors(&params.r_diag, &correlate(&xi)))
                    })
                    .collect();
                (Nodes::Weighted(out), true)
            }
            Some(Integration::Auto) => unreachable!(),
        };
        Ok(Self {
            params,
            case,
            constants,
            nodes,
            monte_carlo,
        })
    }

    /// Closed-form law for weakly dependent components.
    pub fn weak(p: usize, case: TheoremCase, constants: CaseConstants) -> Result<Self> {
        Self::new(PiterbargParams::weak(p), case, constants, Integration::Auto)
    }

    pub fn p(&self) -> usize {
        self.params.p
    }

    /// `f(x_k, y1_k, y2_k)` for every component.
    pub fn exponents(&self, x: &[f64], y1: &[f64], y2: &[f64]) -> Result<Vec<f64>> {
        let p = self.p();
        if x.len() != p || y1.len() != p || y2.len() != p {
            return Err(invalid(format!("expected {p} arguments per block")));
        }
        (0..p)
            .map(|k| f_case(&self.case, &self.constants, x[k], y1[k], y2[k]))
            .collect()
    }

    /// `G(x, y1, y2)`.
    pub fn cdf(&self, x: &[f64], y1: &[f64], y2: &[f64]) -> Result<f64> {
        let f = self.exponents(x, y1, y2)?;
        Ok(self.mix(&f).0)
    }

    /// `G` with its Monte Carlo standard error (0 for deterministic rules).
    pub fn cdf_with_stderr(&self, x: &[f64], y1: &[f64], y2: &[f64]) -> Result<(f64, f64)> {
        let f = self.exponents(x, y1, y2)?;
        Ok(self.mix(&f))
    }

    fn mix(&self, f: &[f64]) -> (f64, f64) {
        match &self.nodes {
            Nodes::Degenerate => ((-compensated_sum(f.iter().copied())).exp(), 0.0),
            Nodes::Weighted(nodes) => {
                let term = |fac: &[f64]| (-compensated_sum(f.iter().zip(fac).map(|(a, b)| a * b))).exp();
                if self.monte_carlo {
                    let vals: Vec<f64> = nodes.iter().map(|(_, fac)| term(fac)).collect();
                    let m = MeanEstimate::from_slice(&vals);
                    (m.mean, m.stderr)
                } else {
                    (compensated_sum(nodes.iter().map(|(w, fac)| w * term(fac))), 0.0)
                }
            }
        }
    }
}

/// Which argument block a marginal refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Margin {
    X,
    Y1,
    Y2,
}

/// Marginal CDF of one argument of component `k`, every other argument at
/// `+ARG_CLAMP`.
pub fn gumbel_marginal(law: &PiterbargLaw, k: usize, margin: Margin, z: f64) -> Result<f64> {
    let p = law.p();
    if k >= p {
        return Err(invalid(format!("component {k} out of range")));
    }
    let mut args = [vec![ARG_CLAMP; p], vec![ARG_CLAMP; p], vec![ARG_CLAMP; p]];
    let slot = match margin {
        Margin::X => 0,
        Margin::Y1 => 1,
        Margin::Y2 => 2,
    };
    args[slot][k] = z;
    law.cdf(&args[0], &args[1], &args[2])
}

/// One evaluation point `(x, y1, y2)`, each of length `p`.
pub type LatticePoint = (Vec<f64>, Vec<f64>, Vec<f64>);

/// `max |G(. + ln n)^n - G(.)|` over the points.
pub fn check_max_stability(law: &PiterbargLaw, n: u32, points: &[LatticePoint]) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let s = (n as f64).ln();
    let shift = |v: &[f64]| v.iter().map(|a| a + s).collect::<Vec<_>>();
    let mut worst = 0.0_f64;
    for (x, y1, y2) in points {
        let g = law.cdf(x, y1, y2)?;
        let gn = law.cdf(&shift(x), &shift(y1), &shift(y2))?.powi(n as i32);
        worst = worst.max((gn - g).abs());
    }
    Ok(worst)
}

/// Cartesian lattice with `per_axis` points over `[lo, hi]` for every one
/// of the `3p` arguments. Intended for small `p`.
pub fn cube_lattice(p: usize, per_axis: usize, lo: f64, hi: f64) -> Vec<LatticePoint> {
    let axis: Vec<f64> = if per_axis == 1 {
        vec![lo]
    } else {
        (0..per_axis)
            .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let dims = 3 * p;
    let total = per_axis.pow(dims as u32);
    (0..total)
        .map(|mut code| {
            let mut v = Vec::with_capacity(dims);
            for _ in 0..dims {
                v.push(axis[code % per_axis]);
                code /= per_axis;
            }
            (v[..p].to_vec(), v[p..2 * p].to_vec(), v[2 * p..].to_vec())
        })
        .collect()
}
