use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::array::PartialArray;
use super::subset::{for_each_assignment, DimSubset};
use crate::error::{Error, Result};

/// Disjoint nonempty cells covering a ground set, kept sorted by first member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    ground: DimSubset,
    cells: Vec<DimSubset>,
}

impl Partition {
    pub fn new(ground: DimSubset, mut cells: Vec<DimSubset>) -> Result<Self> {
        if cells.iter().any(|c| c.is_empty() || c.ambient() != ground.ambient()) {
            return Err(Error::InvalidArgument("cells must be nonempty subsets of the ground set".into()));
        }
        let total: usize = cells.iter().map(DimSubset::len).sum();
        let mut union = DimSubset::empty(ground.ambient());
        for c in &cells {
            union = union.union(c)?;
        }
        if union != ground || total != ground.len() {
            return Err(Error::InvalidArgument(
                "cells must be disjoint and cover the ground set".into(),
            ));
        }
        cells.sort_by_key(|c| c.members()[0]);
        Ok(Partition { ground, cells })
    }

    pub fn single_cell(ground: DimSubset) -> Self {
        let cells = if ground.is_empty() { vec![] } else { vec![ground.clone()] };
        Partition { ground, cells }
    }

    pub fn singletons(ground: DimSubset) -> Self {
        let n = ground.ambient();
        let cells = ground
            .members()
            .iter()
            .map(|&w| DimSubset::new(n, [w]).unwrap())
            .collect();
        Partition { ground, cells }
    }

    pub fn ground(&self) -> &DimSubset {
        &self.ground
    }

    pub fn cells(&self) -> &[DimSubset] {
        &self.cells
    }

    /// Number of cells, `κ`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell holding `w`.
    pub fn cell_of(&self, w: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(w))
    }
}

/// All partitions of `ground`, via restricted growth strings.
pub fn enumerate_partitions(ground: &DimSubset) -> Vec<Partition> {
    let members = ground.members();
    let n = members.len();
    if n == 0 {
        return vec![Partition::single_cell(ground.clone())];
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let k = rgs.iter().max().unwrap() + 1;
        let cells = (0..k)
            .map(|c| {
                DimSubset::new(
                    ground.ambient(),
                    members.iter().zip(&rgs).filter(|(_, &g)| g == c).map(|(&w, _)| w),
                )
                .unwrap()
            })
            .collect();
        out.push(Partition::new(ground.clone(), cells).unwrap());
        // next restricted growth string: a[i] <= 1 + max(a[..i])
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
            i -= 1;
        }
    }
}

/// Partitions of `ground` into exactly `kappa` cells.
pub fn enumerate_partitions_k(ground: &DimSubset, kappa: usize) -> Vec<Partition> {
    enumerate_partitions(ground)
        .into_iter()
        .filter(|p| p.len() == kappa)
        .collect()
}

/// Pairing weights of a partition of `Ω ⊕ Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaWeights {
    /// `(ω, θ_ω)` for each `ω ∈ Ω`.
    pub per_dim: Vec<(usize, f64)>,
    /// `Θ = Σ θ_ω`.
    pub total: f64,
}

/// `θ_ω = 1/2` when `ω` and `ω + N` share a cell, else 0.
pub fn theta_weights(pi: &Partition) -> Result<ThetaWeights> {
    let omega = doubled_base(pi.ground())?;
    let n = omega.ambient();
    let per_dim: Vec<(usize, f64)> = omega
        .members()
        .iter()
        .map(|&w| {
            let th = if pi.cell_of(w) == pi.cell_of(w + n) { 0.5 } else { 0.0 };
            (w, th)
        })
        .collect();
    let total = per_dim.iter().map(|p| p.1).sum();
    Ok(ThetaWeights { per_dim, total })
}

/// Upper bound on `2Θ` for partitions of `Ω ⊕ Ω` into `kappa` cells.
pub fn pairing_bound(omega_len: usize, kappa: usize) -> usize {
    if kappa <= omega_len {
        omega_len
    } else {
        (2 * omega_len).saturating_sub(kappa)
    }
}

fn doubled_base(ground: &DimSubset) -> Result<DimSubset> {
    let (lo, hi) = ground.split_doubled()?;
    if lo != hi {
        return Err(Error::InvalidArgument(format!(
            "{:?} is not a doubled set",
            ground.members()
        )));
    }
    Ok(lo)
}

/// Projections `Ω_τ = (℧_τ ∪ (℧_τ - N)) ∩ Ω` of the cells of a partition of `Ω ⊕ Ω`.
pub fn cell_projections(pi: &Partition) -> Result<Vec<DimSubset>> {
    let omega = doubled_base(pi.ground())?;
    let n = omega.ambient();
    Ok(pi
        .cells()
        .iter()
        .map(|c| DimSubset::new(n, dedup(c.members().iter().map(|&w| w % n))).unwrap())
        .collect())
}

fn dedup(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Both sides of the partition-weighted Cauchy-Schwarz inequality
/// `Σ_i ∏_τ C^τ(i|Ω_τ) <= ∏_ω m_ω^θ_ω ∏_τ ‖C^τ‖_F`.
///
/// `arrays[τ]` must live on the projection of cell `τ` (see [`cell_projections`]).
pub fn cauchy_schwarz_check(
    omega: &DimSubset,
    pi: &Partition,
    extents: &[usize],
    arrays: &[PartialArray],
) -> Result<(f64, f64)> {
    if omega.is_empty() {
        return Err(Error::InvalidArgument("Ω must be nonempty".into()));
    }
    if pi.ground() != &omega.doubled() {
        return Err(Error::InvalidArgument("partition must be of Ω ⊕ Ω".into()));
    }
    if extents.len() != omega.ambient() {
        return Err(Error::DimensionMismatch(format!(
            "{} extents for ambient size {}",
            extents.len(),
            omega.ambient()
        )));
    }
    let proj = cell_projections(pi)?;
    if arrays.len() != proj.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} arrays for {} cells",
            arrays.len(),
            proj.len()
        )));
    }
    for (a, p) in arrays.iter().zip(&proj) {
        if a.domain() != p || p.members().iter().any(|&w| a.extents()[w] != extents[w]) {
            return Err(Error::DimensionMismatch(format!(
                "array on {:?} does not match cell projection {:?}",
                a.domain().members(),
                p.members()
            )));
        }
    }
    let ext: Vec<usize> = omega.members().iter().map(|&w| extents[w]).collect();
    let mut full = vec![0usize; omega.ambient()];
    let mut lhs = 0.0;
    for_each_assignment(&ext, |i| {
        for (&w, &v) in omega.members().iter().zip(i) {
            full[w] = v;
        }
        lhs += arrays
            .iter()
            .map(|a| a.values()[a.offset_by(|w| full[w])])
            .product::<f64>();
    });
    let theta = theta_weights(pi)?;
    let weight: f64 = theta
        .per_dim
        .iter()
        .map(|&(w, th)| (extents[w] as f64).powf(th))
        .product();
    let rhs = weight * arrays.iter().map(PartialArray::frobenius).product::<f64>();
    Ok((lhs, rhs))
}

/// Settings for the alternating-maximization lower bound on `‖C‖_π`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionNormOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PartitionNormOptions {
    fn default() -> Self {
        PartitionNormOptions {
            restarts: 32,
            max_sweeps: 200,
            tol: 1e-12,
            seed: 0x5eed,
        }
    }
}

pub fn partition_norm(c: &PartialArray, pi: &Partition) -> Result<f64> {
    partition_norm_with(c, pi, &PartitionNormOptions::default())
}

/// Lower bound on `sup Σ_i C_i ∏_τ Z^τ(i|cell τ)` over unit-Frobenius `Z^τ`.
/// The single-cell value is the Frobenius norm exactly.
pub fn partition_norm_with(c: &PartialArray, pi: &Partition, opts: &PartitionNormOptions) -> Result<f64> {
    if pi.ground() != c.domain() {
        return Err(Error::InvalidArgument(format!(
            "partition of {:?} does not match array domain {:?}",
            pi.ground().members(),
            c.domain().members()
        )));
    }
    if pi.len() <= 1 {
        return Ok(c.frobenius());
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is needed".into()));
    }
    let ext = c.extents();
    let cell_sizes: Vec<usize> = pi
        .cells()
        .iter()
        .map(|cell| cell.members().iter().map(|&w| ext[w]).product())
        .collect();
    // offsets[τ][e]: position inside Z^τ of entry e of C
    let mut offsets: Vec<Vec<usize>> = vec![Vec::with_capacity(c.len()); pi.len()];
    let members = c.domain().members();
    let mut full = vec![0usize; ext.len()];
    for_each_assignment(&c.member_extents(), |i| {
        for (&w, &v) in members.iter().zip(i) {
            full[w] = v;
        }
        for (t, cell) in pi.cells().iter().enumerate() {
            let off = cell.members().iter().fold(0, |acc, &w| acc * ext[w] + full[w]);
            offsets[t].push(off);
        }
    });

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = 0.0f64;
    for _ in 0..opts.restarts {
        let mut z: Vec<Vec<f64>> = cell_sizes
            .iter()
            .map(|&m| {
                let mut v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                normalize(&mut v);
                v
            })
            .collect();
        let mut value = f64::NEG_INFINITY;
        for _ in 0..opts.max_sweeps {
            let mut sweep_value = 0.0;
            for t in 0..pi.len() {
                let mut g = vec![0.0; cell_sizes[t]];
                for (e, &x) in c.values().iter().enumerate() {
                    let others: f64 = (0..pi.len())
                        .filter(|&u| u != t)
                        .map(|u| z[u][offsets[u][e]])
                        .product();
                    g[offsets[t][e]] += x * others;
                }
                let norm = normalize(&mut g);
                if norm > 0.0 {
                    z[t] = g;
                }
                sweep_value = norm;
            }
            let done = sweep_value - value <= opts.tol * sweep_value.abs().max(1.0);
            value = value.max(sweep_value);
            if done {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}
