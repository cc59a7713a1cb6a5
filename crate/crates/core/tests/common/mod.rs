//! Brute-force oracles shared by the integration tests. Nothing here calls the
//! library routine it is used to check.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ttmax_core::index::{DimSubset, PartialArray, PartialIndex};
use ttmax_core::DenseTensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| gauss(rng))
}

/// Random chain `1 x k_1, k_1 x k_2, .., k_{d-1} x 1` with `k_s` in `1..=max_k`.
pub fn chain(rng: &mut ChaCha8Rng, d: usize, max_k: usize) -> Vec<DMatrix<f64>> {
    let mut k = vec![1];
    k.extend((1..d).map(|_| rng.random_range(1..=max_k)));
    k.push(1);
    (0..d).map(|s| matrix(rng, k[s], k[s + 1])).collect()
}

pub fn inner_sizes(w: &[DMatrix<f64>]) -> Vec<usize> {
    w[..w.len() - 1].iter().map(|m| m.ncols()).collect()
}

/// Every tuple below `extents`, first position slowest.
pub fn odometer(extents: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &e in extents {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..e).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn subsets_of(members: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << members.len())
        .map(|mask| {
            members
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &w)| w)
                .collect()
        })
        .collect()
}

pub fn subset(ambient: usize, members: &[usize]) -> DimSubset {
    DimSubset::new(ambient, members.iter().copied()).unwrap()
}

/// Index on the doubled set from values for `omega` (first copy) and `omega + n` (second copy).
pub fn doubled_index(n: usize, omega: &[usize], i: &[usize], j: &[usize]) -> PartialIndex {
    let pairs: Vec<(usize, usize)> = omega
        .iter()
        .zip(i)
        .map(|(&w, &v)| (w, v))
        .chain(omega.iter().zip(j).map(|(&w, &v)| (w + n, v)))
        .collect();
    PartialIndex::from_pairs(2 * n, &pairs).unwrap()
}

/// Sum over matched pairs on `traced` of a doubled array on `omega ⊕ omega`,
/// evaluated at `i ⧺ j` over the remaining members.
pub fn brute_trace_entry(
    c: &PartialArray,
    n: usize,
    omega: &[usize],
    traced: &[usize],
    i: &[usize],
    j: &[usize],
) -> f64 {
    let rest: Vec<usize> = omega.iter().copied().filter(|w| !traced.contains(w)).collect();
    let ext: Vec<usize> = traced.iter().map(|&w| c.extents()[w]).collect();
    let mut acc = 0.0;
    for l in odometer(&ext) {
        let mut ii = vec![0; omega.len()];
        let mut jj = vec![0; omega.len()];
        for (p, &w) in omega.iter().enumerate() {
            if let Some(q) = rest.iter().position(|&x| x == w) {
                ii[p] = i[q];
                jj[p] = j[q];
            } else {
                let q = traced.iter().position(|&x| x == w).unwrap();
                ii[p] = l[q];
                jj[p] = l[q];
            }
        }
        acc += c.get(&doubled_index(n, omega, &ii, &jj)).unwrap();
    }
    acc
}

/// `W_1(0, i_1) W_2(j_1, i_2) .. W_last(j_last, 0)` for the chain of `omega`.
pub fn phi_entry(w: &[DMatrix<f64>], i: &[usize], j: &[usize]) -> f64 {
    let q = i.len();
    if q == 0 {
        return w[0][(0, 0)];
    }
    let mut v = w[0][(0, i[0])];
    for t in 1..q {
        v *= w[t][(j[t - 1], i[t])];
    }
    v * w[q][(j[q - 1], 0)]
}

/// `Ψ` entry from its definition: decode `v = i + α k` per position.
pub fn psi_entry(w: &[DMatrix<f64>], k: &[usize], x: &[usize], y: &[usize]) -> f64 {
    let i: Vec<usize> = x.iter().zip(k).map(|(v, kk)| v % kk).collect();
    let j: Vec<usize> = y.iter().zip(k).map(|(v, kk)| v % kk).collect();
    let same = x.iter().zip(y).zip(k).all(|((a, b), kk)| a / kk == b / kk);
    if same {
        phi_entry(w, &i, &j)
    } else {
        0.0
    }
}

/// Products of consecutive chain factors between the kept positions.
pub fn merge_chain(w: &[DMatrix<f64>], kept: &[usize]) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    let mut start = 0;
    for &cut in kept.iter().chain(std::iter::once(&(w.len() - 1))) {
        let mut m = w[start].clone();
        for f in &w[start + 1..=cut] {
            m = &m * f;
        }
        out.push(m);
        start = cut + 1;
    }
    out
}

/// Unfolding with the first `s` indices as rows (own index arithmetic): row
/// index with `i_1` fastest, column index with `i_d` fastest.
pub fn unfolding(a: &DenseTensor, s: usize) -> DMatrix<f64> {
    let dims = a.dims();
    let rows: usize = dims[..s].iter().product();
    let cols: usize = dims[s..].iter().product();
    let mut m = DMatrix::zeros(rows, cols);
    for (lin, idx) in odometer(dims).into_iter().enumerate() {
        let r = idx[..s].iter().zip(&dims[..s]).rev().fold(0, |acc, (i, n)| acc * n + i);
        let c = idx[s..].iter().zip(&dims[s..]).fold(0, |acc, (i, n)| acc * n + i);
        m[(r, c)] = a.values()[lin];
    }
    m
}

/// Singular values by one-sided Jacobi rotations, non-increasing.
pub fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut a = if m.nrows() >= m.ncols() { m.clone() } else { m.transpose() };
    let n = a.ncols();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.nrows() {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let s = sorted_singular_values(m);
    s.iter().filter(|&&x| x > tol * s[0]).count()
}

pub fn random_dense(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    let n: usize = dims.iter().product();
    DenseTensor::from_dims(dims, (0..n).map(|_| gauss(rng)).collect()).unwrap()
}
