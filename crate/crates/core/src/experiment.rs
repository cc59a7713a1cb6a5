//! Grid experiments: binary search over many (order, size, rank, repetition)
//! cells, CSV output and log-space rate fits.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::altproj::{binary_search_epsilon, APConfig};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::generators::{identity_dense, uniform_tensor, GeneratorKind};
use crate::linalg;
use crate::seed::derive_seed;
use crate::sketch::quantile;

pub const CSV_HEADER: &str = "kind,d,n,r,rep,seed,epsilon,iterations,converged,elapsed_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aggregator {
    Min,
    Median,
}

impl Aggregator {
    /// Minimum for identity tensors, median for random ones.
    pub fn for_kind(kind: GeneratorKind) -> Aggregator {
        match kind {
            GeneratorKind::Identity => Aggregator::Min,
            _ => Aggregator::Median,
        }
    }

    pub fn apply(self, values: &[f64]) -> f64 {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return f64::NAN;
        }
        match self {
            Aggregator::Min => finite.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Median => quantile(finite, 0.5),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Min => "min",
            Aggregator::Median => "median",
        })
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "min" => Ok(Aggregator::Min),
            "median" => Ok(Aggregator::Median),
            other => Err(Error::Parse(format!("unknown aggregator {other:?} (min, median)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub kind: GeneratorKind,
    pub orders: Vec<usize>,
    pub sizes: Vec<usize>,
    pub ranks: Vec<usize>,
    pub repetitions: usize,
    pub aggregator: Aggregator,
    pub base_seed: u64,
    /// Search settings; `rank` and `seed` are overwritten per cell.
    pub ap: APConfig,
    /// Independent starting points inside each repetition.
    pub restarts: usize,
    /// Largest dense tensor a cell may allocate.
    pub max_entries: usize,
    /// Wall-clock timings make the CSV nondeterministic; off by default.
    pub record_elapsed: bool,
    pub workers: Option<usize>,
}

pub const GRID_KEYS: &[&str] = &[
    "kind",
    "orders",
    "sizes",
    "ranks",
    "repetitions",
    "aggregator",
    "seed",
    "max_iter",
    "conv_tol",
    "slack",
    "max_bisections",
    "width_tol",
    "restarts",
    "max_entries",
    "record_elapsed",
    "workers",
];

impl ExperimentGrid {
    pub fn new(kind: GeneratorKind, orders: Vec<usize>, sizes: Vec<usize>, ranks: Vec<usize>) -> Self {
        ExperimentGrid {
            kind,
            orders,
            sizes,
            ranks,
            repetitions: 5,
            aggregator: Aggregator::for_kind(kind),
            base_seed: 0,
            ap: APConfig::new(1),
            restarts: 1,
            max_entries: 1_000_000,
            record_elapsed: false,
            workers: None,
        }
    }

    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        kv.check_known(GRID_KEYS)?;
        let kind: GeneratorKind = kv.require("kind")?;
        let list = |key: &str| -> Result<Vec<usize>> {
            kv.get_list(key)?
                .ok_or_else(|| Error::Parse(format!("missing required key {key:?}")))
        };
        let mut grid = ExperimentGrid::new(kind, list("orders")?, list("sizes")?, list("ranks")?);
        grid.repetitions = kv.get_or("repetitions", grid.repetitions)?;
        grid.aggregator = kv.get_or("aggregator", grid.aggregator)?;
        grid.base_seed = kv.get_or("seed", grid.base_seed)?;
        grid.ap.max_iter = kv.get_or("max_iter", grid.ap.max_iter)?;
        grid.ap.conv_tol = kv.get_or("conv_tol", grid.ap.conv_tol)?;
        grid.ap.slack = kv.get_or("slack", grid.ap.slack)?;
        grid.ap.max_bisections = kv.get_or("max_bisections", grid.ap.max_bisections)?;
        grid.ap.width_tol = kv.get_or("width_tol", grid.ap.width_tol)?;
        grid.restarts = kv.get_or("restarts", grid.restarts)?;
        grid.max_entries = kv.get_or("max_entries", grid.max_entries)?;
        grid.record_elapsed = kv.get_or("record_elapsed", grid.record_elapsed)?;
        grid.workers = kv.get("workers")?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == GeneratorKind::RandomTt {
            return Err(Error::InvalidArgument(
                "grids support identity and uniform tensors".into(),
            ));
        }
        if self.repetitions == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument("repetitions and restarts must be >= 1".into()));
        }
        if self.aggregator != Aggregator::for_kind(self.kind) {
            return Err(Error::InvalidArgument(format!(
                "{} tensors are aggregated with {}",
                self.kind,
                Aggregator::for_kind(self.kind)
            )));
        }
        if self.orders.is_empty() || self.sizes.is_empty() || self.ranks.is_empty() {
            return Err(Error::InvalidArgument("orders, sizes and ranks must be nonempty".into()));
        }
        if self.orders.iter().any(|&d| d < 2) || self.sizes.contains(&0) || self.ranks.contains(&0) {
            return Err(Error::InvalidArgument("need d >= 2, n >= 1, r >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        for &d in &self.orders {
            for &n in &self.sizes {
                let entries = (n as u128).pow(d as u32);
                if entries > self.max_entries as u128 {
                    return Err(Error::TooLarge { entries });
                }
            }
        }
        let mut ap = self.ap.clone();
        ap.rank = 1;
        ap.validate()
    }

    /// Seed of one cell; depends only on `(base, d, n, r, rep)`.
    pub fn cell_seed(&self, d: usize, n: usize, r: usize, rep: usize) -> u64 {
        derive_seed(self.base_seed, &[d as u64, n as u64, r as u64, rep as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RepLabel {
    Index(usize),
    Aggregate(Aggregator),
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepLabel::Index(i) => write!(f, "{i}"),
            RepLabel::Aggregate(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for RepLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(i) => Ok(RepLabel::Index(i)),
            Err(_) => Ok(RepLabel::Aggregate(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub kind: GeneratorKind,
    pub d: usize,
    pub n: usize,
    pub r: usize,
    pub rep: RepLabel,
    pub seed: u64,
    /// NaN when the cell failed.
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub elapsed_ms: u64,
}

impl ExperimentRow {
    pub fn is_aggregate(&self) -> bool {
        matches!(self.rep, RepLabel::Aggregate(_))
    }

    fn sort_key(&self) -> (GeneratorKind, usize, usize, usize, RepLabel) {
        (self.kind, self.d, self.n, self.r, self.rep)
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.16e},{},{},{}",
            self.kind,
            self.d,
            self.n,
            self.r,
            self.rep,
            self.seed,
            self.epsilon,
            self.iterations,
            self.converged,
            self.elapsed_ms
        )
    }
}

fn run_cell(grid: &ExperimentGrid, d: usize, n: usize, r: usize, rep: usize) -> ExperimentRow {
    let seed = grid.cell_seed(d, n, r, rep);
    let start = Instant::now();
    let outcome = (|| {
        let a = match grid.kind {
            GeneratorKind::Identity => identity_dense(n, d)?,
            _ => uniform_tensor(&vec![n; d], derive_seed(seed, &[0]))?,
        };
        let mut cfg = grid.ap.clone();
        cfg.rank = r;
        cfg.seed = derive_seed(seed, &[1]);
        binary_search_epsilon(&a, &cfg, grid.restarts)
    })();
    let elapsed_ms = if grid.record_elapsed {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let (epsilon, iterations, converged) = match outcome {
        Ok(rep) => (rep.epsilon_achieved, rep.iterations_used, rep.converged),
        Err(_) => (f64::NAN, 0, false),
    };
    ExperimentRow {
        kind: grid.kind,
        d,
        n,
        r,
        rep: RepLabel::Index(rep),
        seed,
        epsilon,
        iterations,
        converged,
        elapsed_ms,
    }
}

/// One row per repetition plus one aggregated row per `(d, n, r)`, sorted.
/// A failing cell is recorded with `epsilon = NaN` and the run continues.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<ExperimentRow>> {
    grid.validate()?;
    let mut cells = Vec::new();
    for &d in &grid.orders {
        for &n in &grid.sizes {
            for &r in &grid.ranks {
                for rep in 0..grid.repetitions {
                    cells.push((d, n, r, rep));
                }
            }
        }
    }
    let run = || -> Vec<ExperimentRow> {
        cells
            .par_iter()
            .map(|&(d, n, r, rep)| run_cell(grid, d, n, r, rep))
            .collect()
    };
    let mut rows = match grid.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut aggregated = aggregate(&rows, grid.aggregator, grid.base_seed);
    rows.append(&mut aggregated);
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(rows)
}

fn aggregate(rows: &[ExperimentRow], agg: Aggregator, seed: u64) -> Vec<ExperimentRow> {
    let mut out: Vec<ExperimentRow> = Vec::new();
    for chunk in rows.chunk_by(|a, b| (a.kind, a.d, a.n, a.r) == (b.kind, b.d, b.n, b.r)) {
        let eps: Vec<f64> = chunk.iter().map(|r| r.epsilon).collect();
        let first = &chunk[0];
        out.push(ExperimentRow {
            rep: RepLabel::Aggregate(agg),
            seed,
            epsilon: agg.apply(&eps),
            iterations: chunk.iter().map(|r| r.iterations).sum(),
            converged: chunk.iter().all(|r| r.converged),
            elapsed_ms: chunk.iter().map(|r| r.elapsed_ms).sum(),
            ..first.clone()
        });
    }
    out
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(Error::Parse(format!("unexpected CSV header {h:?}"))),
    }
    lines
        .map(|(no, line)| {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 10 {
                return Err(Error::Parse(format!("line {}: expected 10 fields", no + 1)));
            }
            let p = |i: usize| -> Result<usize> {
                f[i].parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad integer {:?}", no + 1, f[i])))
            };
            Ok(ExperimentRow {
                kind: f[0].parse()?,
                d: p(1)?,
                n: p(2)?,
                r: p(3)?,
                rep: f[4].parse()?,
                seed: f[5]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad seed", no + 1)))?,
                epsilon: f[6]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad epsilon", no + 1)))?,
                iterations: p(7)?,
                converged: f[8]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad flag", no + 1)))?,
                elapsed_ms: p(9)? as u64,
            })
        })
        .collect()
}

/// Aggregated rows when present, otherwise the raw repetitions.
pub fn curve_points(rows: &[ExperimentRow]) -> Vec<&ExperimentRow> {
    let agg: Vec<&ExperimentRow> = rows.iter().filter(|r| r.is_aggregate()).collect();
    if agg.is_empty() {
        rows.iter().collect()
    } else {
        agg
    }
}

/// `log ε ≈ c + α log(n - r) - β log r` for one `(kind, d)` family.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub kind: GeneratorKind,
    pub d: usize,
    /// `None` when `n - r` is constant over the points.
    pub alpha: Option<f64>,
    /// `None` when `r` is constant over the points.
    pub beta: Option<f64>,
    pub log_constant: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 4;

pub fn fit_rates(rows: &[ExperimentRow]) -> Result<Vec<RateFit>> {
    let mut pts: Vec<&ExperimentRow> = curve_points(rows)
        .into_iter()
        .filter(|r| r.epsilon.is_finite() && r.epsilon > 0.0 && r.n > r.r)
        .collect();
    pts.sort_by_key(|r| (r.kind, r.d));
    let mut fits = Vec::new();
    for group in pts.chunk_by(|a, b| (a.kind, a.d) == (b.kind, b.d)) {
        fits.push(fit_group(group)?);
    }
    if fits.is_empty() {
        return Err(Error::InvalidArgument("no usable points to fit".into()));
    }
    Ok(fits)
}

pub fn fit_rates_csv(text: &str) -> Result<Vec<RateFit>> {
    fit_rates(&parse_csv(text)?)
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| (x - v[0]).abs() <= 1e-12 * v[0].abs().max(1.0))
}

fn fit_group(group: &[&ExperimentRow]) -> Result<RateFit> {
    let (kind, d) = (group[0].kind, group[0].d);
    if group.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{kind} d={d}: {} points, need at least {MIN_FIT_POINTS}",
            group.len()
        )));
    }
    let gap: Vec<f64> = group.iter().map(|p| ((p.n - p.r) as f64).ln()).collect();
    let rank: Vec<f64> = group.iter().map(|p| -(p.r as f64).ln()).collect();
    let y = DVector::from_iterator(group.len(), group.iter().map(|p| p.epsilon.ln()));
    let mut columns: Vec<&[f64]> = Vec::new();
    let use_alpha = !is_constant(&gap);
    let use_beta = !is_constant(&rank);
    if use_alpha {
        columns.push(&gap);
    }
    if use_beta {
        columns.push(&rank);
    }
    let x = DMatrix::from_fn(group.len(), columns.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            columns[j - 1][i]
        }
    });
    let coef = linalg::lstsq(&x, &y, 1e-12)?;
    let resid = &y - &x * &coef;
    let mut k = 1;
    let mut next = |used: bool| {
        used.then(|| {
            k += 1;
            coef[k - 1]
        })
    };
    let alpha = next(use_alpha);
    let beta = next(use_beta);
    Ok(RateFit {
        kind,
        d,
        alpha,
        beta,
        log_constant: coef[0],
        residual: (resid.norm_squared() / group.len() as f64).sqrt(),
        points: group.len(),
    })
}
