//! Orbit sampling and grid coverage, as empirical evidence for density.
//!
//! Words in the generators are expanded best-first: points inside the box
//! come before points outside it, then shallower words before deeper ones,
//! with seeded random tie-breaks. Only generator words are used, never
//! inverses. Results are heuristic.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;

/// Points closer than this (per coordinate) are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Points with larger norm are counted as escaped and dropped.
pub const ESCAPE_NORM: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Maximum number of orbit points.
    pub budget: usize,
    /// Maximum word length.
    pub max_depth: usize,
    pub box_radius: f64,
    /// Cells per real axis.
    pub grid: usize,
    pub seed: u64,
    /// Budgets at which coverage is recorded; the final budget is always
    /// included.
    pub checkpoints: Vec<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { budget: 10_000, max_depth: usize::MAX, box_radius: 2.0, grid: 8, seed: 0, checkpoints: Vec::new() }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.budget == 0 || self.grid == 0 {
            return Err("budget and grid must be at least 1".into());
        }
        if !(self.box_radius > 0.0 && self.box_radius.is_finite()) {
            return Err("box radius must be positive".into());
        }
        Ok(())
    }

    /// Decade checkpoints up to the budget.
    pub fn with_decades(mut self) -> Self {
        let mut b = 10;
        while b < self.budget {
            self.checkpoints.push(b);
            b *= 10;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub x: Vec<Complex64>,
    /// Index of the parent point and the generator applied to it.
    pub parent: Option<(usize, usize)>,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSample {
    pub points: Vec<OrbitPoint>,
    /// Children dropped for exceeding `ESCAPE_NORM`.
    pub overflowed: usize,
}

fn inside(x: &[Complex64], r: f64) -> bool {
    x.iter().all(|z| z.re.abs() <= r && z.im.abs() <= r)
}

fn dedup_key(x: &[Complex64]) -> Vec<i128> {
    x.iter().flat_map(|z| [(z.re / DEDUP_TOL).round() as i128, (z.im / DEDUP_TOL).round() as i128]).collect()
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Priority {
    outside: bool,
    depth: usize,
    tie: u64,
    slot: usize,
}

/// Expand generator words from `start` until `cfg.budget` points are
/// collected or no unexplored point remains.
pub fn sample_orbit(fs: &[AffineMap<Complex64>], start: &[Complex64], cfg: &SimConfig) -> OrbitSample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen = HashSet::new();
    let mut pending: Vec<Option<OrbitPoint>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut points = Vec::new();
    let mut overflowed = 0;
    seen.insert(dedup_key(start));
    pending.push(Some(OrbitPoint { x: start.to_vec(), parent: None, depth: 0 }));
    heap.push(Reverse(Priority { outside: !inside(start, cfg.box_radius), depth: 0, tie: rng.gen(), slot: 0 }));
    while points.len() < cfg.budget {
        let Some(Reverse(pr)) = heap.pop() else { break };
        let point = pending[pr.slot].take().expect("each slot is popped once");
        let index = points.len();
        if point.depth < cfg.max_depth {
            for (g, f) in fs.iter().enumerate() {
                let y = f.apply(&point.x);
                let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !norm.is_finite() || norm > ESCAPE_NORM {
                    overflowed += 1;
                    continue;
                }
                if !seen.insert(dedup_key(&y)) {
                    continue;
                }
                let slot = pending.len();
                heap.push(Reverse(Priority { outside: !inside(&y, cfg.box_radius), depth: point.depth + 1, tie: rng.gen(), slot }));
                pending.push(Some(OrbitPoint { x: y, parent: Some((index, g)), depth: point.depth + 1 }));
            }
        }
        points.push(point);
    }
    OrbitSample { points, overflowed }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub budget: usize,
    pub points: usize,
    pub cells_hit: usize,
    pub cells_total: f64,
    pub coverage: f64,
    /// Fraction of sampled points outside the box.
    pub escape_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub points_sampled: usize,
    pub overflowed: usize,
    pub checkpoints: Vec<Checkpoint>,
}

impl CoverageResult {
    pub fn final_coverage(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.coverage)
    }

    pub fn is_monotone(&self) -> bool {
        self.checkpoints.windows(2).all(|w| w[0].cells_hit <= w[1].cells_hit)
    }

    /// One row per checkpoint: budget, points, coverage, escape_fraction.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["budget", "points", "coverage", "escape_fraction"]).expect("in-memory write");
        for c in &self.checkpoints {
            w.write_record([c.budget.to_string(), c.points.to_string(), c.coverage.to_string(), c.escape_fraction.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Cell of `x` in the `grid^{2n}` partition of `[−R, R]^{2n}`, coordinates
/// ordered `(Re x₁, Im x₁, …)`.
pub fn cell_of(x: &[Complex64], r: f64, grid: usize) -> Option<Vec<usize>> {
    if !inside(x, r) {
        return None;
    }
    let width = 2.0 * r / grid as f64;
    let idx = |v: f64| (((v + r) / width).floor() as usize).min(grid - 1);
    Some(x.iter().flat_map(|z| [idx(z.re), idx(z.im)]).collect())
}

/// Coverage of the prefix of `points` at each checkpoint.
pub fn coverage(points: &[Vec<Complex64>], cfg: &SimConfig) -> CoverageResult {
    let dim = points.first().map_or(0, Vec::len);
    let cells_total = (cfg.grid as f64).powi(2 * dim as i32);
    let mut marks: Vec<usize> = cfg.checkpoints.iter().copied().filter(|&b| b < cfg.budget).collect();
    marks.push(cfg.budget);
    marks.sort_unstable();
    marks.dedup();
    let mut hit = HashSet::new();
    let mut outside = 0usize;
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    for (i, x) in points.iter().enumerate() {
        match cell_of(x, cfg.box_radius, cfg.grid) {
            Some(c) => {
                hit.insert(c);
            }
            None => outside += 1,
        }
        while next < marks.len() && i + 1 == marks[next] {
            out.push(checkpoint(marks[next], i + 1, hit.len(), cells_total, outside));
            next += 1;
        }
    }
    for &b in &marks[next..] {
        out.push(checkpoint(b, points.len(), hit.len(), cells_total, outside));
    }
    CoverageResult { points_sampled: points.len(), overflowed: 0, checkpoints: out }
}

fn checkpoint(budget: usize, points: usize, cells_hit: usize, cells_total: f64, outside: usize) -> Checkpoint {
    Checkpoint {
        budget,
        points,
        cells_hit,
        cells_total,
        coverage: if cells_total > 0.0 { cells_hit as f64 / cells_total } else { 0.0 },
        escape_fraction: if points > 0 { outside as f64 / points as f64 } else { 0.0 },
    }
}

/// Sample and measure in one step.
pub fn simulate(fs: &[AffineMap<Complex64>], start: &[Complex64], cfg: &SimConfig) -> CoverageResult {
    let sample = sample_orbit(fs, start, cfg);
    let xs: Vec<Vec<Complex64>> = sample.points.into_iter().map(|p| p.x).collect();
    let mut result = coverage(&xs, cfg);
    result.overflowed = sample.overflowed;
    result
}

/// Recompute a random `fraction` of points from their parents; returns the
/// number of mismatches.
pub fn audit(fs: &[AffineMap<Complex64>], sample: &OrbitSample, fraction: f64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample
        .points
        .iter()
        .filter(|_| rng.gen_bool(fraction.clamp(0.0, 1.0)))
        .filter(|p| match p.parent {
            Some((i, g)) => fs[g].apply(&sample.points[i].x) != p.x,
            None => false,
        })
        .count()
}
