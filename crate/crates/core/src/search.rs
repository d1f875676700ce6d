//! Brute-force search for nearly isospectral neighbours of a quadrilateral.
//!
//! `V3` and `V4` are moved independently over small square grids ("h-range")
//! centred at their reference positions. A candidate is accepted when its
//! spectrum, rescaled so that the first eigenvalues agree, is within
//! `epsilon` of the reference spectrum in relative 2-norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, Scheme, KAPPA_UNIFORM};
use crate::error::{Error, Result};
use crate::geometry::{Point, Quadrilateral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Side of the two vertex boxes.
    pub l: f64,
    /// Grid step inside the boxes.
    pub h: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub kappa: f64,
    /// Skip candidates whose area differs from the reference by more than
    /// `area_tol` (relative) before computing any spectrum.
    pub area_prefilter: bool,
    pub area_tol: f64,
    /// Worker threads; `Some(0)` runs sequentially, `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            l: 0.1,
            h: 0.0036,
            epsilon: 1e-4,
            scheme: Scheme::Sp,
            kappa: KAPPA_UNIFORM,
            area_prefilter: false,
            area_tol: 1e-3,
            threads: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= self.l) {
            return Err(Error::InvalidStep { h: self.h, l: self.l });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.area_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "area_tol must be >= 0, got {}",
                self.area_tol
            )));
        }
        Ok(())
    }
}

/// The ordered h-range around a reference quadrilateral.
///
/// Offsets are `k h` with `|k h| <= l / 2`. Enumeration order is `V3` outer,
/// `V4` inner, and for each vertex `y` outer, `x` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct HRange {
    pub center: Quadrilateral,
    pub offsets: Vec<f64>,
}

pub fn enumerate_hrange(q_star: &Quadrilateral, l: f64, h: f64) -> Result<HRange> {
    if !(h > 0.0 && h <= l) {
        return Err(Error::InvalidStep { h, l });
    }
    // the small slack keeps exact multiples like l = 2h on the grid
    let k_max = (l / (2.0 * h) * (1.0 + 1e-12)).floor() as i64;
    let offsets = (-k_max..=k_max).map(|k| k as f64 * h).collect();
    Ok(HRange {
        center: *q_star,
        offsets,
    })
}

impl HRange {
    pub fn per_axis(&self) -> usize {
        self.offsets.len()
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(4)
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Member number `index` in enumeration order.
    pub fn get(&self, index: usize) -> Quadrilateral {
        let n = self.per_axis();
        let dx4 = self.offsets[index % n];
        let dy4 = self.offsets[index / n % n];
        let dx3 = self.offsets[index / (n * n) % n];
        let dy3 = self.offsets[index / (n * n * n)];
        let c = &self.center;
        Quadrilateral::new(c.alpha + dx3, c.beta + dy3, c.gamma + dx4, c.delta + dy4)
    }

    pub fn iter(&self) -> impl Iterator<Item = Quadrilateral> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// `c = lambda_1 / lambda*_1` and the relative distance of `lambda` from
/// `c lambda*`.
pub fn epsilon_error(lambdas: &[f64; 4], lambdas_star: &[f64; 4]) -> (f64, f64) {
    let c = lambdas[0] / lambdas_star[0];
    let num: f64 = lambdas
        .iter()
        .zip(lambdas_star)
        .map(|(l, s)| (l - c * s).powi(2))
        .sum();
    let den: f64 = lambdas_star.iter().map(|s| s * s).sum();
    (c, (num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub quad: Quadrilateral,
    pub c: f64,
    pub lambdas: [f64; 4],
    pub err: f64,
    /// Area of the `sqrt(c)`-scaled domain, `c * area(quad)`.
    pub area: f64,
    /// Perimeter of the `sqrt(c)`-scaled domain, `sqrt(c) * perimeter(quad)`.
    pub perimeter: f64,
    /// Position in the h-range enumeration.
    pub index: usize,
}

impl Candidate {
    /// Vertices `V1..V4` of the `sqrt(c)`-scaled domain, whose spectrum is
    /// compared with the reference one.
    pub fn scaled_vertices(&self) -> [Point; 4] {
        let r = self.c.sqrt();
        self.quad.vertices().map(|v| Point::new(r * v.x, r * v.y))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub enumerated: usize,
    pub evaluated: usize,
    pub invalid: usize,
    pub complex_spectrum: usize,
    pub prefiltered: usize,
    pub accepted: usize,
    /// Accepted candidates with pairwise distinct spectra (within 1e-9 relative).
    pub distinct_spectra: usize,
    pub share_area: usize,
    pub share_perimeter: usize,
}

impl SearchStats {
    fn merge(&mut self, other: &SearchStats) {
        self.enumerated += other.enumerated;
        self.evaluated += other.evaluated;
        self.invalid += other.invalid;
        self.complex_spectrum += other.complex_spectrum;
        self.prefiltered += other.prefiltered;
        self.accepted += other.accepted;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub star: Quadrilateral,
    pub lambdas_star: [f64; 4],
    pub star_area: f64,
    pub star_perimeter: f64,
    /// Accepted candidates in enumeration order.
    pub candidates: Vec<Candidate>,
    pub stats: SearchStats,
}

/// Relative tolerance for treating two spectra as the same.
pub const SPECTRUM_DEDUP_TOL: f64 = 1e-9;

pub fn run_search(q_star: &Quadrilateral, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let disc = Discretization::new(cfg.scheme, cfg.kappa)?;
    let lambdas_star = disc.eigenvalues(q_star)?;
    let star_area = q_star.area();
    let star_perimeter = q_star.perimeter();
    let range = enumerate_hrange(q_star, cfg.l, cfg.h)?;
    let n = range.per_axis();
    let block = n * n * n;

    // one block per outer offset; results are merged in block order
    let run_block = |b: usize| -> (Vec<Candidate>, SearchStats) {
        let mut found = Vec::new();
        let mut stats = SearchStats::default();
        for index in b * block..(b + 1) * block {
            stats.enumerated += 1;
            let quad = range.get(index);
            if quad.validate().is_err() {
                stats.invalid += 1;
                continue;
            }
            let area = quad.area();
            if cfg.area_prefilter && ((area - star_area) / star_area).abs() > cfg.area_tol {
                stats.prefiltered += 1;
                continue;
            }
            stats.evaluated += 1;
            let lambdas = match disc.eigenvalues(&quad) {
                Ok(l) => l,
                Err(Error::ComplexSpectrum { .. }) => {
                    stats.complex_spectrum += 1;
                    continue;
                }
                Err(_) => {
                    stats.invalid += 1;
                    continue;
                }
            };
            let (c, err) = epsilon_error(&lambdas, &lambdas_star);
            if err <= cfg.epsilon {
                stats.accepted += 1;
                found.push(Candidate {
                    quad,
                    c,
                    lambdas,
                    err,
                    area: c * area,
                    perimeter: c.sqrt() * quad.perimeter(),
                    index,
                });
            }
        }
        (found, stats)
    };

    let blocks: Vec<(Vec<Candidate>, SearchStats)> = match cfg.threads {
        Some(0) => (0..n).map(run_block).collect(),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| (0..n).into_par_iter().map(run_block).collect()),
        None => (0..n).into_par_iter().map(run_block).collect(),
    };

    let mut stats = SearchStats::default();
    let mut candidates = Vec::new();
    for (found, s) in blocks {
        stats.merge(&s);
        candidates.extend(found);
    }
    stats.distinct_spectra = count_distinct_spectra(&candidates);
    stats.share_area = candidates
        .iter()
        .filter(|c| ((c.area - star_area) / star_area).abs() <= cfg.area_tol)
        .count();
    stats.share_perimeter = candidates
        .iter()
        .filter(|c| ((c.perimeter - star_perimeter) / star_perimeter).abs() <= cfg.area_tol)
        .count();

    Ok(SearchResult {
        star: *q_star,
        lambdas_star,
        star_area,
        star_perimeter,
        candidates,
        stats,
    })
}

fn count_distinct_spectra(candidates: &[Candidate]) -> usize {
    let same = |a: &[f64; 4], b: &[f64; 4]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= SPECTRUM_DEDUP_TOL * x.abs().max(y.abs()))
    };
    let mut reps: Vec<[f64; 4]> = Vec::new();
    for c in candidates {
        if !reps.iter().any(|r| same(r, &c.lambdas)) {
            reps.push(c.lambdas);
        }
    }
    reps.len()
}
