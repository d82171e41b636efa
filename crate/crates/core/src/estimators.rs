//! Monte Carlo estimates, parameter sweeps and the self-avoiding walk census.
//!
//! Sample `i` of the grid cell `(p_index, n_index)` uses the seed
//! `derive_path(seed, [p_index, n_index, i])`, so every cell and sample is
//! individually reproducible and the result does not depend on the number of
//! worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{CoinArcsOnly, Config, LazySample};
use crate::duality::{detect_circuit, dualize_on, DualLattice, DualVariant};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Region};
use crate::model::ModelSpec;
use crate::reach::crosses;
use crate::rng;

pub const DEFAULT_LEVEL: f64 = 0.95;

/// A binomial proportion with its Wilson score interval.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub successes: u64,
    pub samples: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64, level: f64) -> Result<Self> {
        let (ci_lo, ci_hi) = wilson_ci(successes, samples, level)?;
        Ok(Estimate { p_hat: successes as f64 / samples as f64, successes, samples, ci_lo, ci_hi, level })
    }

    /// Binomial standard error at the point estimate.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.samples as f64).sqrt()
    }

    /// Intervals do not overlap and this one lies above.
    pub fn above(&self, other: &Estimate) -> bool {
        self.ci_lo > other.ci_hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

/// Two-sided normal quantile for a confidence level.
pub fn z_for_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(level));
    }
    Ok(Normal::standard().inverse_cdf(0.5 + level / 2.0))
}

/// Wilson score interval, clamped to `[0, 1]`.
pub fn wilson_ci(successes: u64, samples: u64, level: f64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    if successes > samples {
        return Err(Error::TooManySuccesses { successes, samples });
    }
    let z = z_for_level(level)?;
    let n = samples as f64;
    let ph = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == samples { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo, hi))
}

/// Knobs shared by the Monte Carlo drivers.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub level: f64,
    /// Reuse the same per-edge uniforms across the `p` grid (drop the
    /// `p_index` from the stream path), so curves are coupled in `p`.
    pub common_random_numbers: bool,
    /// Count only arcs from the probability-`p` coin outcome (outward arcs for
    /// the H-model). Monotone in `p` under common random numbers.
    pub coin_arcs_only: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { level: DEFAULT_LEVEL, common_random_numbers: false, coin_arcs_only: false }
    }
}

/// Stream root of one grid cell.
pub fn cell_seed(seed: u64, p_index: u64, n_index: u64, opts: &McOptions) -> u64 {
    if opts.common_random_numbers {
        rng::derive_path(seed, &[u64::MAX, n_index])
    } else {
        rng::derive_path(seed, &[p_index, n_index])
    }
}

/// Number of samples `i < samples` for which `f(derive(cell, i))` holds.
pub fn count_cell(samples: u64, cell: u64, f: impl Fn(u64) -> bool + Sync) -> u64 {
    (0..samples).into_par_iter().filter(|&i| f(rng::derive(cell, i))).count() as u64
}

/// Reach estimate for one grid cell. See [`reach_probability`].
pub fn reach_cell(
    model: ModelSpec,
    n: u32,
    samples: u64,
    seed: u64,
    (p_index, n_index): (u64, u64),
    opts: &McOptions,
) -> Result<Estimate> {
    let model = model.validate()?;
    if n == 0 {
        return Err(Error::InvalidRegion("reach needs n >= 1".into()));
    }
    let lattice = Lattice::new(model.crossing_region(n))?;
    let cell = cell_seed(seed, p_index, n_index, opts);
    let hits = count_cell(samples, cell, |s| {
        let arcs = LazySample::new(&lattice, model, s);
        if opts.coin_arcs_only {
            crosses(&lattice, &CoinArcsOnly { inner: arcs, lattice: &lattice, model })
        } else {
            crosses(&lattice, &arcs)
        }
    });
    Estimate::from_counts(hits, samples, opts.level)
}

/// Fraction of samples in which the origin reaches the outer rim of the
/// model's window of size `n` (a quadrant box for the NE-quadrant law, a slab
/// box for the slab law, the centred box otherwise).
pub fn reach_probability(model: ModelSpec, n: u32, samples: u64, seed: u64) -> Result<Estimate> {
    reach_cell(model, n, samples, seed, (0, 0), &McOptions::default())
}

/// Fraction of H-model samples on `Box(m)` whose `U` dual holds a
/// counterclockwise circuit in the annulus between rims `n` and `m`.
pub fn circuit_probability(p: f64, n: u32, m: u32, samples: u64, seed: u64) -> Result<Estimate> {
    circuit_cell(p, n, m, samples, seed, (0, 0), &McOptions::default())
}

pub fn circuit_cell(
    p: f64,
    n: u32,
    m: u32,
    samples: u64,
    seed: u64,
    (p_index, n_index): (u64, u64),
    opts: &McOptions,
) -> Result<Estimate> {
    let model = ModelSpec::HModel { p }.validate()?;
    let annulus = Region::Annulus { inner: n, outer: m }.validate()?;
    if n == 0 {
        return Err(Error::InvalidRegion("circuit annulus needs inner >= 1".into()));
    }
    let lattice = Lattice::new(Region::Box { n: m })?;
    let dual = DualLattice::new(&lattice)?;
    let cell = cell_seed(seed, p_index, n_index, opts);
    let hits = count_cell(samples, cell, |s| {
        let cfg = Config::sample(&lattice, model, s).expect("validated model");
        let u = dualize_on(&dual, &cfg, DualVariant::U);
        detect_circuit(&u, annulus, DualVariant::U).expect("validated annulus").is_some()
    });
    Estimate::from_counts(hits, samples, opts.level)
}

/// One `(parameters, size)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub p: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: u32,
    pub samples: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl SweepRow {
    pub fn new(model: ModelSpec, n: u32, est: &Estimate, seed: u64) -> Self {
        let (p, a, b) = match model {
            ModelSpec::IndependentArcs { a, b } => (None, Some(a), Some(b)),
            m => (m.p(), None, None),
        };
        SweepRow {
            model: model.name().to_string(),
            p,
            a,
            b,
            n,
            samples: est.samples,
            successes: est.successes,
            p_hat: est.p_hat,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            seed,
        }
    }

    pub fn estimate(&self, level: f64) -> Estimate {
        Estimate {
            p_hat: self.p_hat,
            successes: self.successes,
            samples: self.samples,
            ci_lo: self.ci_lo,
            ci_hi: self.ci_hi,
            level,
        }
    }

    /// The swept parameter: `p`, or `a` for the arc process.
    pub fn param(&self) -> f64 {
        self.p.or(self.a).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    pub samples: u64,
}

pub const CSV_HEADER: [&str; 11] =
    ["model", "p", "a", "b", "n", "samples", "successes", "p_hat", "ci_lo", "ci_hi", "seed"];

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_with(out, None)
    }

    /// CSV with one extra trailing column; `extra.1` holds one value per row.
    pub fn write_csv_with<W: Write>(&self, out: W, extra: Option<(&str, &[String])>) -> Result<()> {
        if let Some((_, vals)) = extra {
            if vals.len() != self.rows.len() {
                return Err(Error::MalformedTable(format!(
                    "{} extra values for {} rows",
                    vals.len(),
                    self.rows.len()
                )));
            }
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).flexible(true).from_writer(out);
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let io = |e: csv::Error| Error::Format(e.to_string());
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        header.extend(extra.map(|e| e.0));
        w.write_record(&header).map_err(io)?;
        for (k, r) in self.rows.iter().enumerate() {
            let mut rec = vec![
                r.model.clone(),
                fmt(r.p),
                fmt(r.a),
                fmt(r.b),
                r.n.to_string(),
                r.samples.to_string(),
                r.successes.to_string(),
                r.p_hat.to_string(),
                r.ci_lo.to_string(),
                r.ci_hi.to_string(),
                r.seed.to_string(),
            ];
            rec.extend(extra.map(|e| e.1[k].clone()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let bad = |e: csv::Error| Error::MalformedTable(e.to_string());
        let header: Vec<String> = rd.headers().map_err(bad)?.iter().map(str::to_string).collect();
        if header.len() < CSV_HEADER.len() || header[..CSV_HEADER.len()] != CSV_HEADER {
            return Err(Error::MalformedTable(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(bad)?;
            let f = |k: usize| -> Result<Option<f64>> {
                match &rec[k] {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| Error::MalformedTable(format!("bad number {s:?}"))),
                }
            };
            let u = |k: usize| -> Result<u64> {
                rec[k].parse().map_err(|_| Error::MalformedTable(format!("bad count {:?}", &rec[k])))
            };
            let need = |x: Option<f64>| x.ok_or_else(|| Error::MalformedTable("missing estimate".into()));
            rows.push(SweepRow {
                model: rec[0].to_string(),
                p: f(1)?,
                a: f(2)?,
                b: f(3)?,
                n: u(4)? as u32,
                samples: u(5)?,
                successes: u(6)?,
                p_hat: need(f(7)?)?,
                ci_lo: need(f(8)?)?,
                ci_hi: need(f(9)?)?,
                seed: u(10)?,
            });
        }
        let seed = rows.first().map(|r| r.seed).unwrap_or(0);
        let samples = rows.first().map(|r| r.samples).unwrap_or(0);
        Ok(SweepTable { rows, seed, samples })
    }

    /// One JSON object per row.
    pub fn to_jsonl(&self) -> String {
        self.rows.iter().map(|r| serde_json::to_string(r).expect("row serializes") + "\n").collect()
    }

    /// Rows for size `n`, sorted by the swept parameter.
    pub fn curve(&self, n: u32) -> Vec<&SweepRow> {
        let mut v: Vec<&SweepRow> = self.rows.iter().filter(|r| r.n == n).collect();
        v.sort_by(|x, y| x.param().total_cmp(&y.param()));
        v
    }
}

/// Runs every `(model, n)` cell. `models` is the parameter grid, one law per
/// point; the grid index is the `p_index` of the stream path.
pub fn sweep(
    models: &[ModelSpec],
    sizes: &[u32],
    samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<SweepTable> {
    if models.is_empty() || sizes.is_empty() {
        return Err(Error::MalformedTable("empty sweep grid".into()));
    }
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let mut rows = Vec::with_capacity(models.len() * sizes.len());
    for (pi, &m) in models.iter().enumerate() {
        for (ni, &n) in sizes.iter().enumerate() {
            let est = reach_cell(m, n, samples, seed, (pi as u64, ni as u64), opts)?;
            rows.push(SweepRow::new(m, n, &est, seed));
        }
    }
    Ok(SweepTable { rows, seed, samples })
}

/// Parameter where two sampled curves cross, by linear interpolation between
/// the first pair of grid points where their difference changes sign.
pub fn crossing_of_curves(xs: &[f64], f: &[f64], g: &[f64]) -> Option<f64> {
    let d: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    for k in 0..d.len().saturating_sub(1) {
        let (d0, d1) = (d[k], d[k + 1]);
        if d0 * d1 < 0.0 {
            return Some(xs[k] + (xs[k + 1] - xs[k]) * d0 / (d0 - d1));
        }
        if d1 == 0.0 && d0 != 0.0 {
            // touch at a grid point: only a crossing if the sign flips after it
            if let Some(&d2) = d.get(k + 2) {
                if d0 * d2 < 0.0 {
                    return Some(xs[k + 1]);
                }
            }
        }
    }
    None
}

/// Where the reach curves for sizes `n1` and `n2` cross.
pub fn crossing_point(table: &SweepTable, n1: u32, n2: u32) -> Result<Option<f64>> {
    let (c1, c2) = (table.curve(n1), table.curve(n2));
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::MalformedTable(format!("sizes {n1} and {n2} must both be present")));
    }
    let xs: Vec<f64> = c1.iter().map(|r| r.param()).collect();
    let xs2: Vec<f64> = c2.iter().map(|r| r.param()).collect();
    if xs != xs2 {
        return Err(Error::MalformedTable("sizes were swept over different grids".into()));
    }
    let f: Vec<f64> = c1.iter().map(|r| r.p_hat).collect();
    let g: Vec<f64> = c2.iter().map(|r| r.p_hat).collect();
    Ok(crossing_of_curves(&xs, &f, &g))
}

/// Largest length the census will enumerate.
pub const SAW_MAX_LEN: usize = 20;

/// Exact numbers of self-avoiding walks from the origin, by length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawCensus {
    /// `counts[L - 1]` walks of length `L`.
    pub counts: Vec<u64>,
}

impl SawCensus {
    pub fn count(&self, len: usize) -> Option<u64> {
        len.checked_sub(1).and_then(|k| self.counts.get(k).copied())
    }

    pub fn mu_hat(&self, len: usize) -> Option<f64> {
        self.count(len).map(|c| (c as f64).powf(1.0 / len as f64))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("length,count,mu_hat\n");
        for (k, c) in self.counts.iter().enumerate() {
            s += &format!("{},{},{}\n", k + 1, c, self.mu_hat(k + 1).unwrap());
        }
        s
    }
}

/// Counts self-avoiding walks of every length up to `max_len` by depth-first
/// enumeration. Walks are counted with a fixed first step and multiplied by 4.
pub fn saw_census(max_len: usize) -> Result<SawCensus> {
    if max_len > SAW_MAX_LEN {
        return Err(Error::BudgetExceeded { requested: max_len, cap: SAW_MAX_LEN });
    }
    if max_len == 0 {
        return Ok(SawCensus { counts: Vec::new() });
    }
    let side = 2 * max_len + 3;
    let c0 = (max_len + 1) * side + max_len + 1;
    let dirs = [1isize, side as isize, -1, -(side as isize)];
    // first step east; split the work on the second step
    let mut counts = [1isize, side as isize, -(side as isize)]
        .par_iter()
        .map(|&d| {
            let mut counts = vec![0u64; max_len];
            if max_len < 2 {
                return counts;
            }
            let mut seen = vec![false; side * side];
            let c2 = (c0 as isize + 1 + d) as usize;
            for c in [c0, c0 + 1, c2] {
                seen[c] = true;
            }
            counts[1] = 1;
            dfs(c2, 2, max_len, &dirs, &mut seen, &mut counts);
            counts
        })
        .reduce(
            || vec![0u64; max_len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts[0] = 1;
    Ok(SawCensus { counts: counts.into_iter().map(|c| 4 * c).collect() })
}

fn dfs(at: usize, len: usize, max_len: usize, dirs: &[isize; 4], seen: &mut [bool], counts: &mut [u64]) {
    if len == max_len {
        return;
    }
    for &d in dirs {
        let nxt = (at as isize + d) as usize;
        if !seen[nxt] {
            seen[nxt] = true;
            counts[len] += 1;
            dfs(nxt, len + 1, max_len, dirs, seen, counts);
            seen[nxt] = false;
        }
    }
}
