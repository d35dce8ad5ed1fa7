//! Feasibility scans over `(g, generators)`, critical-point estimation,
//! truncation criticals, exponent fits and the quartic closed form.

mod fit;
mod quartic;
mod truncation;

pub use fit::{fit_exponent, FitOptions, GammaRelation, ExponentFit, Side};
pub use quartic::{quartic_analytic, quartic_at, quartic_m2_series, QuarticPoint, QUARTIC_GC};
pub use truncation::{ansatz_mismatch, ansatz_series, truncation_critical};

use std::fmt;
use std::io::Write;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{ParseError, ScanError};
use crate::exactalg::rational::to_f64;
use crate::exactalg::{format_rational, parse_rational};
use crate::hankel::{psd_test_exact, HankelMatrix};
use crate::par::{map_range, map_slice, Execution};

/// Evenly spaced exact values `lo, lo + step, …` up to `hi` inclusive.
pub fn grid_range(lo: &BigRational, hi: &BigRational, step: &BigRational) -> Vec<BigRational> {
    assert!(step.is_positive(), "grid step must be positive");
    let mut out = Vec::new();
    let mut x = lo.clone();
    while x <= *hi {
        out.push(x.clone());
        x += step;
    }
    out
}

/// Parse `lo:hi:step` with rational or decimal fields.
pub fn parse_range(s: &str) -> Result<Vec<BigRational>, ParseError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || ParseError::new(format!("expected lo:hi:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parse_rational(parts[0].trim())?;
    let hi = parse_rational(parts[1].trim())?;
    let step = parse_rational(parts[2].trim())?;
    if !step.is_positive() || hi < lo {
        return Err(bad());
    }
    Ok(grid_range(&lo, &hi, &step))
}

/// Axes of a scan: coupling values and one value list per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub g: Vec<BigRational>,
    /// `(symbol, values)` in generator declaration order.
    pub axes: Vec<(String, Vec<BigRational>)>,
}

impl GridSpec {
    pub fn cells_per_g(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// Axis values of flat cell `k` within one g-row (last axis fastest).
    pub fn cell_point(&self, mut k: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.axes.len()];
        for (a, (_, vals)) in self.axes.iter().enumerate().rev() {
            out[a] = vals[k % vals.len()].clone();
            k /= vals.len();
        }
        out
    }
}

/// Verdict of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cell {
    Feasible,
    Infeasible,
    /// Some entry has a vanishing denominator at this point.
    Indeterminate,
}

impl Cell {
    pub fn csv(self) -> &'static str {
        match self {
            Cell::Feasible => "1",
            Cell::Infeasible => "0",
            Cell::Indeterminate => "NA",
        }
    }
}

/// Verdicts over a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityGrid {
    pub n: usize,
    pub spec: GridSpec,
    /// Row-major: g outermost, then the axes in order.
    pub cells: Vec<Cell>,
}

impl FeasibilityGrid {
    pub fn cell(&self, gi: usize, k: usize) -> Cell {
        self.cells[gi * self.spec.cells_per_g() + k]
    }

    /// Cells of one g-row.
    pub fn row(&self, gi: usize) -> &[Cell] {
        let w = self.spec.cells_per_g();
        &self.cells[gi * w..(gi + 1) * w]
    }

    pub fn count(&self, c: Cell) -> usize {
        self.cells.iter().filter(|&&x| x == c).count()
    }

    /// Feasible intervals along the single generator axis at row `gi`, as
    /// runs of consecutive feasible grid values.
    pub fn feasible_runs(&self, gi: usize) -> Vec<(BigRational, BigRational)> {
        assert_eq!(self.spec.axes.len(), 1, "runs need a single generator axis");
        let vals = &self.spec.axes[0].1;
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (k, &c) in self.row(gi).iter().enumerate() {
            match (c == Cell::Feasible, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    out.push((vals[s].clone(), vals[k - 1].clone()));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((vals[s].clone(), vals[vals.len() - 1].clone()));
        }
        out
    }

    /// CSV with columns `g, <axes…>, feasible`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let names: Vec<&str> = self.spec.axes.iter().map(|(s, _)| s.as_str()).collect();
        writeln!(out, "g,{},feasible", names.join(","))?;
        let w = self.spec.cells_per_g();
        for (gi, g) in self.spec.g.iter().enumerate() {
            for k in 0..w {
                let pt = self.spec.cell_point(k);
                let vals: Vec<String> = pt.iter().map(format_rational).collect();
                writeln!(out, "{},{},{}", format_rational(g), vals.join(","), self.cell(gi, k).csv())?;
            }
        }
        Ok(())
    }

    /// Smallest g whose row has a feasible cell.
    pub fn min_feasible_g(&self) -> Option<BigRational> {
        (0..self.spec.g.len())
            .filter(|&gi| self.row(gi).contains(&Cell::Feasible))
            .map(|gi| self.spec.g[gi].clone())
            .min()
    }
}

/// Exact PSD verdict for one point; the blocks partition the rows.
pub fn cell_verdict(h: &HankelMatrix, blocks: &[Vec<usize>], point: &[BigRational]) -> Cell {
    let m = match h.eval(point) {
        Ok(m) => m,
        Err(_) => return Cell::Indeterminate,
    };
    for block in blocks {
        let sub: Vec<Vec<BigRational>> = block
            .iter()
            .map(|&i| block.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        match psd_test_exact(&sub) {
            Ok(v) if v.feasible => {}
            _ => return Cell::Infeasible,
        }
    }
    Cell::Feasible
}

/// Scan a Hankel matrix (variables `g` then the generators) over a grid.
/// `blocks` partitions the rows (use a single block with every row when no
/// decoupling is known).
pub fn scan_matrix(h: &HankelMatrix, blocks: &[Vec<usize>], grid: &GridSpec, exec: Execution) -> FeasibilityGrid {
    let rows = map_slice(exec, &grid.g, |g| h.specialize(0, g).ok());
    let w = grid.cells_per_g();
    let cells = map_range(exec, grid.g.len() * w, |idx| {
        let (gi, k) = (idx / w, idx % w);
        let Some(hg) = &rows[gi] else {
            return Cell::Indeterminate;
        };
        let mut point = vec![grid.g[gi].clone()];
        point.extend(grid.cell_point(k));
        cell_verdict(hg, blocks, &point)
    });
    FeasibilityGrid {
        n: h.size(),
        spec: grid.clone(),
        cells,
    }
}

/// All rows as a single block.
pub fn whole(n: usize) -> Vec<Vec<usize>> {
    vec![(0..n).collect()]
}

/// Scan the Hankel matrix of the first `n` basis words of the model.
pub fn scan_region(
    model: &crate::model::ModelSpec,
    table: &crate::reduce::MomentTable,
    n: usize,
    grid: &GridSpec,
    exec: Execution,
) -> Result<FeasibilityGrid, ScanError> {
    let spec = crate::hankel::HankelSpec::new(model.m, n);
    let h = crate::hankel::build_hankel_from(table, &spec)?;
    let blocks = spec.sector_blocks(model);
    Ok(scan_matrix(&h, &blocks, grid, exec))
}

/// A feasible interval along the single generator axis, with endpoints
/// located to within `2^-rounds` of the grid step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedInterval {
    pub g: BigRational,
    pub lo: BigRational,
    pub hi: BigRational,
}

/// Refine the endpoints of every feasible run by dyadic bisection between
/// the last feasible and first infeasible grid values.
pub fn refine_boundaries(
    h: &HankelMatrix,
    blocks: &[Vec<usize>],
    grid: &FeasibilityGrid,
    rounds: u32,
    exec: Execution,
) -> Vec<RefinedInterval> {
    let vals = &grid.spec.axes[0].1;
    let mut jobs: Vec<(usize, BigRational, BigRational)> = Vec::new();
    for gi in 0..grid.spec.g.len() {
        for (lo, hi) in grid.feasible_runs(gi) {
            jobs.push((gi, lo, hi));
        }
    }
    let two = BigRational::from_integer(2.into());
    map_slice(exec, &jobs, |(gi, lo, hi)| {
        let g = &grid.spec.g[*gi];
        let hg = h.specialize(0, g).expect("row was scanned");
        let feasible = |x: &BigRational| cell_verdict(&hg, blocks, &[g.clone(), x.clone()]) == Cell::Feasible;
        let pos = |x: &BigRational| vals.iter().position(|v| v == x).expect("grid value");
        let bisect = |mut inside: BigRational, mut outside: BigRational| {
            for _ in 0..rounds {
                let mid = (&inside + &outside) / &two;
                if feasible(&mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        let (il, ih) = (pos(lo), pos(hi));
        let new_lo = if il > 0 { bisect(lo.clone(), vals[il - 1].clone()) } else { lo.clone() };
        let new_hi = if ih + 1 < vals.len() { bisect(hi.clone(), vals[ih + 1].clone()) } else { hi.clone() };
        RefinedInterval {
            g: g.clone(),
            lo: new_lo,
            hi: new_hi,
        }
    })
}

/// Fail unless feasibility at the larger size implies feasibility at the
/// smaller one on every common cell.
pub fn check_nested(smaller: &FeasibilityGrid, larger: &FeasibilityGrid) -> Result<(), ScanError> {
    if smaller.spec != larger.spec {
        return Err(ScanError::AxisMismatch);
    }
    for (idx, (&a, &b)) in smaller.cells.iter().zip(&larger.cells).enumerate() {
        if b == Cell::Feasible && a == Cell::Infeasible {
            let w = smaller.spec.cells_per_g();
            let pt: Vec<String> = smaller.spec.cell_point(idx % w).iter().map(format_rational).collect();
            return Err(ScanError::NonNested {
                cell: format!("g={}, {}", format_rational(&smaller.spec.g[idx / w]), pt.join(", ")),
                smaller: smaller.n,
                larger: larger.n,
            });
        }
    }
    Ok(())
}

/// How a critical coupling was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FeasibleBoundary,
    TruncationRoot,
    Fit,
}

/// A critical-point estimate with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalEstimate {
    /// Best value; `None` when no boundary was found in range.
    pub g_c: Option<f64>,
    /// Exact value when known.
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact: Option<BigRational>,
    pub method: Method,
    /// Hankel size or truncation word length.
    pub size: usize,
    /// Estimate per Hankel size, smallest size first.
    pub trend: Vec<(usize, Option<f64>)>,
    pub note: String,
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&format_rational(q)),
        None => s.serialize_none(),
    }
}

impl fmt::Display for CriticalEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.exact, self.g_c) {
            (Some(q), _) => write!(f, "g_c = {}", format_rational(q))?,
            (None, Some(x)) => write!(f, "g_c ≈ {x:.6}")?,
            (None, None) => write!(f, "g_c: none found")?,
        }
        write!(f, " ({:?}, size {})", self.method, self.size)
    }
}

/// The infimum of feasible g at the largest Hankel size, with the trend
/// across sizes. Grids must share axes and be nested.
pub fn estimate_critical_point(grids: &[FeasibilityGrid]) -> Result<CriticalEstimate, ScanError> {
    if grids.is_empty() {
        return Err(ScanError::TooFewPoints { needed: 1, got: 0 });
    }
    let mut sorted: Vec<&FeasibilityGrid> = grids.iter().collect();
    sorted.sort_by_key(|g| g.n);
    for pair in sorted.windows(2) {
        check_nested(pair[0], pair[1])?;
    }
    let trend: Vec<(usize, Option<f64>)> = sorted
        .iter()
        .map(|g| (g.n, g.min_feasible_g().map(|q| to_f64(&q))))
        .collect();
    let last = sorted[sorted.len() - 1];
    let exact = last.min_feasible_g();
    let lowest_g = last.spec.g.first().cloned();
    let note = match (&exact, lowest_g) {
        (None, _) => "no feasible cell in range".to_string(),
        (Some(q), Some(lo)) if *q == lo => "feasible at the lowest scanned g: boundary lies below the range".to_string(),
        _ => "infimum of feasible g at the largest size; resolution = g step".to_string(),
    };
    Ok(CriticalEstimate {
        g_c: exact.as_ref().map(to_f64),
        exact: None,
        method: Method::FeasibleBoundary,
        size: last.n,
        trend,
        note,
    })
}

/// Is some cell of the slice at `g` feasible? The generator axes are
/// searched adaptively: a coarse pass, then zooming around the cells whose
/// elimination got furthest before failing.
pub fn slice_feasible(
    h: &HankelMatrix,
    blocks: &[Vec<usize>],
    g: &BigRational,
    ranges: &[(BigRational, BigRational)],
    coarse: usize,
    zoom_rounds: usize,
) -> Option<Vec<BigRational>> {
    let hg = h.specialize(0, g).ok()?;
    let score = |pt: &[BigRational]| -> (bool, usize) {
        let mut point = vec![g.clone()];
        point.extend_from_slice(pt);
        let Ok(m) = hg.eval(&point) else { return (false, 0) };
        let mut progress = 0;
        for block in blocks {
            let sub: Vec<Vec<BigRational>> = block
                .iter()
                .map(|&i| block.iter().map(|&j| m[i][j].clone()).collect())
                .collect();
            match psd_test_exact(&sub) {
                Ok(v) if v.feasible => progress += block.len(),
                Ok(v) => {
                    if let crate::hankel::Certificate::Violation { row } = v.certificate {
                        progress += row;
                    }
                    return (false, progress);
                }
                Err(_) => return (false, progress),
            }
        }
        (true, progress)
    };
    let mut boxes: Vec<Vec<(BigRational, BigRational)>> = vec![ranges.to_vec()];
    let steps = BigRational::from_integer((coarse.max(2) - 1).into());
    for _ in 0..=zoom_rounds {
        let mut scored: Vec<(usize, Vec<(BigRational, BigRational)>)> = Vec::new();
        for b in &boxes {
            let deltas: Vec<BigRational> = b.iter().map(|(lo, hi)| (hi - lo) / &steps).collect();
            let total = coarse.pow(b.len() as u32);
            for k in 0..total {
                let mut kk = k;
                let mut pt = Vec::with_capacity(b.len());
                for (a, (lo, _)) in b.iter().enumerate() {
                    let i = kk % coarse;
                    kk /= coarse;
                    pt.push(lo + &deltas[a] * BigRational::from_integer(i.into()));
                }
                let (ok, s) = score(&pt);
                if ok {
                    return Some(pt);
                }
                let sub: Vec<(BigRational, BigRational)> = pt
                    .iter()
                    .zip(&deltas)
                    .map(|(x, d)| (x - d, x + d))
                    .collect();
                scored.push((s, sub));
            }
        }
        scored.sort_by_key(|s| std::cmp::Reverse(s.0));
        boxes = scored.into_iter().take(3).map(|(_, b)| b).collect();
    }
    None
}

/// Bisect on g between a coupling with a feasible slice (`inside`) and one
/// without (`outside`), using [`slice_feasible`] at each step.
#[allow(clippy::too_many_arguments)]
pub fn bisect_critical(
    h: &HankelMatrix,
    blocks: &[Vec<usize>],
    mut inside: BigRational,
    mut outside: BigRational,
    ranges: &[(BigRational, BigRational)],
    coarse: usize,
    zoom_rounds: usize,
    steps: usize,
) -> BigRational {
    let two = BigRational::from_integer(2.into());
    for _ in 0..steps {
        let mid = (&inside + &outside) / &two;
        if slice_feasible(h, blocks, &mid, ranges, coarse, zoom_rounds).is_some() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
