//! Power-law fits `value ≈ c₀ + c₁·|g − g_c|^p` near a critical point.
//!
//! The linear parameters are eliminated exactly (variable projection), so
//! only `p` — and `g_c` when it is not fixed — are searched: a multistart
//! grid followed by golden-section refinement, alternating coordinates when
//! both are free. Everything is deterministic.

use serde::Serialize;

use crate::error::ScanError;

/// How the fitted quantity relates to the free energy, which fixes the
/// string susceptibility exponent `γ` from the power (`F₀ ~ x^{2−γ}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaRelation {
    /// The data behaves like `dF₀/dg` (e.g. `m₂` for the two-matrix
    /// models): `γ = 1 − p`.
    FirstDerivative,
    /// The data behaves like `d²F₀/dg²`: `γ = −p`.
    SecondDerivative,
}

/// Which side of `g_c` the data lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// All sample couplings satisfy `g > g_c`.
    Above,
    /// All sample couplings satisfy `g < g_c`.
    Below,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitOptions {
    /// Fix `g_c` instead of fitting it.
    pub gc: Option<f64>,
    pub side: Side,
    pub relation: GammaRelation,
    /// Search interval for `p`.
    pub p_range: (f64, f64),
    /// Free-text constraint (e.g. `m4=3`) echoed into the result.
    pub level: Option<String>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            gc: None,
            side: Side::Above,
            relation: GammaRelation::FirstDerivative,
            p_range: (0.05, 3.0),
            level: None,
        }
    }
}

/// Result of a power-law fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub gc: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub p: f64,
    pub gamma: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub points: usize,
    pub gc_fitted: bool,
    pub level: Option<String>,
    pub relation: GammaRelation,
}

/// Multistart values of `p`.
const STARTS: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];

/// Least-squares `(c₀, c₁, sum of squared residuals)` for fixed `g_c`, `p`.
fn project(points: &[(f64, f64)], gc: f64, p: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let xs: Vec<f64> = points.iter().map(|&(g, _)| (g - gc).abs().powf(p)).collect();
    for (x, &(_, y)) in xs.iter().zip(points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < f64::MIN_POSITIVE {
        return (sy / n, 0.0, f64::INFINITY);
    }
    let c1 = (n * sxy - sx * sy) / det;
    let c0 = (sy - c1 * sx) / n;
    let ss = xs
        .iter()
        .zip(points)
        .map(|(x, &(_, y))| {
            let r = y - c0 - c1 * x;
            r * r
        })
        .sum();
    (c0, c1, ss)
}

/// Minimise a unimodal-ish function on `[lo, hi]` by golden sections.
fn golden(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Grid search then golden refinement around the best grid point.
fn minimise_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, grid: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, lo);
    for &x in grid {
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.iter().position(|&x| x == best.1).unwrap_or(0);
    let a = if k == 0 { lo } else { sorted[k - 1] };
    let b = if k + 1 == sorted.len() { hi } else { sorted[k + 1] };
    golden(f, a, b, 80)
}

fn p_grid(range: (f64, f64)) -> Vec<f64> {
    let mut g: Vec<f64> = STARTS.iter().copied().filter(|p| *p > range.0 && *p < range.1).collect();
    let steps = 60;
    for i in 0..=steps {
        g.push(range.0 + (range.1 - range.0) * i as f64 / steps as f64);
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Fit `value ≈ c₀ + c₁·|g − g_c|^p` to boundary points.
pub fn fit_exponent(points: &[(f64, f64)], opts: &FitOptions) -> Result<ExponentFit, ScanError> {
    let needed = if opts.gc.is_some() { 3 } else { 8 };
    if points.len() < needed.max(8) {
        return Err(ScanError::TooFewPoints {
            needed: needed.max(8),
            got: points.len(),
        });
    }
    let inc = points.windows(2).all(|w| w[1].0 > w[0].0);
    let dec = points.windows(2).all(|w| w[1].0 < w[0].0);
    if !inc && !dec {
        return Err(ScanError::NonMonotone);
    }
    let gmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let gmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = gmax - gmin;
    let pg = p_grid(opts.p_range);
    let ss = |gc: f64, p: f64| project(points, gc, p).2;
    let best_p = |gc: f64| minimise_1d(&|p| ss(gc, p), opts.p_range.0, opts.p_range.1, &pg);
    let (gc, p) = match opts.gc {
        Some(gc) => (gc, best_p(gc)),
        None => {
            // Parametrise g_c by its log-distance to the nearest sample.
            let to_gc = |t: f64| match opts.side {
                Side::Above => gmin - span * t.exp(),
                Side::Below => gmax + span * t.exp(),
            };
            let (tlo, thi) = (-16.0f64, 1.0f64);
            let tgrid: Vec<f64> = (0..=68).map(|i| tlo + (thi - tlo) * i as f64 / 68.0).collect();
            let profile = |t: f64| {
                let gc = to_gc(t);
                ss(gc, best_p(gc))
            };
            let mut t = minimise_1d(&profile, tlo, thi, &tgrid);
            let mut p = best_p(to_gc(t));
            // Coordinate polish on the joint objective.
            for _ in 0..4 {
                let pp = p;
                t = golden(&|t| ss(to_gc(t), pp), t - 0.5, t + 0.5, 60);
                let tt = t;
                p = golden(&|p| ss(to_gc(tt), p), (p - 0.1).max(opts.p_range.0), (p + 0.1).min(opts.p_range.1), 60);
            }
            (to_gc(t), p)
        }
    };
    let (c0, c1, s) = project(points, gc, p);
    let gamma = match opts.relation {
        GammaRelation::FirstDerivative => 1.0 - p,
        GammaRelation::SecondDerivative => -p,
    };
    Ok(ExponentFit {
        gc,
        offset: c0,
        amplitude: c1,
        p,
        gamma,
        residual: (s / points.len() as f64).sqrt(),
        points: points.len(),
        gc_fitted: opts.gc.is_none(),
        level: opts.level.clone(),
        relation: opts.relation,
    })
}
