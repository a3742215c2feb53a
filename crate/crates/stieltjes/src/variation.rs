//! Total variation of represented functions.
//!
//! The variation splits into a continuous part (integral of |f_c'|, computed
//! exactly on monotone cells of the catalogue pieces) and a jump part (sum
//! of |sig_minus| + |sig_plus| over all jump records).  Value overrides are
//! measure-zero value changes and are not charged.
//!
//! For pieces whose monotonicity structure cannot be resolved in closed
//! form, the engine falls back to derivative sign scanning cross-checked by
//! adaptive quadrature of |f'|; the result then carries a wider enclosure.
//! Pieces whose derivative blows up beyond the magnitude budget without the
//! quadrature converging are flagged as suspected infinite variation.

use crate::error::{Error, Result};
use crate::num;
use crate::repfunc::{JumpRecord, JumpSeries, RepFunc, SmoothPiece};
use crate::expr::Expr;

/// Strictly increasing points spanning the whole domain.
#[derive(Debug, Clone)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>, domain: (f64, f64)) -> Result<Partition> {
        if points.len() < 2 {
            return Err(Error::invariant("/partition", "a partition needs at least two points"));
        }
        if points[0] != domain.0 || points[points.len() - 1] != domain.1 {
            return Err(Error::invariant(
                "/partition",
                "a partition must start at a and end at b",
            ));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invariant("/partition", "points must be strictly increasing"));
            }
        }
        Ok(Partition { points })
    }

    pub fn uniform(domain: (f64, f64), cells: usize) -> Partition {
        let n = cells.max(1);
        let pts = (0..=n)
            .map(|k| domain.0 + (domain.1 - domain.0) * k as f64 / n as f64)
            .collect();
        Partition { points: pts }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// A refinement containing all points of `self` plus the given extras.
    pub fn refine(&self, extra: &[f64]) -> Partition {
        let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
        let mut pts = self.points.clone();
        pts.extend(extra.iter().copied().filter(|&t| t > a && t < b));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Partition { points: pts }
    }
}

/// Sum of absolute increments of f along the partition.
pub fn partition_sum(f: &RepFunc, tau: &Partition) -> Result<f64> {
    let mut acc = 0.0;
    let mut prev = f.eval(tau.points[0])?;
    for &t in &tau.points[1..] {
        let v = f.eval(t)?;
        acc += (v - prev).abs();
        prev = v;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct VariationResult {
    /// Best value; meaningless (NaN) when `infinite_suspected` is set.
    pub value: f64,
    /// Certified-up-to-quadrature enclosure of the true variation.
    pub lo: f64,
    pub hi: f64,
    /// Variation of the continuous part.
    pub cont_part: f64,
    /// Total jump mass |sig_minus| + |sig_plus|.
    pub jump_part: f64,
    pub infinite_suspected: bool,
}

pub const MAGNITUDE_BUDGET: f64 = 1e6;

struct PieceVar {
    lower: f64,
    value: f64,
    lo: f64,
    hi: f64,
    suspected: bool,
}

fn piece_variation(p: &SmoothPiece, quad_tol: f64, budget: f64) -> PieceVar {
    let (breaks, exact) = p.expr.monotone_breaks(p.lo, p.hi);
    let mut cells = Vec::with_capacity(breaks.len() + 2);
    cells.push(p.lo);
    cells.extend(breaks);
    cells.push(p.hi);
    let mut lower = 0.0;
    for w in cells.windows(2) {
        lower += (p.expr.value(w[1]) - p.expr.value(w[0])).abs();
    }
    if exact {
        let slack = 1e-13 * (1.0 + lower.abs());
        return PieceVar { lower, value: lower, lo: lower - slack, hi: lower + slack, suspected: false };
    }
    // scan-based cells: cross-check against adaptive quadrature of |f'|
    let mut q_total = 0.0;
    let mut q_err = 0.0;
    let mut suspected = false;
    let span = p.hi - p.lo;
    for w in cells.windows(2) {
        let q = num::adaptive(
            &|t| p.expr.deriv(t).abs(),
            w[0],
            w[1],
            quad_tol * (w[1] - w[0]) / span,
            42,
        );
        q_total += q.value;
        q_err += q.err;
        if !q.converged && q.peak > budget {
            // the piece is already condemned; the remaining cells cannot
            // un-suspect it and their quadratures may be equally hostile
            suspected = true;
            break;
        }
    }
    let value = q_total.max(lower);
    let hi = (q_total + q_err).max(lower);
    PieceVar { lower, value, lo: lower.max(q_total - q_err).min(hi), hi, suspected }
}

pub fn total_variation(f: &RepFunc) -> Result<VariationResult> {
    total_variation_with(f, 1e-10, MAGNITUDE_BUDGET)
}

pub fn total_variation_with(f: &RepFunc, quad_tol: f64, budget: f64) -> Result<VariationResult> {
    let mut cont = 0.0;
    let mut lo = 0.0;
    let mut hi = 0.0;
    let mut lower = 0.0;
    let mut suspected = false;
    for p in f.pieces() {
        let pv = piece_variation(p, quad_tol, budget);
        cont += pv.value;
        lo += pv.lo;
        hi += pv.hi;
        lower += pv.lower;
        suspected |= pv.suspected;
    }
    let jump: f64 = f.jumps().iter().map(|j| j.left.abs() + j.right.abs()).sum();
    let tail = f.tail();
    if suspected {
        return Ok(VariationResult {
            value: f64::NAN,
            lo: lower + jump,
            hi: f64::INFINITY,
            cont_part: f64::NAN,
            jump_part: jump,
            infinite_suspected: true,
        });
    }
    Ok(VariationResult {
        value: cont + jump,
        lo: lo + jump,
        hi: hi + jump + tail,
        cont_part: cont,
        jump_part: jump,
        infinite_suspected: false,
    })
}

/// Downward movement of f: zero exactly when f is nondecreasing.  Computed
/// as the negative-part mass of increments on monotone cells plus negative
/// jump parts (an estimate on pieces that need derivative scanning).
pub fn increasing_defect(f: &RepFunc) -> f64 {
    let mut defect = 0.0;
    for p in f.pieces() {
        let (breaks, _) = p.expr.monotone_breaks(p.lo, p.hi);
        let mut cells = Vec::with_capacity(breaks.len() + 2);
        cells.push(p.lo);
        cells.extend(breaks);
        cells.push(p.hi);
        for w in cells.windows(2) {
            let d = p.expr.value(w[1]) - p.expr.value(w[0]);
            if d < 0.0 {
                defect -= d;
            }
        }
    }
    for j in f.jumps() {
        if j.left < 0.0 {
            defect -= j.left;
        }
        if j.right < 0.0 {
            defect -= j.right;
        }
    }
    defect + f.tail().min(0.0).abs()
}

pub fn ensure_increasing(f: &RepFunc, tol: f64) -> Result<()> {
    let defect = increasing_defect(f);
    if defect > tol {
        Err(Error::NotIncreasing { defect })
    } else {
        Ok(())
    }
}

/// Jordan decomposition data: the running variation function and the
/// downward component.  Both are nondecreasing, vanish at a, and satisfy
/// f = f(a) + upward - downward at non-override points, where
/// upward = (variation + (f - f(a))) / 2.  The first component returned is
/// the running variation t -> V(f; [a, t]); the second is the downward
/// part nu = (variation - (f - f(a))) / 2 scaled by ... see below.
///
/// Concretely: returns (pi, nu) with pi(t) the running total variation and
/// nu = pi - (f - f(a)), so f = f(a) + pi - nu with pi, nu nondecreasing.
pub fn variation_function(f: &RepFunc) -> Result<(RepFunc, RepFunc)> {
    let tv = total_variation(f)?;
    if tv.infinite_suspected {
        return Err(Error::InfiniteVariation);
    }
    let (a, b) = f.domain();
    let mut pieces = Vec::new();
    let mut run = 0.0; // accumulated continuous variation at current cell start
    for p in f.pieces() {
        let (breaks, _) = p.expr.monotone_breaks(p.lo, p.hi);
        let mut cells = Vec::with_capacity(breaks.len() + 2);
        cells.push(p.lo);
        cells.extend(breaks);
        cells.push(p.hi);
        for w in cells.windows(2) {
            let v0 = p.expr.value(w[0]);
            let v1 = p.expr.value(w[1]);
            let up = v1 >= v0;
            let expr = if up {
                Expr::Sum(vec![p.expr.clone(), Expr::constant(run - v0)]).simplify()
            } else {
                Expr::Sum(vec![
                    Expr::Scale { c: -1.0, arg: Box::new(p.expr.clone()) },
                    Expr::constant(run + v0),
                ])
                .simplify()
            };
            pieces.push(SmoothPiece { lo: w[0], hi: w[1], expr });
            run += (v1 - v0).abs();
        }
    }
    let jumps: Vec<JumpRecord> = f
        .explicit_jumps()
        .iter()
        .map(|j| JumpRecord { loc: j.loc.clone(), left: j.left.abs(), right: j.right.abs() })
        .collect();
    let series: Vec<JumpSeries> = f
        .series()
        .iter()
        .map(|s| JumpSeries { amp: s.amp.abs(), q: s.q.abs(), ..s.clone() })
        .collect();
    let pi = RepFunc::new((a, b), 0.0, pieces, jumps, series, Vec::new(), f.series_tol())?;
    let base = RepFunc::constant(a, b, f.core_value(a));
    let nu = pi.sub(&f.without_overrides())?.add(&base)?;
    Ok((pi, nu))
}

/// Measure of a finite disjoint union of open intervals under the monotone
/// integrator g: the sum of g(v-) - g(u+).
pub fn g_measure_open(g: &RepFunc, intervals: &[(f64, f64)]) -> Result<f64> {
    ensure_increasing(g, 1e-10)?;
    let (a, b) = g.domain();
    let mut sorted: Vec<(f64, f64)> = intervals.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (i, &(u, v)) in sorted.iter().enumerate() {
        if !(u < v) {
            return Err(Error::invariant(
                format!("/intervals/{i}"),
                "interval must have positive length",
            ));
        }
        if u < a || v > b {
            return Err(Error::invariant(format!("/intervals/{i}"), "interval outside the domain"));
        }
        if i > 0 && sorted[i - 1].1 > u {
            return Err(Error::invariant(format!("/intervals/{i}"), "intervals must be disjoint"));
        }
    }
    let mut acc = 0.0;
    for &(u, v) in &sorted {
        acc += g.left_limit(v)? - g.right_limit(u)?;
    }
    Ok(acc)
}
