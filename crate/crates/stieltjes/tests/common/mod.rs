//! Shared fixture builders for the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stieltjes::expr::Expr;
use stieltjes::repfunc::{JumpRecord, Loc, OverridePt, RepFunc, SmoothPiece};

pub const SERIES_TOL: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Assemble a function from (lo, hi, expr) pieces and (t, left, right) jump
/// triples; panics on invalid structure (fixtures are meant to be valid).
pub fn func(
    dom: (f64, f64),
    c0: f64,
    pieces: Vec<(f64, f64, Expr)>,
    jumps: Vec<(f64, f64, f64)>,
) -> RepFunc {
    RepFunc::new(
        dom,
        c0,
        pieces
            .into_iter()
            .map(|(lo, hi, expr)| SmoothPiece { lo, hi, expr })
            .collect(),
        jumps
            .into_iter()
            .map(|(t, left, right)| JumpRecord { loc: Loc::from_value(t), left, right })
            .collect(),
        Vec::new(),
        Vec::new(),
        SERIES_TOL,
    )
    .unwrap()
}

pub fn with_override(f: &RepFunc, t: f64, value: f64) -> RepFunc {
    RepFunc::new(
        f.domain(),
        f.c0(),
        f.pieces().to_vec(),
        f.explicit_jumps().to_vec(),
        f.series().to_vec(),
        vec![OverridePt { loc: Loc::from_value(t), value }],
        SERIES_TOL,
    )
    .unwrap()
}

pub fn step(dom: (f64, f64), c: f64) -> RepFunc {
    RepFunc::unit_jump(dom.0, dom.1, c).unwrap()
}

pub fn poly(dom: (f64, f64), coeffs: &[f64]) -> RepFunc {
    RepFunc::from_expr(dom.0, dom.1, Expr::Poly(coeffs.to_vec()))
}

pub fn constant(dom: (f64, f64), c: f64) -> RepFunc {
    RepFunc::constant(dom.0, dom.1, c)
}

/// Interior locations on a coarse exact-decimal lattice, so independently
/// drawn fixtures can collide on purpose.
pub const JUMP_POOL: [f64; 6] = [0.2, 0.3, 0.45, 0.6, 0.7, 0.85];

fn random_expr(r: &mut ChaCha8Rng) -> Expr {
    match r.gen_range(0..3) {
        0 => Expr::Poly(vec![
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
        ]),
        1 => Expr::Sin {
            amp: r.gen_range(-1.0..1.0),
            omega: r.gen_range(0.5..4.0),
            phase: r.gen_range(-1.0..1.0),
        },
        _ => Expr::Cos {
            amp: r.gen_range(-1.0..1.0),
            omega: r.gen_range(0.5..4.0),
            phase: r.gen_range(-1.0..1.0),
        },
    }
}

/// A bounded-variation function on [0,1]: one or two smooth cells plus up to
/// `max_jumps` jumps drawn from the shared lattice (plus `forced` locations).
pub fn random_bv(r: &mut ChaCha8Rng, max_jumps: usize, forced: &[f64]) -> RepFunc {
    let dom = (0.0, 1.0);
    let pieces = if r.gen_bool(0.5) {
        vec![(0.0, 1.0, random_expr(r))]
    } else {
        // the continuous part must agree across the cell seam (jumps are
        // carried separately), so shift the second piece to match
        let e1 = random_expr(r);
        let e2 = random_expr(r);
        let shift = e1.value(0.5) - e2.value(0.5);
        let e2 = Expr::Sum(vec![e2, Expr::constant(shift)]);
        vec![(0.0, 0.5, e1), (0.5, 1.0, e2)]
    };
    let mut locs: Vec<f64> = forced.to_vec();
    let extra = r.gen_range(0..=max_jumps.saturating_sub(forced.len()));
    for _ in 0..extra {
        let t = JUMP_POOL[r.gen_range(0..JUMP_POOL.len())];
        if !locs.contains(&t) {
            locs.push(t);
        }
    }
    let jumps = locs
        .into_iter()
        .map(|t| {
            let (l, rr) = match r.gen_range(0..3) {
                0 => (0.0, r.gen_range(-1.0..1.0)),
                1 => (r.gen_range(-1.0..1.0), 0.0),
                _ => (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)),
            };
            (t, l, rr)
        })
        .collect();
    func(dom, r.gen_range(-1.0..1.0), pieces, jumps)
}

/// Restriction of `f` to [u, v].  A jump exactly at u keeps only its right
/// half (the left half folds into the starting constant, like all mass below
/// u); a jump exactly at v keeps only its left half.  Series-free inputs
/// only.
pub fn restrict(f: &RepFunc, u: f64, v: f64) -> RepFunc {
    assert!(f.series().is_empty() && f.overrides().is_empty());
    let mut c0 = f.c0();
    let mut jumps = Vec::new();
    for j in f.explicit_jumps() {
        let t = j.loc.t;
        if t < u {
            c0 += j.left + j.right;
        } else if t == u {
            c0 += j.left;
            jumps.push((t, 0.0, j.right));
        } else if t < v {
            jumps.push((t, j.left, j.right));
        } else if t == v {
            jumps.push((t, j.left, 0.0));
        }
    }
    let pieces = f
        .pieces()
        .iter()
        .filter(|p| p.hi > u && p.lo < v)
        .map(|p| (p.lo.max(u), p.hi.min(v), p.expr.clone()))
        .collect();
    func((u, v), c0, pieces, jumps)
}

/// A certified upper bound for sup|f| from dense sampling, one-sided limits
/// at every structural point, and a caller-supplied slope bound.
pub fn sup_bound(f: &RepFunc, lip: f64) -> f64 {
    let (a, b) = f.domain();
    let mut knots: Vec<f64> = vec![a, b];
    knots.extend(f.pieces().iter().map(|p| p.lo));
    knots.extend(f.jumps().iter().map(|j| j.loc.t));
    let mut m = 0.0f64;
    for &t in &knots {
        let lim = f.limits_and_jumps(t).unwrap();
        m = m.max(f.eval(t).unwrap().abs()).max(lim.left.abs()).max(lim.right.abs());
    }
    let n = 512;
    for k in 0..=n {
        let t = a + (b - a) * k as f64 / n as f64;
        m = m.max(f.eval(t).unwrap().abs());
    }
    m + lip * (b - a) / n as f64 / 2.0
}

/// An increasing weight on [0,1]: positive-slope line plus nonnegative
/// right jumps.
pub fn random_increasing(r: &mut ChaCha8Rng) -> RepFunc {
    let slope = r.gen_range(0.5..2.0);
    let mut jumps = Vec::new();
    if r.gen_bool(0.7) {
        let t = JUMP_POOL[r.gen_range(0..JUMP_POOL.len())];
        jumps.push((t, 0.0, r.gen_range(0.0..1.0)));
    }
    func((0.0, 1.0), 0.0, vec![(0.0, 1.0, Expr::linear(0.0, slope))], jumps)
}
