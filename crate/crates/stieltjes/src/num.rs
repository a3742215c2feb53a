//! Low-level numeric workhorses: Gauss-Legendre panels, adaptive panel
//! subdivision, guarded bisection and outward-rounded interval arithmetic.

use std::sync::OnceLock;

const GL_N: usize = 12;

fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the 12 point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gl_rule() -> &'static ([f64; GL_N], [f64; GL_N]) {
    static RULE: OnceLock<([f64; GL_N], [f64; GL_N])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut xs = [0.0; GL_N];
        let mut ws = [0.0; GL_N];
        for i in 0..GL_N {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (GL_N as f64 + 0.5)).cos();
            for _ in 0..64 {
                let (p, dp) = legendre_eval(GL_N, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_eval(GL_N, x);
            xs[i] = x;
            ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    })
}

pub fn gauss_panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (xs, ws) = gl_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..GL_N {
        acc += ws[i] * f(mid + half * xs[i]);
    }
    acc * half
}

/// Outcome of an adaptive quadrature run.  `err` is the accumulated
/// halving-difference estimate, a conservative bound for smooth integrands.
/// `peak` is the largest |f| seen at any quadrature node and feeds the
/// divergence heuristics upstream.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
    pub peak: f64,
}

impl Quad {
    pub const ZERO: Quad = Quad { value: 0.0, err: 0.0, converged: true, peak: 0.0 };

    pub fn absorb(&mut self, other: Quad) {
        self.value += other.value;
        self.err += other.err;
        self.converged &= other.converged;
        self.peak = self.peak.max(other.peak);
    }
}

/// Adaptive Gauss-Legendre integration of `f` over [a, b] (orientation
/// aware).  Splits panels while the halving difference exceeds the local
/// share of `tol`, down to `max_depth` bisection levels.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Quad {
    if a == b {
        return Quad::ZERO;
    }
    let (lo, hi, sign) = if b < a { (b, a, -1.0) } else { (a, b, 1.0) };
    let mut out = Quad::ZERO;
    let mut budget = PANEL_BUDGET;
    adaptive_rec(f, lo, hi, tol.max(1e-300), max_depth, &mut budget, &mut out);
    out.value *= sign;
    out
}

// Hard cap on subdivisions per adaptive() call.  Convergent integrands never
// get near it; integrands whose halving error refuses to settle (divergent or
// fractally oscillatory ones) would otherwise expand an exponential tree
// before the depth cap saves them.
const PANEL_BUDGET: u32 = 6000;

fn adaptive_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    budget: &mut u32,
    out: &mut Quad,
) {
    let mut peak = 0.0f64;
    let mut g = |x: f64| {
        let v = f(x);
        let av = v.abs();
        if av > peak {
            peak = av;
        }
        v
    };
    let whole = gauss_panel(&mut g, a, b);
    let m = 0.5 * (a + b);
    let split = gauss_panel(&mut g, a, m) + gauss_panel(&mut g, m, b);
    let e = (whole - split).abs();
    out.peak = out.peak.max(peak);
    let width_floor = (b - a) <= 8.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    if e <= tol || width_floor {
        out.value += split;
        out.err += e;
    } else if depth == 0 || *budget == 0 {
        out.value += split;
        out.err += e;
        out.converged = false;
    } else {
        *budget -= 1;
        adaptive_rec(f, a, m, 0.5 * tol, depth - 1, budget, out);
        adaptive_rec(f, m, b, 0.5 * tol, depth - 1, budget, out);
    }
}

/// Refine a bracketed sign change of `f` on [lo, hi] down to floating point
/// resolution.  Caller guarantees f(lo) and f(hi) have opposite signs (or a
/// zero endpoint, which is returned as-is).
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// --- tiny interval arithmetic -------------------------------------------
//
// Intervals are plain (lo, hi) pairs.  No directed rounding: the goal is
// range bounds sound up to a few ulps, which the callers absorb into their
// own tolerances.

pub type Iv = (f64, f64);

pub fn iv_point(x: f64) -> Iv {
    (x, x)
}

pub fn iv_hull(a: Iv, b: Iv) -> Iv {
    (a.0.min(b.0), a.1.max(b.1))
}

pub fn iv_add(a: Iv, b: Iv) -> Iv {
    (a.0 + b.0, a.1 + b.1)
}

pub fn iv_scale(a: Iv, c: f64) -> Iv {
    if c >= 0.0 {
        (a.0 * c, a.1 * c)
    } else {
        (a.1 * c, a.0 * c)
    }
}

pub fn iv_mul(a: Iv, b: Iv) -> Iv {
    let cands = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in cands {
        if c.is_nan() {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        lo = lo.min(c);
        hi = hi.max(c);
    }
    (lo, hi)
}

pub fn iv_abs(a: Iv) -> Iv {
    if a.0 >= 0.0 {
        a
    } else if a.1 <= 0.0 {
        (-a.1, -a.0)
    } else {
        (0.0, (-a.0).max(a.1))
    }
}

pub fn iv_recip(a: Iv) -> Iv {
    if a.0 > 0.0 || a.1 < 0.0 {
        (1.0 / a.1, 1.0 / a.0)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

pub fn iv_exp(a: Iv) -> Iv {
    (a.0.exp(), a.1.exp())
}

/// |x|^p on an interval, p > 0.
pub fn iv_abs_pow(a: Iv, p: f64) -> Iv {
    let m = iv_abs(a);
    (m.0.powf(p), m.1.powf(p))
}

pub fn iv_width(a: Iv) -> f64 {
    a.1 - a.0
}

pub fn iv_mag(a: Iv) -> f64 {
    a.0.abs().max(a.1.abs())
}
