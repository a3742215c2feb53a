//! The jump-aware Stieltjes integral and its calculus.
//!
//! Against an integrator g of bounded variation, the integral of f splits
//! into four explicitly tracked terms: the RS integral against the
//! continuous part of g, the boundary jump terms f(a) * (right jump of g at
//! a) and f(b) * (left jump at b), and the interior sum of f(t) times the
//! full jump of g over every interior discontinuity.  The integrand only
//! needs to be bounded with countably many discontinuities; in particular it
//! may jump at the very same points as the integrator.
//!
//! When g carries continuous content of unbounded variation while f itself
//! is of bounded variation (and g's jumps are absolutely summable), the
//! roles swap: the continuous-part integral is recovered through the
//! integration by parts bracket, and the jump terms stay as they are.
//!
//! On top of the integral the module provides the indefinite form (a first
//! class function whose jumps obey the pointwise product law), the
//! variation of that indefinite integral, the integration-by-parts residual
//! with its shared-jump correction, iterated integration of separable
//! kernels in both orders, the Holder and Minkowski inequalities for
//! p-means against an increasing weight, and the extremal step witness that
//! realizes the total variation of an integrator as a functional norm.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::num;
use crate::repfunc::{JumpRecord, RepFunc, SmoothPiece};
use crate::rs;
use crate::variation;

/// Value and per-term breakdown of the jump-aware integral.
#[derive(Debug, Clone, Copy)]
pub struct StarResult {
    /// Sum of the four terms below, exactly as computed.
    pub value: f64,
    /// Quadrature halving error plus truncated jump-series mass.
    pub error_bound: f64,
    pub rs_part: f64,
    pub boundary_left: f64,
    pub interior_sum: f64,
    pub boundary_right: f64,
}

/// f-weighted jump mass of g: boundary terms and the interior sum.
fn weighted_jump_terms(f: &RepFunc, g: &RepFunc) -> Result<(f64, f64, f64)> {
    let (a, b) = g.domain();
    let (mut bl, mut mid, mut br) = (0.0, 0.0, 0.0);
    for j in g.jumps() {
        let w = f.eval(j.loc.t)? * j.sigma();
        if j.loc.t == a {
            bl += w;
        } else if j.loc.t == b {
            br += w;
        } else {
            mid += w;
        }
    }
    Ok((bl, mid, br))
}

/// The jump-aware Stieltjes integral of f against g over their common
/// domain.  Either g must have bounded variation, or f must (with the roles
/// swapped internally through the by-parts bracket).
pub fn star_integral(f: &RepFunc, g: &RepFunc, tol: f64) -> Result<StarResult> {
    if f.domain() != g.domain() {
        return Err(Error::invariant("/domain", "integrand and integrator must share a domain"));
    }
    let (g_c, _) = g.decompose();
    let tv_g = variation::total_variation(g)?;
    let (rs_part, rs_err) = if !tv_g.infinite_suspected {
        let enc = rs::rs_integral(f, &g_c, tol, 24)?;
        (enc.value, enc.error_bound)
    } else {
        let tv_f = variation::total_variation(f)?;
        if tv_f.infinite_suspected {
            return Err(Error::UnsupportedPair(
                "neither the integrator nor the integrand has certifiably bounded variation"
                    .into(),
            ));
        }
        // role swap: int f dg_c = [f g_c] - int g_c df
        let (a, b) = f.domain();
        let bracket = f.eval(b)? * g_c.eval(b)? - f.eval(a)? * g_c.eval(a)?;
        let back = rs::rs_integral(&g_c, f, tol, 24)?;
        (bracket - back.value, back.error_bound)
    };
    let (bl, mid, br) = weighted_jump_terms(f, g)?;
    let tail = f.sup_abs() * g.tail();
    Ok(StarResult {
        value: rs_part + bl + mid + br,
        error_bound: rs_err + tail,
        rs_part,
        boundary_left: bl,
        interior_sum: mid,
        boundary_right: br,
    })
}

/// The indefinite integral t -> integral of f against g over [a, t], as a
/// first-class representable function.  Its jump parts at every
/// discontinuity of g are exactly f(t) times the corresponding parts of g,
/// and its continuous part is tabulated piecewise (closed-form
/// antiderivatives where the expression catalogue admits them, anchored
/// running quadrature otherwise).  Jump-series content of g enters through
/// the materialized records; the truncated tail (at most sup|f| times the
/// integrator tail) is not represented.
pub fn star_indefinite(f: &RepFunc, g: &RepFunc) -> Result<RepFunc> {
    if f.domain() != g.domain() {
        return Err(Error::invariant("/domain", "integrand and integrator must share a domain"));
    }
    let tv_g = variation::total_variation(g)?;
    if tv_g.infinite_suspected {
        return Err(Error::UnsupportedPair(
            "the indefinite form needs a bounded-variation integrator".into(),
        ));
    }
    let (a, b) = f.domain();
    let mut jumps = Vec::with_capacity(g.jumps().len());
    for j in g.jumps() {
        let w = f.eval(j.loc.t)?;
        jumps.push(JumpRecord { loc: j.loc.clone(), left: w * j.left, right: w * j.right });
    }
    let mut pts = f.event_grid();
    pts.extend(g.event_grid());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut pieces = Vec::with_capacity(pts.len() - 1);
    let mut run = 0.0;
    for w in pts.windows(2) {
        let fx = f.cell_expr(w[0]);
        let gx = g.cell_expr(w[0]);
        let gd = gx.deriv_expr().ok_or_else(|| {
            Error::UnsupportedPair("integrator piece has no usable derivative".into())
        })?;
        let integrand = Expr::Prod(vec![fx, gd]).simplify();
        let expr = match integrand.antiderivative() {
            Some(anti) => {
                let shift = run - anti.value(w[0]);
                Expr::Sum(vec![anti, Expr::constant(shift)]).simplify()
            }
            None => {
                let n = (((w[1] - w[0]) / (b - a)) * 64.0).ceil().max(1.0) as usize;
                let grid: Vec<f64> =
                    (0..=n).map(|k| w[0] + (w[1] - w[0]) * k as f64 / n as f64).collect();
                Expr::integral_of(integrand, &grid, run, 1e-12)
            }
        };
        run = expr.value(w[1]);
        pieces.push(SmoothPiece { lo: w[0], hi: w[1], expr });
    }
    RepFunc::new((a, b), 0.0, pieces, jumps, Vec::new(), Vec::new(), g.series_tol())
}

/// Integral of a pointwise-transformed integrand against the continuous
/// part of g plus its jump records.  The transformed function is supplied
/// as a bare evaluator with explicit smoothness cuts, so absolute values
/// and powers need no catalogue closure.
fn star_view(
    eval: &dyn Fn(f64) -> f64,
    sup_bound: f64,
    cuts: &[f64],
    g: &RepFunc,
    tol: f64,
) -> (f64, f64) {
    let (a, b) = g.domain();
    let mut pts = g.event_grid();
    pts.extend(cuts.iter().copied().filter(|t| t.is_finite() && *t > a && *t < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut value = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let gx = g.cell_expr(w[0]);
        let q = num::adaptive(
            &|t| eval(t) * gx.deriv(t),
            w[0],
            w[1],
            (tol * (w[1] - w[0]) / (b - a)).max(1e-15),
            28,
        );
        value += q.value;
        err += q.err;
    }
    for j in g.jumps() {
        value += eval(j.loc.t) * j.sigma();
    }
    (value, err + sup_bound * g.tail())
}

/// Kink locations of f: piece breakpoints plus interior zeros of the
/// cell values, which is where |f|-style transforms lose smoothness.
fn abs_cuts(f: &RepFunc) -> Vec<f64> {
    let grid = f.event_grid();
    let mut cuts = grid.clone();
    for w in grid.windows(2) {
        let (mut zs, _) = f.cell_expr(w[0]).zeros_in(w[0], w[1]);
        cuts.append(&mut zs);
    }
    cuts
}

/// Total variation of the indefinite integral of f against g, computed
/// directly as the integral of |f| against the running-variation function
/// of g.  Returns (value, error bound).
pub fn variation_of_indefinite(f: &RepFunc, g: &RepFunc, tol: f64) -> Result<(f64, f64)> {
    if f.domain() != g.domain() {
        return Err(Error::invariant("/domain", "integrand and integrator must share a domain"));
    }
    let (gpi, _) = variation::variation_function(g)?;
    let fe = |t: f64| f.eval(t).map_or(f64::NAN, |v| v);
    let cuts = abs_cuts(f);
    let (v, e) = star_view(&|t| fe(t).abs(), f.sup_abs(), &cuts, &gpi, tol);
    Ok((v, e))
}

/// Residual of the integration by parts identity with the shared-jump
/// correction:
///
/// ```text
/// int f dg + int g df - [f g] + sum over shared jump points of
///     (right-jump(f) * right-jump(g) - left-jump(f) * left-jump(g))
/// ```
///
/// Returns (residual, combined error bound); the residual vanishes up to
/// the bound whenever both integrals are defined.
pub fn star_by_parts_residual(f: &RepFunc, g: &RepFunc, tol: f64) -> Result<(f64, f64)> {
    let fg = star_integral(f, g, tol)?;
    let gf = star_integral(g, f, tol)?;
    let (a, b) = f.domain();
    let bracket = f.eval(b)? * g.eval(b)? - f.eval(a)? * g.eval(a)?;
    let mut corr = 0.0;
    for jf in f.jumps() {
        for jg in g.jumps() {
            if jf.loc.exact_matches(&jg.loc) {
                corr += jf.right * jg.right - jf.left * jg.left;
            }
        }
    }
    // the bound must also absorb the rounding of the bracket/correction
    // arithmetic, or a residual of pure floating noise can exceed it
    let scale = fg.value.abs() + gf.value.abs() + bracket.abs() + corr.abs();
    let rounding = f64::EPSILON * (4.0 + scale);
    Ok((fg.value + gf.value - bracket + corr, fg.error_bound + gf.error_bound + rounding))
}

/// Kernel h(t, s) given as a finite sum of separable products u_i(t) v_i(s).
#[derive(Debug, Clone)]
pub struct SeparableKernel {
    pub terms: Vec<(RepFunc, RepFunc)>,
}

/// Both orders of the iterated integral of a separable kernel: integrate in
/// s against g first and then in t against f, and the other way round.
#[derive(Debug, Clone, Copy)]
pub struct FubiniCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub error_bound: f64,
}

pub fn star_fubini(
    h: &SeparableKernel,
    f: &RepFunc,
    g: &RepFunc,
    tol: f64,
) -> Result<FubiniCheck> {
    if h.terms.is_empty() {
        return Err(Error::invariant("/kernel", "kernel needs at least one term"));
    }
    for (i, (u, v)) in h.terms.iter().enumerate() {
        if u.domain() != f.domain() {
            return Err(Error::invariant(
                format!("/kernel/{i}"),
                "t-factor domain must match the outer integrator",
            ));
        }
        if v.domain() != g.domain() {
            return Err(Error::invariant(
                format!("/kernel/{i}"),
                "s-factor domain must match the inner integrator",
            ));
        }
    }
    let tv_f = variation::total_variation(f)?;
    let tv_g = variation::total_variation(g)?;
    if tv_f.infinite_suspected || tv_g.infinite_suspected {
        return Err(Error::UnsupportedPair(
            "iterated integration needs bounded-variation integrators".into(),
        ));
    }

    // inner in s first: phi(t) = sum_i u_i(t) * (int v_i dg)
    let mut phi: Option<RepFunc> = None;
    let mut carry = 0.0;
    for (u, v) in &h.terms {
        let inner = star_integral(v, g, tol)?;
        carry += inner.error_bound * u.sup_abs() * tv_f.value;
        let scaled = u.scale(inner.value);
        phi = Some(match phi {
            None => scaled,
            Some(p) => p.add(&scaled)?,
        });
    }
    let lhs = star_integral(&phi.expect("nonempty kernel"), f, tol)?;

    // inner in t first: psi(s) = sum_i v_i(s) * (int u_i df)
    let mut psi: Option<RepFunc> = None;
    for (u, v) in &h.terms {
        let inner = star_integral(u, f, tol)?;
        carry += inner.error_bound * v.sup_abs() * tv_g.value;
        let scaled = v.scale(inner.value);
        psi = Some(match psi {
            None => scaled,
            Some(p) => p.add(&scaled)?,
        });
    }
    let rhs = star_integral(&psi.expect("nonempty kernel"), g, tol)?;

    Ok(FubiniCheck {
        lhs: lhs.value,
        rhs: rhs.value,
        error_bound: lhs.error_bound + rhs.error_bound + carry,
    })
}

/// One inequality instance: the claim is lhs <= rhs + error_bound.
#[derive(Debug, Clone, Copy)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub error_bound: f64,
}

fn power_mean_spread(v: f64, e: f64, inv_p: f64) -> (f64, f64, f64) {
    let mid = v.max(0.0).powf(inv_p);
    let hi = (v + e).max(0.0).powf(inv_p);
    let lo = (v - e).max(0.0).powf(inv_p);
    (mid, hi, lo)
}

/// Holder inequality for the g-weighted p-means: the integral of |x y|
/// against increasing g versus the product of the p- and q-norms,
/// q = p / (p - 1).
pub fn holder_check(
    x: &RepFunc,
    y: &RepFunc,
    g: &RepFunc,
    p: f64,
    tol: f64,
) -> Result<InequalityCheck> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if x.domain() != g.domain() || y.domain() != g.domain() {
        return Err(Error::invariant("/domain", "all three functions must share a domain"));
    }
    variation::ensure_increasing(g, 1e-10)?;
    let q = p / (p - 1.0);
    let xe = |t: f64| x.eval(t).map_or(f64::NAN, |v| v);
    let ye = |t: f64| y.eval(t).map_or(f64::NAN, |v| v);
    let mut cuts = abs_cuts(x);
    cuts.extend(abs_cuts(y));
    let (lhs, lhs_err) = star_view(
        &|t| (xe(t) * ye(t)).abs(),
        x.sup_abs() * y.sup_abs(),
        &cuts,
        g,
        tol,
    );
    let (xa, xa_err) = star_view(&|t| xe(t).abs().powf(p), x.sup_abs().powf(p), &cuts, g, tol);
    let (yb, yb_err) = star_view(&|t| ye(t).abs().powf(q), y.sup_abs().powf(q), &cuts, g, tol);
    let (xm, xh, xl) = power_mean_spread(xa, xa_err, 1.0 / p);
    let (ym, yh, yl) = power_mean_spread(yb, yb_err, 1.0 / q);
    let rhs = xm * ym;
    let spread = (xh * yh - rhs).max(rhs - xl * yl);
    Ok(InequalityCheck { lhs, rhs, error_bound: lhs_err + spread })
}

/// Minkowski inequality for the g-weighted p-norm: the p-norm of x + y
/// versus the sum of the p-norms.
pub fn minkowski_check(
    x: &RepFunc,
    y: &RepFunc,
    g: &RepFunc,
    p: f64,
    tol: f64,
) -> Result<InequalityCheck> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if x.domain() != g.domain() || y.domain() != g.domain() {
        return Err(Error::invariant("/domain", "all three functions must share a domain"));
    }
    variation::ensure_increasing(g, 1e-10)?;
    let s = x.add(y)?;
    let se = |t: f64| s.eval(t).map_or(f64::NAN, |v| v);
    let xe = |t: f64| x.eval(t).map_or(f64::NAN, |v| v);
    let ye = |t: f64| y.eval(t).map_or(f64::NAN, |v| v);
    let mut cuts = abs_cuts(&s);
    cuts.extend(abs_cuts(x));
    cuts.extend(abs_cuts(y));
    let (sa, sa_err) = star_view(&|t| se(t).abs().powf(p), s.sup_abs().powf(p), &cuts, g, tol);
    let (xa, xa_err) = star_view(&|t| xe(t).abs().powf(p), x.sup_abs().powf(p), &cuts, g, tol);
    let (ya, ya_err) = star_view(&|t| ye(t).abs().powf(p), y.sup_abs().powf(p), &cuts, g, tol);
    let inv = 1.0 / p;
    let (sm, sh, sl) = power_mean_spread(sa, sa_err, inv);
    let (xm, xh, xl) = power_mean_spread(xa, xa_err, inv);
    let (ym, yh, yl) = power_mean_spread(ya, ya_err, inv);
    let rhs = xm + ym;
    let spread = (sh - sm).max(sm - sl) + (xh - xm).max(xm - xl) + (yh - ym).max(ym - yl);
    Ok(InequalityCheck { lhs: sm, rhs, error_bound: spread })
}

/// A norm-one step function with values in {-1, 0, 1}.
#[derive(Debug, Clone)]
pub struct WitnessFunc(pub RepFunc);

#[derive(Debug, Clone)]
pub struct NormWitness {
    /// The integral of the witness against the target: a lower estimate of
    /// the total variation that comes within eps of it.
    pub norm_est: f64,
    pub error_bound: f64,
    pub witness: WitnessFunc,
}

/// Extremal witness for the functional norm of integration against g0
/// (normalized to g0(a) = 0): a step function of unit sup-norm whose
/// integral against g0 exceeds the total variation minus eps.
///
/// The guarantee applies to integrators whose jump parts are sign-aligned
/// (the one-sided jumps at each discontinuity do not point in opposite
/// directions); in general the witness attains the aligned variation, which
/// charges each discontinuity |left + right| instead of |left| + |right|.
pub fn functional_norm_witness(g0: &RepFunc, eps: f64, tol: f64) -> Result<NormWitness> {
    if !(eps > 0.0) {
        return Err(Error::invariant("/eps", "eps must be positive"));
    }
    let (a, b) = g0.domain();
    if g0.eval(a)?.abs() > 1e-12 {
        return Err(Error::invariant("/g", "witness construction expects g(a) = 0"));
    }
    let tv = variation::total_variation(g0)?;
    if tv.infinite_suspected {
        return Err(Error::InfiniteVariation);
    }

    // partition: monotone cells of the continuous part + covered jumps
    let mut pts = vec![a, b];
    for p in g0.pieces() {
        pts.push(p.lo);
        let (brks, _) = p.expr.monotone_breaks(p.lo, p.hi);
        pts.extend(brks);
    }
    let mut recs: Vec<&JumpRecord> = g0.jumps().iter().collect();
    recs.sort_by(|x, y| y.sigma().abs().total_cmp(&x.sigma().abs()));
    let total_abs: f64 = recs.iter().map(|j| j.sigma().abs()).sum();
    let mut covered_mass = 0.0;
    let mut covered: Vec<&JumpRecord> = Vec::new();
    for j in recs {
        if total_abs - covered_mass + g0.tail() <= 0.25 * eps {
            break;
        }
        covered_mass += j.sigma().abs();
        covered.push(j);
        pts.push(j.loc.t);
    }
    pts.retain(|t| *t >= a && *t <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let sign_of = |d: f64| {
        if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    // cell signs follow the continuous part alone: one-sided jump parts at
    // partition points would otherwise pollute (and possibly flip) the sign
    // of a cell whose continuous content is small
    let g_c = g0.decompose().0;
    let mut cell_sign = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        cell_sign.push(sign_of(g_c.eval(w[1])? - g_c.eval(w[0])?));
    }

    let covered_sign = |t: f64| {
        covered
            .iter()
            .find(|j| j.loc.t == t)
            .map(|j| sign_of(j.sigma()))
    };

    // assemble the witness as a pure-jump step function
    let c0 = covered_sign(a).unwrap_or(cell_sign[0]);
    let mut jumps = Vec::new();
    let mut level = c0;
    {
        // the value right after a is the first cell sign
        if cell_sign[0] != level {
            jumps.push(JumpRecord {
                loc: crate::repfunc::Loc::from_value(a),
                left: 0.0,
                right: cell_sign[0] - level,
            });
        }
        level = cell_sign[0];
    }
    for k in 1..pts.len() - 1 {
        let p = pts[k];
        let here = covered_sign(p).unwrap_or(level);
        let next = cell_sign[k];
        if here != level || next != here {
            jumps.push(JumpRecord {
                loc: crate::repfunc::Loc::from_value(p),
                left: here - level,
                right: next - here,
            });
        }
        level = next;
    }
    if let Some(sb) = covered_sign(b) {
        if sb != level {
            jumps.push(JumpRecord {
                loc: crate::repfunc::Loc::from_value(b),
                left: sb - level,
                right: 0.0,
            });
        }
    }

    let degenerate = c0 == 0.0
        && cell_sign.iter().all(|s| *s == 0.0)
        && covered.iter().all(|j| sign_of(j.sigma()) == 0.0);
    let xhat = if degenerate {
        RepFunc::constant(a, b, 1.0)
    } else {
        RepFunc::new(
            (a, b),
            c0,
            Vec::new(),
            jumps,
            Vec::new(),
            Vec::new(),
            g0.series_tol(),
        )?
    };

    let r = star_integral(&xhat, g0, tol)?;
    Ok(NormWitness { norm_est: r.value, error_bound: r.error_bound, witness: WitnessFunc(xhat) })
}
