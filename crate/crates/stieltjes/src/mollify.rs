//! One-sided averaging into absolutely continuous approximants.
//!
//! The averaged function replaces every jump of the input with a linear
//! ramp of width `eps`: left parts (the rise into the point) ramp up over
//! [t - eps, t], right parts (the rise after the point) over [t, t + eps].
//! Continuous content is backward-averaged through its antiderivative,
//! (Y(t) - Y(t - eps)) / eps, with the function extended constantly beyond
//! its domain so the average is defined up to the endpoints.  The result is
//! piecewise-C1 with no jump records at all.
//!
//! Value overrides are dropped: a function that disagrees with its own
//! one-sided limits at isolated points averages to the same output as its
//! override-free version, so they cannot survive.  The unrepresented
//! remainder of a jump series (mass at most the series tolerance) is
//! likewise not averaged.
//!
//! [`mollify_convergence_report`] drives the approximation quality
//! diagnostics: sup-norm deviation away from the averaging zones, total
//! variation drift of the integrator, and the drift of the integral of the
//! averaged pair against the integral of the original pair.  A caution on
//! the last column: when the integrand and the integrator jump at a common
//! point, the averaged integrals do NOT converge to the original integral.
//! The ramps of the two functions overlap and their product integrates to
//! half the product of the jump parts, so the limit carries an extra
//! (1/2) * sum over shared points of (right(x) right(g) - left(x) left(g)).
//! The unit-jump-against-itself pair shows it plainly: every eps gives
//! exactly 1/2 while the jump-aware integral of the pair is 0.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::repfunc::{RepFunc, SmoothPiece};
use crate::star;
use crate::variation;

/// The eps-average of `y`: absolutely continuous, piecewise-C1, with
/// breakpoints at the original seams and jump locations shifted by eps.
pub fn mollify(y: &RepFunc, eps: f64) -> Result<RepFunc> {
    let (a, b) = y.domain();
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invariant("/eps", "averaging width must be positive and finite"));
    }
    let limit = (b - a) / 2.0;
    if eps >= limit {
        return Err(Error::EpsTooLarge { eps, limit });
    }

    // global antiderivative of the continuous part, anchored to 0 at a
    let fc = y.decompose().0;
    let seams = fc.event_grid();
    let mut segs: Vec<(f64, Expr)> = Vec::with_capacity(seams.len() - 1);
    let mut acc = 0.0;
    for w in seams.windows(2) {
        let e = fc.cell_expr(w[0]);
        let anti = match e.antiderivative() {
            Some(anti) => {
                let shift = acc - anti.value(w[0]);
                Expr::Sum(vec![anti, Expr::constant(shift)]).simplify()
            }
            None => {
                let n = (((w[1] - w[0]) / (b - a)) * 256.0).ceil().max(1.0) as usize;
                let grid: Vec<f64> =
                    (0..=n).map(|k| w[0] + (w[1] - w[0]) * k as f64 / n as f64).collect();
                Expr::integral_of(e, &grid, acc, 1e-13)
            }
        };
        acc = anti.value(w[1]);
        segs.push((w[1], anti));
    }
    // constant extension below a keeps the average defined on [a, a + eps)
    let ext = Expr::linear(-fc.eval(a)? * a, fc.eval(a)?);
    let pick = |t: f64| -> Expr {
        if t < a {
            return ext.clone();
        }
        let idx = segs.partition_point(|s| s.0 <= t).min(segs.len() - 1);
        segs[idx].1.clone()
    };

    let mut pts = vec![a + eps];
    for s in &seams {
        pts.push(*s);
        pts.push(*s + eps);
    }
    for j in y.jumps() {
        pts.push(j.loc.t - eps);
        pts.push(j.loc.t);
        pts.push(j.loc.t + eps);
    }
    pts.retain(|t| *t > a && *t < b);
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let inv = 1.0 / eps;
    let mut pieces = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = 0.5 * (p + q);
        let cont = Expr::Sum(vec![
            Expr::Scale { c: inv, arg: Box::new(pick(mid)) },
            Expr::Scale {
                c: -inv,
                arg: Box::new(Expr::Affine { a: 1.0, b: -eps, arg: Box::new(pick(mid - eps)) }),
            },
        ]);
        // every jump contributes an affine piece on this cell: zero before
        // its ramp, the ramp itself, or the full level after it
        let (mut level, mut slope) = (0.0, 0.0);
        for j in y.jumps() {
            let t0 = j.loc.t;
            if j.left != 0.0 {
                if p >= t0 {
                    level += j.left;
                } else if q > t0 - eps {
                    slope += j.left * inv;
                    level += j.left * (eps - t0) * inv;
                }
            }
            if j.right != 0.0 {
                if p >= t0 + eps {
                    level += j.right;
                } else if q > t0 {
                    slope += j.right * inv;
                    level -= j.right * t0 * inv;
                }
            }
        }
        let expr = Expr::Sum(vec![cont, Expr::Poly(vec![level, slope])]).simplify();
        pieces.push(SmoothPiece { lo: p, hi: q, expr });
    }
    RepFunc::new((a, b), 0.0, pieces, Vec::new(), Vec::new(), Vec::new(), y.series_tol())
}

/// Approximation diagnostics along a decreasing grid of averaging widths.
#[derive(Debug, Clone)]
pub struct MollifyReport {
    pub eps_grid: Vec<f64>,
    /// Largest pointwise deviation of either averaged function from its
    /// original, sampled away from the boundary layers and the averaging
    /// zones around jumps.
    pub sup_dev: Vec<f64>,
    /// |variation of averaged integrator - variation of integrator|.
    pub var_dev: Vec<f64>,
    /// |integral of averaged pair - integral of original pair|.
    pub int_dev: Vec<f64>,
    /// Whether inputs carried value overrides (which averaging discards).
    pub overrides_dropped: bool,
}

pub fn mollify_convergence_report(
    x: &RepFunc,
    g: &RepFunc,
    eps_grid: &[f64],
    tol: f64,
) -> Result<MollifyReport> {
    if x.domain() != g.domain() {
        return Err(Error::invariant("/domain", "integrand and integrator must share a domain"));
    }
    if eps_grid.is_empty() {
        return Err(Error::invariant("/eps_grid", "need at least one averaging width"));
    }
    for w in eps_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::invariant("/eps_grid", "widths must be strictly decreasing"));
        }
    }
    let (a, b) = g.domain();
    let base = star::star_integral(x, g, tol)?.value;
    let tv_g = variation::total_variation(g)?.value;
    let mut rep = MollifyReport {
        eps_grid: eps_grid.to_vec(),
        sup_dev: Vec::with_capacity(eps_grid.len()),
        var_dev: Vec::with_capacity(eps_grid.len()),
        int_dev: Vec::with_capacity(eps_grid.len()),
        overrides_dropped: !x.overrides().is_empty() || !g.overrides().is_empty(),
    };
    for &eps in eps_grid {
        let xe = mollify(x, eps)?;
        let ge = mollify(g, eps)?;
        let je = star::star_integral(&xe, &ge, tol)?.value;
        let tve = variation::total_variation(&ge)?.value;
        let mut sup = 0.0_f64;
        let n = 1024;
        'sample: for k in 0..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            if t < a + eps || t > b - eps {
                continue;
            }
            for j in x.jumps().iter().chain(g.jumps()) {
                if (t - j.loc.t).abs() < eps {
                    continue 'sample;
                }
            }
            for ov in x.overrides().iter().chain(g.overrides()) {
                if t == ov.loc.t {
                    continue 'sample;
                }
            }
            let dx = (xe.eval(t)? - x.eval(t)?).abs();
            let dg = (ge.eval(t)? - g.eval(t)?).abs();
            sup = sup.max(dx.max(dg));
        }
        rep.sup_dev.push(sup);
        rep.var_dev.push((tve - tv_g).abs());
        rep.int_dev.push((je - base).abs());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ident(a: f64, b: f64) -> RepFunc {
        RepFunc::from_expr(a, b, Expr::linear(0.0, 1.0))
    }

    #[test]
    fn unit_jump_becomes_a_ramp() {
        let h = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
        let eps = 0.125;
        let he = mollify(&h, eps).unwrap();
        assert!(he.jumps().is_empty());
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let want = ((t - 0.5) / eps).clamp(0.0, 1.0);
            assert_abs_diff_eq!(he.eval(t).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn averaged_identity_lags_by_half_a_window() {
        let f = ident(0.0, 1.0);
        let eps = 0.1;
        let fe = mollify(&f, eps).unwrap();
        for k in 0..=40 {
            let t = 0.1 + 0.9 * k as f64 / 40.0;
            assert_abs_diff_eq!(fe.eval(t).unwrap(), t - eps / 2.0, epsilon = 1e-12);
        }
        // boundary layer: the extension below 0 is the constant 0, so the
        // average is t^2 / (2 eps) there
        assert_abs_diff_eq!(fe.eval(0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.eval(0.05).unwrap(), 0.05f64.powi(2) / 0.2, epsilon = 1e-12);
    }

    #[test]
    fn constants_are_fixed_points() {
        let c = RepFunc::constant(-1.0, 3.0, 4.25);
        let ce = mollify(&c, 0.5).unwrap();
        for k in 0..=32 {
            let t = -1.0 + 4.0 * k as f64 / 32.0;
            assert_abs_diff_eq!(ce.eval(t).unwrap(), 4.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn window_must_fit_the_domain() {
        let f = ident(0.0, 1.0);
        assert!(matches!(mollify(&f, 0.5), Err(Error::EpsTooLarge { .. })));
        assert!(mollify(&f, 0.499).is_ok());
    }

    #[test]
    fn ramp_keeps_the_variation_of_the_jump() {
        let h = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let he = mollify(&h, eps).unwrap();
            let tv = variation::total_variation(&he).unwrap();
            assert_abs_diff_eq!(tv.value, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn averaging_contracts_variation() {
        let f = RepFunc::from_expr(0.0, 2.0, Expr::Sin { amp: 1.0, omega: 4.0, phase: 0.3 })
            .add(&RepFunc::unit_jump(0.0, 2.0, 0.7).unwrap().scale(-1.5))
            .unwrap();
        let tv = variation::total_variation(&f).unwrap().value;
        for eps in [0.3, 0.1, 0.05] {
            let fe = mollify(&f, eps).unwrap();
            let tve = variation::total_variation(&fe).unwrap();
            assert!(tve.value <= tv + 1e-8, "eps {eps}: {} > {}", tve.value, tv);
        }
    }

    #[test]
    fn left_continuous_and_right_continuous_parts_ramp_on_opposite_sides() {
        // left part 2 at 0.5 ramps on [0.5 - eps, 0.5]; right part -1 ramps
        // on [0.5, 0.5 + eps]
        let f = RepFunc::new(
            (0.0, 1.0),
            0.0,
            vec![],
            vec![crate::repfunc::JumpRecord {
                loc: crate::repfunc::Loc::from_value(0.5),
                left: 2.0,
                right: -1.0,
            }],
            vec![],
            vec![],
            crate::repfunc::DEFAULT_SERIES_TOL,
        )
        .unwrap();
        let eps = 0.1;
        let fe = mollify(&f, eps).unwrap();
        assert_abs_diff_eq!(fe.eval(0.35).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.eval(0.45).unwrap(), 2.0 * 0.05 / 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.eval(0.5).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.eval(0.55).unwrap(), 2.0 - 1.0 * 0.05 / 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fe.eval(0.7).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shared_jump_pair_averages_to_one_half_at_every_width() {
        let h = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
        let rep =
            mollify_convergence_report(&h, &h, &[0.1, 0.05, 0.025, 0.0125], 1e-9).unwrap();
        // the original integral is 0; every averaged integral is exactly 1/2
        for dev in &rep.int_dev {
            assert_abs_diff_eq!(*dev, 0.5, epsilon = 1e-8);
        }
        for dev in &rep.var_dev {
            assert_abs_diff_eq!(*dev, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn disjoint_jumps_converge_to_the_original_integral() {
        // integrand jumps at 0.3, integrator at 0.7: no shared point, so the
        // averaged integrals approach the original one
        let x = ident(0.0, 1.0).add(&RepFunc::unit_jump(0.0, 1.0, 0.3).unwrap()).unwrap();
        let g = ident(0.0, 1.0)
            .add(&RepFunc::unit_jump(0.0, 1.0, 0.7).unwrap().scale(2.0))
            .unwrap();
        let eps_grid = [0.1, 0.05, 0.025, 0.0125];
        let rep = mollify_convergence_report(&x, &g, &eps_grid, 1e-9).unwrap();
        for w in rep.int_dev.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "int_dev not decreasing: {:?}", rep.int_dev);
        }
        assert!(rep.int_dev[rep.int_dev.len() - 1] < 1e-1);
        for w in rep.sup_dev.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "sup_dev not decreasing: {:?}", rep.sup_dev);
        }
    }

    #[test]
    fn report_rejects_unsorted_grids() {
        let h = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
        assert!(mollify_convergence_report(&h, &h, &[0.05, 0.1], 1e-9).is_err());
        assert!(mollify_convergence_report(&h, &h, &[], 1e-9).is_err());
    }

    #[test]
    fn series_jumps_are_ramped_too() {
        use crate::repfunc::{JumpSeries, SeriesSide};
        let f = RepFunc::new(
            (0.0, 1.0),
            0.0,
            vec![],
            vec![],
            vec![JumpSeries {
                side: SeriesSide::Right,
                c: 0.25,
                r: 0.5,
                amp: 0.5,
                q: 0.5,
            }],
            vec![],
            1e-10,
        )
        .unwrap();
        let eps = 1e-3;
        let fe = mollify(&f, eps).unwrap();
        assert!(fe.jumps().is_empty());
        // away from the accumulation zone the averaged value matches the
        // accumulated saltus
        let t = 0.5;
        assert_abs_diff_eq!(fe.eval(t).unwrap(), f.eval(t).unwrap(), epsilon = 1e-9);
    }
}
