//! Smooth-piece expression catalogue.
//!
//! Continuous pieces of a represented function are closed-form expressions
//! from a small catalogue: polynomials, exponentials, sinusoids, and their
//! sums, products and affine reparametrizations.  A few extra node kinds
//! exist only as internal results of engine operations (absolute values,
//! reciprocals, exponentials of a piece, running integrals, and one
//! oscillatory torture-test kernel); they are never read from input
//! documents.
//!
//! Every node supports pointwise evaluation and differentiation.  Symbolic
//! derivatives and antiderivatives are produced where the catalogue is
//! closed under them; certified range bounds come from interval arithmetic
//! and are deliberately conservative.

use crate::num::{self, Iv};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `c[0] + c[1] t + c[2] t^2 + ...`; an empty list is the zero function.
    Poly(Vec<f64>),
    /// `e^(alpha t + beta)`
    Exp { alpha: f64, beta: f64 },
    /// `amp * sin(omega t + phase)`
    Sin { amp: f64, omega: f64, phase: f64 },
    /// `amp * cos(omega t + phase)`
    Cos { amp: f64, omega: f64, phase: f64 },
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Scale { c: f64, arg: Box<Expr> },
    /// `arg(a t + b)`
    Affine { a: f64, b: f64, arg: Box<Expr> },
    // ---- internal nodes, not part of the document schema ----
    Abs(Box<Expr>),
    Recip(Box<Expr>),
    ExpOf(Box<Expr>),
    /// `amp * t * cos(coef / t)`, extended by 0 at t = 0.  Continuous but of
    /// unbounded variation on any interval containing 0.
    OscRecip { amp: f64, coef: f64 },
    /// Running integral of `integrand` anchored at tabulated base points.
    Integral(IntegralNode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralNode {
    pub integrand: Box<Expr>,
    /// Sorted (abscissa, accumulated value) pairs.  Evaluation integrates
    /// from the nearest anchor at or below t.
    pub anchors: Vec<(f64, f64)>,
    pub tol: f64,
}

impl IntegralNode {
    fn base_for(&self, t: f64) -> (f64, f64) {
        let idx = self.anchors.partition_point(|a| a.0 <= t);
        if idx == 0 {
            self.anchors[0]
        } else {
            self.anchors[idx - 1]
        }
    }

    fn value(&self, t: f64) -> f64 {
        let (t0, v0) = self.base_for(t);
        if t == t0 {
            return v0;
        }
        let g = self.integrand.clone();
        v0 + num::adaptive(&|x| g.value(x), t0, t, self.tol, 42).value
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Poly(vec![c])
    }

    pub fn linear(c0: f64, c1: f64) -> Expr {
        Expr::Poly(vec![c0, c1])
    }

    /// Build a running-integral node of `integrand`, anchored at `grid`
    /// (sorted, at least the two endpoints) with base value `base` at
    /// `grid[0]`.
    pub fn integral_of(integrand: Expr, grid: &[f64], base: f64, tol: f64) -> Expr {
        assert!(!grid.is_empty());
        let mut anchors = Vec::with_capacity(grid.len());
        let mut acc = base;
        anchors.push((grid[0], acc));
        for w in grid.windows(2) {
            acc += num::adaptive(&|x| integrand.value(x), w[0], w[1], tol, 42).value;
            anchors.push((w[1], acc));
        }
        Expr::Integral(IntegralNode { integrand: Box::new(integrand), anchors, tol })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Expr::Poly(c) => poly_value(c, t),
            Expr::Exp { alpha, beta } => (alpha * t + beta).exp(),
            Expr::Sin { amp, omega, phase } => amp * (omega * t + phase).sin(),
            Expr::Cos { amp, omega, phase } => amp * (omega * t + phase).cos(),
            Expr::Sum(args) => args.iter().map(|e| e.value(t)).sum(),
            Expr::Prod(args) => args.iter().map(|e| e.value(t)).product(),
            Expr::Scale { c, arg } => c * arg.value(t),
            Expr::Affine { a, b, arg } => arg.value(a * t + b),
            Expr::Abs(arg) => arg.value(t).abs(),
            Expr::Recip(arg) => 1.0 / arg.value(t),
            Expr::ExpOf(arg) => arg.value(t).exp(),
            Expr::OscRecip { amp, coef } => {
                if t == 0.0 {
                    0.0
                } else {
                    amp * t * (coef / t).cos()
                }
            }
            Expr::Integral(node) => node.value(t),
        }
    }

    /// Pointwise derivative.  Where the expression is merely one-sided
    /// differentiable (|f| at a zero) the value is a subgradient choice.
    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            Expr::Poly(c) => poly_value(&poly_deriv(c), t),
            Expr::Exp { alpha, beta } => alpha * (alpha * t + beta).exp(),
            Expr::Sin { amp, omega, phase } => amp * omega * (omega * t + phase).cos(),
            Expr::Cos { amp, omega, phase } => -amp * omega * (omega * t + phase).sin(),
            Expr::Sum(args) => args.iter().map(|e| e.deriv(t)).sum(),
            Expr::Prod(args) => {
                let vals: Vec<f64> = args.iter().map(|e| e.value(t)).collect();
                let mut acc = 0.0;
                for (i, e) in args.iter().enumerate() {
                    let mut term = e.deriv(t);
                    for (j, v) in vals.iter().enumerate() {
                        if j != i {
                            term *= v;
                        }
                    }
                    acc += term;
                }
                acc
            }
            Expr::Scale { c, arg } => c * arg.deriv(t),
            Expr::Affine { a, b, arg } => a * arg.deriv(a * t + b),
            Expr::Abs(arg) => {
                let v = arg.value(t);
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * arg.deriv(t)
                }
            }
            Expr::Recip(arg) => {
                let v = arg.value(t);
                -arg.deriv(t) / (v * v)
            }
            Expr::ExpOf(arg) => arg.deriv(t) * arg.value(t).exp(),
            Expr::OscRecip { amp, coef } => {
                if t == 0.0 {
                    0.0
                } else {
                    let u = coef / t;
                    amp * (u.cos() + u * u.sin())
                }
            }
            Expr::Integral(node) => node.integrand.value(t),
        }
    }

    /// Symbolic derivative when the catalogue is closed under it.
    pub fn deriv_expr(&self) -> Option<Expr> {
        match self {
            Expr::Poly(c) => Some(Expr::Poly(poly_deriv(c))),
            Expr::Exp { alpha, beta } => Some(Expr::Scale {
                c: *alpha,
                arg: Box::new(Expr::Exp { alpha: *alpha, beta: *beta }),
            }),
            Expr::Sin { amp, omega, phase } => {
                Some(Expr::Cos { amp: amp * omega, omega: *omega, phase: *phase })
            }
            Expr::Cos { amp, omega, phase } => {
                Some(Expr::Sin { amp: -amp * omega, omega: *omega, phase: *phase })
            }
            Expr::Sum(args) => {
                let parts: Option<Vec<Expr>> = args.iter().map(|e| e.deriv_expr()).collect();
                Some(Expr::Sum(parts?))
            }
            Expr::Prod(args) => {
                let mut terms = Vec::with_capacity(args.len());
                for (i, e) in args.iter().enumerate() {
                    let mut factors = vec![e.deriv_expr()?];
                    for (j, other) in args.iter().enumerate() {
                        if j != i {
                            factors.push(other.clone());
                        }
                    }
                    terms.push(Expr::Prod(factors));
                }
                Some(Expr::Sum(terms))
            }
            Expr::Scale { c, arg } => Some(Expr::Scale { c: *c, arg: Box::new(arg.deriv_expr()?) }),
            Expr::Affine { a, b, arg } => Some(Expr::Scale {
                c: *a,
                arg: Box::new(Expr::Affine { a: *a, b: *b, arg: Box::new(arg.deriv_expr()?) }),
            }),
            Expr::Abs(_) | Expr::OscRecip { .. } => None,
            Expr::Recip(arg) => {
                let d = arg.deriv_expr()?;
                let sq = Expr::Prod(vec![(**arg).clone(), (**arg).clone()]);
                Some(Expr::Scale {
                    c: -1.0,
                    arg: Box::new(Expr::Prod(vec![d, Expr::Recip(Box::new(sq))])),
                })
            }
            Expr::ExpOf(arg) => {
                Some(Expr::Prod(vec![arg.deriv_expr()?, Expr::ExpOf(arg.clone())]))
            }
            Expr::Integral(node) => Some((*node.integrand).clone()),
        }
    }

    /// Exact antiderivative where available.  Runs on the simplified form,
    /// so products that collapse to polynomials or scaled sinusoids succeed.
    pub fn antiderivative(&self) -> Option<Expr> {
        let s = self.simplify();
        if let Some(c) = s.poly_view() {
            return Some(Expr::Poly(poly_antideriv(&c)));
        }
        match s {
            Expr::Exp { alpha, beta } => {
                if alpha == 0.0 {
                    Some(Expr::linear(0.0, beta.exp()))
                } else {
                    Some(Expr::Scale {
                        c: 1.0 / alpha,
                        arg: Box::new(Expr::Exp { alpha, beta }),
                    })
                }
            }
            Expr::Sin { amp, omega, phase } => {
                if omega == 0.0 {
                    Some(Expr::linear(0.0, amp * phase.sin()))
                } else {
                    Some(Expr::Cos { amp: -amp / omega, omega, phase })
                }
            }
            Expr::Cos { amp, omega, phase } => {
                if omega == 0.0 {
                    Some(Expr::linear(0.0, amp * phase.cos()))
                } else {
                    Some(Expr::Sin { amp: amp / omega, omega, phase })
                }
            }
            Expr::Sum(args) => {
                let parts: Option<Vec<Expr>> = args.iter().map(|e| e.antiderivative()).collect();
                Some(Expr::Sum(parts?))
            }
            Expr::Scale { c, arg } => Some(Expr::Scale { c, arg: Box::new(arg.antiderivative()?) }),
            Expr::Affine { a, b, arg } => {
                if a == 0.0 {
                    Some(Expr::linear(0.0, arg.value(b)))
                } else {
                    Some(Expr::Scale {
                        c: 1.0 / a,
                        arg: Box::new(Expr::Affine { a, b, arg: Box::new(arg.antiderivative()?) }),
                    })
                }
            }
            _ => None,
        }
    }

    /// Polynomial coefficient view when the whole expression is polynomial.
    pub fn poly_view(&self) -> Option<Vec<f64>> {
        match self {
            Expr::Poly(c) => Some(c.clone()),
            Expr::Sum(args) => {
                let mut acc = Vec::new();
                for e in args {
                    acc = poly_add(&acc, &e.poly_view()?);
                }
                Some(acc)
            }
            Expr::Prod(args) => {
                let mut acc = vec![1.0];
                for e in args {
                    let p = e.poly_view()?;
                    if acc.len() + p.len() > 64 {
                        return None;
                    }
                    acc = poly_mul(&acc, &p);
                }
                Some(acc)
            }
            Expr::Scale { c, arg } => Some(poly_scale(&arg.poly_view()?, *c)),
            Expr::Affine { a, b, arg } => Some(poly_affine_compose(&arg.poly_view()?, *a, *b)),
            _ => None,
        }
    }

    /// Light structural normalization: flattens sums and products, folds
    /// constants, and collapses scalar wrappers.  Value-preserving.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Sum(args) => {
                let mut flat = Vec::new();
                let mut poly_acc: Vec<f64> = Vec::new();
                for e in args {
                    let s = e.simplify();
                    match s {
                        Expr::Sum(inner) => {
                            for x in inner {
                                if let Some(p) = x.poly_view() {
                                    poly_acc = poly_add(&poly_acc, &p);
                                } else {
                                    flat.push(x);
                                }
                            }
                        }
                        other => {
                            if let Some(p) = other.poly_view() {
                                poly_acc = poly_add(&poly_acc, &p);
                            } else {
                                flat.push(other);
                            }
                        }
                    }
                }
                let poly_acc = poly_trim(poly_acc);
                if !poly_acc.is_empty() {
                    flat.push(Expr::Poly(poly_acc));
                }
                match flat.len() {
                    0 => Expr::zero(),
                    1 => flat.pop().unwrap(),
                    _ => Expr::Sum(flat),
                }
            }
            Expr::Prod(args) => {
                let mut flat = Vec::new();
                let mut scalar = 1.0f64;
                let mut poly_acc: Vec<f64> = vec![1.0];
                for e in args {
                    let s = e.simplify();
                    let items = if let Expr::Prod(inner) = s { inner } else { vec![s] };
                    for x in items {
                        match x {
                            Expr::Scale { c, arg } => {
                                scalar *= c;
                                if let Some(p) = arg.poly_view() {
                                    if poly_acc.len() + p.len() <= 64 {
                                        poly_acc = poly_mul(&poly_acc, &p);
                                    } else {
                                        flat.push(Expr::Poly(p));
                                    }
                                } else {
                                    flat.push(*arg);
                                }
                            }
                            other => {
                                if let Some(p) = other.poly_view() {
                                    if poly_acc.len() + p.len() <= 64 {
                                        poly_acc = poly_mul(&poly_acc, &p);
                                    } else {
                                        flat.push(Expr::Poly(p));
                                    }
                                } else {
                                    flat.push(other);
                                }
                            }
                        }
                    }
                }
                let poly_acc = poly_trim(poly_acc);
                if poly_acc.is_empty() || scalar == 0.0 {
                    return Expr::zero();
                }
                let poly_is_one = poly_acc.len() == 1 && poly_acc[0] == 1.0;
                if poly_acc.len() == 1 {
                    scalar *= poly_acc[0];
                } else if !poly_is_one {
                    flat.insert(0, Expr::Poly(poly_acc));
                }
                let core = match flat.len() {
                    0 => Expr::constant(1.0),
                    1 => flat.pop().unwrap(),
                    _ => Expr::Prod(flat),
                };
                scale_expr(scalar, core)
            }
            Expr::Scale { c, arg } => scale_expr(*c, arg.simplify()),
            Expr::Affine { a, b, arg } => {
                let inner = arg.simplify();
                if *a == 1.0 && *b == 0.0 {
                    return inner;
                }
                if let Some(p) = inner.poly_view() {
                    return Expr::Poly(poly_trim(poly_affine_compose(&p, *a, *b)));
                }
                match inner {
                    Expr::Sin { amp, omega, phase } => {
                        Expr::Sin { amp, omega: omega * a, phase: omega * b + phase }
                    }
                    Expr::Cos { amp, omega, phase } => {
                        Expr::Cos { amp, omega: omega * a, phase: omega * b + phase }
                    }
                    Expr::Exp { alpha, beta } => {
                        Expr::Exp { alpha: alpha * a, beta: alpha * b + beta }
                    }
                    other => Expr::Affine { a: *a, b: *b, arg: Box::new(other) },
                }
            }
            Expr::Poly(c) => Expr::Poly(poly_trim(c.clone())),
            other => other.clone(),
        }
    }

    /// Certified range bounds on [u, v] by interval arithmetic.  Sound but
    /// not tight; may return infinite bounds for reciprocal nodes whose
    /// argument range straddles zero.
    pub fn range_cert(&self, u: f64, v: f64) -> Iv {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        match self {
            Expr::Poly(c) => poly_range(c, u, v),
            Expr::Exp { alpha, beta } => {
                let inner = iv_affine(*alpha, *beta, u, v);
                num::iv_exp(inner)
            }
            Expr::Sin { amp, omega, phase } => trig_range(*amp, *omega, *phase, u, v, true),
            Expr::Cos { amp, omega, phase } => trig_range(*amp, *omega, *phase, u, v, false),
            Expr::Sum(args) => args
                .iter()
                .fold((0.0, 0.0), |acc, e| num::iv_add(acc, e.range_cert(u, v))),
            Expr::Prod(args) => args
                .iter()
                .fold((1.0, 1.0), |acc, e| num::iv_mul(acc, e.range_cert(u, v))),
            Expr::Scale { c, arg } => num::iv_scale(arg.range_cert(u, v), *c),
            Expr::Affine { a, b, arg } => {
                let iv = iv_affine(*a, *b, u, v);
                arg.range_cert(iv.0, iv.1)
            }
            Expr::Abs(arg) => num::iv_abs(arg.range_cert(u, v)),
            Expr::Recip(arg) => num::iv_recip(arg.range_cert(u, v)),
            Expr::ExpOf(arg) => num::iv_exp(arg.range_cert(u, v)),
            Expr::OscRecip { amp, coef: _ } => {
                let m = u.abs().max(v.abs()) * amp.abs();
                (-m, m)
            }
            Expr::Integral(node) => {
                let lo = node.value(u);
                let hi = node.value(v);
                let slope = num::iv_mag(node.integrand.range_cert(u, v));
                if slope.is_finite() {
                    let w = (v - u) * slope;
                    (lo.min(hi) - w, lo.max(hi) + w)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
        }
    }

    /// Interior points of [u, v] where monotonicity can change, plus a flag
    /// saying whether the list is provably complete.  Incomplete lists come
    /// from sign-scanning the derivative and may miss pathologically close
    /// pairs of extrema.
    pub fn monotone_breaks(&self, u: f64, v: f64) -> (Vec<f64>, bool) {
        let (mut breaks, exact) = self.monotone_breaks_inner(u, v);
        breaks.sort_by(f64::total_cmp);
        // root finders may report a derivative zero exactly at a cell edge;
        // a break is only meaningful strictly inside
        breaks.retain(|&t| t > u && t < v);
        breaks.dedup();
        (breaks, exact)
    }

    fn monotone_breaks_inner(&self, u: f64, v: f64) -> (Vec<f64>, bool) {
        if v <= u {
            return (Vec::new(), true);
        }
        if let Some(c) = self.poly_view() {
            let d = poly_deriv(&c);
            return (poly_real_roots(&d, u, v), true);
        }
        match self {
            Expr::Exp { .. } => (Vec::new(), true),
            Expr::Sin { amp, omega, phase } => {
                if *amp == 0.0 || *omega == 0.0 {
                    (Vec::new(), true)
                } else {
                    (trig_grid(*omega, *phase, u, v, std::f64::consts::FRAC_PI_2), true)
                }
            }
            Expr::Cos { amp, omega, phase } => {
                if *amp == 0.0 || *omega == 0.0 {
                    (Vec::new(), true)
                } else {
                    (trig_grid(*omega, *phase, u, v, 0.0), true)
                }
            }
            Expr::Scale { c, arg } => {
                if *c == 0.0 {
                    (Vec::new(), true)
                } else {
                    arg.monotone_breaks(u, v)
                }
            }
            Expr::Affine { a, b, arg } => {
                if *a == 0.0 {
                    return (Vec::new(), true);
                }
                let (mapped, exact) = {
                    let (x0, x1) = iv_affine(*a, *b, u, v);
                    arg.monotone_breaks(x0, x1)
                };
                let mut back: Vec<f64> = mapped.iter().map(|s| (s - b) / a).collect();
                back.sort_by(f64::total_cmp);
                (back, exact)
            }
            _ => (self.scan_deriv_zeros(u, v), false),
        }
    }

    /// Interior zeros of the expression value on [u, v] with a completeness
    /// flag; used to split integration cells at kinks of |f|.
    pub fn zeros_in(&self, u: f64, v: f64) -> (Vec<f64>, bool) {
        let (mut zs, exact) = self.zeros_in_inner(u, v);
        zs.sort_by(f64::total_cmp);
        zs.retain(|&t| t > u && t < v);
        zs.dedup();
        (zs, exact)
    }

    fn zeros_in_inner(&self, u: f64, v: f64) -> (Vec<f64>, bool) {
        if v <= u {
            return (Vec::new(), true);
        }
        if let Some(c) = self.poly_view() {
            return (poly_real_roots(&c, u, v), true);
        }
        match self {
            Expr::Sin { amp, omega, phase } => {
                if *amp == 0.0 || *omega == 0.0 {
                    (Vec::new(), true)
                } else {
                    (trig_grid(*omega, *phase, u, v, 0.0), true)
                }
            }
            Expr::Cos { amp, omega, phase } => {
                if *amp == 0.0 || *omega == 0.0 {
                    (Vec::new(), true)
                } else {
                    (trig_grid(*omega, *phase, u, v, std::f64::consts::FRAC_PI_2), true)
                }
            }
            Expr::Exp { .. } | Expr::ExpOf(_) => (Vec::new(), true),
            Expr::Scale { c, arg } => {
                if *c == 0.0 {
                    (Vec::new(), true)
                } else {
                    arg.zeros_in(u, v)
                }
            }
            Expr::Abs(arg) => arg.zeros_in(u, v),
            _ => {
                let (mut zs, _) = self.scan_value_zeros(u, v);
                zs.sort_by(f64::total_cmp);
                (zs, false)
            }
        }
    }

    fn scan_deriv_zeros(&self, u: f64, v: f64) -> Vec<f64> {
        scan_sign_changes(&|t| self.deriv(t), u, v, 512)
    }

    fn scan_value_zeros(&self, u: f64, v: f64) -> (Vec<f64>, bool) {
        (scan_sign_changes(&|t| self.value(t), u, v, 512), false)
    }

    /// Sampled range estimate: evaluates at endpoints, monotonicity breaks
    /// and a uniform grid.  Sharp for catalogue pieces, heuristic otherwise.
    pub fn range_est(&self, u: f64, v: f64) -> Iv {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut look = |t: f64| {
            let val = self.value(t);
            lo = lo.min(val);
            hi = hi.max(val);
        };
        look(u);
        look(v);
        let (breaks, _) = self.monotone_breaks(u, v);
        for t in breaks {
            look(t);
        }
        for k in 1..32 {
            look(u + (v - u) * k as f64 / 32.0);
        }
        (lo, hi)
    }
}

fn scale_expr(c: f64, arg: Expr) -> Expr {
    if c == 0.0 {
        return Expr::zero();
    }
    if c == 1.0 {
        return arg;
    }
    match arg {
        Expr::Poly(p) => Expr::Poly(poly_scale(&p, c)),
        Expr::Sin { amp, omega, phase } => Expr::Sin { amp: amp * c, omega, phase },
        Expr::Cos { amp, omega, phase } => Expr::Cos { amp: amp * c, omega, phase },
        Expr::Scale { c: c2, arg } => scale_expr(c * c2, *arg),
        other => Expr::Scale { c, arg: Box::new(other) },
    }
}

fn iv_affine(a: f64, b: f64, u: f64, v: f64) -> Iv {
    let x = a * u + b;
    let y = a * v + b;
    (x.min(y), x.max(y))
}

/// Scan [u, v] for sign changes of `f` at `n` uniform samples and refine
/// each bracketed change by bisection.
fn scan_sign_changes(f: &dyn Fn(f64) -> f64, u: f64, v: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t_prev = u;
    let mut f_prev = f(u);
    for k in 1..=n {
        let t = u + (v - u) * k as f64 / n as f64;
        let ft = f(t);
        if f_prev == 0.0 {
            if t_prev > u {
                out.push(t_prev);
            }
        } else if ft != 0.0 && (ft > 0.0) != (f_prev > 0.0) {
            out.push(num::bisect(f, t_prev, t));
        }
        t_prev = t;
        f_prev = ft;
    }
    out.retain(|&t| t > u && t < v);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + a.abs()));
    out
}

// ---- polynomial helpers ---------------------------------------------------

pub fn poly_value(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

pub fn poly_deriv(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return Vec::new();
    }
    c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect()
}

pub fn poly_antideriv(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    for (k, &ck) in c.iter().enumerate() {
        out.push(ck / (k + 1) as f64);
    }
    poly_trim(out)
}

pub fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0);
    }
    out
}

pub fn poly_scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|&c| c * k).collect()
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Coefficients of p(a t + b).
pub fn poly_affine_compose(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &ck in c.iter().rev() {
        out = poly_mul(&out, &[b, a]);
        if out.is_empty() {
            out = vec![ck];
        } else {
            out[0] += ck;
        }
    }
    out
}

pub fn poly_trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

/// Interval Horner evaluation over t in [u, v].
pub fn poly_range(c: &[f64], u: f64, v: f64) -> Iv {
    let t = (u, v);
    let mut acc = (0.0, 0.0);
    for &ck in c.iter().rev() {
        acc = num::iv_add(num::iv_mul(acc, t), num::iv_point(ck));
    }
    acc
}

/// All real roots of `c` inside [u, v], found by recursively bracketing with
/// the roots of the derivative.  Complete up to floating point resolution;
/// touching (even multiplicity) roots without sign change are not reported.
pub fn poly_real_roots(c: &[f64], u: f64, v: f64) -> Vec<f64> {
    let c = poly_trim(c.to_vec());
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if r >= u && r <= v { vec![r] } else { Vec::new() };
    }
    let crit = poly_real_roots(&poly_deriv(&c), u, v);
    let mut brackets = Vec::with_capacity(crit.len() + 2);
    brackets.push(u);
    brackets.extend(crit);
    brackets.push(v);
    brackets.sort_by(f64::total_cmp);
    brackets.dedup();
    let mut roots = Vec::new();
    for w in brackets.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let f0 = poly_value(&c, x0);
        let f1 = poly_value(&c, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f1 != 0.0 && (f0 > 0.0) != (f1 > 0.0) {
            roots.push(num::bisect(&|t| poly_value(&c, t), x0, x1));
        }
    }
    if poly_value(&c, v) == 0.0 {
        roots.push(v);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + a.abs()));
    roots
}

/// Solutions of omega t + phase = offset (mod pi) inside [u, v].
fn trig_grid(omega: f64, phase: f64, u: f64, v: f64, offset: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let th0 = (omega * u + phase).min(omega * v + phase);
    let th1 = (omega * u + phase).max(omega * v + phase);
    let k0 = ((th0 - offset) / pi).ceil() as i64;
    let k1 = ((th1 - offset) / pi).floor() as i64;
    let mut out = Vec::new();
    for k in k0..=k1 {
        let theta = offset + k as f64 * pi;
        let t = (theta - phase) / omega;
        if t > u && t < v {
            out.push(t);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn trig_range(amp: f64, omega: f64, phase: f64, u: f64, v: f64, is_sin: bool) -> Iv {
    if amp == 0.0 {
        return (0.0, 0.0);
    }
    let eval = |t: f64| {
        let theta = omega * t + phase;
        if is_sin {
            theta.sin()
        } else {
            theta.cos()
        }
    };
    let mut lo = eval(u).min(eval(v));
    let mut hi = eval(u).max(eval(v));
    let th0 = (omega * u + phase).min(omega * v + phase);
    let th1 = (omega * u + phase).max(omega * v + phase);
    if th1 - th0 >= 2.0 * std::f64::consts::PI {
        lo = -1.0;
        hi = 1.0;
    } else {
        // extrema of sin at pi/2 + k pi, of cos at k pi
        let offset = if is_sin { std::f64::consts::FRAC_PI_2 } else { 0.0 };
        let pi = std::f64::consts::PI;
        let k0 = ((th0 - offset) / pi).ceil() as i64;
        let k1 = ((th1 - offset) / pi).floor() as i64;
        for k in k0..=k1 {
            let s = if is_sin {
                (offset + k as f64 * pi).sin()
            } else {
                (k as f64 * pi).cos()
            };
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    num::iv_scale((lo, hi), amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn num_deriv(e: &Expr, t: f64) -> f64 {
        let h = 1e-6;
        (e.value(t + h) - e.value(t - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let exprs = vec![
            Expr::Poly(vec![1.0, -2.0, 0.5, 3.0]),
            Expr::Exp { alpha: -0.7, beta: 0.2 },
            Expr::Sin { amp: 2.0, omega: 3.0, phase: 0.4 },
            Expr::Cos { amp: -1.5, omega: 2.0, phase: 1.0 },
            Expr::Prod(vec![
                Expr::Poly(vec![0.0, 1.0]),
                Expr::Sin { amp: 1.0, omega: 2.0, phase: 0.0 },
            ]),
            Expr::Affine {
                a: 2.0,
                b: -1.0,
                arg: Box::new(Expr::Exp { alpha: 1.0, beta: 0.0 }),
            },
            Expr::Recip(Box::new(Expr::Poly(vec![2.0, 1.0]))),
            Expr::ExpOf(Box::new(Expr::Sin { amp: 0.5, omega: 1.0, phase: 0.0 })),
        ];
        for e in &exprs {
            for k in 0..7 {
                let t = 0.1 + 0.13 * k as f64;
                assert_abs_diff_eq!(e.deriv(t), num_deriv(e, t), epsilon = 1e-5);
                if let Some(de) = e.deriv_expr() {
                    assert_abs_diff_eq!(de.value(t), e.deriv(t), epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn antiderivative_differentiates_back() {
        let exprs = vec![
            Expr::Poly(vec![1.0, 2.0, 3.0]),
            Expr::Exp { alpha: 2.0, beta: -1.0 },
            Expr::Sin { amp: 3.0, omega: 0.5, phase: 0.1 },
            Expr::Cos { amp: 1.0, omega: 4.0, phase: 0.0 },
            Expr::Prod(vec![Expr::Poly(vec![0.0, 1.0]), Expr::Poly(vec![1.0, 1.0])]),
            Expr::Prod(vec![Expr::constant(3.0), Expr::Cos { amp: 1.0, omega: 1.0, phase: 0.0 }]),
            Expr::Affine {
                a: -2.0,
                b: 1.0,
                arg: Box::new(Expr::Sin { amp: 1.0, omega: 1.0, phase: 0.0 }),
            },
        ];
        for e in &exprs {
            let f = e.antiderivative().expect("catalogue antiderivative");
            for k in 0..9 {
                let t = -0.4 + 0.21 * k as f64;
                assert_abs_diff_eq!(f.deriv(t), e.value(t), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn oscillatory_product_has_no_closed_antiderivative() {
        let e = Expr::Prod(vec![
            Expr::Poly(vec![0.0, 1.0]),
            Expr::Sin { amp: 1.0, omega: 1.0, phase: 0.0 },
        ]);
        assert!(e.antiderivative().is_none());
    }

    #[test]
    fn range_cert_contains_samples() {
        let exprs = vec![
            Expr::Poly(vec![0.0, -1.0, 0.0, 1.0]),
            Expr::Sin { amp: 2.0, omega: 5.0, phase: 1.0 },
            Expr::Prod(vec![
                Expr::Poly(vec![1.0, 1.0]),
                Expr::Cos { amp: 1.0, omega: 3.0, phase: 0.0 },
            ]),
            Expr::Abs(Box::new(Expr::Poly(vec![-0.25, 0.0, 1.0]))),
            Expr::ExpOf(Box::new(Expr::Poly(vec![0.0, 0.0, -1.0]))),
        ];
        for e in &exprs {
            let (lo, hi) = e.range_cert(-1.0, 2.0);
            for k in 0..=64 {
                let t = -1.0 + 3.0 * k as f64 / 64.0;
                let val = e.value(t);
                assert!(val >= lo - 1e-10 && val <= hi + 1e-10, "{val} not in [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn trig_range_is_tight_on_subperiod_windows() {
        // window contains the crest at pi/2 but not the trough
        let e = Expr::Sin { amp: 1.0, omega: 1.0, phase: 0.0 };
        let (lo, hi) = e.range_cert(0.1, 1.7);
        assert_abs_diff_eq!(lo, 0.1f64.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        // window strictly inside the rising quarter wave: endpoint values
        let (lo2, hi2) = e.range_cert(0.2, 1.2);
        assert_abs_diff_eq!(lo2, 0.2f64.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(hi2, 1.2f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn poly_roots_are_complete_on_factored_examples() {
        // (t - 0.1)(t - 0.12)(t - 0.9) has close roots that plain sampling misses
        let c = poly_mul(&poly_mul(&[-0.1, 1.0], &[-0.12, 1.0]), &[-0.9, 1.0]);
        let roots = poly_real_roots(&c, 0.0, 1.0);
        assert_eq!(roots.len(), 3);
        assert_abs_diff_eq!(roots[0], 0.1, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[1], 0.12, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[2], 0.9, epsilon = 1e-10);
    }

    #[test]
    fn monotone_breaks_find_trig_extrema() {
        let e = Expr::Sin { amp: 1.0, omega: 1.0, phase: 0.0 };
        let (breaks, exact) = e.monotone_breaks(0.0, 2.0 * std::f64::consts::PI);
        assert!(exact);
        assert_eq!(breaks.len(), 2);
        assert_abs_diff_eq!(breaks[0], std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(breaks[1], 1.5 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn integral_node_tracks_closed_form() {
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 / 4.0).collect();
        let e = Expr::integral_of(Expr::Cos { amp: 1.0, omega: 1.0, phase: 0.0 }, &grid, 0.0, 1e-13);
        for k in 0..=40 {
            let t = 2.0 * k as f64 / 40.0;
            assert_abs_diff_eq!(e.value(t), t.sin(), epsilon = 1e-11);
        }
        assert_abs_diff_eq!(e.deriv(1.3), (1.3f64).cos(), epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_kernel_vanishes_at_origin_and_matches_formula() {
        let e = Expr::OscRecip { amp: 1.0, coef: std::f64::consts::FRAC_PI_2 };
        assert_eq!(e.value(0.0), 0.0);
        let t = 0.3;
        assert_abs_diff_eq!(
            e.value(t),
            t * (std::f64::consts::FRAC_PI_2 / t).cos(),
            epsilon = 1e-15
        );
        // alternating sign at t_k = 1/k: value is +-1/k * cos(k pi / 2)
        for k in 1..6 {
            let tk = 1.0 / k as f64;
            let want = tk * (std::f64::consts::FRAC_PI_2 * k as f64).cos();
            assert_abs_diff_eq!(e.value(tk), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn simplify_collapses_scaled_products() {
        let e = Expr::Prod(vec![
            Expr::constant(3.0),
            Expr::Cos { amp: 2.0, omega: 1.0, phase: 0.0 },
        ]);
        match e.simplify() {
            Expr::Cos { amp, .. } => assert_abs_diff_eq!(amp, 6.0, epsilon = 1e-15),
            other => panic!("expected collapsed cosine, got {other:?}"),
        }
        let z = Expr::Prod(vec![Expr::zero(), Expr::Exp { alpha: 1.0, beta: 0.0 }]);
        assert_eq!(z.simplify(), Expr::zero());
    }

    #[test]
    fn affine_compose_expands_polynomials() {
        // p(t) = t^2, p(2t - 1) = 4t^2 - 4t + 1
        let c = poly_affine_compose(&[0.0, 0.0, 1.0], 2.0, -1.0);
        assert_eq!(c, vec![1.0, -4.0, 4.0]);
    }
}
