//! Represented functions: a continuous piecewise-smooth part, an at most
//! countable family of jumps, and optional isolated value overrides.
//!
//! The pointwise model on the domain [a, b] is
//!
//! ```text
//! f(t) = c0 + piece(t) + sum of sigma(s) over jump points s < t  + sig_minus(t)
//! ```
//!
//! with each jump split into its left part `sig_minus = f(t) - f(t-)` and
//! right part `sig_plus = f(t+) - f(t)`.  The function is extended by
//! constants beyond [a, b], so `sig_minus(a) = 0` and `sig_plus(b) = 0`
//! by construction.  Overrides replace the value at finitely many points
//! without touching one-sided limits; they are kept disjoint from jump
//! locations.
//!
//! Jump locations read from documents are exact decimal tokens; distinct
//! tokens that collapse to the same binary float are rejected, so runtime
//! location comparisons can be plain float equality.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::num::{self, Iv};

// ---- locations -------------------------------------------------------------

/// Parse a decimal string (optional sign, digits, optional fraction and
/// exponent) into its float value and a canonical token `[-]digits e exp`
/// with leading/trailing zeros stripped.
pub fn parse_decimal(s: &str) -> Option<(f64, String)> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    let bytes = t.as_bytes();
    let mut i = 0;
    let mut neg = false;
    if bytes[i] == b'+' || bytes[i] == b'-' {
        neg = bytes[i] == b'-';
        i += 1;
    }
    let mut digits = String::new();
    let mut exp: i64 = 0;
    let mut seen_digit = false;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        digits.push(bytes[i] as char);
        seen_digit = true;
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            exp -= 1;
            seen_digit = true;
            i += 1;
        }
    }
    if !seen_digit {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        let mut eneg = false;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            eneg = bytes[i] == b'-';
            i += 1;
        }
        if i == bytes.len() {
            return None;
        }
        let mut e: i64 = 0;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            e = e.saturating_mul(10).saturating_add((bytes[i] - b'0') as i64);
            i += 1;
        }
        exp += if eneg { -e } else { e };
    }
    if i != bytes.len() {
        return None;
    }
    let value: f64 = t.parse().ok()?;
    // canonical form: strip leading zeros, then trailing zeros (shifting exp)
    let stripped: &str = digits.trim_start_matches('0');
    let mut core = stripped.to_string();
    while core.ends_with('0') {
        core.pop();
        exp += 1;
    }
    let canon = if core.is_empty() {
        "0e0".to_string()
    } else {
        format!("{}{}e{}", if neg { "-" } else { "" }, core, exp)
    };
    Some((value, canon))
}

/// A jump or override location.  `token` carries the canonical decimal when
/// the location came from a document; engine-generated locations have none.
/// Numeric identity (`same_point`) is float equality; `exact_matches` also
/// honours tokens and is what existence checks use.
#[derive(Debug, Clone)]
pub struct Loc {
    pub t: f64,
    token: Option<String>,
}

impl Loc {
    pub fn from_value(t: f64) -> Loc {
        Loc { t, token: None }
    }

    pub fn from_token(s: &str) -> Option<Loc> {
        let (t, canon) = parse_decimal(s)?;
        Some(Loc { t, token: Some(canon) })
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    pub fn same_point(&self, other: &Loc) -> bool {
        self.t == other.t
    }

    pub fn exact_matches(&self, other: &Loc) -> bool {
        match (&self.token, &other.token) {
            (Some(x), Some(y)) => x == y,
            _ => self.t == other.t,
        }
    }
}

impl PartialEq for Loc {
    fn eq(&self, other: &Self) -> bool {
        self.same_point(other)
    }
}

// ---- structural pieces -----------------------------------------------------

#[derive(Debug, Clone)]
pub struct SmoothPiece {
    pub lo: f64,
    pub hi: f64,
    pub expr: Expr,
}

/// One jump: `left = f(t) - f(t-)`, `right = f(t+) - f(t)`.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub loc: Loc,
    pub left: f64,
    pub right: f64,
}

impl JumpRecord {
    pub fn sigma(&self) -> f64 {
        self.left + self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSide {
    /// Locations c * r^k accumulate at 0 from the right (domain must
    /// satisfy a <= 0 < c < b).
    Left,
    /// Locations b - c * r^k accumulate at b from the left.
    Right,
}

/// Geometric jump family: jumps of size A * q^k at geometrically spaced
/// locations.  Materialized records put the whole jump on the right side
/// (value changes just past the location, like the unit jump).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSeries {
    pub side: SeriesSide,
    pub c: f64,
    pub r: f64,
    pub amp: f64,
    pub q: f64,
}

impl JumpSeries {
    pub fn location(&self, k: u32, b: f64) -> f64 {
        match self.side {
            SeriesSide::Left => self.c * self.r.powi(k as i32),
            SeriesSide::Right => b - self.c * self.r.powi(k as i32),
        }
    }

    pub fn magnitude(&self, k: u32) -> f64 {
        self.amp * self.q.powi(k as i32)
    }

    /// Bound on the total jump mass beyond index n.
    pub fn tail_bound(&self, n: u32) -> f64 {
        self.amp.abs() * self.q.abs().powi(n as i32 + 1) / (1.0 - self.q.abs())
    }

    pub fn same_generator(&self, other: &JumpSeries) -> bool {
        self.side == other.side && self.c == other.c && self.r == other.r
    }

    fn validate(&self, a: f64, b: f64, pointer: &str) -> Result<()> {
        if !(self.c > 0.0 && self.r > 0.0 && self.r < 1.0) {
            return Err(Error::invariant(pointer, "series needs c > 0 and 0 < r < 1"));
        }
        if !(self.q.abs() < 1.0) {
            return Err(Error::invariant(pointer, "series needs |q| < 1"));
        }
        match self.side {
            SeriesSide::Left => {
                if !(a <= 0.0 && self.c < b) {
                    return Err(Error::invariant(
                        pointer,
                        "left series needs a <= 0 and c < b so locations stay interior",
                    ));
                }
            }
            SeriesSide::Right => {
                if !(self.c < b - a) {
                    return Err(Error::invariant(
                        pointer,
                        "right series needs c < b - a so locations stay interior",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Records with cumulative remainder below `tol` (capped count), plus
    /// the unrepresented tail mass.
    fn materialize(&self, b: f64, tol: f64) -> (Vec<JumpRecord>, f64) {
        const CAP: u32 = 4096;
        let mut n = 0u32;
        while n < CAP && self.tail_bound(n) > tol {
            n += 1;
        }
        let mut out = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            let m = self.magnitude(k);
            if m != 0.0 {
                out.push(JumpRecord {
                    loc: Loc::from_value(self.location(k, b)),
                    left: 0.0,
                    right: m,
                });
            }
        }
        (out, self.tail_bound(n))
    }
}

#[derive(Debug, Clone)]
pub struct OverridePt {
    pub loc: Loc,
    pub value: f64,
}

/// One-sided limits and jump parts at a point, computed from core values
/// (overrides never influence them).
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub left: f64,
    pub right: f64,
    pub sig_minus: f64,
    pub sig_plus: f64,
}

impl Limits {
    pub fn sigma(&self) -> f64 {
        self.sig_minus + self.sig_plus
    }
}

// ---- the represented function ----------------------------------------------

#[derive(Debug, Clone)]
pub struct RepFunc {
    a: f64,
    b: f64,
    c0: f64,
    pieces: Vec<SmoothPiece>,
    explicit_jumps: Vec<JumpRecord>,
    series: Vec<JumpSeries>,
    overrides: Vec<OverridePt>,
    series_tol: f64,
    // derived on construction
    jumps: Vec<JumpRecord>,
    cum: Vec<f64>,
    tail: f64,
}

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

impl RepFunc {
    pub fn new(
        domain: (f64, f64),
        c0: f64,
        pieces: Vec<SmoothPiece>,
        jumps: Vec<JumpRecord>,
        series: Vec<JumpSeries>,
        overrides: Vec<OverridePt>,
        series_tol: f64,
    ) -> Result<RepFunc> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invariant("/domain", "domain must be a finite interval a < b"));
        }
        if !(series_tol > 0.0) {
            return Err(Error::invariant("/series_tol", "series tolerance must be positive"));
        }

        let mut pieces = pieces;
        if pieces.is_empty() {
            pieces.push(SmoothPiece { lo: a, hi: b, expr: Expr::zero() });
        }
        if pieces[0].lo != a || pieces[pieces.len() - 1].hi != b {
            return Err(Error::invariant("/continuous", "pieces must tile exactly [a, b]"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.lo < p.hi) {
                return Err(Error::invariant(
                    format!("/continuous/{i}"),
                    "piece interval must have positive length",
                ));
            }
        }
        for i in 1..pieces.len() {
            if pieces[i].lo != pieces[i - 1].hi {
                return Err(Error::invariant(
                    format!("/continuous/{i}/on"),
                    "pieces must be adjacent without gaps or overlaps",
                ));
            }
            let s = pieces[i].lo;
            let vl = pieces[i - 1].expr.value(s);
            let vr = pieces[i].expr.value(s);
            let scale = 1.0 + vl.abs().max(vr.abs());
            if (vl - vr).abs() > 1e-9 * scale {
                return Err(Error::invariant(
                    format!("/continuous/{i}"),
                    format!("pieces disagree at breakpoint {s}: {vl} vs {vr}"),
                ));
            }
        }

        let mut explicit = jumps;
        explicit.retain(|j| j.left != 0.0 || j.right != 0.0);
        explicit.sort_by(|x, y| x.loc.t.total_cmp(&y.loc.t));
        for (i, j) in explicit.iter().enumerate() {
            let ptr = format!("/jumps/{i}/t");
            if !(j.loc.t >= a && j.loc.t <= b) {
                return Err(Error::invariant(ptr, "jump location outside the domain"));
            }
            if j.loc.t == a && j.left != 0.0 {
                return Err(Error::invariant(
                    ptr,
                    "a jump at the left endpoint must have zero left part (constant extension)",
                ));
            }
            if j.loc.t == b && j.right != 0.0 {
                return Err(Error::invariant(
                    ptr,
                    "a jump at the right endpoint must have zero right part (constant extension)",
                ));
            }
        }
        for w in explicit.windows(2) {
            if w[0].loc.t == w[1].loc.t {
                let msg = if w[0].loc.exact_matches(&w[1].loc) {
                    "duplicate jump location".to_string()
                } else {
                    "distinct decimal tokens collapse to the same float".to_string()
                };
                return Err(Error::invariant("/jumps", msg));
            }
        }

        for (i, s) in series.iter().enumerate() {
            s.validate(a, b, &format!("/series/{i}"))?;
        }

        // materialize series and merge with explicit records
        let mut all = explicit.clone();
        let mut tail = 0.0;
        for s in &series {
            if s.amp == 0.0 {
                continue;
            }
            let (recs, t) = s.materialize(b, series_tol);
            tail += t;
            for r in recs {
                match all.iter_mut().find(|e| e.loc.same_point(&r.loc)) {
                    Some(existing) => {
                        existing.left += r.left;
                        existing.right += r.right;
                    }
                    None => all.push(r),
                }
            }
        }
        all.sort_by(|x, y| x.loc.t.total_cmp(&y.loc.t));
        all.retain(|j| j.left != 0.0 || j.right != 0.0);

        let mut overrides = overrides;
        overrides.sort_by(|x, y| x.loc.t.total_cmp(&y.loc.t));
        for (i, ov) in overrides.iter().enumerate() {
            let ptr = format!("/overrides/{i}/t");
            if !(ov.loc.t >= a && ov.loc.t <= b) {
                return Err(Error::invariant(ptr, "override location outside the domain"));
            }
            if all.iter().any(|j| j.loc.same_point(&ov.loc)) {
                return Err(Error::invariant(ptr, "override points must be disjoint from jump locations"));
            }
        }
        for w in overrides.windows(2) {
            if w[0].loc.t == w[1].loc.t {
                return Err(Error::invariant("/overrides", "duplicate override location"));
            }
        }

        let mut cum = Vec::with_capacity(all.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for j in &all {
            acc += j.sigma();
            cum.push(acc);
        }

        Ok(RepFunc {
            a,
            b,
            c0,
            pieces,
            explicit_jumps: explicit,
            series,
            overrides,
            series_tol,
            jumps: all,
            cum,
            tail,
        })
    }

    // -- convenience constructors --

    pub fn constant(a: f64, b: f64, c: f64) -> RepFunc {
        RepFunc::new((a, b), c, Vec::new(), Vec::new(), Vec::new(), Vec::new(), DEFAULT_SERIES_TOL)
            .expect("constant function is always valid")
    }

    pub fn from_expr(a: f64, b: f64, expr: Expr) -> RepFunc {
        RepFunc::new(
            (a, b),
            0.0,
            vec![SmoothPiece { lo: a, hi: b, expr }],
            Vec::new(),
            Vec::new(),
            Vec::new(),
            DEFAULT_SERIES_TOL,
        )
        .expect("single smooth piece is always valid")
    }

    /// The unit jump at c: 0 for t <= c, 1 for t > c.
    pub fn unit_jump(a: f64, b: f64, c: f64) -> Result<RepFunc> {
        RepFunc::new(
            (a, b),
            0.0,
            Vec::new(),
            vec![JumpRecord { loc: Loc::from_value(c), left: 0.0, right: 1.0 }],
            Vec::new(),
            Vec::new(),
            DEFAULT_SERIES_TOL,
        )
    }

    // -- accessors --

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn pieces(&self) -> &[SmoothPiece] {
        &self.pieces
    }

    /// All jump records, explicit and materialized, sorted by location.
    pub fn jumps(&self) -> &[JumpRecord] {
        &self.jumps
    }

    pub fn explicit_jumps(&self) -> &[JumpRecord] {
        &self.explicit_jumps
    }

    pub fn series(&self) -> &[JumpSeries] {
        &self.series
    }

    pub fn overrides(&self) -> &[OverridePt] {
        &self.overrides
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    /// Unrepresented jump mass (series remainder beyond materialization).
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn has_series(&self) -> bool {
        !self.series.is_empty()
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t < self.a || t > self.b || t.is_nan() {
            Err(Error::Domain { value: t, a: self.a, b: self.b })
        } else {
            Ok(())
        }
    }

    // -- pointwise machinery --

    /// Piece governing the value and right limit at t ([lo, hi) convention,
    /// last piece closed).
    fn piece_right_idx(&self, t: f64) -> usize {
        let idx = self.pieces.partition_point(|p| p.hi <= t);
        idx.min(self.pieces.len() - 1)
    }

    /// Piece governing the left limit at t (piece ending at t, if t is a
    /// seam).
    fn piece_left_idx(&self, t: f64) -> usize {
        let idx = self.pieces.partition_point(|p| p.hi < t);
        idx.min(self.pieces.len() - 1)
    }

    fn piece_value(&self, t: f64) -> f64 {
        self.pieces[self.piece_right_idx(t)].expr.value(t)
    }

    /// Cumulative jump mass strictly below t.
    fn salt_below(&self, t: f64) -> f64 {
        let idx = self.jumps.partition_point(|j| j.loc.t < t);
        self.cum[idx]
    }

    /// Cumulative jump mass at or below t.
    pub(crate) fn salt_through(&self, t: f64) -> f64 {
        let idx = self.jumps.partition_point(|j| j.loc.t <= t);
        self.cum[idx]
    }

    /// Jump parts at t: (sig_minus, sig_plus); zeros when t is not a jump
    /// location.
    pub fn jump_parts(&self, t: f64) -> (f64, f64) {
        let idx = self.jumps.partition_point(|j| j.loc.t < t);
        if idx < self.jumps.len() && self.jumps[idx].loc.t == t {
            (self.jumps[idx].left, self.jumps[idx].right)
        } else {
            (0.0, 0.0)
        }
    }

    /// Value ignoring overrides.
    pub fn core_value(&self, t: f64) -> f64 {
        let (sig_minus, _) = self.jump_parts(t);
        self.c0 + self.piece_value(t) + self.salt_below(t) + sig_minus
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if let Ok(idx) = self
            .overrides
            .binary_search_by(|ov| ov.loc.t.total_cmp(&t))
        {
            return Ok(self.overrides[idx].value);
        }
        Ok(self.core_value(t))
    }

    pub fn left_limit(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if t == self.a {
            return Ok(self.core_value(t));
        }
        let pv = self.pieces[self.piece_left_idx(t)].expr.value(t);
        Ok(self.c0 + pv + self.salt_below(t))
    }

    pub fn right_limit(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if t == self.b {
            return Ok(self.core_value(t));
        }
        let pv = self.piece_value(t);
        Ok(self.c0 + pv + self.salt_through(t))
    }

    /// One-sided limits and jump parts at t, from core values.
    pub fn limits_and_jumps(&self, t: f64) -> Result<Limits> {
        let left = self.left_limit(t)?;
        let right = self.right_limit(t)?;
        let (sig_minus, sig_plus) = self.jump_parts(t);
        Ok(Limits { left, right, sig_minus, sig_plus })
    }

    // -- decompositions --

    /// Split into continuous part (c0 + pieces) and saltus part (jumps and
    /// series, based at 0).  Overrides are dropped: the identity
    /// f = f_c + f_d holds at non-override points.
    pub fn decompose(&self) -> (RepFunc, RepFunc) {
        let fc = RepFunc::new(
            (self.a, self.b),
            self.c0,
            self.pieces.clone(),
            Vec::new(),
            Vec::new(),
            Vec::new(),
            self.series_tol,
        )
        .expect("continuous part of a valid function is valid");
        let fd = RepFunc::new(
            (self.a, self.b),
            0.0,
            Vec::new(),
            self.explicit_jumps.clone(),
            self.series.clone(),
            Vec::new(),
            self.series_tol,
        )
        .expect("saltus part of a valid function is valid");
        (fc, fd)
    }

    /// Right/left split: `f_plus` is the right-continuous pure saltus part
    /// carrying all left jump parts; `f_minus = f - f_plus` is
    /// left-continuous and carries the right jump parts together with all
    /// continuous content.  Overrides are dropped.
    pub fn rl_split(&self) -> (RepFunc, RepFunc) {
        let plus_jumps: Vec<JumpRecord> = self
            .jumps
            .iter()
            .filter(|j| j.left != 0.0)
            .map(|j| JumpRecord { loc: j.loc.clone(), left: j.left, right: 0.0 })
            .collect();
        let f_plus = RepFunc::new(
            (self.a, self.b),
            0.0,
            Vec::new(),
            plus_jumps,
            Vec::new(),
            Vec::new(),
            self.series_tol,
        )
        .expect("left-part saltus of a valid function is valid");
        let minus_jumps: Vec<JumpRecord> = self
            .explicit_jumps
            .iter()
            .filter(|j| j.right != 0.0)
            .map(|j| JumpRecord { loc: j.loc.clone(), left: 0.0, right: j.right })
            .collect();
        let f_minus = RepFunc::new(
            (self.a, self.b),
            self.c0,
            self.pieces.clone(),
            minus_jumps,
            self.series.clone(),
            Vec::new(),
            self.series_tol,
        )
        .expect("right-part of a valid function is valid");
        (f_plus, f_minus)
    }

    // -- combination --

    pub fn scale(&self, k: f64) -> RepFunc {
        let pieces = self
            .pieces
            .iter()
            .map(|p| SmoothPiece {
                lo: p.lo,
                hi: p.hi,
                expr: Expr::Scale { c: k, arg: Box::new(p.expr.clone()) }.simplify(),
            })
            .collect();
        let jumps = self
            .explicit_jumps
            .iter()
            .map(|j| JumpRecord { loc: j.loc.clone(), left: k * j.left, right: k * j.right })
            .collect();
        let series = self
            .series
            .iter()
            .map(|s| JumpSeries { amp: k * s.amp, ..s.clone() })
            .collect();
        let overrides = self
            .overrides
            .iter()
            .map(|ov| OverridePt { loc: ov.loc.clone(), value: k * ov.value })
            .collect();
        RepFunc::new((self.a, self.b), k * self.c0, pieces, jumps, series, overrides, self.series_tol)
            .expect("scaling preserves validity")
    }

    pub fn add(&self, other: &RepFunc) -> Result<RepFunc> {
        if self.domain() != other.domain() {
            return Err(Error::invariant("/domain", "operands must share the same domain"));
        }
        let mut seams: Vec<f64> = self
            .pieces
            .iter()
            .chain(other.pieces.iter())
            .flat_map(|p| [p.lo, p.hi])
            .collect();
        seams.sort_by(f64::total_cmp);
        seams.dedup();
        let mut pieces = Vec::with_capacity(seams.len() - 1);
        for w in seams.windows(2) {
            let pf = &self.pieces[self.piece_right_idx(w[0])].expr;
            let pg = &other.pieces[other.piece_right_idx(w[0])].expr;
            pieces.push(SmoothPiece {
                lo: w[0],
                hi: w[1],
                expr: Expr::Sum(vec![pf.clone(), pg.clone()]).simplify(),
            });
        }

        let mut jumps: Vec<JumpRecord> = Vec::new();
        for j in self.explicit_jumps.iter().chain(other.explicit_jumps.iter()) {
            match jumps.iter_mut().find(|e| e.loc.same_point(&j.loc)) {
                Some(e) => {
                    e.left += j.left;
                    e.right += j.right;
                    if e.loc.token().is_none() && j.loc.token().is_some() {
                        e.loc = j.loc.clone();
                    }
                }
                None => jumps.push(j.clone()),
            }
        }

        let series: Vec<JumpSeries> =
            self.series.iter().chain(other.series.iter()).cloned().collect();
        let series_tol = self.series_tol.min(other.series_tol);

        // overrides: fold into jump records where locations collide,
        // otherwise keep as value overrides of the sum
        let mut draft = RepFunc::new(
            (self.a, self.b),
            self.c0 + other.c0,
            pieces,
            jumps,
            series,
            Vec::new(),
            series_tol,
        )?;
        let ov_locs: Vec<Loc> = self
            .overrides
            .iter()
            .chain(other.overrides.iter())
            .map(|ov| ov.loc.clone())
            .collect();
        if !ov_locs.is_empty() {
            let mut overrides = Vec::new();
            for loc in ov_locs {
                if overrides.iter().any(|o: &OverridePt| o.loc.same_point(&loc)) {
                    continue;
                }
                let v = self.eval(loc.t)? + other.eval(loc.t)?;
                if draft.jumps.iter().any(|j| j.loc.same_point(&loc)) {
                    // collision with a jump of the sum: absorb the override
                    // into the jump record so pointwise values stay exact
                    let l = draft.left_limit(loc.t)?;
                    let r = draft.right_limit(loc.t)?;
                    let rec = draft
                        .explicit_jumps
                        .iter_mut()
                        .find(|j| j.loc.same_point(&loc));
                    if let Some(rec) = rec {
                        rec.left = v - l;
                        rec.right = r - v;
                    }
                } else if v != draft.core_value(loc.t) {
                    overrides.push(OverridePt { loc, value: v });
                }
            }
            draft = RepFunc::new(
                (self.a, self.b),
                draft.c0,
                draft.pieces,
                draft.explicit_jumps,
                draft.series,
                overrides,
                series_tol,
            )?;
        }
        Ok(draft)
    }

    pub fn sub(&self, other: &RepFunc) -> Result<RepFunc> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product.  Requires finite jump families on both operands:
    /// a jump series multiplied by a varying factor is no longer geometric,
    /// so products with series are rejected.
    pub fn mul(&self, other: &RepFunc) -> Result<RepFunc> {
        if self.domain() != other.domain() {
            return Err(Error::invariant("/domain", "operands must share the same domain"));
        }
        if self.has_series() || other.has_series() {
            return Err(Error::UnsupportedProduct);
        }

        // event grid: seams, jumps and overrides of both operands
        let mut events: Vec<f64> = Vec::new();
        for f in [self, other] {
            events.extend(f.pieces.iter().flat_map(|p| [p.lo, p.hi]));
            events.extend(f.jumps.iter().map(|j| j.loc.t));
            events.extend(f.overrides.iter().map(|ov| ov.loc.t));
        }
        events.sort_by(f64::total_cmp);
        events.dedup();

        // records first: product limits at every candidate point
        let mut jumps: Vec<JumpRecord> = Vec::new();
        let mut folded: Vec<OverridePt> = Vec::new();
        for &s in &events {
            let fl = self.left_limit(s)?;
            let fr = self.right_limit(s)?;
            let gl = other.left_limit(s)?;
            let gr = other.right_limit(s)?;
            let l = fl * gl;
            let r = fr * gr;
            let vc = self.core_value(s) * other.core_value(s);
            let v = self.eval(s)? * other.eval(s)?;
            let loc = self
                .jumps
                .iter()
                .chain(other.jumps.iter())
                .find(|j| j.loc.t == s)
                .map(|j| j.loc.clone())
                .unwrap_or_else(|| Loc::from_value(s));
            let (mut left, mut right) = (vc - l, r - vc);
            if v != vc {
                if left != 0.0 || right != 0.0 {
                    // override collides with a genuine jump of the product:
                    // fold it into the record
                    left = v - l;
                    right = r - v;
                } else {
                    folded.push(OverridePt { loc: loc.clone(), value: v });
                }
            }
            if left != 0.0 || right != 0.0 {
                jumps.push(JumpRecord { loc, left, right });
            }
        }

        // continuous part per cell: full-value product minus accumulated
        // jump mass at the cell
        let mut cum_map: Vec<(f64, f64)> = Vec::new();
        let mut acc = 0.0;
        for j in &jumps {
            acc += j.sigma();
            cum_map.push((j.loc.t, acc));
        }
        let salt_at = |u: f64| -> f64 {
            let idx = cum_map.partition_point(|e| e.0 <= u);
            if idx == 0 {
                0.0
            } else {
                cum_map[idx - 1].1
            }
        };
        let mut pieces = Vec::with_capacity(events.len() - 1);
        for w in events.windows(2) {
            let u = w[0];
            let prod = Expr::Prod(vec![self.cell_expr(u), other.cell_expr(u)]);
            let shift = Expr::constant(-salt_at(u));
            pieces.push(SmoothPiece {
                lo: u,
                hi: w[1],
                expr: Expr::Sum(vec![prod, shift]).simplify(),
            });
        }

        RepFunc::new(
            (self.a, self.b),
            0.0,
            pieces,
            jumps,
            Vec::new(),
            folded,
            self.series_tol.min(other.series_tol),
        )
    }

    /// Full-value expression (core) valid on the open cell just right of u:
    /// active piece plus the constant c0 + accumulated jump mass.
    pub(crate) fn cell_expr(&self, u: f64) -> Expr {
        let piece = &self.pieces[self.piece_right_idx(u)];
        let shift = self.c0 + self.salt_through(u);
        Expr::Sum(vec![piece.expr.clone(), Expr::constant(shift)]).simplify()
    }

    /// Event grid of this function: endpoints, piece seams, jump locations
    /// and override locations, sorted and deduplicated.
    pub(crate) fn event_grid(&self) -> Vec<f64> {
        let mut pts = vec![self.a, self.b];
        pts.extend(self.pieces.iter().map(|p| p.lo));
        pts.extend(self.jumps.iter().map(|j| j.loc.t));
        pts.extend(self.overrides.iter().map(|ov| ov.loc.t));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Certified value hull over the closed cell [u, v], including limits,
    /// interior jumps, overrides and the series tail.
    pub(crate) fn range_on(&self, u: f64, v: f64) -> Iv {
        let mut hull: Option<Iv> = None;
        let mut add = |iv: Iv| {
            hull = Some(match hull {
                None => iv,
                Some(h) => num::iv_hull(h, iv),
            });
        };
        // endpoint values and limits
        for t in [u, v] {
            let val = self.eval(t).unwrap_or(f64::NAN);
            add(num::iv_point(val));
            add(num::iv_point(self.core_value(t)));
        }
        // smooth sections between interior events, shifted by jump mass
        let lo_idx = self.jumps.partition_point(|j| j.loc.t <= u);
        let hi_idx = self.jumps.partition_point(|j| j.loc.t < v);
        let mut cuts = vec![u];
        for j in &self.jumps[lo_idx..hi_idx] {
            cuts.push(j.loc.t);
        }
        for p in &self.pieces {
            if p.lo > u && p.lo < v {
                cuts.push(p.lo);
            }
        }
        cuts.push(v);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let piece = &self.pieces[self.piece_right_idx(w[0])];
            let shift = self.c0 + self.salt_through(w[0]);
            let r = piece.expr.range_cert(w[0], w[1]);
            add(num::iv_add(r, num::iv_point(shift)));
            // value at the jump point itself (left part applied)
            if w[0] > u {
                add(num::iv_point(self.core_value(w[0])));
            }
        }
        for ov in &self.overrides {
            if ov.loc.t >= u && ov.loc.t <= v {
                add(num::iv_point(ov.value));
            }
        }
        let h = hull.unwrap_or((0.0, 0.0));
        (h.0 - self.tail, h.1 + self.tail)
    }

    /// Largest |f| over the whole domain (certified).
    pub(crate) fn sup_abs(&self) -> f64 {
        num::iv_mag(self.range_on(self.a, self.b))
    }

    /// The same function with all value overrides removed.
    pub fn without_overrides(&self) -> RepFunc {
        if self.overrides.is_empty() {
            return self.clone();
        }
        RepFunc::new(
            (self.a, self.b),
            self.c0,
            self.pieces.clone(),
            self.explicit_jumps.clone(),
            self.series.clone(),
            Vec::new(),
            self.series_tol,
        )
        .expect("dropping overrides preserves validity")
    }
}

// ---- step approximation ------------------------------------------------

/// Piecewise constant approximation: `values[k]` on the open interval
/// (breakpoints[k], breakpoints[k+1]), `node_values[k]` at the breakpoints
/// themselves.
#[derive(Debug, Clone)]
pub struct StepFunc {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub node_values: Vec<f64>,
}

impl StepFunc {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let n = self.breakpoints.len();
        if t < self.breakpoints[0] || t > self.breakpoints[n - 1] {
            return Err(Error::Domain { value: t, a: self.breakpoints[0], b: self.breakpoints[n - 1] });
        }
        match self.breakpoints.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(idx) => Ok(self.node_values[idx]),
            Err(idx) => Ok(self.values[idx - 1]),
        }
    }
}

/// Uniform approximation of `f` by a step function within `eps`:
/// breakpoints include every jump location (and override point), and on
/// each open cell the value is the midpoint of a certified range hull.
/// Returns the step function and the achieved sup-deviation bound.
pub fn step_approx(f: &RepFunc, eps: f64) -> Result<(StepFunc, f64)> {
    if !(eps > 0.0) {
        return Err(Error::invariant("/eps", "eps must be positive"));
    }
    if f.tail() >= 0.5 * eps {
        return Err(Error::Budget(
            "series tolerance too coarse for the requested step accuracy".into(),
        ));
    }
    let base = f.event_grid();
    let mut cells: Vec<(f64, f64)> = base.windows(2).map(|w| (w[0], w[1])).collect();
    let mut done: Vec<(f64, f64, f64)> = Vec::new(); // (u, v, midpoint value)
    let mut achieved = 0.0f64;
    let budget_limit = 200_000usize;
    let mut spent = 0usize;
    while let Some((u, v)) = cells.pop() {
        spent += 1;
        if spent > budget_limit {
            return Err(Error::Budget("step approximation exceeded the cell budget".into()));
        }
        let piece = &f.pieces[f.piece_right_idx(u)];
        let r = piece.expr.range_cert(u, v);
        let width = num::iv_width(r);
        let dev = 0.5 * width + f.tail();
        if dev <= eps || (v - u) < 1e-13 * (1.0 + u.abs()) {
            if !dev.is_finite() {
                return Err(Error::Budget("range bounds do not converge on a cell".into()));
            }
            let shift = f.c0() + f.salt_through(u);
            done.push((u, v, shift + 0.5 * (r.0 + r.1)));
            achieved = achieved.max(dev);
        } else {
            let m = 0.5 * (u + v);
            cells.push((u, m));
            cells.push((m, v));
        }
    }
    done.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut breakpoints: Vec<f64> = done.iter().map(|c| c.0).collect();
    breakpoints.push(f.domain().1);
    let values: Vec<f64> = done.iter().map(|c| c.2).collect();
    let node_values: Vec<f64> = breakpoints.iter().map(|&t| f.eval(t).unwrap()).collect();
    Ok((StepFunc { breakpoints, values, node_values }, achieved))
}
