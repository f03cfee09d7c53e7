//! The projective line over Q, its function field Q(t), valuations at
//! rational points and at infinity, Q-divisors, and Riemann-Roch spaces.
//!
//! Ground field is Q rather than an algebraically closed field: every input
//! this library handles is rational data, and inputs whose zeros or poles are
//! irrational are rejected with a clear error instead of being approximated.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, TvbError};
use crate::qq::{fmt_qq, parse_qq, qq, QQ};

/// Dense polynomial over Q in the variable t. Coefficients are stored from
/// degree 0 upward with no trailing zeros; the zero polynomial is an empty
/// coefficient list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    pub coeffs: Vec<QQ>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<QQ>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly {
            coeffs: vec![QQ::one()],
        }
    }

    pub fn constant(c: QQ) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial t.
    pub fn t() -> Self {
        Poly {
            coeffs: vec![QQ::zero(), QQ::one()],
        }
    }

    /// t - p, the uniformizer at a finite point.
    pub fn t_minus(p: &QQ) -> Self {
        Poly::new(vec![-p.clone(), QQ::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports -1 for convenience in degree
    /// arithmetic.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> QQ {
        self.coeffs.last().cloned().unwrap_or_else(QQ::zero)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![QQ::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![QQ::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &QQ) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Euclidean division; panics only on a zero divisor, which callers rule
    /// out.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut rem = self.clone();
        let qlen = if self.degree() >= d.degree() {
            (self.degree() - d.degree()) as usize + 1
        } else {
            0
        };
        let mut quot = vec![QQ::zero(); qlen];
        while !rem.is_zero() && rem.degree() >= d.degree() {
            let shift = (rem.degree() - d.degree()) as usize;
            let c = &rem.leading() / &d.leading();
            quot[shift] = c.clone();
            let mut sub = vec![QQ::zero(); shift];
            sub.extend(d.coeffs.iter().map(|x| x * &c));
            rem = rem.sub(&Poly::new(sub));
        }
        (Poly::new(quot), rem)
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let lead = a.leading();
            a.scale(&(QQ::one() / lead))
        }
    }

    pub fn eval(&self, x: &QQ) -> QQ {
        let mut acc = QQ::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Multiplicity of the root p, zero if p is not a root.
    pub fn root_multiplicity(&self, p: &QQ) -> u32 {
        if self.is_zero() {
            return 0;
        }
        let lin = Poly::t_minus(p);
        let mut f = self.clone();
        let mut m = 0;
        loop {
            let (q, r) = f.div_rem(&lin);
            if r.is_zero() {
                m += 1;
                f = q;
            } else {
                return m;
            }
        }
    }

    /// All rational roots with multiplicity; the second component is the
    /// rootless cofactor.
    pub fn rational_roots(&self) -> (Vec<(QQ, u32)>, Poly) {
        // Rational root theorem on the integer-cleared polynomial.
        if self.is_zero() {
            return (vec![], Poly::zero());
        }
        let mut f = self.clone();
        let mut roots = Vec::new();
        // Strip the root at zero first.
        let zero = QQ::zero();
        let m0 = f.root_multiplicity(&zero);
        if m0 > 0 {
            roots.push((zero.clone(), m0));
            let (q, _) = f.div_rem(&Poly::t_minus(&zero).pow(m0));
            f = q;
        }
        while f.degree() >= 1 {
            let lcm_den = f
                .coeffs
                .iter()
                .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let ints: Vec<BigInt> = f
                .coeffs
                .iter()
                .map(|c| (c * QQ::from_integer(lcm_den.clone())).to_integer())
                .collect();
            let a0 = ints.first().cloned().unwrap_or_else(BigInt::zero);
            let an = ints.last().cloned().unwrap_or_else(BigInt::one);
            let mut found = None;
            'search: for p in divisors(&a0) {
                for q in divisors(&an) {
                    for sign in [1i64, -1] {
                        let cand = QQ::new(&p * BigInt::from(sign), q.clone());
                        if f.eval(&cand).is_zero() {
                            found = Some(cand);
                            break 'search;
                        }
                    }
                }
            }
            match found {
                Some(r) => {
                    let m = f.root_multiplicity(&r);
                    let (q, _) = f.div_rem(&Poly::t_minus(&r).pow(m));
                    f = q;
                    roots.push((r, m));
                }
                None => break,
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, f)
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if n.is_multiple_of(&d) {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
    }
    out.sort();
    out.dedup();
    out
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_poly(self))
    }
}

/// Formats with integer coefficients whenever possible, descending powers.
pub fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (k, c) in p.coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let cs = fmt_qq(c);
        let term = match k {
            0 => cs,
            1 if c.is_one() => "t".to_string(),
            1 if *c == -QQ::one() => "-t".to_string(),
            1 => format!("{cs}*t"),
            _ if c.is_one() => format!("t^{k}"),
            _ if *c == -QQ::one() => format!("-t^{k}"),
            _ => format!("{cs}*t^{k}"),
        };
        parts.push(term);
    }
    let mut out = String::new();
    for (i, term) in parts.iter().enumerate() {
        if i == 0 {
            out.push_str(term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push('-');
            out.push_str(rest);
        } else {
            out.push('+');
            out.push_str(term);
        }
    }
    out
}

/// Parses polynomials like "t^2-2*t+1", "3", "-t", "1/2*t^3".
pub fn parse_poly(s: &str) -> Result<Poly> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(TvbError::Parse("empty polynomial".into()));
    }
    // Split on top-level + and - (no parentheses in the polynomial grammar).
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            let prev = s.chars().nth(i - 1).unwrap();
            if prev != '^' && prev != '*' && prev != '/' && prev != '+' && prev != '-' {
                terms.push(cur.clone());
                cur.clear();
            }
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut acc = Poly::zero();
    for term in terms {
        if term.is_empty() {
            return Err(TvbError::Parse(format!("bad polynomial `{s}`")));
        }
        acc = acc.add(&parse_term(&term)?);
    }
    Ok(acc)
}

fn parse_term(term: &str) -> Result<Poly> {
    let (sign, body) = match term.strip_prefix('-') {
        Some(b) => (-QQ::one(), b),
        None => (QQ::one(), term.strip_prefix('+').unwrap_or(term)),
    };
    let (coeff_str, var_str) = match body.find('t') {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => (body, ""),
    };
    let coeff = if coeff_str.is_empty() {
        QQ::one()
    } else {
        let c = coeff_str.strip_suffix('*').unwrap_or(coeff_str);
        parse_qq(c)?
    };
    let power: u32 = if var_str.is_empty() {
        0
    } else if var_str == "t" {
        1
    } else if let Some(e) = var_str.strip_prefix("t^") {
        e.parse()
            .map_err(|_| TvbError::Parse(format!("bad exponent in `{term}`")))?
    } else {
        return Err(TvbError::Parse(format!("bad term `{term}`")));
    };
    let mut coeffs = vec![QQ::zero(); power as usize + 1];
    coeffs[power as usize] = sign * coeff;
    Ok(Poly::new(coeffs))
}

/// A reduced rational function over Q: numerator and monic denominator with
/// gcd one; zero is 0/1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(TvbError::DivisionByZero);
        }
        let mut f = RatFunc { num, den };
        f.normalize();
        Ok(f)
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn zero() -> Self {
        RatFunc::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn constant(c: QQ) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn t() -> Self {
        RatFunc::from_poly(Poly::t())
    }

    /// The uniformizer at a point: t - p at finite p, 1/t at infinity.
    pub fn uniformizer(point: &PointP1) -> Self {
        match point {
            PointP1::Finite(p) => RatFunc::from_poly(Poly::t_minus(p)),
            PointP1::Infinity => RatFunc::new(Poly::one(), Poly::t()).unwrap(),
        }
    }

    pub fn uniformizer_pow(point: &PointP1, e: i64) -> Self {
        let u = RatFunc::uniformizer(point);
        u.pow_int(e)
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() > 0 {
            self.num = self.num.div_rem(&g).0;
            self.den = self.den.div_rem(&g).0;
        }
        let lead = self.den.leading();
        if !lead.is_one() {
            let inv = QQ::one() / lead;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
        .expect("nonzero denominators")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominators")
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(TvbError::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_int(&self, e: i64) -> RatFunc {
        if e >= 0 {
            RatFunc::new(self.num.pow(e as u32), self.den.pow(e as u32)).unwrap()
        } else {
            RatFunc::new(self.den.pow((-e) as u32), self.num.pow((-e) as u32))
                .expect("inverting zero in pow_int")
        }
    }

    /// Order of vanishing at a point; poles are negative, val(0) is `None`
    /// standing for +infinity.
    pub fn val_at(&self, point: &PointP1) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(match point {
            PointP1::Finite(p) => {
                self.num.root_multiplicity(p) as i64 - self.den.root_multiplicity(p) as i64
            }
            PointP1::Infinity => self.den.degree() - self.num.degree(),
        })
    }

    /// Evaluates at a finite point or at infinity when there is no pole.
    pub fn eval_point(&self, point: &PointP1) -> Result<QQ> {
        match point {
            PointP1::Finite(p) => {
                let d = self.den.eval(p);
                if d.is_zero() {
                    return Err(TvbError::Invalid(format!("pole at {point}")));
                }
                Ok(self.num.eval(p) / d)
            }
            PointP1::Infinity => {
                let v = self.val_at(point).unwrap_or(1);
                match v.cmp(&0) {
                    std::cmp::Ordering::Less => {
                        Err(TvbError::Invalid("pole at inf".to_string()))
                    }
                    std::cmp::Ordering::Greater => Ok(QQ::zero()),
                    std::cmp::Ordering::Equal => Ok(self.num.leading() / self.den.leading()),
                }
            }
        }
    }

    /// The principal divisor div(f). Errors when f = 0 or when a zero or
    /// pole is irrational.
    pub fn divisor_of(&self) -> Result<DivisorOnY> {
        if self.is_zero() {
            return Err(TvbError::ZeroDivisor);
        }
        let (nroots, nrest) = self.num.rational_roots();
        if nrest.degree() > 0 {
            return Err(TvbError::IrrationalLocus(fmt_poly(&nrest)));
        }
        let (droots, drest) = self.den.rational_roots();
        if drest.degree() > 0 {
            return Err(TvbError::IrrationalLocus(fmt_poly(&drest)));
        }
        let mut div = DivisorOnY::zero();
        for (p, m) in nroots {
            div.add_point(PointP1::Finite(p), qq(m as i64));
        }
        for (p, m) in droots {
            div.add_point(PointP1::Finite(p), qq(-(m as i64)));
        }
        let vinf = self.val_at(&PointP1::Infinity).unwrap();
        if vinf != 0 {
            div.add_point(PointP1::Infinity, qq(vinf));
        }
        debug_assert!(div.degree().is_zero(), "principal divisor has degree 0");
        Ok(div)
    }

    /// Laurent coefficients a_v, a_{v+1}, ..., a_{v+len-1} of the expansion
    /// in powers of the local uniformizer, where v is the valuation.
    pub fn laurent_at(&self, point: &PointP1, len: usize) -> (i64, Vec<QQ>) {
        if self.is_zero() {
            return (0, vec![QQ::zero(); len]);
        }
        match point {
            PointP1::Finite(p) => {
                // Shift so the point moves to 0, then series-expand num/den.
                let shift = |poly: &Poly| -> Poly {
                    // poly(t + p)
                    let mut acc = Poly::zero();
                    let tp = Poly::new(vec![p.clone(), QQ::one()]);
                    for c in poly.coeffs.iter().rev() {
                        acc = acc.mul(&tp).add(&Poly::constant(c.clone()));
                    }
                    acc
                };
                laurent_at_zero(&shift(&self.num), &shift(&self.den), len)
            }
            PointP1::Infinity => {
                // Substitute t = 1/s: reverse coefficients.
                let rev = |poly: &Poly| -> (i64, Poly) {
                    let d = poly.degree();
                    let mut coeffs = poly.coeffs.clone();
                    coeffs.reverse();
                    (d, Poly::new(coeffs))
                };
                let (dn, rn) = rev(&self.num);
                let (dd, rd) = rev(&self.den);
                let (v, c) = laurent_at_zero(&rn, &rd, len);
                (v + dd - dn, c)
            }
        }
    }
}

/// Laurent data of n/d at t = 0.
fn laurent_at_zero(n: &Poly, d: &Poly, len: usize) -> (i64, Vec<QQ>) {
    let vn = n.coeffs.iter().take_while(|c| c.is_zero()).count() as i64;
    let vd = d.coeffs.iter().take_while(|c| c.is_zero()).count() as i64;
    let val = vn - vd;
    let nn: Vec<QQ> = n.coeffs.iter().skip(vn as usize).cloned().collect();
    let dd: Vec<QQ> = d.coeffs.iter().skip(vd as usize).cloned().collect();
    // Power series division nn / dd to `len` terms; dd[0] is nonzero.
    let inv0 = QQ::one() / dd[0].clone();
    let mut out = Vec::with_capacity(len);
    let mut rem = nn;
    rem.resize(len.max(rem.len()), QQ::zero());
    for k in 0..len {
        let c = rem[k].clone() * &inv0;
        for (j, dc) in dd.iter().enumerate() {
            if k + j < rem.len() {
                let t = &c * dc;
                rem[k + j] = rem[k + j].clone() - t;
            }
        }
        out.push(c);
    }
    (val, out)
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_ratfunc(self))
    }
}

/// Serializes as "num" or "num/den" with integer coefficients.
pub fn fmt_ratfunc(f: &RatFunc) -> String {
    // Clear denominators so both polynomials have integer coefficients.
    let lcm_all = f
        .num
        .coeffs
        .iter()
        .chain(f.den.coeffs.iter())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let s = QQ::from_integer(lcm_all);
    let num = f.num.scale(&s);
    let den = f.den.scale(&s);
    if den == Poly::one() {
        fmt_poly(&num)
    } else {
        format!("({})/({})", fmt_poly(&num), fmt_poly(&den))
    }
}

/// Parses "p", "p/q", "(p)/(q)".
pub fn parse_ratfunc(s: &str) -> Result<RatFunc> {
    let s = s.trim();
    let strip = |x: &str| -> String {
        let x = x.trim();
        if x.starts_with('(') && x.ends_with(')') {
            x[1..x.len() - 1].to_string()
        } else {
            x.to_string()
        }
    };
    // Find a top-level '/' separating two parenthesized or simple chunks.
    let mut depth = 0i32;
    let mut split_pos = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                // A '/' inside a coefficient like 1/2*t is not a separator:
                // only treat as separator when a 't' or '(' appears on both
                // sides contexts; simplest reliable rule: separator iff the
                // remainder contains 't' or the prefix contains 't' or
                // parentheses are used.
                let left = &s[..i];
                let right = &s[i + 1..];
                let coefficient_like = left.chars().all(|c| c.is_ascii_digit() || c == '-')
                    && right.chars().next().is_some_and(|c| c.is_ascii_digit());
                if !coefficient_like {
                    split_pos = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    match split_pos {
        Some(i) => {
            let num = parse_poly(&strip(&s[..i]))?;
            let den = parse_poly(&strip(&s[i + 1..]))?;
            RatFunc::new(num, den)
        }
        None => {
            // Could still be a pure rational constant like "3/2".
            if let Ok(q) = parse_qq(s) {
                return Ok(RatFunc::constant(q));
            }
            Ok(RatFunc::from_poly(parse_poly(&strip(s))?))
        }
    }
}

/// A closed point of P^1 over Q: a finite rational point or infinity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointP1 {
    Finite(QQ),
    Infinity,
}

impl PointP1 {
    pub fn finite(n: i64) -> Self {
        PointP1::Finite(qq(n))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            Ok(PointP1::Infinity)
        } else {
            Ok(PointP1::Finite(parse_qq(s)?))
        }
    }
}

impl fmt::Display for PointP1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointP1::Finite(p) => write!(f, "{}", fmt_qq(p)),
            PointP1::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for PointP1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finitely supported Q-divisor on P^1.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DivisorOnY {
    /// Coefficients; zero coefficients are dropped eagerly.
    pub coeffs: BTreeMap<PointP1, QQ>,
}

impl DivisorOnY {
    pub fn zero() -> Self {
        DivisorOnY::default()
    }

    pub fn add_point(&mut self, point: PointP1, c: QQ) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(point.clone()).or_insert_with(QQ::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&point);
        }
    }

    pub fn coefficient(&self, point: &PointP1) -> QQ {
        self.coeffs.get(point).cloned().unwrap_or_else(QQ::zero)
    }

    pub fn add(&self, other: &DivisorOnY) -> DivisorOnY {
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_point(p.clone(), c.clone());
        }
        out
    }

    pub fn degree(&self) -> QQ {
        self.coeffs.values().cloned().sum()
    }

    /// Coefficientwise floor.
    pub fn floor(&self) -> DivisorOnY {
        let mut out = DivisorOnY::zero();
        for (p, c) in &self.coeffs {
            out.add_point(p.clone(), crate::qq::qq_floor(c));
        }
        out
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(crate::qq::qq_is_integer)
    }
}

impl fmt::Debug for DivisorOnY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*[{}]", fmt_qq(c), p)?;
        }
        Ok(())
    }
}

/// Basis of the Riemann-Roch space L(floor(D)) on P^1.
///
/// For an effective floor the basis is the partial-fraction family
/// 1, 1/(t-p), ..., t, t^2, ...; for mixed signs the basis is the forced-zero
/// numerator family Z * t^j / denominators, ordered by j. Both are ordered
/// deterministically.
pub fn rr_space(d: &DivisorOnY) -> Vec<RatFunc> {
    let fl = d.floor();
    let deg: i64 = fl
        .coeffs
        .values()
        .map(|c| c.to_integer().to_string().parse::<i64>().unwrap())
        .sum();
    if deg < 0 {
        return vec![];
    }
    let has_negative = fl.coeffs.values().any(|c| c.is_negative());
    if !has_negative {
        let mut basis = vec![RatFunc::one()];
        for (p, c) in &fl.coeffs {
            let k_max = c.to_integer();
            let mut k = BigInt::one();
            while k <= k_max {
                let e = k.to_string().parse::<i64>().unwrap();
                match p {
                    PointP1::Finite(q) => {
                        basis.push(
                            RatFunc::new(Poly::one(), Poly::t_minus(q).pow(e as u32)).unwrap(),
                        );
                    }
                    PointP1::Infinity => {
                        basis.push(RatFunc::from_poly(Poly::t().pow(e as u32)));
                    }
                }
                k += 1;
            }
        }
        return basis;
    }
    // Mixed signs: numerator carries the forced zeros, denominator the poles.
    let mut zeros = Poly::one();
    let mut poles = Poly::one();
    for (p, c) in &fl.coeffs {
        let n: i64 = c.to_integer().to_string().parse().unwrap();
        if let PointP1::Finite(q) = p {
            if n > 0 {
                poles = poles.mul(&Poly::t_minus(q).pow(n as u32));
            } else {
                zeros = zeros.mul(&Poly::t_minus(q).pow((-n) as u32));
            }
        }
    }
    let mut basis = Vec::new();
    for j in 0..=deg {
        let num = zeros.mul(&Poly::t().pow(j as u32));
        let f = RatFunc::new(num, poles.clone()).unwrap();
        basis.push(f);
    }
    basis
}
