//! Arithmetic for prime fields `F_p` and extensions `F_q = F_{p^m}`.
//!
//! Elements are dense coefficient vectors over `F_p` in the polynomial
//! basis. No Zech logarithms: enumeration dominates every workload in this
//! crate, so simplicity wins. A context is immutable after construction and
//! cheap to clone (it is an `Arc` internally), so it can be shared freely
//! across threads.
//!
//! Every context also carries the data needed for additive characters: the
//! traces of the basis monomials and a table of complex `p`-th roots of
//! unity, so `chi_alpha(x) = e^{2 pi i Tr(alpha x) / p}` is a table lookup.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::ROOT_TABLE_MAX;
use crate::error::{Error, Result};

/// Largest admissible cardinality: q^2 must fit comfortably in 128-bit
/// intermediate products.
const CARDINALITY_CAP: u128 = 1 << 62;

/// An element of `F_{p^m}`: `m` residues mod `p`, constant term first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe{:?}", self.coeffs)
    }
}

#[derive(Debug)]
struct CtxInner {
    p: u64,
    m: usize,
    /// Monic modulus polynomial, ascending coefficients, length m + 1.
    modulus: Vec<u64>,
    q: u128,
    /// Tr(X^j) for j in 0..m, as residues mod p.
    trace_basis: Vec<u64>,
    /// X^{m+j} mod modulus for j in 0..m-1, used by multiplication.
    reduction_rows: Vec<Vec<u64>>,
    roots: OnceLock<Vec<Complex64>>,
}

/// Field context: all operations on elements go through this handle.
#[derive(Clone)]
pub struct FieldCtx(Arc<CtxInner>);

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({})", self.token())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.modulus == other.0.modulus
    }
}
impl Eq for FieldCtx {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow(u128),
    Inv,
    Neg,
}

// ---------------------------------------------------------------------------
// Integer number theory helpers.
// ---------------------------------------------------------------------------

fn mul_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut acc: u64 = 1 % n;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, n);
        }
        b = mul_mod_u64(b, b, n);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &sp in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == sp {
            return true;
        }
        if n.is_multiple_of(sp) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n & 1 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Prime factorization of a u64 (with multiplicity collapsed to exponents).
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for p in [2u64, 3, 5, 7, 11, 13] {
        while n.is_multiple_of(p) {
            push(p, &mut out);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(v) = stack.pop() {
        if v == 1 {
            continue;
        }
        if is_prime_u64(v) {
            push(v, &mut out);
            continue;
        }
        let d = pollard_rho(v);
        stack.push(d);
        stack.push(v / d);
    }
    out.sort_unstable();
    out
}

// ---------------------------------------------------------------------------
// Dense polynomial helpers over F_p (used only at construction time).
// ---------------------------------------------------------------------------

fn poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod_u64(ai, bj, p)) % p;
        }
    }
    poly_rem(&mut prod, modulus, p);
    prod
}

/// In-place remainder of `a` by the monic polynomial `modulus`.
fn poly_rem(a: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let md = modulus.len() - 1;
    while a.len() > md {
        let lead = *a.last().unwrap();
        let deg = a.len() - 1;
        if lead != 0 {
            for (j, &mj) in modulus.iter().enumerate().take(md) {
                let idx = deg - md + j;
                let sub = mul_mod_u64(lead, mj, p);
                a[idx] = (a[idx] + p - sub % p) % p;
            }
        }
        a.pop();
    }
    poly_trim(a);
}

fn poly_pow_mod(base: &[u64], mut e: u128, modulus: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = base.to_vec();
    poly_rem(&mut b, modulus, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, modulus, p);
        }
        b = poly_mul_mod(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_mod(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut bb = b.to_vec();
    poly_trim(&mut bb);
    let inv_lead = pow_mod_u64(*bb.last().unwrap(), p - 2, p);
    let bd = bb.len() - 1;
    while r.len() > bd || (r.len() == bb.len() && bd == 0) {
        if r.len() < bb.len() {
            break;
        }
        let lead = *r.last().unwrap();
        if lead != 0 {
            let f = mul_mod_u64(lead, inv_lead, p);
            let shift = r.len() - bb.len();
            for (j, &bj) in bb.iter().enumerate() {
                let sub = mul_mod_u64(f, bj, p);
                r[shift + j] = (r[shift + j] + p - sub) % p;
            }
        }
        r.pop();
        poly_trim(&mut r);
        if bd == 0 {
            return vec![0];
        }
    }
    poly_trim(&mut r);
    r
}

/// Irreducibility of a monic degree-m polynomial over F_p: x^{p^m} == x mod f
/// and gcd(x^{p^{m/r}} - x, f) = 1 for every prime r | m.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let qm = (p as u128).pow(m as u32);
    let xqm = poly_pow_mod(&x, qm, f, p);
    // x^{p^m} - x must be 0 mod f.
    let mut diff = xqm;
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    poly_trim(&mut diff);
    if !(diff.len() == 1 && diff[0] == 0) {
        return false;
    }
    for (r, _) in factorize(m as u64) {
        let e = (p as u128).pow((m as u64 / r) as u32);
        let mut xe = poly_pow_mod(&x, e, f, p);
        if xe.len() < 2 {
            xe.resize(2, 0);
        }
        xe[1] = (xe[1] + p - 1) % p;
        poly_trim(&mut xe);
        let g = poly_gcd(f, &xe, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Field construction.
// ---------------------------------------------------------------------------

/// Build the field `F_{p^m}`. When `modulus` is absent the lexicographically
/// smallest monic irreducible polynomial of degree `m` is chosen, making the
/// construction a pure function of `(p, m)`.
pub fn make_field(p: u64, m: usize, modulus: Option<Vec<u64>>) -> Result<FieldCtx> {
    if !is_prime_u64(p) {
        return Err(Error::NonPrime(p));
    }
    if m == 0 {
        return Err(Error::CardinalityOverflow { p, m });
    }
    let mut q: u128 = 1;
    for _ in 0..m {
        q = q.checked_mul(p as u128).filter(|&v| v <= CARDINALITY_CAP).ok_or(
            Error::CardinalityOverflow { p, m },
        )?;
    }
    let modulus = match modulus {
        Some(mv) => {
            if mv.len() != m + 1 || mv[m] != 1 || mv.iter().any(|&c| c >= p) {
                return Err(Error::ReducibleModulus(p));
            }
            if !is_irreducible(&mv, p) {
                return Err(Error::ReducibleModulus(p));
            }
            mv
        }
        None => find_smallest_irreducible(p, m),
    };
    let inner = CtxInner {
        p,
        m,
        q,
        reduction_rows: reduction_rows(&modulus, p),
        trace_basis: Vec::new(),
        modulus,
        roots: OnceLock::new(),
    };
    let mut ctx = FieldCtx(Arc::new(inner));
    // Trace of basis monomials needs field multiplication, so fill it in
    // after the arithmetic tables exist.
    let tb = trace_basis(&ctx);
    Arc::get_mut(&mut ctx.0).unwrap().trace_basis = tb;
    Ok(ctx)
}

fn find_smallest_irreducible(p: u64, m: usize) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1]; // the polynomial X
    }
    // Candidates ordered by the base-p integer with the constant term least
    // significant, matching the field enumeration order.
    let total = (p as u128).pow(m as u32);
    let mut idx: u128 = 0;
    loop {
        debug_assert!(idx < total, "no irreducible polynomial found");
        let mut f = Vec::with_capacity(m + 1);
        let mut v = idx;
        for _ in 0..m {
            f.push((v % p as u128) as u64);
            v /= p as u128;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        idx += 1;
    }
}

fn reduction_rows(modulus: &[u64], p: u64) -> Vec<Vec<u64>> {
    let m = modulus.len() - 1;
    if m == 1 {
        return Vec::new();
    }
    // row j = X^{m+j} mod modulus, for j in 0..m-1
    let mut rows = Vec::with_capacity(m - 1);
    // X^m = -(c_0 + c_1 X + ... + c_{m-1} X^{m-1})
    let mut cur: Vec<u64> = modulus[..m].iter().map(|&c| (p - c % p) % p).collect();
    rows.push(cur.clone());
    for _ in 1..m - 1 {
        // multiply by X, reduce
        let carry = cur[m - 1];
        let mut next = vec![0u64; m];
        for j in (1..m).rev() {
            next[j] = cur[j - 1];
        }
        if carry != 0 {
            for j in 0..m {
                next[j] = (next[j] + mul_mod_u64(carry, rows[0][j], p)) % p;
            }
        }
        rows.push(next.clone());
        cur = next;
    }
    rows
}

fn trace_basis(ctx: &FieldCtx) -> Vec<u64> {
    let m = ctx.m();
    (0..m)
        .map(|j| {
            let mut e = vec![0u64; m];
            e[j] = 1;
            let x = FieldElement { coeffs: e };
            trace_by_frobenius(ctx, &x)
        })
        .collect()
}

fn trace_by_frobenius(ctx: &FieldCtx, x: &FieldElement) -> u64 {
    let mut acc = x.clone();
    let mut cur = x.clone();
    for _ in 1..ctx.m() {
        cur = ctx.pow(&cur, ctx.p() as u128);
        acc = ctx.add(&acc, &cur);
    }
    debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
    acc.coeffs[0]
}

// ---------------------------------------------------------------------------
// Field operations.
// ---------------------------------------------------------------------------

impl FieldCtx {
    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn m(&self) -> usize {
        self.0.m
    }
    pub fn q(&self) -> u128 {
        self.0.q
    }
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }
    pub fn is_prime_field(&self) -> bool {
        self.0.m == 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.0.m] }
    }
    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }
    pub fn from_u64(&self, v: u64) -> FieldElement {
        let mut c = vec![0; self.0.m];
        c[0] = v % self.0.p;
        FieldElement { coeffs: c }
    }
    /// Centered integer embedding, so corpus files can say `-1`.
    pub fn from_i64(&self, v: i64) -> FieldElement {
        if v >= 0 {
            self.from_u64(v as u64)
        } else {
            self.neg(&self.from_u64(v.unsigned_abs()))
        }
    }

    pub fn check(&self, x: &FieldElement) -> Result<()> {
        if x.coeffs.len() != self.0.m || x.coeffs.iter().any(|&c| c >= self.0.p) {
            return Err(Error::CtxMismatch);
        }
        Ok(())
    }

    /// Checked arithmetic entry point.
    pub fn arith(&self, a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
        self.check(a)?;
        match op {
            ArithOp::Add => {
                self.check(b)?;
                Ok(self.add(a, b))
            }
            ArithOp::Sub => {
                self.check(b)?;
                Ok(self.sub(a, b))
            }
            ArithOp::Mul => {
                self.check(b)?;
                Ok(self.mul(a, b))
            }
            ArithOp::Div => {
                self.check(b)?;
                let binv = self.inv(b)?;
                Ok(self.mul(a, &binv))
            }
            ArithOp::Pow(e) => Ok(self.pow(a, e)),
            ArithOp::Inv => self.inv(a),
            ArithOp::Neg => Ok(self.neg(a)),
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| {
                    let s = x + y;
                    if s >= p {
                        s - p
                    } else {
                        s
                    }
                })
                .collect(),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| if x >= y { x - y } else { x + p - y })
                .collect(),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.0.p;
        FieldElement {
            coeffs: a.coeffs.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        let m = self.0.m;
        if m == 1 {
            return FieldElement { coeffs: vec![mul_mod_u64(a.coeffs[0], b.coeffs[0], p)] };
        }
        // Schoolbook product then reduction by the precomputed rows.
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod_u64(ai, bj, p)) % p;
            }
        }
        let mut out = vec![0u64; m];
        out.copy_from_slice(&prod[..m]);
        for j in 0..m - 1 {
            let c = prod[m + j];
            if c == 0 {
                continue;
            }
            for (k, &rk) in self.0.reduction_rows[j].iter().enumerate() {
                out[k] = (out[k] + mul_mod_u64(c, rk, p)) % p;
            }
        }
        FieldElement { coeffs: out }
    }

    /// Square-and-multiply; `x^0 = 1` for every x, including `0^0 = 1`.
    pub fn pow(&self, a: &FieldElement, mut e: u128) -> FieldElement {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // x^{q-2} = x^{-1} in F_q.
        Ok(self.pow(a, self.0.q - 2))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Trace to the prime subfield, as a residue mod p.
    pub fn trace(&self, x: &FieldElement) -> u64 {
        let p = self.0.p;
        let mut acc: u128 = 0;
        for (c, t) in x.coeffs.iter().zip(&self.0.trace_basis) {
            acc += (*c as u128) * (*t as u128);
        }
        (acc % p as u128) as u64
    }

    fn root_table(&self) -> Option<&[Complex64]> {
        if self.0.p > ROOT_TABLE_MAX {
            return None;
        }
        Some(self.0.roots.get_or_init(|| {
            let p = self.0.p;
            if p == 2 {
                return vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
            }
            (0..p)
                .map(|j| {
                    let ang = 2.0 * std::f64::consts::PI * j as f64 / p as f64;
                    Complex64::new(ang.cos(), ang.sin())
                })
                .collect()
        }))
    }

    /// `e^{2 pi i r / p}` for a residue r.
    pub fn root_of_unity(&self, r: u64) -> Complex64 {
        let r = r % self.0.p;
        match self.root_table() {
            Some(t) => t[r as usize],
            None => {
                let ang = 2.0 * std::f64::consts::PI * r as f64 / self.0.p as f64;
                Complex64::new(ang.cos(), ang.sin())
            }
        }
    }

    /// The additive character `chi_alpha(x) = e^{2 pi i Tr(alpha x)/p}`.
    /// `alpha = 0` gives the trivial character.
    pub fn character(&self, alpha: &FieldElement, x: &FieldElement) -> Result<Complex64> {
        self.check(alpha)?;
        self.check(x)?;
        Ok(self.character_unchecked(alpha, x))
    }

    pub fn character_unchecked(&self, alpha: &FieldElement, x: &FieldElement) -> Complex64 {
        let t = self.trace(&self.mul(alpha, x));
        self.root_of_unity(t)
    }

    /// Least t >= 1 with w^t = 1, via the factorization of q - 1.
    pub fn multiplicative_order(&self, w: &FieldElement) -> Result<u128> {
        self.check(w)?;
        if w.is_zero() {
            return Err(Error::ZeroElement);
        }
        let group = self.0.q - 1;
        // q <= 2^62 so q-1 fits u64 only if q <= 2^64; cap guarantees it.
        let group64 = group as u64;
        let mut order = group;
        for (f, _) in factorize(group64) {
            while order.is_multiple_of(f as u128) {
                let cand = order / f as u128;
                if self.pow(w, cand) == self.one() {
                    order = cand;
                } else {
                    break;
                }
            }
        }
        Ok(order)
    }

    // -- Enumeration ---------------------------------------------------------

    /// Canonical index of an element: base-p digits, constant term least
    /// significant. Enumeration order is ascending index.
    pub fn to_index(&self, x: &FieldElement) -> u128 {
        let mut acc: u128 = 0;
        for &c in x.coeffs.iter().rev() {
            acc = acc * self.0.p as u128 + c as u128;
        }
        acc
    }

    pub fn from_index(&self, mut idx: u128) -> FieldElement {
        let mut c = vec![0u64; self.0.m];
        for slot in c.iter_mut() {
            *slot = (idx % self.0.p as u128) as u64;
            idx /= self.0.p as u128;
        }
        FieldElement { coeffs: c }
    }

    /// All q elements in deterministic lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.q).map(move |i| self.from_index(i))
    }

    /// Advance `x` to the next element in enumeration order; returns false on
    /// wraparound. Allocation-free odometer used by point streaming.
    pub fn increment(&self, x: &mut FieldElement) -> bool {
        for c in x.coeffs.iter_mut() {
            *c += 1;
            if *c < self.0.p {
                return true;
            }
            *c = 0;
        }
        false
    }

    // -- Descriptor tokens ---------------------------------------------------

    /// `p` for prime fields, `p^m/c0,c1,...,cm` for extensions.
    pub fn token(&self) -> String {
        if self.0.m == 1 {
            format!("{}", self.0.p)
        } else {
            let coeffs: Vec<String> = self.0.modulus.iter().map(|c| c.to_string()).collect();
            format!("{}^{}/{}", self.0.p, self.0.m, coeffs.join(","))
        }
    }

    pub fn parse_token(tok: &str) -> Result<FieldCtx> {
        let bad = || Error::ConfigError(format!("bad field token `{tok}`"));
        if let Some((head, tail)) = tok.split_once('/') {
            let (p, m) = head.split_once('^').ok_or_else(bad)?;
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let m: usize = m.trim().parse().map_err(|_| bad())?;
            let coeffs: Vec<u64> = tail
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            make_field(p, m, Some(coeffs))
        } else if let Some((p, m)) = tok.split_once('^') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let m: usize = m.trim().parse().map_err(|_| bad())?;
            make_field(p, m, None)
        } else {
            let p: u64 = tok.trim().parse().map_err(|_| bad())?;
            make_field(p, 1, None)
        }
    }

    /// Embedding of this field into `sup` (which must be `F_{p^{m*i}}`),
    /// sending the generator to the first root of our modulus in `sup`,
    /// in enumeration order.
    pub fn embedding_into(&self, sup: &FieldCtx) -> Result<Embedding> {
        if sup.p() != self.p() || !sup.m().is_multiple_of(self.m()) {
            return Err(Error::CtxMismatch);
        }
        if self.m() == 1 {
            return Ok(Embedding { gen_powers: vec![sup.one()] });
        }
        let root = sup
            .elements()
            .find(|cand| {
                // evaluate our modulus at cand inside sup
                let mut acc = sup.zero();
                for &c in self.0.modulus.iter().rev() {
                    acc = sup.mul(&acc, cand);
                    acc = sup.add(&acc, &sup.from_u64(c));
                }
                acc.is_zero()
            })
            .expect("subfield modulus must split in the extension");
        let mut gen_powers = Vec::with_capacity(self.m());
        let mut cur = sup.one();
        for _ in 0..self.m() {
            gen_powers.push(cur.clone());
            cur = sup.mul(&cur, &root);
        }
        Ok(Embedding { gen_powers })
    }
}

/// A subfield embedding: maps `sum c_j X^j` to `sum c_j rho^j`.
#[derive(Clone, Debug)]
pub struct Embedding {
    gen_powers: Vec<FieldElement>,
}

impl Embedding {
    pub fn apply(&self, sup: &FieldCtx, x: &FieldElement) -> FieldElement {
        let mut acc = sup.zero();
        for (c, gp) in x.coeffs.iter().zip(&self.gen_powers) {
            if *c == 0 {
                continue;
            }
            let term = sup.mul(&sup.from_u64(*c), gp);
            acc = sup.add(&acc, &term);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(_ctx: &FieldCtx, coeffs: &[u64]) -> FieldElement {
        FieldElement { coeffs: coeffs.to_vec() }
    }

    #[test]
    fn make_field_prime() {
        let f5 = make_field(5, 1, None).unwrap();
        assert_eq!(f5.q(), 5);
        assert_eq!(f5.token(), "5");
    }

    #[test]
    fn make_field_f4_modulus() {
        // Only irreducible monic quadratic over F_2 is X^2+X+1.
        let f4 = make_field(2, 2, None).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert_eq!(f4.token(), "2^2/1,1,1");
    }

    #[test]
    fn make_field_nonprime() {
        assert!(matches!(make_field(4, 1, None), Err(Error::NonPrime(4))));
    }

    #[test]
    fn make_field_reducible_modulus() {
        // X^2 + 1 = (X+1)^2 over F_2.
        assert!(matches!(
            make_field(2, 2, Some(vec![1, 0, 1])),
            Err(Error::ReducibleModulus(2))
        ));
    }

    #[test]
    fn arith_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // 2 + 4 = 1 mod 5
        assert_eq!(
            f5.arith(&f5.from_u64(2), &f5.from_u64(4), ArithOp::Add).unwrap(),
            f5.from_u64(1)
        );
        // inv(3) = 2, by exhaustive search over the 5 elements
        let three = f5.from_u64(3);
        let inv = f5
            .elements()
            .find(|x| f5.mul(x, &three) == f5.one())
            .unwrap();
        assert_eq!(inv, f5.from_u64(2));
        assert_eq!(f5.inv(&three).unwrap(), inv);
        // F_4: X * X = X + 1
        let f4 = make_field(2, 2, None).unwrap();
        let x = f(&f4, &[0, 1]);
        assert_eq!(f4.mul(&x, &x), f(&f4, &[1, 1]));
    }

    #[test]
    fn division_by_zero() {
        let f5 = make_field(5, 1, None).unwrap();
        assert!(matches!(f5.inv(&f5.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn ctx_mismatch() {
        let f5 = make_field(5, 1, None).unwrap();
        let f4 = make_field(2, 2, None).unwrap();
        let foreign = f4.zero();
        assert!(matches!(
            f5.arith(&foreign, &f5.one(), ArithOp::Add),
            Err(Error::CtxMismatch)
        ));
    }

    #[test]
    fn pow_conventions() {
        let f7 = make_field(7, 1, None).unwrap();
        assert_eq!(f7.pow(&f7.zero(), 0), f7.one());
        assert_eq!(f7.pow(&f7.from_u64(3), 0), f7.one());
        assert_eq!(f7.pow(&f7.from_u64(3), 6), f7.one());
    }

    #[test]
    fn trace_examples() {
        let f4 = make_field(2, 2, None).unwrap();
        assert_eq!(f4.trace(&f4.zero()), 0);
        assert_eq!(f4.trace(&f4.one()), 0); // 1 + 1 = 0 in char 2
        assert_eq!(f4.trace(&f(&f4, &[0, 1])), 1); // X + X^2 = X + (X+1) = 1
    }

    #[test]
    fn character_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // trivial character
        let v = f5.character(&f5.zero(), &f5.from_u64(3)).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // chi_1(1) = e^{2 pi i / 5}
        let v = f5.character(&f5.one(), &f5.one()).unwrap();
        let ang = 2.0 * std::f64::consts::PI / 5.0;
        assert!((v - Complex64::new(ang.cos(), ang.sin())).norm() < 1e-12);
        // orthogonality of chi_2
        let alpha = f5.from_u64(2);
        let sum: Complex64 = f5
            .elements()
            .map(|x| f5.character(&alpha, &x).unwrap())
            .sum();
        assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn multiplicative_order_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        assert_eq!(f5.multiplicative_order(&f5.one()).unwrap(), 1);
        assert_eq!(f5.multiplicative_order(&f5.from_u64(2)).unwrap(), 4);
        let f4 = make_field(2, 2, None).unwrap();
        assert_eq!(f4.multiplicative_order(&f(&f4, &[0, 1])).unwrap(), 3);
        assert!(matches!(
            f5.multiplicative_order(&f5.zero()),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn enumeration_examples() {
        let f2 = make_field(2, 1, None).unwrap();
        let els: Vec<_> = f2.elements().collect();
        assert_eq!(els, vec![f2.zero(), f2.one()]);
        let f4 = make_field(2, 2, None).unwrap();
        let els: Vec<_> = f4.elements().collect();
        assert_eq!(
            els,
            vec![f(&f4, &[0, 0]), f(&f4, &[1, 0]), f(&f4, &[0, 1]), f(&f4, &[1, 1])]
        );
        let f9 = make_field(3, 2, None).unwrap();
        assert_eq!(f9.elements().count(), 9);
        // no repeats
        let mut seen: Vec<u128> = f9.elements().map(|x| f9.to_index(&x)).collect();
        seen.dedup();
        assert_eq!(seen.len(), 9);
    }

    fn small_ctxs(limit: u128) -> Vec<FieldCtx> {
        let mut out = Vec::new();
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61] {
            let mut m = 1;
            loop {
                let q = (p as u128).pow(m as u32);
                if q > limit {
                    break;
                }
                out.push(make_field(p, m, None).unwrap());
                m += 1;
            }
        }
        out
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for ctx in small_ctxs(64) {
            let els: Vec<_> = ctx.elements().collect();
            for a in &els {
                for b in &els {
                    assert_eq!(ctx.add(a, b), ctx.add(b, a));
                    assert_eq!(ctx.mul(a, b), ctx.mul(b, a));
                    assert_eq!(ctx.add(&ctx.sub(a, b), b), *a);
                    if !b.is_zero() {
                        let i = ctx.inv(b).unwrap();
                        assert_eq!(ctx.mul(b, &i), ctx.one());
                    }
                }
            }
            // associativity + distributivity on all triples for tiny q,
            // on a strided subset for the rest
            let stride = if ctx.q() <= 16 { 1 } else { 5 };
            for (i, a) in els.iter().enumerate().step_by(stride) {
                for (j, b) in els.iter().enumerate().step_by(stride) {
                    for c in els.iter().skip((i + j) % stride).step_by(stride) {
                        assert_eq!(ctx.add(&ctx.add(a, b), c), ctx.add(a, &ctx.add(b, c)));
                        assert_eq!(ctx.mul(&ctx.mul(a, b), c), ctx.mul(a, &ctx.mul(b, c)));
                        assert_eq!(
                            ctx.mul(a, &ctx.add(b, c)),
                            ctx.add(&ctx.mul(a, b), &ctx.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_additivity() {
        for ctx in small_ctxs(64) {
            let p = ctx.p() as u128;
            let els: Vec<_> = ctx.elements().collect();
            for a in &els {
                for b in &els {
                    let lhs = ctx.pow(&ctx.add(a, b), p);
                    let rhs = ctx.add(&ctx.pow(a, p), &ctx.pow(b, p));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn trace_linearity() {
        for ctx in small_ctxs(64) {
            let p = ctx.p();
            let els: Vec<_> = ctx.elements().collect();
            for a in 0..p.min(5) {
                for b in 0..p.min(5) {
                    for x in els.iter().step_by(3) {
                        for y in els.iter().step_by(2) {
                            let ax = ctx.mul(&ctx.from_u64(a), x);
                            let by = ctx.mul(&ctx.from_u64(b), y);
                            let lhs = ctx.trace(&ctx.add(&ax, &by));
                            let rhs = (a * ctx.trace(x) + b * ctx.trace(y)) % p;
                            assert_eq!(lhs, rhs % p);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn character_orthogonality_up_to_1024() {
        // Exhaustive over a representative grid of contexts with q <= 1024.
        let mut ctxs = Vec::new();
        for (p, mmax) in [(2u64, 10usize), (3, 6), (5, 4), (7, 3), (11, 2), (31, 2)] {
            for m in 1..=mmax {
                if (p as u128).pow(m as u32) <= 1024 {
                    ctxs.push(make_field(p, m, None).unwrap());
                }
            }
        }
        for p in [101u64, 257, 1009, 1021] {
            ctxs.push(make_field(p, 1, None).unwrap());
        }
        for ctx in ctxs {
            let els: Vec<_> = ctx.elements().collect();
            for alpha in &els {
                if alpha.is_zero() {
                    continue;
                }
                let sum: Complex64 =
                    els.iter().map(|x| ctx.character_unchecked(alpha, x)).sum();
                assert!(
                    sum.norm() <= 1e-9 * ctx.q() as f64,
                    "orthogonality failed for alpha={alpha:?} in {ctx:?}"
                );
            }
        }
    }

    #[test]
    fn token_round_trip() {
        for tok in ["5", "2^2/1,1,1", "3^2", "101"] {
            let ctx = FieldCtx::parse_token(tok).unwrap();
            let ctx2 = FieldCtx::parse_token(&ctx.token()).unwrap();
            assert_eq!(ctx, ctx2);
        }
    }

    #[test]
    fn cardinality_cap() {
        assert!(matches!(
            make_field(2, 63, None),
            Err(Error::CardinalityOverflow { .. })
        ));
    }

    #[test]
    fn embedding_f4_into_f16() {
        let f4 = make_field(2, 2, None).unwrap();
        let f16 = make_field(2, 4, None).unwrap();
        let emb = f4.embedding_into(&f16).unwrap();
        // Ring homomorphism on all pairs.
        for a in f4.elements() {
            for b in f4.elements() {
                let lhs = emb.apply(&f16, &f4.mul(&a, &b));
                let rhs = f16.mul(&emb.apply(&f16, &a), &emb.apply(&f16, &b));
                assert_eq!(lhs, rhs);
                let lhs = emb.apply(&f16, &f4.add(&a, &b));
                let rhs = f16.add(&emb.apply(&f16, &a), &emb.apply(&f16, &b));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn factorize_basic() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(100002), vec![(2, 1), (3, 1), (7, 1), (2381, 1)]);
        assert_eq!(factorize(1 << 20), vec![(2, 20)]);
    }
}
