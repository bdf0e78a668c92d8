//! The semidirect product `G = Z_{p^r} x|_alpha Z_{q^s}`.
//!
//! An element `(a, b)` stands for `x^a y^b` with `y^b x^a = x^(a alpha^b) y^b`,
//! so `(a, b)(c, d) = (a + alpha^b c, b + d)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::number_theory::{
    add_mod, find_primitive_root, gcd, inv_raw, is_prime, mul_mod, multiplicative_order, pow_mod,
    sub_mod, valuation, Residue,
};

/// Parameters of `G_{t,l}`, validated on construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupParams {
    p: u64,
    q: u64,
    r: u32,
    s: u32,
    t: u32,
    l: u64,
    u: u64,
    alpha: u64,
    pr: u64,
    qs: u64,
    qt: u64,
    /// `alpha^e` for `0 <= e < q^t`.
    #[serde(skip)]
    powers: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement {
    pub a: u64,
    pub b: u64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { a: 0, b: 0 };
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Builds `G_{t,l}`: picks the smallest primitive root `u` mod `p^r` and sets
/// `alpha = u^(l p^(r-1) (p-1) / q^t)`.
pub fn make_params(p: u64, q: u64, r: u32, s: u32, t: u32, l: u64) -> Result<GroupParams> {
    let invalid = |msg: String| Err(Error::InvalidParams(msg));
    if !is_prime(p) || p == 2 {
        return invalid(format!("p = {p} is not an odd prime"));
    }
    if !is_prime(q) || q == 2 {
        return invalid(format!("q = {q} is not an odd prime"));
    }
    if p == q {
        return invalid("p and q must be distinct".into());
    }
    if r == 0 || s == 0 {
        return invalid("r and s must be positive".into());
    }
    if t == 0 || t > s {
        return invalid(format!("t = {t} outside [1, s = {s}]"));
    }
    let pr = p
        .checked_pow(r)
        .ok_or_else(|| Error::InvalidParams("p^r overflows".into()))?;
    let qs = q
        .checked_pow(s)
        .ok_or_else(|| Error::InvalidParams("q^s overflows".into()))?;
    if pr.checked_mul(qs).is_none_or(|n| n >= 1 << 31) {
        return invalid("group order must stay below 2^31".into());
    }
    let qt = q.pow(t);
    if !(p - 1).is_multiple_of(qt) {
        return invalid("q^t does not divide p-1".into());
    }
    if l.is_multiple_of(q) {
        return invalid(format!("l = {l} is not a unit modulo q^t = {qt}"));
    }
    let l = l % qt;
    let u = find_primitive_root(p, r).value();
    let exponent = l * (pr / p) * (p - 1) / qt;
    let alpha = pow_mod(u, exponent, pr);
    let params = GroupParams {
        p,
        q,
        r,
        s,
        t,
        l,
        u,
        alpha,
        pr,
        qs,
        qt,
        powers: power_table(alpha, qt, pr),
    };
    params.check_invariants()?;
    Ok(params)
}

fn power_table(alpha: u64, qt: u64, pr: u64) -> Vec<u64> {
    std::iter::successors(Some(1 % pr), |&x| Some(mul_mod(x, alpha, pr)))
        .take(qt as usize)
        .collect()
}

impl GroupParams {
    fn check_invariants(&self) -> Result<()> {
        let order = multiplicative_order(self.alpha as i64, self.pr)?;
        if order != self.qt {
            return Err(Error::InvalidParams(format!(
                "alpha = {} has order {order}, expected q^t = {}",
                self.alpha, self.qt
            )));
        }
        if pow_mod(self.alpha, self.qs, self.pr) != 1 {
            return Err(Error::InvalidParams("alpha^(q^s) != 1".into()));
        }
        Ok(())
    }

    /// Parameters of `G / <x^(p^i)>`, i.e. `Z_{p^i} x| Z_{q^s}` with alpha and
    /// the primitive root reduced mod `p^i`. Requires `1 <= i <= r`.
    ///
    /// Because `q^t | p - 1`, the reduced alpha is exactly what the alpha formula
    /// yields for `p^i` with the reduced root, so the result is a genuine `G_{t,l}`.
    pub fn quotient(&self, i: u32) -> Result<GroupParams> {
        if i == 0 || i > self.r {
            return Err(Error::InvalidParams(format!(
                "quotient exponent {i} outside [1, r]"
            )));
        }
        let pi = self.p.pow(i);
        let params = GroupParams {
            r: i,
            u: self.u % pi,
            alpha: self.alpha % pi,
            pr: pi,
            powers: power_table(self.alpha % pi, self.qt, pi),
            ..self.clone()
        };
        params.check_invariants()?;
        Ok(params)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn t(&self) -> u32 {
        self.t
    }
    pub fn l(&self) -> u64 {
        self.l
    }
    pub fn u(&self) -> u64 {
        self.u
    }
    pub fn alpha(&self) -> u64 {
        self.alpha
    }
    /// `p^r`
    pub fn pr(&self) -> u64 {
        self.pr
    }
    /// `q^s`
    pub fn qs(&self) -> u64 {
        self.qs
    }
    /// `q^t`, the order of alpha.
    pub fn qt(&self) -> u64 {
        self.qt
    }

    pub fn order(&self) -> u64 {
        self.pr * self.qs
    }

    pub fn element(&self, a: i64, b: i64) -> GroupElement {
        GroupElement {
            a: Residue::new(a as i128, self.pr).value(),
            b: Residue::new(b as i128, self.qs).value(),
        }
    }

    /// Dense index `a * q^s + b`; ordering agrees with `(a, b)` lexicographic order.
    #[inline]
    pub fn index_of(&self, g: GroupElement) -> usize {
        (g.a * self.qs + g.b) as usize
    }

    #[inline]
    pub fn element_at(&self, index: usize) -> GroupElement {
        let index = index as u64;
        GroupElement {
            a: index / self.qs,
            b: index % self.qs,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |k| self.element_at(k))
    }

    /// `alpha^e mod p^r`; the exponent is reduced mod `q^t` first.
    #[inline]
    pub fn alpha_pow(&self, e: u64) -> u64 {
        self.powers[(e % self.qt) as usize]
    }

    #[inline]
    pub fn multiply(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        GroupElement {
            a: add_mod(g.a, mul_mod(self.alpha_pow(g.b), h.a, self.pr), self.pr),
            b: add_mod(g.b, h.b, self.qs),
        }
    }

    /// `(a, b)^-1 = (-a alpha^(-b), -b)`.
    pub fn inverse(&self, g: GroupElement) -> GroupElement {
        let b_inv = sub_mod(0, g.b, self.qs);
        GroupElement {
            a: sub_mod(0, mul_mod(g.a, self.alpha_pow(b_inv), self.pr), self.pr),
            b: b_inv,
        }
    }

    /// `g^k` in closed form. Negative `k` goes through the inverse.
    pub fn power(&self, g: GroupElement, k: i64) -> GroupElement {
        if k < 0 {
            return self.power(self.inverse(g), k.unsigned_abs() as i64);
        }
        let k = k as u64;
        let b = mul_mod(g.b, k, self.qs);
        if g.b.is_multiple_of(self.qt) {
            return GroupElement {
                a: mul_mod(g.a, k, self.pr),
                b,
            };
        }
        // alpha^b - 1 is a unit whenever q^t does not divide b
        let num = sub_mod(
            self.alpha_pow(mul_mod(g.b, k % self.qt, self.qt)),
            1,
            self.pr,
        );
        let den = sub_mod(self.alpha_pow(g.b), 1, self.pr);
        let den_inv =
            inv_raw(den, self.pr).expect("alpha^b - 1 is a unit when q^t does not divide b");
        GroupElement {
            a: mul_mod(g.a, mul_mod(num, den_inv, self.pr), self.pr),
            b,
        }
    }

    /// `g h g^-1 h^-1`, which always lies in `<x>`.
    pub fn commutator(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        let gh = self.multiply(g, h);
        let gh_ginv = self.multiply(gh, self.inverse(g));
        self.multiply(gh_ginv, self.inverse(h))
    }

    /// `x`-exponent of `[g, h]` from the closed form
    /// `a_g + a_h alpha^(b_g) - a_g alpha^(b_h) - a_h`.
    pub fn commutator_exponent(&self, g: GroupElement, h: GroupElement) -> u64 {
        let m = self.pr;
        let plus = add_mod(g.a, mul_mod(h.a, self.alpha_pow(g.b), m), m);
        let minus = add_mod(mul_mod(g.a, self.alpha_pow(h.b), m), h.a, m);
        sub_mod(plus, minus, m)
    }

    /// `S_j(n) = (alpha^(n q^j) - 1) / (alpha^(q^j) - 1) mod p^r`, defined for `j < t`.
    pub fn s_of(&self, n: u64, j: u32) -> Result<Residue> {
        if j >= self.t {
            return Err(Error::NonUnitDenominator { j, t: self.t });
        }
        let step = self.q.pow(j);
        let num = sub_mod(
            self.alpha_pow(mul_mod(n % self.qt, step, self.qt)),
            1,
            self.pr,
        );
        let den = sub_mod(self.alpha_pow(step), 1, self.pr);
        let den_inv = inv_raw(den, self.pr)?;
        Ok(Residue::new(
            mul_mod(num, den_inv, self.pr) as i128,
            self.pr,
        ))
    }

    /// Element order from the central-fibre arithmetic, valid when `q^t | b`:
    /// `p^(r - v_p(a)) q^(s - v_q(b))`.
    pub fn central_fiber_order(&self, g: GroupElement) -> Option<u64> {
        if !g.b.is_multiple_of(self.qt) {
            return None;
        }
        let i = valuation(g.a, self.p, self.r);
        let j = valuation(g.b, self.q, self.s);
        Some(self.p.pow(self.r - i) * self.q.pow(self.s - j))
    }

    pub fn is_unit_mod_pr(&self, x: u64) -> bool {
        gcd(x % self.pr, self.pr) == 1
    }
}

/// `Phi_{t,l}: G_{t,1} -> G_{t,l}`, `x^a y^b -> x^a y^(l^-1 b)` with `l^-1` taken mod `q^s`.
pub fn iso_phi(src: &GroupParams, l_target: u64, g: GroupElement) -> Result<GroupElement> {
    if src.l != 1 {
        return Err(Error::InvalidParams(
            "isomorphism source must have l = 1".into(),
        ));
    }
    let l_inv = inv_raw(l_target % src.qs, src.qs)?;
    Ok(GroupElement {
        a: g.a,
        b: mul_mod(l_inv, g.b, src.qs),
    })
}
