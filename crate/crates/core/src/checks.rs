//! Exhaustive structural checks on a concrete group, shared by the CLI
//! `verify` mode and the acceptance tests.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Result;
use crate::group::{iso_phi, make_params, GroupElement, GroupParams};
use crate::number_theory::{gcd, is_prime, sub_mod};
use crate::subgroups::{
    brute_force_subgroups, classify, closure, cyclic_extension_subgroups, elements_of,
    enumerate_subgroups, SubgroupDescriptor,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub checked: u64,
    pub violations: u64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, checked: u64, violations: u64, detail: String) -> Self {
        CheckOutcome {
            name,
            passed: violations == 0,
            checked,
            violations,
            detail,
        }
    }
}

/// `Phi_{t,l}` is a bijective homomorphism `G_{t,1} -> G_{t,l}` for every unit `l` mod `q^t`.
pub fn check_isomorphisms(params: &GroupParams) -> Result<CheckOutcome> {
    let src = make_params(
        params.p(),
        params.q(),
        params.r(),
        params.s(),
        params.t(),
        1,
    )?;
    let mut checked = 0;
    let mut violations = 0;
    for l in (1..src.qt()).filter(|l| l % src.q() != 0) {
        let dst = make_params(src.p(), src.q(), src.r(), src.s(), src.t(), l)?;
        let image: Vec<GroupElement> = src
            .elements()
            .map(|g| iso_phi(&src, l, g))
            .collect::<Result<_>>()?;
        if image.iter().collect::<BTreeSet<_>>().len() as u64 != src.order() {
            violations += 1;
        }
        for x in src.elements() {
            for y in src.elements() {
                checked += 1;
                let lhs = image[src.index_of(src.multiply(x, y))];
                let rhs = dst.multiply(image[src.index_of(x)], image[src.index_of(y)]);
                if lhs != rhs {
                    violations += 1;
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        "isomorphism",
        checked,
        violations,
        "Phi_{t,l}(gh) = Phi(g) Phi(h), bijective".into(),
    ))
}

/// Groups up to this order also get the quadratic join-closure enumeration.
pub const JOIN_CLOSURE_LIMIT: u64 = 512;

/// Canonical descriptors and the brute-force subgroup list coincide as sets of
/// sets. Brute force is cyclic extension, cross-checked against join closure on
/// groups of order at most [`JOIN_CLOSURE_LIMIT`].
pub fn check_census(params: &GroupParams, cap: u64) -> Result<CheckOutcome> {
    let brute: BTreeSet<_> = cyclic_extension_subgroups(params, cap)?
        .into_iter()
        .collect();
    let descriptors = enumerate_subgroups(params);
    let listed: BTreeSet<_> = descriptors.iter().map(|d| elements_of(params, d)).collect();
    let duplicates = descriptors.len() - listed.len();
    let missing = brute.difference(&listed).count();
    let extra = listed.difference(&brute).count();
    let mut violations = (duplicates + missing + extra) as u64;
    let mut method = "cyclic extension";
    if params.order() <= JOIN_CLOSURE_LIMIT {
        let joins: BTreeSet<_> = brute_force_subgroups(params, cap)?.into_iter().collect();
        violations += joins.symmetric_difference(&brute).count() as u64;
        method = "cyclic extension and join closure";
    }
    Ok(CheckOutcome::new(
        "subgroup_census",
        brute.len() as u64,
        violations,
        format!(
            "{} descriptors, {} subgroups by {method}, {duplicates} duplicate, {missing} missing, {extra} extra",
            descriptors.len(),
            brute.len()
        ),
    ))
}

/// Every cyclic subgroup `<x^a y^b>` has one of the two cyclic canonical forms:
/// `Cyclic { i, j }` or `TwoGen { i: r, a, j }`.
pub fn check_cyclic_subgroups(params: &GroupParams) -> Result<CheckOutcome> {
    let mut violations = 0;
    for g in params.elements() {
        let ok = match classify(&closure(params, &[g]), params) {
            Ok(SubgroupDescriptor::Cyclic { .. }) => true,
            Ok(SubgroupDescriptor::TwoGen { i, .. }) => i == params.r(),
            Err(_) => false,
        };
        if !ok {
            violations += 1;
        }
    }
    Ok(CheckOutcome::new(
        "cyclic_subgroups",
        params.order(),
        violations,
        "<g> has a cyclic canonical form".into(),
    ))
}

/// `alpha^b - 1` is a unit mod `p^r` whenever `q^t` does not divide `b`.
pub fn check_unit_denominators(params: &GroupParams) -> CheckOutcome {
    let mut checked = 0;
    let mut violations = 0;
    for b in (0..params.qs()).filter(|b| b % params.qt() != 0) {
        checked += 1;
        if gcd(sub_mod(params.alpha_pow(b), 1, params.pr()), params.p()) != 1 {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "unit_denominators",
        checked,
        violations,
        "gcd(alpha^b - 1, p) = 1".into(),
    )
}

/// Closed-form powers agree with repeated multiplication for `0 <= k <= bound`.
pub fn check_power_formula(params: &GroupParams) -> CheckOutcome {
    let bound = if params.order() <= 1000 {
        params.order()
    } else {
        64
    };
    let mut checked = 0;
    let mut violations = 0;
    for g in params.elements() {
        let mut acc = GroupElement::IDENTITY;
        for k in 0..=bound {
            checked += 1;
            if params.power(g, k as i64) != acc {
                violations += 1;
            }
            acc = params.multiply(acc, g);
        }
    }
    CheckOutcome::new(
        "power_formula",
        checked,
        violations,
        format!("g^k for k <= {bound}"),
    )
}

/// The commutator's closed form matches the explicit product.
pub fn check_commutators(params: &GroupParams) -> CheckOutcome {
    let stride = if params.order() <= 1000 { 1 } else { 7 };
    let mut checked = 0;
    let mut violations = 0;
    for g in params.elements().step_by(stride) {
        for h in params.elements() {
            checked += 1;
            if params.commutator(g, h)
                != (GroupElement {
                    a: params.commutator_exponent(g, h),
                    b: 0,
                })
            {
                violations += 1;
            }
        }
    }
    CheckOutcome::new(
        "commutator",
        checked,
        violations,
        "[g, h] closed form".into(),
    )
}

pub fn run_all(params: &GroupParams, census_cap: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_isomorphisms(params)?,
        check_census(params, census_cap)?,
        check_cyclic_subgroups(params)?,
        check_unit_denominators(params),
        check_power_formula(params),
        check_commutators(params),
    ])
}

/// Every valid `(p, q, r, s, t)` with `l = 1` and `|G| <= max_order`, ordered by
/// group order and then lexicographically.
pub fn valid_parameter_sets(max_order: u64) -> Vec<GroupParams> {
    let mut out = Vec::new();
    let odd_primes: Vec<u64> = (3..=max_order / 3).filter(|&n| is_prime(n)).collect();
    for &q in &odd_primes {
        for &p in &odd_primes {
            if p == q || (p - 1) % q != 0 || p * q > max_order {
                continue;
            }
            let mut r = 1;
            while p.pow(r) * q <= max_order {
                let mut s = 1;
                while p.pow(r) * q.pow(s) <= max_order {
                    for t in 1..=s {
                        if (p - 1) % q.pow(t) == 0 {
                            out.push(make_params(p, q, r, s, t, 1).expect("conditions checked"));
                        }
                    }
                    s += 1;
                }
                r += 1;
            }
        }
    }
    out.sort_by_key(|g| (g.order(), g.p(), g.q(), g.r(), g.s(), g.t()));
    out
}
