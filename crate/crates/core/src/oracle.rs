//! Coset-separating functions that hide a chosen subgroup.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::Result;
use crate::group::{GroupElement, GroupParams};
use crate::subgroups::{elements_of, SubgroupDescriptor};

/// Value of a hiding function. Solvers only compare labels for equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CosetLabel(GroupElement);

impl CosetLabel {
    /// The lexicographically smallest element of the coset. Exposed for
    /// reports and tests.
    pub fn representative(&self) -> GroupElement {
        self.0
    }
}

/// Query access to a function that separates the left cosets of some hidden subgroup.
pub trait HidingFunction: Sync {
    fn params(&self) -> &GroupParams;

    /// One classical query.
    fn evaluate(&self, g: GroupElement) -> CosetLabel;

    /// One query in superposition over `domain`, returning the whole value table.
    fn superposition_query(&self, domain: &[GroupElement]) -> Vec<CosetLabel>;

    /// Charges `n` additional quantum queries.
    fn charge(&self, n: u64);

    fn queries(&self) -> u64;
}

/// `f(g) = min(g H)`, tabulated eagerly over the whole group.
#[derive(Debug)]
pub struct HiddenSubgroupOracle {
    params: GroupParams,
    hidden: SubgroupDescriptor,
    labels: Vec<CosetLabel>,
    query_count: AtomicU64,
}

pub fn build_oracle(
    params: &GroupParams,
    hidden: SubgroupDescriptor,
) -> Result<HiddenSubgroupOracle> {
    hidden.validate(params)?;
    let members = elements_of(params, &hidden);
    let n = params.order() as usize;
    let mut labels: Vec<Option<CosetLabel>> = vec![None; n];
    let mut coset = Vec::with_capacity(members.len());
    for k in 0..n {
        if labels[k].is_some() {
            continue;
        }
        let g = params.element_at(k);
        coset.clear();
        coset.extend(members.elements().iter().map(|&h| params.multiply(g, h)));
        let label = CosetLabel(*coset.iter().min().expect("subgroup is nonempty"));
        for &x in &coset {
            labels[params.index_of(x)] = Some(label);
        }
    }
    Ok(HiddenSubgroupOracle {
        params: params.clone(),
        hidden,
        labels: labels
            .into_iter()
            .map(|l| l.expect("cosets partition G"))
            .collect(),
        query_count: AtomicU64::new(0),
    })
}

impl HiddenSubgroupOracle {
    /// The planted subgroup; for tests and reports, never for solvers.
    pub fn hidden(&self) -> SubgroupDescriptor {
        self.hidden
    }

    pub fn reset_queries(&self) {
        self.query_count.store(0, Ordering::Relaxed);
    }

    /// Number of distinct labels, read from the table without charging queries.
    pub fn coset_count(&self) -> usize {
        let mut l = self.labels.clone();
        l.sort();
        l.dedup();
        l.len()
    }
}

impl HidingFunction for HiddenSubgroupOracle {
    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn evaluate(&self, g: GroupElement) -> CosetLabel {
        self.query_count.fetch_add(1, Ordering::Relaxed);
        self.labels[self.params.index_of(g)]
    }

    fn superposition_query(&self, domain: &[GroupElement]) -> Vec<CosetLabel> {
        self.query_count.fetch_add(1, Ordering::Relaxed);
        domain
            .iter()
            .map(|&g| self.labels[self.params.index_of(g)])
            .collect()
    }

    fn charge(&self, n: u64) {
        self.query_count.fetch_add(n, Ordering::Relaxed);
    }

    fn queries(&self) -> u64 {
        self.query_count.load(Ordering::Relaxed)
    }
}

/// The function induced on `G / <x^(p^i)>` by a function whose hidden subgroup
/// contains `x^(p^i)`. Elements `(a, b)` with `a < p^i` lift to themselves.
pub struct QuotientOracle<'a, F: HidingFunction + ?Sized> {
    base: &'a F,
    params: GroupParams,
}

impl<'a, F: HidingFunction + ?Sized> QuotientOracle<'a, F> {
    pub fn new(base: &'a F, i: u32) -> Result<Self> {
        Ok(QuotientOracle {
            params: base.params().quotient(i)?,
            base,
        })
    }
}

impl<F: HidingFunction + ?Sized> HidingFunction for QuotientOracle<'_, F> {
    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn evaluate(&self, g: GroupElement) -> CosetLabel {
        self.base.evaluate(g)
    }

    fn superposition_query(&self, domain: &[GroupElement]) -> Vec<CosetLabel> {
        self.base.superposition_query(domain)
    }

    fn charge(&self, n: u64) {
        self.base.charge(n)
    }

    fn queries(&self) -> u64 {
        self.base.queries()
    }
}

/// `f_x(a) = f(a, 0)`, hiding `H ∩ <x>` in `Z_{p^r}`.
pub fn restrict_x<F: HidingFunction + ?Sized>(oracle: &F) -> impl Fn(u64) -> CosetLabel + '_ {
    move |a| {
        oracle.evaluate(GroupElement {
            a: a % oracle.params().pr(),
            b: 0,
        })
    }
}

/// `f_y(b) = f(0, b)`, hiding `H ∩ <y>` in `Z_{q^s}`.
pub fn restrict_y<F: HidingFunction + ?Sized>(oracle: &F) -> impl Fn(u64) -> CosetLabel + '_ {
    move |b| {
        oracle.evaluate(GroupElement {
            a: 0,
            b: b % oracle.params().qs(),
        })
    }
}

/// Value tables of `f_x` and `f_y`, one superposition query each.
pub fn restricted_tables<F: HidingFunction + ?Sized>(
    oracle: &F,
) -> (Vec<CosetLabel>, Vec<CosetLabel>) {
    let p = oracle.params();
    let xs: Vec<_> = (0..p.pr()).map(|a| GroupElement { a, b: 0 }).collect();
    let ys: Vec<_> = (0..p.qs()).map(|b| GroupElement { a: 0, b }).collect();
    (
        oracle.superposition_query(&xs),
        oracle.superposition_query(&ys),
    )
}

/// Fibre function `F(b) = min_c f(x^c y^b)` over `Z_{q^s}`.
///
/// The fibres over `b` and `b'` meet the same cosets when `b - b'` lies in the
/// projection of `H` onto `Z_{q^s}` and disjoint sets otherwise, so `F` hides that
/// projection. One superposition query over all of `G`.
pub fn fibre_table<F: HidingFunction + ?Sized>(oracle: &F) -> Vec<CosetLabel> {
    let p = oracle.params();
    let all: Vec<_> = p.elements().collect();
    let labels = oracle.superposition_query(&all);
    (0..p.qs())
        .map(|b| {
            (0..p.pr())
                .map(|a| labels[p.index_of(GroupElement { a, b })])
                .min()
                .expect("p^r >= 1")
        })
        .collect()
}
