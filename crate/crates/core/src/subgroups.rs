//! Canonical descriptors for every subgroup of `G_t`, generic closure, and a
//! brute-force subgroup enumerator that knows nothing about the descriptor forms.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams};
use crate::number_theory::{mul_mod, valuation};

/// Canonical form of a subgroup.
///
/// * `Cyclic { i, j }` is `<x^(p^i) y^(q^j)>` with `t <= j <= s`.
/// * `TwoGen { i, a, j }` is `<x^(p^i), x^a y^(q^j)>` with `j < t` and `0 <= a < p^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum SubgroupDescriptor {
    Cyclic { i: u32, j: u32 },
    TwoGen { i: u32, a: u64, j: u32 },
}

impl SubgroupDescriptor {
    pub fn trivial(params: &GroupParams) -> Self {
        SubgroupDescriptor::Cyclic {
            i: params.r(),
            j: params.s(),
        }
    }

    pub fn full(_params: &GroupParams) -> Self {
        SubgroupDescriptor::TwoGen { i: 0, a: 0, j: 0 }
    }

    pub fn validate(&self, params: &GroupParams) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHidden(m));
        match *self {
            SubgroupDescriptor::Cyclic { i, j } => {
                if i > params.r() || j < params.t() || j > params.s() {
                    return bad(format!("{self} needs i <= r and t <= j <= s"));
                }
            }
            SubgroupDescriptor::TwoGen { i, a, j } => {
                if i > params.r() || j >= params.t() {
                    return bad(format!("{self} needs i <= r and j < t"));
                }
                if a >= params.p().pow(i) {
                    return bad(format!("{self} needs a < p^i"));
                }
            }
        }
        Ok(())
    }

    /// `p^(r-i) q^(s-j)`.
    pub fn order(&self, params: &GroupParams) -> u64 {
        let (i, j) = match *self {
            SubgroupDescriptor::Cyclic { i, j } => (i, j),
            SubgroupDescriptor::TwoGen { i, j, .. } => (i, j),
        };
        params.p().pow(params.r() - i) * params.q().pow(params.s() - j)
    }

    pub fn generators(&self, params: &GroupParams) -> Vec<GroupElement> {
        let xp = |i: u32| (params.p().pow(i) % params.pr()) as i64;
        let yq = |j: u32| (params.q().pow(j) % params.qs()) as i64;
        match *self {
            SubgroupDescriptor::Cyclic { i, j } => vec![params.element(xp(i), yq(j))],
            SubgroupDescriptor::TwoGen { i, a, j } => {
                vec![params.element(xp(i), 0), params.element(a as i64, yq(j))]
            }
        }
    }
}

impl fmt::Display for SubgroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupDescriptor::Cyclic { i, j } => write!(f, "cyclic:{i},{j}"),
            SubgroupDescriptor::TwoGen { i, a, j } => write!(f, "twogen:{i},{a},{j}"),
        }
    }
}

impl FromStr for SubgroupDescriptor {
    type Err = Error;

    /// Parses `cyclic:i,j` or `twogen:i,a,j`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidHidden(format!("cannot parse descriptor {s:?}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let nums = rest
            .split(',')
            .map(|x| x.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        match (kind.to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("cyclic", [i, j]) => Ok(SubgroupDescriptor::Cyclic {
                i: *i as u32,
                j: *j as u32,
            }),
            ("twogen", [i, a, j]) => Ok(SubgroupDescriptor::TwoGen {
                i: *i as u32,
                a: *a,
                j: *j as u32,
            }),
            _ => Err(bad()),
        }
    }
}

/// A subgroup given by its elements, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(Vec<GroupElement>);

impl ElementSet {
    /// Sorts and dedups; does not check closure.
    pub fn from_elements(mut elements: Vec<GroupElement>) -> Self {
        elements.sort();
        elements.dedup();
        ElementSet(elements)
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.0.binary_search(g).is_ok()
    }

    /// Contains the identity and is closed under products and inverses.
    pub fn is_subgroup(&self, params: &GroupParams) -> bool {
        if !self.contains(&GroupElement::IDENTITY) {
            return false;
        }
        let mask = Membership::from_elements(params, self.0.iter().copied());
        self.0.iter().all(|&g| {
            mask.get(params.inverse(g)) && self.0.iter().all(|&h| mask.get(params.multiply(g, h)))
        })
    }
}

/// Bitset over the dense element index.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Membership {
    words: Vec<u64>,
    qs: u64,
}

impl Membership {
    fn empty(params: &GroupParams) -> Self {
        Membership {
            words: vec![0; (params.order() as usize).div_ceil(64)],
            qs: params.qs(),
        }
    }

    fn from_elements(params: &GroupParams, it: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut m = Self::empty(params);
        for g in it {
            m.insert(g);
        }
        m
    }

    #[inline]
    fn idx(&self, g: GroupElement) -> usize {
        (g.a * self.qs + g.b) as usize
    }

    #[inline]
    fn get(&self, g: GroupElement) -> bool {
        let k = self.idx(g);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    /// Returns true if newly inserted.
    #[inline]
    fn insert(&mut self, g: GroupElement) -> bool {
        let k = self.idx(g);
        let bit = 1u64 << (k % 64);
        let fresh = self.words[k / 64] & bit == 0;
        self.words[k / 64] |= bit;
        fresh
    }

    fn union_with(&mut self, other: &Membership) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn is_superset(&self, other: &Membership) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| b & !a == 0)
    }

    fn to_set(&self, params: &GroupParams) -> ElementSet {
        let mut out = Vec::new();
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let k = w * 64 + bits.trailing_zeros() as usize;
                out.push(params.element_at(k));
                bits &= bits - 1;
            }
        }
        ElementSet(out)
    }
}

/// Subgroup generated by `gens`: breadth-first closure under right
/// multiplication by the generators. Finite, so this is closed under inverses too.
fn closure_mask(params: &GroupParams, gens: &[GroupElement]) -> Membership {
    let mut seen = Membership::empty(params);
    seen.insert(GroupElement::IDENTITY);
    let mut queue = VecDeque::from([GroupElement::IDENTITY]);
    while let Some(g) = queue.pop_front() {
        for &h in gens {
            let gh = params.multiply(g, h);
            if seen.insert(gh) {
                queue.push_back(gh);
            }
        }
    }
    seen
}

/// Like [`closure_mask`], but stops as soon as the set outgrows every proper
/// subgroup: a proper subgroup has index at least the smallest prime dividing `|G|`.
fn join_mask(params: &GroupParams, gens: &[GroupElement]) -> Membership {
    let largest_proper = params.order() / params.p().min(params.q());
    let mut seen = Membership::empty(params);
    seen.insert(GroupElement::IDENTITY);
    let mut count = 1;
    let mut queue = VecDeque::from([GroupElement::IDENTITY]);
    while let Some(g) = queue.pop_front() {
        for &h in gens {
            let gh = params.multiply(g, h);
            if seen.insert(gh) {
                count += 1;
                if count > largest_proper {
                    return Membership::from_elements(params, params.elements());
                }
                queue.push_back(gh);
            }
        }
    }
    seen
}

pub fn closure(params: &GroupParams, gens: &[GroupElement]) -> ElementSet {
    closure_mask(params, gens).to_set(params)
}

/// Every subgroup exactly once, in canonical form: class-i descriptors
/// first (by `i`, then `j`), then class-ii (by `j`, `i`, `a`).
pub fn enumerate_subgroups(params: &GroupParams) -> Vec<SubgroupDescriptor> {
    let mut out = Vec::new();
    for i in 0..=params.r() {
        for j in params.t()..=params.s() {
            out.push(SubgroupDescriptor::Cyclic { i, j });
        }
    }
    for j in 0..params.t() {
        for i in 0..=params.r() {
            for a in 0..params.p().pow(i) {
                out.push(SubgroupDescriptor::TwoGen { i, a, j });
            }
        }
    }
    out
}

/// Closure of the descriptor's generators.
pub fn elements_of(params: &GroupParams, desc: &SubgroupDescriptor) -> ElementSet {
    closure(params, &desc.generators(params))
}

/// Membership by solving the descriptor's modular equations directly.
///
/// For `TwoGen { i, a, j }` the elements are `x^(M p^i + a S_j(k)) y^(k q^j)`,
/// so `(c, d)` is a member iff `q^j | d` and `c = a S_j(d / q^j) (mod p^i)`.
pub fn contains(params: &GroupParams, desc: &SubgroupDescriptor, g: GroupElement) -> bool {
    match *desc {
        SubgroupDescriptor::Cyclic { i, j } => {
            valuation(g.a, params.p(), params.r()) >= i
                && valuation(g.b, params.q(), params.s()) >= j
        }
        SubgroupDescriptor::TwoGen { i, a, j } => {
            let step = params.q().pow(j);
            if !g.b.is_multiple_of(step) {
                return false;
            }
            let pi = params.p().pow(i);
            let s = params
                .s_of(g.b / step, j)
                .expect("j < t for class-ii descriptors")
                .value();
            mul_mod(a, s, pi) == g.a % pi
        }
    }
}

pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 10_000;

/// All subgroups of `G`, found without using the descriptor forms: start from
/// every cyclic subgroup and join with cyclic subgroups until nothing new appears.
/// Output is sorted.
pub fn brute_force_subgroups(params: &GroupParams, cap: u64) -> Result<Vec<ElementSet>> {
    if params.order() > cap {
        return Err(Error::CapExceeded {
            order: params.order(),
            cap,
        });
    }

    // Cyclic subgroups, one generator each.
    let mut cyclic: Vec<(GroupElement, Membership)> = Vec::new();
    let mut seen: HashSet<Membership> = HashSet::new();
    for g in params.elements() {
        let m = closure_mask(params, &[g]);
        if seen.insert(m.clone()) {
            cyclic.push((g, m));
        }
    }

    // Every subgroup is generated by finitely many cyclic subgroups, so joining
    // with cyclic subgroups until a fixed point reaches all of them.
    let mut family: HashSet<Membership> = seen;
    let mut frontier: Vec<(Vec<GroupElement>, Membership)> =
        cyclic.iter().map(|(g, m)| (vec![*g], m.clone())).collect();
    while !frontier.is_empty() {
        let joins: Vec<(Vec<GroupElement>, Membership)> = frontier
            .par_iter()
            .flat_map_iter(|(gens, mask)| {
                cyclic
                    .iter()
                    .filter(|(_, c)| !mask.is_superset(c))
                    .map(move |(g, _)| {
                        let mut gens = gens.clone();
                        gens.push(*g);
                        let joined = join_mask(params, &gens);
                        (gens, joined)
                    })
            })
            .collect();
        frontier = Vec::new();
        for (gens, mask) in joins {
            if !family.contains(&mask) {
                family.insert(mask.clone());
                frontier.push((gens, mask));
            }
        }
    }

    let mut out: Vec<ElementSet> = family.iter().map(|m| m.to_set(params)).collect();
    out.sort();
    debug_assert!(out.iter().all(|s| s.is_subgroup(params)));
    Ok(out)
}

/// All subgroups of `G` by cyclic extension, again without the descriptor forms.
///
/// `G` is solvable, so every nontrivial subgroup `K` has a normal subgroup `M`
/// of prime index `k`, and `K = <M, g>` for any `g` in `K \ M`. Such a `g`
/// normalizes `M` and has `g^k` in `M`. Starting from the trivial group and
/// applying every extension of that shape therefore reaches every subgroup.
/// Conjugates of an extension are extensions of the conjugate, so only one
/// subgroup per conjugacy class is extended and the rest are filled in by
/// conjugation.
pub fn cyclic_extension_subgroups(params: &GroupParams, cap: u64) -> Result<Vec<ElementSet>> {
    if params.order() > cap {
        return Err(Error::CapExceeded {
            order: params.order(),
            cap,
        });
    }
    // index tables of g -> g^p and g -> g^q
    let powers: Vec<(u64, Vec<GroupElement>)> = [params.p(), params.q()]
        .into_iter()
        .map(|k| {
            (
                k,
                params
                    .elements()
                    .map(|g| params.power(g, k as i64))
                    .collect(),
            )
        })
        .collect();
    let trivial = Membership::from_elements(params, [GroupElement::IDENTITY]);
    let mut family: HashSet<Membership> = HashSet::from([trivial.clone()]);
    let mut frontier: Vec<(Membership, Vec<GroupElement>)> = vec![(trivial, Vec::new())];
    while !frontier.is_empty() {
        let found: Vec<(Membership, Vec<GroupElement>)> = frontier
            .par_iter()
            .flat_map_iter(|(mask, gens)| extensions(params, &powers, mask, gens))
            .collect();
        frontier = Vec::new();
        for (mask, gens) in found {
            if family.contains(&mask) {
                continue;
            }
            for conjugate in conjugacy_class(params, &mask) {
                family.insert(conjugate);
            }
            frontier.push((mask, gens));
        }
    }
    let mut out: Vec<ElementSet> = family.iter().map(|m| m.to_set(params)).collect();
    out.sort();
    Ok(out)
}

/// Orbit of a subgroup under conjugation, by closing under conjugation by `x` and `y`.
fn conjugacy_class(params: &GroupParams, h: &Membership) -> Vec<Membership> {
    let x = GroupElement {
        a: 1 % params.pr(),
        b: 0,
    };
    let y = GroupElement {
        a: 0,
        b: 1 % params.qs(),
    };
    let mut orbit = vec![h.clone()];
    let mut seen: HashSet<Membership> = HashSet::from([h.clone()]);
    let mut next = 0;
    while next < orbit.len() {
        let members = orbit[next].to_set(params);
        next += 1;
        for c in [x, y] {
            let c_inv = params.inverse(c);
            let conj = Membership::from_elements(
                params,
                members
                    .elements()
                    .iter()
                    .map(|&k| params.multiply(params.multiply(c, k), c_inv)),
            );
            if seen.insert(conj.clone()) {
                orbit.push(conj);
            }
        }
    }
    orbit
}

/// Every `<H, g>` with `g` normalizing `H` and `gH` of prime order, one per coset `gH`.
fn extensions(
    params: &GroupParams,
    powers: &[(u64, Vec<GroupElement>)],
    h: &Membership,
    gens: &[GroupElement],
) -> Vec<(Membership, Vec<GroupElement>)> {
    let members = h.to_set(params);
    let mut done = h.clone();
    let mut out = Vec::new();
    for (idx, g) in params.elements().enumerate() {
        // gH has prime order k iff g^k lands in H; this is constant on the coset
        let Some(&(k, _)) = powers.iter().find(|(_, table)| h.get(table[idx])) else {
            continue;
        };
        if done.get(g) {
            continue;
        }
        for &x in members.elements() {
            done.insert(params.multiply(g, x));
        }
        let g_inv = params.inverse(g);
        if !gens
            .iter()
            .all(|&x| h.get(params.multiply(params.multiply(g, x), g_inv)))
        {
            continue;
        }
        let mut joined = h.clone();
        let mut gi = GroupElement::IDENTITY;
        for _ in 1..k {
            gi = params.multiply(gi, g);
            for &x in members.elements() {
                joined.insert(params.multiply(gi, x));
            }
        }
        // k is prime, so every element of <H, g> outside H gives this same extension
        done.union_with(&joined);
        let mut gens = gens.to_vec();
        gens.push(g);
        out.push((joined, gens));
    }
    out
}

/// Canonical descriptor of a subgroup given by its elements.
pub fn classify(set: &ElementSet, params: &GroupParams) -> Result<SubgroupDescriptor> {
    if !set.is_subgroup(params) {
        return Err(Error::NotASubgroup);
    }
    let (p, q) = (params.p(), params.q());
    // H meets <x> in <x^(p^i)>.
    let i = (0..=params.r())
        .find(|&i| set.contains(&params.element((p.pow(i) % params.pr()) as i64, 0)))
        .expect("identity is always present");
    // Projection onto Z_{q^s} is <q^j>.
    let j = set
        .elements()
        .iter()
        .map(|g| valuation(g.b, q, params.s()))
        .min()
        .unwrap_or(params.s());

    let desc = if j >= params.t() {
        SubgroupDescriptor::Cyclic { i, j }
    } else {
        let step = q.pow(j);
        let witness = set
            .elements()
            .iter()
            .find(|g| g.b == step)
            .ok_or(Error::UnclassifiableSet { order: set.len() })?;
        SubgroupDescriptor::TwoGen {
            i,
            a: witness.a % p.pow(i),
            j,
        }
    };
    if elements_of(params, &desc) != *set {
        return Err(Error::UnclassifiableSet { order: set.len() });
    }
    Ok(desc)
}
