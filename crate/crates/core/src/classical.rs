//! Birthday-collision baseline for `H = <x^a y^(q^j)>`.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams};
use crate::number_theory::{inv_raw, mul_mod, sub_mod, Residue};
use crate::oracle::HidingFunction;
use crate::subgroups::SubgroupDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CollisionRecord {
    pub g1: GroupElement,
    pub g2: GroupElement,
    /// `g2^-1 g1 = x^u y^v`
    pub u: u64,
    pub v: u64,
    pub queries_used: u64,
}

/// Queries distinct uniformly random elements until two share a label.
///
/// Sampling is without replacement, so an injective oracle is detected after
/// exactly `|G|` queries.
pub fn find_collision<F, R>(oracle: &F, rng: &mut R) -> Result<CollisionRecord>
where
    F: HidingFunction + ?Sized,
    R: Rng + ?Sized,
{
    let params = oracle.params();
    let n = params.order() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut seen = HashMap::new();
    for k in 0..n {
        let pick = rng.gen_range(k..n);
        order.swap(k, pick);
        let g = params.element_at(order[k]);
        let label = oracle.evaluate(g);
        if let Some(&g2) = seen.get(&label) {
            let diff = params.multiply(params.inverse(g2), g);
            return Ok(CollisionRecord {
                g1: g,
                g2,
                u: diff.a,
                v: diff.b,
                queries_used: k as u64 + 1,
            });
        }
        seen.insert(label, g);
    }
    Err(Error::NoCollision { queries: n as u64 })
}

/// `a = u (alpha^(q^j) - 1) / (alpha^v - 1) mod p^r`, valid when `q^t` does not divide `v`.
pub fn recover_from_collision(
    rec: &CollisionRecord,
    params: &GroupParams,
    j: u32,
) -> Result<Residue> {
    if j >= params.t() {
        return Err(Error::InvalidHidden(format!(
            "j = {j} must be below t = {}",
            params.t()
        )));
    }
    if rec.v.is_multiple_of(params.qt()) {
        return Err(Error::DegenerateV { v: rec.v });
    }
    let pr = params.pr();
    let num = sub_mod(params.alpha_pow(params.q().pow(j)), 1, pr);
    let den = inv_raw(sub_mod(params.alpha_pow(rec.v), 1, pr), pr)?;
    Ok(Residue::new(
        mul_mod(rec.u, mul_mod(num, den, pr), pr) as i128,
        pr,
    ))
}

pub const MAX_COLLISION_ATTEMPTS: u32 = 50;

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalReport {
    pub descriptor: SubgroupDescriptor,
    pub collisions: Vec<CollisionRecord>,
    pub degenerate: u32,
    pub queries: u64,
}

/// Solves the promise problem `H = <x^a y^(q^j)>` with `j < t` known: find
/// collisions until one is non-degenerate and read `a` off it.
pub fn solve_promised<F, R>(oracle: &F, j: u32, rng: &mut R) -> Result<ClassicalReport>
where
    F: HidingFunction + ?Sized,
    R: Rng + ?Sized,
{
    let params = oracle.params();
    let start = oracle.queries();
    let mut collisions = Vec::new();
    let mut degenerate = 0;
    for _ in 0..MAX_COLLISION_ATTEMPTS {
        let rec = find_collision(oracle, rng)?;
        collisions.push(rec);
        match recover_from_collision(&rec, params, j) {
            Ok(a) => {
                return Ok(ClassicalReport {
                    descriptor: SubgroupDescriptor::TwoGen {
                        i: params.r(),
                        a: a.value(),
                        j,
                    },
                    collisions,
                    degenerate,
                    queries: oracle.queries() - start,
                });
            }
            Err(Error::DegenerateV { .. }) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::CollisionRetriesExhausted {
        attempts: MAX_COLLISION_ATTEMPTS,
    })
}
