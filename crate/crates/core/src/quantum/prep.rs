//! The first two steps: the oracle superposition and the post-measurement coset state.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams};
use crate::number_theory::{add_mod, mul_mod};
use crate::oracle::{CosetLabel, HidingFunction};
use crate::quantum::state::{sample_index, StateVector};
use crate::subgroups::SubgroupDescriptor;

/// `sum_{m, n} |m>|n>|f(x^m y^n)>` over `Z_{p^r} x Z_{q^(t-j)}`, uniform amplitude.
#[derive(Debug, Clone)]
pub struct Psi1 {
    dims: (usize, usize),
    labels: Vec<CosetLabel>,
}

/// Second-register size `q^(t-j)`.
pub fn register_size(params: &GroupParams, j: u32) -> Result<u64> {
    if j >= params.t() {
        return Err(Error::InvalidHidden(format!(
            "j = {j} must be below t = {}",
            params.t()
        )));
    }
    Ok(params.q().pow(params.t() - j))
}

/// Builds the first state with a single superposition query.
pub fn prepare_psi1_full<F: HidingFunction + ?Sized>(oracle: &F, j: u32) -> Result<Psi1> {
    let params = oracle.params();
    let d = register_size(params, j)?;
    let domain: Vec<GroupElement> = (0..params.pr())
        .flat_map(|m| {
            (0..d).map(move |n| GroupElement {
                a: m,
                b: n % params.qs(),
            })
        })
        .collect();
    let labels = oracle.superposition_query(&domain);
    Ok(Psi1 {
        dims: (params.pr() as usize, d as usize),
        labels,
    })
}

impl Psi1 {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn norm(&self) -> f64 {
        let amp2 = 1.0 / self.labels.len() as f64;
        (amp2 * self.labels.len() as f64).sqrt()
    }

    /// Every third-register outcome with its Born probability and the
    /// renormalized two-register state left behind.
    pub fn outcomes(&self) -> Vec<(CosetLabel, f64, StateVector)> {
        let mut groups: BTreeMap<CosetLabel, Vec<usize>> = BTreeMap::new();
        for (k, &l) in self.labels.iter().enumerate() {
            groups.entry(l).or_default().push(k);
        }
        let total = self.labels.len() as f64;
        groups
            .into_iter()
            .map(|(label, idx)| {
                let amp = Complex64::new(1.0 / (idx.len() as f64).sqrt(), 0.0);
                let mut s = StateVector::zeros(self.dims);
                for k in &idx {
                    *s.amp_mut(k / self.dims.1, k % self.dims.1) = amp;
                }
                (label, idx.len() as f64 / total, s)
            })
            .collect()
    }

    /// Measures the label register.
    pub fn measure_label<R: Rng + ?Sized>(&self, rng: &mut R) -> (CosetLabel, StateVector) {
        let mut outcomes = self.outcomes();
        let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        let k = sample_index(&probs, rng);
        let (label, _, state) = outcomes.swap_remove(k);
        (label, state)
    }
}

/// `q^(-(t-j)/2) sum_n |m0 + a alpha^n0 S_j(n)>|n0 + n q^j>`, both registers reduced.
///
/// Fails with `NonInjectiveS` if two terms land on the same basis state, which
/// happens when the second-register arithmetic mod `q^(t-j)` collapses the stride `q^j`.
pub fn psi2_state(params: &GroupParams, a: u64, j: u32, m0: u64, n0: u64) -> Result<StateVector> {
    let d = register_size(params, j)?;
    let pr = params.pr();
    let stride = params.q().pow(j);
    let shift = mul_mod(a, params.alpha_pow(n0), pr);
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut state = StateVector::zeros((pr as usize, d as usize));
    let mut owner: Vec<Option<u64>> = vec![None; (pr * d) as usize];
    for n in 0..d {
        let first = add_mod(m0, mul_mod(shift, params.s_of(n, j)?.value(), pr), pr);
        let second = (n0 + n * stride) % d;
        let idx = (first * d + second) as usize;
        if let Some(prev) = owner[idx] {
            return Err(Error::NonInjectiveS {
                n1: prev,
                n2: n,
                value: second,
            });
        }
        owner[idx] = Some(n);
        *state.amp_mut(first as usize, second as usize) = amp;
    }
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct SampledPsi2 {
    pub state: StateVector,
    pub m0: u64,
    pub n0: u64,
}

fn planted_parameters(params: &GroupParams, hidden: &SubgroupDescriptor) -> Result<(u64, u32)> {
    hidden.validate(params)?;
    match *hidden {
        SubgroupDescriptor::TwoGen { i, a, j } if i == params.r() => Ok((a, j)),
        _ => Err(Error::InvalidHidden(format!(
            "{hidden} is not of the form <x^a y^(q^j)> with j < t"
        ))),
    }
}

/// Shortcut for the first two steps: draws `m0` and `n0` uniformly and writes
/// down the resulting coset state directly from the planted `a`.
pub fn prepare_psi2_sampled<R: Rng + ?Sized>(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
    rng: &mut R,
) -> Result<SampledPsi2> {
    let (a, j) = planted_parameters(params, hidden)?;
    let d = register_size(params, j)?;
    let m0 = rng.gen_range(0..params.pr());
    let n0 = rng.gen_range(0..d);
    Ok(SampledPsi2 {
        state: psi2_state(params, a, j, m0, n0)?,
        m0,
        n0,
    })
}

/// Exact distribution of the shortcut: each `(m0, n0)` with probability `1 / (p^r q^(t-j))`.
pub fn sampled_outcomes(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
) -> Result<Vec<(f64, StateVector)>> {
    let (a, j) = planted_parameters(params, hidden)?;
    let d = register_size(params, j)?;
    let weight = 1.0 / (params.pr() * d) as f64;
    let mut out = Vec::new();
    for m0 in 0..params.pr() {
        for n0 in 0..d {
            out.push((weight, psi2_state(params, a, j, m0, n0)?));
        }
    }
    Ok(out)
}
