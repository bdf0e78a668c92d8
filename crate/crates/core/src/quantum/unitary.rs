//! The register-disentangling operator `U` and the fidelity readout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::GroupParams;
use crate::number_theory::{inv_raw, mul_mod};
use crate::quantum::prep::register_size;
use crate::quantum::state::{root_of_unity, StateVector};

/// How basis states outside the defined part of `U` are paired up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completion {
    /// Unused inputs ascending onto unused outputs ascending.
    #[default]
    Lexicographic,
    /// Unused inputs ascending onto unused outputs descending.
    Reversed,
}

/// `U|m>|n> = |m S(n)>|n - S^-1(m S(n) / k0)>` on `Z_{p^r} x Z_{q^(t-j)}`,
/// completed to a permutation of the basis.
///
/// Inputs are assigned in priority order: the row `m = k0` (the only row the
/// algorithm ever feeds in), then every other input where the formula is defined
/// and its output is still free, then the completion.
#[derive(Debug, Clone)]
pub struct UOperator {
    dims: (usize, usize),
    perm: Vec<usize>,
    defined: usize,
}

impl UOperator {
    pub fn new(params: &GroupParams, j: u32, k0: u64, completion: Completion) -> Result<Self> {
        let d = register_size(params, j)?;
        let pr = params.pr();
        let stride = params.q().pow(j);

        // The coset state occupies register values n0 + n q^j; those must be distinct.
        let mut hit: Vec<Option<u64>> = vec![None; d as usize];
        for n in 0..d {
            let v = (n * stride) % d;
            if let Some(prev) = hit[v as usize] {
                return Err(Error::NonInjectiveS {
                    n1: prev,
                    n2: n,
                    value: v,
                });
            }
            hit[v as usize] = Some(n);
        }

        let s_table: Vec<u64> = (0..d)
            .map(|n| params.s_of(n, j).map(|r| r.value()))
            .collect::<Result<_>>()?;
        let mut s_inv: Vec<Option<u64>> = vec![None; pr as usize];
        for (n, &s) in s_table.iter().enumerate() {
            if let Some(prev) = s_inv[s as usize] {
                return Err(Error::NonInjectiveS {
                    n1: prev,
                    n2: n as u64,
                    value: s,
                });
            }
            s_inv[s as usize] = Some(n as u64);
        }
        let k0_inv = inv_raw(k0 % pr, pr)?;

        let (n1, n2) = (pr as usize, d as usize);
        let size = n1 * n2;
        let image = |m: u64, n: u64| -> Option<usize> {
            let first = mul_mod(m, s_table[n as usize], pr);
            let w = s_inv[mul_mod(first, k0_inv, pr) as usize]?;
            let second = (n + d - w) % d;
            Some(first as usize * n2 + second as usize)
        };

        let mut perm: Vec<Option<usize>> = vec![None; size];
        let mut used = vec![false; size];
        let k0 = k0 % pr;
        let row = (0..d).map(|n| (k0, n));
        let rest = (0..pr)
            .filter(|&m| m != k0)
            .flat_map(|m| (0..d).map(move |n| (m, n)));
        let mut defined = 0;
        for (m, n) in row.chain(rest) {
            if let Some(out) = image(m, n) {
                if !used[out] {
                    used[out] = true;
                    perm[m as usize * n2 + n as usize] = Some(out);
                    defined += 1;
                }
            }
        }

        let free_in: Vec<usize> = (0..size).filter(|&k| perm[k].is_none()).collect();
        let mut free_out: Vec<usize> = (0..size).filter(|&k| !used[k]).collect();
        if completion == Completion::Reversed {
            free_out.reverse();
        }
        for (input, output) in free_in.into_iter().zip(free_out) {
            perm[input] = Some(output);
        }
        Ok(UOperator {
            dims: (n1, n2),
            perm: perm
                .into_iter()
                .map(|x| x.expect("completion pairs every input"))
                .collect(),
            defined,
        })
    }

    /// `perm[input] = output`, both as dense basis indices.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Inputs mapped by the formula itself rather than by the completion.
    pub fn defined_count(&self) -> usize {
        self.defined
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        assert_eq!(state.dims(), self.dims, "U acts on Z_(p^r) x Z_(q^(t-j))");
        let mut out = vec![Complex64::new(0.0, 0.0); self.perm.len()];
        for (input, &amp) in state.amplitudes().iter().enumerate() {
            out[self.perm[input]] = amp;
        }
        StateVector::from_amplitudes(self.dims, out)
    }
}

/// Applies `U` for `j = 0` with the lexicographic completion.
pub fn apply_u(state: &StateVector, params: &GroupParams, k0: u64) -> Result<StateVector> {
    Ok(UOperator::new(params, 0, k0, Completion::Lexicographic)?.apply(state))
}

/// `|<a~|psi>|` with `|a~> = N^(-1/2) sum_j w^(ja) |j>`, taken over the
/// `|0>` slice of the second register.
pub fn fidelity_with_perfect(state: &StateVector, a: u64) -> f64 {
    let n = state.dims().0;
    let norm = 1.0 / (n as f64).sqrt();
    let overlap: Complex64 = (0..n)
        .map(|m| {
            (root_of_unity(mul_mod(m as u64, a, n as u64), n as u64) * norm).conj()
                * state.amp(m, 0)
        })
        .sum();
    overlap.norm()
}
