//! End-to-end runs: recovering `a` for `H = <x^a y>`, abelian Fourier sampling
//! for the cyclic restrictions, and the full reduction.

use std::hash::Hash;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams};
use crate::number_theory::gcd;
use crate::oracle::{fibre_table, restricted_tables, HidingFunction, QuotientOracle};
use crate::quantum::prep::{prepare_psi1_full, prepare_psi2_sampled};
use crate::quantum::state::{measure, qft, Direction, Register, StateVector};
use crate::quantum::unitary::{Completion, UOperator};
use crate::rng::TrialRng;
use crate::subgroups::SubgroupDescriptor;

/// How the coset state is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preparation {
    /// Query the oracle in superposition and measure the label register.
    Full,
    /// Draw `m0, n0` and write the coset state from the planted `a`.
    Sampled { a: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTranscript {
    pub seed: u64,
    pub stream: u64,
    pub m0: u64,
    pub n0: u64,
    pub k0: u64,
    pub k0_is_unit: bool,
    pub candidate_a: Option<u64>,
    pub verified: bool,
    pub per_step_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub transcript: RunTranscript,
    /// State after `U`, present when `k0` was a unit.
    pub psi5: Option<StateVector>,
}

/// `ceil(p^(r+1) / (2 (p-1) q))`.
pub fn repetition_count(params: &GroupParams) -> u64 {
    let num = params.p().pow(params.r() + 1);
    let den = 2 * (params.p() - 1) * params.q();
    num.div_ceil(den)
}

/// `(p-1) q / p^(r+1)`, the per-run probability of a verified candidate.
pub fn per_run_success_probability(params: &GroupParams) -> f64 {
    ((params.p() - 1) * params.q()) as f64 / params.p().pow(params.r() + 1) as f64
}

/// One pass of the five-step procedure followed by the inverse transform,
/// measurement and oracle verification of the candidate.
pub fn recover_a_once<F: HidingFunction + ?Sized>(
    oracle: &F,
    prep: Preparation,
    rng: &mut TrialRng,
) -> Result<PipelineRun> {
    let params = oracle.params();
    if params.t() != 1 {
        return Err(Error::InvalidHidden(format!(
            "recovering a needs t = 1 (and hence j = 0), got t = {}",
            params.t()
        )));
    }
    let pr = params.pr();
    let mut norms = Vec::with_capacity(6);

    let (psi2, m0, n0) = match prep {
        Preparation::Full => {
            let psi1 = prepare_psi1_full(oracle, 0)?;
            norms.push(psi1.norm());
            let (_, psi2) = psi1.measure_label(rng);
            // every coset meets n = 0 exactly once, so take that term as (m0, 0)
            let m0 = (0..pr as usize)
                .find(|&m| psi2.amp(m, 0).norm_sqr() > 0.0)
                .expect("coset state has a term with n = 0") as u64;
            (psi2, m0, 0)
        }
        Preparation::Sampled { a } => {
            let hidden = SubgroupDescriptor::TwoGen {
                i: params.r(),
                a,
                j: 0,
            };
            let sampled = prepare_psi2_sampled(params, &hidden, rng)?;
            (sampled.state, sampled.m0, sampled.n0)
        }
    };
    norms.push(psi2.norm());

    let psi3 = qft(&psi2, Register::First, Direction::Forward);
    norms.push(psi3.norm());
    let (k0, psi4) = measure(&psi3, Register::First, rng);
    norms.push(psi4.norm());
    let k0 = k0 as u64;

    if !params.is_unit_mod_pr(k0) {
        return Ok(PipelineRun {
            transcript: RunTranscript {
                seed: rng.id().seed,
                stream: rng.id().stream,
                m0,
                n0,
                k0,
                k0_is_unit: false,
                candidate_a: None,
                verified: false,
                per_step_norms: norms,
            },
            psi5: None,
        });
    }

    let u = UOperator::new(params, 0, k0, Completion::Lexicographic)?;
    let psi5 = u.apply(&psi4);
    norms.push(psi5.norm());
    let readout = qft(&psi5, Register::First, Direction::Inverse);
    norms.push(readout.norm());
    let (candidate, _) = measure(&readout, Register::First, rng);
    let candidate = candidate as u64;

    let e = oracle.evaluate(GroupElement::IDENTITY);
    let verified = oracle.evaluate(GroupElement {
        a: candidate,
        b: 1 % params.qs(),
    }) == e;

    Ok(PipelineRun {
        transcript: RunTranscript {
            seed: rng.id().seed,
            stream: rng.id().stream,
            m0,
            n0,
            k0,
            k0_is_unit: true,
            candidate_a: Some(candidate),
            verified,
            per_step_norms: norms,
        },
        psi5: Some(psi5),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RecoverOptions {
    /// Keep going past the repetition count until a candidate verifies.
    pub retry_until_verified: bool,
    /// Hard cap on runs when retrying.
    pub max_runs: u64,
}

impl RecoverOptions {
    pub fn bounded() -> Self {
        RecoverOptions {
            retry_until_verified: false,
            max_runs: 0,
        }
    }

    pub fn retrying(max_runs: u64) -> Self {
        RecoverOptions {
            retry_until_verified: true,
            max_runs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub a: u64,
    pub runs: Vec<RunTranscript>,
}

/// Repeats [`recover_a_once`] up to the repetition count (or longer when
/// retrying) and returns the first verified candidate.
pub fn recover_a<F: HidingFunction + ?Sized>(
    oracle: &F,
    prep: Preparation,
    opts: RecoverOptions,
    rng: &mut TrialRng,
) -> Result<Recovery> {
    let budget = repetition_count(oracle.params());
    let limit = if opts.retry_until_verified {
        opts.max_runs.max(budget)
    } else {
        budget
    };
    let mut runs = Vec::new();
    for _ in 0..limit {
        let run = recover_a_once(oracle, prep, rng)?;
        let found = run
            .transcript
            .verified
            .then_some(run.transcript.candidate_a)
            .flatten();
        runs.push(run.transcript);
        if let Some(a) = found {
            return Ok(Recovery { a, runs });
        }
    }
    Err(Error::Exhausted { runs: limit })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorSearch {
    /// `i` with hidden subgroup `<p^i>` of `Z_(p^e)`.
    pub exponent: u32,
    pub samples: Vec<u64>,
    /// Classical look-ups spent confirming the exponent.
    pub probes: u32,
}

/// Fourier sampling over the cyclic group `Z_N`, `N = len(table) = prime^e`,
/// for a function that hides `<prime^i>`.
///
/// Each sample prepares the coset state by measuring the label of a uniform
/// superposition, applies the QFT and measures; samples are uniform over the
/// annihilator, multiples of `|H|`. The gcd of `e + 4` samples with `N` equals
/// `|H|` up to a missing power of `prime`, and one table probe per missing power
/// raises the estimate until `f(prime^i) = f(0)`.
pub fn abelian_find_divisor<L, R>(table: &[L], prime: u64, rng: &mut R) -> DivisorSearch
where
    L: Copy + Eq + Hash,
    R: Rng + ?Sized,
{
    let n = table.len();
    let mut e = 0u32;
    while prime.pow(e) < n as u64 {
        e += 1;
    }
    assert_eq!(
        prime.pow(e),
        n as u64,
        "domain size must be a power of the prime"
    );

    let mut samples = Vec::with_capacity(e as usize + 4);
    for _ in 0..e + 4 {
        let label = table[rng.gen_range(0..n)];
        let members: Vec<usize> = (0..n).filter(|&k| table[k] == label).collect();
        let mut state = StateVector::zeros((n, 1));
        let amp = 1.0 / (members.len() as f64).sqrt();
        for &k in &members {
            *state.amp_mut(k, 0) = num_complex::Complex64::new(amp, 0.0);
        }
        let spectrum = qft(&state, Register::First, Direction::Forward);
        samples.push(measure(&spectrum, Register::First, rng).0 as u64);
    }

    let g = samples.iter().fold(n as u64, |acc, &k| gcd(acc, k));
    let d = n as u64 / g;
    let mut i = 0;
    while prime.pow(i) < d {
        i += 1;
    }
    let mut probes = 0;
    while i < e && table[prime.pow(i) as usize % n] != table[0] {
        probes += 1;
        i += 1;
    }
    DivisorSearch {
        exponent: i,
        samples,
        probes,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Cap on runs of the `a`-recovery, as a multiple of the repetition count.
    pub retry_factor: u64,
    /// Check the answer against the oracle before returning it.
    pub validate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            retry_factor: 64,
            validate: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub descriptor: SubgroupDescriptor,
    /// `H ∩ <x> = <x^(p^i)>`.
    pub i: u32,
    /// `H ∩ <y> = <y^(q^j_y)>`.
    pub j_y: u32,
    /// Projection of `H` onto `Z_{q^s}` is `<q^j>`.
    pub j: u32,
    pub runs: Vec<RunTranscript>,
    /// Oracle queries spent solving, excluding validation.
    pub queries: u64,
}

/// Finds the hidden subgroup.
///
/// 1. Fourier sampling on `f_x` gives `i`, on `f_y` gives `j_y`, and on the
///    fibre function gives `j`, the exponent of the projection onto `Z_{q^s}`.
/// 2. `j >= t`: the answer is `Cyclic { i, j }`.
/// 3. `j < t` and `j_y = j`: `y^(q^j)` is in `H`, so it is `TwoGen { i, 0, j }`.
/// 4. Otherwise `a` is nonzero mod `p^i`. For `t = 1` it is recovered on the
///    quotient by `<x^(p^i)>`; for `t > 1` there is no procedure and the call fails
///    with `UnsupportedT`.
pub fn solve_hsp<F: HidingFunction + ?Sized>(
    oracle: &F,
    opts: &SolveOptions,
    rng: &mut TrialRng,
) -> Result<SolveReport> {
    let params = oracle.params();
    let start = oracle.queries();

    let (fx, fy) = restricted_tables(oracle);
    let sx = abelian_find_divisor(&fx, params.p(), rng);
    let sy = abelian_find_divisor(&fy, params.q(), rng);
    let fibre = fibre_table(oracle);
    let sf = abelian_find_divisor(&fibre, params.q(), rng);
    // one query is already charged per table; the rest are further samples and probes
    for s in [&sx, &sy, &sf] {
        oracle.charge(s.samples.len() as u64 - 1 + s.probes as u64);
    }
    let (i, j_y, j) = (sx.exponent, sy.exponent, sf.exponent);

    let mut runs = Vec::new();
    let descriptor = if j >= params.t() {
        SubgroupDescriptor::Cyclic { i, j }
    } else if j_y == j {
        SubgroupDescriptor::TwoGen { i, a: 0, j }
    } else if params.t() > 1 {
        return Err(Error::UnsupportedT { t: params.t() });
    } else if i == 0 {
        // a is only defined mod p^0
        SubgroupDescriptor::TwoGen { i: 0, a: 0, j: 0 }
    } else {
        let quotient = QuotientOracle::new(oracle, i)?;
        let cap = opts.retry_factor * repetition_count(quotient.params());
        let rec = recover_a(
            &quotient,
            Preparation::Full,
            RecoverOptions::retrying(cap),
            rng,
        )?;
        runs = rec.runs;
        SubgroupDescriptor::TwoGen { i, a: rec.a, j: 0 }
    };
    let queries = oracle.queries() - start;

    if opts.validate {
        validate(oracle, &descriptor)?;
    }
    Ok(SolveReport {
        descriptor,
        i,
        j_y,
        j,
        runs,
        queries,
    })
}

/// Generators must hit `f(e)` and the descriptor's order must equal `|G| / #labels`.
pub fn validate<F: HidingFunction + ?Sized>(oracle: &F, desc: &SubgroupDescriptor) -> Result<()> {
    let params = oracle.params();
    desc.validate(params)?;
    let e = oracle.evaluate(GroupElement::IDENTITY);
    for g in desc.generators(params) {
        if oracle.evaluate(g) != e {
            return Err(Error::Validation(format!(
                "generator {g} of {desc} is not hidden"
            )));
        }
    }
    let all: Vec<_> = params.elements().collect();
    let mut labels = oracle.superposition_query(&all);
    labels.sort();
    labels.dedup();
    let implied = params.order() / labels.len() as u64;
    if implied != desc.order(params) {
        return Err(Error::Validation(format!(
            "{desc} has order {} but the oracle separates {} cosets (|H| = {implied})",
            desc.order(params),
            labels.len()
        )));
    }
    Ok(())
}
