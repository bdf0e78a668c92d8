mod stats;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use hsp_core::checks;
use hsp_core::classical::solve_promised;
use hsp_core::quantum::{
    fidelity_with_perfect, per_run_success_probability, recover_a_once, repetition_count,
    solve_hsp, Preparation, SolveOptions,
};
use hsp_core::subgroups::{enumerate_subgroups, DEFAULT_BRUTE_FORCE_CAP};
use hsp_core::{
    build_oracle, make_params, Error, GroupParams, HidingFunction, SubgroupDescriptor, TrialRng,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::stats::Summary;

/// Reports with more trials than this carry summary statistics only.
const MAX_LISTED_RUNS: u64 = 100;
const FIDELITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Params,
    Subgroups,
    Verify,
    Solve,
    Collide,
    Fidelity,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Hidden subgroup experiments over Z_{p^r} x| Z_{q^s}.
#[derive(Debug, Parser, Serialize)]
#[command(name = "hsp", version)]
struct Config {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long, default_value_t = 1)]
    s: u32,
    #[arg(long, default_value_t = 1)]
    t: u32,
    #[arg(long, default_value_t = 1)]
    l: u64,
    /// `cyclic:i,j` or `twogen:i,a,j`
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, env = "HSP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Prepare coset states with a superposition oracle query instead of sampling them.
    #[arg(long)]
    full_state: bool,
    /// Emit `timing_ms: null` so reports are byte-identical across runs.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Serialize)]
struct Failure {
    kind: &'static str,
    message: String,
    #[serde(skip)]
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) => 2,
            Error::Exhausted { .. }
            | Error::NoCollision { .. }
            | Error::CollisionRetriesExhausted { .. } => 3,
            _ => 1,
        };
        Failure {
            kind: e.kind(),
            message: e.to_string(),
            code,
        }
    }
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "Usage",
            message: message.into(),
            code: 1,
        }
    }
}

/// Mode output: a JSON results object, optional CSV, and the exit code it implies.
struct Outcome {
    results: Value,
    csv: Option<String>,
    code: u8,
}

fn main() -> ExitCode {
    let config = match Config::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{e}");
            let failure = Failure::usage(e.kind().to_string());
            println!(
                "{}",
                json!({ "config": null, "error": failure, "version": env!("CARGO_PKG_VERSION") })
            );
            return ExitCode::from(1);
        }
    };

    let start = Instant::now();
    let outcome = run(&config);
    let timing_ms = (!config.no_timing).then(|| start.elapsed().as_secs_f64() * 1e3);

    match outcome {
        Ok(out) => {
            match (config.format, out.csv) {
                (Format::Csv, Some(csv)) => print!("{csv}"),
                _ => {
                    let report = json!({
                        "config": config,
                        "results": out.results,
                        "timing_ms": timing_ms,
                        "version": env!("CARGO_PKG_VERSION"),
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("report serializes")
                    );
                }
            }
            ExitCode::from(out.code)
        }
        Err(failure) => {
            eprintln!("hsp: {}", failure.message);
            let report = json!({
                "config": config,
                "error": failure,
                "timing_ms": timing_ms,
                "version": env!("CARGO_PKG_VERSION"),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            ExitCode::from(failure.code)
        }
    }
}

fn run(config: &Config) -> Result<Outcome, Failure> {
    let params = make_params(config.p, config.q, config.r, config.s, config.t, config.l)?;
    let trial_mode = matches!(
        config.mode,
        Mode::Solve | Mode::Collide | Mode::Fidelity | Mode::Bench
    );
    if config.format == Format::Csv && !trial_mode {
        return Err(Failure::usage(
            "csv output is only available for solve, collide, fidelity and bench",
        ));
    }
    match config.mode {
        Mode::Params => Ok(params_report(&params)),
        Mode::Subgroups => Ok(subgroups_report(&params)),
        Mode::Verify => verify_report(&params),
        Mode::Solve => trial_report(config, &params, solve_trial),
        Mode::Collide => trial_report(config, &params, collide_trial),
        Mode::Fidelity => trial_report(config, &params, fidelity_trial),
        Mode::Bench => trial_report(config, &params, bench_trial),
    }
}

fn params_report(params: &GroupParams) -> Outcome {
    let mut results = json!({
        "valid": true,
        "p": params.p(),
        "q": params.q(),
        "r": params.r(),
        "s": params.s(),
        "t": params.t(),
        "l": params.l(),
        "primitive_root": params.u(),
        "alpha": params.alpha(),
        "alpha_order": params.qt(),
        "p_r": params.pr(),
        "q_s": params.qs(),
        "order": params.order(),
    });
    if params.t() == 1 {
        results["repetition_count"] = json!(repetition_count(params));
        results["per_run_success"] = json!(per_run_success_probability(params));
    }
    Outcome {
        results,
        csv: None,
        code: 0,
    }
}

fn subgroups_report(params: &GroupParams) -> Outcome {
    let all = enumerate_subgroups(params);
    let cyclic = all
        .iter()
        .filter(|d| matches!(d, SubgroupDescriptor::Cyclic { .. }))
        .count();
    let subgroups: Vec<Value> = all
        .iter()
        .map(|d| json!({ "descriptor": d.to_string(), "order": d.order(params) }))
        .collect();
    let results = json!({
        "count": all.len(),
        "cyclic_class": cyclic,
        "two_generator_class": all.len() - cyclic,
        "subgroups": subgroups,
    });
    Outcome {
        results,
        csv: None,
        code: 0,
    }
}

fn verify_report(params: &GroupParams) -> Result<Outcome, Failure> {
    let outcomes = checks::run_all(params, DEFAULT_BRUTE_FORCE_CAP)?;
    let passed = outcomes.iter().all(|o| o.passed);
    for o in &outcomes {
        eprintln!(
            "{} {}: {} checked, {} violations",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.checked,
            o.violations
        );
    }
    Ok(Outcome {
        results: json!({ "passed": passed, "suites": outcomes }),
        csv: None,
        code: if passed { 0 } else { 2 },
    })
}

/// One trial's contribution to a report.
struct TrialResult {
    success: bool,
    queries: u64,
    detail: Value,
    error: Option<Failure>,
}

impl TrialResult {
    fn failed(e: Error) -> Self {
        TrialResult {
            success: false,
            queries: 0,
            detail: Value::Null,
            error: Some(e.into()),
        }
    }
}

type TrialFn = fn(&GroupParams, &SubgroupDescriptor, bool, TrialRng) -> TrialResult;

fn parse_hidden(config: &Config, params: &GroupParams) -> Result<SubgroupDescriptor, Failure> {
    let text = config
        .hidden
        .as_deref()
        .ok_or_else(|| Failure::usage("--hidden is required for this mode"))?;
    let hidden: SubgroupDescriptor = text.parse()?;
    hidden.validate(params)?;
    Ok(hidden)
}

/// Planted `a` for modes that need `H = <x^a y>` with `t = 1`.
fn phase_target(
    config: &Config,
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
) -> Result<(), Failure> {
    if config.mode != Mode::Fidelity && config.mode != Mode::Bench {
        return Ok(());
    }
    match hidden {
        SubgroupDescriptor::TwoGen { i, j: 0, .. } if *i == params.r() && params.t() == 1 => Ok(()),
        _ => Err(Error::InvalidHidden(format!(
            "{:?} mode needs t = 1 and a hidden subgroup twogen:{},a,0",
            config.mode,
            params.r()
        ))
        .into()),
    }
}

fn trial_report(config: &Config, params: &GroupParams, trial: TrialFn) -> Result<Outcome, Failure> {
    let hidden = parse_hidden(config, params)?;
    phase_target(config, params, &hidden)?;

    let results: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            trial(
                params,
                &hidden,
                config.full_state,
                TrialRng::new(config.seed, k),
            )
        })
        .collect();

    let successes = results.iter().filter(|r| r.success).count() as u64;
    let errors = results.iter().filter(|r| r.error.is_some()).count() as u64;
    let queries: Vec<u64> = results.iter().map(|r| r.queries).collect();
    let summary = Summary::new(successes, errors, &queries);

    let mut body = json!({ "hidden": hidden.to_string(), "summary": &summary });
    match config.mode {
        Mode::Fidelity => {
            body["expected_fidelity"] = json!((params.q() as f64 / params.pr() as f64).sqrt());
            body["tolerance"] = json!(FIDELITY_TOLERANCE);
        }
        Mode::Bench => {
            let units = results
                .iter()
                .filter(|r| r.detail["k0_is_unit"] == json!(true))
                .count();
            body["per_run_success"] = json!(summary.success_rate);
            body["expected_per_run_success"] = json!(per_run_success_probability(params));
            body["k0_unit_rate"] = json!(units as f64 / config.trials as f64);
            body["expected_k0_unit_rate"] = json!(1.0 - 1.0 / params.p() as f64);
        }
        _ => {}
    }
    if config.trials <= MAX_LISTED_RUNS {
        let runs: Vec<Value> = results
            .iter()
            .enumerate()
            .map(|(k, r)| {
                json!({
                    "trial": k,
                    "success": r.success,
                    "queries": r.queries,
                    "detail": r.detail,
                    "error": r.error,
                })
            })
            .collect();
        body["runs"] = json!(runs);
    }

    // the first failing trial sets the exit code; a wrong answer that slipped through counts as code 2
    let code = results
        .iter()
        .find_map(|r| match &r.error {
            Some(f) => Some(f.code),
            None if !r.success && config.mode != Mode::Bench => Some(2),
            None => None,
        })
        .unwrap_or(0);

    let csv = format!(
        "p,q,r,s,t,hidden,trials,seed,success_rate,ci_low,ci_high,mean_queries\n{},{},{},{},{},\"{}\",{},{},{},{},{},{}\n",
        params.p(),
        params.q(),
        params.r(),
        params.s(),
        params.t(),
        hidden,
        config.trials,
        config.seed,
        summary.success_rate,
        summary.ci_low,
        summary.ci_high,
        summary.mean_queries,
    );
    Ok(Outcome {
        results: body,
        csv: Some(csv),
        code,
    })
}

fn solve_trial(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
    _full: bool,
    mut rng: TrialRng,
) -> TrialResult {
    let oracle = match build_oracle(params, *hidden) {
        Ok(o) => o,
        Err(e) => return TrialResult::failed(e),
    };
    match solve_hsp(&oracle, &SolveOptions::default(), &mut rng) {
        Ok(report) => TrialResult {
            success: report.descriptor == *hidden,
            queries: report.queries,
            detail: json!({ "recovered": report.descriptor.to_string(), "report": report }),
            error: None,
        },
        Err(e) => TrialResult::failed(e),
    }
}

fn collide_trial(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
    _full: bool,
    mut rng: TrialRng,
) -> TrialResult {
    let j = match hidden {
        SubgroupDescriptor::TwoGen { i, j, .. } if *i == params.r() => *j,
        _ => {
            return TrialResult::failed(Error::InvalidHidden(format!(
                "the collision solver needs a hidden subgroup twogen:{},a,j",
                params.r()
            )))
        }
    };
    let oracle = match build_oracle(params, *hidden) {
        Ok(o) => o,
        Err(e) => return TrialResult::failed(e),
    };
    match solve_promised(&oracle, j, &mut rng) {
        Ok(report) => TrialResult {
            success: report.descriptor == *hidden,
            queries: report.queries,
            detail: json!({ "recovered": report.descriptor.to_string(), "report": report }),
            error: None,
        },
        Err(e) => TrialResult::failed(e),
    }
}

fn preparation(hidden: &SubgroupDescriptor, full: bool) -> Preparation {
    match (hidden, full) {
        (_, true) => Preparation::Full,
        (SubgroupDescriptor::TwoGen { a, .. }, false) => Preparation::Sampled { a: *a },
        _ => unreachable!("checked by phase_target"),
    }
}

fn fidelity_trial(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
    full: bool,
    mut rng: TrialRng,
) -> TrialResult {
    let SubgroupDescriptor::TwoGen { a, .. } = *hidden else {
        unreachable!("checked by phase_target")
    };
    let oracle = match build_oracle(params, *hidden) {
        Ok(o) => o,
        Err(e) => return TrialResult::failed(e),
    };
    match recover_a_once(&oracle, preparation(hidden, full), &mut rng) {
        Ok(run) => {
            let expected = (params.q() as f64 / params.pr() as f64).sqrt();
            let fidelity = run.psi5.as_ref().map(|s| fidelity_with_perfect(s, a));
            TrialResult {
                // non-unit k0 never reaches U and so does not count against the formula
                success: fidelity.is_none_or(|f| (f - expected).abs() <= FIDELITY_TOLERANCE),
                queries: oracle.queries(),
                detail: json!({
                    "k0": run.transcript.k0,
                    "k0_is_unit": run.transcript.k0_is_unit,
                    "fidelity": fidelity,
                }),
                error: None,
            }
        }
        Err(e) => TrialResult::failed(e),
    }
}

fn bench_trial(
    params: &GroupParams,
    hidden: &SubgroupDescriptor,
    full: bool,
    mut rng: TrialRng,
) -> TrialResult {
    let oracle = match build_oracle(params, *hidden) {
        Ok(o) => o,
        Err(e) => return TrialResult::failed(e),
    };
    match recover_a_once(&oracle, preparation(hidden, full), &mut rng) {
        Ok(run) => TrialResult {
            success: run.transcript.verified,
            queries: oracle.queries(),
            detail: serde_json::to_value(&run.transcript).expect("transcript serializes"),
            error: None,
        },
        Err(e) => TrialResult::failed(e),
    }
}
