//! `solve`, `peak` and `bound`: JSON reports with exact rational strings.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use staggerlab::arith::pairwise_coprime;
use staggerlab::coprime::{coprime_lower_bound, coprime_solve, Psi};
use staggerlab::interval_ptas::interval_ptas_solve;
use staggerlab::io::{parse_instance, parse_shifts};
use staggerlab::lp_rounding::{lp_rounding_solve, LpRoundingOptions, LpStatus};
use staggerlab::nested::nested_solve;
use staggerlab::ratio::{self, format as exact};
use staggerlab::{
    average_space_bound, brute_optimum, cycle_length, peak_auto, peak_events, peak_ip, peak_scan, Instance, Level, Mode,
    PeakResult, ShiftVector,
};

use crate::{read_file, write_output, Algorithm, BoundArgs, CliResult, EngineArg, PeakArgs, SolveArgs};

#[derive(Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Outcome of one `solve` run. Everything except `timing` is deterministic.
#[derive(Serialize)]
pub struct RunReport {
    pub algorithm: &'static str,
    pub mode: Mode,
    pub eps: String,
    pub seed: u64,
    pub peak: String,
    pub argmax: String,
    pub engine: &'static str,
    pub shifts: Vec<String>,
    pub lower_bounds: BTreeMap<&'static str, String>,
    pub best_lower_bound: String,
    /// `peak / best_lower_bound`, exact.
    pub ratio: String,
    pub ratio_approx: f64,
    pub flags: Vec<&'static str>,
    pub details: Value,
    pub timing: Timing,
}

fn load_instance(path: &std::path::PathBuf) -> CliResult<Instance> {
    Ok(parse_instance(&read_file(path)?)?)
}

/// Lower bounds valid for every shift vector of the instance.
fn lower_bounds(instance: &Instance) -> BTreeMap<&'static str, Level> {
    let mut out = BTreeMap::new();
    out.insert("average_space", average_space_bound(instance));
    if instance.mode() == Mode::Continuous && pairwise_coprime(&instance.intervals()).is_ok() {
        out.insert("coprime_witness", coprime_lower_bound(instance));
    }
    out
}

fn psi_text(psi: &[Psi]) -> Vec<String> {
    psi.iter().map(|p| p.to_string()).collect()
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let instance = load_instance(&args.input)?;
    let eps = ratio::parse(&args.eps)?;
    let config = args.budgets.config();
    let started = Instant::now();
    let mut flags = Vec::new();
    let mut bounds = lower_bounds(&instance);

    let (name, shifts, peak, details): (&'static str, ShiftVector, PeakResult, Value) = match args.alg {
        Algorithm::Brute => {
            let opt = brute_optimum(&instance, &config)?;
            if opt.exact {
                bounds.insert("optimum", opt.value.clone());
            } else {
                flags.push("heuristic-grid");
            }
            let peak = PeakResult {
                value: opt.value.clone(),
                argmax_time: opt.argmax_time.clone(),
                engine: staggerlab::Engine::Exhaustive,
            };
            (
                "brute",
                opt.shifts,
                peak,
                json!({ "exact": opt.exact, "vectors": opt.vectors }),
            )
        }
        Algorithm::LpRounding => {
            let options = LpRoundingOptions {
                seed: args.seed,
                repeats: args.repeats,
                heavy_limit: args.heavy_limit,
            };
            let out = lp_rounding_solve(&instance, &eps, &options, &config)?;
            if out.heavy.capped {
                flags.push("heuristic-heavy-cap");
            }
            if out.heavy.limited {
                flags.push("heavy-limit");
            }
            let log: Vec<Value> = out
                .log
                .iter()
                .map(|g| {
                    json!({
                        "opt_estimate": exact(&out.grid[g.opt_index]),
                        "heavy_shifts": g.heavy_shifts,
                        "lp": match g.status { LpStatus::Feasible => "feasible", LpStatus::Infeasible => "infeasible" },
                    })
                })
                .collect();
            let details = json!({
                "heavy_items": out.heavy.items,
                "delta": out.heavy.delta,
                "opt_estimates": out.grid.len(),
                "heavy_assignments": out.heavy_assignments,
                "lp_feasible": out.lp_feasible,
                "lp_infeasible": out.lp_infeasible,
                "candidates": out.candidates,
                "repeats": args.repeats,
                "guesses": log,
            });
            ("lp-rounding", out.shifts, out.peak, details)
        }
        Algorithm::Interval => {
            let out = interval_ptas_solve(&instance, &eps, &config)?;
            let details = json!({
                "classes": out.classes,
                "guesses": out.guesses.to_string(),
                "rejected": out.rejected.to_string(),
                "evaluated": out.evaluated,
                "super_items": out.super_items,
                "partition": out.partition.groups(),
            });
            ("interval", out.shifts, out.peak, details)
        }
        Algorithm::Nested => {
            let out = nested_solve(&instance, &eps, &config)?;
            let details = json!({
                "effective_eps": exact(&out.effective_eps),
                "blocks": out.partition.blocks(),
                "residual": out.partition.residual(),
                "offset": out.partition.xi(),
                "block_peaks": out.block_peaks.iter().map(exact).collect::<Vec<_>>(),
                "residual_quantity": out.residual_quantity.to_string(),
                "scale": out.scale,
            });
            ("nested", out.shifts, out.peak, details)
        }
        Algorithm::Coprime => {
            let out = coprime_solve(&instance, &eps, &config)?;
            let d = &out.decomposition;
            if d.psi().iter().any(|p| matches!(p, Psi::Beyond)) {
                flags.push("saturation");
            }
            let details = json!({
                "effective_eps": exact(&d.effective_eps()),
                "psi": psi_text(d.psi()),
                "light_bin": d.m_hat(),
                "bins": d.bins(),
                "lower": d.lower(),
                "middle": d.middle(),
                "upper": d.upper(),
                "witness_time": out.witness.t.to_string(),
                "witness_level": exact(&out.witness.level),
            });
            ("coprime", out.shifts, out.peak, details)
        }
    };

    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let best = bounds.values().max().cloned().expect("average-space bound is always present");
    let ratio_value = &peak.value / &best;
    let report = RunReport {
        algorithm: name,
        mode: instance.mode(),
        eps: exact(&eps),
        seed: args.seed,
        peak: exact(&peak.value),
        argmax: exact(&peak.argmax_time),
        engine: peak.engine.name(),
        shifts: shifts.as_slice().iter().map(exact).collect(),
        lower_bounds: bounds.iter().map(|(k, v)| (*k, exact(v))).collect(),
        best_lower_bound: exact(&best),
        ratio: exact(&ratio_value),
        ratio_approx: ratio::approx(&ratio_value),
        flags,
        details,
        timing: Timing { elapsed_ms },
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_output(&args.output, &text)
}

pub fn cmd_peak(args: &PeakArgs) -> CliResult<()> {
    let instance = load_instance(&args.input)?;
    let shifts = parse_shifts(&instance, &read_file(&args.shifts)?)?;
    let config = args.budgets.config();
    let started = Instant::now();
    let result = match args.engine {
        EngineArg::Scan => peak_scan(&instance, &shifts, &config)?,
        EngineArg::Events => peak_events(&instance, &shifts, &config)?,
        EngineArg::Ip => peak_ip(&instance, &shifts, &config)?,
        EngineArg::Auto => peak_auto(&instance, &shifts, &config)?,
    };
    let report = json!({
        "engine": result.engine.name(),
        "value": exact(&result.value),
        "argmax": exact(&result.argmax_time),
        "timing": Timing { elapsed_ms: started.elapsed().as_secs_f64() * 1e3 },
    });
    write_output(&args.output, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
}

pub fn cmd_bound(args: &BoundArgs) -> CliResult<()> {
    let instance = load_instance(&args.input)?;
    let bounds = lower_bounds(&instance);
    let best = bounds.values().max().cloned().expect("average-space bound is always present");
    let report = json!({
        "mode": instance.mode(),
        "items": instance.len(),
        "total_quantity": instance.total_quantity().to_string(),
        "cycle_length": cycle_length(&instance).to_string(),
        "lower_bounds": bounds.iter().map(|(k, v)| (*k, exact(v))).collect::<BTreeMap<_, _>>(),
        "best_lower_bound": exact(&best),
    });
    write_output(&args.output, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
}
