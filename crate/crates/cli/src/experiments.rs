//! `gen` and `exp`: generated instances and experiment CSVs.

use std::fmt::Write as _;

use serde_json::json;
use staggerlab::generate::{random_coprime, random_instance, random_nested};
use staggerlab::hardness::{
    gen_groupsync, gen_sample_complexity, random_probe, random_shifts, sample_levels, subset_gap_probe,
};
use staggerlab::io::instance_to_json;
use staggerlab::ratio::{self, format as exact};
use staggerlab::{Mode, RngStream, ShiftVector, SolverConfig};

use crate::{write_output, CliError, CliResult, ExpArgs, Experiment, Family, GenArgs, ModeArg};

fn mode_of(arg: ModeArg) -> Mode {
    match arg {
        ModeArg::Discrete => Mode::Discrete,
        ModeArg::Continuous => Mode::Continuous,
    }
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let config = SolverConfig {
        sieve_budget: args.budget_sieve,
        ..SolverConfig::default()
    };
    let mode = mode_of(args.mode);
    let mut rng = RngStream::new(args.seed);
    let text = match args.family {
        Family::SampleComplexity => instance_to_json(&gen_sample_complexity(args.n, &config)?),
        Family::Random => instance_to_json(&random_instance(args.n, args.max_interval, args.max_quantity, mode, &mut rng)?),
        Family::Nested => instance_to_json(&random_nested(args.n, args.base, args.levels, args.max_quantity, mode, &mut rng)?),
        Family::Coprime => instance_to_json(&random_coprime(args.n, args.max_interval, args.max_quantity, mode, &mut rng)?),
        Family::Groupsync => {
            let g = gen_groupsync(args.q, args.count, &config)?;
            let file = json!({
                "family": "groupsync",
                "q": g.q(),
                "ground": g.ground(),
                "primes": g.primes(),
                "required_size": g.required_size(),
                "subsets": g.family().subsets(),
                "intervals": (0..g.len()).map(|i| g.interval(i).to_string()).collect::<Vec<_>>(),
                "unmet_preconditions": g.unmet_preconditions(),
                "implied_eps": g.implied_eps(),
            });
            serde_json::to_string(&file).expect("plain data serializes")
        }
    };
    write_output(&args.output, &(text + "\n"))
}

pub fn cmd_exp(args: &ExpArgs) -> CliResult<()> {
    let config = SolverConfig {
        jobs: args.jobs,
        ..SolverConfig::default()
    };
    let (csv, summary) = match args.name {
        Experiment::Sampling => sampling(args, &config)?,
        Experiment::GroupsyncGap => groupsync_gap(args, &config)?,
    };
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match &args.output {
        Some(_) => {
            write_output(&args.output, &csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

/// Levels at uniform times with all shifts zero, against the threshold `(1/2 + ε) n`.
fn sampling(args: &ExpArgs, config: &SolverConfig) -> CliResult<(String, serde_json::Value)> {
    let eps = ratio::parse(&args.eps)?;
    ratio::check_eps(&eps, false)?;
    if args.seeds == 0 {
        return Err(CliError::Input("at least one seed is required".into()));
    }
    let instance = gen_sample_complexity(args.n, config)?;
    let zeros = ShiftVector::zeros(&instance);
    let threshold = (ratio::frac(1, 2) + &eps) * ratio::int(args.n as u64);
    let mut csv = String::from("seed,sample,level,exceeds\n");
    let mut exceed = 0u64;
    let mut best = 0.0f64;
    for seed in args.seed..args.seed + args.seeds {
        let levels = sample_levels(&instance, &zeros, args.m, &RngStream::new(seed), config)?;
        for j in 0..levels.len() {
            let over = levels.at_least(j, &threshold);
            exceed += u64::from(over);
            best = best.max(levels.approx(j));
            writeln!(csv, "{seed},{j},{:.6},{}", levels.approx(j), u8::from(over)).expect("string write");
        }
    }
    let samples = args.m * args.seeds;
    let e = ratio::approx(&eps);
    let per_sample = (-e * e * args.n as f64 / 6.0).exp();
    let summary = json!({
        "experiment": "sampling",
        "n": args.n,
        "eps": exact(&eps),
        "samples_per_seed": args.m,
        "seeds": args.seeds,
        "threshold": exact(&threshold),
        "exceed": exceed,
        "exceed_fraction": exact(&ratio::frac(exceed, samples.max(1))),
        "tail_bound_per_sample": per_sample,
        "union_bound_per_seed": per_sample * args.m as f64,
        "max_level_approx": best,
    });
    Ok((csv, summary))
}

/// Random probes of the groupsync instance under random shifts.
fn groupsync_gap(args: &ExpArgs, config: &SolverConfig) -> CliResult<(String, serde_json::Value)> {
    let g = gen_groupsync(args.q, Some(args.count), config)?;
    let root = RngStream::new(args.seed);
    let shifts = random_shifts(&g, &root.substream(0));
    let mut pick = root.substream(1);
    let mut csv = String::from("probe,items,level,bound,level_approx,holds\n");
    let mut violations = 0u64;
    let mut worst = f64::INFINITY;
    for p in 0..args.probes {
        let items = random_probe(&g, args.probe_size, &mut pick)?;
        let r = subset_gap_probe(&g, &items, &shifts)?;
        let holds = r.level >= r.bound;
        violations += u64::from(!holds);
        let fraction = ratio::approx(&r.level) / items.len() as f64;
        worst = worst.min(fraction);
        let ids: Vec<String> = items.iter().map(|i| i.to_string()).collect();
        writeln!(
            csv,
            "{p},{},{},{},{:.6},{}",
            ids.join(";"),
            exact(&r.level),
            exact(&r.bound),
            ratio::approx(&r.level),
            u8::from(holds)
        )
        .expect("string write");
    }
    let summary = json!({
        "experiment": "groupsync-gap",
        "q": g.q(),
        "family_size": g.len(),
        "required_size": g.required_size(),
        "unmet_preconditions": g.unmet_preconditions(),
        "implied_eps": g.implied_eps(),
        "probes": args.probes,
        "probe_size": args.probe_size,
        "violations": violations,
        "min_level_per_item": if args.probes == 0 { None } else { Some(worst) },
    });
    Ok((csv, summary))
}
