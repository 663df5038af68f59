use std::fs::File;
use std::io::{BufWriter, Write};

use serde::Serialize;
use serde_json::{json, Value};

use percmap::asp::{
    three_segment_limit, verify_mixed_identity, verify_race_identity, verify_ratio_law, verify_symmetry,
    verify_walk_scaling, AdaptedRates, AspMethod, AspSamplerConfig,
};
use percmap::boltzmann::{
    crossing_prob_direct, crossing_prob_reweighted, jump_rate_asymptotics_check, scaled_reweighted_limit,
    w_distribution, PolygonConfig,
};
use percmap::combinatorics::{render_rational, tail_mass, EnumerationTable};
use percmap::estimate::{run_tasks, EstimateWithCI};
use percmap::peeling::{
    run_mixed_growth, run_three_segment, run_two_segment_traced, CrossingOutcome, CrossingResult, PeelConfig,
    ThreeSegmentVariant, TwoSegmentMode, TwoSegmentSimulator, TraceRecord,
};
use percmap::rng::seeded;
use percmap::verify::{run_criterion, verify_all, AcceptanceReport, Profile};
use percmap::walk::{crossing_probability, StepDistribution};

use crate::args::*;
use crate::{render, CliError, CliResult, ExperimentSpec, Format, Payload, RunOutput};

/// Builds the experiment spec of a parsed invocation.
pub fn spec_of(cli: &Cli) -> ExperimentSpec {
    fn p<T: Serialize>(x: &T) -> Value {
        serde_json::to_value(x).expect("serializable")
    }
    let (parameters, samples, format) = match &cli.command {
        Command::Tables(a) => (p(a), None, Format::Csv),
        Command::Crossing2(a) => (p(a), Some(a.samples), Format::Json),
        Command::Crossing3(a) => (p(a), Some(a.samples), Format::Json),
        Command::Mixed(a) => (p(a), Some(a.samples), Format::Json),
        Command::AspVerify(a) => (p(a), Some(a.samples), Format::Json),
        Command::Boltzmann(a) => (p(a), Some(a.samples), Format::Json),
        Command::Scaling(a) => (p(a), a.samples, Format::Json),
        Command::WDist(a) => (p(a), Some(a.samples), Format::Csv),
        Command::RatesCheck(a) => (p(a), None, Format::Json),
        Command::VerifyAll(a) => (p(a), None, Format::Json),
    };
    ExperimentSpec {
        command: cli.command.name().into(),
        parameters,
        seed: cli.seed,
        samples,
        output: cli.out.clone(),
        format,
    }
}

/// Runs the command and renders its artifact.
pub fn run(cli: &Cli) -> CliResult<RunOutput> {
    let spec = spec_of(cli);
    let seed = cli.seed;
    let mut acceptance_failed = false;
    let payload = match &cli.command {
        Command::Tables(a) => tables(a)?,
        Command::Crossing2(a) => crossing2(a, seed)?,
        Command::Crossing3(a) => crossing3(a, seed)?,
        Command::Mixed(a) => mixed(a, seed)?,
        Command::AspVerify(a) => asp_verify(a, seed)?,
        Command::Boltzmann(a) => boltzmann(a, seed)?,
        Command::Scaling(a) => scaling(a, seed)?,
        Command::WDist(a) => wdist(a, seed)?,
        Command::RatesCheck(a) => rates(a)?,
        Command::VerifyAll(a) => {
            let report = acceptance(a, seed)?;
            acceptance_failed = !report.pass;
            Payload::Json(serde_json::to_value(&report).expect("serializable"))
        }
    };
    Ok(RunOutput { text: render(&spec, payload), acceptance_failed })
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn tables(a: &TablesArgs) -> CliResult<Payload> {
    let table = EnumerationTable::new(a.max_k.max(2));
    let (header, rows) = if a.z {
        let rows = (2..=a.max_k).map(|m| Ok(format!("{m},{}", render_rational(&table.z(m)?)))).collect::<CliResult<_>>()?;
        ("m,z_m", rows)
    } else if a.tail {
        let rows = (0..=a.max_k).map(|k| format!("{k},{}", render_rational(&tail_mass(k)))).collect();
        ("k,tail_mass", rows)
    } else {
        let rows = (1..=a.max_k).map(|k| Ok(format!("{k},{}", render_rational(&table.p(k)?)))).collect::<CliResult<_>>()?;
        ("k,p_k", rows)
    };
    Ok(Payload::Csv { header: header.into(), rows, notes: vec![] })
}

#[derive(Default)]
struct Tally {
    black: u64,
    white: u64,
    undetermined: u64,
}

impl Tally {
    fn add(&mut self, o: &CrossingOutcome) {
        match o.result {
            CrossingResult::BlackCrossing => self.black += 1,
            CrossingResult::WhiteCrossing => self.white += 1,
            CrossingResult::Undetermined => self.undetermined += 1,
        }
    }

    fn merge(parts: Vec<CliResult<Tally>>) -> CliResult<Tally> {
        let mut t = Tally::default();
        for p in parts {
            let p = p?;
            t.black += p.black;
            t.white += p.white;
            t.undetermined += p.undetermined;
        }
        Ok(t)
    }

    fn estimate(&self, seed: u64) -> EstimateWithCI {
        EstimateWithCI::proportion(self.black, self.black + self.white, seed)
    }

    fn json(&self, seed: u64) -> Value {
        let e = self.estimate(seed);
        json!({
            "estimate": e.value,
            "stderr": e.stderr,
            "black": self.black,
            "white": self.white,
            "undetermined": self.undetermined,
        })
    }
}

fn tally<F>(samples: u64, seed: u64, run: F) -> CliResult<Tally>
where
    F: Fn(&mut percmap::rng::SimRng) -> percmap::Result<CrossingOutcome> + Sync,
{
    if samples == 0 {
        return usage("samples must be >= 1");
    }
    Tally::merge(run_tasks(samples, seed, |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            t.add(&run(rng)?);
        }
        Ok(t)
    }))
}

fn crossing2(a: &Crossing2Args, seed: u64) -> CliResult<Payload> {
    let dist = StepDistribution::default();
    let mode = match a.mode {
        Mode::Primary => TwoSegmentMode::Primary,
        Mode::Dual => TwoSegmentMode::Dual,
    };
    let config = PeelConfig {
        completion_height: (a.completion_height > 0).then_some(a.completion_height),
        ..PeelConfig::default()
    };
    let sim = TwoSegmentSimulator::new(a.a, a.b, mode, config)?;
    let t = tally(a.samples, seed, |rng| sim.run(&dist, rng))?;
    let exact = crossing_probability(a.a, a.b)?;
    let e = t.estimate(seed);
    if let Some(path) = &a.trace {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", TraceRecord::HEADER)?;
        let mut io = Ok(());
        run_two_segment_traced(a.a, a.b, mode, &config, &dist, &mut seeded(seed), |r| {
            if io.is_ok() {
                io = writeln!(w, "{r}");
            }
        })?;
        io?;
        w.flush()?;
    }
    let mut result = t.json(seed);
    result["exact"] = json!(exact);
    result["z"] = json!(e.z_score(exact));
    Ok(Payload::Json(result))
}

fn crossing3(a: &Crossing3Args, seed: u64) -> CliResult<Payload> {
    let dist = StepDistribution::default();
    let config = PeelConfig::default();
    let variants: &[(ThreeSegmentVariant, &str)] = match a.variant {
        Variant::Left => &[(ThreeSegmentVariant::LeftCorner, "left")],
        Variant::Right => &[(ThreeSegmentVariant::RightCorner, "right")],
        Variant::Both => &[(ThreeSegmentVariant::LeftCorner, "left"), (ThreeSegmentVariant::RightCorner, "right")],
    };
    let mut result = serde_json::Map::new();
    let mut estimates = Vec::new();
    for (i, &(v, name)) in variants.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let t = tally(a.samples, s, |rng| run_three_segment(a.a, a.b, a.c, v, &config, &dist, rng))?;
        estimates.push(t.estimate(s));
        result.insert(name.into(), t.json(s));
    }
    if let [x, y] = estimates[..] {
        result.insert("z".into(), json!(x.z_score_against(&y)));
    }
    Ok(Payload::Json(Value::Object(result)))
}

fn mixed(a: &MixedArgs, seed: u64) -> CliResult<Payload> {
    let dist = StepDistribution::default();
    let config = PeelConfig::default();
    let t = tally(a.samples, seed, |rng| run_mixed_growth(a.a, a.b, a.rate_ratio, &config, &dist, rng))?;
    let exact = crossing_probability(a.a, a.b)?;
    let mut result = t.json(seed);
    result["exact"] = json!(exact);
    result["z"] = json!(t.estimate(seed).z_score(exact));
    Ok(Payload::Json(result))
}

fn asp_config(a: &AspVerifyArgs) -> AspSamplerConfig {
    let overshoot_only = matches!(a.identity, Identity::Symmetry);
    let method = match a.method {
        Method::Auto if overshoot_only => AspMethod::ExactLanding,
        Method::Auto | Method::Walk => AspMethod::WalkEmbedding,
        Method::ExactLanding => AspMethod::ExactLanding,
        Method::Euler => AspMethod::StableEuler { step: a.step },
    };
    let default_scale = if method == AspMethod::ExactLanding { 10_000 } else { 64 };
    AspSamplerConfig { lattice_scale: a.lambda.unwrap_or(default_scale), method, ..AspSamplerConfig::default() }
}

fn asp_verify(a: &AspVerifyArgs, seed: u64) -> CliResult<Payload> {
    let cfg = asp_config(a);
    let rates = match a.preset {
        Preset::Equal => AdaptedRates::equal(),
        Preset::TimeAndGap => AdaptedRates::time_and_gap(),
    };
    let result = match a.identity {
        Identity::Symmetry => {
            let (reports, pass) = verify_symmetry(a.a, a.b, a.samples, &cfg, seed, a.tolerance)?;
            json!({ "closed_form": reports[0].closed_form, "reports": reports, "pass": pass })
        }
        Identity::Ratio => {
            let reports = verify_ratio_law(&a.t, a.samples, &cfg, seed, a.tolerance)?;
            let pass = reports.iter().all(|r| r.pass);
            json!({ "reports": reports, "pass": pass })
        }
        Identity::Race => {
            let r = verify_race_identity(a.a, a.b, a.samples, &cfg, seed, a.tolerance)?;
            json!({ "closed_form": r.closed_form, "reports": [r], "pass": r.pass })
        }
        Identity::Mixed => {
            let r = verify_mixed_identity(a.a, a.b, &rates, a.samples, &cfg, seed, a.tolerance)?;
            json!({ "closed_form": r.closed_form, "reports": [r], "pass": r.pass })
        }
        Identity::ThreeSegment => {
            let e = three_segment_limit(a.a, a.b, a.c, a.samples, &cfg, seed)?;
            json!({ "estimate": e.value, "stderr": e.stderr, "samples": e.samples })
        }
    };
    Ok(Payload::Json(result))
}

fn boltzmann(a: &BoltzmannArgs, seed: u64) -> CliResult<Payload> {
    let cfg = PolygonConfig::new(a.a, a.b, a.c, a.d)?;
    let mut records = Vec::new();
    let mut estimates = Vec::new();
    if matches!(a.estimator, Estimator::Direct | Estimator::Both) {
        let d = crossing_prob_direct(&cfg, a.samples, seed)?;
        estimates.push(d.estimate);
        records.push(json!({
            "config": cfg, "estimator": "direct", "value": d.estimate.value, "stderr": d.estimate.stderr,
            "samples": d.estimate.samples, "seed": seed, "undetermined": d.undetermined,
        }));
    }
    if matches!(a.estimator, Estimator::Reweighted | Estimator::Both) {
        let s = seed.wrapping_add(1);
        let r = crossing_prob_reweighted(&cfg, a.samples, s)?;
        estimates.push(r.as_estimate());
        records.push(json!({
            "config": cfg, "estimator": "reweighted", "value": r.value, "stderr": r.stderr,
            "samples": r.samples, "seed": s, "weight_max": r.weight_max, "exhausted": r.exhausted,
        }));
    }
    let mut result = json!({ "records": records });
    if let [x, y] = estimates[..] {
        result["z"] = json!(x.z_score_against(&y));
    }
    Ok(Payload::Json(result))
}

fn scaling(a: &ScalingArgs, seed: u64) -> CliResult<Payload> {
    if a.lambdas.is_empty() {
        return usage("no lambdas given");
    }
    let result = match a.kind {
        ScalingKind::Walk => to_json(&verify_walk_scaling(a.a, a.b, &a.lambdas, a.samples, seed, a.tolerance)?),
        ScalingKind::Boltzmann => {
            let n = a.samples.unwrap_or(10_000);
            let r = scaled_reweighted_limit([a.a, a.b, a.c, a.d], &a.lambdas, n, &AspSamplerConfig::walk(64), seed)?;
            let mut v = to_json(&r);
            v["pass"] = json!(r.trend_ok && r.points.last().is_some_and(|p| p.deviation <= a.tolerance));
            v
        }
    };
    Ok(Payload::Json(result))
}

fn wdist(a: &WDistArgs, seed: u64) -> CliResult<Payload> {
    let h = w_distribution(a.a, a.b, a.c, a.samples, seed)?;
    let rows = h.counts.iter().enumerate().map(|(j, c)| format!("{},{}", j + 1, c)).collect();
    Ok(Payload::Csv { header: "position,count".into(), rows, notes: vec![format!("undetermined: {}", h.undetermined)] })
}

fn rates(a: &RatesCheckArgs) -> CliResult<Payload> {
    Ok(Payload::Json(to_json(&jump_rate_asymptotics_check(a.x, a.y, a.c, &a.k, &a.z, &a.lambdas)?)))
}

fn acceptance(a: &VerifyAllArgs, seed: u64) -> CliResult<AcceptanceReport> {
    let profile = if a.smoke {
        Profile::Smoke
    } else if a.quick {
        Profile::Quick
    } else {
        Profile::Full
    };
    if let Some(bad) = a.only.iter().find(|&&i| !(1..=14).contains(&i)) {
        return usage(format!("no criterion {bad}"));
    }
    let report = if a.only.is_empty() {
        verify_all(profile, seed)
    } else {
        let criteria: Vec<_> = a.only.iter().map(|&id| run_criterion(id, profile, seed)).collect();
        let pass = criteria.iter().all(|c| c.pass);
        AcceptanceReport { profile, seed, criteria, pass }
    };
    for c in &report.criteria {
        eprintln!("criterion {:>2} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(report)
}
