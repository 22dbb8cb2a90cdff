//! One function per subcommand, each returning a [`Table`].

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use renyikit::channel::{
    channel_mutual_information, channel_renyi_divergence, composite_sc_bounds, composite_stein_exponent,
    feedback_sc_exponent, stein_exponent, strong_converse_exponent, ChannelDivergenceQuery, ExponentReport,
    SecondChannel,
};
use renyikit::divergences::{hypothesis_testing, renyi_auto, RenyiFamily};
use renyikit::qmat::json::{channel_from_json, channel_to_json, state_from_json};
use renyikit::qmat::presets;
use renyikit::qmat::{DensityOperator, KrausChannel, ReplacerSpec};
use renyikit::sim::adaptive::StrategyJson;
use renyikit::sim::feedback::ProtocolJson;
use renyikit::sim::{
    nagaoka_bound_check_with, optimal_final_test, optimal_tensor_strategy, random_protocol, random_strategy,
    renyi_cb_bound_check_with, replacer_success_probability, run_adaptive, run_feedback, superdense_coding,
    AdaptiveStrategy, FeedbackProtocol,
};
use renyikit::verify::{run_suite, summarize, CheckRecord, Suite};

use crate::output::{num, Table};
use crate::CliError;

/// Bound checks are reported against this tolerance unless `--tol` is given.
pub const DEFAULT_BOUND_TOL: f64 = 1e-6;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_state(path: &Path) -> Result<DensityOperator, CliError> {
    Ok(state_from_json(&read(path)?)?)
}

/// Channel from `--channel FILE` or `--preset NAME`, with the alternative the preset ships, if any.
pub fn load_channel(
    file: Option<&PathBuf>,
    preset: Option<&str>,
    sigma: Option<&DensityOperator>,
) -> Result<(KrausChannel, Option<ReplacerSpec>), CliError> {
    match (file, preset) {
        (Some(f), None) => Ok((channel_from_json(&read(f)?)?, None)),
        (None, Some(name)) => {
            let p = presets::by_name(name, sigma)?;
            Ok((p.channel, p.alternative))
        }
        _ => Err(CliError::Usage("give exactly one of --channel and --preset".into())),
    }
}

/// `--sigma` if given, else the preset's alternative, else the maximally mixed output state.
pub fn replacer_for(
    ch: &KrausChannel,
    sigma: Option<DensityOperator>,
    shipped: Option<ReplacerSpec>,
) -> Result<ReplacerSpec, CliError> {
    Ok(match (sigma, shipped) {
        (Some(s), _) => ReplacerSpec::new(s)?,
        (None, Some(r)) => r,
        (None, None) => ReplacerSpec::maximally_mixed(ch.dim_out()),
    })
}

pub fn families(list: &[String]) -> Result<Vec<RenyiFamily>, CliError> {
    list.iter().map(|f| f.parse::<RenyiFamily>().map_err(CliError::from)).collect()
}

fn nonempty<T>(list: &[T], flag: &str) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Usage(format!("{flag} needs at least one value")));
    }
    Ok(())
}

pub fn divergence(rho: &Path, sigma: &Path, alphas: &[f64], fams: &[RenyiFamily]) -> Result<Table, CliError> {
    nonempty(alphas, "--alpha")?;
    let (rho, sigma) = (load_state(rho)?, load_state(sigma)?);
    let mut t = Table::new(&["family", "alpha", "value_bits"]);
    for &f in fams {
        for &a in alphas {
            let v = renyi_auto(&rho, &sigma, a, f)?;
            t.push(vec![Value::from(f.to_string()), num(a), num(v.value())]);
        }
    }
    Ok(t)
}

pub fn hypothesis_test(rho: &Path, sigma: &Path, epsilons: &[f64]) -> Result<Table, CliError> {
    nonempty(epsilons, "--epsilon")?;
    let (rho, sigma) = (load_state(rho)?, load_state(sigma)?);
    let mut t = Table::new(&["epsilon", "value_bits", "type1", "type2", "test"]);
    for &e in epsilons {
        let r = hypothesis_testing(&rho, &sigma, e)?;
        let test = serde_json::to_value(&r.test).expect("test serializes");
        t.push(vec![num(e), num(r.value.value()), num(r.achieved_type1), num(r.achieved_type2), test]);
    }
    Ok(t)
}

const REPORT_COLUMNS: [&str; 8] =
    ["value_bits", "alpha_star", "dual_value", "gap_certificate", "infinite", "heuristic", "note", "report"];

fn report_cells(rep: &ExponentReport) -> Vec<Value> {
    let alpha_star = match rep.alpha_star {
        renyikit::divergences::AlphaStar::Value(a) => num(a),
        other => serde_json::to_value(other).expect("alpha serializes")["kind"].clone(),
    };
    let note = if rep.flags.infinite { "+inf (support condition fails)" } else { "" };
    vec![
        num(rep.value()),
        alpha_star,
        rep.dual_value.map(|d| num(d.value())).unwrap_or(Value::Null),
        num(rep.gap_certificate),
        Value::Bool(rep.flags.infinite),
        Value::Bool(rep.flags.heuristic),
        Value::from(note),
        serde_json::to_value(rep).expect("report serializes"),
    ]
}

fn report_table(lead: &[&str]) -> Table {
    let mut cols: Vec<&str> = lead.to_vec();
    cols.extend(REPORT_COLUMNS);
    Table::new(&cols)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExponentKind {
    Stein,
    Sc,
    Feedback,
    Composite,
}

pub fn exponent(
    kind: ExponentKind,
    ch: &KrausChannel,
    sigma: &ReplacerSpec,
    rates: &[f64],
) -> Result<Table, CliError> {
    let needs_rate = |flag: &str| nonempty(rates, flag);
    match kind {
        ExponentKind::Stein => {
            let mut t = report_table(&["kind"]);
            let mut row = vec![Value::from("stein")];
            row.extend(report_cells(&stein_exponent(ch, sigma)?));
            t.push(row);
            Ok(t)
        }
        ExponentKind::Sc | ExponentKind::Feedback => {
            needs_rate(if kind == ExponentKind::Sc { "--r" } else { "--rate" })?;
            let mut t = report_table(&["kind", "rate"]);
            for &r in rates {
                let (name, rep) = match kind {
                    ExponentKind::Sc => ("sc", strong_converse_exponent(ch, sigma, r)?),
                    _ => ("feedback", feedback_sc_exponent(ch, r)?),
                };
                let mut row = vec![Value::from(name), num(r)];
                row.extend(report_cells(&rep));
                t.push(row);
            }
            Ok(t)
        }
        ExponentKind::Composite if rates.is_empty() => {
            let mut t = report_table(&["kind"]);
            let mut row = vec![Value::from("composite-stein")];
            row.extend(report_cells(&composite_stein_exponent(ch)?));
            t.push(row);
            Ok(t)
        }
        ExponentKind::Composite => {
            let mut t = Table::new(&["kind", "rate", "lower_bits", "upper_bits", "bounds"]);
            for &r in rates {
                let b = composite_sc_bounds(ch, r)?;
                t.push(vec![
                    Value::from("composite-sc"),
                    num(r),
                    num(b.lower.value()),
                    num(b.upper.value()),
                    serde_json::to_value(&b).expect("bounds serialize"),
                ]);
            }
            Ok(t)
        }
    }
}

pub fn channel_divergence(
    ch: &KrausChannel,
    second: SecondChannel,
    alphas: &[f64],
    fams: &[RenyiFamily],
) -> Result<Table, CliError> {
    nonempty(alphas, "--alpha")?;
    let mut t = report_table(&["family", "alpha"]);
    for &f in fams {
        for &a in alphas {
            let q = ChannelDivergenceQuery::new(ch.clone(), second.clone(), a, f)?;
            let mut row = vec![Value::from(f.to_string()), num(a)];
            row.extend(report_cells(&channel_renyi_divergence(&q)?));
            t.push(row);
        }
    }
    Ok(t)
}

pub fn mutual_info(ch: &KrausChannel, alphas: &[f64], fams: &[RenyiFamily]) -> Result<Table, CliError> {
    nonempty(alphas, "--alpha")?;
    let mut t = report_table(&["family", "alpha"]);
    for &f in fams {
        for &a in alphas {
            let mut row = vec![Value::from(f.to_string()), num(a)];
            row.extend(report_cells(&channel_mutual_information(ch, a, f)?));
            t.push(row);
        }
    }
    Ok(t)
}

/// Where the strategies of `simulate-adaptive` come from.
pub enum StrategySource {
    File(PathBuf),
    Random { rounds: usize, seeds: Vec<u64> },
    OptimalTensor { rounds: usize },
}

fn sandwiched_channel_divergence(ch: &KrausChannel, sigma: &ReplacerSpec, a: f64) -> Result<f64, CliError> {
    let q = ChannelDivergenceQuery::replacer(ch.clone(), sigma.clone(), a, RenyiFamily::Sandwiched)?;
    Ok(channel_renyi_divergence(&q)?.value())
}

pub fn simulate_adaptive(
    source: StrategySource,
    ch: &KrausChannel,
    sigma: &ReplacerSpec,
    alphas: &[f64],
    epsilon: Option<f64>,
    tol: f64,
) -> Result<Table, CliError> {
    nonempty(alphas, "--alpha")?;
    let mut t = Table::new(&[
        "strategy",
        "rounds",
        "alpha",
        "type1",
        "type2",
        "factorization_defect",
        "renyi_cb_lhs",
        "renyi_cb_rhs",
        "renyi_cb_ok",
        "nagaoka_lhs",
        "nagaoka_rhs",
        "nagaoka_ok",
    ]);
    let divergences: Vec<f64> =
        alphas.iter().map(|&a| sandwiched_channel_divergence(ch, sigma, a)).collect::<Result<_, _>>()?;
    let mut strategies: Vec<(String, AdaptiveStrategy, Option<f64>)> = Vec::new();
    match source {
        StrategySource::File(path) => {
            let j: StrategyJson = serde_json::from_str(&read(&path)?).map_err(renyikit::Error::from)?;
            strategies.push((path.display().to_string(), AdaptiveStrategy::try_from(&j)?, None));
        }
        StrategySource::Random { rounds, seeds } => {
            for s in seeds {
                strategies.push((format!("random:{s}"), random_strategy(rounds, ch.dim_in(), ch.dim_out(), s)?, None));
            }
        }
        StrategySource::OptimalTensor { rounds } => {
            // one strategy per order, built on that order's optimal input
            for &a in alphas {
                let (s, _) = optimal_tensor_strategy(ch, sigma, a, rounds)?;
                strategies.push((format!("optimal-tensor:{a}"), s, Some(a)));
            }
        }
    }
    for (name, s, only) in strategies {
        let s = match epsilon {
            Some(e) => optimal_final_test(&s, ch, sigma, e)?,
            None => s,
        };
        let out = run_adaptive(&s, ch, sigma)?;
        for (&a, &d) in alphas.iter().zip(&divergences) {
            if only.is_some_and(|x| x != a) {
                continue;
            }
            let cb = renyi_cb_bound_check_with(&s, ch, sigma, a, d)?;
            let ng = nagaoka_bound_check_with(&s, ch, sigma, a, d)?;
            t.push(vec![
                Value::from(name.clone()),
                Value::from(s.n_rounds()),
                num(a),
                num(out.type1),
                num(out.type2),
                num(out.factorization_defect),
                num(cb.lhs),
                num(cb.rhs),
                Value::Bool(cb.lhs == f64::NEG_INFINITY || cb.lhs <= cb.rhs + tol),
                num(ng.lhs),
                num(ng.rhs),
                Value::Bool(ng.lhs == f64::NEG_INFINITY || ng.lhs <= ng.rhs + tol),
            ]);
        }
    }
    Ok(t)
}

/// Where the protocols of `simulate-feedback` come from.
pub enum ProtocolSource {
    File(PathBuf),
    Superdense,
    Random { uses: usize, messages: usize, seeds: Vec<u64> },
}

pub fn simulate_feedback(
    source: ProtocolSource,
    ch: &KrausChannel,
    sigma: &ReplacerSpec,
    alphas: &[f64],
    tol: f64,
) -> Result<Table, CliError> {
    nonempty(alphas, "--alpha")?;
    let mut protocols: Vec<(String, FeedbackProtocol)> = Vec::new();
    match source {
        ProtocolSource::File(path) => {
            let j: ProtocolJson = serde_json::from_str(&read(&path)?).map_err(renyikit::Error::from)?;
            protocols.push((path.display().to_string(), FeedbackProtocol::try_from(&j)?));
        }
        ProtocolSource::Superdense => protocols.push(("superdense".into(), superdense_coding())),
        ProtocolSource::Random { uses, messages, seeds } => {
            for s in seeds {
                protocols.push((format!("random:{s}"), random_protocol(uses, messages, ch.dim_in(), ch.dim_out(), s)?));
            }
        }
    }
    let infos: Vec<f64> = alphas
        .iter()
        .map(|&a| Ok(channel_mutual_information(ch, a, RenyiFamily::Sandwiched)?.value()))
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(&[
        "protocol",
        "uses",
        "messages",
        "p_success",
        "p_success_replacer",
        "alpha",
        "bound_lhs",
        "bound_rhs",
        "bound_ok",
    ]);
    for (name, p) in protocols {
        let ps = run_feedback(&p, ch)?;
        let pr = replacer_success_probability(&p, sigma.sigma())?;
        for (&a, &info) in alphas.iter().zip(&infos) {
            let c = renyikit::sim::feedback_bound_check_with(&p, ch, a, info)?;
            t.push(vec![
                Value::from(name.clone()),
                Value::from(p.n_uses()),
                Value::from(p.message_count()),
                num(ps),
                num(pr),
                num(a),
                num(c.lhs),
                num(c.rhs),
                Value::Bool(c.lhs == f64::NEG_INFINITY || c.lhs <= c.rhs + tol),
            ]);
        }
    }
    Ok(t)
}

/// Suite summary plus the full record list for the JSONL log.
pub fn verify(suite: Suite, seeds: &[u64], tol: Option<f64>) -> Result<(Table, Vec<CheckRecord>), CliError> {
    nonempty(seeds, "--seeds")?;
    let records = run_suite(suite, seeds, tol)?;
    let mut t = Table::new(&["suite", "check", "passed", "failed", "worst_margin"]);
    for s in summarize(&records) {
        t.push(vec![
            Value::from(suite.name()),
            Value::from(s.check),
            Value::from(s.passed),
            Value::from(s.failed),
            num(s.worst_margin),
        ]);
    }
    Ok((t, records))
}

/// Names accepted by `presets`, with example parameters.
pub const PRESET_EXAMPLES: [&str; 7] = [
    "identity_2",
    "dephasing_0.3",
    "depolarizing_0.1",
    "amplitude_damping_0.3",
    "replacer",
    "replacer_3",
    "illumination_toy_0.8_0.1",
];

pub fn preset_list() -> Table {
    let mut t = Table::new(&["preset", "dim_in", "dim_out", "has_alternative"]);
    for name in PRESET_EXAMPLES {
        let p = presets::by_name(name, None).expect("example presets resolve");
        t.push(vec![
            Value::from(name),
            Value::from(p.channel.dim_in()),
            Value::from(p.channel.dim_out()),
            Value::Bool(p.alternative.is_some()),
        ]);
    }
    t
}

/// Channel JSON of a preset; with `alternative`, the replacer state of the preset instead.
pub fn preset_json(name: &str, sigma: Option<&DensityOperator>, alternative: bool) -> Result<String, CliError> {
    let p = presets::by_name(name, sigma)?;
    if alternative {
        let alt = p.alternative.ok_or_else(|| CliError::Usage(format!("preset '{name}' has no alternative")))?;
        Ok(renyikit::qmat::json::state_to_json(alt.sigma().operator()))
    } else {
        Ok(channel_to_json(&p.channel))
    }
}
