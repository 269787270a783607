//! One function per subcommand.

use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};

use otm_core::collinfo::{self, DistError, JointDistribution};
use otm_core::f2codes::{self, BitVector};
use otm_core::lightcone::{find_feasible_params, LightconeError};
use otm_core::povmsearch::{search_bounds, Povm, Quantity, SearchConfig, SearchError};
use otm_core::protocol::leakage::{leakage_experiment, leakage_sweep, sweep_angles, SweepRow, PAIR_BOUNDS};
use otm_core::protocol::otrm::public_codes;
use otm_core::protocol::{otm_prep, otm_read_detailed, simulator_transcript, ProtocolError, ProtocolParams};
use otm_core::qrac;
use otm_core::seed;

use crate::scalar::{parse_scalar, parse_scalar_list};
use crate::{read_file, AlphaArg, BoundsArgs, CliError, Command, EntropyArgs, FeasibilityArgs, LeakageArgs, Outcome, QuantityArg, RunConfig, SimulateArgs};

/// Tolerance on the QRAC table against `cos²(π/8)`.
const QRAC_TOL: f64 = 1e-12;

pub(crate) fn dispatch(config: &RunConfig, budget: Option<f64>) -> Result<Outcome, CliError> {
    match &config.command {
        Command::Bounds(a) => bounds(a, budget),
        Command::Simulate(a) => simulate(a, config.seed),
        Command::Feasibility(a) => feasibility(a),
        Command::Entropy(a) => entropy(a),
        Command::Leakage(a) => leakage(a),
        Command::QracTable => qrac_table(),
        Command::Replay(_) => Err(CliError::Input("unresolved replay".into())),
    }
}

fn protocol_err(e: ProtocolError) -> CliError {
    match e {
        ProtocolError::Resource(s) => CliError::Resource(s),
        other => CliError::Input(other.to_string()),
    }
}

fn dist_err(e: DistError) -> CliError {
    match e {
        DistError::TooLarge(_) => CliError::Resource(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Greater => Quantity::Greater,
            QuantityArg::Total => Quantity::Total,
            QuantityArg::Conditional => Quantity::Conditional,
        }
    }
}

fn bounds(a: &BoundsArgs, budget: Option<f64>) -> Result<Outcome, CliError> {
    let quantity = Quantity::from(a.quantity);
    let mut cfg = SearchConfig::new(quantity, parse_scalar(&a.coarse)?, parse_scalar(&a.fine)?);
    cfg.max_cells = a.max_cells;
    cfg.time_budget = budget
        .map(|b| Duration::try_from_secs_f64(b).map_err(|e| CliError::Input(format!("time budget: {e}"))))
        .transpose()?;
    cfg.prune = !a.no_prune;
    cfg.dual_majorant = !a.no_dual;
    let (report, exhausted) = match search_bounds(&cfg) {
        Ok(r) => (r, false),
        Err(SearchError::BudgetExceeded { partial }) => (*partial, true),
        Err(e @ SearchError::InvalidParameters(_)) => return Err(CliError::Input(e.to_string())),
    };
    let mut violations = Vec::new();
    if report.corrected_bound < report.raw_max - 1e-12 {
        violations.push(format!("corrected bound {} below attained value {}", report.corrected_bound, report.raw_max));
    }
    let mut value = to_value(&report);
    // Wall-clock time is not a function of the config.
    let timing = value["stats"].as_object_mut().and_then(|s| s.remove("elapsed_seconds")).and_then(|v| v.as_f64());
    let sets: Vec<String> = report
        .thresholds
        .iter()
        .map(|t| format!("{} {} {}", t.set, t.threshold, if t.certified { "certified" } else if t.consistent { "not certified" } else { "violated" }))
        .collect();
    let summary = format!(
        "{quantity}: raw_max {:.10}, corrected bound {:.10}, {} cells{}; {}",
        report.raw_max,
        report.corrected_bound,
        report.stats.cells_visited,
        if exhausted { " (budget exhausted, partial)" } else { "" },
        sets.join(", ")
    );
    Ok(Outcome { violations, budget_exceeded: exhausted, timing, ..Outcome::new(value, summary) })
}

fn parse_bits(s: &str, len: usize, name: &str) -> Result<BitVector, CliError> {
    let v = BitVector::from_str(s).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
    if v.len() != len {
        return Err(CliError::Input(format!("{name} has {} bits, expected λ/8 = {len}", v.len())));
    }
    Ok(v)
}

fn parse_strategy(s: &str) -> Result<Povm, CliError> {
    Ok(match s {
        "mu0" => Povm::basis(qrac::BasisMeasurement::qrac(false).theta),
        "mu1" => Povm::basis(qrac::BasisMeasurement::qrac(true).theta),
        "none" => Povm::identity(),
        angle => Povm::basis(parse_scalar(angle)?),
    })
}

struct TrialStats {
    failures: [u64; 2],
    mismatches: Vec<String>,
    transcript: Option<Value>,
}

#[derive(Default)]
struct TrialTotals {
    failures: [u64; 2],
    mismatches: Vec<String>,
    transcript: Vec<Value>,
}

impl From<TrialStats> for TrialTotals {
    fn from(t: TrialStats) -> Self {
        TrialTotals { failures: t.failures, mismatches: t.mismatches, transcript: t.transcript.into_iter().collect() }
    }
}

impl TrialTotals {
    fn merge(&mut self, other: TrialTotals) {
        self.failures[0] += other.failures[0];
        self.failures[1] += other.failures[1];
        self.mismatches.extend(other.mismatches);
        self.transcript.extend(other.transcript);
    }
}

fn simulate(a: &SimulateArgs, root: u64) -> Result<Outcome, CliError> {
    let mut params = match (&a.k, &a.rate) {
        (Some(k), None) => ProtocolParams::new(a.n, *k, a.lambda),
        (None, Some(r)) => ProtocolParams::from_rate(a.n, parse_scalar(r)?, a.lambda),
        _ => return Err(CliError::Input("give exactly one of k and rate".into())),
    }
    .map_err(protocol_err)?;
    if a.trials == 0 {
        return Err(CliError::Input("trials must be positive".into()));
    }
    params.code_seed = if a.fresh_codes { None } else { Some(a.code_seed.unwrap_or_else(|| seed::derive(root, "public-codes"))) };
    let len = params.msg_len();
    let fixed = [
        a.m0.as_deref().map(|s| parse_bits(s, len, "m0")).transpose()?,
        a.m1.as_deref().map(|s| parse_bits(s, len, "m1")).transpose()?,
    ];
    let strategy = a.strategy.as_deref().map(parse_strategy).transpose()?;
    let alphas: &[bool] = match a.alpha {
        AlphaArg::Zero => &[false],
        AlphaArg::One => &[true],
        AlphaArg::Both => &[false, true],
    };

    let run_trial = |t: u64| -> Result<TrialStats, ProtocolError> {
        let ts = seed::derive_indexed(root, "simulate-trial", t);
        let mut rng = seed::rng(seed::derive(ts, "messages"));
        let m = [0, 1].map(|i| fixed[i].clone().unwrap_or_else(|| BitVector::random(len, &mut rng)));
        let pkg = otm_prep(&m[0], &m[1], &params, ts)?;
        let mut stats = TrialStats { failures: [0; 2], mismatches: Vec::new(), transcript: None };
        let mut reads = Vec::new();
        for &alpha in alphas {
            let ai = usize::from(alpha);
            let r = otm_read_detailed(&pkg, alpha, seed::derive_indexed(ts, "read", ai as u64))?;
            if !r.inner.decode_ok {
                stats.failures[ai] += 1;
            } else if r.message != m[ai] {
                stats.mismatches.push(format!("trial {t}, α = {ai}: output {} differs from m_α = {}", r.message, m[ai]));
            }
            if (t as usize) < a.transcript_limit {
                reads.push(json!({
                    "alpha": ai,
                    "received": r.inner.received,
                    "decoded": r.inner.message,
                    "decode_ok": r.inner.decode_ok,
                    "output": r.message,
                }));
            }
        }
        if (t as usize) < a.transcript_limit {
            stats.transcript = Some(json!({ "trial": t, "m0": m[0], "m1": m[1], "ct0": pkg.ct[0], "ct1": pkg.ct[1], "reads": reads }));
        }
        Ok(stats)
    };
    // Order-preserving reduction, so the result does not depend on the worker count.
    let totals = (0..a.trials)
        .into_par_iter()
        .map(|t| run_trial(t).map(TrialTotals::from))
        .try_reduce(TrialTotals::default, |mut x, y| {
            x.merge(y);
            Ok(x)
        })
        .map_err(protocol_err)?;
    let TrialTotals { failures, mismatches: mut violations, transcript } = totals;
    let crossover = 1.0 - qrac::success_probability();
    let codes = params.code_seed.map(|cs| public_codes(params.n, params.k, cs)).transpose().map_err(protocol_err)?;
    let mut per_alpha = Vec::new();
    let mut summary = format!("n={}, k={}, λ={}, {} trials", params.n, params.k, params.lambda, a.trials);
    for &alpha in alphas {
        let ai = usize::from(alpha);
        let rate = failures[ai] as f64 / a.trials as f64;
        let exact = codes.as_ref().and_then(|c| f2codes::exact_failure_prob(&c[ai], crossover).ok());
        let sigma = exact.map(|p| (p * (1.0 - p) / a.trials as f64).sqrt());
        let within = exact.zip(sigma).map(|(p, s)| (rate - p).abs() <= 3.0 * s);
        summary += &format!("; α={ai}: failure rate {rate:.6}");
        if let Some(p) = exact {
            summary += &format!(" (exact {p:.6})");
        }
        per_alpha.push(json!({
            "alpha": ai,
            "trials": a.trials,
            "decode_failures": failures[ai],
            "failure_rate": rate,
            "exact_failure_prob": exact,
            "sigma": sigma,
            "within_3_sigma": within,
        }));
    }
    let simulator = match &strategy {
        None => None,
        Some(p) => {
            let mut rng = seed::rng(seed::derive(root, "simulator-messages"));
            let m = [0, 1].map(|i| fixed[i].clone().unwrap_or_else(|| BitVector::random(len, &mut rng)));
            let t = simulator_transcript(&m[0], &m[1], &params, &vec![p.clone(); params.n], root).map_err(protocol_err)?;
            if t.report.sd > t.report.lhl_bound + 1e-12 {
                violations.push(format!("simulator distance {} exceeds hash bound {}", t.report.sd, t.report.lhl_bound));
            }
            summary += &format!("; simulator SD {:.3e} ≤ bound {:.3e}", t.report.sd, t.report.lhl_bound);
            Some(json!({ "strategy": a.strategy, "m0": m[0], "m1": m[1], "report": t.report }))
        }
    };
    let result = json!({
        "params": params,
        "public_codes": codes.as_ref().map(|c| c.iter().map(|c| serde_json::from_str::<Value>(&c.to_json()).expect("code JSON")).collect::<Vec<_>>()),
        "statistics": per_alpha,
        "round_trip_mismatches": violations.len(),
        "transcript": transcript,
        "simulator": simulator,
    });
    Ok(Outcome { violations, ..Outcome::new(result, summary) })
}

fn feasibility(a: &FeasibilityArgs) -> Result<Outcome, CliError> {
    let (eps1, eps2) = (parse_scalar(&a.eps1)?, parse_scalar(&a.eps2)?);
    let w = find_feasible_params(eps1, eps2, a.ell, a.depth, a.dim).map_err(|e| match e {
        LightconeError::Infeasible => CliError::Resource(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;
    let mut violations = Vec::new();
    if !w.holds() {
        violations.push(format!("witness fails: size residual {}, shell residual {}", w.size_residual, w.shell_residual));
    }
    let summary = format!(
        "D={}, ℓ={}, d={}: r={}, outer side {}, q={} cubes, n={}; size residual {} (lhs {} ≤ rhs {}), shell residual {} (|CU_bar|={} ≥ {})",
        w.dim, w.ell, w.depth, w.r, w.outer_side, w.q, w.n, w.size_residual, w.size_lhs, w.size_rhs, w.shell_residual, w.shell_lhs, w.shell_rhs
    );
    Ok(Outcome { violations, ..Outcome::new(to_value(&w), summary) })
}

fn load_distribution(path: &std::path::Path) -> Result<JointDistribution, CliError> {
    let text = read_file(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    let d = if is_json { JointDistribution::from_json(&text) } else { JointDistribution::from_csv(&text) };
    d.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn group(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).collect()
}

fn entropy(a: &EntropyArgs) -> Result<Outcome, CliError> {
    let d = load_distribution(&a.input)?;
    let given = a.given.as_deref().map(group).unwrap_or_default();
    let ops = usize::from(a.mi.is_some()) + usize::from(a.h.is_some()) + usize::from(a.hmin.is_some());
    if ops != 1 {
        return Err(CliError::Input("choose exactly one of --mi, --h, --hmin".into()));
    }
    let (quantity, x, y, value) = if let Some(mi) = &a.mi {
        let [x, y] = match mi.as_slice() {
            [x, y] => [group(x), group(y)],
            _ => return Err(CliError::Input("--mi takes two variable groups".into())),
        };
        let v = if given.is_empty() { collinfo::collision_mi(&d, &x, &y) } else { collinfo::conditional_collision_mi(&d, &x, &y, &given) };
        ("collision_mi", x, y, v)
    } else if let Some(h) = &a.h {
        let x = group(h);
        let v = if given.is_empty() { collinfo::collision_entropy(&d, &x) } else { collinfo::conditional_collision_entropy(&d, &x, &given) };
        ("collision_entropy", x, Vec::new(), v)
    } else if let Some(h) = &a.hmin {
        let x = group(h);
        let v = if given.is_empty() { collinfo::min_entropy(&d, &x) } else { collinfo::avg_conditional_min_entropy(&d, &x, &given) };
        ("min_entropy", x, Vec::new(), v)
    } else {
        unreachable!("exactly one operation is set")
    };
    let value = value.map_err(dist_err)?;
    let summary = format!("{quantity}({} ; {} | {}) = {value}", x.join(","), y.join(","), given.join(","));
    let result = json!({
        "input": a.input,
        "variables": d.variables(),
        "quantity": quantity,
        "x": x,
        "y": y,
        "given": given,
        "value": value,
    });
    Ok(Outcome::new(result, summary))
}

const CSV_HEADER: [&str; 12] =
    ["strategy", "angles", "m", "ic_c0", "ic_c1", "ic_c0_given_c1", "ic_c1_given_c0", "greater", "total", "conditional", "lesser", "within_bounds"];

fn leakage(a: &LeakageArgs) -> Result<Outcome, CliError> {
    let angles = match &a.angles {
        Some(s) => parse_scalar_list(s)?,
        None => sweep_angles().to_vec(),
    };
    let rows: Vec<SweepRow> = if a.exhaustive {
        leakage_sweep(a.m, &angles).map_err(protocol_err)?
    } else {
        angles
            .par_iter()
            .map(|&t| Ok(SweepRow { report: leakage_experiment(&vec![Povm::basis(t); a.m])?, angles: vec![t; a.m] }))
            .collect::<Result<_, ProtocolError>>()
            .map_err(protocol_err)?
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Input(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let mut violations = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let r = &row.report;
        let angles = row.angles.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        if !r.within_bounds() {
            violations.push(format!("strategy {i} ({angles}) exceeds the per-pair bounds"));
        }
        let lesser = r.lesser.map_or(String::new(), |l| l.to_string());
        let nums = [r.ic_c0, r.ic_c1, r.ic_c0_given_c1, r.ic_c1_given_c0, r.greater, r.total, r.conditional].map(|v| v.to_string());
        let mut rec = vec![i.to_string(), angles, r.m.to_string()];
        rec.extend(nums);
        rec.extend([lesser, r.within_bounds().to_string()]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?).expect("csv is utf-8");
    let argmax = |f: fn(&SweepRow) -> f64| {
        rows.iter().max_by(|x, y| f(x).total_cmp(&f(y))).map(|r| json!({ "value": f(r), "angles": r.angles }))
    };
    let result = json!({
        "m": a.m,
        "exhaustive": a.exhaustive,
        "angles": angles,
        "strategies": rows.len(),
        "pair_bounds": { "greater": PAIR_BOUNDS.greater, "total": PAIR_BOUNDS.total, "conditional": PAIR_BOUNDS.conditional },
        "all_within_bounds": violations.is_empty(),
        "max_greater": argmax(|r| r.report.greater),
        "max_total": argmax(|r| r.report.total),
        "max_conditional": argmax(|r| r.report.conditional),
    });
    let summary = format!("{} strategies on m={} pairs, {} outside the per-pair bounds", rows.len(), a.m, violations.len());
    Ok(Outcome { violations, csv: Some(csv), ..Outcome::new(result, summary) })
}

fn qrac_table() -> Result<Outcome, CliError> {
    let table = qrac::qrac_success_table();
    let target = qrac::success_probability();
    let dev = table.iter().map(|e| (e.probability - target).abs()).fold(0.0, f64::max);
    let mut violations = Vec::new();
    if dev > QRAC_TOL {
        violations.push(format!("success probability deviates from cos²(π/8) by {dev}"));
    }
    let lines: Vec<String> = table
        .iter()
        .map(|e| format!("b0={} b1={} α={}: {:.15}", u8::from(e.b0), u8::from(e.b1), u8::from(e.alpha), e.probability))
        .collect();
    let result = json!({ "entries": table, "cos2_pi_8": target, "max_deviation": dev });
    Ok(Outcome { violations, ..Outcome::new(result, lines.join("\n")) })
}
