//! Command implementations behind the `fairdiv` binary.
//!
//! Every command returns an [`Outcome`]: a JSON document for stdout, a short
//! text summary for stderr, and whether the run met its target.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use fairdiv::allocation::Allocation;
use fairdiv::exact::{format_rational, frac, parse_rational, to_f64, FairRatio, Q};
use fairdiv::fairness::{evaluate, pmms_ratio, FairnessReport, Notion, DEFAULT_MU2_CAP};
use fairdiv::instance::{generate_random, parse_instance_with, ValueModel, ZeroPolicy};
use fairdiv::labase::{efx_factor, meets_efx_factor, run_labase, EtaMode, LaBaseConfig};
use fairdiv::oracle::{best_alpha, DEFAULT_ENUMERATION_CAP};
use fairdiv::pmms::{pmms_factor, run_pmms, DEFAULT_PRECISION_BITS};
use fairdiv::scaling::{apply_scaling, max_range_scaling};
use fairdiv::tefx::{meets_tefx_factor, run_tefx, run_tefx_labase, tefx_factor, TefxVariant};
use fairdiv::tight::{appendix_a, appendix_b};
use fairdiv::{Instance, TieBreakPolicy, Valuations};

/// Slack allowed on PMMS checks when the reduction had to round base values.
const ROUNDED_SLACK: (i64, i64) = (1, 1_000_000_000);

type Guarantee = Box<dyn Fn(&FairRatio) -> Result<bool>>;

#[derive(Debug, Parser)]
#[command(name = "fairdiv", version, about = "Approximately fair allocation of indivisible goods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Range parameter and per-good statistics.
    Gamma(InputArgs),
    /// Run an allocation algorithm and verify its output.
    Solve(SolveArgs),
    /// Measure the fairness of a given allocation.
    Verify(VerifyArgs),
    /// Find per-agent scaling factors that maximize the range parameter.
    Scale(ScaleArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Brute-force ground truth for tiny instances.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Reproduce a tight example.
    TightExample(TightArgs),
    /// Print guarantee curves as CSV.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Instance file (JSON or CSV).
    #[arg(long)]
    pub input: PathBuf,
    /// What to do with goods or agents whose values are all zero.
    #[arg(long, value_enum, default_value_t = ZeroArg::Reject)]
    pub zeros: ZeroArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ZeroArg {
    Reject,
    Drop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Efx,
    Tefx,
    Pmms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TefxArg {
    /// Envy-cycle elimination in base-value order.
    EnvyCycle,
    /// Look-ahead assignment with the tEFx choice of eta.
    LabaseEta,
}

impl From<TefxArg> for TefxVariant {
    fn from(v: TefxArg) -> Self {
        match v {
            TefxArg::EnvyCycle => TefxVariant::EnvyCycle,
            TefxArg::LabaseEta => TefxVariant::LabaseEta,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub input: InputArgs,
    /// Tie-break profile: lowest, highest or appendix-a.
    #[arg(long, default_value = "lowest")]
    pub policy: TieBreakPolicy,
    /// Look-ahead threshold for efx: default, tefx, or eta squared as p/q.
    #[arg(long, default_value = "default")]
    pub eta: String,
    /// Procedure for tefx.
    #[arg(long, value_enum, default_value_t = TefxArg::EnvyCycle)]
    pub variant: TefxArg,
    /// Bits used to render irrational base values in the PMMS reduction.
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision: u32,
    /// Include the step-by-step trace.
    #[arg(long)]
    pub trace: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// JSON file with {"bundles": [[...], ...]} or a report carrying "allocation".
    #[arg(long)]
    pub allocation: PathBuf,
    #[arg(long)]
    pub notion: Notion,
    /// Required ratio (defaults to 1).
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "1/1000000")]
    pub epsilon: String,
    /// Write the scaled instance (JSON) here.
    #[arg(long)]
    pub emit_scaled: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub agents: usize,
    #[arg(long)]
    pub goods: usize,
    /// uniform:LO:HI, two-valued:A:B:P_ZERO or restricted:P_ZERO.
    #[arg(long, default_value = "uniform:0:10")]
    pub model: ValueModel,
    #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Best achievable ratio over all complete allocations.
    BestAlpha {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        notion: Notion,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    LabaseAppendixA,
    PmmsAppendixB,
}

#[derive(Debug, Args)]
pub struct TightArgs {
    #[arg(value_enum)]
    pub example: Example,
    /// Range parameter for labase-appendix-a.
    #[arg(long, default_value = "1/4")]
    pub gamma: String,
    /// Bits used when a square root has to be rationalized.
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    /// 2g / (sqrt(5 + 4g) - 1).
    Efx,
    /// min{1, 2g}.
    Tefx,
    /// 5g / (g + sqrt(5 - 4g^2)), for g < 1.
    TefxLabase,
    /// 5g / 6.
    Pmms,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(value_enum)]
    pub kind: CurveKind,
    /// Grid k/steps for k = 1..=steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Explicit points instead of the grid (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub at: Vec<String>,
}

/// Result of one command.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub summary: String,
    pub success: bool,
}

impl Outcome {
    fn json(value: &Value, summary: String, success: bool) -> Self {
        Outcome {
            stdout: serde_json::to_string_pretty(value).expect("serializable") + "\n",
            summary,
            success,
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Gamma(args) => cmd_gamma(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Scale(args) => cmd_scale(&args),
        Command::Gen(args) => cmd_gen(&args),
        Command::Oracle { command: OracleCommand::BestAlpha { input, notion, cap } } => {
            cmd_best_alpha(&input, notion, cap)
        }
        Command::TightExample(args) => cmd_tight_example(&args),
        Command::Curve(args) => cmd_curve(&args),
    }
}

fn load(args: &InputArgs) -> Result<(Instance, Value)> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let policy = match args.zeros {
        ZeroArg::Reject => ZeroPolicy::Reject,
        ZeroArg::Drop => ZeroPolicy::Drop,
    };
    let (inst, dropped) = parse_instance_with(&text, policy)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    Ok((inst, serde_json::to_value(dropped)?))
}

fn q(v: &Q) -> Value {
    Value::String(format_rational(v))
}

fn ratio(r: &FairRatio) -> Value {
    Value::String(r.to_string())
}

fn fairness_json(report: &FairnessReport) -> Value {
    json!({
        "notion": report.notion,
        "layer": report.layer,
        "alpha": ratio(&report.alpha),
        "alpha_f64": finite_or_null(report.alpha.to_f64()),
        "witness": report.witness,
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn cmd_gamma(args: &InputArgs) -> Result<Outcome> {
    let (inst, dropped) = load(args)?;
    let goods: Vec<Value> = (0..inst.m())
        .map(|g| {
            let s = inst.good_stats(g);
            json!({
                "good": g,
                "gamma": q(&s.gamma),
                "base_sq": q(&s.base_sq),
                "min_positive": q(&s.min_positive),
                "max": q(&s.max),
            })
        })
        .collect();
    let gamma = inst.range_parameter();
    let doc = json!({
        "agents": inst.n(),
        "goods": inst.m(),
        "gamma": q(&gamma),
        "gamma_f64": to_f64(&gamma),
        "per_good": goods,
        "dropped": dropped,
    });
    Ok(Outcome::json(&doc, format!("gamma = {} ({:.6})", format_rational(&gamma), to_f64(&gamma)), true))
}

/// Machine-readable record of a solver run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub input: Option<String>,
    pub instance: Value,
    pub dropped: Value,
    pub policy: String,
    pub gamma: String,
    pub theoretical_alpha: Option<f64>,
    /// Exact form of the guarantee when it is rational.
    pub theoretical_exact: Option<String>,
    pub measured: Value,
    pub meets_guarantee: bool,
    pub allocation: Allocation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
}

fn pmms_threshold(gamma: &Q, exact: bool) -> Q {
    let factor = pmms_factor(gamma);
    if exact {
        factor
    } else {
        factor - frac(ROUNDED_SLACK.0, ROUNDED_SLACK.1)
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let (inst, dropped) = load(&args.input)?;
    let gamma = inst.range_parameter();
    let policy = args.policy;
    let mut details = None;
    let mut trace = None;
    let (name, allocation, notion, theory, theory_exact, meets): (
        String,
        Allocation,
        Notion,
        Option<f64>,
        Option<Q>,
        Guarantee,
    ) = match args.algorithm {
        Algorithm::Efx => {
            let eta: EtaMode = args.eta.parse()?;
            let run = run_labase(&inst, &LaBaseConfig { eta: eta.clone(), policy, trace: args.trace })?;
            details = Some(json!({ "eta_mode": args.eta, "eta": run.eta, "eta_f64": run.eta.to_f64() }));
            trace = run.trace.map(serde_json::to_value).transpose()?;
            let g = gamma.clone();
            let (theory, check): (Option<f64>, Guarantee) = match eta {
                EtaMode::Default => (
                    Some(efx_factor(&gamma)?),
                    Box::new(move |r| Ok(meets_efx_factor(&g, r)?)),
                ),
                EtaMode::TefxVariant => (
                    Some(tefx_factor(&gamma, TefxVariant::LabaseEta)?),
                    Box::new(move |r| Ok(meets_tefx_factor(&g, TefxVariant::LabaseEta, r)?)),
                ),
                // no guarantee is known for an arbitrary threshold
                EtaMode::ExplicitSquared(_) => (None, Box::new(|_| Ok(true))),
            };
            let notion = if matches!(eta, EtaMode::TefxVariant) { Notion::Tefx } else { Notion::Efx };
            (format!("labase/{}", args.eta), run.allocation, notion, theory, None, check)
        }
        Algorithm::Tefx => {
            let variant = TefxVariant::from(args.variant);
            let allocation = match variant {
                TefxVariant::EnvyCycle => {
                    let run = run_tefx(&inst, &policy)?;
                    if args.trace {
                        trace = Some(serde_json::to_value(&run.steps)?);
                    }
                    run.allocation
                }
                TefxVariant::LabaseEta => {
                    let run = run_tefx_labase(&inst, &policy, args.trace)?;
                    trace = run.trace.map(serde_json::to_value).transpose()?;
                    run.allocation
                }
            };
            let exact = match variant {
                TefxVariant::EnvyCycle => Some((&gamma * Q::from_integer(2.into())).min(Q::from_integer(1.into()))),
                TefxVariant::LabaseEta => None,
            };
            let g = gamma.clone();
            (
                format!("tefx/{}", serde_json::to_value(variant)?.as_str().unwrap_or_default()),
                allocation,
                Notion::Tefx,
                Some(tefx_factor(&gamma, variant)?),
                exact,
                Box::new(move |r| Ok(meets_tefx_factor(&g, variant, r)?)),
            )
        }
        Algorithm::Pmms => {
            let run = run_pmms(&inst, &policy, args.precision)?;
            let exact = run.reduced.is_exact();
            details = Some(json!({
                "precision_bits": args.precision,
                "reduced_exact": exact,
                "reduced_alpha": ratio(&pmms_ratio(&run.reduced, &run.allocation, DEFAULT_MU2_CAP)?.alpha),
            }));
            if args.trace {
                trace = Some(serde_json::to_value(&run.steps)?);
            }
            let threshold = pmms_threshold(&gamma, exact);
            (
                "pmms".to_string(),
                run.allocation,
                Notion::Pmms,
                Some(to_f64(&pmms_factor(&gamma))),
                Some(pmms_factor(&gamma)),
                Box::new(move |r| Ok(r.is_at_least(&threshold))),
            )
        }
    };
    let report = evaluate(notion, &inst, &allocation)?;
    let ok = meets(&report.alpha)?;
    let run_report = RunReport {
        algorithm: name.clone(),
        input: Some(args.input.input.display().to_string()),
        instance: inst.to_json(),
        dropped,
        policy: policy.to_string(),
        gamma: format_rational(&gamma),
        theoretical_alpha: theory,
        theoretical_exact: theory_exact.as_ref().map(format_rational),
        measured: fairness_json(&report),
        meets_guarantee: ok,
        allocation,
        details,
        trace,
    };
    let doc = serde_json::to_value(&run_report)?;
    if let Some(path) = &args.output {
        write_json(path, &doc)?;
    }
    let summary = format!(
        "{name}: gamma {} measured {} alpha {} vs guarantee {} -> {}",
        format_rational(&gamma),
        notion,
        report.alpha,
        theory.map_or("none".into(), |t| format!("{t:.9}")),
        if ok { "ok" } else { "BELOW GUARANTEE" }
    );
    Ok(Outcome::json(&doc, summary, ok))
}

fn write_json(path: &Path, doc: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(doc)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn load_allocation(path: &Path) -> Result<Allocation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let body = doc.get("allocation").cloned().unwrap_or(doc);
    serde_json::from_value(body).context("expected {\"bundles\": [[...], ...]}")
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let (inst, _) = load(&args.input)?;
    let alloc = load_allocation(&args.allocation)?;
    let report = evaluate(args.notion, &inst, &alloc)?;
    let target = match &args.alpha {
        Some(a) => parse_rational(a)?,
        None => Q::from_integer(1.into()),
    };
    let ok = report.alpha.is_at_least(&target);
    let doc = json!({
        "notion": args.notion,
        "required": q(&target),
        "meets": ok,
        "report": report,
        "alpha": ratio(&report.alpha),
    });
    let summary = format!("{} alpha = {} (required {})", args.notion, report.alpha, format_rational(&target));
    Ok(Outcome::json(&doc, summary, ok))
}

fn cmd_scale(args: &ScaleArgs) -> Result<Outcome> {
    let (inst, _) = load(&args.input)?;
    let eps = parse_rational(&args.epsilon)?;
    let res = max_range_scaling(&inst, &eps)?;
    let scaled = apply_scaling(&inst, &res.factors)?;
    if let Some(path) = &args.emit_scaled {
        write_json(path, &scaled.to_json())?;
    }
    let doc = json!({
        "unscaled_gamma": q(&inst.range_parameter()),
        "epsilon": q(&eps),
        "result": res,
        "gamma_f64": to_f64(&res.gamma),
    });
    let summary = format!(
        "gamma {} -> {} (~{:.9}), bracket width {}",
        format_rational(&inst.range_parameter()),
        format_rational(&res.gamma),
        to_f64(&res.gamma),
        format_rational(&res.width)
    );
    Ok(Outcome::json(&doc, summary, true))
}

fn cmd_gen(args: &GenArgs) -> Result<Outcome> {
    let inst = generate_random(args.agents, args.goods, &args.model, args.seed)?;
    let stdout = match args.format {
        Format::Json => {
            let mut doc = inst.to_json();
            doc["model"] = json!(args.model.to_string());
            doc["seed"] = json!(args.seed);
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => format!("# model {} seed {}\n{}", args.model, args.seed, inst.to_csv()),
    };
    let gamma = inst.range_parameter();
    Ok(Outcome {
        stdout,
        summary: format!("{}x{} instance, seed {}, gamma {}", args.agents, args.goods, args.seed, format_rational(&gamma)),
        success: true,
    })
}

fn cmd_best_alpha(input: &InputArgs, notion: Notion, cap: usize) -> Result<Outcome> {
    let (inst, _) = load(input)?;
    let best = best_alpha(&inst, notion, cap)?;
    let doc = json!({
        "notion": notion,
        "alpha": ratio(&best.alpha),
        "alpha_f64": finite_or_null(best.alpha.to_f64()),
        "witness": best.witness,
        "explored": best.explored,
    });
    let summary = format!("best {} alpha = {} over {} allocations", notion, best.alpha, best.explored);
    Ok(Outcome::json(&doc, summary, true))
}

fn cmd_tight_example(args: &TightArgs) -> Result<Outcome> {
    match args.example {
        Example::LabaseAppendixA => {
            let gamma = parse_rational(&args.gamma)?;
            if gamma <= Q::from_integer(0.into()) || gamma > Q::from_integer(1.into()) {
                bail!("unsupported gamma {} (need 0 < gamma <= 1)", args.gamma);
            }
            let tight = appendix_a(&gamma, args.precision)?;
            let policy = TieBreakPolicy::appendix_a();
            let run = run_labase(&tight.instance, &LaBaseConfig { policy, trace: true, ..Default::default() })?;
            let report = evaluate(Notion::Efx, &tight.instance, &run.allocation)?;
            let theory = efx_factor(&tight.gamma)?;
            let ok = meets_efx_factor(&tight.gamma, &report.alpha)?;
            let gap = report.alpha.to_f64() - theory;
            let doc = json!({
                "example": "labase-appendix-a",
                "algorithm": "labase/default",
                "requested_gamma": q(&gamma),
                "gamma": q(&tight.gamma),
                "exact": tight.exact,
                "precision_bits": args.precision,
                "policy": policy.to_string(),
                "instance": tight.instance.to_json(),
                "theoretical_alpha": theory,
                "measured": fairness_json(&report),
                "difference": gap,
                "meets_guarantee": ok,
                "allocation": run.allocation,
                "trace": run.trace,
            });
            let w = report.witness.as_ref();
            let summary = format!(
                "labase-appendix-a gamma {}: EFx alpha {:.12} vs 2g/(sqrt(5+4g)-1) = {:.12} at agent {} -> agent {} removing good {}",
                format_rational(&tight.gamma),
                report.alpha.to_f64(),
                theory,
                w.map_or(0, |w| w.agent),
                w.map_or(0, |w| w.other),
                w.and_then(|w| w.good).map_or("-".into(), |g| g.to_string()),
            );
            Ok(Outcome::json(&doc, summary, ok))
        }
        Example::PmmsAppendixB => {
            let inst = appendix_b();
            let policy = TieBreakPolicy::default();
            let run = run_pmms(&inst, &policy, args.precision)?;
            let report = evaluate(Notion::Pmms, &inst, &run.allocation)?;
            let values: Vec<String> = (0..inst.n())
                .map(|i| format_rational(&inst.bundle_value(i, run.allocation.bundle(i))))
                .collect();
            let theory = pmms_factor(&inst.range_parameter());
            let ok = report.alpha.is_at_least(&theory);
            let doc = json!({
                "example": "pmms-appendix-b",
                "algorithm": "pmms",
                "gamma": q(&inst.range_parameter()),
                "policy": policy.to_string(),
                "instance": inst.to_json(),
                "theoretical_alpha": to_f64(&theory),
                "theoretical_exact": q(&theory),
                "measured": fairness_json(&report),
                "bundle_values": values,
                "meets_guarantee": ok,
                "allocation": run.allocation,
                "trace": run.steps,
            });
            let summary = format!("pmms-appendix-b: bundle values {:?}, PMMS alpha {}", values, report.alpha);
            Ok(Outcome::json(&doc, summary, ok))
        }
    }
}

/// Guarantee of `kind` at `gamma`.
pub fn curve_value(kind: CurveKind, gamma: &Q) -> Result<f64> {
    Ok(match kind {
        CurveKind::Efx => efx_factor(gamma)?,
        CurveKind::Tefx => tefx_factor(gamma, TefxVariant::EnvyCycle)?,
        CurveKind::TefxLabase => tefx_factor(gamma, TefxVariant::LabaseEta)?,
        CurveKind::Pmms => to_f64(&pmms_factor(gamma)),
    })
}

fn cmd_curve(args: &CurveArgs) -> Result<Outcome> {
    let points: Vec<Q> = if args.at.is_empty() {
        if args.steps == 0 {
            bail!("--steps must be positive");
        }
        let steps = i64::try_from(args.steps)?;
        (1..=steps).map(|k| frac(k, steps)).collect()
    } else {
        args.at.iter().map(|s| parse_rational(s.trim())).collect::<fairdiv::Result<_>>()?
    };
    let mut out = String::from("gamma,factor\n");
    let mut rows = 0;
    for g in &points {
        // the tEFx look-ahead curve is undefined at gamma = 1
        if args.kind == CurveKind::TefxLabase && g >= &Q::from_integer(1.into()) {
            continue;
        }
        out.push_str(&format!("{},{:.12}\n", to_f64(g), curve_value(args.kind, g)?));
        rows += 1;
    }
    Ok(Outcome { stdout: out, summary: format!("{rows} rows"), success: true })
}
