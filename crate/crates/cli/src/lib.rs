//! Command-line front end: instance I/O, mechanisms, audits and the
//! replication suite. Agents and items are 1-based on the command line and
//! in reports.

mod replicate;
mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use fairdiv::audits::{
    is_ef1, is_efficient, is_envy_free, is_fpo, is_fulfilling, AuditError, AuditReport,
    EfficiencyCriterion, Predicate,
};
use fairdiv::cake::{incremental_accommodation, is_proportional, CakeError};
use fairdiv::interim::{
    bic_from_table, check_monotone, InterimError, ReportTable, DEFAULT_EVAL_CAP,
    DEFAULT_NODE_BUDGET,
};
use fairdiv::io::{parse_cake, parse_instance, parse_owner_list, parse_profile, Instance, IoError};
use fairdiv::mechanisms::{MechanismError, MechanismId, DEFAULT_ENUM_CAP};
use fairdiv::priors::{bic_audit_mc, neutrality_test, McConfig, PriorError, PriorSpec};
use fairdiv::rational::parse_rational;
use fairdiv::{Allocation, Profile, Rational};
use serde_json::{json, Value};
use thiserror::Error;

pub use replicate::FIXTURES;
pub use report::{Check, Report};

#[derive(Debug, Parser)]
#[command(
    name = "fairdiv",
    version,
    about = "Exact fair-division mechanisms and audits"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cap on exhaustive enumeration (allocations or mechanism runs).
    #[arg(long = "cap-enum", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_enum: Option<u64>,
    /// Node budget for the characterization search.
    #[arg(long = "cap-nodes", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_nodes: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mechanism on a goods instance.
    Allocate {
        #[arg(long, default_value = "rr-pass")]
        mech: String,
        instance: PathBuf,
    },
    /// Check fairness and efficiency predicates of an allocation.
    Audit {
        instance: PathBuf,
        /// Comma-separated: ef1, ef, pareto, sd, sd-plus, fpo, fulfilling
        /// (goods) or proportional (cake).
        #[arg(long, value_delimiter = ',', default_value = "ef1,sd-plus")]
        predicates: Vec<String>,
        /// Owner list such as "1,1,2,2"; defaults to the output of `--mech`.
        #[arg(long)]
        alloc: Option<String>,
        #[arg(long, default_value = "rr-pass")]
        mech: String,
    },
    /// Interim and positional interim allocations under uniform opponent orders.
    Interim {
        #[arg(long, default_value = "rr-pass")]
        mech: String,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        /// Only this agent (default: every agent).
        #[arg(long)]
        agent: Option<usize>,
        /// Also list the interim allocation of every report.
        #[arg(long)]
        full: bool,
    },
    /// Bayesian incentive compatibility: exact for ordinal mechanisms, or
    /// Monte Carlo when `--prior` is given.
    Bic {
        #[arg(long, default_value = "rr-pass")]
        mech: String,
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 1)]
        agent: usize,
        /// True values, e.g. "3/5,2/5".
        #[arg(long)]
        values: String,
        /// Misreport to evaluate (Monte Carlo mode); repeatable.
        #[arg(long)]
        deviation: Vec<String>,
        /// Opponent prior, e.g. simplex, iid-uniform:0,1, order-uniform.
        #[arg(long)]
        prior: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Run incremental accommodation on a cake instance and check
    /// proportionality.
    Cake { instance: PathBuf },
    /// Chi-squared test that a prior makes every preference order equally likely.
    Neutrality {
        #[arg(long)]
        prior: String,
        #[arg(long)]
        items: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Run a replication fixture (`list` shows them all).
    Replicate {
        id: String,
        /// Overrides the fixture's sample or instance count.
        #[arg(long)]
        samples: Option<u64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    CapExceeded(String),
    #[error("cannot write report: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CapExceeded(_) => 3,
            _ => 2,
        }
    }
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl From<MechanismError> for CliError {
    fn from(e: MechanismError) -> Self {
        match e {
            MechanismError::TooLarge { .. } => CliError::CapExceeded(e.to_string()),
            other => config(other),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::Mechanism(m) => m.into(),
            other => config(other),
        }
    }
}

impl From<InterimError> for CliError {
    fn from(e: InterimError) -> Self {
        match e {
            InterimError::TooLarge { .. } => CliError::CapExceeded(e.to_string()),
            InterimError::Mechanism(m) => m.into(),
            other => config(other),
        }
    }
}

impl From<PriorError> for CliError {
    fn from(e: PriorError) -> Self {
        match e {
            PriorError::Mechanism(m) => m.into(),
            other => config(other),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        config(e)
    }
}

impl From<CakeError> for CliError {
    fn from(e: CakeError) -> Self {
        config(e)
    }
}

impl Options {
    fn enum_cap(&self) -> u64 {
        self.cap_enum.unwrap_or(DEFAULT_ENUM_CAP)
    }

    fn eval_cap(&self) -> u64 {
        self.cap_enum.unwrap_or(DEFAULT_EVAL_CAP)
    }

    fn node_budget(&self) -> u64 {
        self.cap_nodes.unwrap_or(DEFAULT_NODE_BUDGET)
    }

    fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "cap_enum": self.cap_enum,
            "cap_nodes": self.cap_nodes,
            "format": match self.format { Format::Json => "json", Format::Csv => "csv" },
        })
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn mechanism(s: &str) -> Result<MechanismId, CliError> {
    s.parse().map_err(CliError::Config)
}

fn rationals(s: &str) -> Result<Vec<Rational>, CliError> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(config))
        .collect()
}

fn one_based(k: usize, n: usize, what: &str) -> Result<usize, CliError> {
    if k == 0 || k > n {
        return Err(CliError::Config(format!("{what} {k} out of range 1..={n}")));
    }
    Ok(k - 1)
}

fn rats(v: &[Rational]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

pub(crate) fn allocation_json(x: &Allocation, n: usize) -> Value {
    let bundles: Vec<Vec<usize>> = x
        .bundles(n)
        .iter()
        .map(|b| b.iter().map(|j| j + 1).collect())
        .collect();
    json!({ "owners": x.to_owner_list(), "bundles": bundles })
}

pub(crate) fn audit_check(r: &AuditReport) -> Check {
    Check::new(r.predicate.name(), Some(r.verdict)).data(r.to_json())
}

/// Goods predicates by name.
pub(crate) fn audit_goods(
    p: &Profile<Rational>,
    x: &Allocation,
    pred: Predicate,
    cap: u64,
) -> Result<AuditReport, CliError> {
    Ok(match pred {
        Predicate::Ef1 => is_ef1(p, x)?,
        Predicate::EnvyFree => is_envy_free(p, x)?,
        Predicate::Pareto => is_efficient(p, x, EfficiencyCriterion::Pareto, cap)?,
        Predicate::Sd => is_efficient(p, x, EfficiencyCriterion::Sd, cap)?,
        Predicate::SdPlus => is_efficient(p, x, EfficiencyCriterion::SdPlus, cap)?,
        Predicate::Fpo => is_fpo(p, x)?,
        Predicate::Fulfilling => is_fulfilling(p, x)?,
        Predicate::Proportional => {
            return Err(CliError::Config(
                "`proportional` applies to cake instances".into(),
            ));
        }
    })
}

/// Runs the parsed command, filling `report` as it goes so a cap error
/// still leaves the finished checks in place.
fn execute(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Allocate { mech, instance } => {
            let p = parse_profile(&read(instance)?)?;
            let id = mechanism(mech)?;
            let x = id.run(&p, opts.enum_cap())?;
            let u = p.utilities(&x);
            report.push(
                Check::info("allocation", x.to_owner_list())
                    .data(json!({ "mechanism": id.to_string(), "allocation": allocation_json(&x, p.agents()), "utilities": rats(&u) })),
            );
        }
        Command::Audit {
            instance,
            predicates,
            alloc,
            mech,
        } => {
            let preds = predicates
                .iter()
                .map(|s| {
                    Predicate::parse(s.trim())
                        .ok_or_else(|| CliError::Config(format!("unknown predicate `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            match parse_instance(&read(instance)?)? {
                Instance::Goods(p) => {
                    let x = match alloc {
                        Some(a) => parse_owner_list(a, p.agents())?,
                        None => mechanism(mech)?.run(&p, opts.enum_cap())?,
                    };
                    x.check_against(&p).map_err(config)?;
                    report.push(
                        Check::info("allocation", x.to_owner_list())
                            .data(json!({ "allocation": allocation_json(&x, p.agents()), "utilities": rats(&p.utilities(&x)) })),
                    );
                    for pred in preds {
                        let r = audit_goods(&p, &x, pred, opts.enum_cap())?;
                        report.push(audit_check(&r));
                    }
                }
                Instance::Cake(fs) => {
                    if alloc.is_some() {
                        return Err(CliError::Config(
                            "cake audits use the mechanism's own allocation".into(),
                        ));
                    }
                    let out = incremental_accommodation(&fs)?;
                    for pred in preds {
                        if pred != Predicate::Proportional {
                            return Err(CliError::Config(format!(
                                "`{pred}` applies to goods instances"
                            )));
                        }
                        report.push(audit_check(&is_proportional(&out.allocation, &fs)?));
                    }
                }
            }
        }
        Command::Interim {
            mech,
            agents,
            items,
            agent,
            full,
        } => {
            let id = mechanism(mech)?;
            let who: Vec<usize> = match agent {
                Some(a) => vec![one_based(*a, *agents, "agent")?],
                None => (0..*agents).collect(),
            };
            for i in who {
                let table = ReportTable::build(&id, i, *agents, *items, opts.eval_cap())?;
                if *full {
                    for r in table.reports() {
                        let t = table.interim(r).expect("enumerated report");
                        let order: Vec<usize> = r.order().iter().map(|j| j + 1).collect();
                        report.push(
                            Check::info(format!("interim agent {}", i + 1), rats(&t.q).join(" "))
                                .data(json!({
                                    "agent": i + 1,
                                    "order": order,
                                    "positive_count": r.positive_count(),
                                    "q": rats(&t.q),
                                })),
                        );
                    }
                }
                match table.positional() {
                    Ok(qp) => {
                        report.push(
                            Check::new(format!("positional agent {}", i + 1), Some(true))
                                .value(rats(&qp.q_pos).join(" "))
                                .data(json!({ "agent": i + 1, "q_pos": rats(&qp.q_pos) })),
                        );
                        report.push(Check::new(
                            format!("monotone agent {}", i + 1),
                            Some(check_monotone(&qp)),
                        ));
                    }
                    Err(InterimError::NotPositional { rank, .. }) => {
                        report.push(
                            Check::new(format!("positional agent {}", i + 1), Some(false))
                                .value(format!("differs at rank {}", rank + 1)),
                        );
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Command::Bic {
            mech,
            agents,
            agent,
            values,
            deviation,
            prior,
            samples,
        } => {
            let id = mechanism(mech)?;
            let truth = rationals(values)?;
            let i = one_based(*agent, *agents, "agent")?;
            match prior {
                None => {
                    if !deviation.is_empty() {
                        return Err(CliError::Config(
                            "exact audits check every ordinal report; --deviation needs --prior"
                                .into(),
                        ));
                    }
                    if !id.is_ordinal() {
                        return Err(CliError::Config(format!(
                            "`{id}` is cardinal; pass --prior for a Monte Carlo audit"
                        )));
                    }
                    let table = ReportTable::build(&id, i, *agents, truth.len(), opts.eval_cap())?;
                    let r = bic_from_table(&table, &truth);
                    report.push(
                        Check::new("bic", Some(r.verdict))
                            .value(r.truthful.to_string())
                            .data(r.to_json()),
                    );
                }
                Some(prior) => {
                    let prior: PriorSpec = prior.parse().map_err(config)?;
                    if deviation.is_empty() {
                        return Err(CliError::Config(
                            "Monte Carlo audits need at least one --deviation".into(),
                        ));
                    }
                    let devs = deviation
                        .iter()
                        .map(|d| rationals(d))
                        .collect::<Result<Vec<_>, _>>()?;
                    let cfg = McConfig {
                        agents: *agents,
                        prior,
                        samples: *samples,
                        seed: opts.seed,
                    };
                    for r in bic_audit_mc(&id, i, &truth, &devs, &cfg)? {
                        // a gain more than 3 standard errors above zero rejects BIC
                        let holds = r.estimate <= 3.0 * r.std_error;
                        report.push(
                            Check::new(
                                format!("gain of {}", rats(&r.deviation).join(",")),
                                Some(holds),
                            )
                            .value(r.estimate.to_string())
                            .std_error(r.std_error)
                            .data(r.to_json()),
                        );
                    }
                }
            }
        }
        Command::Cake { instance } => {
            let fs = parse_cake(&read(instance)?)?;
            let out = incremental_accommodation(&fs)?;
            for (i, piece) in out.allocation.pieces().iter().enumerate() {
                report.push(Check::info(format!("piece agent {}", i + 1), piece.to_string()).data(json!({
                    "agent": i + 1,
                    "intervals": piece.intervals().iter().map(|(l, r)| [l.to_string(), r.to_string()]).collect::<Vec<_>>(),
                    "value": fs[i].value(piece).to_string(),
                })));
            }
            report.push(audit_check(&is_proportional(&out.allocation, &fs)?));
        }
        Command::Neutrality {
            prior,
            items,
            samples,
            alpha,
        } => {
            let prior: PriorSpec = prior.parse().map_err(config)?;
            let r = neutrality_test(&prior, *items, *samples, *alpha, opts.seed)?;
            report.push(
                Check::new(format!("neutrality {prior}"), Some(r.pass))
                    .value(r.statistic.to_string())
                    .data(r.to_json()),
            );
        }
        Command::Replicate { id, samples } => replicate::run(id, *samples, opts, report)?,
    }
    Ok(())
}

fn command_config(cli: &Cli) -> (String, Value) {
    let mut cfg = cli.opts.to_json();
    let (name, extra) = match &cli.command {
        Command::Allocate { mech, instance } => {
            ("allocate", json!({ "mech": mech, "instance": instance }))
        }
        Command::Audit {
            instance,
            predicates,
            alloc,
            mech,
        } => (
            "audit",
            json!({ "instance": instance, "predicates": predicates, "alloc": alloc, "mech": mech }),
        ),
        Command::Interim {
            mech,
            agents,
            items,
            agent,
            full,
        } => (
            "interim",
            json!({ "mech": mech, "agents": agents, "items": items, "agent": agent, "full": full }),
        ),
        Command::Bic {
            mech,
            agents,
            agent,
            values,
            deviation,
            prior,
            samples,
        } => (
            "bic",
            json!({ "mech": mech, "agents": agents, "agent": agent, "values": values, "deviation": deviation, "prior": prior, "samples": samples }),
        ),
        Command::Cake { instance } => ("cake", json!({ "instance": instance })),
        Command::Neutrality {
            prior,
            items,
            samples,
            alpha,
        } => (
            "neutrality",
            json!({ "prior": prior, "items": items, "samples": samples, "alpha": alpha }),
        ),
        Command::Replicate { id, samples } => {
            ("replicate", json!({ "id": id, "samples": samples }))
        }
    };
    if let (Value::Object(base), Value::Object(extra)) = (&mut cfg, extra) {
        base.extend(extra);
    }
    (name.to_string(), cfg)
}

/// Runs a parsed command line and returns the report, or the error that
/// prevented one. Cap errors still produce a (partial) report.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let (name, cfg) = command_config(cli);
    let mut report = Report::new(name, cfg);
    match execute(cli, &mut report) {
        Ok(()) => Ok(report),
        Err(CliError::CapExceeded(msg)) => {
            report.cap_exceeded = Some(msg);
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            serde_json::to_string_pretty(&report.to_json()).expect("JSON values always serialize")
                + "\n"
        }
        Format::Csv => report.to_csv(),
    }
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let text = render(&report, cli.opts.format);
    let written = match &cli.opts.out {
        Some(path) => fs::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {}", CliError::Output(e));
        return 2;
    }
    if let Some(msg) = &report.cap_exceeded {
        eprintln!("cap exceeded: {msg}");
    }
    report.exit_code()
}
