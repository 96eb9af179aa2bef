mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use followback::follow::{graph_susceptibilities, ProductModel};
use followback::graph::{synth_graph, write_graph_json, CountDistribution, PolicyFile, SynthConfig, SynthKind};
use followback::ip::{build_formulation, optimize_policy, solve, write_lp, SolutionReport};
use followback::policies::{centrality_policy, eigenvector_centrality, random_append, Direction};
use followback::simulator::{compare_policies, write_reports_csv};
use followback::{Error, Policy, Result, SocialGraph, VertexId};
use serde::Serialize;

use config::{read_graph, BudgetSpec, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "followback", version, about = "Plan interactions that maximize expected follows from target users")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a graph and report its size and any metadata defaults.
    Validate {
        graph: PathBuf,
        /// Metadata sidecar for a CSV edge list.
        #[arg(long)]
        metadata: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic graph.
    Synth(SynthArgs),
    /// Solve the integer program for each budget.
    Optimize {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Also write the model in LP format, cycle constraints included.
        #[arg(long)]
        export_lp: bool,
    },
    /// Write a baseline policy.
    Baseline {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        kind: BaselineKind,
        /// Output file; defaults to `<out-dir>/baseline-<kind>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate policies under the logistic model and write a comparison CSV.
    Simulate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Policy JSON files.
        #[arg(required = true)]
        policies: Vec<PathBuf>,
        /// Independent random numbers per policy instead of shared ones.
        #[arg(long)]
        no_crn: bool,
        /// Add a follow-frequency column per target.
        #[arg(long)]
        per_target: bool,
        /// Output CSV; defaults to `<out-dir>/simulation.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the formulation in LP format.
    ExportLp {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Solve first so the cycle constraints found are included.
        #[arg(long)]
        solve: bool,
        /// Output file; defaults to `<out-dir>/model-o<order>-m<budget>.lp`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Logistic coefficients JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Comma-separated target ids replacing the graph's targets.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<String>>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    order: Option<u8>,
    /// Budget, or a comma-separated increasing sweep.
    #[arg(long, value_delimiter = ',')]
    budget: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to the config, then $FOLLOWBACK_OUT_DIR, then `out`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<Experiment> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            graph: self.graph.clone(),
            metadata: self.metadata.clone(),
            model: self.model.clone(),
            targets: self
                .targets
                .as_ref()
                .map(|t| t.iter().map(|s| VertexId::from(s.as_str())).collect()),
            order: self.order,
            budget: self.budget.clone().map(|b| match b.as_slice() {
                [m] => BudgetSpec::One(*m),
                _ => BudgetSpec::Sweep(b),
            }),
            replications: self.replications,
            seed: self.seed,
            output_dir: self.out_dir.clone(),
        };
        Experiment::resolve(base.overlay(flags))
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "random-dag")]
    kind: SynthKindArg,
    #[arg(long)]
    n: usize,
    /// Edge probability.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Number of targets.
    #[arg(long, default_value_t = 0)]
    targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give every vertex these friend and follower counts instead of sampling them.
    #[arg(long, num_args = 2, value_names = ["FRIENDS", "FOLLOWERS"])]
    fixed_counts: Option<Vec<u64>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKindArg {
    RandomDag,
    ErdosRenyi,
    TwoHop,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    RandomAppend,
    CentralityAsc,
    CentralityDesc,
}

impl BaselineKind {
    fn name(self) -> &'static str {
        match self {
            BaselineKind::RandomAppend => "random-append",
            BaselineKind::CentralityAsc => "centrality-asc",
            BaselineKind::CentralityDesc => "centrality-desc",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate {
            graph,
            metadata,
            json,
        } => cmd_validate(&graph, metadata, json),
        Command::Synth(args) => cmd_synth(&args),
        Command::Optimize { exp, export_lp } => exp.resolve().and_then(|e| cmd_optimize(&e, export_lp)),
        Command::Baseline { exp, kind, out } => exp.resolve().and_then(|e| cmd_baseline(&e, kind, out)),
        Command::Simulate {
            exp,
            policies,
            no_crn,
            per_target,
            out,
        } => exp
            .resolve()
            .and_then(|e| cmd_simulate(&e, &policies, !no_crn, per_target, out)),
        Command::ExportLp { exp, solve, out } => exp.resolve().and_then(|e| cmd_export_lp(&e, solve, out)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Writes through a temporary sibling so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(io::Error::other(e)))?;
    text.push(b'\n');
    write_atomic(path, &text)
}

fn cmd_validate(path: &Path, metadata: Option<PathBuf>, json: bool) -> Result<()> {
    let (_, report) = read_graph(path, metadata)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Io(io::Error::other(e)))?);
    } else {
        println!("vertices: {}", report.vertex_count);
        println!("edges: {}", report.edge_count);
        println!("targets: {}", report.target_count);
    }
    if !report.defaulted_metadata.is_empty() {
        let ids: Vec<&str> = report.defaulted_metadata.iter().map(VertexId::as_str).collect();
        eprintln!(
            "warning: counts for {} vertices taken from graph degrees: {}",
            ids.len(),
            ids.join(", ")
        );
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let kind = match args.kind {
        SynthKindArg::RandomDag => SynthKind::RandomDag,
        SynthKindArg::ErdosRenyi => SynthKind::ErdosRenyiDirected,
        SynthKindArg::TwoHop => SynthKind::TwoHop,
    };
    let mut cfg = SynthConfig::new(kind, args.n, args.p, args.targets, args.seed);
    if let Some(c) = &args.fixed_counts {
        let fixed = CountDistribution::Fixed {
            friends: c[0],
            followers: c[1],
        };
        cfg.counts = fixed;
        cfg.target_counts = Some(fixed);
    }
    let graph = synth_graph(&cfg)?;
    let mut buf = Vec::new();
    write_graph_json(&graph, &mut buf)?;
    match &args.out {
        Some(p) => {
            write_atomic(p, &buf)?;
            eprintln!(
                "wrote {} ({} vertices, {} edges)",
                p.display(),
                graph.len(),
                graph.edge_count()
            );
        }
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeOutput<'a> {
    budget: usize,
    order: u8,
    predicted_objective: f64,
    linear_value: f64,
    #[serde(flatten)]
    solution: &'a SolutionReport,
}

#[derive(Serialize)]
struct SummaryRow {
    budget: usize,
    order: u8,
    status: String,
    predicted_objective: Option<f64>,
    linear_value: Option<f64>,
    interactions: Option<usize>,
    nodes: Option<u64>,
    lazy_constraints: Option<usize>,
    rounds: Option<usize>,
}

fn cmd_optimize(exp: &Experiment, export_lp: bool) -> Result<()> {
    let (graph, _) = exp.load_graph()?;
    if exp.budgets.is_empty() {
        return Err(Error::Missing("budget (--budget or \"budget\" in the config)".into()));
    }
    let product = ProductModel::from_graph(&graph, &exp.coeffs)?;
    let targets = graph.targets();
    let order = u8::from(exp.order);
    let mut rows = Vec::new();
    let mut first_error: Option<Error> = None;
    for &m in &exp.budgets {
        let dir = exp.out_dir.join(format!("m{m}"));
        match optimize_policy(&graph, &targets, m, exp.order, &product) {
            Ok(out) => {
                let report = SolutionReport::new(&graph, &out.model, &out.solution);
                write_json(
                    &dir.join("solution.json"),
                    &OptimizeOutput {
                        budget: m,
                        order,
                        predicted_objective: out.predicted,
                        linear_value: out.linear_value,
                        solution: &report,
                    },
                )?;
                let file = PolicyFile::new(&graph, &out.policy, format!("ip-order-{order}"), Some(exp.seed));
                write_json(&dir.join("policy.json"), &file)?;
                if export_lp {
                    fs::create_dir_all(&dir)?;
                    write_lp(&out.model, &dir.join("model.lp"))?;
                }
                rows.push(SummaryRow {
                    budget: m,
                    order,
                    status: serde_json::to_value(out.solution.status)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default(),
                    predicted_objective: Some(out.predicted),
                    linear_value: Some(out.linear_value),
                    interactions: Some(out.policy.len()),
                    nodes: Some(out.solution.stats.nodes),
                    lazy_constraints: Some(out.solution.stats.lazy_constraints),
                    rounds: Some(out.solution.stats.rounds),
                });
            }
            Err(e @ Error::GuardExceeded { .. }) => {
                eprintln!("budget {m}: {e}");
                rows.push(SummaryRow {
                    budget: m,
                    order,
                    status: "guard-exceeded".into(),
                    predicted_objective: None,
                    linear_value: None,
                    interactions: None,
                    nodes: None,
                    lazy_constraints: None,
                    rounds: None,
                });
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(io::Error::other(e.to_string())))?;
    write_atomic(&exp.out_dir.join("summary.csv"), &bytes)?;
    io::stdout().write_all(&bytes)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn baseline_policy(graph: &SocialGraph, exp: &Experiment, kind: BaselineKind) -> Result<Policy> {
    match kind {
        BaselineKind::RandomAppend => random_append(graph, &graph.targets(), exp.seed),
        BaselineKind::CentralityAsc | BaselineKind::CentralityDesc => {
            let weights = graph_susceptibilities(graph, &exp.coeffs)?;
            let scores = eigenvector_centrality(graph, &weights, 1e-10, 100_000)?.scores;
            let direction = if matches!(kind, BaselineKind::CentralityAsc) {
                Direction::Ascending
            } else {
                Direction::Descending
            };
            centrality_policy(graph, &scores, direction)
        }
    }
}

fn cmd_baseline(exp: &Experiment, kind: BaselineKind, out: Option<PathBuf>) -> Result<()> {
    let (graph, _) = exp.load_graph()?;
    let full = baseline_policy(&graph, exp, kind)?;
    let name = kind.name();
    let mut written = Vec::new();
    if exp.budgets.len() <= 1 {
        let policy = match exp.budgets.first() {
            Some(&m) => full.truncate_to_budget(&graph, m),
            None => full,
        };
        let path = out.unwrap_or_else(|| exp.out_dir.join(format!("baseline-{name}.json")));
        write_json(&path, &PolicyFile::new(&graph, &policy, name, Some(exp.seed)))?;
        written.push(path);
    } else {
        let dir = out.unwrap_or_else(|| exp.out_dir.clone());
        for &m in &exp.budgets {
            let path = dir.join(format!("baseline-{name}-m{m}.json"));
            let policy = full.truncate_to_budget(&graph, m);
            write_json(&path, &PolicyFile::new(&graph, &policy, name, Some(exp.seed)))?;
            written.push(path);
        }
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_simulate(
    exp: &Experiment,
    files: &[PathBuf],
    crn: bool,
    per_target: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let (graph, _) = exp.load_graph()?;
    let mut policies = Vec::new();
    for path in files {
        let text = fs::read_to_string(path)?;
        let file: PolicyFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })?;
        let policy = file.to_policy(&graph)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.provenance.clone());
        if exp.budgets.is_empty() {
            policies.push((stem, policy));
        } else {
            for &m in &exp.budgets {
                policies.push((format!("{stem}@m{m}"), policy.truncate_to_budget(&graph, m)));
            }
        }
    }
    let reports = compare_policies(&graph, &policies, &exp.coeffs, exp.replications, exp.seed, crn)?;
    let mut buf = Vec::new();
    write_reports_csv(&reports, &mut buf, per_target)?;
    let path = out.unwrap_or_else(|| exp.out_dir.join("simulation.csv"));
    write_atomic(&path, &buf)?;
    write_json(&path.with_extension("json"), &reports)?;
    io::stdout().write_all(&buf)?;
    Ok(())
}

fn cmd_export_lp(exp: &Experiment, run_solver: bool, out: Option<PathBuf>) -> Result<()> {
    let (graph, _) = exp.load_graph()?;
    let m = match exp.budgets.as_slice() {
        [m] => *m,
        [] => return Err(Error::Missing("budget (--budget or \"budget\" in the config)".into())),
        _ => return Err(Error::InvalidParameter("export-lp takes a single budget".into())),
    };
    let product = ProductModel::from_graph(&graph, &exp.coeffs)?;
    let mut model = build_formulation(&graph, &graph.targets(), m, exp.order, &product)?;
    if run_solver {
        solve(&mut model)?;
    }
    let path = out.unwrap_or_else(|| {
        exp.out_dir
            .join(format!("model-o{}-m{m}.lp", u8::from(exp.order)))
    });
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_lp(&model, &path)?;
    println!(
        "{} ({} variables, {} constraints)",
        path.display(),
        model.vars.len(),
        model.constraints.len()
    );
    Ok(())
}
