mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use hyperbound::baselines::{self, BaselineResult, Method};
use hyperbound::engine::EngineConfig;
use hyperbound::io::{
    self, parse_capacity_file, parse_edge_list, render_selected_edges, render_summary,
    write_result_bundle, RunSummary, SummaryConfig, FORMAT_VERSION,
};
use hyperbound::metrics::{self, MatchingReport, RatioRecord, RunReport};
use hyperbound::{bsp, CapacityMap, EdgeId, Hypergraph};

use args::{Cli, Command, CompareArgs, GenArgs, GreedyArgs, InstanceArgs, OptimalArgs, RunArgs,
    ValidateArgs};

/// Exit 1: the invocation itself is wrong. Exit 2: the data is.
enum CliError {
    Usage(String),
    Data(String),
}

fn usage(err: impl ToString) -> CliError {
    CliError::Usage(err.to_string())
}

fn data(err: impl ToString) -> CliError {
    CliError::Data(err.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Greedy(args) => cmd_greedy(args),
        Command::Optimal(args) => cmd_optimal(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_instance(instance: &InstanceArgs) -> Result<(Hypergraph, CapacityMap), CliError> {
    let caps = match &instance.capacities {
        Some(path) => {
            let text = read_file(path)?;
            parse_capacity_file(&text, instance.capacity)
                .map_err(|e| data(format!("{}: {e}", path.display())))?
        }
        None => CapacityMap::uniform(instance.capacity),
    };
    let text = read_file(&instance.edges)?;
    let graph = parse_edge_list(&text, &caps)
        .map_err(|e| data(format!("{}: {e}", instance.edges.display())))?;
    Ok((graph, caps))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Selected edges go to `out` or stdout; the summary only to a file.
fn emit_selected_and_summary(
    out: &Option<PathBuf>,
    summary_path: &Option<PathBuf>,
    matching: &[EdgeId],
    summary_text: &str,
) -> Result<(), CliError> {
    match out {
        Some(path) => write_text(path, &render_selected_edges(matching))?,
        None => print!("{}", render_selected_edges(matching)),
    }
    if let Some(path) = summary_path {
        write_text(path, summary_text)?;
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let config = EngineConfig {
        ordering: args.ordering.spec(),
        max_rounds: args.max_rounds.0,
        early_stop: !args.no_early_stop,
    };
    // flag combinations are checked before any file is touched
    config.validate().map_err(usage)?;

    let (graph, caps) = load_instance(&args.instance)?;
    let outcome =
        bsp::parallel_run(&graph, &caps, &config, args.workers.get()).map_err(data)?;
    let report = metrics::report(&graph, &caps, &outcome.matching, &outcome.trace).map_err(data)?;
    let summary = RunSummary::new(
        SummaryConfig {
            seed: args.ordering.seed,
            ordering: config.ordering.kind_name().to_string(),
            max_rounds: config.max_rounds,
            early_stop: config.early_stop,
            default_capacity: args.instance.capacity,
        },
        report,
    );
    match (&args.out, &args.summary) {
        (Some(out), Some(summary_path)) => {
            write_result_bundle(out, summary_path, &outcome.matching, &summary).map_err(data)
        }
        _ => {
            let text = render_summary(&summary).map_err(data)?;
            emit_selected_and_summary(&args.out, &args.summary, &outcome.matching, &text)
        }
    }
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Greedy => "greedy",
        Method::Exact => "exact",
    }
}

/// Summary for the baseline subcommands.
#[derive(Serialize)]
struct MethodSummary {
    format: String,
    method: &'static str,
    seed: Option<u64>,
    ordering: Option<String>,
    default_capacity: u64,
    limit: Option<usize>,
    optimum: Option<usize>,
    report: MatchingReport,
}

fn render_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(data)?;
    text.push('\n');
    Ok(text)
}

fn cmd_greedy(args: GreedyArgs) -> Result<(), CliError> {
    let spec = args.ordering.spec();
    let (graph, caps) = load_instance(&args.instance)?;
    let result = baselines::greedy(&graph, &caps, &spec).map_err(data)?;
    let report = metrics::matching_report(&graph, &caps, &result.matching).map_err(data)?;
    let summary = MethodSummary {
        format: FORMAT_VERSION.to_string(),
        method: method_name(result.method),
        seed: Some(args.ordering.seed),
        ordering: Some(spec.kind_name().to_string()),
        default_capacity: args.instance.capacity,
        limit: None,
        optimum: None,
        report,
    };
    let text = render_json(&summary)?;
    emit_selected_and_summary(&args.out, &args.summary, &result.matching, &text)
}

fn cmd_optimal(args: OptimalArgs) -> Result<(), CliError> {
    let (graph, caps) = load_instance(&args.instance)?;
    let result: BaselineResult =
        baselines::exact_optimal(&graph, &caps, args.limit).map_err(data)?;
    let report = metrics::matching_report(&graph, &caps, &result.matching).map_err(data)?;
    let summary = MethodSummary {
        format: FORMAT_VERSION.to_string(),
        method: method_name(result.method),
        seed: None,
        ordering: None,
        default_capacity: args.instance.capacity,
        limit: Some(args.limit),
        optimum: result.optimum,
        report,
    };
    let text = render_json(&summary)?;
    emit_selected_and_summary(&args.out, &args.summary, &result.matching, &text)
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let edge_size = match args.size_zipf {
        Some((exponent, max_size)) => io::EdgeSizeModel::Zipf { exponent, max_size },
        None => io::EdgeSizeModel::Fixed(args.edge_size),
    };
    let popularity = match args.popularity_zipf {
        Some(exponent) => io::OwnerPopularity::Zipf { exponent },
        None => io::OwnerPopularity::Uniform,
    };
    let spec = io::GeneratorSpec {
        users: args.users,
        edges: args.edges,
        edge_size,
        popularity,
        seed: args.seed,
    };
    // everything here comes from flags, so failures are usage errors
    let graph = io::generate(&spec).map_err(usage)?;
    let text = io::serialize_edge_list(&graph);
    match &args.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ExactSection {
    optimum: usize,
    report: MatchingReport,
}

#[derive(Serialize)]
struct RatioSection {
    distributed_vs_greedy: RatioRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    distributed_vs_exact: Option<RatioRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    greedy_vs_exact: Option<RatioRecord>,
}

#[derive(Serialize)]
struct CompareSummary {
    format: String,
    config: SummaryConfig,
    exact_limit: usize,
    distributed: RunReport,
    greedy: MatchingReport,
    exact: Option<ExactSection>,
    ratios: RatioSection,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let spec = args.ordering.spec();
    let config = EngineConfig::new(spec);
    let (graph, caps) = load_instance(&args.instance)?;

    let outcome =
        bsp::parallel_run(&graph, &caps, &config, args.workers.get()).map_err(data)?;
    let distributed =
        metrics::report(&graph, &caps, &outcome.matching, &outcome.trace).map_err(data)?;
    let greedy_result = baselines::greedy(&graph, &caps, &spec).map_err(data)?;
    let greedy = metrics::matching_report(&graph, &caps, &greedy_result.matching).map_err(data)?;

    // the oracle blows up exponentially, so it is skipped rather than failed
    let exact = if graph.edge_count() <= args.limit {
        let result = baselines::exact_optimal(&graph, &caps, args.limit).map_err(data)?;
        let report = metrics::matching_report(&graph, &caps, &result.matching).map_err(data)?;
        Some(ExactSection {
            optimum: result.optimum.unwrap_or(0),
            report,
        })
    } else {
        None
    };

    let ratios = RatioSection {
        distributed_vs_greedy: metrics::compare(&distributed, &greedy).map_err(data)?,
        distributed_vs_exact: exact
            .as_ref()
            .map(|e| metrics::compare(&distributed, &e.report))
            .transpose()
            .map_err(data)?,
        greedy_vs_exact: exact
            .as_ref()
            .map(|e| metrics::compare(&greedy, &e.report))
            .transpose()
            .map_err(data)?,
    };
    let summary = CompareSummary {
        format: FORMAT_VERSION.to_string(),
        config: SummaryConfig {
            seed: args.ordering.seed,
            ordering: spec.kind_name().to_string(),
            max_rounds: config.max_rounds,
            early_stop: config.early_stop,
            default_capacity: args.instance.capacity,
        },
        exact_limit: args.limit,
        distributed,
        greedy,
        exact,
        ratios,
    };
    let text = render_json(&summary)?;
    match &args.summary {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let (graph, caps) = load_instance(&args.instance)?;
    for diagnostic in graph.validate(&caps) {
        println!("{diagnostic}");
    }
    Ok(())
}
