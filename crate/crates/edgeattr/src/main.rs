use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgeattr::bench::{loglog_slope, scaling_benchmark, synthetic_graph, write_timings};
use edgeattr::edges::{load_graph, write_edges};
use edgeattr::report::{
    read_labels, read_model, read_ranking_csv, read_ranking_json, write_cluster_profiles, write_labels, write_model,
    write_precision_table, write_ranking_csv, write_ranking_json, Format,
};
use edgeattr::schema::{parse_schema, schema_to_json};
use edgeattr::synth::{config_to_json, generate, parse_config, SynthConfig};
use edgeattr::{Error, Result};
use edgeattr_core::cluster::XMeansConfig;
use edgeattr_core::eval::precision_at_k;
use edgeattr_core::graph::{AttributedMultigraph, GraphSchema};
use edgeattr_core::pipeline::{fit_model, score_graph, PipelineConfig};

/// Rank nodes of an edge-attributed graph by how abnormal their edges are.
#[derive(Parser)]
#[command(name = "edgeattr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit (or load) cluster models and write per-object-type rankings.
    Score(ScoreArgs),
    /// Generate a labeled synthetic rating graph.
    Synth(SynthArgs),
    /// Precision@k of a ranking against labels.
    Eval(EvalArgs),
    /// Time the pipeline on nested edge subsamples.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Bins for numerical and temporal attributes.
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Smoothing added to model distributions inside KL.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Smallest cluster count X-means starts from.
    #[arg(long, default_value_t = 1)]
    kmin: usize,
    /// Largest cluster count X-means may reach.
    #[arg(long, default_value_t = 25)]
    kmax: usize,
    /// Lloyd iteration cap per k-means run.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Seed for k-means++ seeding.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            bins: self.bins,
            epsilon: self.epsilon,
            xmeans: XMeansConfig {
                k_min: self.kmin,
                k_max: self.kmax,
                max_iterations: self.max_iterations,
                seed: self.seed,
                ..XMeansConfig::default()
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ScoreArgs {
    /// Schema JSON document.
    #[arg(long)]
    schema: PathBuf,
    /// Edge CSV: relation,source,target,<attributes>.
    #[arg(long)]
    edges: PathBuf,
    /// Optional node,object_type CSV declaring nodes without edges.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Directory for rankings and the cluster-profile table.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Only write the top K nodes of each ranking.
    #[arg(long)]
    top_k: Option<usize>,
    /// Score with this exported model instead of fitting one.
    #[arg(long)]
    model_in: Option<PathBuf>,
    /// Where to export the model [default: <out-dir>/model.json].
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Ranking file format.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator config JSON [default: built-in population].
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for edges.csv, labels.csv, schema.json and config.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Ranking file (.csv or .json).
    #[arg(long)]
    ranking: PathBuf,
    /// Labels CSV: node,label.
    #[arg(long)]
    labels: PathBuf,
    /// Cutoffs, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 50, 100])]
    k: Vec<usize>,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Schema of the graph to benchmark (with --edges) [default: synthetic].
    #[arg(long, requires = "edges")]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    edges: Option<PathBuf>,
    /// Edge count of the synthetic graph.
    #[arg(long, default_value_t = 1_000_000)]
    synthetic_edges: usize,
    /// Subsample fractions, ascending, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])]
    fractions: Vec<f64>,
    /// Seed for the synthetic graph and the subsample order.
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Output CSV: edges,seconds.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes a file through `emit`, flushing before returning.
fn write_file(path: &Path, emit: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    emit(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn load_schema(path: &Path) -> Result<GraphSchema> {
    parse_schema(&read_text(path)?).map_err(|source| Error::Schema { path: path.into(), source })
}

fn load_inputs(schema: &Path, edges: &Path, nodes: Option<&Path>) -> Result<AttributedMultigraph> {
    let schema = load_schema(schema)?;
    load_graph(edges, nodes, schema)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let config = args.model.config();
    let started = Instant::now();
    let graph = load_inputs(&args.schema, &args.edges, args.nodes.as_deref())?;
    eprintln!("loaded {} nodes, {} edges", graph.node_count(), graph.edge_count());
    let model = match &args.model_in {
        Some(path) => {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            read_model(BufReader::new(f)).map_err(|source| Error::Json { path: path.clone(), source })?
        }
        None => {
            let model = fit_model(&graph, &config)?;
            eprintln!("fitted {} attribute models", model.entries.len());
            model
        }
    };
    let rankings = score_graph(&graph, &model, &config)?;
    create_dir(&args.out_dir)?;
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    for ranking in &rankings {
        let path = args.out_dir.join(format!("ranking_{}.{}", ranking.object_type, format.extension()));
        write_file(&path, |w| match format {
            Format::Csv => write_ranking_csv(ranking, &model, args.top_k, w),
            Format::Json => write_ranking_json(ranking, args.top_k, w),
        })?;
        eprintln!("wrote {}", path.display());
    }
    let model_path = args.model_out.clone().unwrap_or_else(|| args.out_dir.join("model.json"));
    write_file(&model_path, |w| write_model(&model, w))?;
    let profiles = args.out_dir.join("cluster_profiles.csv");
    write_file(&profiles, |w| write_cluster_profiles(&model, w))?;
    eprintln!("wrote {} and {} in {:.2}s", model_path.display(), profiles.display(), started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => parse_config(&read_text(path)?).map_err(|source| Error::Json { path: path.clone(), source })?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let labeled = generate(&config)?;
    create_dir(&args.out_dir)?;
    let dir = &args.out_dir;
    write_file(&dir.join("edges.csv"), |w| write_edges(&labeled.graph, w))?;
    write_file(&dir.join("labels.csv"), |w| write_labels(&labeled.labels, w))?;
    write_file(&dir.join("schema.json"), |w| w.write_all(schema_to_json(labeled.graph.schema()).as_bytes()))?;
    write_file(&dir.join("config.json"), |w| w.write_all(config_to_json(&config).as_bytes()))?;
    let fraud = labeled.labels.values().filter(|l| l.is_fraud()).count();
    eprintln!(
        "generated {} users ({} fraud), {} edges into {}",
        labeled.labels.len(),
        fraud,
        labeled.graph.edge_count(),
        dir.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let path = &args.ranking;
    let f = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let ranking = if path.extension().is_some_and(|e| e == "json") {
        read_ranking_json(f).map_err(|source| Error::Json { path: path.clone(), source })?
    } else {
        read_ranking_csv(f, "").map_err(|source| Error::Csv { path: path.clone(), source })?
    };
    let f = File::open(&args.labels).map_err(|e| Error::io(&args.labels, e))?;
    let labels = read_labels(BufReader::new(f)).map_err(|source| Error::Csv { path: args.labels.clone(), source })?;
    let rows = args
        .k
        .iter()
        .map(|&k| Ok((k, precision_at_k(&ranking, &labels, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Vec::new();
    write_precision_table(&rows, &mut table).expect("in-memory write");
    std::io::stdout().write_all(&table).map_err(|e| Error::io("<stdout>", e))?;
    if let Some(out) = &args.out {
        write_file(out, |w| w.write_all(&table))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let config = args.model.config();
    let graph = match (&args.schema, &args.edges) {
        (Some(schema), Some(edges)) => load_inputs(schema, edges, None)?,
        _ => {
            eprintln!("generating {} synthetic edges", args.synthetic_edges);
            synthetic_graph(args.synthetic_edges, args.sample_seed)?
        }
    };
    let timings = scaling_benchmark(&graph, &args.fractions, &config, args.sample_seed, |t| {
        eprintln!("{} edges: {:.3}s", t.edges, t.seconds)
    })?;
    write_file(&args.out, |w| write_timings(&timings, w))?;
    match loglog_slope(&timings) {
        Some(s) => eprintln!("log-log slope {s:.3}"),
        None => eprintln!("log-log slope undefined (need two timed sizes)"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Score(a) => cmd_score(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
