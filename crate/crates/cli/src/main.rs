use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wave_core::browse::BrowseParams;
use wave_core::classify::{ScaleRegistry, View};
use wave_core::composition::{nest_many, NestedJson};
use wave_core::fixtures::{geographical_scale, Workspace};
use wave_core::ingest::{parse_records, Dataset, HostTable};
use wave_core::layout::{export_dot, layout_lattice, layout_nested, DiagramLayout};
use wave_core::lattice::LatticeJson;
use wave_core::{apposition, ConceptLattice, FormalContext, Scale, ScaleKind};
use wave_server::ServerConfig;

/// Formal concept analysis over document metadata.
#[derive(Parser)]
#[command(name = "wave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One JSON line per concept of a context, in lectic order
    Concepts {
        context: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Concept lattice with layout, as JSON or DOT
    Lattice {
        context: PathBuf,
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Instantiate scales over a record file and appose them
    Scale {
        records: PathBuf,
        /// Scale files, or names of scales derived from the records
        #[arg(required = true)]
        scales: Vec<String>,
        #[command(flatten)]
        scaling: ScalingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Nested diagram of two or more scales, outermost first
    Nest {
        records: PathBuf,
        outer: String,
        inner: String,
        /// Further scales, nested inside `inner`
        more: Vec<String>,
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        scaling: ScalingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Conceptual class of one document under a view
    Classify {
        records: PathBuf,
        view: PathBuf,
        document: String,
        /// Scale files the view refers to
        #[arg(long = "scale")]
        scales: Vec<String>,
        #[command(flatten)]
        scaling: ScalingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Start the HTTP server (bundled Ethnic Cooking data unless --records)
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long = "scale")]
        scales: Vec<String>,
        #[arg(long)]
        view: Option<PathBuf>,
        /// Directory served at `/`
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Default neighborhood threshold for new sessions
        #[arg(long)]
        threshold: Option<usize>,
        #[command(flatten)]
        scaling: ScalingArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Replace the thresholds or cuts of the last numeric scale file
    #[arg(long, value_delimiter = ',', num_args = 1)]
    cuts: Option<Vec<f64>>,
    /// Geographical `.tbl` file, registered as the `location` scale
    #[arg(long, requires = "hosts")]
    geo: Option<PathBuf>,
    /// Host suffix to city table for the `location` scale
    #[arg(long, requires = "geo")]
    hosts: Option<PathBuf>,
}

type Failure = Box<dyn std::error::Error>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn emit(out: &OutArgs, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Records plus a registry holding the derived scales, the location scale
/// and the given scale files. Returns the names of `specs` in order.
fn load(records: &Path, specs: &[String], scaling: &ScalingArgs) -> Result<(Dataset, ScaleRegistry, Vec<String>), Failure> {
    let dataset = parse_records(&read(records)?)?;
    let mut registry = ScaleRegistry::new().with_standard_scales(&dataset.records)?;
    if let (Some(geo), Some(hosts)) = (&scaling.geo, &scaling.hosts) {
        registry = registry.with_location(geographical_scale(&read(geo)?)?, HostTable::parse(&read(hosts)?)?);
    }
    let mut files = Vec::new();
    let mut names = Vec::new();
    for spec in specs {
        let path = Path::new(spec);
        if path.is_file() {
            let scale = Scale::parse_file(&read(path)?)?;
            names.push(scale.name.clone());
            files.push(scale);
        } else if registry.contains(spec) {
            names.push(spec.clone());
        } else {
            return Err(format!("`{spec}` is neither a scale file nor a known scale").into());
        }
    }
    if let Some(cuts) = &scaling.cuts {
        let target = files
            .iter_mut()
            .rev()
            .find(|s| matches!(s.kind, ScaleKind::Ordinal { .. } | ScaleKind::Interordinal { .. }))
            .ok_or("--cuts needs a numeric scale file")?;
        *target = target.with_values(cuts)?;
    }
    for scale in files {
        registry.insert(scale);
    }
    Ok((dataset, registry, names))
}

#[derive(Serialize)]
struct ConceptLine {
    id: usize,
    extent: Vec<String>,
    intent: Vec<String>,
}

#[derive(Serialize)]
struct LatticeOutput {
    lattice: LatticeJson,
    layout: DiagramLayout,
}

#[derive(Serialize)]
struct NestOutput {
    scales: Vec<String>,
    #[serde(flatten)]
    nested: NestedJson,
    layout: DiagramLayout,
}

#[derive(Serialize)]
struct ClassifyOutput {
    document: String,
    concept: usize,
    facets: Vec<String>,
    intent: Vec<String>,
    extent: Vec<String>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Concepts { context, out } => {
            let ctx = FormalContext::parse(&read(&context)?)?;
            let lat = ConceptLattice::build(&ctx);
            let mut text = String::new();
            for (id, c) in lat.concepts().iter().enumerate() {
                let line = ConceptLine {
                    id,
                    extent: ctx.object_names(&c.extent),
                    intent: ctx.attribute_names(&c.intent),
                };
                text.push_str(&serde_json::to_string(&line)?);
                text.push('\n');
            }
            emit(&out, &text)
        }
        Command::Lattice { context, dot, out } => {
            let lat = ConceptLattice::build(&FormalContext::parse(&read(&context)?)?);
            let layout = layout_lattice(&lat);
            if dot {
                emit(&out, &export_dot(&layout))
            } else {
                emit(
                    &out,
                    &json(&LatticeOutput {
                        lattice: lat.to_json(),
                        layout,
                    }),
                )
            }
        }
        Command::Scale {
            records,
            scales,
            scaling,
            out,
        } => {
            let (dataset, registry, names) = load(&records, &scales, &scaling)?;
            let ctxs = names
                .iter()
                .map(|n| registry.apply(n, &dataset.records))
                .collect::<Result<Vec<_>, _>>()?;
            let ctx = apposition(&ctxs.iter().collect::<Vec<_>>())?;
            emit(&out, &json(&ctx))
        }
        Command::Nest {
            records,
            outer,
            inner,
            more,
            dot,
            scaling,
            out,
        } => {
            let specs: Vec<String> = [outer, inner].into_iter().chain(more).collect();
            let (dataset, registry, names) = load(&records, &specs, &scaling)?;
            let ctxs = names
                .iter()
                .map(|n| registry.apply(n, &dataset.records))
                .collect::<Result<Vec<_>, _>>()?;
            let nd = nest_many(&ctxs, None)?;
            let layout = layout_nested(&nd);
            if dot {
                emit(&out, &export_dot(&layout))
            } else {
                emit(
                    &out,
                    &json(&NestOutput {
                        scales: names,
                        nested: nd.to_json(),
                        layout,
                    }),
                )
            }
        }
        Command::Classify {
            records,
            view,
            document,
            scales,
            scaling,
            out,
        } => {
            let (dataset, registry, _) = load(&records, &scales, &scaling)?;
            let view = View::parse("view", &read(&view)?)?.rebuild(&registry, &dataset.records)?;
            let doc = dataset
                .get(&document)
                .ok_or_else(|| wave_core::Error::UnknownObject(document.clone()))?;
            let concept = view.classify_document(&registry, doc)?;
            let lat = &view.built()?.lattice;
            let c = lat.concept(concept)?;
            emit(
                &out,
                &json(&ClassifyOutput {
                    document,
                    concept,
                    facets: view.document_attributes(&registry, doc)?.unwrap_or_default(),
                    intent: lat.context().attribute_names(&c.intent),
                    extent: lat.context().object_names(&c.extent),
                }),
            )
        }
        Command::Serve {
            port,
            records,
            scales,
            view,
            static_dir,
            threshold,
            scaling,
        } => {
            let workspace = match &records {
                None => Workspace::ethnic_cooking()?,
                Some(records) => {
                    let (dataset, registry, names) = load(records, &scales, &scaling)?;
                    let view = match &view {
                        Some(path) => View::parse("view", &read(path)?)?,
                        None => View::new("view", names)?,
                    };
                    let view = view.rebuild(&registry, &dataset.records)?;
                    Workspace {
                        dataset,
                        registry,
                        view,
                    }
                }
            };
            let mut defaults = BrowseParams::default();
            if let Some(t) = threshold {
                defaults.threshold = t;
            }
            let config = ServerConfig {
                port,
                static_dir,
                defaults,
                ..Default::default()
            };
            tokio::runtime::Runtime::new()?.block_on(wave_server::serve(workspace, config))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAVE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wave: {e}");
            ExitCode::from(1)
        }
    }
}
