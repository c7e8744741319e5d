use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, IsTerminal, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use apr_cli::server::{serve, AppState};
use apr_cli::store::ProjectStore;
use apr_cli::{exit, load_config, load_knowledge_base, render};
use apr_core::ekdb::{default_tag_filter, ingest_posts, load_corpus, save_corpus, LsiIndex};
use apr_core::{evaluate, recommend, AprError, EvalCase, RequirementsSpec, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "apr", version, about = "Architecture pattern recommendation from requirements")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a Posts dump by tags into a corpus directory.
    Ingest {
        #[arg(long)]
        dump: PathBuf,
        /// Comma separated tag filter; defaults to the architecture tags.
        #[arg(long, value_delimiter = ',')]
        tags: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a latent semantic index over a corpus directory.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        rank_k: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recommend patterns for one requirements spec.
    Recommend {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
        /// Also print per-term contributions (text format).
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// NFR priority as name=n, smaller is more important. Repeatable.
        #[arg(long = "priority", value_name = "NAME=N")]
        priorities: Vec<String>,
    },
    /// Run every evaluation case in a directory and report rank hits.
    Eval {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "apr-data")]
        data_dir: PathBuf,
    },
}

fn io_err(path: &Path, source: io::Error) -> AprError {
    AprError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_priorities(raw: &[String]) -> Result<BTreeMap<String, i64>> {
    raw.iter()
        .map(|entry| {
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| AprError::InvalidInput(format!("priority {entry:?} is not NAME=N")))?;
            let value = value.trim().parse().map_err(|_| {
                AprError::InvalidInput(format!("priority {entry:?} needs an integer"))
            })?;
            Ok((name.trim().to_lowercase(), value))
        })
        .collect()
}

/// Asks on the terminal for a priority of every NFR in the conflicting pairs.
fn prompt_priorities(
    pairs: &[(String, String)],
    priorities: &mut BTreeMap<String, i64>,
) -> Result<()> {
    let names: BTreeSet<&String> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    eprintln!("Conflicting NFRs need distinct priorities (1 = most important):");
    for (a, b) in pairs {
        eprintln!("  {a} <-> {b}");
    }
    for name in names {
        loop {
            eprint!("priority for {name}: ");
            let _ = io::stderr().flush();
            let line = match lines.next() {
                Some(line) => line.map_err(|e| io_err(Path::new("<stdin>"), e))?,
                None => return Err(AprError::ResolutionRequired { pairs: pairs.to_vec() }),
            };
            match line.trim().parse::<i64>() {
                Ok(p) => {
                    priorities.insert(name.clone(), p);
                    break;
                }
                Err(_) => eprintln!("please enter an integer"),
            }
        }
    }
    Ok(())
}

fn write_stdout(s: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(s.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { dump, tags, out } => {
            let filter: BTreeSet<String> = if tags.is_empty() {
                default_tag_filter()
            } else {
                tags.iter().map(|t| t.trim().to_lowercase()).collect()
            };
            let ingested = ingest_posts(&dump, &filter)?;
            save_corpus(&out, &ingested.posts)?;
            eprintln!(
                "ingested {} posts into {} ({} rows skipped)",
                ingested.posts.len(),
                out.display(),
                ingested.skipped_rows
            );
        }
        Command::Index {
            corpus,
            rank_k,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let posts = load_corpus(&corpus)?;
            let kb = apr_core::KnowledgeBase::bundled(None);
            let index = LsiIndex::build(&posts, rank_k.unwrap_or(cfg.rank_k), &kb.stop_words)?;
            index.save(&out)?;
            eprintln!(
                "indexed {} documents, {} terms, rank {} into {}",
                index.documents().len(),
                index.terms().len(),
                index.rank_k(),
                out.display()
            );
        }
        Command::Recommend {
            spec,
            catalog,
            index,
            config,
            top,
            trace,
            format,
            priorities,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(top) = top {
                cfg.top = top;
            }
            cfg.validate()?;
            let spec = RequirementsSpec::load(&spec)?;
            let kb = load_knowledge_base(catalog.as_deref(), Some(&index))?;
            let mut priorities = parse_priorities(&priorities)?;
            let set = loop {
                match recommend(&spec, &kb, &cfg, &priorities) {
                    Err(AprError::ResolutionRequired { pairs }) if io::stdin().is_terminal() => {
                        prompt_priorities(&pairs, &mut priorities)?;
                    }
                    other => break other?,
                }
            };
            match format {
                Format::Machine => write_stdout(&set.to_machine_format())?,
                Format::Text => {
                    let mut text = render::recommendations_text(&set);
                    if trace {
                        text.push('\n');
                        text.push_str(&render::trace_text(&set));
                    }
                    write_stdout(&text)?;
                }
            }
        }
        Command::Eval {
            cases,
            catalog,
            index,
            config,
            format,
        } => {
            let cfg = load_config(config.as_deref())?;
            let cases = EvalCase::load_dir(&cases)?;
            let kb = load_knowledge_base(catalog.as_deref(), Some(&index))?;
            let report = evaluate(&cases, &kb, &cfg)?;
            if report.invalid_cases > 0 {
                log::warn!("{} invalid evaluation cases excluded", report.invalid_cases);
            }
            match format {
                Format::Machine => {
                    let mut json =
                        serde_json::to_string_pretty(&report).expect("report serializes");
                    json.push('\n');
                    write_stdout(&json)?;
                }
                Format::Text => write_stdout(&report.to_table())?,
            }
        }
        Command::Serve {
            port,
            host,
            catalog,
            index,
            config,
            data_dir,
        } => {
            let cfg = load_config(config.as_deref())?;
            let kb = load_knowledge_base(catalog.as_deref(), index.as_deref())?;
            if kb.index.is_none() {
                log::warn!("no index given; recommend requests will fail");
            }
            let store = ProjectStore::open(&data_dir).map_err(|e| match e {
                apr_cli::store::StoreError::Io(e) => io_err(&data_dir, e),
                other => AprError::Config(other.to_string()),
            })?;
            let state = Arc::new(AppState {
                kb,
                config: cfg,
                store,
            });
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| io_err(Path::new("<runtime>"), e))?;
            let addr = SocketAddr::new(host, port);
            runtime
                .block_on(serve(state, addr))
                .map_err(|e| io_err(Path::new(&addr.to_string()), e))?;
        }
    }
    Ok(())
}

fn report(err: &AprError) {
    eprintln!("error: {err}");
    match err {
        AprError::Validation(fields) => {
            for f in fields {
                eprintln!("  {f}");
            }
        }
        AprError::ResolutionRequired { pairs } => {
            for (a, b) in pairs {
                eprintln!("  conflict: {a} <-> {b}");
            }
            eprintln!("  pass --priority NAME=N for each, or run interactively");
        }
        _ => {}
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(err) => {
            report(&err);
            ExitCode::from(exit::code_for(&err) as u8)
        }
    }
}
