use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use mmt_cli::{Format, Outcome, Request, Service, ServiceConfig};
use mmt_core::uri::parse_uri;

#[derive(Parser)]
#[command(name = "mmt", version, about = "Validate, query and present modular theory libraries")]
struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "MMT_STORE", default_value = ".mmt-store")]
    store: PathBuf,
    /// Also serve theories with this meta-theory by the syntactic foundation.
    #[arg(long = "plugin", global = true, value_name = "META-URI")]
    plugins: Vec<String>,
    /// Run typed validation on every commit.
    #[arg(long, global = true)]
    typed_commits: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Grammar,
    Structural,
    Typed,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Lines,
    Xml,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresentFormat {
    Text,
    Html,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Backward,
    Forward,
}

#[derive(Subcommand)]
enum Command {
    /// Check documents without committing them.
    Validate {
        #[arg(long, value_enum, default_value = "structural")]
        level: Level,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// List the constants of a theory, imported ones included.
    Flatten {
        theory: String,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
    },
    /// Print the XML of a document, module or declaration.
    Deref {
        uri: String,
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        self_contained: bool,
    },
    /// Evaluate a relation expression from a start individual.
    Query {
        start: String,
        rel: String,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
    },
    /// Modules a module depends on, or that depend on it.
    Cone {
        module: String,
        #[arg(long, value_enum, default_value = "backward")]
        direction: Dir,
        /// Only direct dependencies.
        #[arg(long)]
        one_step: bool,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
    },
    /// Render an item with notations.
    Present {
        uri: String,
        #[arg(long)]
        style: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: PresentFormat,
    },
    /// Validate and store documents as a new revision.
    Commit {
        #[arg(short, long, default_value = "")]
        message: String,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Rename a module and patch everything that refers to it.
    Rename {
        module: String,
        new_name: String,
        #[arg(long, value_enum, default_value = "lines")]
        format: OutFormat,
    },
    /// Print the facts extracted from a document.
    Abox { doc: String },
    /// Serve the store over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

fn fmt(f: OutFormat) -> Format {
    match f {
        OutFormat::Lines => Format::Lines,
        OutFormat::Xml => Format::Xml,
    }
}

fn read_files(paths: &[PathBuf]) -> Result<Vec<(String, Vec<u8>)>, String> {
    paths
        .iter()
        .map(|p| std::fs::read(p).map(|b| (p.display().to_string(), b)).map_err(|e| format!("{}: {e}", p.display())))
        .collect()
}

fn fail(msg: &str, code: u8) -> ExitCode {
    eprintln!("mmt: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut syntactic_metas = Vec::new();
    for p in &cli.plugins {
        match parse_uri(p) {
            Ok(u) => syntactic_metas.push(u),
            Err(e) => return fail(&e.to_string(), 2),
        }
    }
    // Validation without a store runs against an empty scratch store.
    let scratch;
    let root = if matches!(cli.command, Command::Validate { .. }) && !cli.store.is_dir() {
        scratch = match tempfile::tempdir() {
            Ok(d) => d,
            Err(e) => return fail(&e.to_string(), 1),
        };
        scratch.path().to_path_buf()
    } else {
        cli.store.clone()
    };
    let service = match Service::open(&ServiceConfig { root, syntactic_metas, typed_commits: cli.typed_commits }) {
        Ok(s) => s,
        Err(e) => return fail(&e.to_string(), 1),
    };

    let (request, format) = match cli.command {
        Command::Serve { port, bind } => {
            let addr = SocketAddr::new(bind, port);
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => return fail(&e.to_string(), 1),
            };
            eprintln!("mmt: serving on http://{addr}");
            return match rt.block_on(mmt_cli::http::serve(Arc::new(service), addr)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e.to_string(), 1),
            };
        }
        Command::Validate { level, format, files } => {
            let files = match read_files(&files) {
                Ok(f) => f,
                Err(e) => return fail(&e, 1),
            };
            let level = match level {
                Level::Grammar => "grammar",
                Level::Structural => "structural",
                Level::Typed => "typed",
            };
            (Request::Validate { level: level.into(), files }, fmt(format))
        }
        Command::Commit { message, format, files } => {
            let files = match read_files(&files) {
                Ok(f) => f,
                Err(e) => return fail(&e, 1),
            };
            (Request::Commit { files, message }, fmt(format))
        }
        Command::Flatten { theory, format } => (Request::Flatten { theory }, fmt(format)),
        Command::Deref { uri, at, self_contained } => (Request::Deref { uri, at, self_contained }, Format::Xml),
        Command::Query { start, rel, format } => (Request::Query { start, rel }, fmt(format)),
        Command::Cone { module, direction, one_step, format } => {
            let direction = match direction {
                Dir::Backward => "backward",
                Dir::Forward => "forward",
            };
            (Request::Cone { module, direction: direction.into(), transitive: !one_step }, fmt(format))
        }
        Command::Present { uri, style, format } => {
            let target = match format {
                PresentFormat::Text => "text",
                PresentFormat::Html => "html",
            };
            (Request::Present { uri, style, target: target.into() }, Format::Lines)
        }
        Command::Rename { module, new_name, format } => (Request::Rename { module, new_name }, fmt(format)),
        Command::Abox { doc } => (Request::Abox { doc }, Format::Lines),
    };

    let response = service.handle(request, format);
    let to_stdout = matches!(response.outcome, Outcome::Ok | Outcome::Rejected);
    let out = if to_stdout {
        std::io::stdout().write_all(response.body.as_bytes())
    } else {
        std::io::stderr().write_all(response.body.as_bytes())
    };
    if let Err(e) = out {
        return fail(&e.to_string(), 1);
    }
    ExitCode::from(response.outcome.exit_code() as u8)
}
