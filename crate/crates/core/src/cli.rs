//! The `archtaint` command line.
//!
//! Exit status: 0 when every check passes, 1 when a valid input fails a
//! check, 2 for usage and input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::arch::{parse_spec_with_diagnostics, serialize_spec, ArchitectureSpec};
use crate::firewall::{
    audit, generate_ruleset, parse_assertions, parse_ruleset, serialize_ruleset, HostAddr,
    HostSelector,
};
use crate::report::{analyze, criticality_metrics, export_dot, user_view};
use crate::taint::{synthesize_max_policy, Label};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "archtaint", version, about = "Taint-label privacy analysis for software architectures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check taint, boundary and lint rules and list findings.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List every flow the labels and system boundaries permit.
    Flows { file: PathBuf },
    /// Remove offending flows and print the repaired document.
    Repair {
        file: PathBuf,
        /// Write the repaired document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show where one label may be held and where it flows.
    View {
        file: PathBuf,
        #[arg(long)]
        label: String,
    },
    /// Print per-node and per-label criticality metrics.
    Metrics { file: PathBuf },
    /// Render the architecture as a Graphviz digraph.
    Dot {
        file: PathBuf,
        /// Highlight edges with findings.
        #[arg(long)]
        findings: bool,
    },
    /// Generate the host firewall for an address, node or system.
    #[command(name = "fw-gen")]
    FwGen {
        file: PathBuf,
        #[arg(long)]
        host: String,
    },
    /// Check reachability assertions against a ruleset.
    #[command(name = "fw-audit")]
    FwAudit {
        rules: PathBuf,
        /// Address of the host the ruleset is installed on.
        #[arg(long)]
        on: String,
        #[arg(long = "assert")]
        assertions: PathBuf,
    },
}

/// Outcome of a subcommand that could not run: message and exit status.
struct Failure(String, i32);

fn input_error(msg: impl std::fmt::Display) -> Failure {
    Failure(msg.to_string(), EXIT_USAGE)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path, err: &mut dyn Write) -> Result<ArchitectureSpec, Failure> {
    let text = read(path)?;
    let (spec, diagnostics) = parse_spec_with_diagnostics(&text)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    for d in diagnostics {
        let _ = writeln!(err, "warning: {}: {d}", path.display());
    }
    Ok(spec)
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(msg, code)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| input_error(e);
    match cmd {
        Command::Check { file, format } => {
            let spec = load_spec(&file, err)?;
            let analysis = analyze(&spec).map_err(input_error)?;
            let text = match format {
                Format::Text => analysis.to_text(),
                Format::Tsv => analysis.to_tsv(),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if analysis.is_clean() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Flows { file } => {
            let spec = load_spec(&file, err)?;
            let labels = spec.effective_labels().map_err(input_error)?;
            spec.layout.validate(&spec.graph).map_err(input_error)?;
            let nodes: Vec<_> = spec.graph.nodes().iter().cloned().collect();
            let flows = synthesize_max_policy(&nodes, &labels, Some(&spec.layout));
            for e in flows.edges() {
                writeln!(out, "edge {e}").map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Repair { file, out: target } => {
            let spec = load_spec(&file, err)?;
            let analysis = analyze(&spec).map_err(input_error)?;
            let removed: Vec<_> = analysis
                .findings
                .iter()
                .filter(|f| f.kind == crate::report::FindingKind::TaintViolation)
                .filter_map(|f| f.edge().cloned())
                .collect();
            let mut repaired = spec.clone();
            repaired.graph = spec.graph.remove_edges(&removed);
            for e in &removed {
                writeln!(out, "# removed: {e}").map_err(io)?;
            }
            let doc = serialize_spec(&repaired);
            match target {
                Some(path) => fs::write(&path, doc)
                    .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
                None => out.write_all(doc.as_bytes()).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::View { file, label } => {
            let spec = load_spec(&file, err)?;
            let label = Label::new(label).map_err(input_error)?;
            let view = user_view(&spec, &label).map_err(input_error)?;
            if !view.known {
                let _ = writeln!(err, "warning: label `{label}` does not occur in {}", file.display());
            }
            out.write_all(view.to_text().as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Metrics { file } => {
            let spec = load_spec(&file, err)?;
            let metrics = criticality_metrics(&spec).map_err(input_error)?;
            out.write_all(metrics.to_text().as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Dot { file, findings } => {
            let spec = load_spec(&file, err)?;
            let found = if findings {
                analyze(&spec).map_err(input_error)?.findings
            } else {
                Vec::new()
            };
            out.write_all(export_dot(&spec, &found).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::FwGen { file, host } => {
            let spec = load_spec(&file, err)?;
            let analysis = analyze(&spec).map_err(input_error)?;
            if !analysis.is_clean() {
                let _ = write!(err, "{}", analysis.to_text());
                return Err(Failure(
                    "refusing to generate a firewall for a model with violations".into(),
                    EXIT_FAILED,
                ));
            }
            let selector: HostSelector = host.parse().unwrap_or_else(|e| match e {});
            let rs = generate_ruleset(&spec, &selector).map_err(input_error)?;
            out.write_all(serialize_ruleset(&rs).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::FwAudit {
            rules,
            on,
            assertions,
        } => {
            let host: HostAddr = on.parse().map_err(input_error)?;
            let rs = parse_ruleset(&read(&rules)?)
                .map_err(|e| input_error(format!("{}: {e}", rules.display())))?
                .installed_on(host);
            let list = parse_assertions(&read(&assertions)?)
                .map_err(|e| input_error(format!("{}: {e}", assertions.display())))?;
            let report = audit(&rs, &list);
            write!(out, "{report}").map_err(io)?;
            Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}
