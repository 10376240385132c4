//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 arithmetic
//! overflow, 3 output I/O failure. Nothing is written to standard output
//! before a command has fully succeeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::classify::{
    classify, exhaustive_coverage, simulate_cohort, AssessmentOutcome, CohortConfig,
};
use crate::error::Error;
use crate::ontology::{parse_tree, ConceptId, OntologyTree};
use crate::plans::compile_plans;
use crate::predict::{plot_points, predict_polynomial, render_plot_csv, render_table};
use crate::rules::{generate_rules, verify_count};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_OVERFLOW: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ontorules",
    version,
    about = "Classified rule prediction and generation for ontology trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateFormat {
    Machine,
    Plans,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict the rule count and print the term decomposition.
    Predict {
        file: PathBuf,
        /// Override the number of assessment states per leaf.
        #[arg(long)]
        states: Option<u32>,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
    /// Generate the complete rule set as JSON lines or agent plans.
    Generate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "machine")]
        format: GenerateFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify one assessment outcome.
    #[command(group(ArgGroup::new("input").required(true).args(["outcomes", "default"])))]
    Classify {
        file: PathBuf,
        #[arg(long)]
        desired: String,
        /// Comma-separated `leaf=P` / `leaf=F` pairs.
        #[arg(long)]
        outcomes: Option<String>,
        /// Ask for the ground concept, with no outcome.
        #[arg(long)]
        default: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
    /// Check generated counts against the prediction and exhaustive coverage.
    Verify { file: PathBuf },
    /// Emit the running rule total as CSV.
    Plot {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a seeded synthetic cohort.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long = "pass-prob")]
        pass_prob: f64,
        #[arg(long)]
        seed: u64,
        /// Ask every learner for this concept.
        #[arg(long)]
        desired: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_overflow() {
                EXIT_OVERFLOW
            } else {
                EXIT_INPUT
            },
            message: e.to_string(),
        }
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

/// What a successful command produced.
struct Output {
    stdout: String,
    /// Extra notes for standard error.
    notes: String,
    /// Verification commands exit 1 on a failed check.
    code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            stdout,
            notes: String::new(),
            code: EXIT_OK,
        }
    }
}

fn load(path: &Path) -> Result<OntologyTree, Failure> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| input_failure(format!("cannot read {}: {e}", path.display())))?;
    parse_tree(&source).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serialization cannot fail") + "\n"
}

fn execute(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Predict {
            file,
            states,
            format,
        } => {
            let mut tree = load(&file)?;
            if let Some(t) = states {
                tree = tree.with_states(t)?;
            }
            let prediction = predict_polynomial(&tree)?;
            Ok(Output::ok(match format {
                ReportFormat::Table => render_table(&prediction),
                ReportFormat::Machine => json(&prediction),
            }))
        }
        Command::Generate { file, format, out } => {
            let tree = load(&file)?;
            let rules = generate_rules(&tree)?;
            let document = match format {
                GenerateFormat::Machine => rules.to_json_lines(),
                GenerateFormat::Plans => compile_plans(&rules, &tree)?,
            };
            let summary = format!("generated {} rules\n", rules.rules.len());
            match out {
                Some(path) => {
                    write_file(&path, &document)?;
                    Ok(Output::ok(summary))
                }
                None => Ok(Output {
                    stdout: document,
                    notes: summary,
                    code: EXIT_OK,
                }),
            }
        }
        Command::Classify {
            file,
            desired,
            outcomes,
            default: _,
            format,
        } => {
            let tree = load(&file)?;
            let rules = generate_rules(&tree)?;
            let desired = ConceptId::new(&desired)?;
            let outcome = match outcomes {
                Some(text) => AssessmentOutcome::parse(&text, tree.states())?,
                None => AssessmentOutcome::new(),
            };
            let result = classify(&tree, &rules, &desired, &outcome)?;
            let stdout = match format {
                ReportFormat::Machine => json(&result),
                ReportFormat::Table => {
                    let mut s = format!("{}\n", result.recommendation);
                    s.push_str(&format!("rule: {}\n", result.recommendation.matched_rule));
                    for m in &result.recommendation.materials {
                        s.push_str(&format!(
                            "material: {} {}\n",
                            m.concept,
                            m.url.as_deref().unwrap_or("(none)")
                        ));
                    }
                    for msg in &result.trace {
                        s.push_str(&format!("{msg}\n"));
                    }
                    s
                }
            };
            Ok(Output::ok(stdout))
        }
        Command::Verify { file } => {
            let tree = load(&file)?;
            let rules = generate_rules(&tree)?;
            let counts = verify_count(&rules);
            let coverage = exhaustive_coverage(&tree, &rules);
            let pass = counts.pass && coverage.pass;
            Ok(Output {
                stdout: format!("{counts}\n{coverage}\n"),
                notes: String::new(),
                code: if pass { EXIT_OK } else { EXIT_INPUT },
            })
        }
        Command::Plot { file, out } => {
            let tree = load(&file)?;
            let csv = render_plot_csv(&plot_points(&tree)?);
            match out {
                Some(path) => {
                    write_file(&path, &csv)?;
                    Ok(Output::ok(String::new()))
                }
                None => Ok(Output::ok(csv)),
            }
        }
        Command::Simulate {
            file,
            trials,
            pass_prob,
            seed,
            desired,
            format,
        } => {
            let tree = load(&file)?;
            let rules = generate_rules(&tree)?;
            let config = CohortConfig {
                trials,
                pass_probability: pass_prob,
                seed,
                desired: desired.as_deref().map(ConceptId::new).transpose()?,
            };
            let report = simulate_cohort(&tree, &rules, &config)?;
            Ok(Output::ok(match format {
                ReportFormat::Table => format!("{report}\n"),
                ReportFormat::Machine => json(&report),
            }))
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    if stdout.write_all(rendered.as_bytes()).is_err() {
                        return EXIT_IO;
                    }
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };

    match execute(cli.command) {
        Ok(output) => {
            if stdout
                .write_all(output.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                let _ = writeln!(stderr, "error: cannot write to standard output");
                return EXIT_IO;
            }
            let _ = stderr.write_all(output.notes.as_bytes());
            output.code
        }
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}
