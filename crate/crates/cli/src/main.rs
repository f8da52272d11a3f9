//! Command line front end. File formats are described in `docs/schema.md`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use bcc_core::analysis::{check_suite, compute_i_z, TraceView};
use bcc_core::codec::RationalLiteral;
use bcc_core::geometry::{hausdorff_sq, linear_combination, safe_area};
use bcc_core::protocol::Params;
use bcc_core::scalar::format_rational;
use bcc_core::sim::{run, ExecutionConfig, ExecutionTrace, SimError};
use bcc_core::{Point, Polytope, WeightVector};

/// Stdout line that stays quiet when the reader has gone away.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DEADLOCK: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bcc",
    version,
    about = "Byzantine convex consensus simulator and trace checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configuration and write its trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Scheduler seed; replaces the one in the config.
        #[arg(long, env = "SEED")]
        seed: Option<u64>,
        /// JSON-lines trace output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the check suite over a trace and print the JSON report.
    Check {
        #[arg(long)]
        trace: PathBuf,
        /// Also write the per-round maximum pairwise distance as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate one pure function on a JSON input.
    Oracle {
        #[arg(long, value_enum)]
        op: OracleOp,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run and check every config in a directory under seeds `0..seeds`.
    Campaign {
        #[arg(long)]
        config_dir: PathBuf,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleOp {
    SafeArea,
    Hausdorff,
    Hl,
    TEnd,
    #[value(name = "i-z")]
    IZ,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Run {
            config,
            seed,
            trace,
        } => cmd_run(&config, seed, trace.as_deref()),
        Command::Check { trace, csv } => cmd_check(&trace, csv.as_deref()),
        Command::Oracle { op, input } => cmd_oracle(op, &input),
        Command::Campaign { config_dir, seeds } => cmd_campaign(&config_dir, seeds),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn load_config(path: &Path) -> Result<ExecutionConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExecutionConfig::from_json(&text)?)
}

fn show(h: &Polytope) -> String {
    if h.is_empty() {
        return "empty".into();
    }
    let coords = |p: &Point| p.coords().iter().map(format_rational).collect::<Vec<_>>();
    if h.dim() == 1 {
        let v = h.vertices();
        let (lo, hi) = (&v[0], &v[v.len() - 1]);
        return format!("[{}, {}]", coords(lo)[0], coords(hi)[0]);
    }
    let pts: Vec<String> = h
        .vertices()
        .iter()
        .map(|p| format!("({})", coords(p).join(", ")))
        .collect();
    format!("[{}]", pts.join(", "))
}

fn cmd_run(config: &Path, seed: Option<u64>, trace_path: Option<&Path>) -> Result<u8> {
    let mut cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid config: {e:#}");
            return Ok(EXIT_INVALID);
        }
    };
    if let Some(s) = seed {
        cfg.scheduler.seed = s;
    }
    let trace = match run(&cfg) {
        Ok(t) => t,
        Err(SimError::ConfigInvalid(e)) => {
            eprintln!("invalid config: {e}");
            return Ok(EXIT_INVALID);
        }
        Err(SimError::DeadlockDetected {
            undecided,
            reason,
            trace,
        }) => {
            if let Some(p) = trace_path {
                write_trace(&trace, p)?;
            }
            eprintln!("deadlock: undecided {undecided:?}: {reason}");
            return Ok(EXIT_DEADLOCK);
        }
        Err(e) => bail!(e),
    };
    if let Some(p) = trace_path {
        write_trace(&trace, p)?;
    }
    say!("t_end {}", trace.header.t_end);
    let view = TraceView::new(&trace);
    for (node, (_, h)) in &view.decisions {
        if view.is_fault_free(*node) {
            say!("node {node} decided {}", show(h));
        }
    }
    Ok(0)
}

fn write_trace(trace: &ExecutionTrace, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    trace.write_jsonl(std::io::BufWriter::new(file))?;
    Ok(())
}

fn read_trace(path: &Path) -> Result<ExecutionTrace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExecutionTrace::from_jsonl(&text)?)
}

fn cmd_check(path: &Path, csv: Option<&Path>) -> Result<u8> {
    let trace = read_trace(path)?;
    let report = check_suite(&trace);
    if let Some(csv) = csv {
        let per_round = report
            .get("convergence")
            .and_then(|c| c.witness.get("max_distance_per_round"))
            .and_then(|v| v.as_array())
            .cloned()
            .unwrap_or_default();
        let mut out = String::from("round,max_distance\n");
        for (t, d) in per_round.iter().enumerate() {
            out.push_str(&format!("{t},{d}\n"));
        }
        fs::write(csv, out).with_context(|| format!("writing {}", csv.display()))?;
    }
    say!("{}", serde_json::to_string_pretty(&report)?);
    for c in report.failures() {
        eprintln!("FAIL {}: {}", c.name, c.witness);
    }
    Ok(if report.pass { 0 } else { EXIT_FAIL })
}

#[derive(Deserialize)]
struct SafeAreaInput {
    points: Vec<Point>,
    f: usize,
}

#[derive(Deserialize)]
struct HausdorffInput {
    a: Polytope,
    b: Polytope,
}

#[derive(Deserialize)]
struct CombinationInput {
    polytopes: Vec<Polytope>,
    weights: Vec<RationalLiteral>,
}

fn cmd_oracle(op: OracleOp, input: &Path) -> Result<u8> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let out = match op {
        OracleOp::SafeArea => {
            let i: SafeAreaInput = serde_json::from_str(&text)?;
            let h = safe_area(&i.points, i.f)?;
            json!({ "result": h, "text": show(&h) })
        }
        OracleOp::Hausdorff => {
            let i: HausdorffInput = serde_json::from_str(&text)?;
            let sq = hausdorff_sq(&i.a, &i.b)?;
            json!({
                "distance_sq": format_rational(&sq),
                "distance": bcc_core::geometry::hausdorff(&i.a, &i.b)?
            })
        }
        OracleOp::Hl => {
            let i: CombinationInput = serde_json::from_str(&text)?;
            let h = linear_combination(
                &i.polytopes,
                &WeightVector::new(i.weights.into_iter().map(|w| w.0).collect())?,
            )?;
            json!({ "result": h, "text": show(&h) })
        }
        OracleOp::TEnd => {
            let p: Params = serde_json::from_str(&text)?;
            p.validate()?;
            json!({ "t_end": p.t_end() })
        }
        OracleOp::IZ => {
            let trace = ExecutionTrace::from_jsonl(&text)?;
            let h = compute_i_z(&TraceView::new(&trace))?;
            json!({ "result": h, "text": show(&h) })
        }
    };
    say!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

struct CampaignRow {
    name: String,
    seed: u64,
    outcome: std::result::Result<(), String>,
}

fn cmd_campaign(dir: &Path, seeds: u64) -> Result<u8> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        eprintln!("no .json configs in {}", dir.display());
        return Ok(EXIT_INVALID);
    }
    let mut configs = Vec::new();
    for f in &files {
        let name = f
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        match load_config(f) {
            Ok(c) => configs.push((name, c)),
            Err(e) => {
                eprintln!("invalid config {}: {e:#}", f.display());
                return Ok(EXIT_INVALID);
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| (0..seeds).map(move |s| (c, s)))
        .collect();
    let rows: Vec<CampaignRow> = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let (name, base) = &configs[c];
            let mut cfg = base.clone();
            cfg.scheduler.seed = seed;
            let outcome = match run(&cfg) {
                Err(e) => Err(e.to_string()),
                Ok(trace) => {
                    let report = check_suite(&trace);
                    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                    if failed.is_empty() {
                        Ok(())
                    } else {
                        Err(format!("failed checks {}", failed.join(", ")))
                    }
                }
            };
            CampaignRow {
                name: name.clone(),
                seed,
                outcome,
            }
        })
        .collect();
    let names: Vec<&str> = configs.iter().map(|(n, _)| n.as_str()).collect();
    let (table, all_ok) = summarize(&names, &rows);
    say!("{table}");
    Ok(if all_ok { 0 } else { EXIT_FAIL })
}

fn summarize(names: &[&str], rows: &[CampaignRow]) -> (String, bool) {
    let mut out = format!("{:<40} {:>7}\n", "config", "passed");
    let mut all_ok = true;
    for name in names {
        let mine: Vec<&CampaignRow> = rows.iter().filter(|r| r.name == *name).collect();
        let ok = mine.iter().filter(|r| r.outcome.is_ok()).count();
        out.push_str(&format!("{name:<40} {ok:>3}/{:<3}\n", mine.len()));
        all_ok &= ok == mine.len();
    }
    for r in rows {
        if let Err(e) = &r.outcome {
            out.push_str(&format!("FAIL {} seed {}: {e}\n", r.name, r.seed));
        }
    }
    let passed = rows.iter().filter(|r| r.outcome.is_ok()).count();
    out.push_str(&format!("total {passed}/{}", rows.len()));
    (out, all_ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_names_failing_config_and_seed() {
        let row = |name: &str, seed, ok: bool| CampaignRow {
            name: name.into(),
            seed,
            outcome: if ok {
                Ok(())
            } else {
                Err("failed checks agreement".into())
            },
        };
        let rows = vec![
            row("a", 0, true),
            row("a", 1, true),
            row("b", 0, true),
            row("b", 7, false),
        ];
        let (text, ok) = summarize(&["a", "b"], &rows);
        assert!(!ok);
        assert!(text.contains("FAIL b seed 7: failed checks agreement"));
        assert!(text.contains("total 3/4"));
    }

    #[test]
    fn interval_text_matches_rational_strings() {
        let h = Polytope::interval(
            bcc_core::scalar::rational_ratio(2, 1),
            bcc_core::scalar::rational_ratio(5, 1),
        );
        assert_eq!(show(&h), "[2/1, 5/1]");
    }
}
