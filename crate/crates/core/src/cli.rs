//! Command-line front end.
//!
//! A single run prints the anytime protocol on standard output: `c`
//! comments, `o` for every better model (costs from the greatest level
//! down), `lb` for every better lower bound, `e` with the error estimate on
//! single-level inputs, then one `s` status line and a `v` line listing the
//! true visible atoms of the best model.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use crate::optimize::{
    optimize, Algorithm, Budget, ShrinkVariant, Status, StrategyConfig, OPTIMIZER_ENUM_CAP,
};
use crate::oracle::{CoreMode, OracleKind};
use crate::relax::compile_levels;
use crate::report::bench::{read_manifest, render_csv, run_matrix};
use crate::report::{EventCsvWriter, EventSink, ProtocolWriter, Tee};
use crate::textio::{parse, Dialect};

pub const EXIT_OPTIMUM: i32 = 0;
pub const EXIT_SATISFIABLE: i32 = 10;
pub const EXIT_UNSATISFIABLE: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 30;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Asp,
    Wcnf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    Linsu,
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ShrinkArg {
    None,
    Linear,
    Progression,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleArg {
    Cdcl,
    Enum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoresArg {
    Raw,
    Minimal,
}

/// Anytime optimizer for ground programs with weak constraints and WCNF files.
#[derive(Debug, Parser)]
#[command(name = "coreshrink", version)]
struct Args {
    /// Instance file; standard input when absent or `-`.
    input: Option<PathBuf>,
    /// Input format; detected from the content by default.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "one")]
    algorithm: AlgorithmArg,
    /// Core shrinking; `progression` unless the algorithm is linsu.
    #[arg(long, value_enum)]
    shrink: Option<ShrinkArg>,
    /// Analyze disjoint cores over the input weak constraints first.
    #[arg(long)]
    disjoint_cores: bool,
    /// Assume every soft atom at once instead of by weight class.
    #[arg(long)]
    no_stratification: bool,
    /// Fold levels into weights before optimizing.
    #[arg(long)]
    compile_levels: bool,
    /// Allowance per shrinking call: seconds (`10s`) or conflicts/search nodes (`500c`).
    #[arg(long, default_value = "10s")]
    shrink_budget: Budget,
    #[arg(long, value_enum, default_value = "cdcl")]
    oracle: OracleArg,
    /// Cores returned by the enumeration oracle.
    #[arg(long, value_enum, default_value = "raw")]
    enum_cores: CoresArg,
    /// Atom cap of the enumeration oracle.
    #[arg(long, default_value_t = OPTIMIZER_ENUM_CAP)]
    enum_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in seconds (per run with --bench).
    #[arg(long)]
    timeout: Option<f64>,
    /// Also write every event as CSV to this file.
    #[arg(long)]
    events_csv: Option<PathBuf>,
    /// Run the strategy matrix on every instance listed in this manifest.
    #[arg(long)]
    bench: Option<PathBuf>,
    /// Benchmark CSV destination; standard output by default.
    #[arg(long, requires = "bench")]
    bench_output: Option<PathBuf>,
    /// Parallel benchmark runs.
    #[arg(long, requires = "bench")]
    workers: Option<usize>,
}

impl Args {
    fn config(&self, interrupt: Option<Arc<AtomicBool>>) -> Result<StrategyConfig, String> {
        let algorithm = match self.algorithm {
            AlgorithmArg::Linsu => Algorithm::Linsu,
            AlgorithmArg::One => Algorithm::One,
        };
        let shrink = match (self.shrink, algorithm) {
            (None, Algorithm::One) | (Some(ShrinkArg::Progression), _) => {
                Some(ShrinkVariant::Progression)
            }
            (Some(ShrinkArg::Linear), _) => Some(ShrinkVariant::Linear),
            (None, Algorithm::Linsu) | (Some(ShrinkArg::None), _) => None,
        };
        let timeout = match self.timeout {
            None => None,
            Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
            Some(t) => return Err(format!("--timeout must be positive (got {t})")),
        };
        let cfg = StrategyConfig {
            algorithm,
            shrink,
            disjoint_cores: self.disjoint_cores,
            stratification: !self.no_stratification,
            compile_levels: self.compile_levels,
            shrink_budget: self.shrink_budget,
            oracle: match self.oracle {
                OracleArg::Cdcl => OracleKind::Cdcl,
                OracleArg::Enum => OracleKind::Enum,
            },
            core_mode: match self.enum_cores {
                CoresArg::Raw => CoreMode::Raw,
                CoresArg::Minimal => CoreMode::Minimal,
            },
            enum_cap: self.enum_cap,
            seed: self.seed,
            timeout,
            interrupt,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimum => EXIT_OPTIMUM,
        Status::Satisfiable => EXIT_SATISFIABLE,
        Status::Incoherent => EXIT_UNSATISFIABLE,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run(
    argv: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
    interrupt: Option<Arc<AtomicBool>>,
) -> i32 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let cfg = match args.config(interrupt) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match &args.bench {
        Some(manifest) => bench(&args, manifest, &cfg, out, err),
        None => single(&args, &cfg, out, err),
    }
}

fn read_input(path: Option<&PathBuf>) -> io::Result<Vec<u8>> {
    let mut bytes = Vec::new();
    match path {
        Some(p) if p.as_os_str() != "-" => bytes = std::fs::read(p)?,
        _ => {
            io::stdin().read_to_end(&mut bytes)?;
        }
    }
    Ok(bytes)
}

fn single(args: &Args, cfg: &StrategyConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let bytes = match read_input(args.input.as_ref()) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read input: {e}");
            return EXIT_USAGE;
        }
    };
    let dialect = args.format.map(|f| match f {
        FormatArg::Asp => Dialect::GroundAsp,
        FormatArg::Wcnf => Dialect::Wcnf,
    });
    let instance = match parse(&bytes, dialect) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let levels = if cfg.compile_levels {
        compile_levels(&instance.weak).map_or_else(|_| instance.weak.levels(), |w| w.levels())
    } else {
        instance.weak.levels()
    };
    let mut events_file = match &args.events_csv {
        None => None,
        Some(p) => match File::create(p) {
            Ok(f) => Some(EventCsvWriter::new(BufWriter::new(f))),
            Err(e) => {
                let _ = writeln!(err, "error: cannot create {}: {e}", p.display());
                return EXIT_USAGE;
            }
        },
    };
    let mut protocol = ProtocolWriter::new(&mut *out, levels);
    protocol.emit(&crate::report::Event {
        at: 0.0,
        kind: crate::report::EventKind::Note(format!("strategy {}", cfg.label())),
    });
    let result = {
        let mut sinks: Vec<&mut dyn EventSink> = vec![&mut protocol];
        if let Some(w) = events_file.as_mut() {
            sinks.push(w);
        }
        optimize(&instance, cfg, &mut Tee(sinks))
    };
    let mut failed = protocol.failed();
    drop(protocol);
    if let Some(w) = events_file {
        failed |= w.failed();
        failed |= w.finish().is_err();
    }
    let res = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(out, "c error: {e}");
            let _ = writeln!(out, "s UNKNOWN");
            return EXIT_UNKNOWN;
        }
    };
    if let Some(m) = &res.model {
        let names = m.names(&instance.program.atoms);
        let line = if names.is_empty() {
            "v".to_string()
        } else {
            format!("v {}", names.join(" "))
        };
        failed |= writeln!(out, "{line}").is_err();
    }
    if failed {
        let _ = writeln!(err, "warning: some output could not be written");
    }
    exit_code(res.status)
}

fn bench(
    args: &Args,
    manifest: &Path,
    cfg: &StrategyConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let instances = match read_manifest(manifest) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let strategies: Vec<StrategyConfig> = StrategyConfig::matrix()
        .into_iter()
        .map(|s| StrategyConfig {
            compile_levels: cfg.compile_levels,
            shrink_budget: cfg.shrink_budget,
            oracle: cfg.oracle,
            core_mode: cfg.core_mode,
            enum_cap: cfg.enum_cap,
            seed: cfg.seed,
            interrupt: cfg.interrupt.clone(),
            ..s
        })
        .collect();
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run_matrix(&instances, &strategies, cfg.timeout, workers);
    let doc = render_csv(&rows);
    let written = match &args.bench_output {
        Some(p) => std::fs::write(p, &doc),
        None => out.write_all(doc.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write benchmark CSV: {e}");
            EXIT_UNKNOWN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(args: &[&str]) -> Vec<String> {
        std::iter::once("coreshrink")
            .chain(args.iter().copied())
            .map(String::from)
            .collect()
    }

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(&argv(args), &mut out, &mut err, None);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn shrink_with_linsu_is_a_usage_error() {
        let (code, _, err) = run_args(&["--algorithm", "linsu", "--shrink", "linear", "x.lp"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("core-guided"));
    }

    #[test]
    fn linsu_defaults_to_no_shrinking() {
        let a = Args::try_parse_from(argv(&["--algorithm", "linsu"])).unwrap();
        assert_eq!(a.config(None).unwrap().shrink, None);
        let a = Args::try_parse_from(argv(&[])).unwrap();
        assert_eq!(
            a.config(None).unwrap().shrink,
            Some(ShrinkVariant::Progression)
        );
    }

    #[test]
    fn bad_flags() {
        assert_eq!(run_args(&["--oracle", "sat"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--shrink-budget", "10"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--timeout", "-1", "x"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["/nonexistent/file.lp"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("--shrink-budget"));
    }
}
