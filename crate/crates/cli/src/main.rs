//! `tlc`: check, simulate, emit and benchmark Moore machines.
//!
//! Exit status: 0 on success, 1 when a check fails (validation findings,
//! pin map mismatches), 2 for usage, I/O and parse errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tlc_core::env::{self, Aggregate, TrafficModel, RECORD_FIELDS};
use tlc_core::itlc::default_pin_map;
use tlc_core::timer::{DEFAULT_LONG_TICKS, DEFAULT_SHORT_TICKS};
use tlc_core::{
    dsl, emit_ucf, emit_verilog, parse_pins, parse_stimulus, simulate, validate, write_vcd,
    EmitOptions, FsmSpec, StateEncoding, TimerConfig,
};

#[derive(Parser)]
#[command(name = "tlc", version, about = "Moore machine toolkit for the intelligent traffic light controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a machine: every state must have exactly one enabled
    /// transition for every input valuation.
    Check { fsm: PathBuf },
    /// Run the machine closed-loop with the interval timer.
    Simulate {
        fsm: PathBuf,
        stim: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SHORT_TICKS)]
        short: u32,
        #[arg(long, default_value_t = DEFAULT_LONG_TICKS)]
        long: u32,
        /// Write a VCD waveform here.
        #[arg(long)]
        vcd: Option<PathBuf>,
        /// Write the per-tick log here instead of standard output.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Generate Verilog or UCF pin constraints.
    Emit {
        fsm: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Verilog)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Encoding::Binary)]
        encoding: Encoding,
        /// Pin file (`<signal> <pin> <input|output>` per line); defaults to
        /// the bundled board mapping.
        #[arg(long)]
        pins: Option<PathBuf>,
        /// Verilog module name; defaults to the machine name.
        #[arg(long)]
        module: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run seeded side-road traffic replicas and report waiting metrics.
    Bench {
        fsm: PathBuf,
        /// Arrival probability per tick per approach.
        #[arg(long, default_value_t = 0.1)]
        arrival: f64,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = env::DEFAULT_HORIZON)]
        horizon: u64,
        #[arg(long, default_value_t = DEFAULT_SHORT_TICKS)]
        short: u32,
        #[arg(long, default_value_t = DEFAULT_LONG_TICKS)]
        long: u32,
        /// Vehicles leaving per side-green tick.
        #[arg(long, default_value_t = env::DEFAULT_SERVICE_RATE)]
        service_rate: u32,
        /// Print comma-separated records instead of key=value lines.
        #[arg(long)]
        record: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Verilog,
    Ucf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Binary,
    Onehot,
}

enum Failure {
    /// Exit 1.
    Check(String),
    /// Exit 2.
    Usage(String),
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {}", path.display(), e)))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| usage(format!("{}: {}", path.display(), e)))
}

fn load_spec(path: &Path) -> Result<FsmSpec, Failure> {
    let text = read(path)?;
    dsl::parse(&text).map_err(|errors| {
        let lines: Vec<String> = errors
            .iter()
            .map(|e| format!("{}:{}", path.display(), e))
            .collect();
        usage(lines.join("\n"))
    })
}

fn timer(short: u32, long: u32) -> Result<TimerConfig, Failure> {
    TimerConfig::new(short, long).map_err(|e| usage(e.to_string()))
}

/// Fails with the findings when `spec` does not validate.
fn require_valid(spec: &FsmSpec) -> CmdResult {
    let report = validate(spec);
    if report.is_clean() {
        return Ok(());
    }
    let lines: Vec<String> = report.findings.iter().map(|f| f.to_string()).collect();
    Err(Failure::Check(lines.join("\n")))
}

fn check(fsm: &Path, out: &mut impl Write) -> CmdResult {
    let spec = load_spec(fsm)?;
    let report = validate(&spec);
    for f in &report.findings {
        writeln!(out, "{}", f).map_err(|e| usage(e.to_string()))?;
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{}: {} finding(s)",
            fsm.display(),
            report.findings.len()
        )))
    }
}

fn simulate_cmd(
    fsm: &Path,
    stim: &Path,
    cfg: TimerConfig,
    vcd: Option<&Path>,
    log: Option<&Path>,
    out: &mut impl Write,
) -> CmdResult {
    let spec = load_spec(fsm)?;
    let stimulus = parse_stimulus(&read(stim)?)
        .map_err(|e| usage(format!("{}:{}", stim.display(), e)))?;
    let trace = simulate(&spec, cfg, &stimulus).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = vcd {
        write_file(path, &write_vcd(&trace))?;
    }
    let text = trace.log();
    match log {
        Some(path) => write_file(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

fn emit_cmd(
    fsm: &Path,
    format: Format,
    encoding: Encoding,
    pins: Option<&Path>,
    module: Option<String>,
    output: Option<&Path>,
    out: &mut impl Write,
) -> CmdResult {
    let spec = load_spec(fsm)?;
    require_valid(&spec)?;
    let text = match format {
        Format::Verilog => {
            let mut opts = EmitOptions::for_spec(&spec).encoding(match encoding {
                Encoding::Binary => StateEncoding::Binary,
                Encoding::Onehot => StateEncoding::OneHot,
            });
            if let Some(m) = module {
                opts.module_name = m;
            }
            emit_verilog(&spec, &opts).map_err(|e| Failure::Check(e.to_string()))?
        }
        Format::Ucf => {
            let map = match pins {
                Some(p) => parse_pins(&read(p)?).map_err(|e| usage(format!("{}: {}", p.display(), e)))?,
                None => default_pin_map(),
            };
            map.check_against(&spec)
                .map_err(|e| Failure::Check(e.to_string()))?;
            emit_ucf(&map)
        }
    };
    match output {
        Some(path) => write_file(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    fsm: &Path,
    arrival: f64,
    seeds: u64,
    horizon: u64,
    cfg: TimerConfig,
    service_rate: u32,
    record: bool,
    out: &mut impl Write,
) -> CmdResult {
    if seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let model = TrafficModel::new(arrival, 1, horizon)
        .and_then(|m| m.with_service_rate(service_rate))
        .map_err(|e| usage(e.to_string()))?;
    let spec = load_spec(fsm)?;
    require_valid(&spec)?;
    let seed_list: Vec<u64> = (1..=seeds).collect();
    let metrics = env::sweep(&spec, cfg, &model, &seed_list).map_err(|e| usage(e.to_string()))?;

    let io = |e: io::Error| usage(e.to_string());
    if record {
        writeln!(out, "seed,{}", RECORD_FIELDS.join(",")).map_err(io)?;
    }
    for (seed, m) in seed_list.iter().zip(&metrics) {
        if record {
            writeln!(out, "{},{}", seed, m.to_record()).map_err(io)?;
        } else {
            writeln!(out, "seed={} {}", seed, m).map_err(io)?;
        }
    }
    writeln!(out, "aggregate {}", Aggregate::of(&metrics)).map_err(io)
}

fn run(cli: Cli) -> CmdResult {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Check { fsm } => check(&fsm, &mut out),
        Command::Simulate {
            fsm,
            stim,
            short,
            long,
            vcd,
            log,
        } => {
            let cfg = timer(short, long)?;
            simulate_cmd(&fsm, &stim, cfg, vcd.as_deref(), log.as_deref(), &mut out)
        }
        Command::Emit {
            fsm,
            format,
            encoding,
            pins,
            module,
            output,
        } => emit_cmd(&fsm, format, encoding, pins.as_deref(), module, output.as_deref(), &mut out),
        Command::Bench {
            fsm,
            arrival,
            seeds,
            horizon,
            short,
            long,
            service_rate,
            record,
        } => {
            let cfg = timer(short, long)?;
            bench_cmd(&fsm, arrival, seeds, horizon, cfg, service_rate, record, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{}", msg);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
