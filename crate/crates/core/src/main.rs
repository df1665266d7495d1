use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quell::bench::generators::{PauliHamiltonian, WeightedGraph};
use quell::bench::pipeline::GATE_FLOOR_FRACTION;
use quell::bench::{compare, run_benchmark, BenchError, BenchId, BenchReport, PipelineConfig, RunSpec};
use quell::gatecal::{calibrate_device, GateCalConfig, ToyGateModel, DEFAULT_REPETITIONS};
use quell::noise::DeviceModel;
use quell::readout::{calibrate, choose_groups};

#[derive(Parser)]
#[command(name = "quell", version, about = "Error-suppression pipeline and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark through a pipeline preset and write the report.
    Run {
        #[arg(long)]
        bench: BenchId,
        #[arg(long)]
        device: PathBuf,
        #[arg(long, default_value = "default")]
        pipeline: String,
        /// Width range `a..b` (inclusive) or a single width.
        #[arg(long, value_parser = parse_range)]
        qubits: Option<(usize, usize)>,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-instance metrics (and QAOA landscapes) as CSV.
        #[arg(long)]
        emit_csv: bool,
        /// Also write the DD plan of every instance.
        #[arg(long)]
        emit_dd_plan: bool,
        /// Hamiltonian file for VQE, one `coeff pauli_string` per line.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        /// Weighted graph JSON for QAOA.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// QAOA grid as `ROWSxCOLS`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Circuits per width for QV.
        #[arg(long)]
        circuits: Option<usize>,
    },
    /// Measure readout confusion matrices for groups of neighbouring qubits.
    CalibrateReadout {
        #[arg(long)]
        device: PathBuf,
        /// Comma-separated physical qubits; all qubits by default.
        #[arg(long, value_delimiter = ',')]
        qubits: Option<Vec<usize>>,
        #[arg(long, default_value_t = 3)]
        group_size: usize,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Anneal every CX against the device's gate model.
    CalibrateGates {
        #[arg(long)]
        device: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = GATE_FLOOR_FRACTION)]
        floor_fraction: f64,
        #[arg(long)]
        out: PathBuf,
        /// Write the device with tuned error rates here.
        #[arg(long)]
        device_out: Option<PathBuf>,
    },
    /// Summarize a report, or compare two.
    Report {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<PathBuf>>,
        report: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad width {t:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok((num(a)?, num(b)?))
        }
        None => num(s).map(|n| (n, n)),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let num = |t: &str| t.parse::<usize>().map_err(|_| format!("bad grid size {t:?}"));
    Ok((num(a)?, num(b)?))
}

enum Failure {
    Validation(String),
    Stage(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Stage { .. } => Failure::Stage(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn stage(e: impl std::fmt::Display) -> Failure {
    Failure::Stage(e.to_string())
}

fn load_device(path: &Path) -> Result<DeviceModel, Failure> {
    DeviceModel::load(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| stage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            bench,
            device,
            pipeline,
            qubits,
            shots,
            seed,
            out,
            emit_csv,
            emit_dd_plan,
            hamiltonian,
            graph,
            grid,
            circuits,
        } => {
            let config = PipelineConfig::preset(&pipeline)
                .ok_or_else(|| invalid(format!("unknown pipeline {pipeline:?} (expected default or suppressed)")))?;
            let dev = load_device(&device)?;
            let mut spec = RunSpec::new(bench, shots, seed);
            spec.qubits = qubits;
            if let Some(p) = hamiltonian {
                spec.hamiltonian = Some(PauliHamiltonian::load(&p)?);
            }
            if let Some(p) = graph {
                let text = std::fs::read_to_string(&p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                spec.graph = Some(WeightedGraph::from_json(&text)?);
            }
            if let Some(g) = grid {
                spec.qaoa_grid = g;
            }
            if let Some(c) = circuits {
                spec.qv_circuits = c;
            }
            let output = run_benchmark(&spec, &config, &dev)?;
            let report = &output.report;
            report.save(&out).map_err(stage)?;
            if emit_csv {
                write(&sibling(&out, ".csv"), &report.metrics_csv())?;
                if let Some((ideal, measured)) = report.qaoa_landscapes()? {
                    write(&sibling(&out, ".ideal.csv"), &ideal.to_csv())?;
                    write(&sibling(&out, ".measured.csv"), &measured.to_csv())?;
                }
            }
            if emit_dd_plan {
                let plans: Vec<_> = output
                    .dd_plans
                    .iter()
                    .map(|(label, plan)| serde_json::json!({ "label": label, "plan": plan }))
                    .collect();
                write(&sibling(&out, ".dd.json"), &serde_json::to_string_pretty(&plans).map_err(stage)?)?;
            }
            for (k, v) in &report.metrics.summary {
                println!("{k:<34} {v:.6}");
            }
            println!("wrote {} ({:.1}s)", out.display(), report.wall_time_s);
        }
        Command::CalibrateReadout { device, qubits, group_size, shots, seed, out } => {
            let dev = load_device(&device)?;
            let qubits = qubits.unwrap_or_else(|| (0..dev.num_qubits()).collect());
            if let Some(&q) = qubits.iter().find(|&&q| q >= dev.num_qubits()) {
                return Err(invalid(format!("qubit {q} is not on the device")));
            }
            if group_size == 0 || shots == 0 {
                return Err(invalid("group size and shots must be positive"));
            }
            let partition = choose_groups(&dev.coupling, &qubits, group_size);
            let cal = calibrate(&partition, &dev, shots, seed).map_err(stage)?;
            cal.save(&out).map_err(stage)?;
            println!("{} groups, {} circuits, wrote {}", partition.num_groups(), 1usize << partition.max_size(), out.display());
        }
        Command::CalibrateGates { device, seed, floor_fraction, out, device_out } => {
            let dev = load_device(&device)?;
            if !(0.0..=1.0).contains(&floor_fraction) {
                return Err(invalid("floor fraction must lie in [0, 1]"));
            }
            let model_seed = u64::from_str_radix(&dev.hash(), 16).unwrap_or(0);
            let model = ToyGateModel::for_device(&dev, floor_fraction, &DEFAULT_REPETITIONS, model_seed);
            let (tuned, cal) = calibrate_device(&dev, &model, &GateCalConfig::default(), seed).map_err(stage)?;
            cal.save(&out).map_err(stage)?;
            for (e, r) in &cal.edges {
                println!("{e:<6} epg {:.5} -> {:.5}", r.epg_before, r.epg_after);
            }
            println!("{} blocks, wrote {}", cal.blocks.blocks.len(), out.display());
            if let Some(p) = device_out {
                tuned.save(&p).map_err(stage)?;
            }
        }
        Command::Report { compare: Some(paths), .. } => {
            let a = BenchReport::load(&paths[0])?;
            let b = BenchReport::load(&paths[1])?;
            print!("{}", compare(&a, &b));
        }
        Command::Report { compare: None, report: Some(path) } => {
            let r = BenchReport::load(&path)?;
            let again = r.recompute_metrics()?;
            println!("{} on {} ({}), {} instances", r.benchmark, r.device_name, r.pipeline, r.instances.len());
            for (k, v) in &r.metrics.summary {
                println!("{k:<34} {v:.6}");
            }
            if again != r.metrics {
                return Err(invalid("stored metrics do not match the stored distributions"));
            }
        }
        Command::Report { compare: None, report: None } => {
            return Err(invalid("report needs a file or --compare A B"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
