use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use specpcm::array::{MachineLayout, MachineState};
use specpcm::cluster::cluster_spectra;
use specpcm::config::{Config, Workload, KEYS};
use specpcm::cost::{area_report, published_baselines, Catalog, CostLedger, CostReport, PUBLISHED_ENERGY_J};
use specpcm::dse::{results_csv, run_sweep, SweepSpec, SweepWorkload};
use specpcm::encoder::Encoder;
use specpcm::isa::{self, Instruction};
use specpcm::rng;
use specpcm::search::search_spectra;
use specpcm::spectra::{parse_mgf, BucketKey, Spectrum};
use specpcm::synth::{generate, SynthParams};

/// Simulator for a PCM in-memory-computing accelerator running HD spectral
/// clustering and database search.
#[derive(Parser)]
#[command(name = "specpcm", version, after_help = config_help())]
struct Cli {
    /// Configuration file of dotted `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the `seed` config key.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled synthetic dataset and a target-decoy library.
    Synth(SynthArgs),
    /// Encode spectra into packed hypervectors.
    Encode(EncodeArgs),
    /// Cluster spectra per precursor bucket.
    Cluster(ClusterArgs),
    /// Search query spectra against a reference library with FDR filtering.
    Search(SearchArgs),
    /// Run ISA programs.
    Isa {
        #[command(subcommand)]
        command: IsaCommand,
    },
    /// Sweep configuration values and record quality, energy and latency.
    Dse(DseArgs),
    /// Summarise a cost ledger, or print reference tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory; receives spectra.mgf and library.mgf.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    /// Standard deviation of the per-peak m/z shift.
    #[arg(long)]
    jitter: Option<f64>,
    /// Relative intensity noise.
    #[arg(long)]
    intensity_noise: Option<f64>,
    /// Probability of dropping each peak from a copy.
    #[arg(long)]
    dropout: Option<f64>,
    /// Random peaks added to each copy.
    #[arg(long)]
    noise_peaks: Option<usize>,
    /// Precursor windows the templates are spread over.
    #[arg(long)]
    windows: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadArg {
    Cluster,
    Search,
}

impl From<WorkloadArg> for Workload {
    fn from(w: WorkloadArg) -> Self {
        match w {
            WorkloadArg::Cluster => Workload::Cluster,
            WorkloadArg::Search => Workload::Search,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Packed vectors, one comma-separated row per spectrum; usable as
    /// `data=@file#row` in ISA programs.
    #[arg(long)]
    out: PathBuf,
    /// CSV mapping row numbers to spectrum ids and buckets.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Selects the workload defaults for dimension.
    #[arg(long, value_enum, default_value = "cluster")]
    workload: WorkloadArg,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    /// spectrum_id,cluster_id rows.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    refs: PathBuf,
    /// query_id,ref_id,score,is_decoy,accepted rows.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Count distinct peptide labels rather than accepted matches.
    #[arg(long)]
    unique_peptides: bool,
}

#[derive(Subcommand)]
enum IsaCommand {
    /// Execute a program on a fresh machine.
    Run(IsaRunArgs),
}

#[derive(Args)]
struct IsaRunArgs {
    program: PathBuf,
    /// index,opcode,latency_cycles,energy_pj,outputs rows.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Tiles per logical row; fixes where READ_HV lands in the buffer.
    #[arg(long, default_value_t = 1)]
    stripes: usize,
    /// Selects device and write-verify defaults.
    #[arg(long, value_enum, default_value = "cluster")]
    workload: WorkloadArg,
}

#[derive(Args)]
struct DseArgs {
    #[arg(long, value_enum, default_value = "cluster")]
    workload: WorkloadArg,
    /// `name=v1,v2,...`; repeat for a cross product.
    #[arg(long = "axis", required = true)]
    axes: Vec<String>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Parallel cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Spectra to cluster, or queries to search. Synthetic data otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Reference library for search sweeps.
    #[arg(long)]
    refs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, required_unless_present_any = ["paper_baselines", "area_tiles"])]
    ledger: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Print the published reference latencies and energies.
    #[arg(long)]
    paper_baselines: bool,
    /// Print the area breakdown for this many tiles.
    #[arg(long)]
    area_tiles: Option<usize>,
}

fn config_help() -> String {
    let mut s = String::from("Config keys:\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<26} {d}\n"));
    }
    s
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn read_spectra(path: &Path) -> Result<Vec<Spectrum>> {
    let report = parse_mgf(path)?;
    for e in &report.errors {
        eprintln!("warning: {}: line {}: {} (record skipped)", path.display(), e.line, e.msg);
    }
    if report.missing_charge > 0 {
        eprintln!(
            "warning: {}: {} spectra without CHARGE",
            path.display(),
            report.missing_charge
        );
    }
    if report.spectra.is_empty() {
        bail!("{}: no spectra", path.display());
    }
    Ok(report.spectra)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let d = SynthParams::default();
    let p = SynthParams {
        num_classes: a.classes,
        per_class: a.per_class,
        mz_jitter: a.jitter.unwrap_or(d.mz_jitter),
        intensity_noise: a.intensity_noise.unwrap_or(d.intensity_noise),
        dropout: a.dropout.unwrap_or(d.dropout),
        noise_peaks: a.noise_peaks.unwrap_or(d.noise_peaks),
        precursor_windows: a.windows.unwrap_or(d.precursor_windows),
        seed: load_config(cli)?.seed,
        ..d
    };
    let data = generate(&p)?;
    data.write(&a.out)?;
    println!(
        "wrote {} spectra and a library of {} targets + {} decoys to {}",
        data.copies.len(),
        data.templates.len(),
        data.decoys.len(),
        a.out.display()
    );
    Ok(())
}

fn encode(cli: &Cli, a: &EncodeArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let spectra = read_spectra(&a.input)?;
    let enc = Encoder::new(&cfg, a.workload.into())?;
    let packed = enc.packed_all(&spectra)?;
    let mut rows = String::new();
    for p in &packed {
        let vals: Vec<String> = p.elems().iter().map(i8::to_string).collect();
        rows.push_str(&vals.join(","));
        rows.push('\n');
    }
    write(&a.out, &rows)?;
    if let Some(index) = &a.index {
        let mut s = String::from("row,spectrum_id,charge,mz_window_index\n");
        for (row, sp) in spectra.iter().enumerate() {
            let k = BucketKey::of(sp, cfg.bucket_window);
            s.push_str(&format!("{row},{},{},{}\n", sp.id, k.charge, k.mz_window_index));
        }
        write(index, &s)?;
    }
    println!(
        "encoded {} spectra: D={} n={} packed length {}",
        spectra.len(),
        enc.dim(),
        enc.n(),
        enc.dim() / enc.n() as usize
    );
    Ok(())
}

fn cluster(cli: &Cli, a: &ClusterArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let spectra = read_spectra(&a.input)?;
    let run = cluster_spectra(&spectra, &cfg)?;
    write(&a.out, &run.to_csv(&spectra)?)?;
    let (cr, ir) = match run.metrics {
        Some(m) => (m.clustered_ratio.to_string(), m.incorrect_ratio.to_string()),
        None => (String::new(), String::new()),
    };
    if let Some(path) = &a.metrics {
        write(
            path,
            &format!(
                "threshold,clustered_ratio,incorrect_ratio,energy_pj,latency_ns\n{},{cr},{ir},{},{}\n",
                cfg.cluster_threshold,
                run.ledger.energy_pj(),
                run.ledger.latency_ns()
            ),
        )?;
    }
    if let Some(path) = &a.ledger {
        run.ledger.write(path)?;
    }
    println!(
        "{} spectra, {} buckets, {} clusters; clustered_ratio={cr} incorrect_ratio={ir} energy_pj={} latency_ns={}",
        spectra.len(),
        run.num_buckets(),
        run.num_clusters(),
        run.ledger.energy_pj(),
        run.ledger.latency_ns()
    );
    Ok(())
}

fn search(cli: &Cli, a: &SearchArgs) -> Result<()> {
    let mut cfg = load_config(cli)?;
    cfg.unique_peptides |= a.unique_peptides;
    let queries = read_spectra(&a.query)?;
    let refs = read_spectra(&a.refs)?;
    let run = search_spectra(&queries, &refs, &cfg)?;
    write(&a.out, &run.to_csv()?)?;
    if let Some(path) = &a.ledger {
        run.ledger().write(path)?;
    }
    let s = &run.summary;
    println!(
        "identified_count={} fdr_threshold={} energy_pj={} latency_ns={}",
        s.identified_count,
        s.fdr_threshold.map_or_else(|| "none".into(), |t| t.to_string()),
        s.energy_pj,
        s.latency_ns
    );
    println!(
        "queries={} per_query_latency_ns={} program_energy_pj={} program_latency_ns={}",
        s.queries, s.per_query_latency_ns, s.program_energy_pj, s.program_latency_ns
    );
    Ok(())
}

fn isa_run(cli: &Cli, a: &IsaRunArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let program = isa::parse_program_file(&a.program)?;
    let highest = program
        .iter()
        .filter_map(|i| match *i {
            Instruction::StoreHv { arr_idx, .. } if arr_idx >= 0 => Some(arr_idx as usize),
            Instruction::ReadHv { arr_idx, .. } => Some(arr_idx),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let stripes = a.stripes.max(1);
    let layout = MachineLayout {
        rows: cfg.array_rows,
        cols: cfg.array_cols,
        stripes,
        row_groups: (highest + 1).div_ceil(stripes),
    };
    let mut m = MachineState::new(layout, cfg.machine_config(a.workload.into()), cfg.num_arrays)?;
    let mut r = rng::seeded(cfg.seed);
    let (trace, failure) = match isa::run(&program, &mut m, &mut r) {
        Ok(t) => (t, None),
        Err(aborted) => (aborted.trace, Some(aborted.error)),
    };
    if let Some(path) = &a.trace {
        write(path, &isa::trace_csv(&trace))?;
    }
    if let Some(path) = &a.ledger {
        trace.ledger.write(path)?;
    }
    println!(
        "executed {} of {} instructions: {} cycles, {} pJ",
        trace.entries.len(),
        program.len(),
        trace.total_cycles(),
        trace.ledger.energy_pj()
    );
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn dse(cli: &Cli, a: &DseArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let mut spec = SweepSpec::new(a.reps.max(1), cfg.seed);
    for axis in &a.axes {
        spec = spec.with_axis(axis)?;
    }
    let synthetic = || {
        generate(&SynthParams {
            seed: cfg.seed,
            ..SynthParams::default()
        })
    };
    let (spectra, refs) = match (&a.input, a.workload) {
        (Some(p), WorkloadArg::Cluster) => (read_spectra(p)?, Vec::new()),
        (None, WorkloadArg::Cluster) => (synthetic()?.copies, Vec::new()),
        (Some(p), WorkloadArg::Search) => {
            let refs = a.refs.as_deref().context("--refs is required with --input for search sweeps")?;
            (read_spectra(p)?, read_spectra(refs)?)
        }
        (None, WorkloadArg::Search) => {
            let d = synthetic()?;
            (d.copies.clone(), d.library())
        }
    };
    let workload = match a.workload {
        WorkloadArg::Cluster => SweepWorkload::Cluster { spectra: &spectra },
        WorkloadArg::Search => SweepWorkload::Search {
            queries: &spectra,
            refs: &refs,
        },
    };
    let results = run_sweep(&spec, workload, &cfg, a.jobs)?;
    write(&a.out, &results_csv(&spec, workload.name(), &results)?)?;
    let failed = results.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} cells, {failed} failed; wrote {}", results.len(), a.out.display());
    Ok(())
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    if let Some(path) = &a.ledger {
        let r = CostReport::from_ledger(&CostLedger::read(path)?, cfg.num_arrays);
        match a.format {
            Format::Text => print!("{r}"),
            Format::Csv => print!("{}", r.to_csv()),
        }
    }
    if let Some(tiles) = a.area_tiles {
        let area = area_report(tiles, &Catalog::table_s3());
        match a.format {
            Format::Text => {
                println!("area for {tiles} tile(s):");
                for l in &area.lines {
                    println!("  {:<16} {:>8} units {:>12.6} mm2", l.component.key(), l.units, l.area_mm2);
                }
                println!("  {:<16} {:>8}       {:>12.6} mm2", "total", "", area.total_mm2());
            }
            Format::Csv => {
                println!("component,units,area_mm2");
                for l in &area.lines {
                    println!("{},{},{}", l.component.key(), l.units, l.area_mm2);
                }
            }
        }
    }
    if a.paper_baselines {
        match a.format {
            Format::Text => {
                println!("paper-reported, not reproduced:");
                for b in published_baselines() {
                    println!(
                        "  {:<10} {:<10} {:<10} {:<10} {:>10} s",
                        b.task, b.dataset, b.tool, b.hardware, b.latency_s
                    );
                }
                for (task, j) in PUBLISHED_ENERGY_J {
                    println!("  {task:<10} energy {j} J");
                }
            }
            Format::Csv => {
                println!("task,dataset,tool,hardware,latency_s,source");
                for b in published_baselines() {
                    println!(
                        "{},{},{},{},{},paper-reported (not reproduced)",
                        b.task, b.dataset, b.tool, b.hardware, b.latency_s
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(&cli, a),
        Command::Encode(a) => encode(&cli, a),
        Command::Cluster(a) => cluster(&cli, a),
        Command::Search(a) => search(&cli, a),
        Command::Isa {
            command: IsaCommand::Run(a),
        } => isa_run(&cli, a),
        Command::Dse(a) => dse(&cli, a),
        Command::Report(a) => report(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
