use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sprc_core::harness::{
    actuator_duty, compare_table, export, record_from_json, run_experiment, sweep, table_configs,
    variance_reduction, write_file, ControllerKind, ExperimentConfig, ExperimentRecord,
    ExportFormat, Seeds, PSD_SEGMENT,
};
use sprc_core::plant::SAMPLE_RATE_HZ;
use sprc_core::spectral::welch_psd;
use sprc_core::windfield::{generate, wind_stats, GridMode};
use sprc_core::Error;

#[derive(Parser)]
#[command(name = "sprc-lab", version, about = "Repetitive IPC experiments on a two-bladed turbine surrogate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its record.
    Run(RunArgs),
    /// Run the 12-cell comparison grid for every controller.
    Sweep(SweepArgs),
    /// Compare saved records: baseline-matched reductions and pitch duty.
    Compare(CompareArgs),
    /// Blade-load PSD of a saved record as a gnuplot table.
    Psd(PsdArgs),
    /// Generate a wind series with its statistics.
    Windgen(WindgenArgs),
}

#[derive(Args)]
struct SeedArgs {
    /// Use the indexed seed set (wind 1000+i, noise 2000+i, excitation 3000+i).
    #[arg(long)]
    seed_index: Option<u64>,
    #[arg(long)]
    seed_wind: Option<u64>,
    #[arg(long)]
    seed_noise: Option<u64>,
    #[arg(long)]
    seed_excitation: Option<u64>,
}

impl SeedArgs {
    fn apply(&self, seeds: &mut Seeds) {
        if let Some(i) = self.seed_index {
            *seeds = Seeds::indexed(i);
        }
        if let Some(s) = self.seed_wind {
            seeds.wind = s;
        }
        if let Some(s) = self.seed_noise {
            seeds.noise = s;
        }
        if let Some(s) = self.seed_excitation {
            seeds.excitation = s;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON). Defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    controller: Option<ControllerKind>,
    #[arg(long)]
    mode: Option<GridMode>,
    #[arg(long)]
    wind_speed: Option<f64>,
    #[command(flatten)]
    seeds: SeedArgs,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Base config; mode, speed, controller and seeds are overridden per cell.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Number of indexed seed sets per cell.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// First seed index.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Also write every record (metrics only) as JSON.
    #[arg(long)]
    records: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Record JSON files, baselines included.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsdArgs {
    record: PathBuf,
    #[arg(long, default_value_t = PSD_SEGMENT)]
    segment: usize,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindgenArgs {
    #[arg(long, default_value = "static0")]
    mode: GridMode,
    #[arg(long, default_value_t = 5.0)]
    wind_speed: f64,
    #[arg(long, default_value_t = 120.0)]
    duration: f64,
    #[arg(long, default_value_t = SAMPLE_RATE_HZ)]
    rate: f64,
    #[arg(long, default_value_t = 1000)]
    seed: u64,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn load_record(path: &Path) -> Result<ExperimentRecord, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    record_from_json(&text)
}

fn json_pretty<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn cmd_run(a: RunArgs) -> Result<(), Error> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(c) = a.controller {
        cfg.controller = c;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(v) = a.wind_speed {
        cfg.wind_speed = v;
    }
    a.seeds.apply(&mut cfg.seeds);
    let rec = run_experiment(&cfg)?;
    let stem = format!("{}_{}_{}", cfg.controller, cfg.mode, cfg.wind_speed);
    if matches!(a.format, Format::Csv | Format::Both) {
        export(&rec, ExportFormat::Csv, &a.out.join(format!("{stem}.csv")))?;
    }
    if matches!(a.format, Format::Json | Format::Both) {
        export(&rec, ExportFormat::Json, &a.out.join(format!("{stem}.json")))?;
    }
    write_file(&a.out.join(format!("{stem}_metrics.json")), &json_pretty(&MetricsOut::of(&rec))?)?;
    let m = &rec.metrics;
    println!(
        "{} {} {:.1} m/s: load var {:.3?}, pitch var {:.3?}, mean {:.1} rpm",
        cfg.controller, cfg.mode, cfg.wind_speed, m.load_variance, m.pitch_variance, m.mean_rpm
    );
    for e in &rec.events {
        println!("  [{:7.2} s] {}", e.time, e.message);
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct MetricsOut<'a> {
    controller: ControllerKind,
    mode: GridMode,
    wind_speed: f64,
    seeds: Seeds,
    evaluation_start: f64,
    load_variance: [f64; 2],
    pitch_variance: [f64; 2],
    band_power_1p: [f64; 2],
    band_power_2p: [f64; 2],
    mean_rpm: f64,
    events: &'a [sprc_core::harness::RecordEvent],
}

impl<'a> MetricsOut<'a> {
    fn of(r: &'a ExperimentRecord) -> Self {
        let m = &r.metrics;
        Self {
            controller: r.config.controller,
            mode: r.config.mode,
            wind_speed: r.config.wind_speed,
            seeds: r.config.seeds,
            evaluation_start: m.evaluation_start,
            load_variance: m.load_variance,
            pitch_variance: m.pitch_variance,
            band_power_1p: m.band_power_1p,
            band_power_2p: m.band_power_2p,
            mean_rpm: m.mean_rpm,
            events: &r.events,
        }
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Error> {
    let base = load_config(a.config.as_deref())?;
    let seeds: Vec<Seeds> = (a.seed_offset..a.seed_offset + a.seeds).map(Seeds::indexed).collect();
    let configs = table_configs(&base, &ControllerKind::ALL, &seeds);
    eprintln!("running {} experiments", configs.len());
    let records = sweep(&configs, false)?;
    let table = compare_table(&records)?;
    print!("{}", table.to_text());
    write_file(&a.out.join("table.txt"), &table.to_text())?;
    write_file(&a.out.join("table.csv"), &table.to_csv())?;
    write_file(&a.out.join("table.json"), &json_pretty(&table)?)?;
    if a.records {
        let metrics: Vec<MetricsOut> = records.iter().map(MetricsOut::of).collect();
        write_file(&a.out.join("records.json"), &json_pretty(&metrics)?)?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Error> {
    let records = a.records.iter().map(|p| load_record(p)).collect::<Result<Vec<_>, _>>()?;
    for r in records.iter().filter(|r| r.config.controller != ControllerKind::None) {
        let Some(base) = records.iter().find(|b| {
            b.config.controller == ControllerKind::None
                && b.config.mode == r.config.mode
                && b.config.wind_speed == r.config.wind_speed
                && b.config.seeds.wind == r.config.seeds.wind
                && b.config.seeds.noise == r.config.seeds.noise
        }) else {
            return Err(Error::InvalidComparison(format!(
                "no matched baseline for {} {} {} m/s",
                r.config.controller, r.config.mode, r.config.wind_speed
            )));
        };
        let vr = variance_reduction(base, r)?;
        println!(
            "{} {} {:.1} m/s seeds {}/{}: reduction {:.1}% (blades {:.1?}), pitch var {:.3?}",
            r.config.controller,
            r.config.mode,
            r.config.wind_speed,
            r.config.seeds.wind,
            r.config.seeds.noise,
            vr.pooled,
            vr.per_blade,
            actuator_duty(r)
        );
    }
    let table = compare_table(&records)?;
    print!("{}", table.to_text());
    if let Some(out) = a.out {
        write_file(&out.join("compare.csv"), &table.to_csv())?;
        write_file(&out.join("compare.txt"), &table.to_text())?;
    }
    Ok(())
}

fn cmd_psd(a: PsdArgs) -> Result<(), Error> {
    let rec = load_record(&a.record)?;
    let s = &rec.series;
    let k0 = s.time.partition_point(|t| *t < rec.metrics.evaluation_start - 1e-9);
    let col = |b: usize| s.y[k0..].iter().map(|v| v[b]).collect::<Vec<f64>>();
    let seg = a.segment.min(s.len().saturating_sub(k0));
    let p1 = welch_psd(&col(0), SAMPLE_RATE_HZ, seg, seg / 2)?;
    let p2 = welch_psd(&col(1), SAMPLE_RATE_HZ, seg, seg / 2)?;
    let mut out = String::from("# frequency_hz psd_blade1 psd_blade2\n");
    for ((f, a1), a2) in p1.frequencies.iter().zip(&p1.power).zip(&p2.power) {
        out.push_str(&format!("{f} {a1} {a2}\n"));
    }
    match a.out {
        Some(p) => write_file(&p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn cmd_windgen(a: WindgenArgs) -> Result<(), Error> {
    let w = generate(a.mode, a.wind_speed, a.duration, a.rate, a.seed)?;
    let mut csv = String::from("time,speed\n");
    for (k, v) in w.samples.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k as f64 / a.rate, v));
    }
    let stats = wind_stats(&w)?;
    let stem = format!("wind_{}_{}_{}", a.mode, a.wind_speed, a.seed);
    write_file(&a.out.join(format!("{stem}.csv")), &csv)?;
    let text = json_pretty(&stats)?;
    write_file(&a.out.join(format!("{stem}_stats.json")), &text)?;
    println!("{text}");
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::Generation(_) | Error::NotReady(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Psd(a) => cmd_psd(a),
        Command::Windgen(a) => cmd_windgen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
