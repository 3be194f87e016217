//! `oobsim`: scripted batch simulations, standalone decoding of stored
//! frames, attack experiments and timing/energy analysis.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use oobsim_core::crypto::sas_length;
use oobsim_core::decoder::{decode_session, DecodeConfig, DecoderError};
use oobsim_core::encoder::{read_ppm, write_ppm, EncoderError, RasterImage, ScheduleSidecar};
use oobsim_core::exec::Execution;
use oobsim_core::harness::{
    attack_experiment, exhaustive_attack, one_significant, power_estimate, render_report,
    run_scenario, timing_estimate, AttackStrategy, HarnessError, ScenarioConfig, DEFAULT_BATTERY_J,
};
use serde_json::json;

const OUT_ENV: &str = "OOBSIM_OUT";
const SIDECAR: &str = "schedule.json";

#[derive(Parser)]
#[command(
    name = "oobsim",
    version,
    about = "Sensor node initialization over a visual LED channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one batch end to end and write frames, report and transcript.
    Simulate(SimulateArgs),
    /// Decode a stored frame sequence and print one JSON line per display.
    Decode(DecodeArgs),
    /// Estimate the random-guess adversary's success rate.
    Attack(AttackArgs),
    /// Print transmission time and LED energy for a parameter set.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`); the OOBSIM_OUT variable takes precedence.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    data_leds: Option<usize>,
    #[arg(long)]
    hold_ms: Option<u64>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Directory with `frame_NNN.ppm` files and `schedule.json`.
    frames: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate every nonce and mask of a single-node batch instead (k <= 4).
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    data_leds: usize,
    #[arg(long, default_value_t = 250)]
    hold_ms: u64,
    #[arg(long, default_value_t = 2.9)]
    volts: f64,
    /// Current per LED in amperes.
    #[arg(long, default_value_t = 0.0022)]
    amps: f64,
    /// Batch size, to report the SAS width it needs.
    #[arg(long)]
    n: Option<usize>,
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    HarnessError::Config(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(h) = cause.downcast_ref::<HarnessError>() {
            return match h {
                HarnessError::Config(_)
                | HarnessError::Encoder(EncoderError::OutOfBounds { .. }) => 2,
                HarnessError::BatchAborted { .. } | HarnessError::CaptureLost { .. } => 3,
                _ => 1,
            };
        }
        if let Some(DecoderError::DetectionIncomplete { .. }) = cause.downcast_ref::<DecoderError>()
        {
            return 4;
        }
    }
    1
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_config(args: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.data_leds {
        cfg.data_leds = v;
    }
    if let Some(v) = args.hold_ms {
        cfg.hold_time_ms = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn frame_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("frame_{i:03}.ppm"))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = load_config(&args)?;
    let out = output_dir(args.out);
    let outcome = run_scenario(&cfg)?;

    let frames_dir = out.join("frames");
    if frames_dir.exists() {
        fs::remove_dir_all(&frames_dir)
            .with_context(|| format!("clearing {}", frames_dir.display()))?;
    }
    fs::create_dir_all(&frames_dir)
        .with_context(|| format!("creating {}", frames_dir.display()))?;
    for (i, f) in outcome.frames.iter().enumerate() {
        write_ppm(f, &frame_path(&frames_dir, i))?;
    }
    if let Some(s) = &outcome.schedule {
        let sidecar = ScheduleSidecar::from_schedule(s, Some(outcome.active_layout.led_count()));
        fs::write(
            frames_dir.join(SIDECAR),
            serde_json::to_string_pretty(&sidecar)?,
        )?;
    }

    fs::write(out.join("report.json"), outcome.report.to_json())?;
    let (overlay, table) = render_report(&outcome.report, &outcome.layout, outcome.frames.first());
    write_ppm(&overlay, &out.join("overlay.ppm"))?;
    fs::write(out.join("transcript.bin"), outcome.transcript.encode())?;
    print!("{table}");
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    let dir = &args.frames;
    if !dir.is_dir() {
        return Err(config_error(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let sidecar_path = dir.join(SIDECAR);
    let sidecar: ScheduleSidecar = match fs::read_to_string(&sidecar_path) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| config_error(format!("{}: {e}", sidecar_path.display())))?,
        Err(_) => return Err(config_error(format!("missing {}", sidecar_path.display()))),
    };
    let led_count = sidecar
        .led_count
        .ok_or_else(|| config_error("sidecar does not record led_count"))?;
    let mut frames: Vec<RasterImage> = vec![];
    while frame_path(dir, frames.len()).exists() {
        frames.push(read_ppm(&frame_path(dir, frames.len()))?);
    }
    if frames.is_empty() {
        return Err(config_error(format!("no frames in {}", dir.display())));
    }
    let out = decode_session(
        &frames,
        led_count,
        sidecar.k,
        sidecar.data_leds,
        &DecodeConfig::default(),
    )?;
    for (i, e) in out.entries.iter().enumerate() {
        let line = json!({
            "cluster": i,
            "sync_center": [e.sync_center.0, e.sync_center.1],
            "sas": e.sas,
            "sas_hex": e.sas.to_hex(),
            "sync_ok": e.sync_ok,
        });
        println!("{line}");
    }
    Ok(())
}

fn attack(args: AttackArgs) -> Result<()> {
    let exec = Execution::default();
    let value = if args.exhaustive {
        if args.n != 1 {
            return Err(config_error(
                "exhaustive attack runs on a single node; pass --n 1",
            ));
        }
        serde_json::to_value(exhaustive_attack(args.k, args.seed, exec)?)?
    } else {
        serde_json::to_value(attack_experiment(
            args.n,
            args.k,
            args.trials,
            AttackStrategy::RandomGuess,
            args.seed,
            exec,
        )?)?
    };
    println!("{value}");
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    if args.k == 0 || args.data_leds == 0 || args.hold_ms == 0 {
        return Err(config_error("k, data-leds and hold-ms must be positive"));
    }
    if !(args.volts >= 0.0 && args.amps >= 0.0) {
        return Err(config_error("volts and amps must be nonnegative"));
    }
    let duration_ms = timing_estimate(args.k, args.data_leds, args.hold_ms);
    let leds = args.data_leds as u32 + 1;
    let p = power_estimate(
        args.volts,
        args.amps,
        duration_ms as f64 / 1000.0,
        leds,
        DEFAULT_BATTERY_J,
    );
    let mut value = json!({
        "k": args.k,
        "data_leds": args.data_leds,
        "hold_time_ms": args.hold_ms,
        "frame_count": args.k.div_ceil(args.data_leds) + 3,
        "duration_ms": duration_ms,
        "led_count": leds,
        "energy_j": p.energy_j,
        "battery_percent": one_significant(p.battery_percent()),
    });
    if let Some(n) = args.n {
        value["sas_length"] = json!(sas_length(n as u64));
    }
    println!("{value}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Decode(a) => decode(a),
        Command::Attack(a) => attack(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
