//! `sced collect-frames`: accumulate base-decoder error frames at a
//! fixed Eb/N0 or at an operating point found for a target FER.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use sced::simlab::{collect_error_frames, find_operating_snr, OperatingPointSearch};

use crate::common::{
    load_code, resolve_decoder, CodeOpts, DecoderOpts, ResolvedCode, ResolvedDecoder,
};
use crate::config::{config_digest, FileConfig};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CollectArgs {
    #[command(flatten)]
    pub code: CodeOpts,
    #[command(flatten)]
    pub decoder: DecoderOpts,
    /// Collect at this Eb/N0 (dB).
    #[arg(long)]
    pub ebn0: Option<f64>,
    /// Find the Eb/N0 whose FER is within a factor of 2 of this target,
    /// then collect there.
    #[arg(long)]
    pub target_fer: Option<f64>,
    /// Low end of the operating-point search range (dB).
    #[arg(long)]
    pub search_lo: Option<f64>,
    /// High end of the operating-point search range (dB).
    #[arg(long)]
    pub search_hi: Option<f64>,
    /// Number of error frames to accumulate.
    #[arg(long)]
    pub count: Option<usize>,
    /// Give up after scanning this many frames.
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output frame-set file (binary).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ResolvedCollect {
    code: ResolvedCode,
    decoder: ResolvedDecoder,
    ebn0_db: f64,
    target_fer: Option<f64>,
    count: usize,
    max_frames: u64,
    seed: u64,
}

pub fn run(args: &CollectArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.code.config.as_deref())?;
    let (model, code_echo) = load_code(&args.code, &file)?;
    let (cfg, decoder_echo) = resolve_decoder(&args.decoder, &file)?;
    let count = args
        .count
        .or(file.collect.count)
        .ok_or_else(|| CliError::Usage("no frame count given (--count)".into()))?;
    let max_frames = args
        .max_frames
        .or(file.collect.max_frames)
        .unwrap_or(100_000_000);
    let seed = args.seed.or(file.simulation.seed).unwrap_or(1);
    let out_path = args
        .out
        .clone()
        .or_else(|| file.output.frames.clone())
        .ok_or_else(|| CliError::Usage("no output path given (--out)".into()))?;

    let ebn0 = match (args.ebn0.or(file.collect.ebn0_db), args.target_fer.or(file.collect.target_fer)) {
        (Some(e), None) => e,
        (None, Some(target)) => {
            let opts = OperatingPointSearch {
                db_range: (
                    args.search_lo.or(file.collect.search_lo_db).unwrap_or(0.0),
                    args.search_hi.or(file.collect.search_hi_db).unwrap_or(8.0),
                ),
                ..OperatingPointSearch::default()
            };
            eprintln!("collect: searching operating point for FER {target:.1e}");
            let point = find_operating_snr(&model, &cfg, target, seed, &opts)?;
            println!("operating_ebn0_db {point}");
            point
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--ebn0 and --target-fer are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "either --ebn0 or --target-fer is required".into(),
            ))
        }
    };

    let resolved = ResolvedCollect {
        code: code_echo,
        decoder: decoder_echo,
        ebn0_db: ebn0,
        target_fer: args.target_fer.or(file.collect.target_fer),
        count,
        max_frames,
        seed,
    };
    let digest = config_digest(&resolved);

    eprintln!("collect: {count} error frames at {ebn0:.3} dB, seed {seed}");
    let (set, stats) = collect_error_frames(&model, &cfg, ebn0, count, seed, max_frames)?;
    if !stats.complete {
        eprintln!(
            "warning: frame cap {max_frames} hit after {} of {count} failures; writing partial set",
            set.len()
        );
    }
    let writer = File::create(&out_path)
        .map_err(|e| CliError::io(format!("creating {}", out_path.display()), e))?;
    set.write_to(BufWriter::new(writer))?;
    eprintln!(
        "collect: scanned {} frames, stored {}",
        stats.frames_scanned,
        set.len()
    );
    println!("frames_hash {}", set.content_hash_hex());
    println!("config_digest {digest}");
    Ok(())
}
