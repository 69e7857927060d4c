//! `sced simulate`: Monte-Carlo FER campaign for a stand-alone decoder
//! or a selected ensemble.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use sced::simlab::{run_fer, StopRule};

use crate::common::{
    assemble_ensemble, load_code, load_pool, parse_list, resolve_chosen, resolve_decoder,
    write_file, CodeOpts, DecoderOpts, ResolvedCode, ResolvedDecoder,
};
use crate::config::{config_digest, FileConfig};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeOpts,
    #[command(flatten)]
    pub decoder: DecoderOpts,
    /// Comma-separated Eb/N0 points in dB, e.g. "2.0,2.5,3.0".
    #[arg(long)]
    pub snr: Option<String>,
    /// Candidate pool file; omitted for stand-alone decoding (K = 1).
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Comma-separated candidate indices into the pool.
    #[arg(long)]
    pub select: Option<String>,
    /// Selection JSON produced by build-ensemble.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Stop a point after this many frame errors.
    #[arg(long)]
    pub min_errors: Option<u64>,
    /// Hard per-point frame cap.
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path (one row per SNR point).
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// JSON output path (resolved config + rows).
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ResolvedSimulate {
    code: ResolvedCode,
    decoder: ResolvedDecoder,
    pool: Option<String>,
    chosen: Vec<usize>,
    snr_db: Vec<f64>,
    min_frame_errors: u64,
    max_frames: u64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct JsonOutput<'a> {
    config: &'a ResolvedSimulate,
    config_digest: &'a str,
    result: &'a sced::simlab::SimResult,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.code.config.as_deref())?;
    let (model, code_echo) = load_code(&args.code, &file)?;
    let (cfg, decoder_echo) = resolve_decoder(&args.decoder, &file)?;

    let snr_text = args.snr.clone();
    let snr_db: Vec<f64> = match (snr_text, &file.simulation.snr_db) {
        (Some(text), _) => parse_list(&text, "SNR")?,
        (None, Some(list)) => list.clone(),
        (None, None) => return Err(CliError::Usage("no SNR points given (--snr)".into())),
    };
    let stop = StopRule {
        min_frame_errors: args
            .min_errors
            .or(file.simulation.min_errors)
            .unwrap_or(200),
        max_frames: args
            .max_frames
            .or(file.simulation.max_frames)
            .unwrap_or(100_000_000),
    };
    let seed = args.seed.or(file.simulation.seed).unwrap_or(1);

    let pool = match &args.pool {
        Some(path) => Some((path.clone(), load_pool(path, &model)?)),
        None => None,
    };
    let chosen = match &pool {
        Some((_, pool)) => resolve_chosen(
            args.select.as_deref(),
            args.selection.as_deref(),
            pool,
        )?,
        None => {
            if args.select.is_some() || args.selection.is_some() {
                return Err(CliError::Usage(
                    "--select/--selection need a --pool".into(),
                ));
            }
            Vec::new()
        }
    };

    let resolved = ResolvedSimulate {
        code: code_echo,
        decoder: decoder_echo,
        pool: pool.as_ref().map(|(p, _)| p.display().to_string()),
        chosen: chosen.clone(),
        snr_db: snr_db.clone(),
        min_frame_errors: stop.min_frame_errors,
        max_frames: stop.max_frames,
        seed,
    };
    let digest = config_digest(&resolved);

    let ens = assemble_ensemble(&model, pool.as_ref().map(|(_, p)| p), &chosen, cfg)?;
    eprintln!(
        "simulate: K = {} paths, {} SNR points, seed {seed}",
        ens.num_paths(),
        snr_db.len()
    );
    let result = run_fer(&ens, &snr_db, stop, seed)?;
    for row in &result.rows {
        eprintln!(
            "  {:.2} dB: fer {:.3e} ({} errors / {} frames)",
            row.ebn0_db, row.fer, row.frame_errors, row.frames
        );
    }

    let csv = result.to_csv();
    if let Some(path) = args.out_csv.as_ref().or(file.output.csv.as_ref()) {
        write_file(path, &csv)?;
    } else {
        print!("{csv}");
    }
    if let Some(path) = args.out_json.as_ref().or(file.output.json.as_ref()) {
        let out = JsonOutput {
            config: &resolved,
            config_digest: &digest,
            result: &result,
        };
        let json = serde_json::to_string_pretty(&out).expect("result serializes");
        write_file(path, &json)?;
    }
    println!("config_digest {digest}");
    Ok(())
}
