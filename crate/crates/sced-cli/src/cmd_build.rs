//! `sced build-ensemble`: pool generation, coverage evaluation and
//! greedy selection in one pass, emitting every intermediate artifact.
//! Prints the greedy coverage curve (K~, relative coverage) to stdout.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sced::ensemble::{
    build_pool, coverage_curve, evaluate_candidates, greedy_max_coverage, records_to_text,
    SelectionFile,
};
use sced::simlab::{collect_error_frames, find_operating_snr, ErrorFrameSet, OperatingPointSearch};

use crate::common::{
    load_code, resolve_decoder, resolve_provenance, write_file, CodeOpts, DecoderOpts,
    ResolvedCode, ResolvedDecoder,
};
use crate::config::{config_digest, FileConfig};
use crate::error::CliError;

/// Attempt budget for pool generation, per pool.
const POOL_ATTEMPTS: usize = 10_000_000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub code: CodeOpts,
    #[command(flatten)]
    pub decoder: DecoderOpts,
    /// Error-frame set; collected on the fly (and written here) when
    /// the file is missing and --ebn0/--target-fer is given.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Eb/N0 for on-the-fly collection (dB).
    #[arg(long)]
    pub ebn0: Option<f64>,
    /// Target FER for on-the-fly collection.
    #[arg(long)]
    pub target_fer: Option<f64>,
    /// Error frames to accumulate when collecting on the fly.
    #[arg(long)]
    pub count_frames: Option<usize>,
    /// Pool provenance: bernoulli, cycle-free, lc-triple-bernoulli,
    /// lc-triple-cycle-free, row-removed.
    #[arg(long)]
    pub provenance: Option<String>,
    /// Bernoulli bit probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Row weight for cycle-free sampling.
    #[arg(long)]
    pub dc: Option<usize>,
    /// Pool size (ignored for row-removed, which uses m).
    #[arg(long)]
    pub count: Option<usize>,
    /// Auxiliary paths to select.
    #[arg(long)]
    pub ktilde: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_pool: Option<PathBuf>,
    #[arg(long)]
    pub out_records: Option<PathBuf>,
    #[arg(long)]
    pub out_selection: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ResolvedBuild {
    code: ResolvedCode,
    decoder: ResolvedDecoder,
    frames: String,
    frames_hash: String,
    provenance: String,
    p: Option<f64>,
    d_c: Option<usize>,
    count: usize,
    k_tilde: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct SelectionOutput {
    config: ResolvedBuild,
    config_digest: String,
    #[serde(flatten)]
    selection: SelectionFile,
    k_tilde_max: usize,
}

pub fn run(args: &BuildArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.code.config.as_deref())?;
    let (model, code_echo) = load_code(&args.code, &file)?;
    let (cfg, decoder_echo) = resolve_decoder(&args.decoder, &file)?;
    let seed = args.seed.or(file.simulation.seed).unwrap_or(1);
    let k_tilde = args
        .ktilde
        .or(file.selection.k_tilde)
        .ok_or_else(|| CliError::Usage("no ensemble size given (--ktilde)".into()))?;
    if k_tilde == 0 {
        return Err(CliError::Usage("--ktilde must be at least 1".into()));
    }
    let provenance_name = args
        .provenance
        .clone()
        .or_else(|| file.pool.provenance.clone())
        .ok_or_else(|| CliError::Usage("no pool provenance given (--provenance)".into()))?;
    let provenance = resolve_provenance(
        &provenance_name,
        args.p.or(file.pool.p),
        args.dc.or(file.pool.d_c),
    )?;
    let count = args.count.or(file.pool.count).unwrap_or(model.m());

    // Load the frame set, collecting it first if allowed and needed.
    let frames_path = args
        .frames
        .clone()
        .or_else(|| file.output.frames.clone())
        .ok_or_else(|| CliError::Usage("no frame-set path given (--frames)".into()))?;
    let frames: ErrorFrameSet = if frames_path.exists() {
        let reader = File::open(&frames_path)
            .map_err(|e| CliError::io(format!("opening {}", frames_path.display()), e))?;
        ErrorFrameSet::read_from(BufReader::new(reader))?
    } else {
        let count_frames = args
            .count_frames
            .or(file.collect.count)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{} does not exist; give --ebn0/--target-fer and --count-frames to collect",
                    frames_path.display()
                ))
            })?;
        let ebn0 = match (args.ebn0.or(file.collect.ebn0_db), args.target_fer) {
            (Some(e), None) => e,
            (None, Some(target)) => {
                eprintln!("build-ensemble: searching operating point for FER {target:.1e}");
                find_operating_snr(
                    &model,
                    &cfg,
                    target,
                    seed,
                    &OperatingPointSearch::default(),
                )?
            }
            _ => {
                return Err(CliError::Usage(
                    "on-the-fly collection needs exactly one of --ebn0 / --target-fer".into(),
                ))
            }
        };
        eprintln!("build-ensemble: collecting {count_frames} error frames at {ebn0:.3} dB");
        let (set, stats) = collect_error_frames(
            &model,
            &cfg,
            ebn0,
            count_frames,
            seed,
            args.max_frames_or_default(&file),
        )?;
        if !stats.complete {
            eprintln!(
                "warning: frame cap hit after {} of {count_frames} failures",
                set.len()
            );
        }
        let writer = File::create(&frames_path)
            .map_err(|e| CliError::io(format!("creating {}", frames_path.display()), e))?;
        set.write_to(BufWriter::new(writer))?;
        set
    };
    if frames.code_hash != model.content_hash() {
        return Err(CliError::Io(format!(
            "frame set {} was collected for a different code",
            frames_path.display()
        )));
    }

    eprintln!(
        "build-ensemble: pool provenance {} -> up to {count} candidates",
        provenance_name
    );
    let mut pool_rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x706f_6f6c));
    let pool = build_pool(&model, provenance, count, &mut pool_rng, POOL_ATTEMPTS)?;
    eprintln!(
        "build-ensemble: evaluating {} candidates on {} frames",
        pool.len(),
        frames.len()
    );
    let records = evaluate_candidates(&pool, &frames, &cfg)?;
    let selection = greedy_max_coverage(&records, k_tilde)?;
    let curve = coverage_curve(&records)?;
    let k_tilde_max = curve.len();

    let resolved = ResolvedBuild {
        code: code_echo,
        decoder: decoder_echo,
        frames: frames_path.display().to_string(),
        frames_hash: frames.content_hash_hex(),
        provenance: provenance_name,
        p: args.p.or(file.pool.p),
        d_c: args.dc.or(file.pool.d_c),
        count: pool.len(),
        k_tilde,
        seed,
    };
    let digest = config_digest(&resolved);

    if let Some(path) = args.out_pool.as_ref().or(file.output.pool.as_ref()) {
        write_file(path, &pool.to_text())?;
    }
    if let Some(path) = args.out_records.as_ref().or(file.output.records.as_ref()) {
        write_file(path, &records_to_text(&records, &frames))?;
    }
    if let Some(path) = args.out_selection.as_ref().or(file.output.selection.as_ref()) {
        let out = SelectionOutput {
            selection: SelectionFile::new(&selection, &pool, &frames, k_tilde),
            config: resolved,
            config_digest: digest.clone(),
            k_tilde_max,
        };
        let json = serde_json::to_string_pretty(&out).expect("selection serializes");
        write_file(path, &json)?;
    }

    eprintln!(
        "build-ensemble: chose {:?}, coverage {:.4}, K~max = {k_tilde_max}",
        selection.chosen, selection.relative_coverage
    );
    // Fig. 5-style data: coverage as a function of the ensemble size.
    println!("k_tilde,relative_coverage");
    for (k, cov) in &curve {
        println!("{k},{cov:.6}");
    }
    println!("# chosen {:?}", selection.chosen);
    println!("# config_digest {digest}");
    Ok(())
}

impl BuildArgs {
    fn max_frames_or_default(&self, file: &FileConfig) -> u64 {
        file.collect.max_frames.unwrap_or(100_000_000)
    }
}
