//! `sced verify`: report covering status, 4-cycle deltas, row weights
//! and induced dimensions for a pool (or a selection from it).

use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sced::code::count_4cycles;
use sced::ensemble::{verify_lc, Candidate, LcMethod};
use sced::gf2;

use crate::common::{load_code, load_pool, resolve_chosen, CodeOpts};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub code: CodeOpts,
    /// Candidate pool file to verify.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Verify only these comma-separated candidate indices.
    #[arg(long)]
    pub select: Option<String>,
    /// Verify the candidates chosen in this selection JSON.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Covering check: enumerate or sample (default picks by k).
    #[arg(long)]
    pub method: Option<String>,
    /// Codewords to draw in sample mode.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let file = crate::config::FileConfig::load(args.code.config.as_deref())?;
    let (model, code_echo) = load_code(&args.code, &file)?;
    let pool_path = args
        .pool
        .clone()
        .or_else(|| file.output.pool.clone())
        .ok_or_else(|| CliError::Usage("no pool file given (--pool)".into()))?;
    let pool = load_pool(&pool_path, &model)?;
    let chosen = resolve_chosen(args.select.as_deref(), args.selection.as_deref(), &pool)?;
    let indices: Vec<usize> = if chosen.is_empty() {
        (0..pool.len()).collect()
    } else {
        chosen
    };

    println!("# sced verify report");
    println!(
        "code {} n={} k={} rank={} 4cycles={}",
        code_echo.alist,
        model.n(),
        model.k(),
        model.rank(),
        count_4cycles(model.pcm())
    );
    println!(
        "pool {} candidates={} verifying={}",
        pool_path.display(),
        pool.len(),
        indices.len()
    );

    let base_cycles = count_4cycles(model.pcm());
    for &i in &indices {
        match &pool.candidates()[i] {
            Candidate::Appended(rows) => {
                let weights: Vec<usize> = rows.iter().map(|r| r.weight()).collect();
                let stacked = model.pcm().stack(rows);
                let delta = count_4cycles(&stacked) - base_cycles;
                let rank = gf2::rank(&stacked);
                let dim = model.n() - rank;
                let flag = if delta > 0 { "  ADDS-4-CYCLES" } else { "" };
                println!(
                    "candidate {i} label={} rows={} weights={:?} 4cycle_delta={delta} dim={dim}{flag}",
                    pool.label(i),
                    rows.len(),
                    weights
                );
            }
            Candidate::RowRemoved(row) => {
                let reduced = model.pcm().without_row(*row);
                let rank = gf2::rank(&reduced);
                let dim = model.n() - rank;
                println!(
                    "candidate {i} label={} removed_row={row} ambient_dim={dim}",
                    pool.label(i)
                );
            }
        }
    }

    // Covering status over the appended-row candidates in the set.
    let specs = pool.subcode_specs(&indices)?;
    if specs.is_empty() {
        println!("lc not-applicable (no appended-row candidates)");
        return Ok(());
    }
    let method = match args.method.as_deref() {
        Some("enumerate") => LcMethod::Enumerate,
        Some("sample") => LcMethod::Sample(args.samples),
        None => {
            if model.k() <= 24 {
                LcMethod::Enumerate
            } else {
                LcMethod::Sample(args.samples)
            }
        }
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown method {other:?}, expected enumerate or sample"
            )))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let report = verify_lc(&model, &specs, method, &mut rng)?;
    match method {
        LcMethod::Enumerate => {
            println!(
                "lc method=enumerate checked={} cover={} uncovered={:.6}",
                report.checked,
                if report.is_cover { "yes (exact)" } else { "no" },
                report.uncovered_fraction
            );
        }
        LcMethod::Sample(_) => {
            // Normal-approximation 95% interval on the uncovered fraction.
            let p = report.uncovered_fraction;
            let half = 1.96 * (p * (1.0 - p) / report.checked as f64).sqrt();
            println!(
                "lc method=sample checked={} cover={} uncovered={:.6} ci95=[{:.6},{:.6}]",
                report.checked,
                if report.is_cover {
                    "yes (sampled)"
                } else {
                    "no"
                },
                p,
                (p - half).max(0.0),
                (p + half).min(1.0)
            );
        }
    }
    Ok(())
}
