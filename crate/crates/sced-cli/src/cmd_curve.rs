//! `sced coverage-curve`: recompute the greedy coverage curve from a
//! saved coverage-record file, without any re-decoding.

use std::path::PathBuf;

use clap::Args;

use sced::ensemble::{coverage_curve, records_from_text};

use crate::common::{read_file, write_file};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Coverage record file from build-ensemble.
    #[arg(long)]
    pub records: PathBuf,
    /// Write the curve CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &CurveArgs) -> Result<(), CliError> {
    let text = read_file(&args.records)?;
    let (frames_hash, n_frames, records) = records_from_text(&text)?;
    let curve = coverage_curve(&records)?;
    let mut out = String::from("k_tilde,relative_coverage\n");
    for (k, cov) in &curve {
        out.push_str(&format!("{k},{cov:.6}\n"));
    }
    eprintln!(
        "coverage-curve: {} candidates on {} frames (hash {}), K~max = {}",
        records.len(),
        n_frames,
        &frames_hash[..16],
        curve.len()
    );
    match &args.out {
        Some(path) => write_file(path, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}
