//! Shared option groups and helpers for the subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::Serialize;

use sced::bpdec::{DecoderConfig, DecoderKind};
use sced::code::{parse_alist, parse_puncture_mask, CodeModel};
use sced::ensemble::{CandidatePool, Provenance, SelectionFile};
use sced::sceddec::ScedEnsemble;

use crate::config::FileConfig;
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CodeOpts {
    /// Parity-check matrix in alist format.
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Puncture-mask side file: one line of n characters in {0,1}.
    #[arg(long)]
    pub puncture: Option<PathBuf>,
    /// TOML config file supplying defaults for omitted flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecoderOpts {
    /// Message update rule: spa or nms.
    #[arg(long)]
    pub decoder: Option<String>,
    /// Min-sum normalization factor in (0, 1].
    #[arg(long)]
    pub normalization: Option<f64>,
    /// Maximum BP iterations per path.
    #[arg(long)]
    pub imax: Option<u32>,
    /// Message magnitude bound.
    #[arg(long)]
    pub clip: Option<f64>,
}

/// Fully resolved code reference, embedded in output files.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedCode {
    pub alist: String,
    pub puncture: Option<String>,
    pub code_hash: String,
    pub n: usize,
    pub k: usize,
}

/// Fully resolved decoder parameters, embedded in output files.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedDecoder {
    pub kind: String,
    pub normalization: f64,
    pub max_iterations: u32,
    pub clip: f64,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Load the code model named by flags/config and echo the resolution.
pub fn load_code(
    opts: &CodeOpts,
    file: &FileConfig,
) -> Result<(Arc<CodeModel>, ResolvedCode), CliError> {
    let alist_path = opts
        .code
        .clone()
        .or_else(|| file.code.alist.clone())
        .ok_or_else(|| CliError::Usage("no code file given (--code or [code].alist)".into()))?;
    let text = read_file(&alist_path)?;
    let model = parse_alist(&text)?;
    let puncture_path = opts.puncture.clone().or_else(|| file.code.puncture.clone());
    let model = match &puncture_path {
        Some(p) => {
            let mask_text = read_file(p)?;
            let mask = parse_puncture_mask(&mask_text, model.n())?;
            model.with_puncture_mask(mask)?
        }
        None => model,
    };
    let model = Arc::new(model);
    let resolved = ResolvedCode {
        alist: alist_path.display().to_string(),
        puncture: puncture_path.map(|p| p.display().to_string()),
        code_hash: model.content_hash_hex(),
        n: model.n(),
        k: model.k(),
    };
    Ok((model, resolved))
}

/// Resolve decoder flags against config defaults.
pub fn resolve_decoder(
    opts: &DecoderOpts,
    file: &FileConfig,
) -> Result<(DecoderConfig, ResolvedDecoder), CliError> {
    let kind_text = opts
        .decoder
        .clone()
        .or_else(|| file.decoder.kind.clone())
        .unwrap_or_else(|| "spa".to_owned());
    let kind = match kind_text.as_str() {
        "spa" => DecoderKind::Spa,
        "nms" => DecoderKind::Nms,
        other => {
            return Err(CliError::Usage(format!(
                "unknown decoder {other:?}, expected spa or nms"
            )))
        }
    };
    let cfg = DecoderConfig {
        kind,
        normalization: opts
            .normalization
            .or(file.decoder.normalization)
            .unwrap_or(0.75),
        max_iterations: opts.imax.or(file.decoder.max_iterations).unwrap_or(32),
        llr_clip: opts
            .clip
            .or(file.decoder.clip)
            .unwrap_or(DecoderConfig::DEFAULT_CLIP),
    };
    cfg.validate()?;
    let resolved = ResolvedDecoder {
        kind: kind.name().to_owned(),
        normalization: cfg.normalization,
        max_iterations: cfg.max_iterations,
        clip: cfg.llr_clip,
    };
    Ok((cfg, resolved))
}

/// Parse a provenance name plus its parameter flags.
pub fn resolve_provenance(
    name: &str,
    p: Option<f64>,
    d_c: Option<usize>,
) -> Result<Provenance, CliError> {
    let need_p = || p.ok_or_else(|| CliError::Usage(format!("provenance {name} needs --p")));
    let need_dc = || d_c.ok_or_else(|| CliError::Usage(format!("provenance {name} needs --dc")));
    match name {
        "bernoulli" => Ok(Provenance::Bernoulli { p: need_p()? }),
        "cycle-free" => Ok(Provenance::CycleFree { d_c: need_dc()? }),
        "lc-triple-bernoulli" => Ok(Provenance::LcTriple {
            p: Some(need_p()?),
            d_c: None,
        }),
        "lc-triple-cycle-free" => Ok(Provenance::LcTriple {
            p: None,
            d_c: Some(need_dc()?),
        }),
        "row-removed" => Ok(Provenance::RowRemoved),
        other => Err(CliError::Usage(format!(
            "unknown provenance {other:?} (bernoulli, cycle-free, lc-triple-bernoulli, \
             lc-triple-cycle-free, row-removed)"
        ))),
    }
}

/// Parse a comma-separated list ("1.0,1.5,2.0").
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad {what} entry {tok:?}")))
        })
        .collect()
}

/// Load a pool file against its base model.
pub fn load_pool(path: &Path, model: &Arc<CodeModel>) -> Result<CandidatePool, CliError> {
    let text = read_file(path)?;
    Ok(CandidatePool::from_text(&text, model)?)
}

/// Chosen candidate indices from `--select` or a selection JSON file;
/// the selection file must reference the supplied pool.
pub fn resolve_chosen(
    select: Option<&str>,
    selection_path: Option<&Path>,
    pool: &CandidatePool,
) -> Result<Vec<usize>, CliError> {
    match (select, selection_path) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--select and --selection are mutually exclusive".into(),
        )),
        (Some(list), None) => {
            let chosen: Vec<usize> = parse_list(list, "candidate index")?;
            for &c in &chosen {
                if c >= pool.len() {
                    return Err(CliError::Usage(format!(
                        "candidate index {c} out of range 0..{}",
                        pool.len()
                    )));
                }
            }
            Ok(chosen)
        }
        (None, Some(path)) => {
            let text = read_file(path)?;
            let file: SelectionFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Io(format!("parsing selection {}: {e}", path.display())))?;
            let pool_hash = sced::ensemble::pool_hash_hex(pool);
            if file.pool_hash != pool_hash {
                return Err(CliError::Io(format!(
                    "selection references pool hash {} but the pool file hashes to {pool_hash}",
                    file.pool_hash
                )));
            }
            Ok(file.chosen)
        }
        (None, None) => Ok(Vec::new()),
    }
}

/// Assemble base path plus the chosen pool candidates into an ensemble.
pub fn assemble_ensemble(
    model: &Arc<CodeModel>,
    pool: Option<&CandidatePool>,
    chosen: &[usize],
    cfg: DecoderConfig,
) -> Result<ScedEnsemble, CliError> {
    let mut ens = ScedEnsemble::new(model, cfg);
    if let Some(pool) = pool {
        for &idx in chosen {
            ens.push_path(pool.path(idx)?, cfg)?;
        }
    }
    Ok(ens)
}
