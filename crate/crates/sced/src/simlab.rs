//! AWGN/BPSK channel, Monte-Carlo FER campaigns, and error-frame
//! collection.
//!
//! Every frame draws its randomness from a dedicated ChaCha8 stream
//! derived from (seed, context, frame counter), so results are
//! bit-identical no matter how frames are distributed over worker
//! threads. Per-point statistics are integer sums, which makes the
//! aggregation order-independent. Gaussian noise uses an explicit
//! Box-Muller transform of the counter-based uniform stream; the
//! transform is fixed here so runs reproduce within a build (bit
//! exactness across implementations is not promised).

use std::io::{Read, Write};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bpdec::{Decoder, DecoderConfig};
use crate::code::{CodeModel, DecodePath};
use crate::gf2::BitVector;
use crate::sceddec::{ScedDecoder, ScedEnsemble};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid channel/simulation parameter: {0}")]
    InvalidParam(String),
    #[error("no Eb/N0 in [{lo}, {hi}] dB brackets target FER {target} within a factor of 2")]
    BracketNotFound { lo: f64, hi: f64, target: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad frame-set file: {0}")]
    Format(String),
}

/// Frames are simulated in fixed-size batches; the stop rule is applied
/// at batch boundaries, which keeps frame counts independent of the
/// number of worker threads.
const BATCH_FRAMES: u64 = 1024;

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// BPSK/AWGN channel parameters at one Eb/N0 point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    /// k / n_tx of the transmitted code.
    pub rate: f64,
    /// Noise variance 1 / (2 * rate * 10^(ebn0/10)).
    pub sigma2: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self, SimError> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(SimError::InvalidParam(format!("rate {rate} outside (0, 1]")));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        Ok(ChannelParams {
            ebn0_db,
            rate,
            sigma2,
        })
    }
}

/// Standard-normal source: Box-Muller over pairs of uniforms taken from
/// the top 53 bits of `next_u64`, `u1` in (0, 1] and `u2` in [0, 1).
struct GaussSource<'r, R: RngCore> {
    rng: &'r mut R,
    spare: Option<f64>,
}

impl<'r, R: RngCore> GaussSource<'r, R> {
    fn new(rng: &'r mut R) -> Self {
        GaussSource { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let scale = (1u64 << 53) as f64;
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 / scale;
        let u2 = (self.rng.next_u64() >> 11) as f64 / scale;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Transmit a codeword over BPSK/AWGN and return channel LLRs.
///
/// Transmitted positions map bit 0 to +1 and bit 1 to -1, receive
/// `y = s + noise`, and carry `llr = 2 y / sigma2`. Punctured positions
/// carry LLR 0 and consume no randomness. Noise is drawn in position
/// order.
pub fn transmit<R: RngCore>(
    x: &BitVector,
    params: &ChannelParams,
    mask: &BitVector,
    rng: &mut R,
) -> Vec<f64> {
    let sigma = params.sigma2.sqrt();
    let mut gauss = GaussSource::new(rng);
    (0..x.len())
        .map(|j| {
            if mask.get(j) {
                0.0
            } else {
                let s = if x.get(j) { -1.0 } else { 1.0 };
                let y = s + sigma * gauss.next();
                2.0 * y / params.sigma2
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Counter-based per-frame randomness
// ---------------------------------------------------------------------------

/// Randomness contexts; each (seed, context, index) triple owns an
/// independent family of frame streams.
#[derive(Debug, Clone, Copy)]
pub enum RngContext {
    /// FER simulation at SNR point `index`.
    Simulate { point: u32 },
    /// Error-frame collection.
    Collect,
    /// Pilot runs of the operating-point search, probe `index`.
    Pilot { probe: u32 },
}

impl RngContext {
    fn tag(&self) -> u64 {
        match self {
            RngContext::Simulate { point } => 0x5100_0000u64 | *point as u64,
            RngContext::Collect => 0xC000_0000u64,
            RngContext::Pilot { probe } => 0x9000_0000u64 | *probe as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The ChaCha8 stream for one frame: seeded from (seed, context) via
/// splitmix64, with the frame counter selecting the stream.
pub fn frame_rng(seed: u64, ctx: RngContext, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ ctx.tag()));
    rng.set_stream(frame);
    rng
}

// ---------------------------------------------------------------------------
// FER campaigns
// ---------------------------------------------------------------------------

/// Stop rule for one SNR point: stop at the end of the first batch with
/// at least `min_frame_errors` accumulated, or at `max_frames`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: 200,
            max_frames: 100_000_000,
        }
    }
}

/// Per-SNR-point statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SnrPointResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    /// Mean completed iterations per path, in path order.
    pub mean_iterations_per_path: Vec<f64>,
    /// Mean of max-over-paths iterations.
    pub mean_latency: f64,
    /// Mean of summed iterations.
    pub mean_complexity: f64,
}

/// A full campaign result.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub seed: u64,
    /// Digest over code, paths, decoder configs, SNR list, stop rule and
    /// seed; two runs with equal digests are byte-identical.
    pub config_digest: String,
    pub rows: Vec<SnrPointResult>,
}

impl SimResult {
    /// CSV with one row per SNR point. Column count depends on the
    /// number of paths.
    pub fn to_csv(&self) -> String {
        let paths = self
            .rows
            .first()
            .map_or(0, |r| r.mean_iterations_per_path.len());
        let mut out = String::new();
        out.push_str("ebn0_db,frames,frame_errors,fer,mean_latency,mean_complexity");
        for i in 0..paths {
            out.push_str(&format!(",mean_iterations_path{i}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6e},{:.6},{:.6}",
                r.ebn0_db, r.frames, r.frame_errors, r.fer, r.mean_latency, r.mean_complexity
            ));
            for m in &r.mean_iterations_per_path {
                out.push_str(&format!(",{m:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
struct PointAccum {
    frames: u64,
    errors: u64,
    latency_sum: u64,
    complexity_sum: u64,
    lambda_sums: Vec<u64>,
}

impl PointAccum {
    fn new(paths: usize) -> Self {
        PointAccum {
            lambda_sums: vec![0; paths],
            ..Default::default()
        }
    }

    fn finish(self, ebn0_db: f64) -> SnrPointResult {
        let n = self.frames.max(1) as f64;
        SnrPointResult {
            ebn0_db,
            frames: self.frames,
            frame_errors: self.errors,
            fer: self.errors as f64 / self.frames.max(1) as f64,
            mean_iterations_per_path: self
                .lambda_sums
                .iter()
                .map(|&s| s as f64 / n)
                .collect(),
            mean_latency: self.latency_sum as f64 / n,
            mean_complexity: self.complexity_sum as f64 / n,
        }
    }
}

struct FrameStats {
    error: bool,
    latency: u32,
    complexity: u64,
    lambdas: Vec<u32>,
}

fn digest_campaign(
    ens: &ScedEnsemble,
    snr_points: &[f64],
    stop: &StopRule,
    seed: u64,
) -> String {
    let mut h = Sha256::new();
    h.update(ens.base().content_hash());
    for (path, cfg) in ens.paths() {
        h.update(path.label().as_bytes());
        h.update([path.is_subcode() as u8]);
        for cols in &path.tanner().check_neighbors {
            for &c in cols {
                h.update(c.to_le_bytes());
            }
            h.update(u32::MAX.to_le_bytes());
        }
        h.update(cfg.content_hash());
    }
    for p in snr_points {
        h.update(p.to_bits().to_le_bytes());
    }
    h.update(stop.min_frame_errors.to_le_bytes());
    h.update(stop.max_frames.to_le_bytes());
    h.update(seed.to_le_bytes());
    h.finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Monte-Carlo FER campaign over the given Eb/N0 points.
///
/// Each frame draws a random codeword, transmits it, ensemble-decodes,
/// and counts a frame error iff the estimate differs from the codeword
/// anywhere in its n bits. Deterministic for a fixed seed regardless of
/// the rayon worker count.
pub fn run_fer(
    ens: &ScedEnsemble,
    snr_points: &[f64],
    stop: StopRule,
    seed: u64,
) -> Result<SimResult, SimError> {
    if snr_points.is_empty() {
        return Err(SimError::InvalidParam("empty SNR point list".into()));
    }
    let base = ens.base();
    let mask = base.puncture_mask();
    let paths = ens.num_paths();
    let mut rows = Vec::with_capacity(snr_points.len());
    for (pt_idx, &ebn0) in snr_points.iter().enumerate() {
        let params = ChannelParams::new(ebn0, base.rate())?;
        let ctx = RngContext::Simulate {
            point: pt_idx as u32,
        };
        let mut accum = PointAccum::new(paths);
        let mut next_frame = 0u64;
        loop {
            let batch_end = (next_frame + BATCH_FRAMES).min(stop.max_frames);
            let stats: Vec<FrameStats> = (next_frame..batch_end)
                .into_par_iter()
                .map_init(
                    || ScedDecoder::new(ens).expect("ensemble decoder construction"),
                    |dec, frame| {
                        let mut rng = frame_rng(seed, ctx, frame);
                        let x = base.random_codeword(&mut rng);
                        let llrs = transmit(&x, &params, mask, &mut rng);
                        let res = dec.decode(&llrs).expect("frame decode");
                        FrameStats {
                            error: res.estimate != x,
                            latency: res.latency,
                            complexity: res.complexity,
                            lambdas: res
                                .list_members
                                .iter()
                                .map(|o| o.iterations)
                                .collect(),
                        }
                    },
                )
                .collect();
            for s in &stats {
                accum.frames += 1;
                accum.errors += s.error as u64;
                accum.latency_sum += s.latency as u64;
                accum.complexity_sum += s.complexity;
                for (sum, &l) in accum.lambda_sums.iter_mut().zip(&s.lambdas) {
                    *sum += l as u64;
                }
            }
            next_frame = batch_end;
            if accum.errors >= stop.min_frame_errors || next_frame >= stop.max_frames {
                break;
            }
        }
        rows.push(accum.finish(ebn0));
    }
    Ok(SimResult {
        seed,
        config_digest: digest_campaign(ens, snr_points, &stop, seed),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Error-frame sets
// ---------------------------------------------------------------------------

/// One stored base-decoder failure.
#[derive(Debug, Clone)]
pub struct ErrorFrame {
    pub codeword: BitVector,
    /// Channel LLRs quantized to f32 at the channel boundary, so stored
    /// frames re-decode exactly as they decoded during collection.
    pub llrs: Vec<f32>,
}

/// A set of received words the base decoder failed on, with their
/// transmitted codewords.
#[derive(Debug, Clone)]
pub struct ErrorFrameSet {
    pub code_hash: [u8; 32],
    pub decoder_hash: [u8; 32],
    pub ebn0_db: f64,
    pub sigma2: f64,
    pub frames: Vec<ErrorFrame>,
}

const FRAMESET_MAGIC: &[u8; 8] = b"SCEDEFS1";
const FRAMESET_VERSION: u32 = 1;

impl ErrorFrameSet {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Block length of the stored frames.
    pub fn n(&self) -> usize {
        self.frames.first().map_or(0, |f| f.llrs.len())
    }

    /// Little-endian binary layout: magic, version, n, count, code and
    /// decoder hashes, ebn0, sigma2, then per frame the packed codeword
    /// bits followed by n f32 LLRs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), SimError> {
        let n = self.n() as u32;
        w.write_all(FRAMESET_MAGIC)?;
        w.write_all(&FRAMESET_VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&(self.frames.len() as u32).to_le_bytes())?;
        w.write_all(&self.code_hash)?;
        w.write_all(&self.decoder_hash)?;
        w.write_all(&self.ebn0_db.to_le_bytes())?;
        w.write_all(&self.sigma2.to_le_bytes())?;
        for frame in &self.frames {
            w.write_all(&frame.codeword.to_bytes())?;
            for &l in &frame.llrs {
                w.write_all(&l.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, SimError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != FRAMESET_MAGIC {
            return Err(SimError::Format("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != FRAMESET_VERSION {
            return Err(SimError::Format(format!("unsupported version {version}")));
        }
        r.read_exact(&mut u32buf)?;
        let n = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let count = u32::from_le_bytes(u32buf) as usize;
        let mut code_hash = [0u8; 32];
        r.read_exact(&mut code_hash)?;
        let mut decoder_hash = [0u8; 32];
        r.read_exact(&mut decoder_hash)?;
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let ebn0_db = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let sigma2 = f64::from_le_bytes(f64buf);
        let mut frames = Vec::with_capacity(count);
        let mut word_bytes = vec![0u8; n.div_ceil(8)];
        for _ in 0..count {
            r.read_exact(&mut word_bytes)?;
            let codeword = BitVector::from_bytes(n, &word_bytes)
                .ok_or_else(|| SimError::Format("dirty codeword padding".into()))?;
            let mut llrs = Vec::with_capacity(n);
            for _ in 0..n {
                let mut b = [0u8; 4];
                r.read_exact(&mut b)?;
                llrs.push(f32::from_le_bytes(b));
            }
            frames.push(ErrorFrame { codeword, llrs });
        }
        Ok(ErrorFrameSet {
            code_hash,
            decoder_hash,
            ebn0_db,
            sigma2,
            frames,
        })
    }

    /// SHA-256 over the serialized bytes; identifies the frame set in
    /// coverage-record files.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("vec write");
        Sha256::digest(&buf).into()
    }

    pub fn content_hash_hex(&self) -> String {
        self.content_hash()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Statistics of a collection run.
#[derive(Debug, Clone, Copy)]
pub struct CollectStats {
    pub frames_scanned: u64,
    /// False when the frame cap was hit before the requested count.
    pub complete: bool,
}

/// Accumulate `count` frames the stand-alone base decoder fails on.
///
/// Frames are random codewords; LLRs are quantized to f32 at the
/// channel boundary before decoding and storage. Failures keep their
/// global frame-counter order. When `max_frames` is scanned first, the
/// partial set is returned with `complete = false`.
pub fn collect_error_frames(
    model: &Arc<CodeModel>,
    cfg: &DecoderConfig,
    ebn0_db: f64,
    count: usize,
    seed: u64,
    max_frames: u64,
) -> Result<(ErrorFrameSet, CollectStats), SimError> {
    if count == 0 {
        return Err(SimError::InvalidParam("frame count must be >= 1".into()));
    }
    let params = ChannelParams::new(ebn0_db, model.rate())?;
    let mask = model.puncture_mask();
    let path = DecodePath::base_path(model);
    let ctx = RngContext::Collect;
    let mut frames: Vec<ErrorFrame> = Vec::with_capacity(count);
    let mut next_frame = 0u64;
    while frames.len() < count && next_frame < max_frames {
        let batch_end = (next_frame + BATCH_FRAMES).min(max_frames);
        let failures: Vec<Option<ErrorFrame>> = (next_frame..batch_end)
            .into_par_iter()
            .map_init(
                || Decoder::new(&path, *cfg).expect("decoder construction"),
                |dec, frame| {
                    let mut rng = frame_rng(seed, ctx, frame);
                    let x = model.random_codeword(&mut rng);
                    let raw = transmit(&x, &params, mask, &mut rng);
                    let llrs32: Vec<f32> = raw.iter().map(|&l| l as f32).collect();
                    let llrs: Vec<f64> = llrs32.iter().map(|&l| l as f64).collect();
                    let out = dec.decode(&llrs).expect("frame decode");
                    if out.hard_decision != x {
                        Some(ErrorFrame {
                            codeword: x,
                            llrs: llrs32,
                        })
                    } else {
                        None
                    }
                },
            )
            .collect();
        for f in failures.into_iter().flatten() {
            if frames.len() < count {
                frames.push(f);
            }
        }
        next_frame = batch_end;
    }
    let complete = frames.len() == count;
    let set = ErrorFrameSet {
        code_hash: model.content_hash(),
        decoder_hash: cfg.content_hash(),
        ebn0_db,
        sigma2: params.sigma2,
        frames,
    };
    Ok((
        set,
        CollectStats {
            frames_scanned: next_frame,
            complete,
        },
    ))
}

// ---------------------------------------------------------------------------
// Operating-point search
// ---------------------------------------------------------------------------

/// Knobs for [`find_operating_snr`].
#[derive(Debug, Clone, Copy)]
pub struct OperatingPointSearch {
    pub db_range: (f64, f64),
    /// Stop rule for each pilot run.
    pub pilot_errors: u64,
    pub pilot_max_frames: u64,
    pub max_probes: u32,
}

impl Default for OperatingPointSearch {
    fn default() -> Self {
        OperatingPointSearch {
            db_range: (0.0, 8.0),
            pilot_errors: 50,
            pilot_max_frames: 400_000,
            max_probes: 24,
        }
    }
}

fn pilot_fer(
    model: &Arc<CodeModel>,
    cfg: &DecoderConfig,
    ebn0_db: f64,
    seed: u64,
    probe: u32,
    opts: &OperatingPointSearch,
) -> Result<f64, SimError> {
    let params = ChannelParams::new(ebn0_db, model.rate())?;
    let mask = model.puncture_mask();
    let path = DecodePath::base_path(model);
    let ctx = RngContext::Pilot { probe };
    let mut frames = 0u64;
    let mut errors = 0u64;
    let mut next_frame = 0u64;
    while errors < opts.pilot_errors && next_frame < opts.pilot_max_frames {
        let batch_end = (next_frame + BATCH_FRAMES).min(opts.pilot_max_frames);
        let errs: u64 = (next_frame..batch_end)
            .into_par_iter()
            .map_init(
                || Decoder::new(&path, *cfg).expect("decoder construction"),
                |dec, frame| {
                    let mut rng = frame_rng(seed, ctx, frame);
                    let x = model.random_codeword(&mut rng);
                    let llrs = transmit(&x, &params, mask, &mut rng);
                    (dec.decode(&llrs).expect("frame decode").hard_decision != x) as u64
                },
            )
            .sum();
        errors += errs;
        frames += batch_end - next_frame;
        next_frame = batch_end;
    }
    Ok(errors as f64 / frames.max(1) as f64)
}

/// Bisection over Eb/N0 until a pilot FER lands within a factor of 2 of
/// `target_fer`; returns that point. Assumes FER decreases with SNR.
pub fn find_operating_snr(
    model: &Arc<CodeModel>,
    cfg: &DecoderConfig,
    target_fer: f64,
    seed: u64,
    opts: &OperatingPointSearch,
) -> Result<f64, SimError> {
    if !(target_fer > 0.0 && target_fer < 1.0) {
        return Err(SimError::InvalidParam(format!(
            "target FER {target_fer} outside (0, 1)"
        )));
    }
    let (mut lo, mut hi) = opts.db_range;
    if !(hi > lo) {
        return Err(SimError::InvalidParam("empty dB range".into()));
    }
    let bracket = |fer: f64| fer >= target_fer / 2.0 && fer <= 2.0 * target_fer;
    let err = SimError::BracketNotFound {
        lo,
        hi,
        target: target_fer,
    };
    let mut probe = 0u32;
    // FER is highest at the low end; bail out early if the range cannot
    // contain the target.
    let fer_lo = pilot_fer(model, cfg, lo, seed, probe, opts)?;
    probe += 1;
    if bracket(fer_lo) {
        return Ok(lo);
    }
    if fer_lo < target_fer / 2.0 {
        return Err(err);
    }
    let fer_hi = pilot_fer(model, cfg, hi, seed, probe, opts)?;
    probe += 1;
    if bracket(fer_hi) {
        return Ok(hi);
    }
    if fer_hi > 2.0 * target_fer {
        return Err(err);
    }
    while probe < opts.max_probes {
        let mid = (lo + hi) / 2.0;
        let fer = pilot_fer(model, cfg, mid, seed, probe, opts)?;
        probe += 1;
        if bracket(fer) {
            return Ok(mid);
        }
        if fer > 2.0 * target_fer {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 5e-3 {
            break;
        }
    }
    Err(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;

    fn hamming_model() -> Arc<CodeModel> {
        let rows = ["1010101", "0110011", "0001111"]
            .iter()
            .map(|s| BitVector::from_binary_str(s).unwrap())
            .collect::<Vec<_>>();
        Arc::new(CodeModel::from_pcm(BitMatrix::from_rows(&rows)))
    }

    #[test]
    fn channel_params_formula() {
        let p = ChannelParams::new(0.0, 0.5).unwrap();
        assert!((p.sigma2 - 1.0).abs() < 1e-12);
        assert!(ChannelParams::new(1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, 1.5).is_err());
    }

    #[test]
    fn noiseless_limit_recovers_signs() {
        let model = hamming_model();
        let mut rng = frame_rng(1, RngContext::Collect, 0);
        let x = model.random_codeword(&mut rng);
        // Very high SNR: noise is negligible against +-1 symbols.
        let params = ChannelParams::new(40.0, model.rate()).unwrap();
        let llrs = transmit(&x, &params, model.puncture_mask(), &mut rng);
        for (j, &l) in llrs.iter().enumerate() {
            assert_eq!(l < 0.0, x.get(j));
        }
    }

    #[test]
    fn transmit_moment_check() {
        // Empirical mean of the LLR at bit-0 positions approaches
        // 2 / sigma2 with variance 4 / sigma2.
        let params = ChannelParams::new(2.0, 0.5).unwrap();
        let x = BitVector::zeros(100);
        let mask = BitVector::zeros(100);
        let mut rng = frame_rng(7, RngContext::Collect, 0);
        let draws = 10_000usize;
        let mut sum = 0.0f64;
        for _ in 0..draws {
            for l in transmit(&x, &params, &mask, &mut rng) {
                sum += l;
            }
        }
        let total = (draws * 100) as f64;
        let mean = sum / total;
        let expect = 2.0 / params.sigma2;
        let sigma_of_mean = (4.0 / params.sigma2 / total).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sigma_of_mean,
            "mean {mean} vs {expect} +- 3*{sigma_of_mean}"
        );
    }

    #[test]
    fn punctured_positions_carry_zero_llr() {
        let model = hamming_model();
        let masked = model
            .clone()
            .with_puncture_mask(BitVector::from_binary_str("1010000").unwrap())
            .unwrap();
        let params = ChannelParams::new(2.0, masked.rate()).unwrap();
        let mut rng = frame_rng(3, RngContext::Collect, 9);
        let x = masked.random_codeword(&mut rng);
        let llrs = transmit(&x, &params, masked.puncture_mask(), &mut rng);
        assert_eq!(llrs[0], 0.0);
        assert_eq!(llrs[2], 0.0);
        assert!(llrs[1] != 0.0);
    }

    #[test]
    fn frame_rng_streams_are_stable_and_distinct() {
        let a: Vec<u64> = {
            let mut r = frame_rng(42, RngContext::Simulate { point: 0 }, 5);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = frame_rng(42, RngContext::Simulate { point: 0 }, 5);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut r = frame_rng(42, RngContext::Simulate { point: 0 }, 6);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<u64> = {
            let mut r = frame_rng(42, RngContext::Simulate { point: 1 }, 5);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn high_snr_fer_is_zero() {
        let model = hamming_model();
        let ens = ScedEnsemble::new(&model, DecoderConfig::spa(8));
        let res = run_fer(
            &ens,
            &[12.0],
            StopRule {
                min_frame_errors: 10,
                max_frames: 2000,
            },
            7,
        )
        .unwrap();
        assert_eq!(res.rows[0].frame_errors, 0);
        assert_eq!(res.rows[0].frames, 2000);
        assert_eq!(res.rows[0].fer, 0.0);
    }

    #[test]
    fn run_fer_is_deterministic_across_worker_counts() {
        let model = hamming_model();
        let ens = ScedEnsemble::new(&model, DecoderConfig::nms(0.75, 8));
        let stop = StopRule {
            min_frame_errors: 50,
            max_frames: 20_000,
        };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_fer(&ens, &[1.0, 3.0], stop, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.config_digest, b.config_digest);
    }

    #[test]
    fn collected_frames_refail_and_round_trip() {
        let model = hamming_model();
        let cfg = DecoderConfig::spa(8);
        // Low SNR so failures are plentiful.
        let (set, stats) =
            collect_error_frames(&model, &cfg, 0.0, 25, 11, 100_000).unwrap();
        assert!(stats.complete);
        assert_eq!(set.len(), 25);
        let path = DecodePath::base_path(&model);
        let mut dec = Decoder::new(&path, cfg).unwrap();
        for frame in &set.frames {
            assert!(model.contains(&frame.codeword).unwrap());
            let llrs: Vec<f64> = frame.llrs.iter().map(|&l| l as f64).collect();
            let out = dec.decode(&llrs).unwrap();
            assert_ne!(out.hard_decision, frame.codeword, "stored frame must re-fail");
        }
        // Binary round trip is exact.
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        let back = ErrorFrameSet::read_from(&buf[..]).unwrap();
        assert_eq!(back.len(), set.len());
        assert_eq!(back.code_hash, set.code_hash);
        for (a, b) in set.frames.iter().zip(&back.frames) {
            assert_eq!(a.codeword, b.codeword);
            assert_eq!(a.llrs, b.llrs);
        }
        assert_eq!(back.content_hash(), set.content_hash());
    }

    #[test]
    fn collect_partial_set_when_cap_hits() {
        let model = hamming_model();
        let cfg = DecoderConfig::spa(8);
        // High SNR: failures are so rare the cap must trigger.
        let (set, stats) =
            collect_error_frames(&model, &cfg, 11.0, 500, 13, 4096).unwrap();
        assert!(!stats.complete);
        assert!(set.len() < 500);
        assert_eq!(stats.frames_scanned, 4096);
    }

    #[test]
    fn operating_point_bracket_errors() {
        let model = hamming_model();
        let cfg = DecoderConfig::spa(8);
        // Target 0.5 in a high-SNR range cannot be bracketed.
        let opts = OperatingPointSearch {
            db_range: (9.0, 12.0),
            pilot_errors: 10,
            pilot_max_frames: 4096,
            max_probes: 8,
        };
        assert!(matches!(
            find_operating_snr(&model, &cfg, 0.5, 3, &opts),
            Err(SimError::BracketNotFound { .. })
        ));
    }

    #[test]
    fn operating_point_lands_near_target() {
        let model = hamming_model();
        let cfg = DecoderConfig::spa(8);
        let opts = OperatingPointSearch {
            db_range: (0.0, 10.0),
            pilot_errors: 60,
            pilot_max_frames: 60_000,
            max_probes: 16,
        };
        let point = find_operating_snr(&model, &cfg, 0.05, 5, &opts).unwrap();
        // Re-measure at the returned point with a fresh probe index.
        let fer = pilot_fer(&model, &cfg, point, 5, 1000, &opts).unwrap();
        assert!(
            fer >= 0.05 / 2.5 && fer <= 2.5 * 0.05,
            "fer {fer} at {point} dB too far from target"
        );
    }
}
