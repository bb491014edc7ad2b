//! Statistical harnesses for the nonce pipeline: avalanche effect,
//! Monte-Carlo pi, and a byte-frequency chi-square test.
//!
//! Every test is deterministic given its seed and parameters, so reports
//! reproduce bit-exactly. Reports serialize to JSON with fixed field names
//! and render as aligned plain-text tables.

use serde::Serialize;
use sha2::{Digest, Sha512};

use crate::noncegen;
use crate::rng::{seed_from_u64, RandomSource, SEED_LEN};
use crate::{Error, Result};

/// Nonce width in bits, the denominator of every flip fraction.
const NONCE_BITS: f64 = 224.0;

/// Two-sided 99.9% band of the chi-square distribution with 255 degrees of
/// freedom (0.05% in each tail); quantiles from the inverse CDF.
pub const CHI2_255_BAND: (f64, f64) = (187.170_807_063_316_43, 335.916_650_415_691_55);

/// Avalanche measurement: distribution of nonce bit flips caused by a
/// single message bit flip under a fixed random source.
#[derive(Debug, Clone, Serialize)]
pub struct AvalancheReport {
    pub trials: u64,
    pub mean_flip_fraction: f64,
    /// Percentage of trials flipping fewer than 40% of the nonce bits.
    pub bucket_lt40: f64,
    /// Percentage flipping 40-50% (inclusive).
    pub bucket_40_50: f64,
    /// Percentage flipping more than 50%.
    pub bucket_gt50: f64,
}

impl AvalancheReport {
    pub fn text_table(&self) -> String {
        format!(
            "avalanche\n  trials              {}\n  mean_flip_fraction  {:.4}\n  \
             bucket_lt40         {:.2} %\n  bucket_40_50        {:.2} %\n  \
             bucket_gt50         {:.2} %\n",
            self.trials, self.mean_flip_fraction, self.bucket_lt40, self.bucket_40_50,
            self.bucket_gt50
        )
    }
}

fn check_key(key: &[u8]) -> Result<[u8; 28]> {
    key.try_into().map_err(|_| Error::InvalidLength {
        what: "avalanche key",
        expected: 28,
        got: key.len(),
    })
}

/// One avalanche trial. The pipeline seed is derived from the master seed
/// and the trial index and held fixed across the message pair, so the
/// measurement isolates the pipeline rather than the random source.
fn trial_fraction(
    key: &[u8; 28],
    message_len: usize,
    master_seed: &[u8; SEED_LEN],
    trial: u64,
    flip: bool,
) -> Result<f64> {
    let mut hasher = Sha512::new();
    hasher.update(master_seed);
    hasher.update(trial.to_le_bytes());
    hasher.update(b"avalanche-trial");
    let trial_seed: [u8; SEED_LEN] = hasher.finalize().into();
    let mut trial_rng = RandomSource::seeded(trial_seed);

    let mut message = trial_rng.next_bytes(message_len)?;
    let bit_pos = u64::from_be_bytes(trial_rng.next_bytes(8)?.try_into().unwrap())
        % (8 * message_len as u64);
    let pipe_seed: [u8; SEED_LEN] = trial_rng.next_bytes(SEED_LEN)?.try_into().unwrap();

    let base = noncegen::generate_nonce(&message, key, &mut RandomSource::seeded(pipe_seed))?;
    if flip {
        message[(bit_pos / 8) as usize] ^= 1 << (bit_pos % 8);
    }
    let other = noncegen::generate_nonce(&message, key, &mut RandomSource::seeded(pipe_seed))?;

    let distance: u32 = base
        .as_bytes()
        .iter()
        .zip(other.as_bytes())
        .map(|(a, b)| (a ^ b).count_ones())
        .sum();
    Ok(f64::from(distance) / NONCE_BITS)
}

/// Per-trial flip fractions: for each trial, generate the nonce of a random
/// message and of the same message with one uniformly chosen bit flipped,
/// and record the Hamming distance over 224.
pub fn avalanche_fractions(
    trials: u64,
    message_len: usize,
    key: &[u8],
    master_seed: &[u8; SEED_LEN],
) -> Result<Vec<f64>> {
    if trials < 100 {
        return Err(Error::InvalidArgument(
            "avalanche needs at least 100 trials".into(),
        ));
    }
    if message_len == 0 {
        return Err(Error::InvalidArgument(
            "avalanche needs a non-empty message".into(),
        ));
    }
    let key = check_key(key)?;
    (0..trials)
        .map(|t| trial_fraction(&key, message_len, master_seed, t, true))
        .collect()
}

/// Aggregate [`avalanche_fractions`] into buckets and a mean.
pub fn avalanche_test(
    trials: u64,
    message_len: usize,
    key: &[u8],
    master_seed: &[u8; SEED_LEN],
) -> Result<AvalancheReport> {
    let fractions = avalanche_fractions(trials, message_len, key, master_seed)?;
    let mut lt40 = 0u64;
    let mut mid = 0u64;
    let mut gt50 = 0u64;
    let mut sum = 0.0;
    for &f in &fractions {
        sum += f;
        if f < 0.40 {
            lt40 += 1;
        } else if f <= 0.50 {
            mid += 1;
        } else {
            gt50 += 1;
        }
    }
    let pct = |count: u64| 100.0 * count as f64 / trials as f64;
    Ok(AvalancheReport {
        trials,
        mean_flip_fraction: sum / trials as f64,
        bucket_lt40: pct(lt40),
        bucket_40_50: pct(mid),
        bucket_gt50: pct(gt50),
    })
}

/// Monte-Carlo estimate of pi from a byte stream.
#[derive(Debug, Clone, Serialize)]
pub struct PiReport {
    pub points: u64,
    pub estimate: f64,
    pub deviation_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_deviation_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_deviation_pct: Option<f64>,
}

impl PiReport {
    pub fn text_table(&self) -> String {
        let mut out = format!(
            "monte-carlo pi\n  points         {}\n  estimate       {:.6}\n  \
             deviation_pct  {:.4}\n",
            self.points, self.estimate, self.deviation_pct
        );
        if let (Some(batches), Some(max), Some(min), Some(mean)) = (
            self.batches,
            self.max_deviation_pct,
            self.min_deviation_pct,
            self.mean_deviation_pct,
        ) {
            out.push_str(&format!(
                "  batches        {batches}\n  max_dev_pct    {max:.4}\n  \
                 min_dev_pct    {min:.4}\n  mean_dev_pct   {mean:.4}\n"
            ));
        }
        out
    }
}

fn deviation_pct(estimate: f64) -> f64 {
    (estimate - std::f64::consts::PI).abs() / std::f64::consts::PI * 100.0
}

fn count_inside(stream: &[u8], points: u64) -> u64 {
    let mut inside = 0u64;
    for chunk in stream.chunks_exact(6).take(points as usize) {
        let x = f64::from(u32::from(chunk[0]) << 16 | u32::from(chunk[1]) << 8 | u32::from(chunk[2]))
            / f64::from(1u32 << 24);
        let y = f64::from(u32::from(chunk[3]) << 16 | u32::from(chunk[4]) << 8 | u32::from(chunk[5]))
            / f64::from(1u32 << 24);
        if x * x + y * y <= 1.0 {
            inside += 1;
        }
    }
    inside
}

/// Estimate pi from `points` samples, each consuming 6 stream bytes: the
/// first three bytes form x as a 24-bit fraction, the next three form y.
pub fn monte_carlo_pi(points: u64, stream: &[u8]) -> Result<PiReport> {
    if points < 1000 {
        return Err(Error::InvalidArgument(
            "pi estimation needs at least 1000 points".into(),
        ));
    }
    let needed = 6 * points as usize;
    if stream.len() < needed {
        return Err(Error::StreamExhausted {
            needed,
            available: stream.len(),
        });
    }
    let inside = count_inside(stream, points);
    let estimate = 4.0 * inside as f64 / points as f64;
    Ok(PiReport {
        points,
        estimate,
        deviation_pct: deviation_pct(estimate),
        batches: None,
        max_deviation_pct: None,
        min_deviation_pct: None,
        mean_deviation_pct: None,
    })
}

/// Batched pi estimation: per-batch deviations plus the pooled estimate.
pub fn monte_carlo_pi_batched(
    batches: u64,
    points_per_batch: u64,
    stream: &[u8],
) -> Result<PiReport> {
    if batches == 0 {
        return Err(Error::InvalidArgument("need at least one batch".into()));
    }
    let needed = 6 * (batches * points_per_batch) as usize;
    if stream.len() < needed {
        return Err(Error::StreamExhausted {
            needed,
            available: stream.len(),
        });
    }
    let mut deviations = Vec::with_capacity(batches as usize);
    let mut inside_total = 0u64;
    for b in 0..batches {
        let offset = (6 * b * points_per_batch) as usize;
        let inside = count_inside(&stream[offset..], points_per_batch);
        inside_total += inside;
        deviations.push(deviation_pct(4.0 * inside as f64 / points_per_batch as f64));
    }
    let points = batches * points_per_batch;
    let estimate = 4.0 * inside_total as f64 / points as f64;
    let mean = deviations.iter().sum::<f64>() / batches as f64;
    let max = deviations.iter().cloned().fold(f64::MIN, f64::max);
    let min = deviations.iter().cloned().fold(f64::MAX, f64::min);
    Ok(PiReport {
        points,
        estimate,
        deviation_pct: deviation_pct(estimate),
        batches: Some(batches),
        max_deviation_pct: Some(max),
        min_deviation_pct: Some(min),
        mean_deviation_pct: Some(mean),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "within-band")]
    WithinBand,
    #[serde(rename = "outside-band")]
    OutsideBand,
}

/// Byte-frequency chi-square result over 256 cells (255 degrees of
/// freedom), judged against the two-sided 99.9% band.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub df: u32,
    pub sample_bytes: u64,
    pub band_low: f64,
    pub band_high: f64,
    pub verdict: Verdict,
}

impl ChiSquareReport {
    pub fn text_table(&self) -> String {
        format!(
            "chi-square (bytes)\n  statistic     {:.3}\n  df            {}\n  \
             sample_bytes  {}\n  band          [{:.3}, {:.3}]\n  verdict       {}\n",
            self.statistic,
            self.df,
            self.sample_bytes,
            self.band_low,
            self.band_high,
            match self.verdict {
                Verdict::WithinBand => "within-band",
                Verdict::OutsideBand => "outside-band",
            }
        )
    }
}

/// Chi-square byte-frequency statistic of a stream of at least 10^5 bytes.
pub fn chi_square_bytes(stream: &[u8]) -> Result<ChiSquareReport> {
    const MIN_BYTES: usize = 100_000;
    if stream.len() < MIN_BYTES {
        return Err(Error::StreamExhausted {
            needed: MIN_BYTES,
            available: stream.len(),
        });
    }
    let mut counts = [0u64; 256];
    for &b in stream {
        counts[b as usize] += 1;
    }
    let expected = stream.len() as f64 / 256.0;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let (band_low, band_high) = CHI2_255_BAND;
    let verdict = if statistic >= band_low && statistic <= band_high {
        Verdict::WithinBand
    } else {
        Verdict::OutsideBand
    };
    Ok(ChiSquareReport {
        statistic,
        df: 255,
        sample_bytes: stream.len() as u64,
        band_low,
        band_high,
        verdict,
    })
}

/// Concatenated pipeline nonces under incrementing seeds: the byte stream
/// the pi and chi-square evaluations consume. Seed `i` is the 64-byte value
/// whose big-endian integer is `i`.
pub fn pipeline_nonce_stream(key: &[u8], message: &[u8], len: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(len + 28);
    let mut seed = 0u64;
    while out.len() < len {
        let mut src = RandomSource::seeded(seed_from_u64(seed));
        let nonce = noncegen::generate_nonce(message, key, &mut src)?;
        out.extend_from_slice(nonce.as_bytes());
        seed += 1;
    }
    out.truncate(len);
    Ok(out)
}
