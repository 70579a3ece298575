//! Truth tables and the probabilistic definitions of expectation and
//! influence, computed by enumeration. This is the independent oracle the
//! closed-form tribes formulas are checked against.
//!
//! Bit order: entry `b` of a table holds `f(x)` with `x_j` equal to bit
//! `j - 1` of `b`, so `x_1` is the least significant bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::construction::TribesFunction;
use crate::error::{Result, TribesError};
use crate::exact::Dyadic;

/// Default truth-table capacity in variables (2^24 bits, 2 MiB).
pub const DEFAULT_CAP: usize = 24;

/// Hard ceiling regardless of the cap a caller asks for.
const MAX_TABLE_VARS: usize = 40;

/// Samples drawn from one generator stream.
const SAMPLE_BATCH: u64 = 4096;

/// `LOW_PATTERN[i]`: bits `l` of a word with bit `i` of `l` clear.
const LOW_PATTERN: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// A Boolean function on `t` variables stored as a packed bit array of
/// length `2^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    vars: usize,
    words: Vec<u64>,
}

impl TruthTable {
    /// Tabulates `f` over every `b` in `0..2^t`.
    pub fn from_fn(t: usize, f: impl Fn(u64) -> bool + Sync) -> Result<Self> {
        let mut table = Self::zeroed(t)?;
        let len = table.len();
        table.words.par_iter_mut().enumerate().for_each(|(w, word)| {
            let base = (w as u64) << 6;
            for l in 0..64u64.min(len) {
                if f(base | l) {
                    *word |= 1 << l;
                }
            }
        });
        Ok(table)
    }

    fn zeroed(t: usize) -> Result<Self> {
        if t > MAX_TABLE_VARS {
            return Err(TribesError::CapacityExceeded {
                needed: t,
                cap: MAX_TABLE_VARS,
            });
        }
        let words = if t <= 6 { 1 } else { 1usize << (t - 6) };
        Ok(TruthTable {
            vars: t,
            words: vec![0; words],
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Number of entries, `2^t`.
    pub fn len(&self) -> u64 {
        1 << self.vars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, b: u64) -> bool {
        assert!(b < self.len(), "entry {b} out of range");
        self.words[(b >> 6) as usize] >> (b & 63) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.par_iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of `b` with `f(b) != f(b ^ 2^i)`.
    fn flip_count(&self, i: usize) -> u64 {
        if i >= 6 {
            let stride = 1usize << (i - 6);
            self.words
                .par_chunks(2 * stride)
                .map(|chunk| {
                    let (lo, hi) = chunk.split_at(stride);
                    lo.iter()
                        .zip(hi)
                        .map(|(a, b)| (a ^ b).count_ones() as u64)
                        .sum::<u64>()
                })
                .sum::<u64>()
                * 2
        } else {
            let shift = 1u32 << i;
            self.words
                .par_iter()
                .map(|&w| ((w ^ (w >> shift)) & LOW_PATTERN[i]).count_ones() as u64)
                .sum::<u64>()
                * 2
        }
    }

    /// True when raising any coordinate from 0 to 1 never turns a 1 into a 0.
    pub fn is_monotone(&self) -> bool {
        (0..self.vars).all(|i| {
            if i >= 6 {
                let stride = 1usize << (i - 6);
                self.words.par_chunks(2 * stride).all(|chunk| {
                    let (lo, hi) = chunk.split_at(stride);
                    lo.iter().zip(hi).all(|(a, b)| a & !b == 0)
                })
            } else {
                let shift = 1u32 << i;
                self.words
                    .par_iter()
                    .all(|&w| w & !(w >> shift) & LOW_PATTERN[i] == 0)
            }
        })
    }
}

/// A point of `{0,1}^n`, in construction-position order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    /// Parses a 0/1 slice; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(TribesError::InvalidArgument(format!(
                    "assignment entry {other} is not a bit"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `x^j`: the same point with coordinate `j` (1-based) flipped.
    pub fn flipped(&self, j: usize) -> Assignment {
        let mut bits = self.0.clone();
        bits[j - 1] = !bits[j - 1];
        Assignment(bits)
    }
}

/// Tribe masks over the relevant positions, one `u64` word per 64 positions.
struct TribeMasks {
    masks: Vec<Vec<u64>>,
    words: usize,
}

impl TribeMasks {
    fn new(f: &TribesFunction) -> Self {
        let words = f.relevant().div_ceil(64).max(1);
        let masks = f
            .tribe_ranges()
            .map(|range| {
                let mut mask = vec![0u64; words];
                for q in range {
                    mask[q / 64] |= 1 << (q % 64);
                }
                mask
            })
            .collect();
        TribeMasks { masks, words }
    }

    fn eval(&self, x: &[u64]) -> bool {
        self.masks
            .iter()
            .any(|m| m.iter().zip(x).all(|(m, x)| x & m == *m))
    }
}

/// Truth table over the relevant positions `x_1..x_{s_{m*}}`.
pub fn tribes_truth_table(f: &TribesFunction, cap: usize) -> Result<TruthTable> {
    let t = f.relevant();
    if t > cap.min(MAX_TABLE_VARS) {
        return Err(TribesError::CapacityExceeded { needed: t, cap });
    }
    let mut table = TruthTable::zeroed(t)?;
    let valid = if t >= 6 { u64::MAX } else { (1u64 << (1 << t)) - 1 };
    // Each tribe mask splits into the 6 low bits, which vary inside a word,
    // and the rest, which are fixed per word.
    let tribes: Vec<(u64, u64)> = f
        .tribe_ranges()
        .map(|r| {
            let mask: u64 = r.map(|q| 1u64 << q).fold(0, |a, b| a | b);
            let low = mask & 63;
            let pattern = (0..64u64)
                .filter(|l| l & low == low)
                .fold(0u64, |acc, l| acc | 1 << l);
            (mask & !63, pattern & valid)
        })
        .collect();
    table.words.par_iter_mut().enumerate().for_each(|(w, word)| {
        let base = (w as u64) << 6;
        for &(high, pattern) in &tribes {
            if base & high == high {
                *word |= pattern;
            }
        }
    });
    Ok(table)
}

/// `f(x)`: OR over tribes of the AND inside each tribe.
pub fn evaluate(f: &TribesFunction, x: &Assignment) -> Result<bool> {
    if x.len() < f.relevant() {
        return Err(TribesError::InvalidArgument(format!(
            "assignment has {} entries, function needs {}",
            x.len(),
            f.relevant()
        )));
    }
    Ok(f.tribe_ranges().any(|r| x.bits()[r].iter().all(|&b| b)))
}

/// `Pr[f(x) = 1]` under uniform `x`.
pub fn expectation(tt: &TruthTable) -> Dyadic {
    Dyadic::new(tt.count_ones(), tt.vars as u64)
}

/// `Pr[f(x) != f(x^j)]` for 1-based `j`.
pub fn influence(tt: &TruthTable, j: usize) -> Result<Dyadic> {
    if j == 0 || j > tt.vars {
        return Err(TribesError::InvalidArgument(format!(
            "variable {j} outside 1..={}",
            tt.vars
        )));
    }
    Ok(Dyadic::new(tt.flip_count(j - 1), tt.vars as u64))
}

/// `E[f] (1 - E[f])`, the variance of a 0/1-valued function.
pub fn variance(tt: &TruthTable) -> Dyadic {
    let e = expectation(tt);
    let rest = e.one_minus().expect("expectation lies in [0, 1]");
    &e * &rest
}

/// A Monte Carlo estimate of a probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledEstimate {
    pub estimate: f64,
    /// `sqrt(p (1 - p) / samples)` at the estimated `p`.
    pub stderr: f64,
    pub samples: u64,
}

impl SampledEstimate {
    fn from_hits(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        SampledEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }
}

/// Counts samples satisfying `hit`, splitting the work into fixed batches
/// that each own one ChaCha stream. The count depends only on
/// `(seed, samples)`, never on how rayon schedules the batches.
fn count_hits(
    words: usize,
    samples: u64,
    seed: u64,
    hit: impl Fn(&mut [u64]) -> bool + Sync,
) -> u64 {
    let batches = samples.div_ceil(SAMPLE_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let size = SAMPLE_BATCH.min(samples - batch * SAMPLE_BATCH);
            let mut x = vec![0u64; words];
            let mut hits = 0;
            for _ in 0..size {
                x.iter_mut().for_each(|w| *w = rng.random());
                if hit(&mut x) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(TribesError::InvalidArgument(
            "samples must be positive".to_string(),
        ));
    }
    Ok(())
}

/// Seeded estimate of `Inf_j[f]` for 1-based construction position `j`.
/// Positions past the relevant variables (up to `n`) are exactly 0.
pub fn influence_sampled(
    f: &TribesFunction,
    j: usize,
    samples: u64,
    seed: u64,
) -> Result<SampledEstimate> {
    check_samples(samples)?;
    if j == 0 || j > f.n().max(f.relevant()) {
        return Err(TribesError::InvalidArgument(format!(
            "variable {j} outside 1..={}",
            f.n()
        )));
    }
    if j > f.relevant() {
        return Ok(SampledEstimate {
            estimate: 0.0,
            stderr: 0.0,
            samples,
        });
    }
    let masks = TribeMasks::new(f);
    let (word, bit) = ((j - 1) / 64, 1u64 << ((j - 1) % 64));
    let hits = count_hits(masks.words, samples, seed, |x| {
        let before = masks.eval(x);
        x[word] ^= bit;
        before != masks.eval(x)
    });
    Ok(SampledEstimate::from_hits(hits, samples))
}

/// Seeded estimate of `E[f]`.
pub fn expectation_sampled(f: &TribesFunction, samples: u64, seed: u64) -> Result<SampledEstimate> {
    check_samples(samples)?;
    let masks = TribeMasks::new(f);
    let hits = count_hits(masks.words, samples, seed, |x| masks.eval(x));
    Ok(SampledEstimate::from_hits(hits, samples))
}
