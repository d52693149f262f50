//! Sequential prefix coding of `X^n` with causally available side information.
//!
//! At step `i` the encoder and decoder share `x^{i-1}` and `y^i` and use a
//! prefix code for `X_i` with Shannon lengths
//! `max(1, ceil(-log2 p(x_i | x^{i-1}, y^i)))`. The one-bit floor keeps a
//! deterministic symbol encodable by a nonempty codeword.

use serde::Serialize;

use crate::causal_info::{causal_entropy, directed_information};
use crate::error::{Error, Result};
use crate::joint::{decode, encode, Budget, JointTable};
use crate::process::ProcessSpec;
use crate::report::{fmt_info, fmt_sig};

/// Longest codeword the canonical coder handles.
pub const MAX_CODEWORD_BITS: u32 = 128;

// Slack for self-information landing within rounding of an integer.
const DYADIC_SLACK: f64 = 1e-9;

/// Shannon length `max(1, ceil(-log2 p))`, `None` for impossible symbols.
fn shannon_length(p: f64) -> Option<u32> {
    if p <= 0.0 {
        return None;
    }
    let info = -p.log2();
    Some(((info - DYADIC_SLACK).ceil().max(1.0)) as u32)
}

/// `sum 2^-l` over present symbols; exact in floating point.
pub fn kraft_sum(lengths: &[Option<u32>]) -> f64 {
    lengths.iter().flatten().map(|&l| (-(l as f64)).exp2()).sum()
}

fn row_lengths(probs: &[f64]) -> Vec<Option<u32>> {
    let lengths: Vec<_> = probs.iter().map(|&p| shannon_length(p)).collect();
    if kraft_sum(&lengths) <= 1.0 {
        return lengths;
    }
    // rounding pulled a length below the exact ceiling
    probs
        .iter()
        .map(|&p| (p > 0.0).then(|| ((-p.log2()).ceil().max(1.0)) as u32))
        .collect()
}

/// Codeword lengths for every history.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeLengthProfile {
    x_size: usize,
    y_size: usize,
    side_info: bool,
    /// `steps[i-1][history]`; histories are `x_past * |Y|^i + y_now`
    /// with side information and `x_past` without.
    steps: Vec<Vec<Option<Vec<Option<u32>>>>>,
}

impl CodeLengthProfile {
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn uses_side_info(&self) -> bool {
        self.side_info
    }

    fn history_index(&self, step: usize, x_past: usize, y_now: usize) -> usize {
        if self.side_info {
            x_past * self.y_size.pow(step as u32) + y_now
        } else {
            x_past
        }
    }

    /// Lengths for race `step` given `x^{step-1}` and `y^{step}`.
    pub fn lengths(&self, step: usize, xs: &[usize], ys: &[usize]) -> Option<&[Option<u32>]> {
        let idx = self.history_index(step, encode(xs, self.x_size), encode(ys, self.y_size));
        self.steps.get(step.checked_sub(1)?)?.get(idx)?.as_deref()
    }

    /// Every defined history row satisfies Kraft's inequality.
    pub fn satisfies_kraft(&self) -> bool {
        self.steps.iter().flatten().flatten().all(|row| kraft_sum(row) <= 1.0)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["step".into(), "x_history".into(), "y_history".into()];
        h.extend((0..self.x_size).map(|x| format!("len{x}")));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let join = |s: &[usize]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = Vec::new();
        for (i, rows) in self.steps.iter().enumerate() {
            let step = i + 1;
            let yc = if self.side_info { self.y_size.pow(step as u32) } else { 1 };
            for (idx, row) in rows.iter().enumerate() {
                let Some(row) = row else { continue };
                let xh = decode(idx / yc, self.x_size, step - 1);
                let yh = if self.side_info {
                    join(&decode(idx % yc, self.y_size, step))
                } else {
                    String::new()
                };
                let mut rec = vec![step.to_string(), join(&xh), yh];
                rec.extend(row.iter().map(|l| l.map(|v| v.to_string()).unwrap_or_default()));
                out.push(rec);
            }
        }
        out
    }
}

/// Shannon code lengths from an enumerated joint table.
pub fn shannon_lengths_from_joint(joint: &JointTable, side_info: bool) -> CodeLengthProfile {
    let (xs, ys, n) = (joint.x_size(), joint.y_size(), joint.n_x());
    let mut steps = Vec::with_capacity(n);
    for step in 1..=n {
        let y_len = if side_info { step } else { 0 };
        let marg = joint.marginal(step, y_len);
        let yc = ys.pow(y_len as u32);
        let rows = (0..xs.pow(step as u32 - 1) * yc)
            .map(|idx| {
                let (x_past, y_now) = (idx / yc, idx % yc);
                let col: Vec<f64> = (0..xs).map(|x| marg.probs()[(x_past * xs + x) * yc + y_now]).collect();
                let total: f64 = col.iter().sum();
                (total > 0.0).then(|| row_lengths(&col.iter().map(|v| v / total).collect::<Vec<_>>()))
            })
            .collect();
        steps.push(rows);
    }
    CodeLengthProfile {
        x_size: xs,
        y_size: ys,
        side_info,
        steps,
    }
}

/// Shannon code lengths for `spec` over `n` steps.
pub fn shannon_lengths(spec: &ProcessSpec, n: usize, side_info: bool, budget: Budget) -> Result<CodeLengthProfile> {
    Ok(shannon_lengths_from_joint(&spec.joint_pmf_with_budget(n, budget)?, side_info))
}

/// `E[sum_i l(X_i | X^{i-1}, Y^i)]` in bits.
pub fn expected_length_from_joint(profile: &CodeLengthProfile, joint: &JointTable) -> Result<f64> {
    let (xs, ys) = (joint.x_size(), joint.y_size());
    if profile.n() != joint.n_x() || profile.x_size != xs || profile.y_size != ys {
        return Err(Error::Dimension("code profile does not match the process".into()));
    }
    let mut total = 0.0;
    for step in 1..=joint.n_x() {
        let marg = joint.marginal(step, step);
        let yc = ys.pow(step as u32);
        for (idx, &p) in marg.probs().iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let xnum = idx / yc;
            let h = profile.history_index(step, xnum / xs, idx % yc);
            let len = profile.steps[step - 1][h]
                .as_ref()
                .and_then(|row| row[xnum % xs])
                .ok_or_else(|| Error::Dimension(format!("no codeword for a reachable symbol at step {step}")))?;
            total += p * len as f64;
        }
    }
    Ok(total)
}

/// `(1/n) E[total length]` in bits per symbol.
pub fn expected_rate(profile: &CodeLengthProfile, spec: &ProcessSpec, n: usize, budget: Budget) -> Result<f64> {
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    Ok(expected_length_from_joint(profile, &joint)? / n as f64)
}

/// Rates with and without side information next to `I(Y^n -> X^n) / n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub rate_no_side_info: f64,
    pub rate_with_side_info: f64,
    pub savings: f64,
    pub directed_info_per_symbol: f64,
    /// `H(X^n || Y^n) / n`
    pub causal_entropy_rate: f64,
}

impl RateReport {
    pub const CSV_HEADER: [&'static str; 6] = [
        "n",
        "rate_no_side_info",
        "rate_with_side_info",
        "savings",
        "directed_info_per_symbol",
        "causal_entropy_rate",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_sig(self.rate_no_side_info),
            fmt_sig(self.rate_with_side_info),
            fmt_info(self.savings),
            fmt_info(self.directed_info_per_symbol),
            fmt_sig(self.causal_entropy_rate),
        ]
    }
}

pub fn rate_report(spec: &ProcessSpec, n: usize, budget: Budget) -> Result<RateReport> {
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    let nf = n as f64;
    let with_side = expected_length_from_joint(&shannon_lengths_from_joint(&joint, true), &joint)? / nf;
    let without = expected_length_from_joint(&shannon_lengths_from_joint(&joint, false), &joint)? / nf;
    Ok(RateReport {
        n,
        rate_no_side_info: without,
        rate_with_side_info: with_side,
        savings: without - with_side,
        directed_info_per_symbol: directed_information(&joint)?.directed_info / nf,
        causal_entropy_rate: causal_entropy(&joint) / nf,
    })
}

/// Canonical prefix code for one history.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixCode {
    /// `(value, length)` per symbol, most significant bit first.
    codewords: Vec<Option<(u128, u32)>>,
    /// Symbols in canonical order with their codewords.
    sorted: Vec<(u32, u128, usize)>,
}

impl PrefixCode {
    pub fn codeword(&self, symbol: usize) -> Option<(u128, u32)> {
        self.codewords.get(symbol).copied().flatten()
    }

    /// Codeword rendered as a `0`/`1` string.
    pub fn codeword_string(&self, symbol: usize) -> Option<String> {
        self.codeword(symbol)
            .map(|(v, l)| (0..l).rev().map(|b| if v >> b & 1 == 1 { '1' } else { '0' }).collect())
    }

    pub fn encode_symbol(&self, symbol: usize, out: &mut BitWriter) -> Result<()> {
        let (value, len) = self
            .codeword(symbol)
            .ok_or_else(|| Error::Decode(format!("symbol {symbol} has no codeword")))?;
        for b in (0..len).rev() {
            out.push(value >> b & 1 == 1);
        }
        Ok(())
    }

    pub fn decode_symbol(&self, input: &mut BitReader<'_>) -> Result<usize> {
        let mut value: u128 = 0;
        let mut len = 0;
        let mut cursor = 0;
        loop {
            let bit = input
                .next_bit()
                .ok_or_else(|| Error::Decode("bitstream ended inside a codeword".into()))?;
            value = value << 1 | bit as u128;
            len += 1;
            while cursor < self.sorted.len() && self.sorted[cursor].0 < len {
                cursor += 1;
            }
            let mut i = cursor;
            while i < self.sorted.len() && self.sorted[i].0 == len {
                if self.sorted[i].1 == value {
                    return Ok(self.sorted[i].2);
                }
                i += 1;
            }
            if i >= self.sorted.len() {
                return Err(Error::Decode("bits match no codeword".into()));
            }
        }
    }
}

/// Canonical prefix code with the given lengths.
pub fn build_prefix_code(lengths: &[Option<u32>]) -> Result<PrefixCode> {
    let sum = kraft_sum(lengths);
    if sum > 1.0 {
        return Err(Error::KraftViolation(sum));
    }
    if let Some(&bad) = lengths.iter().flatten().find(|&&l| l == 0 || l > MAX_CODEWORD_BITS) {
        return Err(Error::InvalidEntry {
            what: "codeword length".into(),
            value: bad as f64,
        });
    }
    let mut order: Vec<(u32, usize)> = lengths
        .iter()
        .enumerate()
        .filter_map(|(s, l)| l.map(|l| (l, s)))
        .collect();
    order.sort();
    let mut codewords = vec![None; lengths.len()];
    let mut sorted = Vec::with_capacity(order.len());
    let mut code: u128 = 0;
    let mut prev_len = order.first().map_or(0, |&(l, _)| l);
    for (i, &(len, symbol)) in order.iter().enumerate() {
        if i > 0 {
            code = (code + 1) << (len - prev_len);
        }
        prev_len = len;
        codewords[symbol] = Some((code, len));
        sorted.push((len, code, symbol));
    }
    Ok(PrefixCode { codewords, sorted })
}

/// Bit sink packing most significant bit first.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        let offset = (self.bits % 8) as u8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte allocated") |= 0x80 >> offset;
        }
        self.bits += 1;
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    /// Big-endian `u64` bit count followed by the packed bits.
    pub fn into_bytes(self) -> Vec<u8> {
        let mut out = self.bits.to_be_bytes().to_vec();
        out.extend(self.bytes);
        out
    }
}

/// Reader over a stream produced by [`BitWriter::into_bytes`].
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bits: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(stream: &'a [u8]) -> Result<Self> {
        if stream.len() < 8 {
            return Err(Error::Decode("missing bit-count header".into()));
        }
        let (header, bytes) = stream.split_at(8);
        let bits = u64::from_be_bytes(header.try_into().expect("8-byte header"));
        if bits.div_ceil(8) != bytes.len() as u64 {
            return Err(Error::Decode(format!(
                "header announces {bits} bits but {} bytes follow",
                bytes.len()
            )));
        }
        Ok(Self { bytes, bits, pos: 0 })
    }

    pub fn next_bit(&mut self) -> Option<bool> {
        if self.pos >= self.bits {
            return None;
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(bit)
    }

    pub fn remaining(&self) -> u64 {
        self.bits - self.pos
    }
}

/// Prefix codes for every history of a profile.
#[derive(Clone, Debug)]
pub struct SequentialCode<'a> {
    profile: &'a CodeLengthProfile,
    codes: Vec<Vec<Option<PrefixCode>>>,
}

impl<'a> SequentialCode<'a> {
    pub fn new(profile: &'a CodeLengthProfile) -> Result<Self> {
        let codes = profile
            .steps
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|row| row.as_ref().map(|l| build_prefix_code(l)).transpose())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile, codes })
    }

    fn code(&self, step: usize, x: &[usize], y: &[usize]) -> Result<&PrefixCode> {
        let p = self.profile;
        let h = p.history_index(step, encode(&x[..step - 1], p.x_size), encode(&y[..step], p.y_size));
        self.codes[step - 1][h]
            .as_ref()
            .ok_or_else(|| Error::Decode(format!("history at step {step} is unreachable")))
    }

    /// Encodes `x^n` using side information `y^n`.
    pub fn encode(&self, x: &[usize], y: &[usize]) -> Result<Vec<u8>> {
        self.check_lengths(x.len(), y)?;
        let mut out = BitWriter::new();
        for step in 1..=x.len() {
            self.code(step, x, y)?.encode_symbol(x[step - 1], &mut out)?;
        }
        Ok(out.into_bytes())
    }

    /// Decodes symbol by symbol; block `i` uses only `y^i` and the bits read so far.
    pub fn decode(&self, y: &[usize], stream: &[u8]) -> Result<Vec<usize>> {
        let n = self.profile.n();
        self.check_lengths(n, y)?;
        let mut input = BitReader::new(stream)?;
        let mut x = Vec::with_capacity(n);
        for step in 1..=n {
            x.push(0);
            let symbol = self.code(step, &x, y)?.decode_symbol(&mut input)?;
            x[step - 1] = symbol;
        }
        if input.remaining() != 0 {
            return Err(Error::Decode(format!("{} trailing bits", input.remaining())));
        }
        Ok(x)
    }

    fn check_lengths(&self, n: usize, y: &[usize]) -> Result<()> {
        if n != self.profile.n() || y.len() < n {
            return Err(Error::HorizonMismatch(format!(
                "code covers {} symbols, got {n} symbols with {} side symbols",
                self.profile.n(),
                y.len()
            )));
        }
        Ok(())
    }
}
