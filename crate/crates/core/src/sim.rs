//! Monte Carlo simulation of the superposition / Marton-binning scheme at
//! small blocklength: codebook generation along the cloud-center graph,
//! lexicographic bin search at the broadcasting node, and strong-typicality
//! decoding at both receivers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, Receiver};
use crate::dist::FactoredDistribution;
use crate::error::{Error, Result};
use crate::region::derive_seed;
use crate::tensor::Tensor;
use crate::variable::VariableId;

use VariableId::*;

/// Largest blocklength accepted; typicality search cost grows fast.
pub const MAX_BLOCKLENGTH: usize = 16;

/// Cap on total codebook memory, in symbol entries.
pub const CODEBOOK_ENTRY_CAP: usize = 1 << 26;

/// Per-message-class rates, bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub r0: f64,
    pub r10: f64,
    pub r11: f64,
    pub r20: f64,
    pub r22: f64,
}

impl Rates {
    pub fn zero() -> Self {
        Rates {
            r0: 0.0,
            r10: 0.0,
            r11: 0.0,
            r20: 0.0,
            r22: 0.0,
        }
    }
}

/// Bin rates for the broadcasting node's three codeword classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRates {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BinRates {
    pub fn zero() -> Self {
        BinRates {
            b0: 0.0,
            b1: 0.0,
            b2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub rates: Rates,
    pub bin_rates: BinRates,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_BLOCKLENGTH {
            return Err(Error::InvalidArgument(format!(
                "blocklength {} outside 1..={MAX_BLOCKLENGTH}",
                self.n
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let rs = [
            self.rates.r0,
            self.rates.r10,
            self.rates.r11,
            self.rates.r20,
            self.rates.r22,
            self.bin_rates.b0,
            self.bin_rates.b1,
            self.bin_rates.b2,
        ];
        if rs.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidArgument("rates must be nonnegative".into()));
        }
        Ok(())
    }
}

/// ceil(2^{n·rate}), at least one codeword.
pub fn codeword_count(n: usize, rate: f64) -> usize {
    (2f64.powf(n as f64 * rate)).ceil().max(1.0) as usize
}

/// Codeword counts per message class and bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodewordCounts {
    pub n0: usize,
    pub n10: usize,
    pub n11: usize,
    pub n20: usize,
    pub n22: usize,
    pub nb0: usize,
    pub nb1: usize,
    pub nb2: usize,
}

impl CodewordCounts {
    pub fn from_config(c: &SimConfig) -> Self {
        CodewordCounts {
            n0: codeword_count(c.n, c.rates.r0),
            n10: codeword_count(c.n, c.rates.r10),
            n11: codeword_count(c.n, c.rates.r11),
            n20: codeword_count(c.n, c.rates.r20),
            n22: codeword_count(c.n, c.rates.r22),
            nb0: codeword_count(c.n, c.bin_rates.b0),
            nb1: codeword_count(c.n, c.bin_rates.b1),
            nb2: codeword_count(c.n, c.bin_rates.b2),
        }
    }

    fn wb_cells(&self) -> usize {
        self.n10 * self.n20 * self.n0 * self.nb0
    }

    /// Total materialized symbol entries for blocklength `n`; u128 so that
    /// absurd configurations report a cap violation instead of overflowing.
    fn entries(&self, n: usize) -> u128 {
        let (n0, n10, n11, n20, n22, nb0, nb1, nb2) = (
            self.n0 as u128,
            self.n10 as u128,
            self.n11 as u128,
            self.n20 as u128,
            self.n22 as u128,
            self.nb0 as u128,
            self.nb1 as u128,
            self.nb2 as u128,
        );
        let wb = n10 * n20 * n0 * nb0;
        let per_seq =
            n10 + 2 * n10 * n11 + n20 + 2 * n20 * n22 + wb * (1 + n11 * nb1 + n22 * nb2);
        per_seq * n as u128
    }
}

/// A message tuple: common, private-to-1 (split), private-to-2 (split).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageIndices {
    pub m0: usize,
    pub m10: usize,
    pub m11: usize,
    pub m20: usize,
    pub m22: usize,
}

/// A message tuple together with the bin indices the encoder selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectedIndices {
    pub msgs: MessageIndices,
    pub j0: usize,
    pub j1: usize,
    pub j2: usize,
}

/// A conditional probability table: leading axes are the conditioning
/// variables, trailing axes the targets.
struct CondTable {
    tensor: Tensor<f64>,
    n_cond: usize,
    target_cells: usize,
}

impl CondTable {
    fn new(tensor: Tensor<f64>, n_cond: usize) -> Self {
        let target_cells = tensor.sizes()[n_cond..].iter().product();
        CondTable {
            tensor,
            n_cond,
            target_cells,
        }
    }

    fn row(&self, cond: &[usize]) -> &[f64] {
        debug_assert_eq!(cond.len(), self.n_cond);
        let mut flat = 0usize;
        for (k, &c) in cond.iter().enumerate() {
            flat = flat * self.tensor.sizes()[k] + c;
        }
        let start = flat * self.target_cells;
        &self.tensor.data()[start..start + self.target_cells]
    }
}

fn sample_row(row: &[f64], rng: &mut ChaCha20Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}

/// Superposition codebooks for one trial, plus the typicality targets the
/// encoder and decoders test against. Codeword classes and their cloud
/// centers follow the fixed coding graph:
/// W1; U1 on W1; W2; V2 on W2; WB on (W1,W2); UB on (W1,W2,WB,U1);
/// VB on (W1,W2,WB,V2); X1 on (W1,U1); X2 on (W2,V2); XB on all of them.
pub struct CodebookSet {
    pub n: usize,
    pub counts: CodewordCounts,
    pub q_seq: Vec<usize>,
    w1: Vec<Vec<usize>>,
    u1: Vec<Vec<usize>>,
    x1: Vec<Vec<usize>>,
    w2: Vec<Vec<usize>>,
    v2: Vec<Vec<usize>>,
    x2: Vec<Vec<usize>>,
    wb: Vec<Vec<usize>>,
    ub: Vec<Vec<usize>>,
    vb: Vec<Vec<usize>>,
    /// P(XB | Q,W1,U1,X1,W2,V2,X2,WB,UB,VB), sampled lazily per transmission.
    xb_table: CondTable,
    /// Marginal over (Q, W1, U1, W2, V2, WB, UB, VB): the encoder's target.
    enc_target: Tensor<f64>,
    /// Marginal over (Q, W1, U1, W2, WB, UB, Y1).
    y1_target: Tensor<f64>,
    /// Marginal over (Q, W1, W2, V2, WB, VB, Y2).
    y2_target: Tensor<f64>,
}

impl CodebookSet {
    fn u1_at(&self, m10: usize, m11: usize) -> &[usize] {
        &self.u1[m10 * self.counts.n11 + m11]
    }
    fn v2_at(&self, m20: usize, m22: usize) -> &[usize] {
        &self.v2[m20 * self.counts.n22 + m22]
    }
    fn wb_index(&self, m10: usize, m20: usize, m0: usize, j0: usize) -> usize {
        let c = &self.counts;
        ((m10 * c.n20 + m20) * c.n0 + m0) * c.nb0 + j0
    }
    fn wb_at(&self, m10: usize, m20: usize, m0: usize, j0: usize) -> &[usize] {
        &self.wb[self.wb_index(m10, m20, m0, j0)]
    }
    fn ub_at(&self, m10: usize, m20: usize, m0: usize, j0: usize, m11: usize, j1: usize) -> &[usize] {
        let c = &self.counts;
        &self.ub[(self.wb_index(m10, m20, m0, j0) * c.n11 + m11) * c.nb1 + j1]
    }
    fn vb_at(&self, m10: usize, m20: usize, m0: usize, j0: usize, m22: usize, j2: usize) -> &[usize] {
        let c = &self.counts;
        &self.vb[(self.wb_index(m10, m20, m0, j0) * c.n22 + m22) * c.nb2 + j2]
    }
    pub fn w1_at(&self, m10: usize) -> &[usize] {
        &self.w1[m10]
    }
    pub fn w2_at(&self, m20: usize) -> &[usize] {
        &self.w2[m20]
    }
}

/// Empirical-type closeness: every cell's frequency is within ε·p of p, and
/// zero-probability cells never occur.
pub fn is_strongly_typical(seqs: &[&[usize]], target: &Tensor<f64>, epsilon: f64) -> bool {
    let n = seqs[0].len();
    debug_assert!(seqs.iter().all(|s| s.len() == n));
    debug_assert_eq!(seqs.len(), target.sizes().len());
    let sizes = target.sizes();
    let mut counts = vec![0u32; target.data().len()];
    for t in 0..n {
        let mut flat = 0usize;
        for (k, s) in seqs.iter().enumerate() {
            flat = flat * sizes[k] + s[t];
        }
        counts[flat] += 1;
    }
    let nf = n as f64;
    target.data().iter().zip(&counts).all(|(&p, &c)| {
        if p <= 0.0 {
            c == 0
        } else {
            (c as f64 / nf - p).abs() <= epsilon * p
        }
    })
}

/// Draws every codebook of one trial. Deterministic in `config.seed`: the
/// time-sharing sequence first, then each codeword class in graph order,
/// each symbol i.i.d. from its conditional given the cloud centers' symbols.
pub fn generate_codebooks(
    dist: &FactoredDistribution<f64>,
    chan: &ChannelSpec<f64>,
    config: &SimConfig,
) -> Result<CodebookSet> {
    config.validate()?;
    let counts = CodewordCounts::from_config(config);
    let entries = counts.entries(config.n);
    if entries > CODEBOOK_ENTRY_CAP as u128 {
        return Err(Error::SizeCap {
            got: entries.min(usize::MAX as u128) as usize,
            cap: CODEBOOK_ENTRY_CAP,
        });
    }

    let input = dist.input_joint()?;
    let cond = |targets: &[VariableId], given: &[VariableId]| -> Result<CondTable> {
        Ok(CondTable::new(input.conditional(targets, given)?, given.len()))
    };
    let t_w1 = cond(&[W1], &[Q])?;
    let t_u1 = cond(&[U1], &[Q, W1])?;
    let t_x1 = cond(&[X1], &[Q, W1, U1])?;
    let t_w2 = cond(&[W2], &[Q])?;
    let t_v2 = cond(&[V2], &[Q, W2])?;
    let t_x2 = cond(&[X2], &[Q, W2, V2])?;
    let t_wb = cond(&[WB], &[Q, W1, W2])?;
    let t_ub = cond(&[UB], &[Q, W1, W2, WB, U1])?;
    let t_vb = cond(&[VB], &[Q, W1, W2, WB, V2])?;
    let xb_table = CondTable::new(dist.factor_xb().clone(), 10);

    let full = dist.build_joint(chan)?;
    let enc_target = input
        .marginal(&[Q, W1, U1, W2, V2, WB, UB, VB])?
        .tensor()
        .clone();
    let y1_target = full
        .marginal(&[Q, W1, U1, W2, WB, UB, Y1])?
        .tensor()
        .clone();
    let y2_target = full
        .marginal(&[Q, W1, W2, V2, WB, VB, Y2])?
        .tensor()
        .clone();

    let n = config.n;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let q_row: Vec<f64> = dist.factor_q().data().to_vec();
    let q_seq: Vec<usize> = (0..n).map(|_| sample_row(&q_row, &mut rng)).collect();

    let mut draw = |table: &CondTable, parents: &[&[usize]]| -> Vec<usize> {
        let mut seq = Vec::with_capacity(n);
        let mut cond_syms = vec![0usize; parents.len()];
        for t in 0..n {
            for (k, p) in parents.iter().enumerate() {
                cond_syms[k] = p[t];
            }
            seq.push(sample_row(table.row(&cond_syms), &mut rng));
        }
        seq
    };

    let c = counts;
    let w1: Vec<Vec<usize>> = (0..c.n10).map(|_| draw(&t_w1, &[&q_seq])).collect();
    let mut u1 = Vec::with_capacity(c.n10 * c.n11);
    let mut x1 = Vec::with_capacity(c.n10 * c.n11);
    for m10 in 0..c.n10 {
        for _ in 0..c.n11 {
            let u = draw(&t_u1, &[&q_seq, &w1[m10]]);
            let x = draw(&t_x1, &[&q_seq, &w1[m10], &u]);
            u1.push(u);
            x1.push(x);
        }
    }
    let w2: Vec<Vec<usize>> = (0..c.n20).map(|_| draw(&t_w2, &[&q_seq])).collect();
    let mut v2 = Vec::with_capacity(c.n20 * c.n22);
    let mut x2 = Vec::with_capacity(c.n20 * c.n22);
    for m20 in 0..c.n20 {
        for _ in 0..c.n22 {
            let v = draw(&t_v2, &[&q_seq, &w2[m20]]);
            let x = draw(&t_x2, &[&q_seq, &w2[m20], &v]);
            v2.push(v);
            x2.push(x);
        }
    }
    let mut wb = Vec::with_capacity(c.wb_cells());
    let mut ub = Vec::with_capacity(c.wb_cells() * c.n11 * c.nb1);
    let mut vb = Vec::with_capacity(c.wb_cells() * c.n22 * c.nb2);
    for m10 in 0..c.n10 {
        for m20 in 0..c.n20 {
            for _ in 0..c.n0 {
                for _ in 0..c.nb0 {
                    let w = draw(&t_wb, &[&q_seq, &w1[m10], &w2[m20]]);
                    for m11 in 0..c.n11 {
                        for _ in 0..c.nb1 {
                            ub.push(draw(
                                &t_ub,
                                &[&q_seq, &w1[m10], &w2[m20], &w, &u1[m10 * c.n11 + m11]],
                            ));
                        }
                    }
                    for m22 in 0..c.n22 {
                        for _ in 0..c.nb2 {
                            vb.push(draw(
                                &t_vb,
                                &[&q_seq, &w1[m10], &w2[m20], &w, &v2[m20 * c.n22 + m22]],
                            ));
                        }
                    }
                    wb.push(w);
                }
            }
        }
    }

    Ok(CodebookSet {
        n,
        counts,
        q_seq,
        w1,
        u1,
        x1,
        w2,
        v2,
        x2,
        wb,
        ub,
        vb,
        xb_table,
        enc_target,
        y1_target,
        y2_target,
    })
}

/// Lexicographic bin search over (j0, j1, j2): returns the first bin triple
/// whose seven designated codewords are jointly typical with the
/// time-sharing sequence; `None` is an encoding failure.
pub fn marton_encode(
    codebooks: &CodebookSet,
    msgs: MessageIndices,
    config: &SimConfig,
) -> Result<Option<SelectedIndices>> {
    let c = &codebooks.counts;
    if msgs.m0 >= c.n0
        || msgs.m10 >= c.n10
        || msgs.m11 >= c.n11
        || msgs.m20 >= c.n20
        || msgs.m22 >= c.n22
    {
        return Err(Error::InvalidArgument(format!(
            "message indices {msgs:?} outside codebook ranges {c:?}"
        )));
    }
    let w1 = codebooks.w1_at(msgs.m10);
    let u1 = codebooks.u1_at(msgs.m10, msgs.m11);
    let w2 = codebooks.w2_at(msgs.m20);
    let v2 = codebooks.v2_at(msgs.m20, msgs.m22);
    for j0 in 0..c.nb0 {
        let wb = codebooks.wb_at(msgs.m10, msgs.m20, msgs.m0, j0);
        for j1 in 0..c.nb1 {
            let ub = codebooks.ub_at(msgs.m10, msgs.m20, msgs.m0, j0, msgs.m11, j1);
            for j2 in 0..c.nb2 {
                let vb = codebooks.vb_at(msgs.m10, msgs.m20, msgs.m0, j0, msgs.m22, j2);
                let seqs = [
                    codebooks.q_seq.as_slice(),
                    w1,
                    u1,
                    w2,
                    v2,
                    wb,
                    ub,
                    vb,
                ];
                if is_strongly_typical(&seqs, &codebooks.enc_target, config.epsilon) {
                    return Ok(Some(SelectedIndices {
                        msgs,
                        j0,
                        j1,
                        j2,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The broadcasting node's input sequence for the selected codewords,
/// deterministic in `noise_seed`.
fn xb_sequence(codebooks: &CodebookSet, sel: &SelectedIndices, noise_seed: u64) -> Vec<usize> {
    let m = sel.msgs;
    let q = &codebooks.q_seq;
    let w1 = codebooks.w1_at(m.m10);
    let u1 = codebooks.u1_at(m.m10, m.m11);
    let x1 = &codebooks.x1[m.m10 * codebooks.counts.n11 + m.m11];
    let w2 = codebooks.w2_at(m.m20);
    let v2 = codebooks.v2_at(m.m20, m.m22);
    let x2 = &codebooks.x2[m.m20 * codebooks.counts.n22 + m.m22];
    let wb = codebooks.wb_at(m.m10, m.m20, m.m0, sel.j0);
    let ub = codebooks.ub_at(m.m10, m.m20, m.m0, sel.j0, m.m11, sel.j1);
    let vb = codebooks.vb_at(m.m10, m.m20, m.m0, sel.j0, m.m22, sel.j2);
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(noise_seed, 0));
    (0..codebooks.n)
        .map(|t| {
            let cond = [
                q[t], w1[t], u1[t], x1[t], w2[t], v2[t], x2[t], wb[t], ub[t], vb[t],
            ];
            sample_row(codebooks.xb_table.row(&cond), &mut rng)
        })
        .collect()
}

/// Sends the selected codewords through the channel (noise drawn from
/// `noise_seed`) and decodes at one receiver: the decoder scans its whole
/// designated codeword set and succeeds only if exactly one candidate tuple
/// is jointly typical with the output and it carries the true messages.
///
/// Returns the decoded intended messages — (m0, m10, m11) at the first
/// receiver, (m0, m20, m22) at the second — or `None` on a decoding error.
pub fn transmit_and_decode(
    codebooks: &CodebookSet,
    sel: &SelectedIndices,
    chan: &ChannelSpec<f64>,
    config: &SimConfig,
    receiver: Receiver,
    noise_seed: u64,
) -> Option<(usize, usize, usize)> {
    let m = sel.msgs;
    let x1 = &codebooks.x1[m.m10 * codebooks.counts.n11 + m.m11];
    let x2 = &codebooks.x2[m.m20 * codebooks.counts.n22 + m.m22];
    let xb = xb_sequence(codebooks, sel, noise_seed);

    // Both receivers must see the same channel realization for a given
    // noise seed, so the pair (y1, y2) is always drawn jointly.
    let ny1 = chan.alph_y1().size();
    let ny2 = chan.alph_y2().size();
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(noise_seed, 1));
    let mut y1_seq = Vec::with_capacity(codebooks.n);
    let mut y2_seq = Vec::with_capacity(codebooks.n);
    for t in 0..codebooks.n {
        let mut row = Vec::with_capacity(ny1 * ny2);
        for y1 in 0..ny1 {
            for y2 in 0..ny2 {
                row.push(chan.kernel().get(&[x1[t], xb[t], x2[t], y1, y2]));
            }
        }
        let flat = sample_row(&row, &mut rng);
        y1_seq.push(flat / ny2);
        y2_seq.push(flat % ny2);
    }

    match receiver {
        Receiver::Y1 => decode_y1(codebooks, &y1_seq, config, (m.m0, m.m10, m.m11)),
        Receiver::Y2 => decode_y2(codebooks, &y2_seq, config, (m.m0, m.m20, m.m22)),
    }
}

fn decode_y1(
    cb: &CodebookSet,
    y1: &[usize],
    config: &SimConfig,
    truth: (usize, usize, usize),
) -> Option<(usize, usize, usize)> {
    let c = &cb.counts;
    let mut found: Option<(usize, usize, usize)> = None;
    for m10 in 0..c.n10 {
        for m11 in 0..c.n11 {
            for m20 in 0..c.n20 {
                for m0 in 0..c.n0 {
                    for j0 in 0..c.nb0 {
                        for j1 in 0..c.nb1 {
                            let seqs = [
                                cb.q_seq.as_slice(),
                                cb.w1_at(m10),
                                cb.u1_at(m10, m11),
                                cb.w2_at(m20),
                                cb.wb_at(m10, m20, m0, j0),
                                cb.ub_at(m10, m20, m0, j0, m11, j1),
                                y1,
                            ];
                            if is_strongly_typical(&seqs, &cb.y1_target, config.epsilon) {
                                if found.is_some() {
                                    return None; // ambiguity
                                }
                                found = Some((m0, m10, m11));
                            }
                        }
                    }
                }
            }
        }
    }
    found.filter(|&f| f == truth)
}

fn decode_y2(
    cb: &CodebookSet,
    y2: &[usize],
    config: &SimConfig,
    truth: (usize, usize, usize),
) -> Option<(usize, usize, usize)> {
    let c = &cb.counts;
    let mut found: Option<(usize, usize, usize)> = None;
    for m20 in 0..c.n20 {
        for m22 in 0..c.n22 {
            for m10 in 0..c.n10 {
                for m0 in 0..c.n0 {
                    for j0 in 0..c.nb0 {
                        for j2 in 0..c.nb2 {
                            let seqs = [
                                cb.q_seq.as_slice(),
                                cb.w1_at(m10),
                                cb.w2_at(m20),
                                cb.v2_at(m20, m22),
                                cb.wb_at(m10, m20, m0, j0),
                                cb.vb_at(m10, m20, m0, j0, m22, j2),
                                y2,
                            ];
                            if is_strongly_typical(&seqs, &cb.y2_target, config.epsilon) {
                                if found.is_some() {
                                    return None;
                                }
                                found = Some((m0, m20, m22));
                            }
                        }
                    }
                }
            }
        }
    }
    found.filter(|&f| f == truth)
}

/// Empirical outcome rates over all trials of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub encoding_failure_rate: f64,
    pub y1_error_rate: f64,
    pub y2_error_rate: f64,
    pub trials_run: usize,
}

/// Runs independent trials in parallel: each trial draws fresh codebooks and
/// uniform messages from a seed derived off the run seed, encodes, and
/// decodes at both receivers. An encoding failure counts as an error at
/// both receivers.
pub fn run_experiment(
    dist: &FactoredDistribution<f64>,
    chan: &ChannelSpec<f64>,
    config: &SimConfig,
) -> Result<SimReport> {
    config.validate()?;
    if config.trials == 0 {
        return Ok(SimReport {
            encoding_failure_rate: 0.0,
            y1_error_rate: 0.0,
            y2_error_rate: 0.0,
            trials_run: 0,
        });
    }
    let outcomes: Vec<Result<(bool, bool, bool)>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(config.seed, t as u64);
            let mut cfg = *config;
            cfg.seed = derive_seed(trial_seed, 0);
            let codebooks = generate_codebooks(dist, chan, &cfg)?;
            let c = &codebooks.counts;
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial_seed, 1));
            let msgs = MessageIndices {
                m0: rng.random_range(0..c.n0),
                m10: rng.random_range(0..c.n10),
                m11: rng.random_range(0..c.n11),
                m20: rng.random_range(0..c.n20),
                m22: rng.random_range(0..c.n22),
            };
            let sel = marton_encode(&codebooks, msgs, &cfg)?;
            Ok(match sel {
                None => (true, true, true),
                Some(sel) => {
                    let noise_seed = derive_seed(trial_seed, 2);
                    let ok1 = transmit_and_decode(
                        &codebooks, &sel, chan, &cfg, Receiver::Y1, noise_seed,
                    )
                    .is_some();
                    let ok2 = transmit_and_decode(
                        &codebooks, &sel, chan, &cfg, Receiver::Y2, noise_seed,
                    )
                    .is_some();
                    (false, !ok1, !ok2)
                }
            })
        })
        .collect();
    let mut enc = 0usize;
    let mut e1 = 0usize;
    let mut e2 = 0usize;
    for o in outcomes {
        let (f, x1, x2) = o?;
        enc += f as usize;
        e1 += x1 as usize;
        e2 += x2 as usize;
    }
    let nf = config.trials as f64;
    Ok(SimReport {
        encoding_failure_rate: enc as f64 / nf,
        y1_error_rate: e1 as f64 / nf,
        y2_error_rate: e2 as f64 / nf,
        trials_run: config.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;
    use crate::dist::{AuxSizes, FactoredDistribution};
    use crate::maccm::{superposition_parents, BCCR_NODES};

    fn zero_config(n: usize, seed: u64) -> SimConfig {
        SimConfig {
            n,
            rates: Rates::zero(),
            bin_rates: BinRates::zero(),
            epsilon: 0.8,
            trials: 50,
            seed,
        }
    }

    #[test]
    fn all_rates_zero_gives_one_codeword_per_class() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let cb = generate_codebooks(&dist, &chan, &zero_config(8, 1)).unwrap();
        assert_eq!(cb.counts.n0, 1);
        assert_eq!(cb.w1.len(), 1);
        assert_eq!(cb.ub.len(), 1);
    }

    #[test]
    fn same_seed_gives_identical_codebooks() {
        let dist = FactoredDistribution::random(AuxSizes::all_binary(), 7).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(8, 42);
        cfg.rates.r0 = 0.25;
        let a = generate_codebooks(&dist, &chan, &cfg).unwrap();
        let b = generate_codebooks(&dist, &chan, &cfg).unwrap();
        assert_eq!(a.q_seq, b.q_seq);
        assert_eq!(a.wb, b.wb);
        assert_eq!(a.ub, b.ub);
    }

    #[test]
    fn w1_symbol_frequencies_match_the_factor_marginal() {
        // |Q| = 1 so W1 symbols are i.i.d. from P(W1); 10^4 draws, 3 SE.
        let mut sizes = AuxSizes::degenerate(2, 2, 2);
        sizes.w1 = 2;
        let dist = FactoredDistribution::random(sizes, 3).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(10, 11);
        cfg.rates.r10 = 1.0; // 1024 codewords of length 10.
        let cb = generate_codebooks(&dist, &chan, &cfg).unwrap();
        let draws: usize = cb.w1.iter().map(|s| s.len()).sum();
        assert!(draws >= 10_000);
        let ones: usize = cb.w1.iter().flatten().filter(|&&s| s == 1).count();
        let joint = dist.input_joint().unwrap();
        let p1 = joint.marginal(&[W1]).unwrap().tensor().get(&[1]);
        let se = (p1 * (1.0 - p1) / draws as f64).sqrt();
        assert!(
            (ones as f64 / draws as f64 - p1).abs() <= 3.0 * se,
            "freq {} vs p {p1}",
            ones as f64 / draws as f64
        );
    }

    #[test]
    fn degenerate_auxiliaries_encode_with_zero_bins() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let cfg = zero_config(8, 5);
        let cb = generate_codebooks(&dist, &chan, &cfg).unwrap();
        let msgs = MessageIndices {
            m0: 0,
            m10: 0,
            m11: 0,
            m20: 0,
            m22: 0,
        };
        let sel = marton_encode(&cb, msgs, &cfg).unwrap();
        assert_eq!(
            sel,
            Some(SelectedIndices {
                msgs,
                j0: 0,
                j1: 0,
                j2: 0
            })
        );
    }

    #[test]
    fn out_of_range_messages_are_rejected() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let cfg = zero_config(8, 5);
        let cb = generate_codebooks(&dist, &chan, &cfg).unwrap();
        let msgs = MessageIndices {
            m0: 1,
            m10: 0,
            m11: 0,
            m20: 0,
            m22: 0,
        };
        assert!(marton_encode(&cb, msgs, &cfg).is_err());
    }

    #[test]
    fn correlated_auxiliaries_fail_with_zero_bins() {
        // WB must track U1 xor V2 through a light flip; with no bin slack
        // the single WB codeword is rarely jointly typical.
        let mut sizes = AuxSizes::all_binary();
        sizes.ub = 1;
        sizes.vb = 1;
        let dist = FactoredDistribution::from_fns(
            sizes,
            |_| 1.0,
            |_, t| if t[2] == t[1] { 0.25 } else { 0.0 },
            |_, t| if t[2] == t[1] { 0.25 } else { 0.0 },
            |c, t| {
                let want = c[2] ^ c[4];
                if t[0] == want {
                    0.9
                } else {
                    0.1
                }
            },
            |c, t| if t[0] == c[7] { 1.0 } else { 0.0 },
        )
        .unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(10, 17);
        cfg.epsilon = 0.3;
        let mut failures = 0;
        for trial in 0..200 {
            let mut c = cfg;
            c.seed = derive_seed(99, trial);
            let cb = generate_codebooks(&dist, &chan, &c).unwrap();
            let msgs = MessageIndices {
                m0: 0,
                m10: 0,
                m11: 0,
                m20: 0,
                m22: 0,
            };
            if marton_encode(&cb, msgs, &c).unwrap().is_none() {
                failures += 1;
            }
        }
        assert!(failures > 0, "expected some encoding failures");
    }

    #[test]
    fn single_codeword_on_deterministic_channel_decodes_exactly() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(8, 5);
        cfg.trials = 30;
        cfg.epsilon = 10.0; // only the zero-cell rule bites
        let report = run_experiment(&dist, &chan, &cfg).unwrap();
        assert_eq!(report.encoding_failure_rate, 0.0);
        assert_eq!(report.y1_error_rate, 0.0);
        assert_eq!(report.y2_error_rate, 0.0);
        assert_eq!(report.trials_run, 30);
    }

    #[test]
    fn useless_channel_cannot_beat_guessing() {
        // Output independent of every input; any positive rate forces
        // ambiguity or a wrong unique candidate at least half the time.
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2)
            .unwrap()
            .with_deterministic_xb(|_| 0)
            .unwrap();
        let chan = ChannelSpec::from_fn([2, 2, 2, 2, 2], |_, _, _, _, _| 0.25).unwrap();
        let mut cfg = zero_config(8, 23);
        cfg.rates.r11 = 0.25;
        cfg.trials = 100;
        cfg.epsilon = 10.0;
        let report = run_experiment(&dist, &chan, &cfg).unwrap();
        assert!(
            report.y1_error_rate >= 0.5,
            "error rate {}",
            report.y1_error_rate
        );
    }

    #[test]
    fn zero_trials_give_an_empty_report() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(8, 5);
        cfg.trials = 0;
        let report = run_experiment(&dist, &chan, &cfg).unwrap();
        assert_eq!(report.trials_run, 0);
        assert_eq!(report.y1_error_rate, 0.0);
    }

    #[test]
    fn fixed_seed_reports_are_identical() {
        let dist = FactoredDistribution::random(AuxSizes::all_binary(), 13).unwrap();
        let chan = ChannelSpec::orthogonal_links_binary();
        let mut cfg = zero_config(6, 77);
        cfg.rates.r0 = 0.2;
        cfg.trials = 40;
        let a = run_experiment(&dist, &chan, &cfg).unwrap();
        let b = run_experiment(&dist, &chan, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = zero_config(0, 1);
        assert!(cfg.validate().is_err());
        cfg.n = 17;
        assert!(cfg.validate().is_err());
        cfg.n = 8;
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
        cfg.epsilon = 0.5;
        cfg.rates.r0 = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn memory_cap_is_enforced() {
        let dist = FactoredDistribution::uniform_inputs(2, 2, 2).unwrap();
        let chan = ChannelSpec::noiseless_broadcast_binary();
        let mut cfg = zero_config(16, 1);
        cfg.rates = Rates {
            r0: 1.0,
            r10: 1.0,
            r11: 1.0,
            r20: 1.0,
            r22: 1.0,
        };
        assert!(matches!(
            generate_codebooks(&dist, &chan, &cfg),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn codebook_parents_match_the_coding_graph() {
        // The cloud centers each codeword class is conditioned on above must
        // agree with the exported superposition graph.
        use std::collections::BTreeSet;
        let expect = |v: VariableId| -> BTreeSet<VariableId> {
            superposition_parents(v).iter().copied().collect()
        };
        let here: [(VariableId, &[VariableId]); 10] = [
            (W1, &[]),
            (U1, &[W1]),
            (X1, &[W1, U1]),
            (W2, &[]),
            (V2, &[W2]),
            (X2, &[W2, V2]),
            (WB, &[W1, W2]),
            (UB, &[W1, W2, WB, U1]),
            (VB, &[W1, W2, WB, V2]),
            (XB, &[X1, W1, U1, X2, W2, V2, WB, UB, VB]),
        ];
        for (v, parents) in here {
            assert!(BCCR_NODES.contains(&v));
            assert_eq!(parents.iter().copied().collect::<BTreeSet<_>>(), expect(v));
        }
    }
}
