use std::collections::VecDeque;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ff::{FieldConfig, FieldElement};
use crate::lcc::{encode, interpolate_codeword, Codeword, EvaluationPoints};
use crate::ledger::{
    build_block, lookup_matrix_for, make_invalid_transaction, make_transaction, Block, InvalidKind, SchemeParams, Shard,
    Strip, StripShape, Transaction, TxScheme, UtxoRef, Wallet,
};
use crate::propnet::{run_propagation, NetConfig};
use crate::verifier::{
    ci_stats, coded_append, coded_verify, decode_results, filter_strip, indicators_from, verify_strip, CodedNode,
    DegreeLedger, IndicatorVector, ResultMatrix,
};

use super::SimConfig;

// Independent random streams, so that e.g. changing the adversary count does
// not change which transactions get generated.
#[derive(Clone, Copy)]
enum Purpose {
    Wallets = 1,
    Transactions = 2,
    Invalid = 3,
    AdversarySet = 4,
    AdversaryValues = 5,
    ResponseOrder = 6,
}

fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Metrics for one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Rounds per propagation stage; zero when `K` is not a perfect square
    /// and strips were handed out directly.
    pub stage_rounds: [usize; 3],
    pub propagated: bool,
    /// Largest download of any leader, in strips.
    pub leader_download_strips: f64,
    /// Largest download of any non-leader, in strips.
    pub nonleader_download_strips: f64,
    pub invalid_count: usize,
    pub abandoned_count: usize,
    pub ci_rate: Ratio<u64>,
    pub indicators_agree: bool,
    pub decode_ok: bool,
    pub decode_error: Option<String>,
}

impl EpochReport {
    pub fn total_rounds(&self) -> usize {
        self.stage_rounds.iter().sum()
    }
}

/// Comparison of the honest nodes' coded shards, decoded at the shard
/// points, against the uncoded reference chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub consistent: bool,
    pub honest_nodes: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub reports: Vec<EpochReport>,
    pub verdict: Verdict,
    /// False when a decoding failure stopped the run early.
    pub completed: bool,
}

// Where one block slot's transaction came from.
#[derive(Clone, Copy, Debug)]
struct Spend {
    utxo: usize,
    owner: usize,
    // taken from the unspent pool rather than re-spent
    fresh: bool,
    receiver: usize,
    invalid: bool,
}

/// A running simulation: the uncoded reference chain, every node's coded
/// state, and the wallets driving transactions.
pub struct Simulation {
    cfg: SimConfig,
    scheme: TxScheme,
    points: EvaluationPoints,
    net: Option<NetConfig>,
    radius: usize,
    stragglers: usize,
    wallets: Vec<Vec<Wallet>>,
    reference: Vec<Shard>,
    nodes: Vec<CodedNode>,
    adversarial: Vec<bool>,
    // (shard index, wallet) of unspent outputs, per community
    unspent: Vec<VecDeque<(usize, usize)>>,
    // every output a community's wallets ever received, for re-spends
    received: Vec<Vec<(usize, usize)>>,
    rng_tx: ChaCha8Rng,
    rng_invalid: ChaCha8Rng,
    rng_values: ChaCha8Rng,
    rng_order: ChaCha8Rng,
    epoch: usize,
}

impl Simulation {
    pub fn new(cfg: SimConfig, force: bool) -> Result<Self> {
        cfg.check_feasible(force)?;
        let field = FieldConfig::new(cfg.q)?;
        let scheme = TxScheme::new(
            field,
            SchemeParams {
                t_max: cfg.t_max,
                c_len: cfg.address_len,
                vinegar: cfg.vinegar,
                oil: cfg.oil,
                degree: cfg.d,
                seed: cfg.seed,
            },
        )?;
        let k = cfg.shards;
        let n = cfg.nodes;
        let points = EvaluationPoints::standard(field, k, n)?;
        let net = NetConfig::new(n, k, cfg.capacity).ok();

        let mut rng = stream(cfg.seed, Purpose::Wallets);
        let wallets = (0..k)
            .map(|c| {
                (0..cfg.wallets_per_community)
                    .map(|_| Wallet::generate(&scheme, c, &mut rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        // Genesis: community r's first incoming strip holds KQ coinbase
        // outputs spread over its wallets.
        let layout = scheme.layout();
        let shape = StripShape {
            shards: k,
            slots: cfg.slots,
            tx_len: layout.r_len(),
        };
        let u0 = lookup_matrix_for(field, 0, 0, cfg.t_max)?;
        let p0 = field.zeros(layout.b_len);
        let s0 = field.zeros(layout.ds_len);
        let mut genesis = Vec::with_capacity(k);
        let mut unspent = Vec::with_capacity(k);
        for community in &wallets {
            let mut data = Vec::with_capacity(shape.strip_len());
            let mut pool = VecDeque::new();
            for j in 0..shape.tx_count() {
                let w = j % community.len();
                data.extend(Transaction::from_parts(layout, &u0, &p0, community[w].address(), &s0)?.into_flat());
                pool.push_back((j, w));
            }
            genesis.push(Strip::from_flat(shape, data)?);
            unspent.push(pool);
        }
        let received = unspent.iter().map(|p| p.iter().copied().collect()).collect();
        let mut reference = Vec::with_capacity(k);
        for g in &genesis {
            let mut shard = Shard::new(layout.r_len(), cfg.t_max);
            shard.append(g)?;
            reference.push(shard);
        }
        let rows: Vec<_> = genesis.iter().map(|s| s.data()).collect();
        let nodes = (0..n)
            .map(|i| {
                let data = encode(&rows, &points.coding_vector(i)?)?;
                Ok(CodedNode::new(i, points.alphas()[i], Shard::from_entries(layout.r_len(), cfg.t_max, data)?))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut adversarial = vec![false; n];
        let a = cfg.adversary_count().min(n - k);
        let mut rng = stream(cfg.seed, Purpose::AdversarySet);
        for i in sample(&mut rng, n - k, a) {
            adversarial[k + i] = true;
        }

        Ok(Self {
            radius: cfg.radius(),
            stragglers: cfg.straggler_count(),
            rng_tx: stream(cfg.seed, Purpose::Transactions),
            rng_invalid: stream(cfg.seed, Purpose::Invalid),
            rng_values: stream(cfg.seed, Purpose::AdversaryValues),
            rng_order: stream(cfg.seed, Purpose::ResponseOrder),
            cfg,
            scheme,
            points,
            net,
            wallets,
            reference,
            nodes,
            adversarial,
            unspent,
            received,
            epoch: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn scheme(&self) -> &TxScheme {
        &self.scheme
    }

    pub fn points(&self) -> &EvaluationPoints {
        &self.points
    }

    pub fn reference_shards(&self) -> &[Shard] {
        &self.reference
    }

    pub fn nodes(&self) -> &[CodedNode] {
        &self.nodes
    }

    pub fn is_adversarial(&self, node: usize) -> bool {
        self.adversarial[node]
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    fn invalid_slots(&mut self) -> Vec<bool> {
        let k = self.cfg.shards;
        let total = k * k * self.cfg.slots;
        let mut marks = vec![false; total];
        match self.cfg.invalid_count {
            Some(c) => {
                for i in sample(&mut self.rng_invalid, total, c) {
                    marks[i] = true;
                }
            }
            None => {
                for m in marks.iter_mut() {
                    *m = self.rng_invalid.gen_bool(self.cfg.invalid_rate);
                }
            }
        }
        marks
    }

    fn next_utxo(&mut self, community: usize) -> (usize, usize, bool) {
        match self.unspent[community].pop_front() {
            Some((u, w)) => (u, w, true),
            // Not enough fresh coins: re-spend an old one. Double spends are
            // not detected by verification, so this stays valid.
            None => {
                let owned = &self.received[community];
                let (u, w) = owned[self.rng_tx.gen_range(0..owned.len())];
                (u, w, false)
            }
        }
    }

    /// Generates the next epoch's block from the current reference shards.
    fn build_epoch_block(&mut self) -> Result<(Block, Vec<Spend>)> {
        let k = self.cfg.shards;
        let q = self.cfg.slots;
        let invalid = self.invalid_slots();
        let mut spends = Vec::with_capacity(k * k * q);
        let mut pairs = vec![vec![Vec::with_capacity(q); k]; k];
        for (sender, row) in pairs.iter_mut().enumerate() {
            for (r, txs) in row.iter_mut().enumerate() {
                for s in 0..q {
                    let (utxo, owner, fresh) = self.next_utxo(sender);
                    let receiver = self.rng_tx.gen_range(0..self.wallets[r].len());
                    let bad = invalid[(sender * k + r) * q + s];
                    let wallet = &self.wallets[sender][owner];
                    let dest = self.wallets[r][receiver].address();
                    let utxo_ref = UtxoRef { shard: sender, index: utxo };
                    let shard = &self.reference[sender];
                    let tx = if bad {
                        let kind = [InvalidKind::BadSignature, InvalidKind::WrongAddress, InvalidKind::Garbage]
                            [self.rng_invalid.gen_range(0..3)];
                        make_invalid_transaction(&self.scheme, kind, wallet, utxo_ref, shard, dest, &mut self.rng_invalid)?
                    } else {
                        make_transaction(&self.scheme, wallet, utxo_ref, shard, dest, &mut self.rng_tx)?
                    };
                    txs.push(tx);
                    spends.push(Spend {
                        utxo,
                        owner,
                        fresh,
                        receiver,
                        invalid: bad,
                    });
                }
            }
        }
        let block = build_block(self.scheme.field(), self.scheme.layout(), q, &pairs)?;
        Ok((block, spends))
    }

    /// The next epoch's block, without running the epoch. Used for fixtures.
    pub fn preview_block(&mut self) -> Result<Block> {
        Ok(self.build_epoch_block()?.0)
    }

    fn random_result(&mut self, like: &ResultMatrix) -> Result<ResultMatrix> {
        let f = self.scheme.field();
        let data = f.random_vec(&mut self.rng_values, like.rows() * like.cols());
        ResultMatrix::from_flat(like.rows(), like.cols(), data)
    }

    // Responders seen by `node`: every adversary (the worst case), then the
    // honest nodes in a seeded order, cut at N - S.
    fn responders(&mut self) -> Vec<usize> {
        let mut honest: Vec<usize> = (0..self.cfg.nodes).filter(|&i| !self.adversarial[i]).collect();
        honest.shuffle(&mut self.rng_order);
        let mut order: Vec<usize> = (0..self.cfg.nodes).filter(|&i| self.adversarial[i]).collect();
        order.extend(honest);
        order.truncate(self.cfg.nodes - self.stragglers);
        order
    }

    /// Runs one epoch. A decoding failure is reported in the returned
    /// report; the epoch is then not applied.
    pub fn step(&mut self) -> Result<EpochReport> {
        self.epoch += 1;
        let k = self.cfg.shards;
        let n = self.cfg.nodes;
        let (block, spends) = self.build_epoch_block()?;

        // Uncoded reference.
        let outgoing = block.outgoing_strips();
        let truth = outgoing
            .iter()
            .zip(&self.reference)
            .map(|(h, v)| verify_strip(&self.scheme, h, v))
            .collect::<Result<Vec<_>>>()?;
        let indicators = indicators_from(&truth);
        let ci = ci_stats(&indicators, self.cfg.slots);

        // Delivery of coded strips.
        let (coded_out, coded_in, stage_rounds, leader_dl, other_dl) = match &self.net {
            Some(net) => {
                let p = run_propagation(net, &self.points, &block)?;
                let per = p.log.drops_per_strip() as f64;
                let dl = |range: std::ops::Range<usize>| {
                    range.map(|i| p.log.received_drops(i) as f64 / per).fold(0.0, f64::max)
                };
                let (ld, od) = (dl(0..k), dl(k..n));
                (p.outgoing, p.incoming, p.stage_rounds, ld, od)
            }
            None => {
                let incoming = block.incoming_strips();
                let raw_out: Vec<_> = outgoing.iter().map(|s| s.data()).collect();
                let raw_in: Vec<_> = incoming.iter().map(|s| s.data()).collect();
                let mut out = Vec::with_capacity(n);
                let mut inc = Vec::with_capacity(n);
                for i in 0..n {
                    let l = self.points.coding_vector(i)?;
                    out.push(Strip::from_flat(block.shape(), encode(&raw_out, &l)?)?);
                    inc.push(Strip::from_flat(block.shape(), encode(&raw_in, &l)?)?);
                }
                (out, inc, [0; 3], 0.0, 0.0)
            }
        };
        for ((node, h), v) in self.nodes.iter_mut().zip(coded_out).zip(coded_in) {
            node.outgoing = Some(h);
            node.incoming = Some(v);
        }

        // Coded verification; adversaries answer with noise.
        let mut responses = Vec::with_capacity(n);
        for i in 0..n {
            let honest = coded_verify(&self.scheme, &self.nodes[i])?;
            let r = if self.adversarial[i] { self.random_result(&honest)? } else { honest };
            responses.push((self.nodes[i].alpha, r));
        }

        let degrees = DegreeLedger::new(self.reference[0].log_size(), self.cfg.d, k);
        let mut decoded: Vec<Option<Vec<IndicatorVector>>> = vec![None; n];
        let mut agree = true;
        let mut failure = None;
        for (i, slot) in decoded.iter_mut().enumerate() {
            if self.adversarial[i] {
                continue;
            }
            let order = self.responders();
            let pool: Vec<_> = order.iter().map(|&j| responses[j].clone()).collect();
            match decode_results(&pool, &degrees, self.radius, self.points.omegas()) {
                Ok(results) => {
                    let e = indicators_from(&results);
                    agree &= e == indicators;
                    *slot = Some(e);
                }
                Err(err) => {
                    failure = Some(format!("node {i}: {err}"));
                    break;
                }
            }
        }

        let mut report = EpochReport {
            epoch: self.epoch,
            stage_rounds,
            propagated: self.net.is_some(),
            leader_download_strips: leader_dl,
            nonleader_download_strips: other_dl,
            invalid_count: ci.invalid,
            abandoned_count: ci.abandoned,
            ci_rate: ci.ci_rate(),
            indicators_agree: agree && failure.is_none(),
            decode_ok: failure.is_none(),
            decode_error: failure,
        };
        if !report.decode_ok {
            report.indicators_agree = false;
            return Ok(report);
        }

        // Appends: honest nodes use their own decoded indicators, adversaries
        // (whose storage is irrelevant) the reference ones.
        for (node, e) in self.nodes.iter_mut().zip(&decoded) {
            coded_append(node, e.as_ref().unwrap_or(&indicators))?;
            node.outgoing = None;
            node.incoming = None;
        }
        let base = self.reference[0].len();
        let mut incoming = block.incoming_strips();
        let mut zeroed = vec![false; k * self.cfg.slots];
        for (r, v) in incoming.iter_mut().enumerate() {
            filter_strip(v, &indicators)?;
            self.reference[r].append(v)?;
            if r == 0 {
                for (j, z) in zeroed.iter_mut().enumerate() {
                    *z = v.tx(j).iter().all(FieldElement::is_zero);
                }
            }
        }

        // Outputs: slot (k, s) of every incoming strip survives or dies
        // together, so `zeroed` from strip 0 covers all receivers.
        let q = self.cfg.slots;
        for (idx, sp) in spends.iter().enumerate() {
            let sender = idx / (k * q);
            let r = (idx / q) % k;
            let s = idx % q;
            let pos = sender * q + s;
            let kept = !zeroed[pos] && !sp.invalid;
            debug_assert!(sp.invalid || indicators[sender].is_valid(r * q + s));
            if kept {
                let out = (base + pos, sp.receiver);
                self.unspent[r].push_back(out);
                self.received[r].push(out);
            } else if sp.fresh {
                // The spend did not happen; the coin is still available.
                self.unspent[sender].push_back((sp.utxo, sp.owner));
            }
        }
        Ok(report)
    }

    /// Interpolates the honest nodes' coded shards (degree `K - 1`), reads
    /// them off at the shard points, and compares with the reference.
    pub fn verdict(&self) -> Verdict {
        let honest: Vec<&CodedNode> = self
            .nodes
            .iter()
            .filter(|n| !self.adversarial[n.index])
            .collect();
        let width = self.reference[0].data().len();
        let mut cw = Codeword::new(width);
        for n in &honest {
            if let Err(e) = cw.insert(n.index, n.alpha, n.shard.data().to_vec()) {
                return Verdict {
                    consistent: false,
                    honest_nodes: honest.len(),
                    detail: e.to_string(),
                };
            }
        }
        let result = interpolate_codeword(&cw, self.cfg.shards - 1).map(|polys| {
            self.points.omegas().iter().zip(&self.reference).all(|(&w, shard)| {
                polys.iter().zip(shard.data()).all(|(p, &x)| p.eval(w) == x)
            })
        });
        let (consistent, detail) = match result {
            Ok(true) => (true, "decoded shards match the reference chain".to_string()),
            Ok(false) => (false, "decoded shards differ from the reference chain".to_string()),
            Err(e) => (false, format!("honest coded shards do not form a codeword: {e}")),
        };
        Verdict {
            consistent,
            honest_nodes: honest.len(),
            detail,
        }
    }
}

/// Runs every epoch (stopping at the first decoding failure) and compares the
/// final coded state with the reference chain.
pub fn run_simulation(cfg: &SimConfig, force: bool) -> Result<SimOutcome> {
    let mut sim = Simulation::new(cfg.clone(), force)?;
    let mut reports = Vec::with_capacity(cfg.epochs);
    let mut completed = true;
    for _ in 0..cfg.epochs {
        let report = sim.step()?;
        let ok = report.decode_ok;
        reports.push(report);
        if !ok {
            completed = false;
            break;
        }
    }
    Ok(SimOutcome {
        reports,
        verdict: sim.verdict(),
        completed,
    })
}
