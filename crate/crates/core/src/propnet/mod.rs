//! Round-synchronous simulation of coded strip propagation.
//!
//! Nodes are numbered from 0; nodes `0..K` are the leaders, leader `k`
//! starts with the uncoded outgoing strip `h_k` and sits at grid position
//! `(k / m, k % m)` with `m = sqrt(K)`. Payload sizes are counted in drops,
//! one drop being a tiny block (`1/K` of a strip).

mod log;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldElement, Matrix};
use crate::lcc::{encode, leader_matrix, CodingVector, EvaluationPoints};
use crate::ledger::{Block, Strip};

pub use log::{RoundLog, Stage, Transfer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub nodes: usize,
    pub shards: usize,
    /// Per-node, per-round send and receive budget in strips.
    pub capacity: usize,
}

impl NetConfig {
    pub fn new(nodes: usize, shards: usize, capacity: usize) -> Result<Self> {
        let cfg = Self {
            nodes,
            shards,
            capacity,
        };
        if shards == 0 || isqrt(shards).pow(2) != shards {
            return Err(Error::Config(format!("K = {shards} is not a positive perfect square")));
        }
        if nodes < shards {
            return Err(Error::Config(format!("N = {nodes} is smaller than K = {shards}")));
        }
        if capacity == 0 {
            return Err(Error::Config("capacity must be at least one strip".into()));
        }
        Ok(cfg)
    }

    pub fn side(&self) -> usize {
        isqrt(self.shards)
    }

    fn position(&self, leader: usize) -> (usize, usize) {
        (leader / self.side(), leader % self.side())
    }

    fn leader_at(&self, x: usize, y: usize) -> usize {
        x * self.side() + y
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Completed count after `n` two-round pairs of stage three starting from
/// `K`: the smallest `n` with `K (D+1)^n >= N`.
pub fn stage_three_pairs(nodes: usize, shards: usize, capacity: usize) -> usize {
    let mut reach = shards;
    let mut n = 0;
    while reach < nodes {
        reach = reach.saturating_mul(capacity + 1);
        n += 1;
    }
    n
}

/// Rounds per stage predicted by the stage-wise schedule:
/// `2 ceil((sqrt K - 1)/D)`, one round for stage two (none when `K = 1`),
/// and `2 ceil(log_{D+1}(N/K))`.
pub fn predicted_stage_rounds(nodes: usize, shards: usize, capacity: usize) -> [usize; 3] {
    let m = isqrt(shards);
    [
        2 * (m - 1).div_ceil(capacity),
        usize::from(shards > 1),
        2 * stage_three_pairs(nodes, shards, capacity),
    ]
}

/// The closed form `2(sqrt K - 1)/D + log_{D+1}(N/K) + 1`, which counts the
/// stage-three logarithm once although stage three uses two rounds per step.
pub fn headline_rounds(nodes: usize, shards: usize, capacity: usize) -> f64 {
    let m = (shards as f64).sqrt();
    let d = capacity as f64;
    2.0 * (m - 1.0) / d + (nodes as f64 / shards as f64).ln() / (d + 1.0).ln() + 1.0
}

fn combine(coeffs: &[FieldElement], parts: &[&[FieldElement]]) -> Vec<FieldElement> {
    let mut out = coeffs[0].field().zeros(parts[0].len());
    for (&c, part) in coeffs.iter().zip(parts) {
        if !c.is_zero() {
            for (o, &p) in out.iter_mut().zip(part.iter()) {
                *o += c * p;
            }
        }
    }
    out
}

fn strip_from_tiny_blocks(proto: &Strip, blocks: Vec<Vec<FieldElement>>) -> Result<Strip> {
    Strip::from_flat(proto.shape(), blocks.concat())
}

/// `(h_k) . l`: the drop obtained by weighting the tiny blocks of `strip`.
fn drop_of(strip: &Strip, l: &CodingVector) -> Vec<FieldElement> {
    let parts: Vec<_> = (0..strip.shape().shards).map(|t| strip.tiny_block(t)).collect();
    combine(l.coefficients(), &parts)
}

/// Stage one. Preparation rotates strips inside each grid row so that every
/// leader learns its row; shooting sends each other row's leaders one
/// pre-combined packet. Returns the coded outgoing strips of the leaders.
pub fn stage_one(cfg: &NetConfig, points: &EvaluationPoints, strips: &[Strip], log: &mut RoundLog) -> Result<Vec<Strip>> {
    let k = cfg.shards;
    let m = cfg.side();
    let d = cfg.capacity;
    if strips.len() != k {
        return Err(Error::Shape(format!("{} outgoing strips for K = {k}", strips.len())));
    }
    let unit = k;
    let phases = (m - 1).div_ceil(d);

    // known[leader][u] = h_(x, u) once received
    let mut known: Vec<Vec<Option<&Strip>>> = vec![vec![None; m]; k];
    for (leader, strip) in strips.iter().enumerate() {
        let (_, y) = cfg.position(leader);
        known[leader][y] = Some(strip);
    }
    for n in 1..=phases {
        log.begin_round(Stage::One);
        for leader in 0..k {
            let (x, y) = cfg.position(leader);
            for dd in 1..=d {
                let delta = (n - 1) * d + dd;
                if delta > m - 1 {
                    break;
                }
                let to = cfg.leader_at(x, (y + delta) % m);
                log.send(leader, to, unit)?;
                known[to][y] = Some(&strips[leader]);
            }
        }
        log.end_round()?;
    }

    let coding: Vec<_> = (0..k).map(|i| points.coding_vector(i)).collect::<Result<_>>()?;
    // Packet from the row-x leaders to `target`: sum_u l_target[(x, u)] h_(x, u).
    let packet = |holder: usize, target: usize| -> Vec<FieldElement> {
        let (x, _) = cfg.position(holder);
        let l = coding[target].coefficients();
        let coeffs: Vec<_> = (0..m).map(|u| l[cfg.leader_at(x, u)]).collect();
        let parts: Vec<_> = (0..m)
            .map(|u| known[holder][u].expect("row known after preparation").data())
            .collect();
        combine(&coeffs, &parts)
    };
    let mut acc: Vec<Vec<FieldElement>> = (0..k).map(|leader| packet(leader, leader)).collect();
    for n in 1..=phases {
        log.begin_round(Stage::One);
        for leader in 0..k {
            let (x, y) = cfg.position(leader);
            for dd in 1..=d {
                let delta = (n - 1) * d + dd;
                if delta > m - 1 {
                    break;
                }
                let to = cfg.leader_at((x + delta) % m, y);
                log.send(leader, to, unit)?;
                let p = packet(leader, to);
                for (a, v) in acc[to].iter_mut().zip(p) {
                    *a += v;
                }
            }
        }
        log.end_round()?;
    }
    acc.into_iter()
        .map(|data| Strip::from_flat(strips[0].shape(), data))
        .collect()
}

/// Stage two. Leader `k` sends the drop `h~_k . l_r` to every leader `r`;
/// leader `r` stacks its `K` drops and applies the inverse leader matrix to
/// get its coded incoming strip. Self-deliveries are not network traffic and
/// are not logged.
pub fn stage_two(cfg: &NetConfig, points: &EvaluationPoints, coded_out: &[Strip], log: &mut RoundLog) -> Result<Vec<Strip>> {
    let k = cfg.shards;
    if coded_out.len() != k {
        return Err(Error::Shape(format!("{} coded strips for K = {k}", coded_out.len())));
    }
    if k == 1 {
        return Ok(coded_out.to_vec());
    }
    let coding: Vec<_> = (0..k).map(|i| points.coding_vector(i)).collect::<Result<_>>()?;
    let (_, inv) = leader_matrix(points.omegas(), &points.alphas()[..k])?;
    log.begin_round(Stage::Two);
    let mut inbox: Vec<Vec<Vec<FieldElement>>> = vec![Vec::with_capacity(k); k];
    for (sender, strip) in coded_out.iter().enumerate() {
        for (r, l) in coding.iter().enumerate() {
            if r != sender {
                log.send(sender, r, 1)?;
            }
            inbox[r].push(drop_of(strip, l));
        }
    }
    log.end_round()?;
    inbox
        .into_iter()
        .map(|drops| solve_blocks(&inv, &drops).and_then(|b| strip_from_tiny_blocks(&coded_out[0], b)))
        .collect()
}

// Tiny block t = sum_j inv[t][j] * drops[j].
fn solve_blocks(inv: &Matrix, drops: &[Vec<FieldElement>]) -> Result<Vec<Vec<FieldElement>>> {
    let parts: Vec<&[FieldElement]> = drops.iter().map(|d| d.as_slice()).collect();
    Ok((0..inv.rows()).map(|t| combine(inv.row(t), &parts)).collect())
}

/// Stage three. In each pair of rounds the complete nodes, sorted and cut
/// into groups of `K`, each serve up to `K D` of the lowest-indexed
/// incomplete nodes: first with outgoing-derived drops `h~_j . l_i` (which
/// give the client `v~_i`), then with incoming-derived drops `v~_j . l_i`
/// (which give `h~_i`).
pub fn stage_three(
    cfg: &NetConfig,
    points: &EvaluationPoints,
    leader_out: Vec<Strip>,
    leader_in: Vec<Strip>,
    log: &mut RoundLog,
) -> Result<(Vec<Strip>, Vec<Strip>)> {
    let k = cfg.shards;
    let n = cfg.nodes;
    let mut out: Vec<Option<Strip>> = vec![None; n];
    let mut inc: Vec<Option<Strip>> = vec![None; n];
    for (i, (h, v)) in leader_out.into_iter().zip(leader_in).enumerate() {
        out[i] = Some(h);
        inc[i] = Some(v);
    }
    let coding: Vec<_> = (0..n).map(|i| points.coding_vector(i)).collect::<Result<_>>()?;
    let proto = out[0].clone().ok_or_else(|| Error::Shape("no leaders".into()))?;

    loop {
        let complete: Vec<usize> = (0..n).filter(|&i| out[i].is_some()).collect();
        let mut pending = (0..n).filter(|&i| out[i].is_none());
        let mut plan: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for group in complete.chunks_exact(k) {
            let clients: Vec<usize> = pending.by_ref().take(k * cfg.capacity).collect();
            if clients.is_empty() {
                break;
            }
            plan.push((group.to_vec(), clients));
        }
        if plan.is_empty() {
            break;
        }
        let mut recovered_in = Vec::new();
        log.begin_round(Stage::Three);
        for (group, clients) in &plan {
            let rows: Vec<_> = group.iter().map(|&j| coding[j].coefficients().to_vec()).collect();
            let inv = Matrix::from_rows(points.omegas()[0].field(), &rows)?
                .inverse()
                .map_err(|_| Error::Protocol("server coding vectors are singular".into()))?;
            for &c in clients {
                let drops: Vec<_> = group
                    .iter()
                    .map(|&j| {
                        log.send(j, c, 1)?;
                        Ok(drop_of(out[j].as_ref().expect("server is complete"), &coding[c]))
                    })
                    .collect::<Result<_>>()?;
                recovered_in.push((c, strip_from_tiny_blocks(&proto, solve_blocks(&inv, &drops)?)?));
            }
        }
        log.end_round()?;
        log.begin_round(Stage::Three);
        let mut recovered_out = Vec::new();
        for (group, clients) in &plan {
            let rows: Vec<_> = group.iter().map(|&j| coding[j].coefficients().to_vec()).collect();
            let inv = Matrix::from_rows(points.omegas()[0].field(), &rows)?.inverse()?;
            for &c in clients {
                let drops: Vec<_> = group
                    .iter()
                    .map(|&j| {
                        log.send(j, c, 1)?;
                        Ok(drop_of(inc[j].as_ref().expect("server is complete"), &coding[c]))
                    })
                    .collect::<Result<_>>()?;
                recovered_out.push((c, strip_from_tiny_blocks(&proto, solve_blocks(&inv, &drops)?)?));
            }
        }
        log.end_round()?;
        for (c, s) in recovered_in {
            inc[c] = Some(s);
        }
        for (c, s) in recovered_out {
            out[c] = Some(s);
        }
    }
    let incomplete: Vec<_> = (0..n).filter(|&i| out[i].is_none() || inc[i].is_none()).collect();
    if let Some(&i) = incomplete.first() {
        return Err(Error::IncompleteNode(i));
    }
    Ok((out.into_iter().flatten().collect(), inc.into_iter().flatten().collect()))
}

/// Coded strips for every node plus the log of how they got there.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub outgoing: Vec<Strip>,
    pub incoming: Vec<Strip>,
    pub log: RoundLog,
    pub stage_rounds: [usize; 3],
}

impl Propagation {
    pub fn total_rounds(&self) -> usize {
        self.stage_rounds.iter().sum()
    }
}

/// Runs all three stages and checks every node's strips against direct
/// encoding of the block.
pub fn run_propagation(cfg: &NetConfig, points: &EvaluationPoints, block: &Block) -> Result<Propagation> {
    if points.shards() != cfg.shards || points.nodes() != cfg.nodes {
        return Err(Error::Config("evaluation points do not match the network".into()));
    }
    if block.shape().shards != cfg.shards {
        return Err(Error::Shape("block does not match the network".into()));
    }
    let mut log = RoundLog::new(cfg.shards, cfg.capacity);
    let h = block.outgoing_strips();
    let coded_out = stage_one(cfg, points, &h, &mut log)?;
    let after_one = log.rounds();
    let coded_in = stage_two(cfg, points, &coded_out, &mut log)?;
    let after_two = log.rounds();
    let (outgoing, incoming) = stage_three(cfg, points, coded_out, coded_in, &mut log)?;
    let stage_rounds = [after_one, after_two - after_one, log.rounds() - after_two];

    let raw_out: Vec<_> = h.iter().map(|s| s.data()).collect();
    let v = block.incoming_strips();
    let raw_in: Vec<_> = v.iter().map(|s| s.data()).collect();
    for i in 0..cfg.nodes {
        let l = points.coding_vector(i)?;
        if outgoing[i].data() != encode(&raw_out, &l)?.as_slice() || incoming[i].data() != encode(&raw_in, &l)?.as_slice()
        {
            return Err(Error::Protocol(format!("node {i} received wrong coded strips")));
        }
    }
    Ok(Propagation {
        outgoing,
        incoming,
        log,
        stage_rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldConfig;
    use crate::ledger::StripShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(f: FieldConfig, k: usize, seed: u64) -> Block {
        let shape = StripShape {
            shards: k,
            slots: 2,
            tx_len: 3,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Block::from_flat(shape, f.random_vec(&mut rng, k * shape.strip_len())).unwrap()
    }

    fn run(k: usize, n: usize, d: usize) -> Propagation {
        let f = FieldConfig::default();
        let cfg = NetConfig::new(n, k, d).unwrap();
        let pts = EvaluationPoints::standard(f, k, n).unwrap();
        run_propagation(&cfg, &pts, &block(f, k, (k * 100 + n * 10 + d) as u64)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(NetConfig::new(4, 3, 1).is_err());
        assert!(NetConfig::new(3, 4, 1).is_err());
        assert!(NetConfig::new(4, 4, 0).is_err());
        assert_eq!(NetConfig::new(16, 9, 1).unwrap().side(), 3);
    }

    #[test]
    fn stage_examples() {
        assert_eq!(run(1, 1, 1).stage_rounds, [0, 0, 0]);
        assert_eq!(run(4, 4, 1).stage_rounds, [2, 1, 0]);
        let p = run(9, 9, 2);
        assert_eq!(p.stage_rounds[0], 2);
        assert_eq!(p.log.stage_rounds(Stage::One), 2);
        assert_eq!(run(4, 16, 1).stage_rounds, [2, 1, 4]);
        assert_eq!(run(4, 36, 2).stage_rounds, [2, 1, 4]);
        assert_eq!(predicted_stage_rounds(16, 4, 1), [2, 1, 4]);
        assert!((headline_rounds(16, 4, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn completion_doubles_each_pair() {
        // K=4, N=16, D=1: 4 -> 8 -> 16 completed
        let p = run(4, 16, 1);
        let stage3: Vec<_> = p.log.transfers().iter().filter(|t| t.stage == Stage::Three).collect();
        let first_round = stage3[0].round;
        let clients = |r: usize| {
            let mut c: Vec<_> = stage3.iter().filter(|t| t.round == r).map(|t| t.receiver).collect();
            c.dedup();
            c.len()
        };
        assert_eq!(clients(first_round), 4);
        assert_eq!(clients(first_round + 2), 8);
    }

    #[test]
    fn correctness_and_capacity_grid() {
        for k in [1, 4, 9, 16] {
            for mult in [1, 2, 5] {
                for d in [1, 2, 3] {
                    let p = run(k, k * mult, d);
                    assert_eq!(p.stage_rounds, predicted_stage_rounds(k * mult, k, d), "K={k} N={} D={d}", k * mult);
                    p.log.check_capacity().unwrap();
                }
            }
        }
    }

    #[test]
    fn bandwidth() {
        for (k, n, d) in [(4, 16, 1), (9, 27, 2), (16, 48, 1), (16, 100, 3)] {
            let p = run(k, n, d);
            let m = isqrt(k);
            for node in 0..n {
                let got = p.log.received_drops(node);
                if node < k {
                    assert!(got <= (2 * (m - 1) + 1) * k, "leader {node}");
                } else {
                    assert_eq!(got, 2 * k, "node {node}");
                }
            }
        }
    }
}
