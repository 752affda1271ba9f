//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use codedshard::ff::FieldConfig;
use codedshard::lcc::{decode_with_errors, encode, interpolate, interpolate_codeword, Codeword, EvaluationPoints};
use codedshard::ledger::{log_size, Block, Strip, StripShape};
use codedshard::mqcrypto::{keygen, sign, verify_sig, MqShape};
use codedshard::poly::Poly;
use codedshard::propnet::{headline_rounds, run_propagation, NetConfig};
use codedshard::sim::{run_simulation, SimConfig, Simulation};
use codedshard::verifier::{coded_verify, polyshard_ci_rate, verify_strip, DegreeLedger};
use codedshard::{Error, FieldElement};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bounds_reproduction() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_codedshard"))
        .args(["bounds", "10000", "64", "2^30", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit status {}", out.status))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let f = |path: &str| v.pointer(path).and_then(|x| x.as_f64()).unwrap_or(f64::NAN);
    let threshold = f("/at_gamma/threshold_approx");
    let beta_max = f("/at_gamma/beta_max_approx");
    let gamma = f("/at_gamma/gamma");
    let gamma_min = f("/gamma_min/gamma_min_approx");
    let awaited = f("/gamma_min/awaited_approx");
    ensure(format!("{threshold:.3}") == "0.192" && (threshold - 0.192).abs() < 1e-12, || {
        format!("threshold {threshold}")
    })?;
    ensure((gamma - 0.9999).abs() < 1e-12, || format!("gamma {gamma}"))?;
    ensure((beta_max - 0.404).abs() <= 0.001, || format!("beta_max {beta_max}"))?;
    ensure((gamma_min - 0.792).abs() < 1e-12 && awaited == 7920.0, || {
        format!("gamma_min {gamma_min}, awaited {awaited}")
    })?;
    let text = Command::new(env!("CARGO_BIN_EXE_codedshard"))
        .args(["bounds", "10000", "64", "2^30"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&text.stdout);
    ensure(text.contains("0.192") && text.contains("7920") && text.contains("4040"), || {
        format!("text output missing values:\n{text}")
    })?;
    Ok(format!(
        "threshold 0.192, beta_max {beta_max} at gamma 1-1/N (4040 at gamma 1), gamma_min 0.792 -> 7920"
    ))
}

fn ceil_log(base: usize, x: usize) -> usize {
    // smallest e with base^e >= x
    let (mut e, mut p) = (0, 1);
    while p < x {
        p *= base;
        e += 1;
    }
    e
}

fn random_block(field: FieldConfig, shards: usize, seed: u64) -> Block {
    let shape = StripShape {
        shards,
        slots: 1,
        tx_len: 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Block::from_flat(shape, field.random_vec(&mut rng, shards * shape.strip_len())).unwrap()
}

fn round_counts() -> Check {
    let start = Instant::now();
    let field = FieldConfig::default();
    let mut cells = 0;
    let mut differs = 0;
    for k in [4, 9, 16] {
        let m = (k as f64).sqrt() as usize;
        for d in [1, 2] {
            for n in [k, (d + 1) * k, (d + 1) * (d + 1) * k] {
                let cfg = NetConfig::new(n, k, d).map_err(|e| e.to_string())?;
                let points = EvaluationPoints::standard(field, k, n).map_err(|e| e.to_string())?;
                let p = run_propagation(&cfg, &points, &random_block(field, k, (k * n + d) as u64))
                    .map_err(|e| e.to_string())?;
                let expected = 2 * (m - 1).div_ceil(d) + 1 + 2 * ceil_log(d + 1, n / k);
                ensure(p.total_rounds() == expected, || {
                    format!("K={k} N={n} D={d}: measured {} expected {expected}", p.total_rounds())
                })?;
                let headline = headline_rounds(n, k, d);
                let flag = (headline - expected as f64).abs() > 1e-9;
                if flag {
                    differs += 1;
                }
                println!(
                    "    K={k:<2} N={n:<3} D={d}  measured {:>2}  stage-wise {expected:>2}  headline {headline:>5.2}{}",
                    p.total_rounds(),
                    match (flag, n > k) {
                        (false, _) => "",
                        (true, true) => "  (headline differs: log term counted once)",
                        (true, false) => "  (headline differs: stage one not rounded up)",
                    }
                );
                cells += 1;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!("{cells} cells match the stage-wise count; headline differs in {differs}; {t:.2?}"))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    // (K, Q, Tmax) with room for the genesis strip plus three epochs.
    let mut shapes = Vec::new();
    for t_max in [3usize, 4] {
        for k in [1usize, 2, 4] {
            for q in [1usize, 2] {
                if k * q * 4 <= 1 << t_max {
                    shapes.push((k, q, t_max));
                }
            }
        }
    }
    // K = 4, Q = 2 needs Tmax = 5 for three epochs; run it as well.
    shapes.push((4, 2, 5));
    let mut runs = 0;
    let mut with_adversaries = 0;
    for &(k, q, t_max) in &shapes {
        for a in [0usize, 1, 2] {
            for s in [0usize, 2] {
                for seed in 0..2u64 {
                    let mut cfg = SimConfig {
                        q: 97,
                        shards: k,
                        slots: q,
                        t_max,
                        d: 3,
                        epochs: 3,
                        invalid_rate: 0.25,
                        adversaries: Some(a),
                        stragglers: Some(s),
                        seed: seed * 1000 + (k * 100 + q * 10 + t_max) as u64,
                        ..SimConfig::default()
                    };
                    let slack = 1 + seed as usize;
                    cfg.nodes = cfg.recovery_threshold() + slack;
                    let out = run_simulation(&cfg, false).map_err(|e| format!("{cfg:?}: {e}"))?;
                    ensure(out.completed && out.verdict.consistent, || {
                        format!("K={k} Q={q} Tmax={t_max} A={a} S={s}: {:?}", out.verdict)
                    })?;
                    ensure(out.reports.iter().all(|r| r.indicators_agree), || {
                        format!("K={k} Q={q} Tmax={t_max} A={a} S={s}: indicator mismatch")
                    })?;
                    runs += 1;
                    if a > 0 {
                        with_adversaries += 1;
                    }
                }
            }
        }
    }
    let t = start.elapsed();
    ensure(runs >= 50, || format!("only {runs} configurations"))?;
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!(
        "{runs} configurations ({with_adversaries} with adversaries) match the uncoded chain over 3 epochs; {t:.2?}"
    ))
}

fn ci_rate() -> Check {
    let cfg = SimConfig {
        shards: 4,
        slots: 2,
        nodes: 40,
        epochs: 3,
        invalid_count: Some(1),
        seed: 11,
        ..SimConfig::default()
    };
    let out = run_simulation(&cfg, false).map_err(|e| e.to_string())?;
    ensure(out.reports.len() == 3, || "missing epochs".into())?;
    for r in &out.reports {
        ensure(r.invalid_count == 1 && r.ci_rate == Ratio::new(1, 8), || {
            format!("epoch {}: invalid {}, ci {}", r.epoch, r.invalid_count, r.ci_rate)
        })?;
        // the abandoned fraction, recomputed from counts
        ensure(Ratio::new(r.abandoned_count as u64, 32) == Ratio::new(1, 8), || {
            format!("abandoned {}", r.abandoned_count)
        })?;
    }
    ensure(polyshard_ci_rate(4) == Ratio::new(1, 4), || "comparator".into())?;
    Ok("1/8 abandoned per epoch, against 1/4 for the uncoded-per-shard comparator".into())
}

fn random_poly(field: FieldConfig, degree: usize, rng: &mut ChaCha8Rng) -> Poly {
    Poly::new(field, field.random_vec(rng, degree + 1))
}

// Every polynomial of degree <= p that agrees with at least `agree` points,
// found by interpolating every (p+1)-subset.
fn close_codewords(points: &[(FieldElement, FieldElement)], p: usize, agree: usize) -> Vec<Poly> {
    let n = points.len();
    let mut found: Vec<Poly> = Vec::new();
    let mut idx: Vec<usize> = (0..=p).collect();
    loop {
        let subset: Vec<_> = idx.iter().map(|&i| points[i]).collect();
        let f = interpolate(&subset, p).unwrap();
        let hits = points.iter().filter(|&&(x, y)| f.eval(x) == y).count();
        if hits >= agree && !found.contains(&f) {
            found.push(f);
        }
        // next combination
        let mut i = p + 1;
        loop {
            if i == 0 {
                return found;
            }
            i -= 1;
            if idx[i] < n - (p + 1 - i) {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..=p {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn decoder_radius() -> Check {
    let field = FieldConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..1000 {
        let p = rng.gen_range(0..=40);
        let a = rng.gen_range(0..=6);
        let n = p + 2 * a + 1 + rng.gen_range(0..3);
        let f = random_poly(field, p, &mut rng);
        let mut pts: Vec<_> = (0..n)
            .map(|i| {
                let x = field.elem(i as u64 + 1);
                (x, f.eval(x))
            })
            .collect();
        let errs = rng.gen_range(0..=a);
        for i in rand::seq::index::sample(&mut rng, n, errs) {
            pts[i].1 += field.random_nonzero(&mut rng);
        }
        let got = decode_with_errors(&pts, p, a).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(got == f, || format!("trial {trial}: wrong polynomial"))?;
    }

    // Beyond the radius, checked against brute force: the decoder fails
    // exactly when no codeword lies within distance A.
    let mut failures = 0;
    let mut miscorrections = 0;
    for trial in 0..300 {
        let p = rng.gen_range(0..=3);
        let a = rng.gen_range(1..=2);
        let n = p + 2 * a + 1;
        let f = random_poly(field, p, &mut rng);
        let mut pts: Vec<_> = (0..n)
            .map(|i| {
                let x = field.elem(i as u64 + 1);
                (x, f.eval(x))
            })
            .collect();
        let errs = rng.gen_range(a + 1..=n - p);
        // Corruptions copy a second polynomial on half the errors so that
        // miscorrection also gets exercised.
        let g = random_poly(field, p, &mut rng);
        for (j, i) in rand::seq::index::sample(&mut rng, n, errs).into_iter().enumerate() {
            pts[i].1 = if j % 2 == 0 { g.eval(pts[i].0) } else { field.random(&mut rng) };
        }
        let near = close_codewords(&pts, p, n - a);
        match decode_with_errors(&pts, p, a) {
            Err(Error::DecodingFailure { .. }) => {
                ensure(near.is_empty(), || format!("trial {trial}: failed with a codeword in range"))?;
                failures += 1;
            }
            Ok(h) => {
                ensure(near == vec![h], || format!("trial {trial}: decoded a far polynomial"))?;
                miscorrections += 1;
            }
            Err(e) => return Err(format!("trial {trial}: {e}")),
        }
    }
    ensure(failures > 0, || "no failures produced".into())?;

    // A fixed adversarial instance at the largest degree.
    let (p, a) = (40, 5);
    let f = random_poly(field, p, &mut rng);
    let mut pts: Vec<_> = (1..=(p + 2 * a + 1) as u64)
        .map(|i| {
            let x = field.elem(i);
            (x, f.eval(x))
        })
        .collect();
    for pt in pts.iter_mut().take(a + 1) {
        pt.1 += field.one();
    }
    ensure(matches!(decode_with_errors(&pts, p, a), Err(Error::DecodingFailure { .. })), || {
        "A+1 corruptions at P=40 decoded".into()
    })?;
    Ok(format!(
        "1000 in-radius trials exact; beyond radius {failures} failures and {miscorrections} miscorrections, all matching brute force"
    ))
}

fn degree_ledger() -> Check {
    let mut checked = 0;
    for inst in 0..100u64 {
        let k = 2 + (inst % 3) as usize;
        let slots = 1 + (inst / 3 % 2) as usize;
        // the genesis shard holds K*Q entries
        let degrees = DegreeLedger::new(log_size(k * slots), 3, k);
        let deg_z = degrees.deg_in_z();
        let n = deg_z + 4;
        let cfg = SimConfig {
            shards: k,
            slots,
            nodes: n,
            epochs: 1,
            d: 3,
            invalid_rate: 0.3,
            seed: 500 + inst,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg, true).map_err(|e| e.to_string())?;
        let block = sim.preview_block().map_err(|e| e.to_string())?;
        let outgoing = block.outgoing_strips();
        let rows: Vec<_> = outgoing.iter().map(Strip::data).collect();
        let mut cw = Codeword::new(0);
        for i in 0..n {
            let mut node = sim.nodes()[i].clone();
            let l = sim.points().coding_vector(i).map_err(|e| e.to_string())?;
            node.outgoing = Some(Strip::from_flat(block.shape(), encode(&rows, &l).unwrap()).unwrap());
            let r = coded_verify(sim.scheme(), &node).map_err(|e| e.to_string())?;
            if i == 0 {
                cw = Codeword::new(r.data().len());
            }
            cw.insert(i, node.alpha, r.data().to_vec()).map_err(|e| e.to_string())?;
        }
        // Fit on the first deg+1 nodes, check the held-out rest.
        let mut fit = Codeword::new(cw.width());
        for (i, alpha, payload) in cw.iter().take(deg_z + 1) {
            fit.insert(i, alpha, payload.to_vec()).unwrap();
        }
        let polys = interpolate_codeword(&fit, deg_z).map_err(|e| e.to_string())?;
        for (_, alpha, payload) in cw.iter().skip(deg_z + 1) {
            ensure(polys.iter().zip(payload).all(|(p, &y)| p.eval(alpha) == y), || {
                format!("instance {inst}: held-out node disagrees (deg bound {deg_z})")
            })?;
        }
        for (kk, &w) in sim.points().omegas().iter().enumerate() {
            let truth = verify_strip(sim.scheme(), &outgoing[kk], &sim.reference_shards()[kk]).unwrap();
            ensure(polys.iter().zip(truth.data()).all(|(p, &y)| p.eval(w) == y), || {
                format!("instance {inst}: value at shard point {kk} differs")
            })?;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances fit degree max(T+1, d, 3)(K-1) with exact held-out agreement"))
}

fn mq_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let toy = FieldConfig::new(7).unwrap();
    let shape = MqShape::new(2, 1).unwrap();
    let mut signed = 0;
    for _ in 0..5 {
        let (pk, sk) = keygen(toy, shape, &mut rng).map_err(|e| e.to_string())?;
        // all 343 candidate signatures, grouped by the message they sign
        let mut table = vec![Vec::new(); 7];
        for c in 0..343u64 {
            let s = toy.elems(&[c % 7, c / 7 % 7, c / 49]);
            let w = pk.eval(&s).unwrap()[0].value() as usize;
            table[w].push(s);
        }
        for m in 0..7u64 {
            let w = toy.elems(&[m]);
            match sign(&sk, &w, &mut rng) {
                Ok(s) => {
                    ensure(verify_sig(&pk, &s, &w).unwrap(), || format!("toy message {m} failed to verify"))?;
                    ensure(table[m as usize].contains(&s), || format!("toy signature for {m} not a solution"))?;
                    signed += 1;
                }
                Err(Error::SigningFailure { .. }) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    ensure(signed > 0, || "no toy message could be signed".into())?;

    let field = FieldConfig::default();
    let shape = MqShape::new(4, 2).unwrap();
    let e = shape.n_eqs();
    let trials = 1000;
    let keys = (0..20)
        .map(|_| keygen(field, shape, &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut tamper_accepted = 0;
    for t in 0..trials {
        let (pk, sk) = &keys[t % keys.len()];
        let w = field.random_vec(&mut rng, e);
        let s = sign(sk, &w, &mut rng).map_err(|e| e.to_string())?;
        ensure(verify_sig(pk, &s, &w).unwrap(), || format!("round trip {t} failed"))?;
        let mut bad = s.clone();
        let i = rng.gen_range(0..bad.len());
        bad[i] += field.random_nonzero(&mut rng);
        if verify_sig(pk, &bad, &w).unwrap() {
            tamper_accepted += 1;
        }
    }
    let p = e as f64 / field.modulus() as f64;
    let tol = (p * trials as f64 + 3.0 * (trials as f64 * p * (1.0 - p)).sqrt()).floor() as usize;
    ensure(tamper_accepted <= tol, || format!("{tamper_accepted} tampers accepted, tolerance {tol}"))?;
    Ok(format!(
        "toy q=7: {signed} signatures checked against all 343 candidates; 1000 round trips ok; {tamper_accepted} of 1000 tampers accepted (tolerance {tol})"
    ))
}

fn completion_bandwidth() -> Check {
    let field = FieldConfig::default();
    let mut checked = 0;
    for k in [1, 4, 9, 16] {
        for d in [1, 2, 3] {
            for mult in [1, 2, 5, 9] {
                let n = k * mult;
                let cfg = NetConfig::new(n, k, d).map_err(|e| e.to_string())?;
                let points = EvaluationPoints::standard(field, k, n).map_err(|e| e.to_string())?;
                let p = run_propagation(&cfg, &points, &random_block(field, k, (n * 7 + d) as u64))
                    .map_err(|e| e.to_string())?;
                for i in k..n {
                    let got = p.log.received_drops(i);
                    ensure(got == 2 * k, || format!("K={k} N={n} D={d}: node {i} downloaded {got} drops"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} non-leader nodes each downloaded exactly 2K drops (2 strips)"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 security bounds", bounds_reproduction),
        ("2 round counts", round_counts),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 CI rate", ci_rate),
        ("5 decoder radius", decoder_radius),
        ("6 degree ledger", degree_ledger),
        ("7 MQ correctness", mq_correctness),
        ("8 completion bandwidth", completion_bandwidth),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
