use codedshard::ledger::{
    make_invalid_transaction, make_transaction, InvalidKind, SchemeParams, Shard, Strip, StripShape, TxScheme, UtxoRef,
    Wallet,
};
use codedshard::sim::{security_bounds, threshold_approx, threshold_exact};
use codedshard::verifier::verify_strip;
use codedshard::{FieldConfig, FieldElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scheme(q: u64) -> TxScheme {
    TxScheme::new(
        FieldConfig::new(q).unwrap(),
        SchemeParams {
            t_max: 3,
            ..SchemeParams::default()
        },
    )
    .unwrap()
}

// A one-strip shard whose entry 1 pays `w`.
fn shard_paying(scheme: &TxScheme, w: &Wallet) -> Shard {
    let layout = scheme.layout();
    let shape = StripShape {
        shards: 1,
        slots: 2,
        tx_len: layout.r_len(),
    };
    let r = layout.r_len();
    let mut data = scheme.field().zeros(shape.strip_len());
    data[r + layout.a_range().start..r + layout.a_range().end].copy_from_slice(w.address());
    let mut shard = Shard::new(r, 3);
    shard.append(&Strip::from_flat(shape, data).unwrap()).unwrap();
    shard
}

fn single_tx_strip(scheme: &TxScheme, txs: &[Vec<FieldElement>]) -> Strip {
    let shape = StripShape {
        shards: txs.len(),
        slots: 1,
        tx_len: scheme.layout().r_len(),
    };
    Strip::from_flat(shape, txs.concat()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wallets_make_valid_transactions(seed in any::<u64>(), kind in 0usize..3) {
        let sc = scheme(2_147_483_647);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Wallet::generate(&sc, 0, &mut rng).unwrap();
        let shard = shard_paying(&sc, &w);
        let utxo = UtxoRef { shard: 0, index: 1 };
        let dest = sc.field().random_vec(&mut rng, 2);
        let good = make_transaction(&sc, &w, utxo, &shard, &dest, &mut rng).unwrap();
        let kind = [InvalidKind::BadSignature, InvalidKind::WrongAddress, InvalidKind::Garbage][kind];
        let bad = make_invalid_transaction(&sc, kind, &w, utxo, &shard, &dest, &mut rng).unwrap();
        let strip = single_tx_strip(&sc, &[good.flat().to_vec(), bad.flat().to_vec()]);
        let res = verify_strip(&sc, &strip, &shard).unwrap();
        prop_assert!(res.column(0).iter().all(FieldElement::is_zero));
        prop_assert!(!res.column(1).iter().all(FieldElement::is_zero));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Breaking one transaction only changes its own result column.
    #[test]
    fn per_column_locality(seed in any::<u64>(), j in 0usize..3) {
        let sc = scheme(97);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Wallet::generate(&sc, 0, &mut rng).unwrap();
        let shard = shard_paying(&sc, &w);
        let utxo = UtxoRef { shard: 0, index: 1 };
        let txs: Vec<Vec<FieldElement>> = (0..3)
            .map(|_| {
                let dest = sc.field().random_vec(&mut rng, 2);
                make_transaction(&sc, &w, utxo, &shard, &dest, &mut rng).unwrap().into_flat()
            })
            .collect();
        let before = verify_strip(&sc, &single_tx_strip(&sc, &txs), &shard).unwrap();
        let mut broken = txs.clone();
        let last = broken[j].len() - 1;
        broken[j][last] += sc.field().one();
        let after = verify_strip(&sc, &single_tx_strip(&sc, &broken), &shard).unwrap();
        for c in 0..3 {
            if c != j {
                prop_assert_eq!(before.column(c), after.column(c));
            }
        }
        prop_assert_ne!(before.column(j), after.column(j));
    }

    #[test]
    fn strip_size_ignores_nodes_and_epoch(k in 1usize..6, q in 1usize..4, r in 1usize..20, t in 0usize..6) {
        let shape = StripShape { shards: k, slots: q, tx_len: r };
        prop_assert_eq!(shape.strip_len(), k * q * r);
        // a shard that grew for t epochs still takes strips of the same size
        let f = FieldConfig::new(97).unwrap();
        let mut shard = Shard::new(r, 8);
        for _ in 0..t {
            let s = Strip::zeros(f, shape);
            prop_assert_eq!(s.data().len(), k * q * r);
            shard.append(&s).unwrap();
        }
        prop_assert_eq!(shard.len(), k * q * t);
    }
}

#[test]
fn exact_and_approx_bounds_agree_for_large_networks() {
    // Their gap is (K - log2 M) / N, so agreement within 0.01 needs
    // |K - log2 M| <= N / 100.
    for n in [10_000u64, 100_000] {
        for k in [64u64, 96, 128] {
            for l in [20.0, 30.0, 40.0, 60.0] {
                let b = security_bounds(n, k, l, 1.0);
                let close = (k as f64 - l).abs() <= n as f64 / 100.0;
                assert_eq!((b.threshold_exact - b.threshold_approx).abs() <= 0.01, close);
                assert_eq!((b.beta_max_exact - b.beta_max_approx).abs() <= 0.005, close);
            }
        }
    }
    // e.g. N = 10^4, K = 64, M = 2^20 agrees; K = 1000 is far off
    assert!((threshold_exact(10_000, 64, 20.0) - threshold_approx(10_000, 64, 20.0)).abs() < 0.005);
    let gap = threshold_exact(10_000, 1_000, 20.0) - threshold_approx(10_000, 1_000, 20.0);
    assert!(gap > 0.09);
}
