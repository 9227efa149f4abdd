//! Sharded filling followed by an in-order merge must reproduce a sequential
//! fill: counts exactly, weighted sums to close to machine precision, and
//! the merge itself bit-for-bit when repeated.

mod util;

use hbook::{Cell, ColType, Hist1D, Hist2D, NTuple};
use proptest::prelude::*;
use util::TestRng;

const N_SHARDS: usize = 8;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn sharded_fill_matches_sequential() {
    let mut rng = TestRng::new(0x3a4d);
    let samples: Vec<(f64, f64)> = (0..20_000)
        .map(|_| (rng.range(-1.0, 11.0), rng.range(0.1, 1.5)))
        .collect();

    let mut seq = Hist1D::new(64, 0.0, 10.0);
    for &(x, w) in &samples {
        seq.fill_w(x, w);
    }

    let mut shards: Vec<Hist1D> = (0..N_SHARDS).map(|_| Hist1D::new(64, 0.0, 10.0)).collect();
    for (i, &(x, w)) in samples.iter().enumerate() {
        shards[i % N_SHARDS].fill_w(x, w);
    }
    let mut merged = Hist1D::new(64, 0.0, 10.0);
    for shard in &shards {
        merged.merge_from(shard).unwrap();
    }

    assert_eq!(merged.entries(), seq.entries());
    for (m, s) in merged.slots().iter().zip(seq.slots()) {
        assert_eq!(m.entries, s.entries);
        assert!(rel(m.sum_w, s.sum_w) < 1e-12);
        assert!(rel(m.sum_w2, s.sum_w2) < 1e-12);
        assert!(rel(m.sum_wx, s.sum_wx) < 1e-12);
        assert!(rel(m.sum_wx2, s.sum_wx2) < 1e-12);
    }

    // Same shards, same order: the merge must be bit-for-bit repeatable.
    let mut again = Hist1D::new(64, 0.0, 10.0);
    for shard in &shards {
        again.merge_from(shard).unwrap();
    }
    for (a, b) in again.slots().iter().zip(merged.slots()) {
        assert_eq!(a.sum_w.to_bits(), b.sum_w.to_bits());
        assert_eq!(a.sum_wx.to_bits(), b.sum_wx.to_bits());
        assert_eq!(a.sum_wx2.to_bits(), b.sum_wx2.to_bits());
        assert_eq!(a.sum_w2.to_bits(), b.sum_w2.to_bits());
    }
}

#[test]
fn ntuple_merge_keeps_event_order() {
    let schema = vec![("v".to_string(), ColType::I64)];
    let mut a = NTuple::new(schema.clone());
    let mut b = NTuple::new(schema);
    a.append(0, vec![Cell::I64(0)]).unwrap();
    a.append(2, vec![Cell::I64(2)]).unwrap();
    b.append(1, vec![Cell::I64(1)]).unwrap();
    b.append(3, vec![Cell::I64(3)]).unwrap();
    a.merge_from(&b).unwrap();
    let events: Vec<u64> = a.rows().iter().map(|(e, _)| *e).collect();
    assert_eq!(events, [0, 1, 2, 3]);
}

fn x_values() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -5.0f64..15.0,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

proptest! {
    // Every fill lands somewhere: in range, a margin, or the NaN tally.
    #[test]
    fn h1_entry_conservation(xs in prop::collection::vec(x_values(), 0..400)) {
        let mut h = Hist1D::new(10, 0.0, 10.0);
        for &x in &xs {
            h.fill(x);
        }
        prop_assert_eq!(h.entries(), xs.len() as u64);
        let nan_count = xs.iter().filter(|x| x.is_nan()).count() as u64;
        prop_assert_eq!(h.nan_entries(), nan_count);
    }

    #[test]
    fn h2_entry_conservation(
        pts in prop::collection::vec((x_values(), x_values()), 0..400)
    ) {
        let mut h = Hist2D::new(5, 0.0, 10.0, 4, -2.0, 2.0);
        for &(x, y) in &pts {
            h.fill(x, y);
        }
        prop_assert_eq!(h.entries(), pts.len() as u64);
    }

    // Merging conserves entry counts exactly, split point irrelevant.
    #[test]
    fn merge_conserves_entries(
        xs in prop::collection::vec(-5.0f64..15.0, 1..400),
        split in 0usize..400,
    ) {
        let split = split.min(xs.len());
        let mut a = Hist1D::new(16, 0.0, 10.0);
        let mut b = Hist1D::new(16, 0.0, 10.0);
        for &x in &xs[..split] {
            a.fill(x);
        }
        for &x in &xs[split..] {
            b.fill(x);
        }
        let total_a = a.entries();
        a.merge_from(&b).unwrap();
        prop_assert_eq!(a.entries(), total_a + b.entries());
        prop_assert_eq!(a.entries(), xs.len() as u64);
    }
}
