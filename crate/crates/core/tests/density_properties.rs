use std::sync::Arc;

use psi_core::intervals::{Accelerated, Geometric, LogGeometric};
use psi_core::{density_ratio, estimate_density, Domain, GeneratedSet, IntervalSet, PsiScale, ScaleKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, d: Domain, cutoff: f64) -> IntervalSet {
    let ratio = rng.gen_range(2.0..8.0);
    let rule = LogGeometric {
        first: rng.gen_range(1.0..3.0),
        ratio,
        fill: rng.gen_range(1.05..ratio - 0.05),
    };
    GeneratedSet::new(d, Arc::new(rule)).materialize(cutoff).unwrap()
}

fn scales(d: Domain) -> Vec<PsiScale> {
    [ScaleKind::Linear, ScaleKind::Log, ScaleKind::PowLog(2.0)]
        .into_iter()
        .map(|k| PsiScale::new(k, d).unwrap())
        .collect()
}

#[test]
fn ratio_is_monotone_between_endpoints() {
    let d = Domain::log_infinite(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cutoff = 500.0;
    for _ in 0..20 {
        let set = random_set(&mut rng, d, cutoff);
        for s in scales(d) {
            let mut pieces: Vec<(f64, f64, bool)> = Vec::new();
            let mut cursor = d.start();
            for sp in set.spans() {
                if sp.lo > cursor {
                    pieces.push((cursor, sp.lo, false));
                }
                pieces.push((sp.lo, sp.hi, true));
                cursor = sp.hi;
            }
            for (a, b, inside) in pieces {
                let a = a.max(1e-6);
                let vals: Vec<f64> = (0..10)
                    .map(|i| density_ratio(&set, &s, a + (b - a) * (i as f64 + 0.5) / 10.0).unwrap())
                    .collect();
                for w in vals.windows(2) {
                    if inside {
                        assert!(w[1] >= w[0] - 1e-12, "{} inside [{a}, {b}): {vals:?}", s.name());
                    } else {
                        assert!(w[1] <= w[0] + 1e-12, "{} gap [{a}, {b}): {vals:?}", s.name());
                    }
                }
            }
        }
    }
}

#[test]
fn complement_identity_on_random_sets() {
    let d = Domain::log_infinite(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cutoff = 1e6;
    let all = scales(d);
    for i in 0..100 {
        let set = random_set(&mut rng, d, cutoff);
        let s = &all[i % all.len()];
        let e = estimate_density(&set, s, cutoff, 8).unwrap();
        let c = estimate_density(&set.complement(), s, cutoff, 8).unwrap();
        assert!((c.upper + e.lower - 1.0).abs() < 2e-2, "{}: {} + {}", s.name(), c.upper, e.lower);
        assert!(0.0 <= e.lower && e.lower <= e.upper && e.upper <= 1.0);
    }
}

#[test]
fn estimates_are_cutoff_stable() {
    let lin = Domain::linear_infinite(1.0).unwrap();
    let cutoff = 2f64.powi(81);
    let geo = GeneratedSet::new(lin, Arc::new(Geometric { base: 2.0 }));
    let wide = geo.materialize(cutoff * cutoff).unwrap();
    for kind in [ScaleKind::Log, ScaleKind::Linear] {
        let s = PsiScale::new(kind, lin).unwrap();
        let a = estimate_density(&wide, &s, cutoff, 8).unwrap();
        for bigger in [2.0 * cutoff, cutoff * cutoff] {
            let b = estimate_density(&wide, &s, bigger, 8).unwrap();
            assert!((a.upper - b.upper).abs() < 5e-3 && (a.lower - b.lower).abs() < 5e-3, "{a:?} {b:?}");
        }
    }

    let logd = Domain::log_infinite(1.0).unwrap();
    let cutoff = 4f64.powi(9);
    let accel = GeneratedSet::new(logd, Arc::new(Accelerated { q: 4.0 }))
        .materialize(4.0 * cutoff)
        .unwrap();
    let s = PsiScale::new(ScaleKind::Log, logd).unwrap();
    let a = estimate_density(&accel, &s, cutoff, 8).unwrap();
    for bigger in [cutoff + 2f64.ln(), 2.0 * cutoff] {
        let b = estimate_density(&accel, &s, bigger, 8).unwrap();
        assert!((a.upper - b.upper).abs() < 5e-3 && (a.lower - b.lower).abs() < 5e-3, "{a:?} {b:?}");
    }
}
