//! Small numeric helpers shared by the estimators.

/// `log(e^a + e^b)` without overflow.
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if !(b - a > f64::EPSILON * a.abs().max(b.abs()).max(1.0)) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Local extrema of `value` sampled on the increasing `grid`, each refined
/// by golden-section search over the two neighbouring cells.
pub fn sampled_extrema(value: &dyn Fn(f64) -> f64, grid: &[f64]) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = grid.iter().map(|&x| value(x)).collect();
    let mut out = Vec::new();
    let mut last_dir = 0i8;
    let mut turn_from = 0usize;
    for i in 1..grid.len() {
        let dv = vals[i] - vals[i - 1];
        let dir = if dv > 0.0 {
            1
        } else if dv < 0.0 {
            -1
        } else {
            0
        };
        if dir == 0 || dv.is_nan() {
            continue;
        }
        if last_dir != 0 && dir != last_dir {
            let (lo, hi) = (grid[turn_from.saturating_sub(1)], grid[i]);
            // Refinement can miss a spike narrower than a cell; keep the
            // sampled extreme when it is better.
            let (xd, vd) = (grid[i - 1], vals[i - 1]);
            let (x, v) = if last_dir > 0 {
                let (x, v) = golden_max(value, lo, hi, 200);
                if v >= vd { (x, v) } else { (xd, vd) }
            } else {
                let (x, v) = golden_max(|x| -value(x), lo, hi, 200);
                if -v <= vd { (x, -v) } else { (xd, vd) }
            };
            out.push((x, v));
        }
        last_dir = dir;
        turn_from = i;
    }
    out
}
