//! Small numerical helpers shared across modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `log(2·cosh(x))` without overflow.
#[inline]
pub fn log_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `log(cosh(x))` without overflow.
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    log_2cosh(x) - std::f64::consts::LN_2
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximises `f` on `[lo, hi]`: a uniform scan over `grid_points` nodes
/// followed by golden-section refinement of the best bracket down to `xtol`.
///
/// Returns `(argmax, max)`. Intended for functions that are unimodal on the
/// scale of one grid cell.
pub fn maximize_on_interval<F>(f: F, lo: f64, hi: f64, grid_points: usize, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    assert!(hi >= lo && grid_points >= 2);
    if hi == lo {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let node = |i: usize| if i + 1 == grid_points { hi } else { lo + step * i as f64 };
    let (mut best_i, mut best) = (0, f(lo));
    for i in 1..grid_points {
        let v = f(node(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = node(best_i.saturating_sub(1));
    let mut b = node((best_i + 1).min(grid_points - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc > fd {
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
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    [(node(best_i), best), (c, fc), (d, fd), (mid, fm)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |acc, cand| if cand.1 > acc.1 { cand } else { acc })
}
