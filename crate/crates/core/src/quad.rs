//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as the independent oracle for every closed form in the crate, so it
//! deliberately shares no code with them.

use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 50_000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    Segment { a, b, value, err }
}

/// `∫_a^b f` to absolute error `tol` (or 1e-15 relative, whichever is looser).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b);
    let (mut total, mut err) = (first.value, first.err);
    heap.push(first);
    while err > tol.max(1e-15 * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { achieved: err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a.min(worst.b) && m < worst.a.max(worst.b)) {
            // cannot split further
            return Err(Error::Quadrature { achieved: err });
        }
        let l = gk15(&mut f, worst.a, m);
        let r = gk15(&mut f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        if !total.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
            });
        }
    }
    // re-add from scratch to shed drift in the running sums
    Ok(heap.iter().map(|s| s.value).sum())
}

/// `∫_a^∞ f` via `x = a + t/(1-t)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Result<f64> {
    integrate(
        |t| {
            let u = 1.0 - t;
            let v = f(a + t / u) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
