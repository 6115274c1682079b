//! Multiprecision evaluation of the partial-fraction sums.
//!
//! The closed forms are alternating sums whose terms exceed the result by
//! tens of orders of magnitude for large antenna counts, so they are
//! evaluated in binary floating point of growing width until two widths
//! agree.

use std::str::FromStr;

use dashu_float::round::mode::HalfAway;
use dashu_float::{DBig, FBig};
use dashu_int::{IBig, UBig};

use crate::{Error, Result};

type Big = FBig<HalfAway, 2>;

/// Working widths in bits; each is checked against the next.
const LADDER: [usize; 5] = [128, 256, 512, 1024, 2048];
const AGREE_REL: f64 = 1e-13;

// 700 digits, enough for the widest rung of the ladder.
const EULER_DIGITS: &str = concat!(
    "0.57721566490153286060651209008240243104215933593992359880576723488486",
    "7726777664670936947063291746749514631447249807082480960504014486542836",
    "2241739976449235362535003337429373377376739427925952582470949160087352",
    "0394816567085323315177661152862119950150798479374508570574002992135478",
    "6146694029604325421519058775535267331399254012967420513754139549111685",
    "1028079842348775872050384310939973613725530608893312676001724795378367",
    "5927135157722610273492913940798430103417771778088154957066107501016191",
    "6633401522789358679654972520362128792265559536696281763887927268013243",
    "1010476505963703947394957638906572967929601009015125195950922243501409",
    "3498712282479497471956469763185066761290638110518241974448678363808617",
    "49",
);

fn big(x: f64, p: usize) -> Big {
    Big::try_from(x)
        .expect("finite input")
        .with_precision(p)
        .value()
}

fn int(n: u64, p: usize) -> Big {
    Big::from(UBig::from(n)).with_precision(p).value()
}

fn ubig(n: &UBig, p: usize) -> Big {
    Big::from(n.clone()).with_precision(p).value()
}

fn to_f64(x: &Big) -> f64 {
    x.to_f64().value()
}

fn is_zero(x: &Big) -> bool {
    *x.repr().significand() == IBig::ZERO
}

/// Upper bound on `log2|x|`.
fn mag2(x: &Big) -> isize {
    if is_zero(x) {
        isize::MIN / 2
    } else {
        x.repr().exponent() + x.repr().digits() as isize
    }
}

fn euler(p: usize) -> Big {
    DBig::from_str(EULER_DIGITS)
        .expect("valid constant")
        .with_base_and_precision::<2>(p)
        .value()
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREE_REL * b.abs().max(a.abs()) || a == b
}

/// Evaluates `f` at successive widths until consecutive results agree.
fn ziv<F: FnMut(usize) -> f64>(what: &'static str, mut f: F) -> Result<f64> {
    let mut prev = f(LADDER[0]);
    for &p in &LADDER[1..] {
        let cur = f(p);
        if cur.is_finite() && agree(prev, cur) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::PrecisionExhausted {
        what,
        bits: LADDER[LADDER.len() - 1],
    })
}

/// Row `n` of Pascal's triangle, exact.
fn binomial_row(n: u32) -> Vec<UBig> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = UBig::ONE;
    row.push(c.clone());
    for k in 0..n {
        c = c * UBig::from(n - k) / UBig::from(k + 1);
        row.push(c.clone());
    }
    row
}

/// `Γ(N)/(Γ(N_FJ)Γ(N_BS))` as an exact integer: `(N-1)·C(N-2, N_FJ-1)`.
fn ratio_normalizer(n_bs: u32, n_fj: u32) -> UBig {
    let n = n_bs + n_fj;
    let row = binomial_row(n - 2);
    UBig::from(n - 1) * row[(n_fj - 1) as usize].clone()
}

/// `D_{N+1-i} = C(N_FJ-1, i-1)·(-r)^(N_FJ-i)` for `i = 1..=N_FJ`, in order of `i`.
fn d_coeffs(n_fj: u32, r: &Big, p: usize) -> Vec<Big> {
    let row = binomial_row(n_fj - 1);
    let neg_r = -r.clone();
    (1..=n_fj)
        .map(|i| ubig(&row[(i - 1) as usize], p) * neg_r.powi(IBig::from(n_fj - i)))
        .collect()
}

/// `E{ln(1 - R)}` restricted to `R < 1`, `R` the gain ratio.
pub(crate) fn i12(n_bs: u32, n_fj: u32, r: f64) -> Result<f64> {
    ziv("I1,2", |p| i12_at(n_bs, n_fj, r, p))
}

fn i12_at(n_bs: u32, n_fj: u32, r: f64, p: usize) -> f64 {
    let n = n_bs + n_fj;
    let rb = big(r, p);
    let one = int(1, p);
    let rho = &one + &rb;
    // J_m = ∫_0^1 ln u (ϱ-u)^(-m) du = -g_{m-1}/(m-1), with
    // g_k = (g_{k-1} + h_k)/ϱ and h_k = ∫_0^1 (ϱ-u)^(-k) du.
    let mut g = Vec::with_capacity(n as usize);
    g.push(Big::ZERO.with_precision(p).value());
    let h1 = (&rho / &rb).ln();
    g.push(&h1 / &rho);
    let (mut r_pow, mut rho_pow) = (one.clone(), one.clone());
    for k in 2..n {
        r_pow = &r_pow / &rb;
        rho_pow = &rho_pow / &rho;
        let hk = (&r_pow - &rho_pow) / int(u64::from(k - 1), p);
        let next = (&g[(k - 1) as usize] + hk) / &rho;
        g.push(next);
    }
    let d = d_coeffs(n_fj, &rb, p);
    let mut sum = Big::ZERO.with_precision(p).value();
    for i in 1..=n_fj {
        let m = n + 1 - i;
        let j = -(&g[(m - 1) as usize]) / int(u64::from(m - 1), p);
        sum += &d[(i - 1) as usize] * j;
    }
    let k = ubig(&ratio_normalizer(n_bs, n_fj), p) * rb.powi(IBig::from(n_bs));
    to_f64(&(k * sum))
}

/// `E{ln(1 + 2R)}` over the full range of `R`.
pub(crate) fn i13(n_bs: u32, n_fj: u32, r: f64) -> Result<f64> {
    ziv("I1,3", |p| i13_at(n_bs, n_fj, r, p))
}

fn i13_at(n_bs: u32, n_fj: u32, r: f64, p: usize) -> f64 {
    let n = n_bs + n_fj;
    let rb = big(r, p);
    let one = int(1, p);
    let two_r = &rb * int(2, p);
    let q = (&two_r - &one) / &two_r;
    let qf = 1.0 - 0.5 / r;
    // W_m = V_{m-1}/(m-1), V_k = r^(-k)·U_k, U_k = ∫_0^1 t^(k-1)/(1-qt) dt.
    // U_k = 1/k + q·U_{k+1} loses nothing going down when |q| < 1;
    // for |q| ≥ 1 the upward direction is the stable one.
    let (k_lo, k_hi) = (n_bs, n - 1);
    let mut u = vec![Big::ZERO; (k_hi - k_lo + 1) as usize];
    if qf.abs() < 1.0 {
        let extra = if qf == 0.0 {
            0
        } else {
            ((p as f64 + 16.0) / -qf.abs().log2()).ceil() as u32
        };
        let top = k_hi + extra;
        let mut acc = Big::ZERO.with_precision(p).value();
        for k in (k_lo..=top).rev() {
            acc = one.clone() / int(u64::from(k), p) + &q * acc;
            if k <= k_hi {
                u[(k - k_lo) as usize] = acc.clone();
            }
        }
    } else {
        let mut acc = -(&one - &q).ln() / &q;
        for k in 1..=k_hi {
            if k >= k_lo {
                u[(k - k_lo) as usize] = acc.clone();
            }
            acc = (acc - one.clone() / int(u64::from(k), p)) / &q;
        }
    }
    let d = d_coeffs(n_fj, &rb, p);
    let mut sum = Big::ZERO.with_precision(p).value();
    for i in 1..=n_fj {
        let m = n + 1 - i;
        let k = m - 1;
        let v = &u[(k - k_lo) as usize] / rb.powi(IBig::from(k));
        sum += &d[(i - 1) as usize] * v / int(u64::from(m - 1), p);
    }
    let k = ubig(&ratio_normalizer(n_bs, n_fj), p) * rb.powi(IBig::from(n_bs));
    to_f64(&(k * sum))
}

/// Coefficients `c_j = K·ϱ^(-N)·A_j·a^(1-j)`, `j = 2..=N`, at one width.
struct I1Coeffs {
    p: usize,
    /// `3a`, the scale between kernel rates and `E_j` arguments
    three_a: Big,
    /// index `j - 2`
    c: Vec<Big>,
    euler: Big,
}

fn i1_coeffs(n_bs: u32, n_fj: u32, r: f64, p: usize) -> I1Coeffs {
    let n = n_bs + n_fj;
    let rb = big(r, p);
    let one = int(1, p);
    let rho = &one + &rb;
    let u0 = &one / &rho;
    let a = &rb / &rho;
    // Taylor coefficients of u^(N_BS-1)(u-1)^(N_FJ-1) about u0, using u0-1 = -a
    let (da, db) = (n_bs - 1, n_fj - 1);
    let row_a = binomial_row(da);
    let row_b = binomial_row(db);
    let left: Vec<Big> = (0..=da)
        .map(|i| ubig(&row_a[i as usize], p) * u0.powi(IBig::from(da - i)))
        .collect();
    let neg_a = -a.clone();
    let right: Vec<Big> = (0..=db)
        .map(|i| ubig(&row_b[i as usize], p) * neg_a.powi(IBig::from(db - i)))
        .collect();
    let k = ubig(&ratio_normalizer(n_bs, n_fj), p) * rb.powi(IBig::from(n_bs))
        / rho.powi(IBig::from(n));
    let mut c = Vec::with_capacity((n - 1) as usize);
    for j in 2..=n {
        let d = n - j;
        let mut t = Big::ZERO.with_precision(p).value();
        for i in d.saturating_sub(db)..=d.min(da) {
            t += &left[i as usize] * &right[(d - i) as usize];
        }
        c.push(&k * t / a.powi(IBig::from(j - 1)));
    }
    I1Coeffs {
        p,
        three_a: a * int(3, p),
        c,
        euler: euler(p),
    }
}

/// `e^x·E_j(x)` for `j = 1..=nmax` (index `j - 1`).
fn scaled_en_table(x: &Big, xf: f64, nmax: u32, euler: &Big, p: usize) -> Vec<Big> {
    let one = int(1, p);
    let mut t = vec![Big::ZERO; nmax as usize];
    if xf < 4.0 {
        // E1 by its power series, then upward (stable since x/j < 1 soon)
        let eps_mag = -(p as isize) - 16;
        let mut term = one.clone();
        let mut sum = Big::ZERO.with_precision(p).value();
        let neg_x = -x.clone();
        let mut k = 1u64;
        loop {
            term = term * &neg_x / int(k, p);
            let add = &term / int(k, p);
            let small = mag2(&add) < eps_mag;
            sum += add;
            if small && k as f64 > xf {
                break;
            }
            k += 1;
        }
        let e1 = -(euler.clone()) - x.ln() - sum;
        t[0] = x.exp() * e1;
        for j in 1..nmax {
            t[j as usize] = (&one - x * &t[(j - 1) as usize]) / int(u64::from(j), p);
        }
    } else {
        let start = (xf.floor() as u32).clamp(1, nmax);
        t[(start - 1) as usize] = scaled_en_cf(x, start, p);
        for j in (1..start).rev() {
            // e_j = (1 - j·e_{j+1})/x
            t[(j - 1) as usize] = (&one - int(u64::from(j), p) * &t[j as usize]) / x;
        }
        for j in start..nmax {
            t[j as usize] = (&one - x * &t[(j - 1) as usize]) / int(u64::from(j), p);
        }
    }
    t
}

/// Continued fraction for `e^x·E_n(x)`, modified Lentz.
fn scaled_en_cf(x: &Big, n: u32, p: usize) -> Big {
    let one = int(1, p);
    let eps_mag = -(p as isize) - 8;
    let mut b = x + int(u64::from(n), p);
    let mut c = Big::from_parts(IBig::ONE, 2 * p as isize)
        .with_precision(p)
        .value();
    let mut d = &one / &b;
    let mut h = d.clone();
    let two = int(2, p);
    for i in 1u64.. {
        let an = -(int(i, p) * int(u64::from(n) - 1 + i, p));
        b += &two;
        d = &one / (&an * &d + &b);
        c = &b + &an / &c;
        let del = &c * &d;
        h = &h * &del;
        if mag2(&(del - &one)) < eps_mag {
            break;
        }
    }
    h
}

/// One node of the inner sum `Σ_{j≥2} c_j·e^x·E_j(x)` with `x = 3a·s/γ̄`.
fn i1_node(co: &I1Coeffs, n: u32, s: f64, gbar: f64) -> f64 {
    let p = co.p;
    let x = &co.three_a * big(s, p) / big(gbar, p);
    let xf = to_f64(&x);
    let e = scaled_en_table(&x, xf, n, &co.euler, p);
    let mut sum = Big::ZERO.with_precision(p).value();
    for (j, cj) in co.c.iter().enumerate() {
        sum += cj * &e[j + 1];
    }
    to_f64(&sum)
}

/// `I1 = Σ_k w_k·e^(-s_k/γ̄)·S_k` for a kernel `e^c·E1(c) ≈ Σ w_k e^(-s_k c)`.
pub(crate) fn i1(n_bs: u32, n_fj: u32, r: f64, gbar: f64, kernel: &[(f64, f64)]) -> Result<f64> {
    let n = n_bs + n_fj;
    let mut cache: Vec<Option<I1Coeffs>> = (0..LADDER.len()).map(|_| None).collect();
    let mut total = 0.0;
    for &(w, s) in kernel {
        let damp = (-s / gbar).exp();
        if damp * w < 1e-40 {
            continue;
        }
        let mut prev = None;
        let mut done = None;
        for (lvl, &p) in LADDER.iter().enumerate() {
            let co = cache[lvl].get_or_insert_with(|| i1_coeffs(n_bs, n_fj, r, p));
            let v = i1_node(co, n, s, gbar);
            if let Some(pv) = prev {
                if v.is_finite() && agree(pv, v) {
                    done = Some(v);
                    break;
                }
            }
            prev = Some(v);
        }
        let v = done.ok_or(Error::PrecisionExhausted {
            what: "I1",
            bits: LADDER[LADDER.len() - 1],
        })?;
        total += w * damp * v;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_constant_matches_f64() {
        assert_eq!(to_f64(&euler(256)), crate::EULER_GAMMA);
    }

    #[test]
    fn binomials_exact() {
        let row = binomial_row(10);
        let v: Vec<u64> = row
            .iter()
            .map(|b| u64::try_from(b.clone()).unwrap())
            .collect();
        assert_eq!(v, vec![1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1]);
        assert_eq!(u64::try_from(ratio_normalizer(3, 2)).unwrap(), 12); // 4!/(1!·2!)
    }

    #[test]
    fn scaled_en_branches_agree() {
        let p = 256;
        let eu = euler(p);
        for &xf in &[0.3, 3.9, 4.0, 7.5, 60.0] {
            let x = big(xf, p);
            let t = scaled_en_table(&x, xf, 40, &eu, p);
            // e^x E1(x) by f64 for reference
            let e1 = crate::special::e1_scaled(xf);
            assert!((to_f64(&t[0]) / e1 - 1.0).abs() < 1e-13, "x={xf}");
            // E_n(x) via ∫_1^∞ e^{-x(t-1)} t^{-n} dt
            for n in [2u32, 10, 40] {
                let q = crate::quad::integrate_to_inf(
                    |t| (-xf * (t - 1.0)).exp() * t.powi(-(n as i32)),
                    1.0,
                    1e-15,
                )
                .unwrap();
                let v = to_f64(&t[(n - 1) as usize]);
                assert!((v / q - 1.0).abs() < 1e-11, "x={xf} n={n}: {v} vs {q}");
            }
        }
        // crossing the switch point changes the algorithm but not the value
        let lo = scaled_en_table(&big(3.999_999_999, p), 3.999_999_999, 30, &eu, p);
        let hi = scaled_en_table(&big(4.0, p), 4.0, 30, &eu, p);
        assert!((to_f64(&lo[29]) / to_f64(&hi[29]) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn taylor_tables_recombine_anywhere() {
        // Σ_j A_j (u-u0)^(N-j) = u^(N_BS-1)(u-1)^(N_FJ-1) exactly, at any u
        let (nb, nf, r) = (64u32, 4u32, 0.3);
        let p = 512;
        let co = i1_coeffs(nb, nf, r, p);
        let one = int(1, p);
        let rb = big(r, p);
        let rho = &one + &rb;
        let a = &rb / &rho;
        let k = ubig(&ratio_normalizer(nb, nf), p) * rb.powi(IBig::from(nb))
            / rho.powi(IBig::from(nb + nf));
        let u0 = &one / &rho;
        for uf in [-2.0, 0.1, 0.5, 0.9, 1.7, 3.0] {
            let u = big(uf, p);
            let v = &u - &u0;
            let n = nb + nf;
            let mut rebuilt = Big::ZERO.with_precision(p).value();
            for (idx, cj) in co.c.iter().enumerate() {
                let j = idx as u32 + 2;
                let aj = cj * a.powi(IBig::from(j - 1)) / &k;
                rebuilt += aj * v.powi(IBig::from(n - j));
            }
            let direct = u.powi(IBig::from(nb - 1)) * (&u - &one).powi(IBig::from(nf - 1));
            let rel = to_f64(&((&rebuilt - &direct) / &direct));
            assert!(rel.abs() < 1e-30, "u={uf}: rel {rel:e}");
        }
    }

    #[test]
    fn ladder_reports_exhaustion() {
        let r = ziv("test", |p| p as f64);
        assert!(matches!(r, Err(Error::PrecisionExhausted { .. })));
        assert_eq!(ziv("test", |_| 2.5).unwrap(), 2.5);
    }
}
