//! Exponential integrals, the separable Ei approximation, the real
//! dilogarithm and the partial-fraction coefficient tables used by the
//! closed-form rate expressions.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result, EULER_GAMMA};

// ---------------------------------------------------------------------------
// Exponential integrals

/// `E1(z)` for `z > 0`.
pub fn e1(z: f64) -> f64 {
    if z <= 1.0 {
        e1_series(z)
    } else {
        (-z).exp() * e1_cf_scaled(z)
    }
}

/// `e^z·E1(z)` for `z > 0`, finite for large `z`.
pub fn e1_scaled(z: f64) -> f64 {
    if z <= 1.0 {
        z.exp() * e1_series(z)
    } else {
        e1_cf_scaled(z)
    }
}

fn e1_series(z: f64) -> f64 {
    // E1(z) = -γ - ln z - Σ (-z)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// Modified Lentz evaluation of `e^z·E1(z)`.
fn e1_cf_scaled(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Exponential integral `Ei(x)` for `x < 0`, i.e. `-E1(-x)`.
pub fn ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::DomainError(x));
    }
    Ok(-e1(-x))
}

// ---------------------------------------------------------------------------
// Separable approximation of Ei(-x)

/// Angle grids and derived weights for
/// `Ei(-x) ≈ -4√2·π·a₁a₂ Σ_p Σ_q √b_p·exp(-4 b_p b_q x)`.
///
/// Cell weights are `b_p = (cot θ_{p-1} - cot θ_p) / (2(θ_p - θ_{p-1}))`,
/// the mean of `1/(2 sin²θ)` over the cell. Grids start at `θ_0 = 0`; the
/// first cell then has `b = ∞` and contributes nothing for `x > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EiApproxParams {
    pub t: usize,
    pub t_prime: usize,
    /// `θ_0 ..= θ_{T+1}`
    pub theta_p: Vec<f64>,
    pub theta_q: Vec<f64>,
    /// `b_1 ..= b_{T+1}`; `f64::INFINITY` marks an empty cell.
    pub b_p: Vec<f64>,
    pub b_q: Vec<f64>,
}

impl EiApproxParams {
    /// Uniform grids `θ_p = p·π/(2(T+1))`.
    pub fn new(t: usize, t_prime: usize) -> Result<Self> {
        if t == 0 || t_prime == 0 {
            return Err(Error::InvalidParams("T and T' must be positive".into()));
        }
        let grid = |n: usize| -> Vec<f64> {
            (0..=n + 1)
                .map(|p| p as f64 * FRAC_PI_2 / (n + 1) as f64)
                .collect()
        };
        Self::from_grids(grid(t), grid(t_prime))
    }

    /// Arbitrary strictly increasing grids ending at or below `π/2`.
    pub fn from_grids(theta_p: Vec<f64>, theta_q: Vec<f64>) -> Result<Self> {
        let b_p = cell_weights(&theta_p)?;
        let b_q = cell_weights(&theta_q)?;
        Ok(Self {
            t: theta_p.len() - 2,
            t_prime: theta_q.len() - 2,
            theta_p,
            theta_q,
            b_p,
            b_q,
        })
    }

    pub fn a1(&self) -> f64 {
        1.0 / (2.0 * (self.t + 1) as f64)
    }

    pub fn a2(&self) -> f64 {
        1.0 / (2.0 * (self.t_prime + 1) as f64)
    }

    /// Whether `θ_1 > 0.065` on both grids. Uniform grids satisfy it only
    /// for `T ≤ 23`; finer grids trade it away for accuracy.
    pub fn first_node_above_min(&self) -> bool {
        self.theta_p[1] > 0.065 && self.theta_q[1] > 0.065
    }

    /// Finite `(√b_p, b_p, b_q)` triples of the double sum.
    pub fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.b_p
            .iter()
            .filter(|b| b.is_finite())
            .flat_map(move |&bp| {
                self.b_q
                    .iter()
                    .filter(|b| b.is_finite())
                    .map(move |&bq| (bp.sqrt(), bp, bq))
            })
    }

    pub fn prefactor(&self) -> f64 {
        4.0 * 2f64.sqrt() * PI * self.a1() * self.a2()
    }
}

fn cell_weights(theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() < 3 {
        return Err(Error::InvalidParams(
            "grid needs at least three nodes".into(),
        ));
    }
    if theta[0] < 0.0 || *theta.last().unwrap() > FRAC_PI_2 + 1e-12 {
        return Err(Error::InvalidParams("grid must lie in [0, π/2]".into()));
    }
    if theta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams(
            "grid must be strictly increasing".into(),
        ));
    }
    let cot = |t: f64| {
        if t == 0.0 {
            f64::INFINITY
        } else {
            t.cos() / t.sin()
        }
    };
    Ok(theta
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                f64::INFINITY
            } else {
                (cot(w[0]) - cot(w[1])) / (2.0 * (w[1] - w[0]))
            }
        })
        .collect())
}

/// Approximates `Ei(-x)` for `x > 0`.
pub fn ei_approx(x: f64, params: &EiApproxParams) -> f64 {
    let sum: f64 = params
        .terms()
        .map(|(sb, bp, bq)| sb * (-4.0 * bp * bq * x).exp())
        .sum();
    -params.prefactor() * sum
}

/// Largest `|ei_approx/Ei - 1|` over `n` log-spaced points of `[lo, hi]`.
pub fn ei_approx_max_rel_error(params: &EiApproxParams, lo: f64, hi: f64, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let x = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
            let exact = -e1(x);
            (ei_approx(x, params) / exact - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Dilogarithm

/// Constants driving [`dilog`]; exposed so validation can inject faults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilogTable {
    pub pi2_over_6: f64,
    /// `B_n/(n+1)!` for `n = 0, 1, 2, 4, 6, …`
    pub bernoulli: [f64; 20],
}

impl DilogTable {
    pub const STANDARD: DilogTable = DilogTable {
        pi2_over_6: PI * PI / 6.0,
        bernoulli: [
            1.0,
            -0.25,
            2.777_777_777_777_777_8e-2,
            -2.777_777_777_777_777_8e-4,
            4.724_111_866_969_009_8e-6,
            -9.185_773_074_661_963_6e-8,
            1.897_886_998_897_100_0e-9,
            -4.064_761_645_144_225_5e-11,
            8.921_691_020_456_452_6e-13,
            -1.993_929_586_072_107_6e-14,
            4.518_980_029_619_918_2e-16,
            -1.035_651_761_218_124_7e-17,
            2.395_218_621_026_186_7e-19,
            -5.581_785_874_325_009_3e-21,
            1.309_150_755_418_321_3e-22,
            -3.087_419_802_426_740_3e-24,
            7.315_975_652_702_203_4e-26,
            -1.740_845_657_234_000_7e-27,
            4.157_635_644_613_899_7e-29,
            -9.962_148_488_284_622_1e-31,
        ],
    };

    /// `Li₂(x)` for real `x`; the real part of the continuation above 1.
    pub fn eval(&self, x: f64) -> f64 {
        let ln2 = |y: f64| y.ln().powi(2);
        if x == 1.0 {
            self.pi2_over_6
        } else if x > 1.0 {
            2.0 * self.pi2_over_6 - 0.5 * ln2(x) - self.eval(1.0 / x)
        } else if x > 0.5 {
            self.pi2_over_6 - x.ln() * (-x).ln_1p() - self.core(1.0 - x)
        } else if x >= -1.0 {
            self.core(x)
        } else {
            -self.pi2_over_6 - 0.5 * ln2(-x) - self.core(1.0 / x)
        }
    }

    /// Bernoulli series in `u = -ln(1-x)`, for `x ∈ [-1, 1/2]`.
    fn core(&self, x: f64) -> f64 {
        let u = -(-x).ln_1p();
        let u2 = u * u;
        let c = &self.bernoulli;
        // c[0]·u + c[1]·u² + Σ c[k]·u^{2k-1}, k ≥ 2
        let mut odd = 0.0;
        for k in (2..c.len()).rev() {
            odd = odd * u2 + c[k];
        }
        c[0] * u + c[1] * u2 + odd * u2 * u
    }
}

pub fn dilog(x: f64) -> f64 {
    DilogTable::STANDARD.eval(x)
}

// ---------------------------------------------------------------------------
// Partial-fraction coefficients

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffKind {
    A,
    B,
    C,
    D,
}

/// One coefficient table. `values[k-1]` holds the coefficient with index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionCoeffs {
    pub kind: CoeffKind,
    pub values: Vec<f64>,
    pub n_bs: u32,
    pub n_fj: u32,
    pub varrho: f64,
}

impl PartialFractionCoeffs {
    /// Coefficient with one-based index `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }
}

fn ln_binom(n: u32, k: u32) -> f64 {
    ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(k) + 1.0) - ln_gamma(f64::from(n - k) + 1.0)
}

/// `sign·exp(ln_mag)` with `ln|base^e|` folded in; avoids overflow for
/// large antenna counts.
fn signed_power_term(ln_binom: f64, base: f64, e: u32) -> f64 {
    if e == 0 {
        return ln_binom.exp();
    }
    if base == 0.0 {
        return 0.0;
    }
    let sign = if base < 0.0 && e % 2 == 1 { -1.0 } else { 1.0 };
    sign * (ln_binom + f64::from(e) * base.abs().ln()).exp()
}

fn check_shape(n_bs: u32, n_fj: u32, varrho: f64) -> Result<()> {
    if n_bs < 1 || n_fj < 1 {
        return Err(Error::InvalidParams("need n_bs >= 1 and n_fj >= 1".into()));
    }
    if !(varrho > 1.0) {
        return Err(Error::InvalidParams(format!(
            "varrho must exceed 1, got {varrho}"
        )));
    }
    Ok(())
}

/// Taylor coefficients of `u^(N_BS-1)(u-1)^(N_FJ-1)` about `u = 1/ϱ`:
/// `A_{N+1-i} = P^{(i-1)}(1/ϱ)/(i-1)!`, `N = N_BS + N_FJ`.
pub fn coeffs_a(n_bs: u32, n_fj: u32, varrho: f64) -> Result<PartialFractionCoeffs> {
    check_shape(n_bs, n_fj, varrho)?;
    let n = (n_bs + n_fj) as usize;
    let u0 = 1.0 / varrho;
    let (da, db) = (n_bs - 1, n_fj - 1);
    // t_d = Σ_{a+b=d} C(da,a) u0^(da-a) · C(db,b) (u0-1)^(db-b)
    let mut values = vec![0.0; n];
    for d in 0..=(da + db) {
        let mut t = 0.0;
        for a in d.saturating_sub(db)..=d.min(da) {
            let b = d - a;
            let left = signed_power_term(ln_binom(da, a), u0, da - a);
            let right = signed_power_term(ln_binom(db, b), u0 - 1.0, db - b);
            t += left * right;
        }
        // A_{N-d} = t_d
        values[n - d as usize - 1] = t;
    }
    Ok(PartialFractionCoeffs {
        kind: CoeffKind::A,
        values,
        n_bs,
        n_fj,
        varrho,
    })
}

/// Falling-factorial coefficient tables `B`, `C`, `D`:
///
/// * `B_{N+1-i} = (N_FJ-1)…(N_FJ+1-i)/(i-1)! · (ϱ-1)^(N_FJ-i)`
/// * `D_{N+1-i}` is the same with `(1-ϱ)`
/// * `C_ℓ = (-1)^(ℓ-1) ϱ^(-ℓ)/(ℓ-1)!`, `ℓ = 1..=N`
pub fn coeffs_bcd(
    kind: CoeffKind,
    n_bs: u32,
    n_fj: u32,
    varrho: f64,
) -> Result<PartialFractionCoeffs> {
    check_shape(n_bs, n_fj, varrho)?;
    let n = (n_bs + n_fj) as usize;
    let mut values = vec![0.0; n];
    match kind {
        CoeffKind::B | CoeffKind::D => {
            let base = if kind == CoeffKind::B {
                varrho - 1.0
            } else {
                1.0 - varrho
            };
            for i in 1..=n_fj {
                values[n - i as usize] =
                    signed_power_term(ln_binom(n_fj - 1, i - 1), base, n_fj - i);
            }
        }
        CoeffKind::C => {
            for l in 1..=n {
                let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                values[l - 1] = sign * (-(l as f64) * varrho.ln() - ln_gamma(l as f64)).exp();
            }
        }
        CoeffKind::A => return coeffs_a(n_bs, n_fj, varrho),
    }
    Ok(PartialFractionCoeffs {
        kind,
        values,
        n_bs,
        n_fj,
        varrho,
    })
}
