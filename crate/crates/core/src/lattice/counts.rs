use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LatticeError;
use crate::decomposition::ScaleRow;

/// Largest number of candidate vectors any single enumeration may visit.
pub const DEFAULT_BUDGET: f64 = 1e8;

/// Tube constant `C(α) = 2(1 + Σ_j |α_j|)`.
pub fn tube_constant(alpha: &[f64]) -> f64 {
    2.0 * (1.0 + alpha.iter().map(|a| a.abs()).sum::<f64>())
}

/// `N♭(u, v)` split by the `t₁ = 0` stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatCount {
    pub total: u64,
    pub t1_zero: u64,
}

/// The frequency-side data of one flat count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatQuery {
    pub n: u64,
    /// Normal direction with `α₁ = 1`.
    pub alpha: Vec<f64>,
    /// Transverse thickness; `0` drops the length constraint along `α`.
    pub eta: f64,
    pub d: Vec<f64>,
    pub u: u32,
    pub v: u32,
    pub tube_c: f64,
}

impl FlatQuery {
    pub fn new(n: u64, alpha: Vec<f64>, eta: f64, d: Vec<f64>, u: u32, v: u32) -> Result<Self, LatticeError> {
        if alpha.len() != d.len() || alpha.is_empty() {
            return Err(LatticeError::InvalidInput("α and d must have equal, non-zero length".into()));
        }
        if alpha[0] != 1.0 {
            return Err(LatticeError::InvalidInput("α must be normalized with α₁ = 1".into()));
        }
        let tube_c = tube_constant(&alpha);
        Ok(Self {
            n,
            alpha,
            eta,
            d,
            u,
            v,
            tube_c,
        })
    }

    fn half_box(&self) -> Vec<i64> {
        let scale = 2f64.powi(self.u as i32) / self.n as f64;
        self.d.iter().map(|d| (scale / d).floor() as i64).collect()
    }

    fn in_tube(&self, t: &[i64]) -> bool {
        let n = self.n as f64;
        let width = self.tube_c * 2f64.powi(self.v as i32);
        let x1 = n * t[0] as f64;
        for j in 1..t.len() {
            if (n * t[j] as f64 - self.alpha[j] * x1).abs() > width {
                return false;
            }
        }
        if self.eta > 0.0 {
            let norm = self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            let along: f64 = t.iter().zip(&self.alpha).map(|(&a, b)| n * a as f64 * b).sum::<f64>() / norm;
            if along.abs() > width / self.eta {
                return false;
            }
        }
        true
    }
}

fn box_volume(half: &[i64]) -> f64 {
    half.iter().map(|h| (2 * h + 1) as f64).product()
}

/// `N♭(u,v) = #{0 ≠ ξ ∈ 2^u ℛ_n^∨ ∩ 2^v ℛ^∨ : n | ξ}` with `ξ = n t`.
///
/// `t₁` runs over its box; the remaining coordinates are restricted to the
/// window of the tube around `t₁ α_j` before the final membership test.
pub fn count_flat(q: &FlatQuery, budget: f64) -> Result<FlatCount, LatticeError> {
    let half = q.half_box();
    let k = half.len();
    let n = q.n as f64;
    let width = q.tube_c * 2f64.powi(q.v as i32);
    // Candidates per t₁: each window has about 2·width/n + 1 integers.
    let per = (1..k)
        .map(|j| ((2.0 * width / n).floor() + 1.0).min((2 * half[j] + 1) as f64))
        .product::<f64>();
    let needed = (2 * half[0] + 1) as f64 * per;
    if needed > budget {
        return Err(LatticeError::BudgetExceeded { needed, budget });
    }
    let results: Vec<FlatCount> = (-half[0]..=half[0])
        .into_par_iter()
        .map(|t1| {
            let x1 = n * t1 as f64;
            let ranges: Vec<(i64, i64)> = (1..k)
                .map(|j| {
                    let c = q.alpha[j] * x1;
                    let lo = ((c - width) / n).ceil() as i64 - 1;
                    let hi = ((c + width) / n).floor() as i64 + 1;
                    (lo.max(-half[j]), hi.min(half[j]))
                })
                .collect();
            let mut total = 0;
            let mut t = vec![0i64; k];
            t[0] = t1;
            walk(&ranges, 1, &mut t, &mut |t| {
                if t.iter().all(|&v| v == 0) || !q.in_tube(t) {
                    return;
                }
                total += 1;
            });
            FlatCount {
                total,
                t1_zero: if t1 == 0 { total } else { 0 },
            }
        })
        .collect();
    Ok(results.iter().fold(FlatCount { total: 0, t1_zero: 0 }, |a, b| FlatCount {
        total: a.total + b.total,
        t1_zero: a.t1_zero + b.t1_zero,
    }))
}

/// The same count by a plain sweep of the full box, last coordinate outermost.
pub fn count_flat_by_box(q: &FlatQuery, budget: f64) -> Result<FlatCount, LatticeError> {
    let half = q.half_box();
    let k = half.len();
    let needed = box_volume(&half);
    if needed > budget {
        return Err(LatticeError::BudgetExceeded { needed, budget });
    }
    let mut out = FlatCount { total: 0, t1_zero: 0 };
    let mut t = vec![0i64; k];
    let ranges: Vec<(i64, i64)> = half.iter().rev().map(|&h| (-h, h)).collect();
    let mut rev = vec![0i64; k];
    walk(&ranges, 0, &mut rev, &mut |r| {
        for j in 0..k {
            t[j] = r[k - 1 - j];
        }
        if t.iter().all(|&v| v == 0) || !q.in_tube(&t) {
            return;
        }
        out.total += 1;
        if t[0] == 0 {
            out.t1_zero += 1;
        }
    });
    Ok(out)
}

/// Visits every integer vector with `t[j] ∈ ranges[j − from]` for `j ≥ from`.
fn walk<F: FnMut(&[i64])>(ranges: &[(i64, i64)], from: usize, t: &mut Vec<i64>, f: &mut F) {
    let k = t.len();
    if from == k {
        f(t);
        return;
    }
    let (lo, hi) = ranges[from - (k - ranges.len())];
    for v in lo..=hi {
        t[from] = v;
        walk(ranges, from + 1, t, f);
    }
}

/// Tube `|x_j − α_j x₁| ≤ C 2^v` replacing the box `|x_j| ≤ 2^v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub alpha: Vec<f64>,
    pub c: f64,
}

impl Tube {
    pub fn new(alpha: Vec<f64>) -> Self {
        let c = tube_constant(&alpha);
        Self { alpha, c }
    }
}

/// The parameters of `N(m, m′, u, u′, v; i, i′)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountParams {
    pub k: usize,
    pub tau: f64,
    pub m: u32,
    pub m2: u32,
    pub u: u32,
    pub u2: u32,
    pub v: u32,
    pub row: ScaleRow,
    pub row2: ScaleRow,
    pub tube: Option<Tube>,
}

impl CountParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        tau: f64,
        (m, m2): (u32, u32),
        (u, u2, v): (u32, u32, u32),
        row: ScaleRow,
        row2: ScaleRow,
        tube: Option<Tube>,
    ) -> Result<Self, LatticeError> {
        if m == 0 || m2 == 0 || u == 0 || u2 == 0 || v == 0 {
            return Err(LatticeError::InvalidInput("dyadic indices must be at least 1".into()));
        }
        if row.d.len() != k || row2.d.len() != k {
            return Err(LatticeError::InvalidInput("scale rows must have k entries".into()));
        }
        if let Some(t) = &tube {
            if t.alpha.len() != k {
                return Err(LatticeError::InvalidInput("tube direction must have k entries".into()));
            }
        }
        Ok(Self {
            k,
            tau,
            m,
            m2,
            u,
            u2,
            v,
            row,
            row2,
            tube,
        })
    }

    /// `r_j = 2^{u+2−m}/d_{i,j,m} + 1`.
    pub fn r(&self) -> Vec<f64> {
        self.row
            .d
            .iter()
            .map(|d| 2f64.powi(self.u as i32 + 2 - self.m as i32) / d + 1.0)
            .collect()
    }

    /// `r′_j = 2^{u′+2−m′}/d_{i′,j,m′} + 1`.
    pub fn r2(&self) -> Vec<f64> {
        self.row2
            .d
            .iter()
            .map(|d| 2f64.powi(self.u2 as i32 + 2 - self.m2 as i32) / d + 1.0)
            .collect()
    }

    /// `f(m, m′) = 2^{−k(m+m′)} / (∏_j d_{i,j} ∏_j d_{i′,j})`.
    pub fn f(&self) -> f64 {
        let k = self.k as i32;
        2f64.powi(-k * (self.m + self.m2) as i32) / (self.row.product() * self.row2.product())
    }

    /// Divisor-bound envelope for `N₂` with `n^ε` realized as `(log)^k`:
    /// `(log 2^{m+m′+u+u′})^k · 2^{k(u+u′) + 2v − (1−kτ)(m+m′)/(2k)} f(m,m′)`.
    pub fn n2_envelope(&self) -> f64 {
        let k = self.k as f64;
        let s = (self.m + self.m2 + self.u + self.u2) as f64;
        let log = (s * std::f64::consts::LN_2).powf(k);
        let mm = (self.m + self.m2) as f64;
        let e = k * (self.u + self.u2) as f64 + 2.0 * self.v as f64 - (1.0 - k * self.tau) * mm / (2.0 * k);
        log * 2f64.powf(e) * self.f()
    }

    /// Envelope of the flat `N₂` for `k ≥ 3` with `ω*(α₂, α₃)` supplied:
    /// `2^{(k−1)v} max(r_i r′_j)^{ω*} r₁r′₁r₂r′₂r₃r′₃ · max(r, r′) · min(r₄, r′₄) · ∏_{j≥5} √(r_j r′_j)`,
    /// times the same logarithmic factor as [`Self::n2_envelope`].
    pub fn flat_n2_envelope(&self, omega_star: f64) -> f64 {
        let r = self.r();
        let r2 = self.r2();
        let k = self.k;
        let top = r.iter().take(3).fold(0.0f64, |a, &x| a.max(x))
            * r2.iter().take(3).fold(0.0f64, |a, &x| a.max(x));
        let mut env = 2f64.powi(((k - 1) as u32 * self.v) as i32) * top.powf(omega_star);
        env *= (0..3.min(k)).map(|j| r[j] * r2[j]).product::<f64>();
        env *= r.iter().chain(&r2).fold(0.0f64, |a, &x| a.max(x));
        if k >= 4 {
            env *= r[3].min(r2[3]);
        }
        for j in 4..k {
            env *= (r[j] * r2[j]).sqrt();
        }
        let s = (self.m + self.m2 + self.u + self.u2) as f64;
        env * (s * std::f64::consts::LN_2).powf(k as f64)
    }

    fn half_box(row: &ScaleRow, u: u32, n: u64) -> Vec<i64> {
        let s = 2f64.powi(u as i32) / n as f64;
        row.d.iter().map(|d| (s / d).floor() as i64).collect()
    }

    fn x_ok(&self, x: &[i64]) -> bool {
        if x.iter().all(|&v| v == 0) {
            return false;
        }
        let w = 2f64.powi(self.v as i32);
        match &self.tube {
            None => x.iter().all(|&v| (v.abs() as f64) <= w),
            Some(t) => {
                let x1 = x[0] as f64;
                (1..x.len()).all(|j| (x[j] as f64 - t.alpha[j] * x1).abs() <= t.c * w)
            }
        }
    }

    /// Window for `x_j` given `x₁` (or the plain box without a tube).
    fn x_window(&self, j: usize, x1: i64) -> (f64, f64) {
        let w = 2f64.powi(self.v as i32);
        match &self.tube {
            None => (-w, w),
            Some(t) if j > 0 => {
                let c = t.alpha[j] * x1 as f64;
                (c - t.c * w, c + t.c * w)
            }
            Some(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// `(N₁, N₂)`: solutions of `T n = x` with `t, t′` parallel or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub parallel: u64,
    pub independent: u64,
}

impl PairCount {
    pub fn total(&self) -> u64 {
        self.parallel + self.independent
    }

    fn add(self, o: Self) -> Self {
        Self {
            parallel: self.parallel + o.parallel,
            independent: self.independent + o.independent,
        }
    }
}

/// All `2×2` minors of `(t | t′)` vanish.
pub fn is_parallel(t: &[i64], t2: &[i64]) -> bool {
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            if (t[a] as i128) * (t2[b] as i128) != (t[b] as i128) * (t2[a] as i128) {
                return false;
            }
        }
    }
    true
}

fn block_range(m: u32) -> std::ops::RangeInclusive<u64> {
    (1u64 << (m - 1))..=((1u64 << m) - 1)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    let q = a.div_euclid(b);
    if a.rem_euclid(b) == 0 {
        q
    } else {
        q + 1
    }
}

/// Upper estimate of the candidates visited by [`count_pairs`].
pub fn pair_candidates(p: &CountParams, ns: &[u64], ns2: &[u64]) -> f64 {
    let w = 2f64.powi(p.v as i32);
    let mut total = 0.0;
    for &n in ns {
        let h = CountParams::half_box(&p.row, p.u, n);
        for &n2 in ns2 {
            let h2 = CountParams::half_box(&p.row2, p.u2, n2);
            let per: f64 = (0..p.k)
                .map(|j| {
                    let full = (2 * h2[j] + 1) as f64;
                    let win = match &p.tube {
                        Some(t) if j > 0 => 2.0 * t.c * w / n2 as f64 + 1.0,
                        Some(_) => full,
                        None => 2.0 * w / n2 as f64 + 1.0,
                    };
                    full.min(win)
                })
                .product();
            total += box_volume(&h) * per;
        }
    }
    total
}

/// Exact `(N₁, N₂)` over `n ∈ ns`, `n′ ∈ ns2` (defaults: the blocks `D_m`, `D_{m′}`).
///
/// For each `(n, n′, t)` the coordinates of `t′` are confined to the integers
/// with `n t_j + n′ t′_j` inside the `x` window; in the tube variant the
/// window for `j ≥ 2` depends on `x₁`, so `t′₁` is fixed first.
pub fn count_pairs(
    p: &CountParams,
    ns: Option<&[u64]>,
    ns2: Option<&[u64]>,
    budget: f64,
) -> Result<PairCount, LatticeError> {
    let ns: Vec<u64> = ns.map(<[u64]>::to_vec).unwrap_or_else(|| block_range(p.m).collect());
    let ns2: Vec<u64> = ns2.map(<[u64]>::to_vec).unwrap_or_else(|| block_range(p.m2).collect());
    let needed = pair_candidates(p, &ns, &ns2);
    if needed > budget {
        return Err(LatticeError::BudgetExceeded { needed, budget });
    }
    let k = p.k;
    let parts: Vec<PairCount> = ns
        .par_iter()
        .map(|&n| {
            let h = CountParams::half_box(&p.row, p.u, n);
            let mut acc = PairCount {
                parallel: 0,
                independent: 0,
            };
            let ni = n as i64;
            let t_ranges: Vec<(i64, i64)> = h.iter().map(|&v| (-v, v)).collect();
            for &n2 in &ns2 {
                let h2 = CountParams::half_box(&p.row2, p.u2, n2);
                let n2i = n2 as i64;
                let mut t = vec![0i64; k];
                walk(&t_ranges, 0, &mut t, &mut |t| {
                    if t.iter().all(|&v| v == 0) {
                        return;
                    }
                    let window = |j: usize, x1: i64| {
                        let (lo, hi) = p.x_window(j, x1);
                        let base = ni * t[j];
                        let lo_t = if lo.is_finite() {
                            ceil_div(lo.ceil() as i64 - 1 - base, n2i)
                        } else {
                            -h2[j]
                        };
                        let hi_t = if hi.is_finite() {
                            (hi.floor() as i64 + 1 - base).div_euclid(n2i)
                        } else {
                            h2[j]
                        };
                        (lo_t.max(-h2[j]), hi_t.min(h2[j]))
                    };
                    let (a0, b0) = window(0, 0);
                    let mut t2 = vec![0i64; k];
                    let mut x = vec![0i64; k];
                    for s0 in a0..=b0 {
                        t2[0] = s0;
                        x[0] = ni * t[0] + n2i * s0;
                        let ranges: Vec<(i64, i64)> = (1..k).map(|j| window(j, x[0])).collect();
                        if ranges.iter().any(|(a, b)| a > b) {
                            continue;
                        }
                        walk(&ranges, 1, &mut t2, &mut |t2| {
                            if t2.iter().all(|&v| v == 0) {
                                return;
                            }
                            for j in 0..k {
                                x[j] = ni * t[j] + n2i * t2[j];
                            }
                            if !p.x_ok(&x) {
                                return;
                            }
                            if is_parallel(t, t2) {
                                acc.parallel += 1;
                            } else {
                                acc.independent += 1;
                            }
                        });
                    }
                });
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(
        PairCount {
            parallel: 0,
            independent: 0,
        },
        PairCount::add,
    ))
}

/// The same count with `n′` outermost and `x` enumerated directly. For fixed
/// `(n, n′, x)` the coordinates decouple: `t_j` must satisfy
/// `n′ | x_j − n t_j` with `t′_j = (x_j − n t_j)/n′` inside its box.
pub fn count_pairs_by_x(
    p: &CountParams,
    ns: Option<&[u64]>,
    ns2: Option<&[u64]>,
    budget: f64,
) -> Result<PairCount, LatticeError> {
    let ns: Vec<u64> = ns.map(<[u64]>::to_vec).unwrap_or_else(|| block_range(p.m).collect());
    let ns2: Vec<u64> = ns2.map(<[u64]>::to_vec).unwrap_or_else(|| block_range(p.m2).collect());
    let k = p.k;
    let w = 2f64.powi(p.v as i32);
    let x_span = |n: u64, n2: u64| {
        let h = CountParams::half_box(&p.row, p.u, n);
        let h2 = CountParams::half_box(&p.row2, p.u2, n2);
        (0..k).map(|j| n as i64 * h[j] + n2 as i64 * h2[j]).collect::<Vec<i64>>()
    };
    let mut needed = 0.0;
    for &n2 in &ns2 {
        for &n in &ns {
            let span = x_span(n, n2);
            needed += (0..k)
                .map(|j| match &p.tube {
                    None => 2.0 * w.floor().min(span[j] as f64) + 1.0,
                    Some(_) if j == 0 => 2.0 * span[0] as f64 + 1.0,
                    Some(t) => (2.0 * t.c * w + 3.0).min(2.0 * span[j] as f64 + 1.0),
                })
                .product::<f64>();
        }
    }
    if needed > budget {
        return Err(LatticeError::BudgetExceeded { needed, budget });
    }
    let mut acc = PairCount {
        parallel: 0,
        independent: 0,
    };
    for &n2 in &ns2 {
        let h2 = CountParams::half_box(&p.row2, p.u2, n2);
        for &n in &ns {
            let h = CountParams::half_box(&p.row, p.u, n);
            let (ni, n2i) = (n as i64, n2 as i64);
            let span = x_span(n, n2);
            let x1_range = match &p.tube {
                None => {
                    let wf = w.floor() as i64;
                    (-wf.min(span[0]), wf.min(span[0]))
                }
                Some(_) => (-span[0], span[0]),
            };
            let mut x = vec![0i64; k];
            let mut lists: Vec<Vec<(i64, i64)>> = vec![Vec::new(); k];
            for x1 in x1_range.0..=x1_range.1 {
                x[0] = x1;
                let x_ranges: Vec<(i64, i64)> = (1..k)
                    .map(|j| {
                        let (lo, hi) = p.x_window(j, x1);
                        ((lo.ceil() as i64 - 1).max(-span[j]), (hi.floor() as i64 + 1).min(span[j]))
                    })
                    .collect();
                walk(&x_ranges, 1, &mut x, &mut |x| {
                    if !p.x_ok(x) {
                        return;
                    }
                    for j in 0..k {
                        lists[j].clear();
                        for tj in -h[j]..=h[j] {
                            let r = x[j] - ni * tj;
                            if r.rem_euclid(n2i) == 0 && (r / n2i).abs() <= h2[j] {
                                lists[j].push((tj, r / n2i));
                            }
                        }
                        if lists[j].is_empty() {
                            return;
                        }
                    }
                    let mut idx = vec![0usize; k];
                    let mut t = vec![0i64; k];
                    let mut t2 = vec![0i64; k];
                    loop {
                        for j in 0..k {
                            (t[j], t2[j]) = lists[j][idx[j]];
                        }
                        if t.iter().any(|&v| v != 0) && t2.iter().any(|&v| v != 0) {
                            if is_parallel(&t, &t2) {
                                acc.parallel += 1;
                            } else {
                                acc.independent += 1;
                            }
                        }
                        let mut pos = 0;
                        while pos < k {
                            idx[pos] += 1;
                            if idx[pos] < lists[pos].len() {
                                break;
                            }
                            idx[pos] = 0;
                            pos += 1;
                        }
                        if pos == k {
                            break;
                        }
                    }
                });
            }
        }
    }
    Ok(acc)
}

/// One row of a count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub m: u32,
    pub m2: u32,
    pub i: usize,
    pub i2: usize,
    pub u: u32,
    pub u2: u32,
    pub v: u32,
    pub n1: u64,
    pub n2: u64,
    pub envelope: f64,
}

impl CountRow {
    pub fn ratio(&self) -> f64 {
        self.n2 as f64 / self.envelope
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxFunction;
    use crate::decomposition::AdmissibleSystem;

    fn rows(k: usize, m: u32, tau: f64) -> Vec<ScaleRow> {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(k as f64 + 1.0), tau, m, k, vec![0.0; k]).unwrap();
        sys.blocks[m as usize - 1].rows.clone()
    }

    #[test]
    fn flat_count_orders_agree() {
        let q = FlatQuery::new(4, vec![1.0, 2f64.sqrt()], 0.0, vec![1.0 / 32.0; 2], 3, 2).unwrap();
        let a = count_flat(&q, DEFAULT_BUDGET).unwrap();
        let b = count_flat_by_box(&q, DEFAULT_BUDGET).unwrap();
        assert_eq!(a, b);
        assert!(a.total > 0);
        // Small enough boxes leave only t = 0.
        let tiny = FlatQuery::new(64, vec![1.0, 2f64.sqrt()], 0.0, vec![1.0 / 32.0; 2], 0, 2).unwrap();
        assert_eq!(count_flat(&tiny, DEFAULT_BUDGET).unwrap().total, 0);
    }

    #[test]
    fn flat_t1_zero_stratum_needs_large_v() {
        let alpha = vec![1.0, 2f64.sqrt(), 3f64.sqrt()];
        let c = tube_constant(&alpha);
        for v in 0..6u32 {
            let n = 64;
            let q = FlatQuery::new(n, alpha.clone(), 1e-2, vec![1.0 / 1024.0; 3], 2, v).unwrap();
            let cnt = count_flat(&q, DEFAULT_BUDGET).unwrap();
            assert_eq!(cnt, count_flat_by_box(&q, DEFAULT_BUDGET).unwrap());
            if c * 2f64.powi(v as i32) < n as f64 {
                assert_eq!(cnt.t1_zero, 0);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let q = FlatQuery::new(1, vec![1.0, 0.5, 0.25], 0.0, vec![1e-3; 3], 4, 2).unwrap();
        assert!(matches!(count_flat_by_box(&q, 1e6), Err(LatticeError::BudgetExceeded { .. })));
    }

    #[test]
    fn pair_counts_agree_between_orders() {
        let rs = rows(2, 3, 0.4);
        assert!(!rs.is_empty());
        for v in 1..=3 {
            let p = CountParams::new(2, 0.4, (3, 3), (1, 1, v), rs[0].clone(), rs[rs.len() - 1].clone(), None).unwrap();
            let a = count_pairs(&p, None, None, DEFAULT_BUDGET).unwrap();
            let b = count_pairs_by_x(&p, None, None, DEFAULT_BUDGET).unwrap();
            assert_eq!(a, b, "v={v}");
        }
    }

    #[test]
    fn flat_pair_counts_agree_between_orders() {
        let rs = rows(3, 3, 0.3);
        let tube = Tube::new(vec![1.0, 2f64.sqrt(), 3f64.sqrt()]);
        let p = CountParams::new(3, 0.3, (3, 3), (1, 1, 1), rs[0].clone(), rs[0].clone(), Some(tube)).unwrap();
        let (ns, ns2) = ([4u64], [5u64]);
        let a = count_pairs(&p, Some(&ns), Some(&ns2), 4.0 * DEFAULT_BUDGET).unwrap();
        let b = count_pairs_by_x(&p, Some(&ns), Some(&ns2), DEFAULT_BUDGET).unwrap();
        assert_eq!(a, b);
        assert!(a.total() > 0);
    }

    #[test]
    fn parallel_test_is_exact() {
        assert!(is_parallel(&[2, -4, 6], &[-1, 2, -3]));
        assert!(!is_parallel(&[2, -4, 6], &[-1, 2, -2]));
        assert!(is_parallel(&[0, 0, 1], &[0, 0, 5]));
    }
}
