//! Exact law of the minimum skeleton label of well-labeled 1-trees.
//!
//! Chains whose spine labels all stay `>= m` are counted by
//! `K^{>=m}_{a,b} = -delta_{a,b} + sum_{l=m}^{min(a,b)} X~_{a,l} X~_{b,l} X_l`.
//! Trees with minimum label exactly 1 are the difference between all trees
//! and those whose labels are `>= 2`, the latter being label-shifted copies
//! (with the skeleton threshold shifted too).
//!
//! All series are integer series; the computation runs modulo a set of
//! primes below `2^28` and is lifted back with the Chinese remainder theorem.

use std::collections::BTreeMap;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf::SeriesGf;

/// Default largest size accepted by [`exact_min_skeleton_distribution`].
pub const DEFAULT_CAP: usize = 60;

/// Number of moduli; their product exceeds `2^330`.
const NUM_PRIMES: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonMinTable {
    pub n: usize,
    /// Corner-rooted counts with a generic backbone, keyed by the minimum skeleton label.
    pub generic: BTreeMap<usize, BigInt>,
    /// Same for the degenerate backbone.
    pub degenerate: BTreeMap<usize, BigInt>,
}

impl SkeletonMinTable {
    pub fn count(&self, m: usize) -> BigInt {
        let z = BigInt::zero();
        self.generic.get(&m).unwrap_or(&z) + self.degenerate.get(&m).unwrap_or(&z)
    }

    pub fn total(&self) -> BigInt {
        self.generic.values().chain(self.degenerate.values()).sum()
    }

    /// `(m, count)` over the full support.
    pub fn counts(&self) -> Vec<(usize, BigInt)> {
        let max = self.generic.keys().chain(self.degenerate.keys()).copied().max().unwrap_or(0);
        (1..=max).map(|m| (m, self.count(m))).collect()
    }

    /// `P(min skeleton label <= m)` as floating point.
    pub fn cdf(&self) -> Vec<(usize, f64)> {
        let total = self.total();
        let mut acc = BigInt::zero();
        self.counts()
            .into_iter()
            .map(|(m, c)| {
                acc += c;
                (m, ratio_f64(&acc, &total))
            })
            .collect()
    }
}

fn ratio_f64(a: &BigInt, b: &BigInt) -> f64 {
    // Keep 60 significant bits of the denominator.
    let shift = b.bits().saturating_sub(60);
    let a = (a >> shift).to_f64().unwrap_or(f64::NAN);
    let b = (b >> shift).to_f64().unwrap_or(f64::NAN);
    a / b
}

/// Counts of corner-rooted well-labeled 1-trees with `n` edges by minimum
/// skeleton label, with the default size cap.
pub fn exact_min_skeleton_distribution(n: usize) -> Result<SkeletonMinTable> {
    exact_min_skeleton_distribution_capped(n, DEFAULT_CAP)
}

pub fn exact_min_skeleton_distribution_capped(n: usize, cap: usize) -> Result<SkeletonMinTable> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", value: n.to_string(), range: ">= 2" });
    }
    if n > cap {
        return Err(Error::CapExceeded { what: "skeleton-minimum size", requested: n, cap });
    }
    let primes = primes_below(1 << 28, NUM_PRIMES);
    let residues: Vec<Levels> = primes.par_iter().map(|&p| levels_mod(n, p)).collect();
    let lift = |get: &dyn Fn(&Levels) -> u32| -> BigInt {
        let rs: Vec<u32> = residues.iter().map(get).collect();
        crt_symmetric(&rs, &primes)
    };
    let top = n + 2;
    let mut tables = [BTreeMap::new(), BTreeMap::new()];
    for (kind, table) in tables.iter_mut().enumerate() {
        // s[m] = 12 * (weighted count with min label 1 and skeleton min >= m)
        let mut s = vec![BigInt::zero(); top + 2];
        for m in 1..=top {
            let a = lift(&|lv: &Levels| lv.a[kind][m]);
            let b = lift(&|lv: &Levels| lv.b[kind][if m == 1 { 1 } else { m - 1 }]);
            s[m] = a - b;
        }
        for m in 1..=top {
            let diff = (&s[m] - &s[m + 1]) * BigInt::from(2 * n);
            let (q, r) = diff.div_rem(&BigInt::from(12));
            if !r.is_zero() || q.is_negative() {
                return Err(Error::InvalidArgument(format!(
                    "inconsistent skeleton-minimum count at m = {m}: {diff}/12"
                )));
            }
            if !q.is_zero() {
                table.insert(m, q);
            }
        }
    }
    let [generic, degenerate] = tables;
    let out = SkeletonMinTable { n, generic, degenerate };
    let (pointed, _) = SeriesGf::new(n).q1();
    let want = pointed.coeff(n) * BigInt::from(2 * n);
    if !want.is_integer() || want.to_integer() != out.total() {
        return Err(Error::InvalidArgument(format!(
            "skeleton-minimum counts sum to {} instead of {}",
            out.total(),
            want
        )));
    }
    Ok(out)
}

/// Per-level sums `a[kind][m]`, `b[kind][m]` (kind 0 generic, 1 degenerate),
/// each `12 [g^n]` of the cubed (squared) restricted propagators over
/// backbone labels up to `n + 2` (`a`) or `n + 1` (`b`).
struct Levels {
    a: [Vec<u32>; 2],
    b: [Vec<u32>; 2],
}

fn levels_mod(n: usize, p: u64) -> Levels {
    let top = n + 2;
    let s = ModSeries { n, p };
    let r = s.r();
    let x = s.x(&r);
    let max_pow = 2 * top + 8;
    let mut xp = vec![s.one()];
    for k in 1..=max_pow {
        let next = s.mul(&xp[k - 1], &x);
        xp.push(next);
    }
    let omx = |k: usize| -> Vec<u64> {
        let mut v = xp[k.min(max_pow)].iter().map(|c| (p - c) % p).collect::<Vec<_>>();
        if k > max_pow {
            v = vec![0; n + 1];
        }
        v[0] = (v[0] + 1) % p;
        v
    };
    let ratio = |num: &[usize], den: &[usize]| -> Vec<u64> {
        let mut a = s.one();
        for &k in num {
            a = s.mul(&a, &omx(k));
        }
        let mut d = s.one();
        for &k in den {
            d = s.mul(&d, &omx(k));
        }
        s.mul(&a, &s.inv(&d))
    };
    let rl: Vec<Vec<u64>> = (0..=top + 1)
        .map(|l| if l == 0 { s.zero() } else { s.mul(&r, &ratio(&[l, l + 3], &[l + 1, l + 2])) })
        .collect();
    let xl: Vec<Vec<u64>> = (0..=top + 1)
        .map(|l| if l == 0 { s.zero() } else { ratio(&[3, l + 1, l + 1, 2 * l + 3], &[1, l + 3, l + 3, 2 * l + 1]) })
        .collect();
    let link: Vec<Vec<u64>> = (0..top)
        .map(|l| if l == 0 { s.zero() } else { s.shift1(&s.mul(&s.mul(&rl[l], &rl[l + 1]), &xl[l + 1])) })
        .collect();
    // xt[a][m] = X~_{a,m}, pm[b][m] = X~_{b,m} X_m
    let mut xt: Vec<Vec<Vec<u64>>> = vec![Vec::new(); top + 1];
    let mut pm: Vec<Vec<Vec<u64>>> = vec![Vec::new(); top + 1];
    for a in 1..=top {
        let mut row = vec![s.zero(); a + 1];
        row[a] = s.one();
        for m in 1..a {
            row[m] = s.mul(&xt[a - 1][m], &link[a - 1]);
        }
        pm[a] = (0..=a).map(|m| if m == 0 { s.zero() } else { s.mul(&row[m], &xl[m]) }).collect();
        xt[a] = row;
    }
    // k[a][b] for b <= a, starting from -delta and growing as m decreases.
    let mut k: Vec<Vec<Vec<u64>>> = (0..=top)
        .map(|a| {
            (0..=a)
                .map(|b| {
                    let mut v = s.zero();
                    if a == b {
                        v[0] = p - 1;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut lv = Levels { a: [vec![0; top + 2], vec![0; top + 2]], b: [vec![0; top + 2], vec![0; top + 2]] };
    for m in (1..=top).rev() {
        let (mut ag, mut bg, mut ad, mut bd) = (0u64, 0u64, 0u64, 0u64);
        for a in m..=top {
            for b in m..=a {
                if a - m <= n {
                    let inc = s.mul(&xt[a][m], &pm[b][m]);
                    s.add_assign(&mut k[a][b], &inc);
                }
                let kab = &k[a][b];
                let sq = s.mul(kab, kab);
                let cube = s.coeff_of_product(&sq, kab, n);
                let w = if a == b { 2 } else { 4 };
                let t = cube * w % p;
                ag = (ag + t) % p;
                if a < top {
                    bg = (bg + t) % p;
                }
                if a == b {
                    let t = sq[n] * 3 % p;
                    ad = (ad + t) % p;
                    if a < top {
                        bd = (bd + t) % p;
                    }
                }
            }
        }
        lv.a[0][m] = ag as u32;
        lv.b[0][m] = bg as u32;
        lv.a[1][m] = ad as u32;
        lv.b[1][m] = bd as u32;
    }
    lv
}

/// Truncated integer series modulo a prime `p < 2^28`.
struct ModSeries {
    n: usize,
    p: u64,
}

impl ModSeries {
    fn zero(&self) -> Vec<u64> {
        vec![0; self.n + 1]
    }

    fn one(&self) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    fn shift1(&self, a: &[u64]) -> Vec<u64> {
        let mut v = self.zero();
        v[1..].copy_from_slice(&a[..self.n]);
        v
    }

    fn add_assign(&self, a: &mut [u64], b: &[u64]) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = (*x + y) % self.p;
        }
    }

    /// Products are below `2^56`, so 128 of them fit in a `u64` accumulator.
    fn coeff_of_product(&self, a: &[u64], b: &[u64], k: usize) -> u64 {
        let mut acc = 0u64;
        for (j, i) in (0..=k).enumerate() {
            acc += a[i] * b[k - i];
            if j % 128 == 127 {
                acc %= self.p;
            }
        }
        acc % self.p
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let va = a.iter().position(|&c| c != 0);
        let vb = b.iter().position(|&c| c != 0);
        let mut out = self.zero();
        let (Some(va), Some(vb)) = (va, vb) else { return out };
        for k in va + vb..=self.n {
            let mut acc = 0u64;
            for (j, i) in (va..=k - vb).enumerate() {
                acc += a[i] * b[k - i];
                if j % 128 == 127 {
                    acc %= self.p;
                }
            }
            out[k] = acc % self.p;
        }
        out
    }

    /// Inverse of a series with constant term 1.
    fn inv(&self, a: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a[0], 1);
        let p = self.p;
        let mut out = self.zero();
        out[0] = 1;
        for k in 1..=self.n {
            let mut acc = 0u64;
            for (j, i) in (1..=k).enumerate() {
                acc += a[i] * out[k - i];
                if j % 128 == 127 {
                    acc %= p;
                }
            }
            out[k] = (p - acc % p) % p;
        }
        out
    }

    /// `R = 1 + 3 g R^2`
    fn r(&self) -> Vec<u64> {
        let p = self.p;
        let mut r = self.zero();
        r[0] = 1;
        for k in 1..=self.n {
            r[k] = 3 * self.coeff_of_product(&r, &r, k - 1) % p;
        }
        r
    }

    /// `x = g R^2 (1 + x + x^2)`, one coefficient at a time.
    fn x(&self, r: &[u64]) -> Vec<u64> {
        let p = self.p;
        let n = self.n;
        let u = self.shift1(&self.mul(r, r));
        let mut x = self.zero();
        let mut x2 = self.zero();
        for k in 1..=n {
            x2[k - 1] = self.coeff_of_product(&x, &x, k - 1);
            let mut acc = 0u64;
            for i in 1..=k {
                let j = k - i;
                let w = (x[j] + x2[j] + u64::from(j == 0)) % p;
                acc = (acc + u[i] * w) % p;
            }
            x[k] = acc;
        }
        x
    }
}

fn primes_below(bound: u64, count: usize) -> Vec<u64> {
    let is_prime = |q: u64| q > 1 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0);
    (1..bound).rev().filter(|&q| is_prime(q)).take(count).collect()
}

/// Symmetric lift: the unique integer in `(-M/2, M/2]` with the given residues.
fn crt_symmetric(residues: &[u32], primes: &[u64]) -> BigInt {
    let mut acc = BigInt::zero();
    let mut modulus = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        let pb = BigInt::from(p);
        // acc + modulus * t == r (mod p)
        let cur = (&acc % &pb).to_u64().unwrap_or(0);
        let m_mod = (&modulus % &pb).to_u64().unwrap_or(0);
        let diff = (u64::from(r) + p - cur) % p;
        let t = diff * mod_inverse(m_mod, p) % p;
        acc += &modulus * BigInt::from(t);
        modulus *= pb;
    }
    if &acc * 2 > modulus {
        acc -= modulus;
    }
    acc
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut base, mut e, mut out) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            out = out * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crt_recovers_signed_values() {
        let primes = primes_below(1 << 28, 4);
        for v in [BigInt::from(-123456789i64), BigInt::from(987654321u64) * BigInt::from(987654321u64)] {
            let rs: Vec<u32> = primes
                .iter()
                .map(|&p| v.mod_floor(&BigInt::from(p)).to_u32().unwrap())
                .collect();
            assert_eq!(crt_symmetric(&rs, &primes), v);
        }
    }

    #[test]
    fn mod_series_matches_exact_x() {
        let n = 12;
        let p = primes_below(1 << 28, 1)[0];
        let s = ModSeries { n, p };
        let x = s.x(&s.r());
        let exact = crate::gf::solve_x(n);
        for k in 0..=n {
            let e = exact.coeff(k).to_integer().mod_floor(&BigInt::from(p));
            assert_eq!(BigInt::from(x[k]), e);
        }
    }

    #[test]
    fn size_two_is_all_at_one() {
        let t = exact_min_skeleton_distribution(2).unwrap();
        assert_eq!(t.counts(), vec![(1, BigInt::from(1))]);
        assert_eq!(t.degenerate.get(&1), Some(&BigInt::from(1)));
    }

    #[test]
    fn totals_match_pointed_count() {
        let want = [1i64, 30, 614, 10700, 170742];
        for (i, w) in want.iter().enumerate() {
            let t = exact_min_skeleton_distribution(i + 2).unwrap();
            assert_eq!(t.total(), BigInt::from(*w));
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(exact_min_skeleton_distribution(61), Err(Error::CapExceeded { .. })));
        assert!(exact_min_skeleton_distribution(1).is_err());
    }
}
