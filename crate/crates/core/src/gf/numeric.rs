//! Generating functions evaluated at a fixed real `g` in `(0, 1/12)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance of [`NumericGf::k`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Numeric values of `R` and `x` at a fixed `g`.
///
/// `x` is stored through `ln x`; all `1 - x^k` factors are formed with
/// `expm1`, which keeps full relative precision when `x` is close to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericGf {
    pub g: f64,
    pub r: f64,
    pub x: f64,
    ln_x: f64,
}

impl NumericGf {
    pub fn from_g(g: f64) -> Result<Self> {
        if !(g > 0.0 && g < 1.0 / 12.0) {
            return Err(Error::OutOfRange { what: "g", value: g.to_string(), range: "(0, 1/12)" });
        }
        let eps = (1.0 - 12.0 * g).sqrt();
        Ok(Self::build(g, eps))
    }

    /// Parametrization `g = (1 - eps^2)/12`, exact in `eps` (no cancellation).
    pub fn from_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::OutOfRange { what: "eps", value: eps.to_string(), range: "(0, 1)" });
        }
        Ok(Self::build((1.0 - eps * eps) / 12.0, eps))
    }

    fn build(g: f64, eps: f64) -> Self {
        // R = (1 - eps)/(6g), g R^2 = (1 - eps)/(3 (1 + eps)),
        // x + 1/x = 2 + d with d = 6 eps / (1 - eps).
        let r = (1.0 - eps) / (6.0 * g);
        let d = 6.0 * eps / (1.0 - eps);
        let ln_x = (0.5 * d - 0.5 * (d * (4.0 + d)).sqrt()).ln_1p();
        NumericGf { g, r, x: ln_x.exp(), ln_x }
    }

    pub fn eps(&self) -> f64 {
        (1.0 - 12.0 * self.g).sqrt()
    }

    /// `1 - x^k`
    fn omx(&self, k: f64) -> f64 {
        -(k * self.ln_x).exp_m1()
    }

    pub fn x_pow(&self, k: f64) -> f64 {
        (k * self.ln_x).exp()
    }

    pub fn r_label(&self, l: u64) -> f64 {
        if l == 0 {
            return 0.0;
        }
        let l = l as f64;
        self.r * self.omx(l) * self.omx(l + 3.0) / (self.omx(l + 1.0) * self.omx(l + 2.0))
    }

    pub fn x_label(&self, l: u64) -> f64 {
        let l = l as f64;
        let a = self.omx(l + 1.0) / self.omx(l + 3.0);
        self.omx(3.0) * a * a * self.omx(2.0 * l + 3.0) / (self.omx(1.0) * self.omx(2.0 * l + 1.0))
    }

    pub fn xtilde(&self, l1: u64, l2: u64) -> f64 {
        assert!(l1 >= l2 && l2 >= 1, "need l1 >= l2 >= 1");
        if l1 == l2 {
            return 1.0;
        }
        let (a, b) = (l1 as f64, l2 as f64);
        let mut v = self.x_pow(a - b) * self.omx(2.0 * a + 3.0) / self.omx(2.0 * b + 3.0);
        for j in 0..4 {
            v *= self.omx(b + j as f64) / self.omx(a + j as f64);
        }
        v
    }

    pub fn kp(&self, p: i64) -> f64 {
        let v = self.omx(3.0) / (self.omx(1.0) * self.omx(2.0)) * self.x_pow(p.unsigned_abs() as f64);
        if p == 0 {
            v - 1.0
        } else {
            v
        }
    }

    pub fn w1(&self) -> f64 {
        let x = self.x;
        let (a, b) = (self.omx(1.0), 1.0 + x);
        x.powi(3) * (1.0 + 2.0 * x + 2.0 * x * x - 2.0 * x.powi(3)) / (2.0 * a.powi(4) * b * b)
    }

    pub fn w2(&self) -> f64 {
        let x = self.x;
        let (a, b) = (self.omx(1.0), 1.0 + x);
        x * x * (1.0 + 2.0 * x).powi(2) / (4.0 * a * a * b * b)
    }

    /// `K_{l1,l2}` from its finite sum over the minimum label on the path.
    pub fn k_finite_sum(&self, l1: u64, l2: u64) -> f64 {
        if l1 == 0 || l2 == 0 {
            return 0.0;
        }
        let mut acc = if l1 == l2 { -1.0 } else { 0.0 };
        for l in 1..=l1.min(l2) {
            acc += self.xtilde(l1, l) * self.xtilde(l2, l) * self.x_label(l);
        }
        acc
    }

    /// `K_{l1,l2}` from the first-step recursion in `l1`, solved as a
    /// tridiagonal system on `1..=cap` with `K_{cap+1,l2} = k_{cap+1-l2}`.
    pub fn k_banded(&self, l1: u64, l2: u64, cap: u64) -> f64 {
        if l1 == 0 || l2 == 0 {
            return 0.0;
        }
        self.k_column(l2, cap.max(l1))[l1 as usize]
    }

    /// The whole column `K_{a,l2}` for `0 <= a <= m + 1` from one banded
    /// solve on `1..=m`, `m = max(cap, l2)`; entry `m + 1` is the boundary value.
    pub fn k_column(&self, l2: u64, cap: u64) -> Vec<f64> {
        let m = cap.max(l2) as usize;
        let mut k = vec![0.0; m + 2];
        if l2 == 0 {
            return k;
        }
        let g = self.g;
        let rs: Vec<f64> = (0..=m + 1).map(|l| self.r_label(l as u64)).collect();
        let b2 = l2 as usize;
        // row a (1-based): -g R_a R_{a-1} K_{a-1} + (1 - g R_a^2) K_a - g R_a R_{a+1} K_{a+1} = rhs_a
        let mut sub = vec![0.0; m + 1];
        let mut diag = vec![0.0; m + 1];
        let mut sup = vec![0.0; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for a in 1..=m {
            sub[a] = -g * rs[a] * rs[a - 1];
            diag[a] = 1.0 - g * rs[a] * rs[a];
            sup[a] = -g * rs[a] * rs[a + 1];
            let mut s = 0.0;
            for (ap, r) in [(a - 1, rs[a - 1]), (a, rs[a]), (a + 1, rs[a + 1])] {
                if ap == b2 {
                    s += r;
                }
            }
            rhs[a] = g * rs[a] * s;
        }
        k[m + 1] = self.kp(m as i64 + 1 - l2 as i64);
        rhs[m] -= sup[m] * k[m + 1];
        // Thomas algorithm; the system is diagonally dominant.
        for a in 2..=m {
            let w = sub[a] / diag[a - 1];
            diag[a] -= w * sup[a - 1];
            rhs[a] -= w * rhs[a - 1];
        }
        k[m] = rhs[m] / diag[m];
        for a in (1..m).rev() {
            k[a] = (rhs[a] - sup[a] * k[a + 1]) / diag[a];
        }
        k
    }

    /// `K_{l1,l2}` by the banded solve, doubling the label cap until two
    /// successive values agree to `tol` (relative).
    pub fn k_with(&self, l1: u64, l2: u64, tol: f64, max_cap: u64) -> Result<f64> {
        if l1 == 0 || l2 == 0 {
            return Ok(0.0);
        }
        let mut cap = 2 * l1.max(l2) + 16;
        let mut prev = self.k_banded(l1, l2, cap);
        let mut last_change = f64::INFINITY;
        while cap < max_cap {
            cap = (2 * cap).min(max_cap);
            let next = self.k_banded(l1, l2, cap);
            last_change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
            if last_change <= tol {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::NotConverged { what: "K label cap", last_change })
    }

    pub fn k(&self, l1: u64, l2: u64) -> Result<f64> {
        self.k_with(l1, l2, DEFAULT_TOL, 1 << 22)
    }
}

/// Which generating function [`eval_numeric`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GfKind {
    R,
    X,
    Xtilde,
    K,
    Kp,
    W1,
    W2,
}

impl std::str::FromStr for GfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "r" => GfKind::R,
            "x" => GfKind::X,
            "xtilde" => GfKind::Xtilde,
            "k" => GfKind::K,
            "kp" => GfKind::Kp,
            "w1" => GfKind::W1,
            "w2" => GfKind::W2,
            _ => return Err(Error::InvalidArgument(format!("unknown generating function {s:?}"))),
        })
    }
}

fn label(labels: &[i64], i: usize, kind: GfKind) -> Result<u64> {
    let v = *labels
        .get(i)
        .ok_or_else(|| Error::InvalidArgument(format!("{kind:?} needs {} label(s)", i + 1)))?;
    u64::try_from(v).map_err(|_| Error::OutOfRange { what: "label", value: v.to_string(), range: ">= 0" })
}

/// Numeric value of one generating function at `g`.
pub fn eval_numeric(kind: GfKind, labels: &[i64], g: f64) -> Result<f64> {
    let gf = NumericGf::from_g(g)?;
    Ok(match kind {
        GfKind::R => gf.r_label(label(labels, 0, kind)?),
        GfKind::X => {
            let l = label(labels, 0, kind)?;
            if l == 0 {
                return Err(Error::OutOfRange { what: "label", value: "0".into(), range: ">= 1" });
            }
            gf.x_label(l)
        }
        GfKind::Xtilde => {
            let (a, b) = (label(labels, 0, kind)?, label(labels, 1, kind)?);
            if !(a >= b && b >= 1) {
                return Err(Error::InvalidArgument("X~ needs l1 >= l2 >= 1".into()));
            }
            gf.xtilde(a, b)
        }
        GfKind::K => gf.k(label(labels, 0, kind)?, label(labels, 1, kind)?)?,
        GfKind::Kp => {
            let p = *labels.first().ok_or_else(|| Error::InvalidArgument("kp needs p".into()))?;
            gf.kp(p)
        }
        GfKind::W1 => gf.w1(),
        GfKind::W2 => gf.w2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::SeriesGf;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn x_solves_quadratic() {
        for g in [0.01, 0.05, 0.08, 0.0833] {
            let gf = NumericGf::from_g(g).unwrap();
            let u = gf.g * gf.r * gf.r;
            assert!(gf.x > 0.0 && gf.x < 1.0);
            assert!(close(gf.x + 1.0 / gf.x + 1.0, 1.0 / u, 1e-12));
            assert!(close(gf.r, 1.0 + 3.0 * g * gf.r * gf.r, 1e-13));
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(NumericGf::from_g(0.0).is_err());
        assert!(NumericGf::from_g(1.0 / 12.0).is_err());
        assert!(eval_numeric(GfKind::R, &[1], 0.1).is_err());
    }

    #[test]
    fn agrees_with_series_at_small_g() {
        let s = SeriesGf::new(30);
        let g = 0.01;
        let gf = NumericGf::from_g(g).unwrap();
        assert!(close(gf.r_label(3), s.r_label(3).eval_f64(g), 1e-12));
        assert!(close(gf.x_label(2), s.x_label(2).eval_f64(g), 1e-12));
        assert!(close(gf.xtilde(5, 2), s.xtilde_closed(5, 2).eval_f64(g), 1e-12));
        assert!(close(gf.kp(2), s.kp(2).eval_f64(g), 1e-12));
        assert!(close(gf.w1(), s.w1_closed().eval_f64(g), 1e-12));
        assert!(close(gf.w2(), s.w2_closed().eval_f64(g), 1e-12));
        assert!(close(gf.k(4, 2).unwrap(), s.k(4, 2).eval_f64(g), 1e-10));
    }

    #[test]
    fn banded_k_matches_finite_sum() {
        for eps in [0.3, 0.05, 0.01] {
            let gf = NumericGf::from_eps(eps).unwrap();
            for (a, b) in [(1, 1), (3, 7), (10, 10), (25, 4)] {
                let k = gf.k(a, b).unwrap();
                assert!(close(k, gf.k_finite_sum(a, b), 1e-9), "eps {eps} ({a},{b})");
            }
        }
    }

    #[test]
    fn k_tends_to_kp_at_deep_labels() {
        let gf = NumericGf::from_eps(0.5).unwrap();
        assert!(close(gf.k_finite_sum(200, 203), gf.kp(3), 1e-10));
    }
}
