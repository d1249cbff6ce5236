//! Limit laws as functions of the rescaled distance `r`:
//! `sigma` (shortest non-contractible loop through the origin), `sigma2`
//! (shortest loop not homologous to a multiple of the first) and `phi1`
//! (distance to a uniform vertex).
//!
//! All three are integrals over `xi > 0` of `exp(-xi^2)` against the
//! imaginary part of a scaling function at `z = sqrt(-i xi) r`; the
//! conjugate term at `sqrt(i xi) r` is folded in analytically. The
//! substitution `xi = t^2 / (1 - t)` maps the range to `(0, 1)`.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scaling::{self, ray_imag_series, taylor, ScalingPoint, C64, SERIES_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Law {
    Sigma,
    Sigma2,
    Phi1,
}

impl FromStr for Law {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma" => Ok(Law::Sigma),
            "sigma2" => Ok(Law::Sigma2),
            "phi1" => Ok(Law::Phi1),
            other => Err(Error::InvalidArgument(format!("unknown law {other:?}"))),
        }
    }
}

impl Law {
    /// Right endpoint where the CDF is within `1e-3` of 1.
    pub fn support_end(self) -> f64 {
        match self {
            Law::Sigma | Law::Sigma2 => 6.0,
            Law::Phi1 => 4.0,
        }
    }

    /// Known small-`r` expansion as `(power, coefficient)` pairs.
    pub fn small_r_terms(self) -> Vec<(i32, f64)> {
        let sp = PI.sqrt();
        match self {
            Law::Sigma => vec![(6, 9.0 / (4.0 * sp)), (10, -1431.0 / (280.0 * sp))],
            Law::Sigma2 => vec![(10, 11043.0 / (5096.0 * sp))],
            Law::Phi1 => vec![
                (4, 3.0 / 28.0),
                (10, -15.0 / (1456.0 * sp)),
                (14, 1_242_135.0 / (506_970_464.0 * sp)),
            ],
        }
    }

    pub fn small_r_expansion(self, r: f64, terms: usize) -> f64 {
        self.small_r_terms().iter().take(terms).map(|&(p, c)| c * r.powi(p)).sum()
    }
}

/// Beyond this `xi` the Gaussian factor underflows.
const XI_MAX: f64 = 40.0;

#[derive(Clone, Copy, Debug)]
pub struct DistOptions {
    pub quad: QuadOptions,
}

impl Default for DistOptions {
    fn default() -> Self {
        DistOptions { quad: QuadOptions { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 2000 } }
    }
}

/// Real form of the `sigma` integrand (without `8/pi`), divided through by
/// `cosh^4 s` so that it never overflows: with `s = sqrt(3 xi) r`,
/// `(sin s sinh^3 s - sinh s sin^3 s) / (cosh s + cos s)^4 / xi`.
pub fn sigma_real_integrand(xi: f64, r: f64) -> f64 {
    let s = (3.0 * xi).sqrt() * r;
    let t = s.tanh();
    let e = 1.0 / s.cosh();
    let (sn, cs) = s.sin_cos();
    let num = sn * t * t * t * e - t * sn * sn * sn * e * e * e;
    let den = (1.0 + cs * e).powi(4);
    num / den / xi
}

/// `Im f(z)` and `d/dr Im f(z)` at `z = sqrt(-i xi) r`.
fn ray_imag(law: Law, xi: f64, r: f64) -> (f64, f64) {
    let z0 = ScalingPoint::on_ray(xi, 1.0, scaling::Ray::Minus).l;
    let z = z0 * r;
    let t = taylor();
    let series = match law {
        Law::Sigma => &t.i,
        Law::Sigma2 => &t.j,
        Law::Phi1 => &t.f1,
    };
    if z.norm() < SERIES_THRESHOLD || xi < 1e-3 {
        return ray_imag_series(series, xi, r);
    }
    let (v, d): (C64, C64) = match law {
        Law::Sigma => (scaling::i_fn(z), scaling::i_prime(z)),
        Law::Sigma2 => (scaling::j_fn(z), scaling::j_prime(z)),
        Law::Phi1 => (scaling::f1(z), scaling::f1_prime(z)),
    };
    (v.im, (z0 * d).im)
}

/// The `xi` integrand of the law (`value`, `d value / dr`), prefactors included.
pub fn integrand(law: Law, xi: f64, r: f64) -> (f64, f64) {
    if xi <= 0.0 || xi > XI_MAX {
        return (0.0, 0.0);
    }
    let g = (-xi * xi).exp();
    let (im, dim) = ray_imag(law, xi, r);
    let k = match law {
        Law::Sigma | Law::Sigma2 => -192.0 / PI / xi,
        Law::Phi1 => 192.0 / PI / (xi * xi * xi),
    };
    (k * g * im, k * g * dim)
}

/// `f(z) - f(conj z)` should be purely imaginary for real-coefficient `f`;
/// returns `|Re|` of the assembled pair at `(xi, r)`.
pub fn conjugate_pair_defect(law: Law, xi: f64, r: f64) -> f64 {
    let zm = ScalingPoint::on_ray(xi, r, scaling::Ray::Minus).l;
    let zp = ScalingPoint::on_ray(xi, r, scaling::Ray::Plus).l;
    let f = match law {
        Law::Sigma => scaling::i_fn,
        Law::Sigma2 => scaling::j_fn,
        Law::Phi1 => scaling::f1,
    };
    (f(zm) - f(zp)).re.abs()
}

fn over_xi(mut f: impl FnMut(f64) -> f64, opts: &DistOptions) -> Result<(f64, f64)> {
    let r = integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let xi = t * t / s;
            if xi > XI_MAX {
                return 0.0;
            }
            f(xi) * t * (2.0 - t) / (s * s)
        },
        0.0,
        1.0,
        opts.quad,
    )?;
    Ok((r.value, r.error))
}

/// CDF value and quadrature error estimate.
pub fn cdf_with_error(law: Law, r: f64, opts: &DistOptions) -> Result<(f64, f64)> {
    if r < 0.0 {
        return Err(Error::OutOfRange { what: "r", value: r.to_string(), range: ">= 0" });
    }
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    match law {
        Law::Sigma => {
            let (v, e) = over_xi(|xi| (-xi * xi).exp() * sigma_real_integrand(xi, r), opts)?;
            Ok((8.0 / PI * v, 8.0 / PI * e))
        }
        Law::Sigma2 => over_xi(|xi| integrand(law, xi, r).0, opts),
        Law::Phi1 => {
            let (v, e) = over_xi(|xi| integrand(law, xi, r).0, opts)?;
            Ok((3.0 * r.powi(4) / 28.0 + v, e))
        }
    }
}

/// `sigma` from the complex form, for cross-checking the real form.
pub fn sigma_complex_form(r: f64, opts: &DistOptions) -> Result<f64> {
    Ok(over_xi(|xi| integrand(Law::Sigma, xi, r).0, opts)?.0)
}

pub fn sigma(r: f64) -> Result<f64> {
    Ok(cdf_with_error(Law::Sigma, r, &DistOptions::default())?.0)
}

pub fn sigma2(r: f64) -> Result<f64> {
    Ok(cdf_with_error(Law::Sigma2, r, &DistOptions::default())?.0)
}

pub fn phi1(r: f64) -> Result<f64> {
    Ok(cdf_with_error(Law::Phi1, r, &DistOptions::default())?.0)
}

pub fn cdf(law: Law, r: f64) -> Result<f64> {
    Ok(cdf_with_error(law, r, &DistOptions::default())?.0)
}

/// Density by differentiating under the integral sign.
pub fn density(law: Law, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::OutOfRange { what: "r", value: r.to_string(), range: "> 0" });
    }
    let (v, _) = over_xi(|xi| integrand(law, xi, r).1, &DistOptions::default())?;
    Ok(match law {
        Law::Phi1 => 3.0 * r.powi(3) / 7.0 + v,
        _ => v,
    })
}

/// Sampled CDF with optional density and per-point error estimates.
#[derive(Clone, Debug, Serialize)]
pub struct DistCurve {
    pub law: Law,
    pub r: Vec<f64>,
    pub cdf: Vec<f64>,
    pub pdf: Option<Vec<f64>>,
    pub err: Vec<f64>,
}

impl DistCurve {
    pub fn compute(law: Law, rmax: f64, step: f64, with_density: bool) -> Result<Self> {
        if !(step > 0.0 && rmax >= 0.0) {
            return Err(Error::InvalidArgument("need step > 0 and rmax >= 0".into()));
        }
        let n = (rmax / step).round() as usize;
        let r: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        let opts = DistOptions::default();
        let mut cdf = Vec::with_capacity(r.len());
        let mut err = Vec::with_capacity(r.len());
        for &x in &r {
            let (v, e) = cdf_with_error(law, x, &opts)?;
            cdf.push(v);
            err.push(e);
        }
        let pdf = if with_density {
            Some(r.iter().map(|&x| if x == 0.0 { Ok(0.0) } else { density(law, x) }).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(DistCurve { law, r, cdf, pdf, err })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,cdf,pdf,err\n");
        for k in 0..self.r.len() {
            let pdf = self.pdf.as_ref().map(|p| format!("{:.12e}", p[k])).unwrap_or_default();
            out.push_str(&format!("{:.6},{:.12e},{},{:.3e}\n", self.r[k], self.cdf[k], pdf, self.err[k]));
        }
        out
    }

    /// Largest decrease between consecutive CDF values beyond the error bars.
    pub fn monotonicity_violation(&self) -> f64 {
        self.cdf
            .windows(2)
            .zip(self.err.windows(2))
            .map(|(c, e)| (c[0] - c[1] - e[0] - e[1]).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// `int_0^rmax density(r) dr`.
pub fn density_integral(law: Law, rmax: f64) -> Result<f64> {
    let mut failure = None;
    let r = integrate(
        |x| {
            if x == 0.0 {
                return 0.0;
            }
            density(law, x).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        },
        0.0,
        rmax,
        QuadOptions { abs_tol: 1e-7, rel_tol: 1e-8, max_intervals: 200 },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// `(n sigma(l / n^(1/4)), n sigma2(l / n^(1/4)))`.
pub fn small_cycle_scalings(l: f64, n: f64) -> Result<(f64, f64)> {
    let r = l / n.powf(0.25);
    Ok((n * sigma(r)?, n * sigma2(r)?))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn expansion_coefficients_follow_from_taylor_series() {
        // sigma: -(192/pi) c_{2j} Im((-i)^j) Gamma(j/2)/2, j = 5 gives (72/sqrt(pi)) c_10
        let t = taylor();
        assert_eq!(t.i.exact[10].clone() * rat(72, 1), rat(-1431, 280));
        assert_eq!(t.j.exact[10].clone() * rat(72, 1), rat(11043, 5096));
        assert!(t.j.exact[6].clone() == rat(0, 1) && t.i.exact[6] != rat(0, 1));
        // phi1: (192/pi) c_{2j} Im((-i)^j) Gamma((j-2)/2)/2
        assert_eq!(t.f1.exact[10].clone() * rat(-48, 1), rat(-15, 1456));
        assert_eq!(t.f1.exact[14].clone() * rat(72, 1), rat(1_242_135, 506_970_464));
    }

    #[test]
    fn real_and_complex_sigma_agree() {
        for r in [0.2, 0.7, 1.0, 2.5] {
            let a = sigma(r).unwrap();
            let b = sigma_complex_form(r, &DistOptions::default()).unwrap();
            assert!((a - b).abs() < 1e-9, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn pinned_sigma_values() {
        // independent high-precision evaluation of the same integral
        assert!((sigma(1.0).unwrap() - 0.36655).abs() < 5e-5);
        assert!((sigma(3.0).unwrap() - 0.99735).abs() < 5e-5);
    }

    #[test]
    fn conjugate_pairs_are_imaginary() {
        for law in [Law::Sigma, Law::Sigma2, Law::Phi1] {
            for (xi, r) in [(0.5, 1.0), (2.0, 0.4), (0.05, 3.0)] {
                assert!(conjugate_pair_defect(law, xi, r) < 1e-10);
            }
        }
    }

    #[test]
    fn series_and_closed_integrands_meet() {
        for law in [Law::Sigma, Law::Sigma2, Law::Phi1] {
            let xi: f64 = 0.0449;
            let r = SERIES_THRESHOLD / xi.sqrt();
            let below = integrand(law, xi, r * (1.0 - 1e-9));
            let above = integrand(law, xi, r * (1.0 + 1e-9));
            assert!((below.0 - above.0).abs() < 1e-9 * (1.0 + above.0.abs()), "{law:?}");
            assert!((below.1 - above.1).abs() < 1e-8 * (1.0 + above.1.abs()), "{law:?}");
        }
    }

    #[test]
    fn density_matches_finite_difference() {
        for law in [Law::Sigma, Law::Sigma2, Law::Phi1] {
            let h = 1e-3;
            let fd = (cdf(law, 1.0 + h).unwrap() - cdf(law, 1.0 - h).unwrap()) / (2.0 * h);
            let d = density(law, 1.0).unwrap();
            assert!((fd - d).abs() < 1e-5, "{law:?}: {fd} vs {d}");
        }
    }

    #[test]
    fn rejects_negative_r() {
        assert!(sigma(-1.0).is_err());
        assert!(density(Law::Phi1, 0.0).is_err());
        assert_eq!(phi1(0.0).unwrap(), 0.0);
    }
}
