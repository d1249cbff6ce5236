//! Continuum scaling functions at real and complex arguments.
//!
//! With `a = sqrt(3/2)`:
//!
//! - `F(L) = 1 + 3 / sinh^2(a L)` and `C = -F''/F'`;
//! - `rho(L1, L2) = F'(L1) F'(L2) H(min(L1, L2))` with `H' = 3 / F'^2`, `H(0) = 0`;
//! - `I(L) = tanh^4(a L) / 96` and `J(L) = -H(L) F'(2L) / 2`;
//! - `F1 = A0 + L A1 + L^2 A2 = 4 M + L M'` with `M = alpha0 + L alpha1`.
//!
//! `H`, `J` and `F1` suffer catastrophic cancellation near `L = 0`; below
//! [`SERIES_THRESHOLD`] they are evaluated from Taylor series whose
//! coefficients come from exact rational expansion of the closed forms.

use std::str::FromStr;
use std::sync::OnceLock;

use num::complex::Complex64;
use num::{BigInt, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};
use crate::series::{int, rat, FormalSeries, Rational};

pub type C64 = Complex64;

/// `sqrt(3/2)`.
pub const A: f64 = 1.224_744_871_391_589;
pub const SQRT6: f64 = 2.449_489_742_783_178;

/// `|L|` below which `H`, `J` and `F1` use their Taylor series.
pub const SERIES_THRESHOLD: f64 = 0.3;

/// Small-`L` coefficient of `F1 ~ L^4 / SMALL_L_DENOMINATOR`.
pub const SMALL_L_DENOMINATOR: f64 = 896.0;

/// Which of the two conjugate rays a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ray {
    /// `L = sqrt(-i xi) r = exp(-i pi/4) sqrt(xi) r`
    Minus,
    /// `L = sqrt(i xi) r = exp(i pi/4) sqrt(xi) r`
    Plus,
    Real,
}

/// Evaluation point with the branch it was built on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub l: C64,
    pub ray: Ray,
}

impl ScalingPoint {
    pub fn real(l: f64) -> Self {
        ScalingPoint { l: C64::new(l, 0.0), ray: Ray::Real }
    }

    /// `sqrt(-+ i xi) * r` with the principal root (positive real part).
    pub fn on_ray(xi: f64, r: f64, ray: Ray) -> Self {
        let s = (0.5 * xi).sqrt() * r;
        let l = match ray {
            Ray::Minus => C64::new(s, -s),
            Ray::Plus => C64::new(s, s),
            Ray::Real => C64::new(xi.sqrt() * r, 0.0),
        };
        ScalingPoint { l, ray }
    }

    /// Ray parameter used to order points sharing a ray.
    pub fn modulus(&self) -> f64 {
        self.l.norm()
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn f(l: C64) -> C64 {
    let s = (A * l).sinh();
    1.0 + 3.0 / (s * s)
}

pub fn f_prime(l: C64) -> C64 {
    let w = A * l;
    let s = w.sinh();
    -6.0 * A * w.cosh() / (s * s * s)
}

pub fn f_second(l: C64) -> C64 {
    let w = A * l;
    let (s, ch) = (w.sinh(), w.cosh());
    let s2 = s * s;
    9.0 * (3.0 * ch * ch - s2) / (s2 * s2)
}

pub fn c_fn(l: C64) -> C64 {
    let u = SQRT6 * l;
    SQRT6 * (2.0 + u.cosh()) / u.sinh()
}

pub fn c_tilde(l1: C64, l2: C64) -> C64 {
    f_prime(l1) / f_prime(l2)
}

/// Propagator; the minimum is taken by modulus (points share a ray).
pub fn rho(l1: C64, l2: C64) -> C64 {
    let m = if l1.norm() <= l2.norm() { l1 } else { l2 };
    f_prime(l1) * f_prime(l2) * h(m)
}

fn h_closed(l: C64) -> C64 {
    let u = SQRT6 * l;
    (180.0 * l + SQRT6 * ((2.0 * u).sinh() - 16.0 * u.sinh() - 32.0 * (0.5 * u).tanh())) / 1728.0
}

pub fn h(l: C64) -> C64 {
    if l.norm() < SERIES_THRESHOLD {
        eval_taylor(&taylor().h, l)
    } else {
        h_closed(l)
    }
}

pub fn h_prime(l: C64) -> C64 {
    let fp = f_prime(l);
    3.0 / (fp * fp)
}

pub fn i_fn(l: C64) -> C64 {
    let t = (A * l).tanh();
    let t2 = t * t;
    t2 * t2 / 96.0
}

pub fn i_prime(l: C64) -> C64 {
    let t = (A * l).tanh();
    A / 24.0 * t * t * t * (1.0 - t * t)
}

fn j_closed(l: C64) -> C64 {
    -0.5 * h_closed(l) * f_prime(2.0 * l)
}

pub fn j_fn(l: C64) -> C64 {
    if l.norm() < SERIES_THRESHOLD {
        eval_taylor(&taylor().j, l)
    } else {
        j_closed(l)
    }
}

pub fn j_prime(l: C64) -> C64 {
    if l.norm() < SERIES_THRESHOLD {
        eval_taylor_derivative(&taylor().j, l)
    } else {
        -0.5 * (h_prime(l) * f_prime(2.0 * l) + 2.0 * h_closed(l) * f_second(2.0 * l))
    }
}

/// Hyperbolic pieces shared by the `A` and `alpha` functions.
struct Hyp {
    s: C64,
    ch: C64,
    cu: C64,
    su: C64,
    c2u: C64,
    s2u: C64,
}

impl Hyp {
    fn at(l: C64) -> Self {
        let w = A * l;
        let (s, ch) = (w.sinh(), w.cosh());
        let (su, cu) = (2.0 * s * ch, 1.0 + 2.0 * s * s);
        Hyp { s, ch, cu, su, c2u: 2.0 * cu * cu - 1.0, s2u: 2.0 * su * cu }
    }
}

const A1_PREFACTOR: f64 = -5.0 / (2048.0 * SQRT6);
const A2_PREFACTOR: f64 = -75.0 / 1024.0;
const ALPHA1_PREFACTOR: f64 = 25.0 / 512.0 * A;

pub fn a0(l: C64) -> C64 {
    let p = Hyp::at(l);
    (238.0 + 151.0 * p.cu + p.c2u) / (768.0 * p.s.powi(4))
}

pub fn a1(l: C64) -> C64 {
    let p = Hyp::at(l);
    A1_PREFACTOR * (100.0 * p.su + 31.0 * p.s2u) / p.s.powi(6)
}

pub fn a2(l: C64) -> C64 {
    let p = Hyp::at(l);
    A2_PREFACTOR * (3.0 + 2.0 * p.cu) / p.s.powi(6)
}

pub fn a0_prime(l: C64) -> C64 {
    let p = Hyp::at(l);
    let num = 238.0 + 151.0 * p.cu + p.c2u;
    let dnum = 2.0 * A * (151.0 * p.su + 2.0 * p.s2u);
    (dnum * p.s - 4.0 * A * p.ch * num) / (768.0 * p.s.powi(5))
}

pub fn a1_prime(l: C64) -> C64 {
    let p = Hyp::at(l);
    let num = 100.0 * p.su + 31.0 * p.s2u;
    let dnum = 2.0 * A * (100.0 * p.cu + 62.0 * p.c2u);
    A1_PREFACTOR * (dnum * p.s - 6.0 * A * p.ch * num) / p.s.powi(7)
}

pub fn a2_prime(l: C64) -> C64 {
    let p = Hyp::at(l);
    let num = 3.0 + 2.0 * p.cu;
    let dnum = 4.0 * A * p.su;
    A2_PREFACTOR * (dnum * p.s - 6.0 * A * p.ch * num) / p.s.powi(7)
}

pub fn alpha0(l: C64) -> C64 {
    a0(l) / 4.0
}

pub fn alpha0_prime(l: C64) -> C64 {
    a0_prime(l) / 4.0
}

pub fn alpha1(l: C64) -> C64 {
    let p = Hyp::at(l);
    ALPHA1_PREFACTOR * p.ch / p.s.powi(5)
}

pub fn alpha1_prime(l: C64) -> C64 {
    let p = Hyp::at(l);
    ALPHA1_PREFACTOR * A * (p.s * p.s - 5.0 * p.ch * p.ch) / p.s.powi(6)
}

pub fn m_fn(l: C64) -> C64 {
    alpha0(l) + l * alpha1(l)
}

pub fn m_prime(l: C64) -> C64 {
    alpha0_prime(l) + alpha1(l) + l * alpha1_prime(l)
}

/// `A0 + L A1 + L^2 A2` with no small-`L` fallback.
pub fn f1_closed(l: C64) -> C64 {
    a0(l) + l * a1(l) + l * l * a2(l)
}

pub fn f1(l: C64) -> C64 {
    f1_with_threshold(l, SERIES_THRESHOLD)
}

pub fn f1_with_threshold(l: C64, threshold: f64) -> C64 {
    if l.norm() < threshold {
        eval_taylor(&taylor().f1, l)
    } else {
        f1_closed(l)
    }
}

pub fn f1_prime(l: C64) -> C64 {
    if l.norm() < SERIES_THRESHOLD {
        eval_taylor_derivative(&taylor().f1, l)
    } else {
        a0_prime(l) + a1(l) + l * a1_prime(l) + 2.0 * l * a2(l) + l * l * a2_prime(l)
    }
}

/// Taylor coefficients in powers of `L`, exact and as floats.
#[derive(Clone, Debug)]
pub struct Taylor {
    pub exact: Vec<Rational>,
    pub coeffs: Vec<f64>,
}

impl Taylor {
    fn from_exact(exact: Vec<Rational>) -> Self {
        let coeffs = exact.iter().map(|q| q.to_f64().expect("finite")).collect();
        Taylor { exact, coeffs }
    }
}

pub struct TaylorSet {
    pub i: Taylor,
    pub h: Taylor,
    pub j: Taylor,
    pub f1: Taylor,
}

/// Orders in `L`; the series converge for `|L| < 2 pi / sqrt(6)`.
const TAYLOR_ORDER: usize = 60;

pub fn taylor() -> &'static TaylorSet {
    static CELL: OnceLock<TaylorSet> = OnceLock::new();
    CELL.get_or_init(|| build_taylor(TAYLOR_ORDER))
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `cosh(k u)` or `sinh(k u)` as a series in `u`.
fn hyperbolic(k: &Rational, odd: bool, order: usize) -> FormalSeries {
    let mut s = FormalSeries::zero(order);
    let mut kp = Rational::one();
    for j in 0..=order {
        if (j % 2 == 1) == odd {
            s.set_coeff(j, &kp / Rational::from_integer(factorial(j)));
        }
        kp = &kp * k;
    }
    s
}

/// Substitutes `u = sqrt(6) L` in a series containing only even or only odd
/// powers of `u`; odd series keep a factor `sqrt(6)` outside, which the
/// caller must supply.
fn u_to_l(s: &FormalSeries) -> Vec<Rational> {
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(k, q)| {
            if q.is_zero() {
                return Rational::zero();
            }
            let p = BigInt::from(6).pow((k / 2) as u32);
            q * Rational::from_integer(p)
        })
        .collect()
}

fn build_taylor(order: usize) -> TaylorSet {
    let n = order + 16;
    let one = int(1);
    let half = rat(1, 2);
    let two = int(2);
    let u = FormalSeries::var(n);
    let cosh_u = hyperbolic(&one, false, n);
    let sinh_u = hyperbolic(&one, true, n);
    let cosh_2u = hyperbolic(&two, false, n);
    let sinh_2u = hyperbolic(&two, true, n);
    let sinh_h = hyperbolic(&half, true, n);
    let cosh_h = hyperbolic(&half, false, n);
    let tanh_h = sinh_h.div(&cosh_h).expect("cosh(0) = 1");

    // H = sqrt(6) Hn(u) / 1728, Hn = 30 u + sinh 2u - 16 sinh u - 32 tanh(u/2)
    let hn = &(&(&u.scale(&int(30)) + &sinh_2u) - &sinh_u.scale(&int(16))) - &tanh_h.scale(&int(32));
    // odd powers: sqrt(6) * 6^((k-1)/2) * sqrt(6) = 6^((k+1)/2)
    let h: Vec<Rational> = u_to_l(&hn)
        .iter()
        .enumerate()
        .map(|(k, q)| if k % 2 == 1 { q * int(6) / int(1728) } else { Rational::zero() })
        .collect();

    // J = Hn cosh u / (192 sinh^3 u)
    let sinh_over_u = sinh_u.shift_down(1).expect("sinh(0) = 0");
    let jn = (&hn.shift_down(3).expect("Hn = O(u^7)") * &cosh_u).div(&sinh_over_u.pow(3)).expect("unit");
    let j = u_to_l(&jn.scale(&rat(1, 192)));

    // F1 = N(u) / sinh^6(u/2)
    let p0 = &(&FormalSeries::constant(int(238), n) + &cosh_u.scale(&int(151))) + &cosh_2u;
    let p1 = &sinh_u.scale(&int(100)) + &sinh_2u.scale(&int(31));
    let p2 = &FormalSeries::constant(int(3), n) + &cosh_u.scale(&int(2));
    let num = &(&(&p0 * &sinh_h.pow(2)).scale(&rat(1, 768)) - &(&u * &p1).scale(&rat(5, 12288)))
        - &(&(&u * &u) * &p2).scale(&rat(75, 6144));
    let den = sinh_h.shift_down(1).expect("sinh(0) = 0").pow(6);
    let f1u = num.shift_down(6).expect("N = O(u^10)").div(&den).expect("unit");
    let f1 = u_to_l(&f1u);

    // I = tanh^4(w) / 96 with w = a L, a^2 = 3/2
    let tanh_w = sinh_u.div(&cosh_u).expect("cosh(0) = 1");
    let i: Vec<Rational> = tanh_w
        .pow(4)
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, q)| {
            if q.is_zero() {
                return Rational::zero();
            }
            let p = k as u32 / 2;
            q * Rational::new(BigInt::from(3).pow(p), BigInt::from(2).pow(p)) / int(96)
        })
        .collect();

    let cut = |v: Vec<Rational>| Taylor::from_exact(v.into_iter().take(order + 1).collect());
    TaylorSet { i: cut(i), h: cut(h), j: cut(j), f1: cut(f1) }
}

/// `Im f(sqrt(-i xi) r)` and its `r`-derivative from an even Taylor
/// series, summed term by term: `z^(2j) = (-i xi)^j r^(2j)`.
pub fn ray_imag_series(t: &Taylor, xi: f64, r: f64) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    if r == 0.0 {
        return (v, d);
    }
    let x = xi * r * r;
    let mut pw = 1.0;
    for (j, pair) in t.coeffs.chunks(2).enumerate() {
        let sign = match j % 4 {
            1 => -1.0,
            3 => 1.0,
            _ => 0.0,
        };
        if sign != 0.0 {
            v += sign * pair[0] * pw;
            d += sign * pair[0] * pw * 2.0 * j as f64 / r;
        }
        pw *= x;
    }
    (v, d)
}

fn eval_taylor(t: &Taylor, l: C64) -> C64 {
    t.coeffs.iter().rev().fold(C64::zero(), |acc, &a| acc * l + a)
}

fn eval_taylor_derivative(t: &Taylor, l: C64) -> C64 {
    t.coeffs.iter().enumerate().skip(1).rev().fold(C64::zero(), |acc, (k, &a)| acc * l + a * k as f64)
}

/// Scaling functions selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScalingFn {
    F,
    Fprime,
    C,
    H,
    I,
    J,
    F1,
    A0,
    A1,
    A2,
    Alpha0,
    Alpha1,
    M,
}

impl FromStr for ScalingFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "f" => ScalingFn::F,
            "fprime" | "f'" => ScalingFn::Fprime,
            "c" => ScalingFn::C,
            "h" => ScalingFn::H,
            "i" => ScalingFn::I,
            "j" => ScalingFn::J,
            "f1" => ScalingFn::F1,
            "a0" => ScalingFn::A0,
            "a1" => ScalingFn::A1,
            "a2" => ScalingFn::A2,
            "alpha0" => ScalingFn::Alpha0,
            "alpha1" => ScalingFn::Alpha1,
            "m" => ScalingFn::M,
            other => return Err(Error::InvalidArgument(format!("unknown scaling function {other:?}"))),
        })
    }
}

/// Checked evaluation: `Re(L) > 0`, and `L = 0` only where the function is finite there.
pub fn eval(which: ScalingFn, l: C64) -> Result<C64> {
    if l == C64::zero() {
        return match which {
            ScalingFn::H | ScalingFn::I | ScalingFn::J | ScalingFn::F1 => Ok(C64::zero()),
            _ => Err(Error::SingularInput(format!("{which:?} diverges at L = 0"))),
        };
    }
    if l.re <= 0.0 {
        return Err(Error::OutOfRange { what: "Re(L)", value: l.re.to_string(), range: "> 0" });
    }
    Ok(match which {
        ScalingFn::F => f(l),
        ScalingFn::Fprime => f_prime(l),
        ScalingFn::C => c_fn(l),
        ScalingFn::H => h(l),
        ScalingFn::I => i_fn(l),
        ScalingFn::J => j_fn(l),
        ScalingFn::F1 => f1(l),
        ScalingFn::A0 => a0(l),
        ScalingFn::A1 => a1(l),
        ScalingFn::A2 => a2(l),
        ScalingFn::Alpha0 => alpha0(l),
        ScalingFn::Alpha1 => alpha1(l),
        ScalingFn::M => m_fn(l),
    })
}

/// `F`, `F'`, `F''`, `C`, `H` at one point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingBundle {
    pub point: ScalingPoint,
    pub f: C64,
    pub f_prime: C64,
    pub f_second: C64,
    pub c: C64,
    pub h: C64,
}

impl ScalingBundle {
    pub fn at(point: ScalingPoint) -> Result<Self> {
        let l = point.l;
        if l.re <= 0.0 {
            return Err(Error::SingularInput(format!("bundle needs Re(L) > 0, got {l}")));
        }
        Ok(ScalingBundle { point, f: f(l), f_prime: f_prime(l), f_second: f_second(l), c: c_fn(l), h: h(l) })
    }

    /// `|C + F''/F'|`.
    pub fn consistency(&self) -> f64 {
        (self.c + self.f_second / self.f_prime).norm()
    }
}

/// Triple integral of `rho(L,L3) rho(L1,L3) rho(L2,L3) rho(L1,L2)^2` over the
/// positive octant, split at the kinks of `min`.
pub fn f1_by_quadrature(l: f64, tol: f64) -> Result<f64> {
    if l <= 0.0 {
        return Err(Error::OutOfRange { what: "L", value: l.to_string(), range: "> 0" });
    }
    let fp = |x: f64| f_prime(c(x)).re;
    let hh = |x: f64| h(c(x)).re;
    let rr = |x: f64, y: f64| fp(x) * fp(y) * hh(x.min(y));
    // rho decays like exp(-sqrt6 |dL|) away from the diagonal and like F'(L)^2 H at large L
    let span = 14.0;
    let top = |x: f64| x + span;
    let opts = |t: f64| QuadOptions { abs_tol: t, rel_tol: 1e-9, max_intervals: 400 };
    let inner_tol = tol * 1e-3;
    let outer = integrate_with_breaks(
        |l3| {
            let w3 = rr(l, l3);
            if w3 == 0.0 {
                return 0.0;
            }
            let mid = integrate_with_breaks(
                |l1| {
                    let w1 = rr(l1, l3);
                    let inner = integrate_with_breaks(
                        |l2| {
                            let r12 = rr(l1, l2);
                            rr(l2, l3) * r12 * r12
                        },
                        0.0,
                        top(l1.max(l3)),
                        &[l1, l3],
                        opts(inner_tol),
                    )
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN);
                    w1 * inner
                },
                0.0,
                top(l3),
                &[l3],
                opts(inner_tol),
            )
            .map(|r| r.value)
            .unwrap_or(f64::NAN);
            w3 * mid
        },
        0.0,
        top(l),
        &[l],
        opts(tol * 0.1),
    )?;
    if !outer.value.is_finite() {
        return Err(Error::Tolerance { tol, estimate: outer.value, error: outer.error });
    }
    Ok(outer.value)
}

/// Closed-form-free values of `I` by integrating the defining nested tail
/// integrals as a linear ODE system backwards from a far cutoff.
///
/// `T1 = int_x^inf F'^3`, `T2 = int_x^inf F'^3 T1`,
/// `T3 = int_x^inf 3/F'^2 T2`, `T4 = int_x^inf 3/F'^2 T3`.
pub fn tails_by_integration(l: f64, steps_per_unit: usize) -> [f64; 4] {
    let top = l + 16.0;
    let n = ((top - l) * steps_per_unit as f64).ceil() as usize;
    let hstep = (top - l) / n as f64;
    let fp = |x: f64| f_prime(c(x)).re;
    let rhs = |x: f64, y: [f64; 4]| {
        let p = fp(x);
        let p3 = p * p * p;
        let q = 3.0 / (p * p);
        [p3, p3 * y[0], q * y[1], q * y[2]]
    };
    let mut y = [0.0; 4];
    let mut x = top;
    // dT/dx = -integrand, integrated from top down to l: dy/d(-x) = integrand
    for _ in 0..n {
        let k1 = rhs(x, y);
        let y2 = std::array::from_fn(|i| y[i] + 0.5 * hstep * k1[i]);
        let k2 = rhs(x - 0.5 * hstep, y2);
        let y3 = std::array::from_fn(|i| y[i] + 0.5 * hstep * k2[i]);
        let k3 = rhs(x - 0.5 * hstep, y3);
        let y4 = std::array::from_fn(|i| y[i] + hstep * k3[i]);
        let k4 = rhs(x - hstep, y4);
        for i in 0..4 {
            y[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x -= hstep;
    }
    y
}

/// `I(L)` from its defining fivefold integral.
pub fn i_by_integration(l: f64) -> f64 {
    let t = tails_by_integration(l, 4000);
    let p = f_prime(c(l)).re;
    2.0 * 3.0 / (p * p) * t[3]
}

/// `J(L)` from its defining fivefold integral; the `M3` integral runs over `[0, L]`.
pub fn j_by_integration(l: f64) -> Result<f64> {
    let t = tails_by_integration(l, 4000);
    let q = integrate(
        |m| {
            let p = f_prime(c(m)).re;
            3.0 / (p * p)
        },
        0.0,
        l,
        QuadOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_intervals: 1000 },
    )?;
    let p = f_prime(c(l)).re;
    Ok(2.0 * 3.0 / (p * p) * q.value * t[2])
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualGrid {
    pub lmin: f64,
    pub lmax: f64,
    pub points: usize,
}

impl ResidualGrid {
    pub fn new(lmin: f64, lmax: f64, points: usize) -> Self {
        ResidualGrid { lmin, lmax, points }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.points.max(2);
        (0..n).map(move |k| self.lmin + (self.lmax - self.lmin) * k as f64 / (n - 1) as f64)
    }
}

/// Max-norm residuals of the differential and algebraic identities.
/// Finite-difference residuals are relative to the size of the terms
/// involved; algebraic ones are relative as well.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub f_ode: f64,
    pub c_ode: f64,
    pub c_identity: f64,
    pub h_ode: f64,
    pub a_relation: f64,
    pub m_parametrization: f64,
    pub rho_off_diagonal: f64,
    pub rho_jump: f64,
    pub conjugation: f64,
}

/// Richardson-extrapolated central first derivative.
pub fn diff1(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Richardson-extrapolated central second derivative.
pub fn diff2(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn re(g: impl Fn(C64) -> C64) -> impl Fn(f64) -> f64 {
    move |x| g(c(x)).re
}

/// One-sided Richardson derivative of `g` at `x` from the right (`dir = 1`) or left (`dir = -1`).
fn one_sided(g: impl Fn(f64) -> f64, x: f64, h: f64, dir: f64) -> f64 {
    let d = |h: f64| dir * (-3.0 * g(x) + 4.0 * g(x + dir * h) - g(x + 2.0 * dir * h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Residuals on the given grids: `main` for the `F`, `C`, `H` and `rho`
/// identities, `a_grid` for the `A`/`M` relations.
pub fn residuals(main: ResidualGrid, a_grid: ResidualGrid, step: f64) -> ResidualReport {
    let mut rep = ResidualReport {
        f_ode: 0.0,
        c_ode: 0.0,
        c_identity: 0.0,
        h_ode: 0.0,
        a_relation: 0.0,
        m_parametrization: 0.0,
        rho_off_diagonal: 0.0,
        rho_jump: 0.0,
        conjugation: 0.0,
    };
    let fr = re(f);
    let cr = re(c_fn);
    let hr = re(h_closed);
    for l in main.iter() {
        let fv = fr(l);
        rep.f_ode = rep.f_ode.max(rel(diff2(&fr, l, step), 3.0 * (fv * fv - 1.0)));
        let cv = cr(l);
        rep.c_ode = rep.c_ode.max(rel(diff1(&cr, l, step), cv * cv - 6.0 * fv));
        let z = c(l);
        rep.c_identity = rep.c_identity.max(rel(cv, (-f_second(z) / f_prime(z)).re));
        rep.h_ode = rep.h_ode.max(rel(diff1(&hr, l, step), h_prime(z).re));
        // rho as a function of L1 with L2 off the stencil
        for &l2 in &[0.5 * l, 1.7 * l + 0.1] {
            if (l - l2).abs() < 4.0 * step {
                continue;
            }
            let rho1 = |x: f64| rho(c(x), c(l2)).re;
            rep.rho_off_diagonal = rep.rho_off_diagonal.max(rel(diff2(rho1, l, step), 6.0 * fv * rho1(l)));
        }
        let rho1 = |x: f64| rho(c(x), c(l)).re;
        let jump = one_sided(rho1, l, step, 1.0) - one_sided(rho1, l, step, -1.0);
        rep.rho_jump = rep.rho_jump.max((jump + 3.0).abs());
        for g in [f, f_prime, c_fn, h, i_fn, j_fn, f1] as [fn(C64) -> C64; 7] {
            let zc = C64::new(l, 0.7 * l);
            rep.conjugation = rep.conjugation.max((g(zc.conj()) - g(zc).conj()).norm() / (1.0 + g(zc).norm()));
        }
    }
    let a0r = re(a0);
    let a1r = re(a1);
    for l in a_grid.iter() {
        let z = c(l);
        let lhs = diff2(&a0r, l, step) - 4.0 * diff1(&a1r, l, step) + 20.0 * a2(z).re;
        let scale = 1.0 + a0_prime(z).norm() + a1(z).norm() + a2(z).norm();
        rep.a_relation = rep.a_relation.max(lhs.abs() / scale);
        let mp = 4.0 * m_fn(z) + z * m_prime(z);
        rep.m_parametrization = rep.m_parametrization.max((mp - f1_closed(z)).norm() / (1.0 + a0(z).norm()));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_leading_terms() {
        let t = taylor();
        assert_eq!(t.f1.exact[4], rat(1, 896));
        assert!(t.f1.exact[..4].iter().all(|q| q.is_zero()));
        assert!(t.f1.exact[6].is_zero());
        assert_eq!(t.h.exact[7], rat(3, 112));
        assert!(t.h.exact[..7].iter().all(|q| q.is_zero()));
        assert!(t.j.exact[..4].iter().all(|q| q.is_zero()));
        // tanh^4(a L)/96 = (9/4) L^4 / 96 - ...
        assert_eq!(t.i.exact[4], rat(3, 128));
        assert_eq!(t.i.exact[6], rat(-3, 64));
    }

    #[test]
    fn taylor_matches_closed_forms_in_overlap() {
        for k in 0..12 {
            let r = 0.25 + 0.1 * k as f64 / 11.0;
            for ang in [0.0, -std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4] {
                let z = C64::from_polar(r, ang);
                let t = taylor();
                let pairs = [
                    (eval_taylor(&t.f1, z), f1_closed(z)),
                    (eval_taylor(&t.h, z), h_closed(z)),
                    (eval_taylor(&t.j, z), j_closed(z)),
                ];
                for (a, b) in pairs {
                    assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-3), "{z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn h_matches_definition() {
        let r = integrate(|x| h_prime(c(x)).re, 0.0, 1.3, QuadOptions::default()).unwrap();
        assert!((r.value - h(c(1.3)).re).abs() < 1e-12);
    }

    #[test]
    fn large_l_limits() {
        assert!((f(c(30.0)).re - 1.0).abs() < 1e-20);
        assert!((i_fn(c(30.0)).re - 1.0 / 96.0).abs() < 1e-15);
        let (l1, l2): (f64, f64) = (12.0, 12.4);
        let expected = SQRT6 / 4.0 * (-SQRT6 * (l1 - l2).abs()).exp();
        assert!((rho(c(l1), c(l2)).re / expected - 1.0).abs() < 1e-6);
        assert!((j_fn(c(10.0)).re * 96.0 - 1.0).abs() < 1e-8);
        assert_eq!(c_tilde(c(0.8), c(0.8)), c(1.0));
    }

    #[test]
    fn ray_points_decay() {
        for ray in [Ray::Minus, Ray::Plus] {
            let z = ScalingPoint::on_ray(400.0, 1.0, ray).l;
            assert!(z.re > 0.0 && (z.norm() - 20.0).abs() < 1e-12);
            for g in [i_fn, j_fn, f1] as [fn(C64) -> C64; 3] {
                assert!(g(z).is_finite());
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for l in [0.2, 0.5, 1.0, 2.5] {
            let z = c(l);
            for (g, dg) in [
                (f1 as fn(C64) -> C64, f1_prime as fn(C64) -> C64),
                (j_fn, j_prime),
                (i_fn, i_prime),
                (f, f_prime),
                (f_prime, f_second),
                (m_fn, m_prime),
            ] {
                let fd = diff1(re(g), l, 1e-3);
                assert!((fd - dg(z).re).abs() <= 1e-7 * (1.0 + fd.abs()), "L={l}: {fd} vs {}", dg(z).re);
            }
        }
    }

    #[test]
    fn eval_rejects_singular_points() {
        assert!(eval(ScalingFn::F, C64::zero()).is_err());
        assert!(eval(ScalingFn::C, C64::zero()).is_err());
        assert_eq!(eval(ScalingFn::F1, C64::zero()).unwrap(), C64::zero());
        assert!(eval(ScalingFn::F1, c(-1.0)).is_err());
        assert_eq!("alpha1".parse::<ScalingFn>().unwrap(), ScalingFn::Alpha1);
    }

    #[test]
    fn bundle_is_consistent() {
        let b = ScalingBundle::at(ScalingPoint::on_ray(2.0, 0.8, Ray::Minus)).unwrap();
        assert!(b.consistency() < 1e-10 * b.c.norm());
    }
}
