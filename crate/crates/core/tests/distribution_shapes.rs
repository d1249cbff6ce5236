use toromaps::distributions::{density, log_log_slope, small_cycle_scalings, DistCurve, Law};

#[test]
fn first_loop_cdf_is_monotone_and_saturates() {
    let c = DistCurve::compute(Law::Sigma, 6.0, 0.1, false).unwrap();
    assert!(c.monotonicity_violation() <= 1e-8);
    assert_eq!(c.cdf[0], 0.0);
    assert!(*c.cdf.last().unwrap() >= 0.999);
}

#[test]
fn second_loop_curve_lies_below_the_first() {
    let a = DistCurve::compute(Law::Sigma, 6.0, 0.1, false).unwrap();
    let b = DistCurve::compute(Law::Sigma2, 6.0, 0.1, false).unwrap();
    for k in 0..a.r.len() {
        assert!(b.cdf[k] <= a.cdf[k] + 1e-9, "r = {}: {} > {}", a.r[k], b.cdf[k], a.cdf[k]);
    }
    assert!(b.monotonicity_violation() <= 1e-8);
}

#[test]
fn separating_distance_density_peaks_inside_the_support() {
    let c = DistCurve::compute(Law::Phi1, 4.0, 0.05, true).unwrap();
    let pdf = c.pdf.unwrap();
    let (k, &peak) = pdf.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!(k > 0 && k + 1 < pdf.len(), "maximum at r = {}", c.r[k]);
    assert!(peak > 0.0 && pdf.iter().all(|&p| p > -1e-6));
    assert!(density(Law::Phi1, 3.9).unwrap() < 0.05 * peak);
}

#[test]
fn small_cycle_scaling_exponents() {
    let n = 1e12;
    let ls = [10.0, 12.0, 15.0, 20.0, 25.0];
    let (s1, s2): (Vec<f64>, Vec<f64>) = ls.iter().map(|&l| small_cycle_scalings(l, n).unwrap()).unzip();
    assert!((log_log_slope(&ls, &s1) - 6.0).abs() < 0.02);
    assert!((log_log_slope(&ls, &s2) - 10.0).abs() < 0.05);
    let ns = [1e10, 1e11, 1e12, 1e13];
    let at_n: Vec<f64> = ns.iter().map(|&m| small_cycle_scalings(20.0, m).unwrap().0).collect();
    assert!((log_log_slope(&ns, &at_n) + 0.5).abs() < 0.02);
}
