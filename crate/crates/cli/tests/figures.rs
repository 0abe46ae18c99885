use qdamp::dynamics::{classify_regime, fit_envelope, Regime};
use qdamp::estimates::{optimal_width, tau_max};
use qdl_cli::figures::{fig1, fig2, fig3, fig4, fig4_column, fig4_params, Fig1Variant};
use qdl_cli::output::Table;

fn col<'a>(t: &'a Table, name: &str) -> &'a [f64] {
    t.get_column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn fig1a_is_periodic_and_bounded() {
    let t = fig1(Fig1Variant::A, None).unwrap();
    let (times, q) = (col(&t, "t"), col(&t, "q_avg"));
    let (q11, q22) = (col(&t, "q11")[0], col(&t, "q22")[0]);
    // Level gap from the registered pair: period 2π/(E_2 − E_1).
    let period = 2.0 * std::f64::consts::PI / 0.874_921_016_835_601_4;
    let per = (period / (times[1] - times[0])).round() as usize;
    assert!(((times[per] - times[0]) / period - 1.0).abs() < 1e-9);
    for i in 0..q.len() - per {
        assert!((q[i + per] - q[i]).abs() < 1e-6, "row {i}");
    }
    // Mean value 1/4 Q11 + 3/4 Q22.
    let mean = q[..q.len() - 1].iter().sum::<f64>() / (q.len() - 1) as f64;
    assert!((mean - (0.25 * q11 + 0.75 * q22)).abs() < 1e-9);
    assert_eq!(classify_regime(q), Regime::Underdamped);
}

#[test]
fn fig1b_underdamped_with_expected_envelope() {
    let t = fig1(Fig1Variant::B, None).unwrap();
    let (times, q) = (col(&t, "t"), col(&t, "q_avg"));
    assert_eq!(classify_regime(q), Regime::Underdamped);
    let gap = 0.874_921_016_835_601_4f64;
    let tau = 2.0 / (1e-2 * gap * gap);
    let limit = q.last().copied().unwrap();
    let window = times.iter().position(|&x| x > 3.0 * tau).unwrap();
    let fit = fit_envelope(&times[..window], &q[..window], limit).unwrap();
    assert!((fit.rate * tau - 1.0).abs() < 0.02, "rate {} vs {}", fit.rate, 1.0 / tau);
}

#[test]
fn damped_variants_approach_localized_value() {
    for v in [Fig1Variant::B, Fig1Variant::C] {
        let t = fig1(v, None).unwrap();
        let q = col(&t, "q_avg");
        let a = fig1(Fig1Variant::A, None).unwrap();
        let target = 0.25 * col(&a, "q11")[0] + 0.75 * col(&a, "q22")[0];
        let amp = q.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
        // Five decay constants in: what is left is within e^-5 of the start.
        assert!((q.last().unwrap() - target).abs() <= amp * (-5f64).exp() * 1.01, "{v:?}");
    }
}

#[test]
fn fig2_coefficients_peak_between_five_and_nine() {
    let (_, c) = fig2(None).unwrap();
    let (n, pop) = (col(&c, "n"), col(&c, "population"));
    let k = pop.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((5.0..=9.0).contains(&n[k]), "argmax n = {}", n[k]);
    assert!(pop.iter().sum::<f64>() >= 1.0 - 1e-6);
}

#[test]
fn fig3_support_spans_three_to_twelve() {
    let (_, c) = fig3(None).unwrap();
    let (n, pop) = (col(&c, "n"), col(&c, "population"));
    let big: Vec<f64> = n.iter().zip(pop).filter(|(_, &w)| w > 0.01).map(|(&n, _)| n).collect();
    assert!(big[0] <= 3.0 && *big.last().unwrap() >= 12.0, "{big:?}");
}

/// First time after which |q − q_end| never again exceeds half its initial value.
fn half_life(times: &[f64], q: &[f64]) -> f64 {
    let base = *q.last().unwrap();
    let d0 = (q[0] - base).abs();
    let mut i = q.len() - 1;
    while i > 0 && (q[i - 1] - base).abs() < 0.5 * d0 {
        i -= 1;
    }
    times[i]
}

#[test]
fn fig2_measured_rises_after_first_minimum() {
    let (t, _) = fig2(None).unwrap();
    let q = col(&t, "q_measured");
    let first_min = (1..q.len() - 1).find(|&i| q[i] < q[i - 1] && q[i] <= q[i + 1]).unwrap();
    let after = &q[first_min..];
    assert!(after.windows(2).any(|w| w[1] > w[0]));
    assert!(after.windows(2).any(|w| w[1] < w[0]));
}

#[test]
fn wider_packet_damps_faster() {
    let (a, _) = fig2(None).unwrap();
    let (b, _) = fig3(None).unwrap();
    let narrow = half_life(col(&a, "t"), col(&a, "q_measured"));
    let wide = half_life(col(&b, "t"), col(&b, "q_measured"));
    assert!(wide < narrow, "σ=3 half-life {wide} vs σ=1 {narrow}");
}

#[test]
fn fig4_maxima_match_closed_form() {
    use fig4_params::*;
    let t = fig4().unwrap();
    let ratios = col(&t, "z_ratio");
    assert_eq!(ratios.len(), POINTS);
    for n in UNCERTAINTIES {
        let curve = col(&t, &fig4_column(n));
        let expect_ratio = optimal_width(Z0, n).unwrap() / Z0;
        let expect_tau = tau_max(KAPPA, MASS, GRAVITY, Z0, n).unwrap();
        // Single interior maximum, on the grid point nearest the optimum.
        let k = curve.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(k > 0 && k + 1 < curve.len());
        let step = (ratios[1] / ratios[0]).ln();
        assert!((ratios[k] / expect_ratio).ln().abs() <= step);
        assert!(curve[..k].windows(2).all(|w| w[1] > w[0]));
        assert!(curve[k..].windows(2).all(|w| w[1] < w[0]));
        let refined: f64 = t.get_meta(&format!("max_tau_N{n:e}")).unwrap().parse().unwrap();
        let at: f64 = t.get_meta(&format!("max_z_ratio_N{n:e}")).unwrap().parse().unwrap();
        assert!((refined / expect_tau - 1.0).abs() < 1e-6, "N = {n}");
        assert!((at / expect_ratio - 1.0).abs() < 1e-4, "N = {n}");
    }
    // Far right, every curve follows the N-independent 2/(κ (m g z_i)²).
    let last = ratios.len() - 1;
    let far = 2.0 / (KAPPA * (MASS * GRAVITY * ratios[last] * Z0).powi(2));
    for n in &UNCERTAINTIES[..3] {
        let v = col(&t, &fig4_column(*n))[last];
        assert!((v / far - 1.0).abs() < 1e-3, "N = {n}");
    }
}
