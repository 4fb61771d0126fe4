//! Published critical-value tables and the worked pricing example, checked to
//! the precision they were printed at.

use gosset_core::{
    black_scholes, gosset_call, martingale_scale, normal_quantile, resolve_policy, t_quantile,
    MarketParams, OptionKind, TailPolicy,
};

/// True when `value` rounds to `printed` within one unit of its last digit.
fn matches_printed(value: f64, printed: &str) -> bool {
    let decimals = printed.split('.').nth(1).map_or(0, str::len) as i32;
    let unit = 10f64.powi(-decimals);
    let want: f64 = printed.parse().unwrap();
    (value - want).abs() <= unit * (1.0 + 1e-9)
}

const P_TABLE2: [f64; 6] = [0.9, 0.95, 0.99, 0.995, 0.999, 0.9999];

#[test]
fn critical_values_and_growth_at_sigma_04() {
    let t5_xc = ["1.476", "2.015", "3.365", "4.032", "5.893", "9.678"];
    let t5_growth = ["1.805", "2.239", "3.842", "5.018", "10.56", "47.99"];
    let n_xc = ["1.282", "1.645", "2.326", "2.576", "3.090", "3.719"];
    let n_growth = ["1.670", "1.931", "2.536", "2.801", "3.442"];
    for (i, &p) in P_TABLE2.iter().enumerate() {
        let x = t_quantile(p, 5.0).unwrap();
        assert!(matches_printed(x, t5_xc[i]), "t5 x_c p={p}: {x}");
        assert!(
            matches_printed((0.4 * x).exp(), t5_growth[i]),
            "t5 growth p={p}"
        );
        let z = normal_quantile(p).unwrap();
        assert!(matches_printed(z, n_xc[i]), "normal x_c p={p}: {z}");
        if i < 5 {
            assert!(
                matches_printed((0.4 * z).exp(), n_growth[i]),
                "normal growth p={p}"
            );
        }
    }
    // The last normal growth cell is printed as 4.428, which exp(0.4 x_c) cannot
    // reach for any x_c that rounds to 3.719. The running text gives 4.426.
    let growth = (0.4 * normal_quantile(0.9999).unwrap()).exp();
    assert!(matches_printed(growth, "4.426"));
    assert!(!matches_printed(growth, "4.428"));
}

#[test]
fn critical_value_matrix() {
    let ps = [0.90, 0.95, 0.99, 0.999, 0.9999];
    let rows: [(f64, [&str; 5]); 5] = [
        (3.0, ["1.638", "2.353", "4.541", "10.21", "22.20"]),
        (4.0, ["1.533", "2.132", "3.747", "7.173", "13.03"]),
        (6.0, ["1.440", "1.943", "3.143", "5.208", "8.025"]),
        (40.0, ["1.303", "1.684", "2.423", "3.307", "4.094"]),
        (f64::INFINITY, ["1.282", "1.645", "2.326", "3.090", "3.719"]),
    ];
    for (nu, printed) in rows {
        for (p, cell) in ps.iter().zip(printed) {
            let x = t_quantile(*p, nu).unwrap();
            assert!(matches_printed(x, cell), "nu={nu} p={p}: {x} vs {cell}");
        }
    }
}

#[test]
#[allow(clippy::approx_constant)] // 3.14 below is dollars
fn worked_example_diagnostics() {
    let market = MarketParams::with_horizon_volatility(50.0, 49.0, 0.03, 0.3, 1.0).unwrap();
    let bs = black_scholes(&market, OptionKind::Call).unwrap();
    assert!((bs.price_now - 7.12).abs() < 0.005);

    let capped = resolve_policy(TailPolicy::capped_at_confidence(0.9999), 3.0).unwrap();
    let truncated = resolve_policy(TailPolicy::truncated_at_confidence(0.9999), 3.0).unwrap();
    let qc = gosset_call(&market, 3.0, &capped).unwrap();
    let qt = gosset_call(&market, 3.0, &truncated).unwrap();

    assert!((qc.scale.denominator - 1.281).abs() < 0.002);
    assert!((qc.lower_limit - 0.6583).abs() < 0.001);
    assert!((qt.scale.z - 1.203).abs() < 0.002);
    assert!((qt.lower_limit - 0.4488).abs() < 0.001);

    // Present-value and at-expiry differences are both quoted for this example.
    assert!((qc.price_now - qt.price_now - 1.48).abs() < 0.005);
    assert!((qc.price_at_expiry - qt.price_at_expiry - 1.52).abs() < 0.005);

    // Contribution of the mass parked at the cap.
    let scale = martingale_scale(&market, 3.0, &capped).unwrap();
    let cap_value = scale.a_t * (0.3 * capped.x_c).exp();
    let tail = (cap_value - 49.0) * capped.tail_mass;
    assert!((tail - 3.14).abs() < 0.05, "{tail}");
}
