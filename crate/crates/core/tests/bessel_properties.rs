//! Bessel-function invariants checked over the full order/argument ranges
//! the descriptor pipeline relies on.

use fbface_core::bessel::{bessel_j, bessel_roots, oracle, RootTable};
use proptest::prelude::*;

/// |J_{n−1}(x) + J_{n+1}(x) − (2n/x)·J_n(x)| ≤ 1e-9 for n ∈ [1, 31],
/// x ∈ (0, 50].
#[test]
fn three_term_recurrence_holds_on_the_grid() {
    for n in 1..=31u32 {
        for k in 1..=100 {
            let x = k as f64 * 0.5;
            let low = bessel_j(n - 1, x).unwrap();
            let mid = bessel_j(n, x).unwrap();
            let high = bessel_j(n + 1, x).unwrap();
            let residual = (low + high - (2.0 * f64::from(n) / x) * mid).abs();
            assert!(
                residual <= 1e-9,
                "recurrence residual {residual:.3e} at n={n}, x={x}"
            );
        }
    }
}

/// Every tabulated root is a genuine zero of the fast evaluator.
#[test]
fn all_roots_have_tiny_residuals() {
    let table = RootTable::build(30, 6).unwrap();
    for n in 0..=30u32 {
        for i in 0..6 {
            let alpha = table.root(n, i);
            let residual = bessel_j(n, alpha).unwrap().abs();
            assert!(
                residual <= 1e-10,
                "|J_{n}({alpha})| = {residual:.3e} at root index {i}"
            );
        }
    }
}

/// Zeros of adjacent orders interlace: α_{n,i} < α_{n+1,i} < α_{n,i+1}.
#[test]
fn roots_of_adjacent_orders_interlace() {
    let table = RootTable::build(31, 6).unwrap();
    for n in 0..=30u32 {
        for i in 0..5 {
            let here = table.root(n, i);
            let next_order = table.root(n + 1, i);
            let next_root = table.root(n, i + 1);
            assert!(
                here < next_order && next_order < next_root,
                "interlacing violated at n={n}, i={i}: {here} {next_order} {next_root}"
            );
        }
    }
}

/// The fast path agrees with the high-precision series oracle.
#[test]
fn fast_path_matches_the_series_oracle() {
    for n in [0u32, 5, 15, 30] {
        for x in [0.1, 1.0, 10.0, 40.0] {
            let fast = bessel_j(n, x).unwrap();
            let exact = oracle::bessel_j_series(n, x);
            assert!(
                (fast - exact).abs() <= 1e-10,
                "J_{n}({x}): fast {fast}, oracle {exact}"
            );
        }
    }
}

/// First roots increase with the order (they cannot appear before x = n).
#[test]
fn first_roots_move_out_with_the_order() {
    let mut previous = 0.0;
    for n in 0..=30u32 {
        let roots = bessel_roots(n, 1).unwrap();
        assert!(roots[0] > previous);
        assert!(roots[0] > f64::from(n));
        previous = roots[0];
    }
}

proptest! {
    /// |J_n(x)| ≤ 1 for every real x ≥ 0 (with headroom for rounding).
    #[test]
    fn bessel_values_are_bounded_by_one(n in 0u32..=40, x in 0.0f64..120.0) {
        let value = bessel_j(n, x).unwrap();
        prop_assert!(value.abs() <= 1.0 + 1e-12, "J_{}({}) = {}", n, x, value);
    }

    /// The derivative identity 2·J_n'(x) = J_{n−1}(x) − J_{n+1}(x) links the
    /// two public evaluators.
    #[test]
    fn derivative_matches_the_neighbor_difference(n in 1u32..=30, x in 0.1f64..80.0) {
        let derivative = fbface_core::bessel::bessel_j_prime(n, x).unwrap();
        let neighbors = 0.5 * (bessel_j(n - 1, x).unwrap() - bessel_j(n + 1, x).unwrap());
        prop_assert!((derivative - neighbors).abs() <= 1e-9);
    }
}
