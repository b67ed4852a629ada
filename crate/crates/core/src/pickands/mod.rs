//! Monte Carlo estimation of Pickands-type constants.
//!
//! All constants are `lambda^-1 E[exp(min_i (M_i - offset_i))]` where the
//! `M_i` are maxima of `B*(t) = sqrt(2) B_{alpha/2}(t) - t^alpha` over the
//! mesh (continuous proxy) or over grids `{kD}`. One [`FieldBatch`] holds the
//! maxima of every support on common paths, so all comparative identities
//! (saturation, translation, dominance) hold per batch.

mod estimate;
mod field;
mod tail;

pub use estimate::{
    estimate_h_alpha, estimate_h_d, estimate_h_d1d2, estimate_h_x_z1z2, estimate_h_xy,
    field_maxima, params_for, write_constants_csv, ConstantEstimate, ConstantKind,
    CONSTANTS_CSV_HEADER,
};
pub use field::{default_mesh, Estimator, FieldBatch, FieldParams, FieldSamples, Support};
pub use tail::{joint_exceedances, tail_prob_check, TailCheck, TailRatio};

/// `H_1`.
pub const H_ALPHA_1: f64 = 1.0;
/// `H_2 = 1/sqrt(pi)`.
pub const H_ALPHA_2: f64 = 0.564_189_583_547_756_3;

/// Known closed forms of `H_alpha`.
pub fn known_h_alpha(alpha: f64) -> Option<f64> {
    if alpha == 1.0 {
        Some(H_ALPHA_1)
    } else if alpha == 2.0 {
        Some(H_ALPHA_2)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_horizon_gives_zero_maxima() {
        let b = field_maxima(1.0, 0.0, 0.01, &[Support::Grid(1.0)], 5, 1).unwrap();
        assert!(b.full.maxima.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn coarse_grid_is_singleton() {
        let b = field_maxima(1.0, 2.0, 0.125, &[Support::Grid(4.0)], 50, 3).unwrap();
        let i = b.support_index(Support::Grid(4.0)).unwrap();
        for r in 0..b.reps() {
            assert_eq!(b.maxima(r)[i], 0.0);
        }
    }

    #[test]
    fn nested_and_dominated_maxima() {
        for est in [Estimator::Direct, Estimator::Tilted] {
            let p = FieldParams::new(1.5, 8.0, 1.0 / 64.0, 200, 11).with_estimator(est);
            let b = FieldBatch::sample(p, &[Support::Grid(0.5), Support::Grid(1.0)]).unwrap();
            let (c, d, dd) = (0, 1, 2);
            for r in 0..b.reps() {
                let m = b.maxima(r);
                assert!(m[dd] <= m[d] && m[d] <= m[c]);
                if est == Estimator::Direct {
                    assert!(m[dd] >= 0.0);
                }
            }
            let h1 = b.h_d(0.5).unwrap().value;
            let h2 = b.h_d(1.0).unwrap().value;
            assert!(h2 <= h1);
        }
    }

    #[test]
    fn grid_mesh_mismatch() {
        let e = field_maxima(1.0, 4.0, 0.3, &[Support::Grid(1.0)], 2, 1).unwrap_err();
        assert!(matches!(e, Error::GridMeshMismatch { .. }));
    }

    #[test]
    fn equal_spacings_rejected() {
        let p = FieldParams::new(1.0, 4.0, 0.25, 4, 1);
        assert!(matches!(
            estimate_h_d1d2(p, 1.0, 1.0, 0.0, 0.0),
            Err(Error::EqualSpacings(_))
        ));
        assert!(matches!(
            estimate_h_x_z1z2(p, 1.0, 1.0, 0.0, 0.0, 0.0),
            Err(Error::EqualSpacings(_))
        ));
    }

    #[test]
    fn single_rep_is_low_confidence() {
        let e = estimate_h_alpha(FieldParams::new(1.0, 4.0, 0.05, 1, 9)).unwrap();
        assert!(e.low_confidence);
        assert_eq!(e.stderr, 0.0);
        assert!(e.value > 0.0);
    }

    #[test]
    fn common_offset_and_saturation_identities() {
        let p = FieldParams::new(1.0, 16.0, 1.0 / 64.0, 400, 5);
        let b = FieldBatch::sample(p, &[Support::Grid(0.5), Support::Grid(1.0)]).unwrap();
        let ha = b.h_alpha().unwrap().value;
        let hd = b.h_d(0.5).unwrap().value;
        let hd2 = b.h_d(1.0).unwrap().value;
        let low = -(b.max_observed() + 40.0);
        for w in [-1.0, 0.0, 0.7, 2.0] {
            // x = y = w: grid max dominated by continuous max
            assert!(rel(b.h_xy(0.5, w, w).unwrap().value, (-w).exp() * hd) < 1e-12);
            assert!(rel(b.h_xy(0.5, low, w).unwrap().value, (-w).exp() * hd) < 1e-12);
            assert!(rel(b.h_xy(0.5, w, low).unwrap().value, (-w).exp() * ha) < 1e-12);
            assert!(rel(b.h_d1d2(0.5, 1.0, low, w).unwrap().value, (-w).exp() * hd2) < 1e-12);
            assert!(rel(b.h_d1d2(0.5, 1.0, w, w).unwrap().value, (-w).exp() * hd2) < 1e-12);
            let two = b.h_d1d2(0.5, 1.0, w, 0.3).unwrap().value;
            assert!(rel(b.h_x_z1z2(0.5, 1.0, low, w, 0.3).unwrap().value, two) < 1e-12);
            assert!(rel(b.h_x_z1z2(0.5, 1.0, w, low, low).unwrap().value, (-w).exp() * ha) < 1e-12);
            let pair = b.h_d1d2(0.5, 1.0, 0.0, 0.0).unwrap().value;
            assert!(rel(b.h_x_z1z2(0.5, 1.0, w, w, w).unwrap().value, (-w).exp() * pair) < 1e-12);
            assert!(b.h_d1d2(0.5, 1.0, w, -w).unwrap().value > 0.0);
        }
        // dominance bound
        for (x, y) in [(0.0, 1.0), (1.0, 0.0), (-0.5, 0.5)] {
            let v = b.h_xy(0.5, x, y).unwrap().value;
            assert!(v <= ((-x).exp() * ha).min((-y).exp() * hd) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fine_grid_matches_continuous_proxy() {
        let h = 1.0 / 128.0;
        let b = FieldBatch::sample(FieldParams::new(1.0, 8.0, h, 300, 2), &[Support::Grid(h)])
            .unwrap();
        assert_eq!(b.h_d(h).unwrap().value, b.h_alpha().unwrap().value);
    }

    #[test]
    fn tilted_agrees_with_direct() {
        let supports = [Support::Grid(0.5)];
        let d = FieldBatch::sample(
            FieldParams::new(1.0, 2.0, 1.0 / 32.0, 40_000, 1).with_estimator(Estimator::Direct),
            &supports,
        )
        .unwrap()
        .h_d(0.5)
        .unwrap();
        let t = FieldBatch::sample(FieldParams::new(1.0, 2.0, 1.0 / 32.0, 40_000, 2), &supports)
            .unwrap()
            .h_d(0.5)
            .unwrap();
        let se = (d.stderr.powi(2) + t.stderr.powi(2)).sqrt();
        assert!((d.value - t.value).abs() < 3.0 * se, "{} vs {} (se {se})", d.value, t.value);
    }

    // Finite-horizon value lambda^-1 E exp(max_{k<=8} S_k) for the random walk
    // with N(-1, 2) steps, computed by numerical convolution of the Lindley
    // recursion M_n = max(0, X + M_{n-1}).
    const WALK_ORACLE_L8: f64 = 0.587_328;

    #[test]
    fn unit_grid_matches_walk_oracle() {
        let e = FieldBatch::sample(FieldParams::new(1.0, 8.0, 1.0 / 8.0, 20_000, 17), &[Support::Grid(1.0)])
            .unwrap()
            .h_d(1.0)
            .unwrap();
        assert!((e.value - WALK_ORACLE_L8).abs() < 3.0 * e.stderr, "{} ± {}", e.value, e.stderr);
    }

    #[test]
    fn deterministic_batches() {
        let p = FieldParams::new(0.8, 4.0, 1.0 / 32.0, 64, 99);
        let a = FieldBatch::sample(p, &[Support::Grid(0.25)]).unwrap();
        let b = FieldBatch::sample(p, &[Support::Grid(0.25)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_layout() {
        let b = FieldBatch::sample(FieldParams::new(1.0, 2.0, 0.125, 8, 1), &[Support::Grid(0.5)])
            .unwrap();
        let rows = vec![b.h_alpha().unwrap(), b.h_xy(0.5, 0.1, 0.2).unwrap()];
        let mut out = Vec::new();
        write_constants_csv(&mut out, &rows).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], CONSTANTS_CSV_HEADER);
        assert!(lines[1].starts_with("H,1,,,,,,"));
        assert!(lines[2].starts_with("H_xy,1,0.5,,0.1,0.2,,"));
    }
}
