//! Property tests for the structural invariants: format round trips, the
//! mirror involution, homogeneity of the canonical relation, and the window
//! and beam value ranges.

use proptest::prelude::*;

use dsar_core::canonical::canonical_lift;
use dsar_core::forward::{io, Axis, DataGrid, ForwardModel, GridModel, ScenarioParams, Window};
use dsar_core::geometry::{GroundPoint, Trajectory};
use dsar_core::imaging::{beam_weight, predict_mirror_artifact, BeamPattern};
use dsar_core::Complex64;

fn arb_grid() -> impl Strategy<Value = DataGrid> {
    (
        1usize..5,
        1usize..5,
        prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16),
        prop_oneof![
            Just(GridModel::RawOracle),
            Just(GridModel::StartStop),
            Just(GridModel::Corrected)
        ],
    )
        .prop_map(|(n_s, n_w, vals, model)| {
            let params = ScenarioParams::new(6283.0, 100.0, 50.0).unwrap();
            let s_axis = Axis::new(n_s, -1.25, 0.5).unwrap();
            let omega_axis = Axis::new(n_w, 6000.0, 3.5).unwrap();
            let mut grid = DataGrid::zeros(model, params, s_axis, omega_axis).unwrap();
            for (slot, (re, im)) in grid.values.iter_mut().zip(vals.iter().cycle()) {
                *slot = Complex64::new(*re, *im);
            }
            grid
        })
}

proptest! {
    #[test]
    fn grid_io_round_trips_bit_exactly(grid in arb_grid()) {
        let mut bytes = Vec::new();
        io::write_grid(&grid, &mut bytes).unwrap();
        let back = io::read_grid(bytes.as_slice()).unwrap();
        prop_assert_eq!(&grid, &back);
        let mut again = Vec::new();
        io::write_grid(&back, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn mirror_map_is_an_involution(
        x1 in -10.0f64..10.0, x2 in -10.0f64..10.0,
        xi1 in -5.0f64..5.0, xi2 in -5.0f64..5.0,
    ) {
        let (mx, mxi) = predict_mirror_artifact(GroundPoint::new(x1, x2), [xi1, xi2]);
        prop_assert_eq!(mx.x1, x1);
        prop_assert_eq!(mx.x2, -x2);
        prop_assert_eq!(mxi, [xi1, -xi2]);
        let (back, back_xi) = predict_mirror_artifact(mx, mxi);
        prop_assert_eq!(back, GroundPoint::new(x1, x2));
        prop_assert_eq!(back_xi, [xi1, xi2]);
    }

    #[test]
    fn canonical_relation_is_positively_homogeneous(
        s in -2.0f64..2.0,
        tau in prop_oneof![0.1f64..3.0, -3.0f64..-0.1],
        lambda in 0.1f64..10.0,
        x1 in -2.0f64..2.0,
        x2 in -2.0f64..2.0,
        circular in any::<bool>(),
    ) {
        let traj = if circular {
            Trajectory::circular(1.0, 1.0).unwrap()
        } else {
            Trajectory::linear(1.0).unwrap()
        };
        let params = ScenarioParams::new(6283.0, 100.0, 50.0).unwrap();
        let x = GroundPoint::new(x1, x2);
        let a = canonical_lift(&traj, s, tau, x, &params, ForwardModel::StartStop).unwrap();
        let b = canonical_lift(&traj, s, lambda * tau, x, &params, ForwardModel::StartStop).unwrap();
        prop_assert_eq!(a.omega, b.omega);
        prop_assert!((b.sigma - lambda * a.sigma).abs() <= 1e-12 * (lambda * a.sigma).abs().max(1e-300));
        for k in 0..2 {
            prop_assert!((b.xi[k] - lambda * a.xi[k]).abs() <= 1e-12 * (lambda * a.xi[k]).abs().max(1e-300));
        }
    }

    #[test]
    fn window_is_even_and_bounded(l in 0.5f64..200.0, t in -500.0f64..500.0) {
        let w = Window::new(l).unwrap();
        let v = w.eval(t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, w.eval(-t));
        if t.abs() <= l {
            prop_assert_eq!(v, 1.0);
        }
        if t.abs() >= 2.0 * l {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn beam_weights_live_in_the_unit_interval(
        s in -3.0f64..3.0,
        x1 in -4.0f64..4.0,
        x2 in -4.0f64..4.0,
        which in 0usize..5,
    ) {
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        let beam = match which {
            0 => BeamPattern::Isotropic,
            1 => BeamPattern::LeftLooking { taper: 0.2 },
            2 => BeamPattern::RightLooking { taper: 0.2 },
            3 => BeamPattern::AngularMask { u_max: 0.9, taper: 0.05 },
            _ => BeamPattern::RangeGate { max_radius: 1.0, taper: 0.1 },
        };
        let w = beam_weight(&beam, &traj, s, GroundPoint::new(x1, x2));
        prop_assert!((0.0..=1.0).contains(&w), "weight {w}");
    }
}
