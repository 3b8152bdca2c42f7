use longstep::adversarial::{
    certify_overshoot, select_huber_params, theorem1_log_sum, theorem1_witness, CHAIN_SLACK,
};
use longstep::engine::{run_gd, t_hat, GAP_SLACK};
use longstep::numeric::{compensated_sum, rel_diff};
use longstep::objectives::{smoothness_probe, Objective};
use longstep::schedules::{long_step_scan, prefix_sums, StepSchedule};
use proptest::prelude::*;

fn huber() -> impl Strategy<Value = Objective> {
    (0.01f64..=1.0, 0.01f64..0.99).prop_map(|(a, r)| Objective::huber(a, r).unwrap())
}

fn quadratic() -> impl Strategy<Value = Objective> {
    (0.1f64..10.0).prop_map(|s| Objective::quadratic(s).unwrap())
}

fn objective() -> impl Strategy<Value = Objective> {
    prop_oneof![huber(), quadratic()]
}

fn steps(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..20.0, len)
}

/// A schedule whose index `T` satisfies the overshoot preconditions.
fn certifiable() -> impl Strategy<Value = (StepSchedule, usize)> {
    (
        prop::collection::vec(0.01f64..5.0, 1..40),
        1.0f64..200.0,
        2.0f64..80.0,
    )
        .prop_map(|(raw, sigma, eta)| {
            let total: f64 = raw.iter().sum();
            let mut values: Vec<f64> = raw.iter().map(|v| v * sigma / total).collect();
            // keep the prefix at or above 1 after rounding
            values[0] *= 1.0 + 1e-12;
            let t = values.len();
            values.push(eta);
            (StepSchedule::literal(values).unwrap(), t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_is_monotone_and_lipschitz(f in objective(), x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let (gx, gy) = (f.derivative(x), f.derivative(y));
        prop_assert!((gx - gy) * (x - y) >= 0.0);
        prop_assert!((gx - gy).abs() <= f.smoothness() * (x - y).abs() * (1.0 + 1e-12));
    }

    #[test]
    fn derivative_matches_central_differences(f in objective(), x in -10.0f64..10.0) {
        let h = 1e-6;
        if let longstep::objectives::Shape::Huber { r, .. } = f.shape {
            prop_assume!((x - r).abs() > 2.0 * h);
        }
        let fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
        let g = f.derivative(x);
        prop_assert!((fd - g).abs() <= 1e-5 * g.abs().max(1e-2), "fd {} vs {}", fd, g);
    }

    #[test]
    fn huber_below_its_quadratic(a in 0.01f64..=1.0, r in 0.01f64..0.99, x in -5.0f64..5.0) {
        let f = Objective::huber(a, r).unwrap();
        let quad = a * x * x / 2.0;
        if x <= r {
            prop_assert_eq!(f.value(x), quad);
        } else {
            prop_assert!(f.value(x) < quad);
        }
    }

    #[test]
    fn smoothness_probe_within_l(f in objective(), mut grid in prop::collection::vec(-8.0f64..8.0, 2..60)) {
        grid.push(grid[0] + 0.5);
        let ratio = smoothness_probe(&f, &grid).unwrap();
        // each slope carries one rounding, which a tiny spacing amplifies
        let mut sorted = grid.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let min_dx = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let max_g = sorted.iter().map(|&x| f.derivative(x).abs()).fold(0.0, f64::max);
        let noise = 4.0 * f64::EPSILON * max_g / min_dx;
        prop_assert!(ratio <= f.smoothness() * (1.0 + 1e-12) + noise);
    }

    #[test]
    fn prefix_sums_monotone(values in steps(1..300)) {
        let s = StepSchedule::literal(values.clone()).unwrap();
        let sums = prefix_sums(&s);
        prop_assert_eq!(sums[0], 0.0);
        prop_assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(*sums.last().unwrap(), compensated_sum(values));
    }

    #[test]
    fn scan_records_consistent(values in steps(1..100)) {
        let report = long_step_scan(&StepSchedule::literal(values).unwrap());
        for r in &report.records {
            prop_assert_eq!(r.c_t, r.ratio * r.ratio / 32.0);
            prop_assert_eq!(r.long_step, r.eta >= 2.0);
            if r.certifiable {
                prop_assert!(r.long_step && r.sigma >= 1.0);
            }
        }
        prop_assert!(!report.records[0].certifiable);
    }

    #[test]
    fn trajectories_replay_and_track_best(f in huber(), values in steps(1..200), x0 in -20.0f64..20.0) {
        let s = StepSchedule::literal(values).unwrap();
        let traj = run_gd(&f, &s, x0, s.len(), 1.0).unwrap();
        prop_assert!(traj.replays(&f));
        prop_assert!(traj.gaps().iter().all(|&g| g >= -GAP_SLACK));
        prop_assert!(traj.best_gap().windows(2).all(|w| w[1] <= w[0]));
        for (t, &b) in traj.best_gap().iter().enumerate() {
            let min = traj.gaps()[..=t].iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(b, min);
        }
    }

    #[test]
    fn short_constant_steps_descend(f in objective(), eta in 0.01f64..1.99, x0 in -20.0f64..20.0) {
        // normalize by the objective's own smoothness so eta is in units of 1/L
        let l = f.smoothness();
        let s = longstep::schedules::constant_schedule(eta, 300).unwrap();
        let traj = run_gd(&f, &s, x0, 300, l).unwrap();
        prop_assert!(traj.gaps().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn overshoot_chain_holds((schedule, t) in certifiable()) {
        let w = select_huber_params(&schedule, t).unwrap();
        for ineq in w.lemma_inequalities() {
            prop_assert!(ineq.holds(CHAIN_SLACK), "{:?}", ineq);
        }
        for ineq in w.overshoot_chain() {
            prop_assert!(ineq.holds(CHAIN_SLACK), "{:?}", ineq);
        }
        prop_assert!(w.params.x0 <= 1.0 + 1e-15);
        let cert = certify_overshoot(&schedule, t).unwrap();
        prop_assert!(cert.pass && cert.margin >= 0.0);
        prop_assert!(rel_diff(cert.simulated_gap, w.analytic_gap()) <= 1e-9);
        prop_assert!(rel_diff(cert.predicted_bound, w.c_t * w.params.x0.powi(2)) <= 1e-15);
    }

    #[test]
    fn rescaled_certificates_scale_gaps((schedule, t) in certifiable(), l in 0.01f64..100.0) {
        let cert = certify_overshoot(&schedule, t).unwrap();
        let scaled = cert.rescaled(l).unwrap();
        prop_assert_eq!(scaled.pass, cert.pass);
        let traj = run_gd(&scaled.instance.objective, &schedule, scaled.instance.x0, t + 1, l).unwrap();
        prop_assert!(rel_diff(traj.last_gap(), scaled.simulated_gap) <= 1e-9);
    }

    #[test]
    fn quadratic_witness_on_flat_schedules(values in prop::collection::vec(0.5f64..1.5, 4..200)) {
        let s = StepSchedule::literal(values).unwrap();
        let t = s.len();
        let (lhs, rhs) = theorem1_log_sum(&s, t).unwrap();
        prop_assert!(lhs <= rhs);
        prop_assert!((rhs - 2.0).abs() < 1e-9);
        let cert = theorem1_witness(&s, t).unwrap();
        prop_assert!(cert.pass);
    }

    #[test]
    fn t_hat_bounds(t in 1u64..u64::MAX) {
        let th = t_hat(t).unwrap();
        prop_assert!(th <= t);
        prop_assert!(2 * th as u128 >= t as u128);
        prop_assert!((th as u128 + 1).is_power_of_two());
        prop_assert!(2 * (th as u128 + 1) - 1 > t as u128);
    }
}
