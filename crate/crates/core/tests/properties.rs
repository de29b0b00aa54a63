use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use handoff_core::analysis::{handoff_prob_conditional, lens_area};
use handoff_core::geometry::{serving_bs, AssociationPolicy, Deployment, Layout, Region, Tier};
use handoff_core::harness::{validate_config_str, ExperimentConfig, Scenario};
use handoff_core::mobility::{
    generate_trajectory, BoundaryMode, Bounds, Drone3dConfig, GaussMarkovConfig, LevyConfig, MarkovianWaypointConfig,
    ModelConfig, MrdConfig, PreferredSpeed, RandomWalkConfig, RwpConfig, SmoothRandomConfig, VelocityRule,
    VelocitySpec,
};
use handoff_core::simulation::Estimate;

fn bounds(side: f64, reflect: bool) -> Option<Bounds> {
    Some(Bounds {
        region: Region::square(side),
        mode: if reflect { BoundaryMode::Reflect } else { BoundaryMode::Wrap },
    })
}

fn model(kind: usize, side: f64, reflect: bool) -> ModelConfig {
    let b = bounds(side, reflect);
    match kind {
        0 => ModelConfig::RandomWalk(RandomWalkConfig {
            v_min: 1.0,
            v_max: 20.0,
            sigma_v: 5.0,
            mean_v: 10.0,
            fixed_t: 7.0,
            bounds: b,
        }),
        1 => ModelConfig::Rwp(RwpConfig {
            region: Region::Rectangle { width: side, height: 0.5 * side },
            v_min: 1.0,
            v_max: 15.0,
            pause: 2.0,
        }),
        2 => ModelConfig::ModifiedRandomDirection(MrdConfig {
            waypoint_intensity: 0.0004,
            velocity: VelocitySpec::Uniform { v_min: 2.0, v_max: 12.0 },
            pause: 1.0,
            bounds: b,
        }),
        3 => ModelConfig::TruncatedLevy(LevyConfig {
            levy_exponent: 1.5,
            scale: 10.0,
            pause_exponent: 0.8,
            pause_scale: 5.0,
            kappa: 2.0,
            rho: 0.5,
            l_max: 500.0,
            tp_max: 100.0,
            bounds: b,
        }),
        4 => ModelConfig::SmoothRandom(SmoothRandomConfig {
            v_max: 20.0,
            preferred_speeds: vec![PreferredSpeed { speed: 10.0, probability: 0.4 }],
            speed_change_rate: 0.05,
            direction_change_rate: 0.1,
            accel_max: 2.0,
            dt: 1.0,
            bounds: b,
        }),
        5 => ModelConfig::GaussMarkov(GaussMarkovConfig {
            alpha: 0.6,
            mean_speed: 8.0,
            mean_direction: 0.0,
            sigma_speed: 2.0,
            sigma_direction: 0.7,
            dt: 1.0,
            bounds: b,
        }),
        6 => ModelConfig::MarkovianWaypoint(MarkovianWaypointConfig {
            waypoints: vec![[0.0, 0.0], [50.0, 0.0], [0.0, 300.0]],
            transition: vec![vec![0.0, 0.5, 0.5], vec![0.3, 0.0, 0.7], vec![0.5, 0.5, 0.0]],
            velocity: VelocityRule {
                distance_threshold: 100.0,
                pedestrian: VelocitySpec::Constant { v: 1.5 },
                vehicular: VelocitySpec::Uniform { v_min: 10.0, v_max: 20.0 },
            },
            pause: 1.0,
        }),
        _ => ModelConfig::Drone3d(Drone3dConfig {
            mean_speed: 10.0,
            step: 1.0,
            bounds: b,
        }),
    }
}

/// `|b(u₁, R) \ b(u₀, r)|` by integrating vertical chord lengths: serving BS
/// at `(−r, 0)`, user from the origin to `v·(cos θ, sin θ)`.
fn lens_by_columns(r: f64, v: f64, theta: f64) -> f64 {
    let (cx, cy) = (v * theta.cos(), v * theta.sin());
    let big_r = ((cx + r).powi(2) + cy * cy).sqrt();
    let n = 200_000;
    let h = 2.0 * big_r / n as f64;
    let mut area = 0.0;
    for i in 0..n {
        let x = cx - big_r + (i as f64 + 0.5) * h;
        let h1 = (big_r * big_r - (x - cx).powi(2)).max(0.0).sqrt();
        let (lo1, hi1) = (cy - h1, cy + h1);
        let h0 = (r * r - x * x).max(0.0).sqrt();
        let overlap = (hi1.min(h0) - lo1.max(-h0)).max(0.0);
        area += (hi1 - lo1 - overlap) * h;
    }
    area
}

fn grid_config(grid: &[f64]) -> String {
    let grid = serde_json::to_string(grid).unwrap();
    format!(
        r#"{{
  "scenario": "custom",
  "deployments": [{{"name": "ppp", "spec": {{"layout": "ppp", "tiers": [{{"density": 0.0004, "tx_power": 1.0}}]}}}}],
  "metrics": ["probability"],
  "sweep": {{"variable": "velocity", "grid": {grid}}},
  "plan": {{"n_replications": 10}}
}}"#
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_chain_and_conserve_length(
        kind in 0usize..8,
        seed in any::<u64>(),
        side in 200.0f64..3000.0,
        reflect in any::<bool>(),
    ) {
        let cfg = model(kind, side, reflect);
        let t = generate_trajectory(&cfg, 200, [0.0, 0.0], seed).unwrap();
        t.validate().unwrap();
        let region = cfg.bounds().map(|b| b.region);
        for w in t.segments().windows(2) {
            if w[1].wrapped {
                let reg = region.expect("only bounded models wrap");
                prop_assert!(reg.dilate(1e-9).contains(w[1].start));
            } else {
                prop_assert_eq!(w[0].end(), w[1].start);
            }
        }
        for s in t.segments() {
            prop_assert!(s.length >= 0.0 && s.pause >= 0.0);
            if s.length > 0.0 {
                prop_assert!(s.speed > 0.0);
                prop_assert!((s.flight_time * s.speed - s.length).abs() <= 1e-9 * s.length);
            }
        }
    }

    #[test]
    fn estimate_interval_is_symmetric(mean in -1e6f64..1e6, se in 0.0f64..1e3, n in 1usize..10_000) {
        let e = Estimate::new(mean, se, n);
        prop_assert!(e.ci95_low <= e.mean && e.mean <= e.ci95_high);
        prop_assert!(((e.ci95_high - e.ci95_low) - 2.0 * 1.96 * se).abs() <= 1e-9 * (1.0 + mean.abs()));
        prop_assert!(e.covers(mean));
        prop_assert_eq!(e.z_score(mean), 0.0);
    }

    #[test]
    fn sample_estimate_has_nonnegative_error(xs in prop::collection::vec(-100.0f64..100.0, 1..50)) {
        let e = Estimate::from_samples(&xs);
        prop_assert!(e.std_error >= 0.0);
        prop_assert_eq!(e.n, xs.len());
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-9 <= e.mean && e.mean <= hi + 1e-9);
    }

    #[test]
    fn biased_association_ignores_common_power_scale(
        pts in prop::collection::vec((-500.0f64..500.0, -500.0f64..500.0, 0usize..2), 2..40),
        users in prop::collection::vec((-400.0f64..400.0, -400.0f64..400.0), 1..20),
        p0 in 0.1f64..50.0,
        p1 in 0.1f64..50.0,
        bias in 0.5f64..10.0,
        scale in 1e-3f64..1e3,
    ) {
        let mut points = vec![Vec::new(), Vec::new()];
        for &(x, y, k) in &pts {
            points[k].push([x, y]);
        }
        let region = Region::square(1000.0);
        let make = |s: f64| {
            let tiers = vec![Tier::new(1e-5, p0 * s, 1.0, 4.0), Tier::new(1e-4, p1 * s, bias, 4.0)];
            Deployment::from_parts(tiers, points.clone(), Layout::Ppp, region, 0.0).unwrap()
        };
        let (a, b) = (make(1.0), make(scale));
        for &(x, y) in &users {
            let ia = serving_bs([x, y], &a, AssociationPolicy::MaxBiasedPower).unwrap();
            let ib = serving_bs([x, y], &b, AssociationPolicy::MaxBiasedPower).unwrap();
            prop_assert_eq!(ia, ib);
        }
    }

    #[test]
    fn grid_is_valid_iff_strictly_increasing(grid in prop::collection::vec(0.1f64..100.0, 1..8), sort in any::<bool>()) {
        let mut grid = grid;
        if sort {
            grid.sort_by(f64::total_cmp);
        }
        let increasing = grid.windows(2).all(|w| w[0] < w[1]);
        let diags = validate_config_str(&grid_config(&grid));
        let grid_errors = diags.iter().filter(|d| d.path.starts_with("sweep.grid")).count();
        prop_assert_eq!(grid_errors == 0, increasing, "{:?} -> {:?}", grid, diags);
        prop_assert_eq!(diags.len(), grid_errors);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lens_area_matches_column_oracle(
        r in 1.0f64..100.0,
        ratio in 0.05f64..5.0,
        theta in 0.0f64..PI,
    ) {
        let v = ratio * r;
        let exact = lens_area(r, v, theta);
        let oracle = lens_by_columns(r, v, theta);
        prop_assert!((exact - oracle).abs() <= 1e-3 * oracle, "r={r} v={v} θ={theta}: {exact} vs {oracle}");
    }

    #[test]
    fn lens_area_matches_oracle_past_the_bs(
        r in 1.0f64..100.0,
        ratio in 1.05f64..6.0,
        frac in 0.02f64..0.98,
    ) {
        // θ strictly inside the corrected branch: v·cos(π − θ) > r.
        let v = ratio * r;
        let theta_star = PI - (r / v).acos();
        let theta = theta_star + frac * (PI - theta_star);
        prop_assert!(v * (PI - theta).cos() > r);
        let exact = lens_area(r, v, theta);
        let oracle = lens_by_columns(r, v, theta);
        prop_assert!((exact - oracle).abs() <= 1e-3 * oracle, "r={r} v={v} θ={theta}: {exact} vs {oracle}");
    }

    #[test]
    fn conditional_probability_is_continuous(
        r in 1.0f64..100.0,
        ratio in 1.05f64..6.0,
        lambda in 1e-5f64..1e-2,
    ) {
        let v = ratio * r;
        let eps = 1e-12;
        let p = |th: f64| handoff_prob_conditional(r, th, v, lambda);
        let theta_star = PI - (r / v).acos();
        for at in [FRAC_PI_2, theta_star] {
            let jump = (p(at + eps) - p(at - eps)).abs();
            prop_assert!(jump < 1e-8, "jump {jump} at θ={at}");
        }
    }
}

#[test]
fn bundled_configs_round_trip_through_json() {
    for s in [Scenario::FigRateComparison, Scenario::FigRateVsProbLowV, Scenario::FigProbSingleVsMulti] {
        let cfg = ExperimentConfig::from_json(s.bundled_config().unwrap()).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.digest(), back.digest());
        assert!(validate_config_str(&text).is_empty());
    }
}
