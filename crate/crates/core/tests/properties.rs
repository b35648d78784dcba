use aoi_core::closed_form::{policy1_stationary, policy23_stationary};
use aoi_core::policy::{average_aoi_for, build_model, closed_form_aoi, closed_form_vq0};
use aoi_core::scalar::ratio;
use aoi_core::shs::{self, LoadPoint};
use aoi_core::{jain_index, AnalyticMethod, Exact, PolicyId, SourceView};
use proptest::prelude::*;

fn load() -> impl Strategy<Value = f64> {
    (-2.0f64..1.3).prop_map(|e| 10f64.powf(e))
}

fn policy() -> impl Strategy<Value = PolicyId> {
    prop::sample::select(PolicyId::SOURCE_AWARE.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_agrees_with_closed_form(p in policy(), r1 in load(), r2 in load(), mu in 0.1f64..10.0) {
        let loads = LoadPoint::from_loads(r1, r2, mu).unwrap();
        let engine = average_aoi_for(p, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
        let closed = closed_form_aoi(p, r1, r2, mu).unwrap();
        prop_assert!((engine - closed).abs() / closed < 1e-9);
    }

    #[test]
    fn rate_scaling(p in policy(), r1 in load(), r2 in load(), mu in 0.1f64..10.0, c in 0.1f64..10.0) {
        // Scaling every rate by c scales ages by 1/c.
        let base = LoadPoint::from_loads(r1, r2, mu).unwrap();
        let scaled = base.scaled(c).unwrap();
        let a = average_aoi_for(p, SourceView::Source1, &base, AnalyticMethod::ShsEngine).unwrap();
        let b = average_aoi_for(p, SourceView::Source1, &scaled, AnalyticMethod::ShsEngine).unwrap();
        prop_assert!((a - c * b).abs() / a < 1e-9);
    }

    #[test]
    fn swap_gives_other_source(p in policy(), r1 in load(), r2 in load()) {
        let loads = LoadPoint::from_loads(r1, r2, 1.0).unwrap();
        for method in [AnalyticMethod::ShsEngine, AnalyticMethod::ClosedForm] {
            let d2 = average_aoi_for(p, SourceView::Source2, &loads, method).unwrap();
            let direct = average_aoi_for(p, SourceView::Source1, &loads.swapped(), method).unwrap();
            prop_assert_eq!(d2, direct);
        }
    }

    #[test]
    fn solution_residuals_are_small(p in policy(), r1 in load(), r2 in load()) {
        let model = build_model(p).unwrap();
        let loads = LoadPoint::from_loads(r1, r2, 1.0).unwrap();
        let sol = shs::solve(&model, &loads).unwrap();
        let bal = sol.stationary.balance_residuals(&model, &loads);
        prop_assert!(bal.iter().all(|r| r.abs() < 1e-10), "{:?}", bal);
        prop_assert!((sol.stationary.total() - 1.0).abs() < 1e-12);
        let corr = sol.correlation.residuals(&model, &loads, &sol.stationary);
        prop_assert!(corr.iter().all(|r| r.abs() < 1e-9), "{:?}", corr);
        prop_assert!(sol.stationary.probabilities().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn closed_stationary_matches_engine(p in policy(), r1 in load(), r2 in load()) {
        let model = build_model(p).unwrap();
        let loads = LoadPoint::from_loads(r1, r2, 1.0).unwrap();
        let engine = shs::stationary_distribution(&model, &loads).unwrap();
        let closed = if p == PolicyId::Policy1 {
            policy1_stationary(r1, r2).unwrap()
        } else {
            policy23_stationary(r1, r2).unwrap()
        };
        for (a, b) in engine.probabilities().iter().zip(closed.probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn per_state_values_match_engine(p in policy(), r1 in load(), r2 in load(), mu in 0.1f64..10.0) {
        let model = build_model(p).unwrap();
        let loads = LoadPoint::from_loads(r1, r2, mu).unwrap();
        let engine = shs::solve(&model, &loads).unwrap().correlation.first_column();
        let closed = closed_form_vq0(p, r1, r2, mu).unwrap();
        prop_assert_eq!(engine.len(), closed.len());
        for (a, b) in engine.iter().zip(&closed) {
            prop_assert!((a - b).abs() / b < 1e-9);
        }
    }

    #[test]
    fn exact_engine_equals_exact_closed_form(p in policy(), a in 1i64..20, b in 1i64..20, m in 1i64..6) {
        let (r1, r2, mu) = (ratio(a, 4), ratio(b, 3), ratio(m, 2));
        let loads: LoadPoint<Exact> = LoadPoint::from_loads(r1.clone(), r2.clone(), mu.clone()).unwrap();
        let engine = average_aoi_for(p, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
        prop_assert_eq!(engine, closed_form_aoi(p, r1.clone(), r2.clone(), mu.clone()).unwrap());
        let states = closed_form_vq0(p, r1, r2, mu).unwrap();
        let model = build_model(p).unwrap();
        prop_assert_eq!(shs::solve(&model, &loads).unwrap().correlation.first_column(), states);
    }

    #[test]
    fn jain_bounds(d1 in 1e-6f64..1e6, d2 in 1e-6f64..1e6) {
        let j = jain_index(d1, d2).unwrap();
        prop_assert!((0.5..=1.0).contains(&j));
        prop_assert_eq!(jain_index(d1, d1).unwrap(), 1.0);
    }

    #[test]
    fn policy2_beats_policy1_and_policy3_on_sum(r1 in load(), r2 in load()) {
        let sum = |p| closed_form_aoi(p, r1, r2, 1.0).unwrap() + closed_form_aoi(p, r2, r1, 1.0).unwrap();
        let p2 = sum(PolicyId::Policy2);
        prop_assert!(p2 < sum(PolicyId::Policy1));
        prop_assert!(p2 < sum(PolicyId::Policy3));
    }
}

#[test]
fn float_widths_agree() {
    let d64 = closed_form_aoi(PolicyId::Policy3, 0.7_f64, 1.3, 2.0).unwrap();
    let d32 = closed_form_aoi(PolicyId::Policy3, 0.7_f32, 1.3, 2.0).unwrap();
    assert!((d64 - d32 as f64).abs() / d64 < 1e-5);
    let loads32 = LoadPoint::from_loads(0.7_f32, 1.3, 2.0).unwrap();
    let e32 = average_aoi_for(PolicyId::Policy3, SourceView::Source1, &loads32, AnalyticMethod::ShsEngine).unwrap();
    assert!((d64 - e32 as f64).abs() / d64 < 1e-4);
}
