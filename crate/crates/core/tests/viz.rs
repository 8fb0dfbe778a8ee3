use proptest::prelude::*;

use netrepr::features::{FeatureColumn, FeatureMatrix, Provenance};
use netrepr::graph::test_graphs;
use netrepr::learn::Class;
use netrepr::viz::{
    force_layout, kde2d, ks_statistic, ordered_histograms, render_two_class, swarm_coordinates, Bandwidth,
    KdeOptions, LayoutOptions, RatioMode,
};

fn points() -> impl Strategy<Value = (Vec<[f64; 2]>, Vec<Class>)> {
    prop::collection::vec(((-10.0..10.0f64, -10.0..10.0f64), any::<bool>()), 2..40)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
        .prop_map(|v| {
            let pts = v.iter().map(|((x, y), _)| [*x, *y]).collect();
            let labels = v.iter().map(|(_, c)| if *c { Class::One } else { Class::Zero }).collect();
            (pts, labels)
        })
}

fn small_grid(mode: RatioMode) -> KdeOptions {
    KdeOptions {
        width: 48,
        height: 40,
        mode,
        ..KdeOptions::default()
    }
}

fn column(name: &str, values: Vec<f64>) -> FeatureColumn {
    FeatureColumn {
        name: name.into(),
        provenance: Provenance::BaseAttribute { attribute: name.into() },
        values,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_field_invariants((pts, labels) in points(), equal in any::<bool>()) {
        let mode = if equal { RatioMode::EqualWeighted } else { RatioMode::CountWeighted };
        let f = kde2d(&pts, &labels, &small_grid(mode)).unwrap();
        prop_assert!(f.f_all.iter().all(|&v| v >= 0.0 && v.is_finite()));
        for ((g0, g1), fa) in f.g0.iter().zip(&f.g1).zip(&f.f_all) {
            prop_assert!((g0 + g1 - 1.0).abs() < 1e-9);
            if *fa > 0.0 {
                prop_assert!((0.0..=1.0).contains(g0));
            }
        }
    }

    #[test]
    fn density_is_translation_equivariant((pts, labels) in points(), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let shifted: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + dx, p[1] + dy]).collect();
        let opts = small_grid(RatioMode::CountWeighted);
        let a = kde2d(&pts, &labels, &opts).unwrap();
        let b = kde2d(&shifted, &labels, &opts).unwrap();
        prop_assert!((b.x_range[0] - a.x_range[0] - dx).abs() < 1e-9);
        prop_assert!((b.y_range[1] - a.y_range[1] - dy).abs() < 1e-9);
        let peak = a.f_all.iter().fold(0.0f64, |m, v| m.max(*v));
        for (u, v) in a.f_all.iter().zip(&b.f_all) {
            prop_assert!((u - v).abs() <= 1e-6 * peak);
        }
        for (u, v) in a.g0.iter().zip(&b.g0) {
            prop_assert!((u - v).abs() < 1e-6);
        }
    }

    #[test]
    fn ks_symmetry_and_monotone_invariance(
        a in prop::collection::vec(-100.0..100.0f64, 1..30),
        b in prop::collection::vec(-100.0..100.0f64, 1..30),
    ) {
        let d = ks_statistic(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_statistic(&b, &a).unwrap());
        let warp = |v: &f64| (v / 50.0).exp() * 3.0 + v.powi(3) * 1e-4;
        let wa: Vec<f64> = a.iter().map(warp).collect();
        let wb: Vec<f64> = b.iter().map(warp).collect();
        prop_assert_eq!(d, ks_statistic(&wa, &wb).unwrap());
    }

    #[test]
    fn histogram_counts_are_conserved(
        values in prop::collection::vec(-5.0..5.0f64, 6..50),
        split in 1usize..5,
        bins in 1usize..30,
    ) {
        let n = values.len();
        let fm = FeatureMatrix::new(
            (0..n).map(|i| i.to_string()).collect(),
            vec![column("x", values.clone()), column("y", values.iter().map(|v| v * v).collect())],
        )
        .unwrap();
        let a: Vec<usize> = (0..n).filter(|i| i % split == 0).collect();
        let b: Vec<usize> = (0..n).filter(|i| i % split != 0).collect();
        prop_assume!(!b.is_empty());
        for h in ordered_histograms(&fm, &a, &b, bins).unwrap() {
            prop_assert_eq!(h.counts_a.iter().sum::<usize>(), a.len());
            prop_assert_eq!(h.counts_b.iter().sum::<usize>(), b.len());
            prop_assert_eq!(h.edges.len(), bins + 1);
        }
    }

    #[test]
    fn swarm_ignores_input_order(values in prop::collection::vec(0.0..10.0f64, 1..40), rot in 0usize..40) {
        let ids: Vec<String> = (0..values.len()).map(|i| format!("n{i:02}")).collect();
        let coords = swarm_coordinates(&ids, &values, 0.3);
        let k = rot % values.len();
        let mut ids2 = ids.clone();
        let mut values2 = values.clone();
        ids2.rotate_left(k);
        values2.rotate_left(k);
        let coords2 = swarm_coordinates(&ids2, &values2, 0.3);
        for (i, id) in ids.iter().enumerate() {
            let j = ids2.iter().position(|x| x == id).unwrap();
            prop_assert_eq!(coords[i], coords2[j]);
        }
    }
}

#[test]
fn shifted_attribute_sorts_first_with_full_separation() {
    let base: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut shifted = base.clone();
    for v in shifted.iter_mut().skip(10) {
        *v += 100.0;
    }
    let fm = FeatureMatrix::new(
        (0..20).map(|i| i.to_string()).collect(),
        vec![column("calm", base.clone()), column("moved", shifted), column("also_calm", base)],
    )
    .unwrap();
    let a: Vec<usize> = (0..10).collect();
    let b: Vec<usize> = (10..20).collect();
    let hs = ordered_histograms(&fm, &a, &b, 10).unwrap();
    assert_eq!(hs[0].attribute, "moved");
    assert_eq!(hs[0].ks, 1.0);

    let same = ordered_histograms(&fm, &a, &a, 10).unwrap();
    let names: Vec<&str> = same.iter().map(|h| h.attribute.as_str()).collect();
    assert_eq!(names, ["also_calm", "calm", "moved"]);
    assert!(same.iter().all(|h| h.ks == 0.0));
}

#[test]
fn ks_worked_example() {
    assert!((ks_statistic(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(ks_statistic(&[1.0, 2.0], &[10.0, 11.0]).unwrap(), 1.0);
    assert_eq!(ks_statistic(&[4.0, 1.0], &[1.0, 4.0]).unwrap(), 0.0);
}

#[test]
fn raster_is_a_pure_function_of_the_field() {
    let pts = [[0.0, 0.0], [1.0, 0.5], [2.0, 2.0], [2.5, 1.0]];
    let labels = [Class::Zero, Class::Zero, Class::One, Class::One];
    let opts = KdeOptions {
        width: 32,
        height: 32,
        bandwidth: Bandwidth::Fixed { x: 0.5, y: 0.5 },
        ..KdeOptions::default()
    };
    let f = kde2d(&pts, &labels, &opts).unwrap();
    let a = render_two_class(&f);
    let b = render_two_class(&f.clone());
    assert_eq!(a.image.to_png().unwrap(), b.image.to_png().unwrap());
    assert_eq!(a, b);
}

#[test]
fn layout_geometry_and_determinism() {
    let p3 = test_graphs::path(3);
    let opts = LayoutOptions::default();
    let l = force_layout(&p3, &opts);
    let dist = |i: usize, j: usize| {
        let (a, b) = (l.positions[i], l.positions[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    };
    assert!(dist(0, 1) < dist(0, 2));
    assert!(dist(2, 1) < dist(0, 2));
    assert_eq!(force_layout(&p3, &opts), l);

    let ring: Vec<(usize, usize)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
    let net = test_graphs::from_edges(12, &ring);
    let a = force_layout(&net, &LayoutOptions { seed: 4, ..opts.clone() });
    let b = force_layout(&net, &LayoutOptions { seed: 4, ..opts });
    assert_eq!(a, b);
    assert!(a.positions.iter().all(|p| p[0].is_finite() && p[1].is_finite()));
}
