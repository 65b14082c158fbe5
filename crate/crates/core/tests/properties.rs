use hextop::mesh::SQRT3;
use hextop::optimizer::DensityMap;
use hextop::{build_filter, build_mesh, oc_update, FilterMode, MeshSpec, PassiveMask};
use proptest::prelude::*;

#[test]
fn interior_elements_have_seven_or_more_neighbours() {
    let mesh = build_mesh(MeshSpec::new(60, 20).unwrap()).unwrap();
    let r = 2.4 * SQRT3;
    let f = build_filter(mesh.centroids(), r, FilterMode::Sensitivity).unwrap();
    let [x0, x1, y0, y1] = mesh.bounds();
    let mut interior = 0;
    for (e, c) in mesh.centroids().iter().enumerate() {
        if c[0] - r > x0 && c[0] + r < x1 && c[1] - r > y0 && c[1] + r < y1 {
            interior += 1;
            // itself plus the six edge neighbours at distance sqrt3
            assert!(f.neighbour_count(e) >= 7, "element {e}: {}", f.neighbour_count(e));
        }
    }
    assert!(interior > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filter_rows_are_symmetric_and_positive(nx in 1usize..8, ny in 1usize..8, k in 0.3f64..3.0) {
        let mesh = build_mesh(MeshSpec::new(nx, ny).unwrap()).unwrap();
        let f = build_filter(mesh.centroids(), k * SQRT3, FilterMode::Density).unwrap();
        for j in 0..mesh.nelem() {
            let row: Vec<_> = f.row(j).collect();
            prop_assert!(row.iter().any(|&(i, _)| i == j));
            for (i, w) in row {
                prop_assert!(w > 0.0);
                let back = f.row(i).find(|&(jj, _)| jj == j).map(|(_, w)| w);
                prop_assert_eq!(back, Some(w));
            }
        }
    }

    #[test]
    fn oc_update_respects_bounds_and_volume(
        seed in prop::collection::vec((0.01f64..1.0, 0.01f64..10.0), 24),
        volfrac in 0.2f64..0.8,
        mode in prop_oneof![Just(FilterMode::Null), Just(FilterMode::Density)],
    ) {
        let mesh = build_mesh(MeshSpec::new(6, 4).unwrap()).unwrap();
        let filter = build_filter(mesh.centroids(), 1.5 * SQRT3, mode).unwrap();
        let mask = PassiveMask::all_active(24);
        let x: Vec<f64> = seed.iter().map(|s| s.0).collect();
        let dc: Vec<f64> = seed.iter().map(|s| -s.1).collect();
        let dv = match mode {
            FilterMode::Density => filter.chainrule_density(&[1.0; 24]).unwrap(),
            _ => vec![1.0; 24],
        };
        let map = DensityMap { filter: &filter, mask: &mask };
        let target = volfrac * 24.0;
        let bound = |d: f64| -> f64 {
            let xb: Vec<f64> = x.iter().map(|v| (v + d).clamp(0.0, 1.0)).collect();
            map.physical(&xb).iter().sum()
        };
        let step = oc_update(&x, &dc, &dv, volfrac, 0.2, &map);
        if bound(-0.2) > target {
            prop_assert!(step.is_err());
            return Ok(());
        }
        let step = step.unwrap();
        for (new, old) in step.x.iter().zip(&x) {
            prop_assert!((0.0..=1.0).contains(new));
            prop_assert!((new - old).abs() <= 0.2 + 1e-12);
        }
        let sum: f64 = map.physical(&step.x).iter().sum();
        prop_assert_eq!(sum, step.volume);
        if bound(0.2) > target {
            prop_assert!((sum / target - 1.0).abs() <= 1e-3);
        } else {
            prop_assert!(sum <= target * (1.0 + 1e-12));
        }
    }
}
