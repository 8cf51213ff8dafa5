use proptest::prelude::*;
use rotorgw::srw_gamma::{gamma_recursion, CdfOperator};
use rotorgw::*;

mod common;
use common::xi;

fn cdf_from_weights(weights: &[u32], grid: usize) -> DiscretizedCDF {
    // weights spread over the cells (i-1, i], i = 1..=grid
    let total: f64 = weights.iter().map(|&w| f64::from(w)).sum::<f64>().max(1.0);
    let mut values = vec![0.0; grid + 1];
    let mut acc = 0.0;
    for i in 1..=grid {
        acc += f64::from(weights[(i - 1) % weights.len()]);
        values[i] = (acc / total).min(1.0);
    }
    let last = values[grid];
    values.iter_mut().for_each(|v| *v /= last);
    DiscretizedCDF::new(values).unwrap()
}

fn pointwise_max(a: &DiscretizedCDF, b: &DiscretizedCDF) -> DiscretizedCDF {
    DiscretizedCDF::new(a.values().iter().zip(b.values()).map(|(x, y)| x.max(*y)).collect()).unwrap()
}

/// `a` and `b` agree up to a horizontal shift of `cells` grid cells of the
/// coarser grid, plus `tol` vertically.
fn within_cells(a: &DiscretizedCDF, b: &DiscretizedCDF, cells: f64, tol: f64) -> bool {
    let r = cells * a.cell_width().max(b.cell_width());
    let fine = a.grid_size().max(b.grid_size());
    (0..=fine).all(|i| {
        let t = i as f64 / fine as f64;
        let (fa, fb) = (a.eval(t), b.eval(t));
        fa <= b.eval(t + r) + tol && fb <= a.eval(t + r) + tol && fa + tol >= b.eval(t - r) && fb + tol >= a.eval(t - r)
    })
}

const LAWS: [&str; 4] = ["p1=1", "p2=1/2,p3=1/2", "p1=1/3,p2=1/3,p4=1/3", "p1=1/2,p3=1/2"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_keeps_cdfs_valid_and_ordered(
        law in 0usize..4,
        w1 in prop::collection::vec(0u32..10, 1..40),
        w2 in prop::collection::vec(0u32..10, 1..40),
    ) {
        prop_assume!(w1.iter().any(|&w| w > 0) && w2.iter().any(|&w| w > 0));
        let grid = 128;
        let op = CdfOperator::new(&xi(LAWS[law]), grid).unwrap();
        let low = cdf_from_weights(&w1, grid);
        let high = pointwise_max(&low, &cdf_from_weights(&w2, grid));
        let (k_low, k_high) = (op.apply(&low).unwrap(), op.apply(&high).unwrap());
        prop_assert!(DiscretizedCDF::new(k_low.values().to_vec()).is_ok());
        prop_assert_eq!(k_low.values()[grid], 1.0);
        for (a, b) in k_low.values().iter().zip(k_high.values()) {
            prop_assert!(a <= &(b + 1e-12), "{} > {}", a, b);
        }
    }

    #[test]
    fn bounds_bracket_and_tighten_with_depth(law in 1usize..4, seed in 0u64..1000) {
        let dist = xi(LAWS[law]);
        let mut previous = GammaBounds { lower: 0.0, upper: 1.0, depth: 0 };
        for h in 1..=8 {
            let b = keyed_gamma_bounds(&dist, seed, h);
            prop_assert!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0);
            prop_assert!(b.lower >= previous.lower - 1e-15);
            prop_assert!(b.upper <= previous.upper + 1e-15);
            previous = b;
        }
    }
}

#[test]
fn fixed_point_is_stable_under_grid_doubling() {
    for law in ["p1=1/2,p3=1/2", "p2=1/2,p4=1/2", "p1=1/4,p2=1/4,p3=1/2"] {
        let dist = xi(law);
        let coarse = cdf_fixed_point(&dist, &FixedPointOptions { grid: 2048, ..Default::default() }).unwrap();
        let fine = cdf_fixed_point(&dist, &FixedPointOptions { grid: 4096, ..Default::default() }).unwrap();
        assert!(coarse.converged && fine.converged, "{law}");
        assert!(within_cells(&coarse.cdf, &fine.cdf, 2.0, 1e-6), "{law}");
    }
}

#[test]
fn ternary_fixed_point_is_a_step_at_two_thirds() {
    let fp = cdf_fixed_point(&xi("p3=1"), &FixedPointOptions::default()).unwrap();
    assert!(fp.converged && fp.iterations <= 200);
    assert!(fp.cdf.mass_near(2.0 / 3.0, 1.0) > 1.0 - 1e-9);
}

#[test]
fn half_line_mass_moves_to_zero() {
    let fp =
        cdf_fixed_point(&xi("p1=1"), &FixedPointOptions { grid: 512, max_iter: 5000, ..Default::default() }).unwrap();
    let cdf = &fp.cdf;
    assert!(cdf.eval(2.0 * cdf.cell_width()) > 1.0 - 1e-6);
    assert!(cdf.mean() < 2.0 * cdf.cell_width());
}

#[test]
fn fixed_point_mean_matches_sampled_trees() {
    let dist = xi("p1=1/2,p2=1/2");
    let fp = cdf_fixed_point(&dist, &FixedPointOptions::default()).unwrap();
    let trees = 400;
    let mc = (0..trees).map(|seed| keyed_gamma_bounds(&dist, seed, 16).upper).sum::<f64>() / trees as f64;
    assert!((fp.cdf.mean() - mc).abs() < 0.03, "{} vs {mc}", fp.cdf.mean());
}

#[test]
fn raw_zero_boundary_collapses() {
    let mut a = TreeArena::new(OffspringDistribution::deterministic(3).unwrap(), 0);
    assert_eq!(gamma_recursion(&mut a, 6, 0.0).unwrap(), 0.0);
    let b = gamma_bounds(&mut a, 6).unwrap();
    assert!((b.lower - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn hitting_csv_layout() {
    let mut a = TreeArena::new(OffspringDistribution::deterministic(2).unwrap(), 0);
    let sol = solve_hitting(&mut a, &SinkSet::level(2)).unwrap();
    let csv = sol.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,h"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert!((first[1].parse::<f64>().unwrap() - sol.root_value()).abs() < 1e-12);
}
