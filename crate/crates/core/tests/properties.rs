//! Invariant checks that cut across modules: symmetry of the pairwise
//! constants, the dual QP reduction against the brute-force grid oracle,
//! regularity estimates of the convex and general extensions, and the
//! refinement behavior of the Hölder probe.

mod common;

use jet_extend::convex::{self, ConvexExtensionSpec};
use jet_extend::holder::{grid_sup_inf_conv, HolderProbeConfig};
use jet_extend::oracle::{self, BoxSampler, GridSpec};
use jet_extend::simplex::SimplexQuadraticProblem;
use jet_extend::whitney::{mu_bar, WhitneyExtension};
use jet_extend::{BoundingBox, Modulus, Site, TaylorField1};

use rand::Rng;

fn transform_field(field: &TaylorField1, f: impl Fn(&Site) -> Site) -> TaylorField1 {
    TaylorField1::new(field.dim(), field.sites().iter().map(f).collect()).unwrap()
}

fn assert_close(a: f64, b: f64, rel: f64, what: &str) {
    assert!(
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs())),
        "{what}: {a} vs {b}"
    );
}

#[test]
fn constants_invariant_under_translation_and_affine_shift() {
    let mut rng = common::rng(21);
    for i in 0..50usize {
        let dim = 1 + i % 3;
        let field = common::general_field(&mut rng, dim, 3 + i % 6);
        let base = field.constants();

        let shift: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let translated = transform_field(&field, |s| {
            Site::new(
                s.location.iter().zip(&shift).map(|(a, b)| a + b).collect(),
                s.value,
                s.gradient.clone(),
            )
        });
        let t = translated.constants();
        assert_close(base.k1, t.k1, 1e-10, "K1 under translation");
        assert_close(base.k2, t.k2, 1e-10, "K2 under translation");
        assert_close(base.gamma1, t.gamma1, 1e-10, "Gamma1 under translation");

        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-2.0..2.0);
        let shifted = transform_field(&field, |s| {
            Site::new(
                s.location.clone(),
                s.value + c.iter().zip(&s.location).map(|(x, y)| x * y).sum::<f64>() + b,
                s.gradient.iter().zip(&c).map(|(x, y)| x + y).collect(),
            )
        });
        let a = shifted.constants();
        assert_close(base.k1, a.k1, 1e-10, "K1 under affine shift");
        assert_close(base.k2, a.k2, 1e-10, "K2 under affine shift");
        assert_close(base.gamma1, a.gamma1, 1e-10, "Gamma1 under affine shift");
    }
}

#[test]
fn constants_invariant_under_rotation_and_scaling() {
    let mut rng = common::rng(22);
    for i in 0..50usize {
        let field = common::general_field(&mut rng, 2, 3 + i % 6);
        let base = field.constants();

        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (phi.cos(), phi.sin());
        let rot = |p: &[f64]| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let rotated = transform_field(&field, |site| {
            Site::new(rot(&site.location), site.value, rot(&site.gradient))
        });
        let r = rotated.constants();
        assert_close(base.k1, r.k1, 1e-10, "K1 under rotation");
        assert_close(base.k2, r.k2, 1e-10, "K2 under rotation");
        assert_close(base.gamma1, r.gamma1, 1e-10, "Gamma1 under rotation");

        let t = rng.gen_range(0.1..5.0);
        let scaled = transform_field(&field, |site| {
            Site::new(
                site.location.clone(),
                t * site.value,
                site.gradient.iter().map(|g| t * g).collect(),
            )
        });
        let sc = scaled.constants();
        assert_close(t * base.k1, sc.k1, 1e-10, "K1 under scaling");
        assert_close(t * base.k2, sc.k2, 1e-10, "K2 under scaling");
        assert_close(t * base.gamma1, sc.gamma1, 1e-10, "Gamma1 under scaling");
        if let (Modulus::Feasible(m0), Modulus::Feasible(m1)) = (&base.modulus, &sc.modulus) {
            assert_close(t * m0, *m1, 1e-10, "modulus under scaling");
        }
    }
}

#[test]
fn feasible_modulus_satisfies_every_pair() {
    let mut rng = common::rng(23);
    for i in 0..100usize {
        let dim = 1 + i % 3;
        let (field, _) = common::quadratic_trace(&mut rng, dim, 3 + i % 8);
        let m = match field.convexity_modulus() {
            Modulus::Feasible(m) => m * (1.0 + 1e-12),
            Modulus::Infeasible { .. } => unreachable!("trace fields are feasible"),
        };
        if m == 0.0 {
            continue;
        }
        for s1 in field.sites() {
            for s2 in field.sites() {
                if std::ptr::eq(s1, s2) {
                    continue;
                }
                let dv2: f64 = s1
                    .gradient
                    .iter()
                    .zip(&s2.gradient)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let rhs = s1.affine(&s2.location) + dv2 / (2.0 * m);
                assert!(
                    s2.value >= rhs - 1e-12 * (1.0 + s2.value.abs()),
                    "pair inequality fails at field {i}"
                );
            }
        }
    }
}

#[test]
fn qp_objective_is_concave() {
    let mut rng = common::rng(24);
    for _ in 0..50 {
        let m = rng.gen_range(2..6);
        let n = rng.gen_range(1..4);
        let linear: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let columns: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let p = SimplexQuadraticProblem::new(linear, columns, rng.gen_range(0.1..2.0)).unwrap();
        for _ in 0..20 {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let l1: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let l2: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let t = rng.gen_range(0.0..1.0);
            let mix: Vec<f64> = l1
                .iter()
                .zip(&l2)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            assert!(
                p.objective(&mix) >= t * p.objective(&l1) + (1.0 - t) * p.objective(&l2) - 1e-12
            );
        }
    }
}

/// The load-bearing identity behind the whole evaluator: the pointwise
/// inf-sup evaluation equals the simplex QP value. Cross-checked against
/// the brute-force grid oracle in 1D and 2D.
#[test]
fn dual_reduction_matches_grid_oracle() {
    // The grid infimum can only overestimate the continuous one, so the
    // lower comparison is sharp. The upper slack is first order in the
    // grid step: the outer objective has kinks (the sup-convolution is
    // piecewise affine plus a quadratic), and a kink minimum lands
    // between nodes with an O(step * slope) miss.
    let mut rng = common::rng(25);
    for dim in [1usize, 2] {
        let points_per_axis = if dim == 1 { 48_001 } else { 1201 };
        let grid = GridSpec::new(vec![-6.0; dim], vec![6.0; dim], points_per_axis).unwrap();
        let step = 12.0 / (points_per_axis - 1) as f64 * (dim as f64).sqrt();
        for i in 0..4usize {
            let (field, _) = common::quadratic_trace(&mut rng, dim, 3 + i);
            let spec = ConvexExtensionSpec::new(field, None, 0.7).unwrap();
            let eps = spec.eps();
            let vmax = spec
                .field()
                .sites()
                .iter()
                .map(|s| s.gradient.iter().map(|t| t * t).sum::<f64>().sqrt())
                .fold(0.0_f64, f64::max);
            let slack = 2.0 * step * (vmax + 4.0 / eps) + 1e-9;
            for _ in 0..3 {
                let x = common::point_in(&mut rng, dim, 1.5);
                let qp = spec.evaluate(&x).unwrap().value;
                // Closed-form sup-convolution, then grid inf-convolution.
                let staged = oracle::grid_infconv(
                    |z| convex::affine_max_supconv(spec.field(), eps, z).unwrap(),
                    eps,
                    &grid,
                    &x,
                );
                assert!(staged >= qp - 1e-9, "{dim}D: staged {staged} below {qp}");
                assert!(staged - qp <= slack, "{dim}D: {qp} vs {staged} (slack {slack})");
            }
        }
    }

    // Fully grid-based double convolution as a second witness (1D, coarser
    // grid: the inner sup runs per outer node).
    let grid = GridSpec::new(vec![-6.0], vec![6.0], 4001).unwrap();
    let step = 12.0 / 4000.0;
    for i in 0..3usize {
        let (field, _) = common::quadratic_trace(&mut rng, 1, 3 + i);
        let spec = ConvexExtensionSpec::new(field, None, 0.7).unwrap();
        let eps = spec.eps();
        let vmax = spec
            .field()
            .sites()
            .iter()
            .map(|s| s.gradient[0].abs())
            .fold(0.0_f64, f64::max);
        let slack = 4.0 * step * (vmax + 4.0 / eps) + 1e-9;
        let x = common::point_in(&mut rng, 1, 1.5);
        let qp = spec.evaluate(&x).unwrap().value;
        let double = oracle::grid_infconv(
            |z| {
                oracle::grid_supconv(
                    |y| convex::affine_max(spec.field(), y).unwrap(),
                    eps,
                    &grid,
                    z,
                )
            },
            eps,
            &grid,
            &x,
        );
        assert!((qp - double).abs() <= slack, "double: {qp} vs {double}");
    }
}

#[test]
fn interpolation_across_eps_fractions() {
    let mut rng = common::rng(26);
    for ef in [0.5, 0.9, 0.999] {
        for i in 0..20usize {
            let dim = 1 + i % 3;
            let (field, _) = common::quadratic_trace(&mut rng, dim, 3 + i % 6);
            let spec = ConvexExtensionSpec::new(field, None, ef).unwrap();
            for site in spec.field().sites().to_vec() {
                let got = spec.extension(&site.location).unwrap();
                assert!((got.value - site.value).abs() <= 1e-8 * (1.0 + site.value.abs()));
                let vnorm = site.gradient.iter().map(|t| t * t).sum::<f64>().sqrt();
                assert!(common::dist(&got.gradient, &site.gradient) <= 1e-7 * (1.0 + vnorm));
            }
        }
    }
}

#[test]
fn sampled_gradient_lipschitz_within_budget() {
    let mut rng = common::rng(27);
    for i in 0..10usize {
        let dim = 1 + i % 3;
        let (field, _) = common::quadratic_trace(&mut rng, dim, 3 + i % 6);
        let spec = ConvexExtensionSpec::new(field, None, 0.9).unwrap();
        let budget = 1.0 / spec.eps();
        let bounds = BoundingBox::around_sites(spec.field(), 1.0);
        let mut sampler = BoxSampler::new(bounds, 31 + i as u64);
        let lip = oracle::sampled_lip_grad(
            |x| spec.extension(x).unwrap().gradient,
            &mut sampler,
            500,
        );
        assert!(lip <= budget * (1.0 + 1e-6), "lip {lip} vs budget {budget}");
    }

    // For the parabola trace the sampled constant approaches M = 2 from
    // below as the convolution parameter tends to its limit.
    let spec = ConvexExtensionSpec::new(common::parabola_trace(), Some(2.0), 1.0 - 1e-8).unwrap();
    let bounds = BoundingBox::new(vec![-2.0], vec![2.0]).unwrap();
    let mut sampler = BoxSampler::new(bounds, 99);
    let lip = oracle::sampled_lip_grad(
        |x| spec.extension(x).unwrap().gradient,
        &mut sampler,
        5000,
    );
    assert!(lip <= 2.0 * (1.0 + 1e-6) && lip > 1.9, "lip = {lip}");
}

#[test]
fn floor_is_smallest_convex_extension() {
    // For fields sampled as traces of a smooth convex g with curvature
    // below the modulus, the piecewise-affine floor stays below g.
    let mut rng = common::rng(28);
    for i in 0..50usize {
        let dim = 1 + i % 3;
        let (field, a) = common::quadratic_trace(&mut rng, dim, 3 + i % 6);
        // Rebuild g from two sites: curvature a, vertex from site data.
        for _ in 0..20 {
            let x = common::point_in(&mut rng, dim, 3.0);
            let floor = convex::affine_max(&field, &x).unwrap();
            // g(x) >= l_s(x) + 0 for its own trace; reconstruct g at x
            // from any site jet: g(x) = l_s(x) + (a/2)|x-s|^2.
            let s = &field.sites()[0];
            let d2: f64 = x
                .iter()
                .zip(&s.location)
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            let g = s.affine(&x) + 0.5 * a * d2;
            assert!(floor <= g + 1e-10, "floor {floor} above g {g}");
        }
    }
}

#[test]
fn whitney_gamma1_lower_bound_and_consistency() {
    let mut rng = common::rng(29);
    for i in 0..12usize {
        let dim = 1 + i % 3;
        let field = common::general_field(&mut rng, dim, 3 + i % 5);
        let ext = WhitneyExtension::build(field, 1.0 - 1e-6).unwrap();
        let bounds = BoundingBox::around_sites(ext.base_field(), 1.0);
        let mut sampler = BoxSampler::new(bounds, 300 + i as u64);

        // Sample containing the sites: restriction monotonicity of a sup.
        let mut points: Vec<Vec<f64>> = ext
            .base_field()
            .sites()
            .iter()
            .map(|s| s.location.clone())
            .collect();
        for _ in 0..60 {
            points.push(sampler.sample());
        }
        let evals = ext.evaluate_batch(&points).unwrap();
        let values: Vec<f64> = evals.iter().map(|e| e.value).collect();
        let grads: Vec<Vec<f64>> = evals.iter().map(|e| e.gradient.clone()).collect();
        let sampled = oracle::gamma1_of_jets(&points, &values, &grads);
        assert!(
            ext.gamma1() <= sampled + 1e-9,
            "field {i}: base {} vs sampled {sampled}",
            ext.gamma1()
        );

        // The sampled functional tracks the sampled Lipschitz constant.
        let mut lip = 0.0_f64;
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                let d = common::dist(&points[a], &points[b]);
                if d > 1e-6 {
                    lip = lip.max(common::dist(&grads[a], &grads[b]) / d);
                }
            }
        }
        assert!(sampled >= lip * 0.999 && sampled <= lip * 1.1 + 1e-9);
    }
}

#[test]
fn mu_bar_is_a_local_minimum_of_the_scan() {
    let mut rng = common::rng(30);
    for _ in 0..200 {
        let k1 = rng.gen_range(0.0..3.0);
        let k2 = rng.gen_range(0.0..3.0);
        if k1 + k2 < 1e-3 {
            continue;
        }
        let mb = mu_bar(k1, k2);
        let h = |mu: f64| mu.max((mu + k2) * (mu + k2) / (mu - 2.0 * k1) - mu);
        for mu in [mb * (1.0 - 1e-3), mb * (1.0 + 1e-3)] {
            if mu > 2.0 * k1 {
                assert!(h(mu) >= h(mb) - 1e-9);
            }
        }
    }
}

#[test]
fn general_extension_is_semiconvex_with_tilt_constant() {
    let mut rng = common::rng(31);
    for i in 0..10usize {
        let dim = 1 + i % 3;
        let field = common::general_field(&mut rng, dim, 3 + i % 5);
        let ext = WhitneyExtension::build(field, 1.0 - 1e-6).unwrap();
        let mu = ext.mu_bar();
        for _ in 0..40 {
            let x = common::point_in(&mut rng, dim, 2.5);
            let y = common::point_in(&mut rng, dim, 2.5);
            let t: f64 = rng.gen_range(0.0..1.0);
            let mix: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            let gx = ext.evaluate(&x).unwrap().value;
            let gy = ext.evaluate(&y).unwrap().value;
            let gm = ext.evaluate(&mix).unwrap().value;
            let d2: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            assert!(
                gm <= t * gx + (1.0 - t) * gy + 0.5 * mu * t * (1.0 - t) * d2 + 1e-8,
                "semiconvexity violated at field {i}"
            );
        }
    }
}

#[test]
fn holder_grid_refines_within_error_estimate() {
    for theta in [0.5, 0.9] {
        let coarse = grid_sup_inf_conv(
            &HolderProbeConfig::new(theta, 1.0, 1.0, 0.5, 2000).unwrap(),
        );
        let fine = grid_sup_inf_conv(
            &HolderProbeConfig::new(theta, 1.0, 1.0, 0.5, 4000).unwrap(),
        );
        assert!(
            (fine.value - coarse.value).abs() <= coarse.error_estimate,
            "theta {theta}: {} -> {} vs estimate {}",
            coarse.value,
            fine.value,
            coarse.error_estimate
        );
    }
}

#[test]
fn end_to_end_general_value_against_grid_oracle() {
    // 1D pipeline: G from the engine vs tilt-subtracted double grid
    // convolution of the tilted floor.
    let field = common::parabola_trace();
    let ext = WhitneyExtension::build(field, 1.0 - 1e-6).unwrap();
    let spec = ext.tilted_spec().unwrap();
    let eps = spec.eps();
    let grid = GridSpec::new(vec![-12.0], vec![12.0], 48001).unwrap();
    for x in [-0.7, 0.0, 0.4] {
        let engine = ext.evaluate(&[x]).unwrap().value;
        let tilted = oracle::grid_infconv(
            |z| convex::affine_max_supconv(spec.field(), eps, z).unwrap(),
            eps,
            &grid,
            &[x],
        );
        let staged = tilted - 0.5 * ext.mu_bar() * x * x;
        assert!((engine - staged).abs() <= 5e-4, "{engine} vs {staged}");
    }
}
