//! Randomized recovery and ordering-invariance checks for the direct
//! least-squares ellipse fit.

use fsd_core::geometry::ellipse::{fit_ellipse, EllipseParams};
use fsd_core::geometry::Point2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_ellipse(rng: &mut ChaCha8Rng) -> EllipseParams {
    let semi_major = rng.gen_range(0.5..20.0);
    let ratio = rng.gen_range(1.0..10.0);
    EllipseParams {
        center: Point2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)),
        semi_major,
        semi_minor: semi_major / ratio,
        rotation: rng.gen_range(0.0..core::f64::consts::PI),
    }
}

fn sample(params: &EllipseParams, k: usize, phase: f64) -> Vec<Point2> {
    (0..k)
        .map(|i| params.point_at(phase + i as f64 / k as f64 * core::f64::consts::TAU))
        .collect()
}

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    let scale = 1.0 + want.abs();
    assert!(
        (got - want).abs() <= tol * scale,
        "{what}: {got} vs {want} (tol {tol})"
    );
}

#[test]
fn fit_recovers_random_ellipses() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..50 {
        let truth = random_ellipse(&mut rng);
        let pts = sample(&truth, 24, rng.gen_range(0.0..1.0));
        let fit = fit_ellipse(&pts).unwrap();
        let e = fit.ellipse;
        assert_close(e.center.x, truth.center.x, 1e-6, &format!("trial {trial} center.x"));
        assert_close(e.center.y, truth.center.y, 1e-6, &format!("trial {trial} center.y"));
        assert_close(e.semi_major, truth.semi_major, 1e-6, &format!("trial {trial} major"));
        assert_close(e.semi_minor, truth.semi_minor, 1e-6, &format!("trial {trial} minor"));
        if truth.semi_major / truth.semi_minor > 1.5 {
            let mut dr = (e.rotation - truth.rotation).abs() % core::f64::consts::PI;
            dr = dr.min(core::f64::consts::PI - dr);
            assert!(dr < 1e-6, "trial {trial} rotation: {} vs {}", e.rotation, truth.rotation);
        }
        assert!(fit.residual < 1e-9, "trial {trial} residual {}", fit.residual);
    }
}

#[test]
fn fit_ignores_point_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..20 {
        let truth = random_ellipse(&mut rng);
        let pts = sample(&truth, 24, 0.3);
        let base = fit_ellipse(&pts).unwrap().ellipse;
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng);
        let permuted = fit_ellipse(&shuffled).unwrap().ellipse;
        assert_close(permuted.center.x, base.center.x, 1e-9, &format!("trial {trial} center.x"));
        assert_close(permuted.center.y, base.center.y, 1e-9, &format!("trial {trial} center.y"));
        assert_close(permuted.semi_major, base.semi_major, 1e-9, &format!("trial {trial} major"));
        assert_close(permuted.semi_minor, base.semi_minor, 1e-9, &format!("trial {trial} minor"));
        let mut dr = (permuted.rotation - base.rotation).abs() % core::f64::consts::PI;
        dr = dr.min(core::f64::consts::PI - dr);
        assert!(dr < 1e-9, "trial {trial} rotation");
    }
}
