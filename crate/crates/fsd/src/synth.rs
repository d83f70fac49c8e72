//! Synthetic landmark dataset: a 68-point neutral template plus one
//! deterministic deformation profile per expression, with optional Gaussian
//! jitter. Image coordinates (y grows downward); magnitudes in pixels.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use fsd_core::geometry::Point2;
use fsd_core::landmarks::ExpressionLabel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::formats::landmarks::write_plain;
use crate::formats::manifest::write_manifest;

pub struct SynthSpec {
    pub classes: usize,
    pub per_class: usize,
    pub noise: f64,
    pub seed: u64,
}

pub struct SynthOutput {
    pub manifest_path: PathBuf,
    pub files_written: usize,
}

/// 68-point neutral face in the iBUG ordering: jaw 0-16, brows 17-26, nose
/// bridge 27-30, nose base 31-35, eyes 36-47, outer lip 48-59, inner 60-67.
pub fn template_face() -> Vec<Point2> {
    let mut p = Vec::with_capacity(68);
    for i in 0..17 {
        let t = i as f64 / 16.0 * PI;
        p.push(Point2::new(100.0 - 80.0 * t.cos(), 80.0 + 140.0 * t.sin()));
    }
    let brow_x = [35.0, 49.0, 63.0, 77.0, 91.0];
    let brow_y = [75.0, 68.0, 65.0, 68.0, 73.0];
    for i in 0..5 {
        p.push(Point2::new(brow_x[i], brow_y[i]));
    }
    for i in (0..5).rev() {
        p.push(Point2::new(200.0 - brow_x[i], brow_y[i]));
    }
    for i in 0..4 {
        p.push(Point2::new(100.0, 85.0 + 15.0 * i as f64));
    }
    let nose_x = [84.0, 92.0, 100.0, 108.0, 116.0];
    let nose_y = [145.0, 148.0, 150.0, 148.0, 145.0];
    for i in 0..5 {
        p.push(Point2::new(nose_x[i], nose_y[i]));
    }
    let eye_dx = [-15.0, -5.0, 5.0, 15.0, 5.0, -5.0];
    let eye_dy = [0.0, -5.0, -5.0, 0.0, 4.0, 4.0];
    for cx in [63.0, 137.0] {
        for i in 0..6 {
            p.push(Point2::new(cx + eye_dx[i], 92.0 + eye_dy[i]));
        }
    }
    let outer = [
        (70.0, 180.0),
        (79.0, 172.0),
        (90.0, 168.0),
        (100.0, 166.0),
        (110.0, 168.0),
        (121.0, 172.0),
        (130.0, 180.0),
        (121.0, 189.0),
        (110.0, 193.0),
        (100.0, 195.0),
        (90.0, 193.0),
        (79.0, 189.0),
    ];
    let inner = [
        (78.0, 180.0),
        (89.0, 175.0),
        (100.0, 174.0),
        (111.0, 175.0),
        (122.0, 180.0),
        (111.0, 185.0),
        (100.0, 186.0),
        (89.0, 185.0),
    ];
    for (x, y) in outer.iter().chain(inner.iter()) {
        p.push(Point2::new(*x, *y));
    }
    p
}

/// Adds the expression's muscle-move offsets to a neutral template.
pub fn deform(label: ExpressionLabel, p: &mut [Point2]) {
    let mut d = |i: usize, dx: f64, dy: f64| {
        p[i].x += dx;
        p[i].y += dy;
    };
    match label {
        ExpressionLabel::Neutral => {}
        ExpressionLabel::Happy => {
            // smile: corners far up and out, lips thinned, cheeks lift lids
            d(48, -12.0, -14.0);
            d(54, 12.0, -14.0);
            d(60, -9.0, -10.0);
            d(64, 9.0, -10.0);
            d(49, -6.0, -8.0);
            d(53, 6.0, -8.0);
            d(59, -6.0, -7.0);
            d(55, 6.0, -7.0);
            d(50, -2.0, -3.0);
            d(52, 2.0, -3.0);
            d(58, -2.0, -3.0);
            d(56, 2.0, -3.0);
            for i in [40, 41, 46, 47] {
                d(i, 0.0, -3.0);
            }
        }
        ExpressionLabel::Sad => {
            // corners droop inward, inner brow ends slant up, lids sink
            d(48, 5.0, 12.0);
            d(54, -5.0, 12.0);
            d(60, 4.0, 9.0);
            d(64, -4.0, 9.0);
            d(59, 2.0, 8.0);
            d(55, -2.0, 8.0);
            d(49, 2.0, 4.0);
            d(53, -2.0, 4.0);
            d(21, 0.0, -10.0);
            d(22, 0.0, -10.0);
            d(20, 0.0, -6.0);
            d(23, 0.0, -6.0);
            d(19, 0.0, -3.0);
            d(24, 0.0, -3.0);
            for i in [37, 38, 43, 44] {
                d(i, 0.0, 3.0);
            }
        }
        ExpressionLabel::Surprised => {
            // jaw drop into a tall O-mouth, widened eyes, raised brows
            d(57, 0.0, 26.0);
            d(56, 0.0, 24.0);
            d(58, 0.0, 24.0);
            d(55, 0.0, 16.0);
            d(59, 0.0, 16.0);
            d(66, 0.0, 22.0);
            d(65, 0.0, 18.0);
            d(67, 0.0, 18.0);
            d(51, 0.0, -4.0);
            d(50, 0.0, -3.0);
            d(52, 0.0, -3.0);
            d(62, 0.0, -3.0);
            d(61, 0.0, -2.0);
            d(63, 0.0, -2.0);
            d(48, 6.0, 4.0);
            d(54, -6.0, 4.0);
            d(60, 5.0, 3.0);
            d(64, -5.0, 3.0);
            for i in [37, 38, 43, 44] {
                d(i, 0.0, -5.0);
            }
            for i in [40, 41, 46, 47] {
                d(i, 0.0, 5.0);
            }
            for i in 17..=26 {
                d(i, 0.0, -14.0);
            }
        }
        ExpressionLabel::Angry => {
            // brows knotted down, narrowed eyes, lips pressed to a sliver
            d(21, 6.0, 12.0);
            d(22, -6.0, 12.0);
            d(20, 3.0, 9.0);
            d(23, -3.0, 9.0);
            d(19, 1.0, 6.0);
            d(24, -1.0, 6.0);
            d(18, 0.0, 4.0);
            d(25, 0.0, 4.0);
            d(17, 0.0, 2.0);
            d(26, 0.0, 2.0);
            for i in [37, 38, 43, 44] {
                d(i, 0.0, 3.0);
            }
            for i in [40, 41, 46, 47] {
                d(i, 0.0, -2.0);
            }
            d(51, 0.0, 4.0);
            d(50, 0.0, 3.0);
            d(52, 0.0, 3.0);
            d(57, 0.0, -4.0);
            d(56, 0.0, -3.0);
            d(58, 0.0, -3.0);
            for i in 61..=63 {
                d(i, 0.0, 3.5);
            }
            for i in 65..=67 {
                d(i, 0.0, -3.5);
            }
            d(48, 4.0, 1.0);
            d(54, -4.0, 1.0);
            d(60, 3.0, 1.0);
            d(64, -3.0, 1.0);
        }
        ExpressionLabel::Fearful => {
            // brows raised with the arch flattened, wide eyes, lips
            // stretched sideways and slightly parted
            d(17, 0.0, -12.0);
            d(26, 0.0, -12.0);
            d(18, 0.0, -11.0);
            d(25, 0.0, -11.0);
            d(19, 0.0, -10.0);
            d(24, 0.0, -10.0);
            d(20, 0.0, -9.0);
            d(23, 0.0, -9.0);
            d(21, 0.0, -8.0);
            d(22, 0.0, -8.0);
            for i in [37, 38, 43, 44] {
                d(i, 0.0, -5.0);
            }
            for i in [40, 41, 46, 47] {
                d(i, 0.0, 4.0);
            }
            d(48, -8.0, 2.0);
            d(54, 8.0, 2.0);
            d(60, -6.0, 1.0);
            d(64, 6.0, 1.0);
            d(57, 0.0, 10.0);
            d(56, 0.0, 9.0);
            d(58, 0.0, 9.0);
            d(55, 0.0, 6.0);
            d(59, 0.0, 6.0);
            d(66, 0.0, 8.0);
            d(65, 0.0, 6.0);
            d(67, 0.0, 6.0);
        }
        ExpressionLabel::Disgusted => {
            // nose scrunch: nostrils up and out, bridge shortened, upper lip
            // raised, brows down without knotting, lower lids squint
            d(31, -4.0, -9.0);
            d(32, -2.0, -9.0);
            d(33, 0.0, -9.0);
            d(34, 2.0, -9.0);
            d(35, 4.0, -9.0);
            d(29, 0.0, 3.0);
            d(30, 0.0, 5.0);
            d(51, 0.0, -8.0);
            d(50, 0.0, -7.0);
            d(52, 0.0, -7.0);
            d(49, 0.0, -5.0);
            d(53, 0.0, -5.0);
            for i in 61..=63 {
                d(i, 0.0, -6.0);
            }
            for i in 17..=26 {
                d(i, 0.0, 7.0);
            }
            for i in [40, 41, 46, 47] {
                d(i, 0.0, -4.0);
            }
        }
    }
}

#[derive(Serialize)]
struct SynthEcho<'a> {
    generator: &'a str,
    seed: u64,
    classes: usize,
    per_class: usize,
    noise: f64,
    scheme: &'a str,
}

/// Writes `landmarks/{CODE}_{subject:03}.txt`, `manifest.csv`, and
/// `synth.json` under `out_dir`. Subject k appears once in every class, so
/// both fold modes apply to the output. Same spec → byte-identical files.
pub fn generate(out_dir: &Path, spec: &SynthSpec) -> Result<SynthOutput> {
    if spec.classes < 1 || spec.classes > ExpressionLabel::ALL.len() {
        return Err(CliError::Usage(format!(
            "--classes must be 1..={}, got {}",
            ExpressionLabel::ALL.len(),
            spec.classes
        )));
    }
    if spec.per_class < 1 {
        return Err(CliError::Usage("--per-class must be at least 1".to_string()));
    }
    if !spec.noise.is_finite() || spec.noise < 0.0 {
        return Err(CliError::Usage(format!(
            "--noise must be finite and >= 0, got {}",
            spec.noise
        )));
    }
    let landmark_dir = out_dir.join("landmarks");
    std::fs::create_dir_all(&landmark_dir).map_err(|e| CliError::io(&landmark_dir, e))?;

    let labels = &ExpressionLabel::ALL[..spec.classes];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.noise * 6.0;
    let jitter = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).expect("sigma is finite and positive"))
    } else {
        None
    };

    let mut rows = Vec::with_capacity(spec.classes * spec.per_class);
    let mut files_written = 0;
    for label in labels {
        for subj in 0..spec.per_class {
            let mut points = template_face();
            deform(*label, &mut points);
            if let Some(normal) = &jitter {
                for p in &mut points {
                    p.x += normal.sample(&mut rng);
                    p.y += normal.sample(&mut rng);
                }
            }
            let file = format!("{}_{subj:03}.txt", label.code());
            write_plain(&landmark_dir.join(&file), &points)?;
            files_written += 1;
            rows.push((
                format!("{}_{subj:03}", label.code()),
                format!("subj{subj:03}"),
                *label,
                format!("landmarks/{file}"),
            ));
        }
    }

    let manifest_path = out_dir.join("manifest.csv");
    write_manifest(&manifest_path, &rows)?;

    let echo = SynthEcho {
        generator: "synth",
        seed: spec.seed,
        classes: spec.classes,
        per_class: spec.per_class,
        noise: spec.noise,
        scheme: "ibug68",
    };
    let json_path = out_dir.join("synth.json");
    let body = serde_json::to_string_pretty(&echo).expect("plain struct serializes");
    std::fs::write(&json_path, body + "\n").map_err(|e| CliError::io(&json_path, e))?;

    Ok(SynthOutput { manifest_path, files_written })
}
