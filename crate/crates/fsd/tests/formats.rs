//! Round-trip and error-path tests for the file formats.

use std::path::Path;

use fsd_core::geometry::Point2;
use fsd_core::landmarks::{ExpressionLabel, LandmarkScheme, SampleMeta};
use fsd_core::pipeline::{
    extract_features, ExtractionConfig, FeatureMatrix, RegionMap,
};
use fsd_core::svm::{ova_train, SvmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use fsd::error::CliError;
use fsd::formats::features::{read_features, write_features};
use fsd::formats::landmarks::{parse_landmark_file, write_plain, write_pts};
use fsd::formats::manifest::read_manifest;
use fsd::formats::model::{load_model, save_model, ExtractionEcho};
use fsd::formats::regionmap::{read_region_map, write_region_map};
use fsd::synth::{deform, template_face};

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            Point2::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3))
        })
        .collect()
}

#[test]
fn plain_and_pts_encodings_parse_to_the_same_points() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let points = random_points(&mut rng, 68);
        let plain = dir.path().join(format!("p{trial}.txt"));
        let pts = dir.path().join(format!("p{trial}.pts"));
        write_plain(&plain, &points).unwrap();
        write_pts(&pts, &points).unwrap();
        let a = parse_landmark_file(&plain, LandmarkScheme::Ibug68).unwrap();
        let b = parse_landmark_file(&pts, LandmarkScheme::Ibug68).unwrap();
        assert_eq!(a.points(), points.as_slice());
        assert_eq!(b.points(), points.as_slice());
    }
}

#[test]
fn landmark_errors_carry_line_numbers() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2\n3 4 5\n").unwrap();
    match parse_landmark_file(&bad, LandmarkScheme::Ibug68) {
        Err(CliError::Format { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a format error, got {other:?}"),
    }
    let wrong_count = dir.path().join("short.txt");
    std::fs::write(&wrong_count, "1 2\n3 4\n").unwrap();
    assert!(matches!(
        parse_landmark_file(&wrong_count, LandmarkScheme::Ibug68),
        Err(CliError::Format { .. })
    ));
    let unclosed = dir.path().join("open.pts");
    std::fs::write(&unclosed, "version: 1\nn_points: 1\n{\n1 2\n").unwrap();
    assert!(matches!(
        parse_landmark_file(&unclosed, LandmarkScheme::Ibug68),
        Err(CliError::Format { .. })
    ));
}

#[test]
fn feature_csv_round_trips_every_float_bit() {
    let dir = TempDir::new().unwrap();
    let map = RegionMap::default_for(LandmarkScheme::Ibug68);
    let config = ExtractionConfig::default();
    let mut metas = Vec::new();
    let mut rows = Vec::new();
    let mut layout = None;
    for (i, label) in ExpressionLabel::ALL.iter().enumerate() {
        let mut points = template_face();
        deform(*label, &mut points);
        let set =
            fsd_core::landmarks::LandmarkSet::new(points, LandmarkScheme::Ibug68, None).unwrap();
        let fused = extract_features(&set, &map, &config).unwrap();
        layout = Some(fused.layout);
        rows.push(fused.values);
        metas.push(SampleMeta {
            sample_id: format!("s{i}"),
            subject_id: format!("u{i}"),
            label: *label,
        });
    }
    let layout = layout.unwrap();
    let matrix = FeatureMatrix::from_rows(&rows).unwrap();
    let path = dir.path().join("f.csv");
    write_features(&path, &metas, &matrix, &layout).unwrap();

    let back = read_features(&path).unwrap();
    assert_eq!(back.layout, layout);
    assert_eq!(back.metas, metas);
    // exact f64 equality: shortest-round-trip formatting loses nothing
    assert_eq!(back.matrix.data(), matrix.data());
}

#[test]
fn manifest_rejects_duplicates_and_missing_columns() {
    let dir = TempDir::new().unwrap();
    let dup = dir.path().join("dup.csv");
    std::fs::write(
        &dup,
        "sample_id,subject_id,label,landmark_path\na,u1,AN,x.txt\na,u2,HA,y.txt\n",
    )
    .unwrap();
    match read_manifest(&dup) {
        Err(CliError::Format { line, msg, .. }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("duplicate"), "message was: {msg}");
        }
        other => panic!("expected duplicate error, got {other:?}"),
    }

    let missing = dir.path().join("missing.csv");
    std::fs::write(&missing, "sample_id,subject_id,label\na,u1,AN\n").unwrap();
    assert!(matches!(read_manifest(&missing), Err(CliError::Format { line: 1, .. })));

    let bad_label = dir.path().join("label.csv");
    std::fs::write(
        &bad_label,
        "sample_id,subject_id,label,landmark_path\na,u1,XX,x.txt\n",
    )
    .unwrap();
    assert!(matches!(read_manifest(&bad_label), Err(CliError::Format { .. })));
}

#[test]
fn manifest_resolves_paths_against_its_directory() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(
        &manifest,
        "sample_id,subject_id,label,landmark_path,scheme\na,u1,AN,lm/a.txt,tracker49\nb,u1,HA,lm/b.txt,\n",
    )
    .unwrap();
    let entries = read_manifest(&manifest).unwrap();
    assert_eq!(entries[0].landmark_path, dir.path().join("lm/a.txt"));
    assert_eq!(entries[0].scheme, Some(LandmarkScheme::Tracker49));
    assert_eq!(entries[1].scheme, None);
}

#[test]
fn region_map_file_round_trips() {
    let dir = TempDir::new().unwrap();
    for scheme in [LandmarkScheme::Ibug68, LandmarkScheme::Tracker49] {
        let map = RegionMap::default_for(scheme);
        let path = dir.path().join(format!("{}.map", scheme.name()));
        write_region_map(&path, &map).unwrap();
        let back = read_region_map(&path).unwrap();
        assert_eq!(back.scheme(), map.scheme());
        assert_eq!(back.regions(), map.regions());
    }
}

#[test]
fn region_map_rejects_out_of_range_indices() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.map");
    std::fs::write(&path, "scheme: ibug68\nregion r1 generic polygon 0 1 99\n").unwrap();
    assert!(read_region_map(&path).is_err());
}

#[test]
fn model_json_round_trips_with_extraction_echo() {
    let dir = TempDir::new().unwrap();
    let map = RegionMap::default_for(LandmarkScheme::Ibug68);
    let config = ExtractionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut metas = Vec::new();
    let mut rows = Vec::new();
    let mut layout = None;
    for label in [ExpressionLabel::Angry, ExpressionLabel::Happy, ExpressionLabel::Surprised] {
        for k in 0..4 {
            let mut points = template_face();
            deform(label, &mut points);
            for p in &mut points {
                p.x += rng.gen_range(-1.0..1.0);
                p.y += rng.gen_range(-1.0..1.0);
            }
            let set =
                fsd_core::landmarks::LandmarkSet::new(points, LandmarkScheme::Ibug68, None)
                    .unwrap();
            let fused = extract_features(&set, &map, &config).unwrap();
            layout = Some(fused.layout);
            rows.push(fused.values);
            metas.push(SampleMeta {
                sample_id: format!("{}{k}", label.code()),
                subject_id: format!("u{k}"),
                label,
            });
        }
    }
    let layout = layout.unwrap();
    let matrix = FeatureMatrix::from_rows(&rows).unwrap();
    let labels: Vec<ExpressionLabel> = metas.iter().map(|m| m.label).collect();
    let params = SvmParams::new(4.0, 0.01);
    let model = ova_train(&matrix, &labels, &params, layout.fingerprint()).unwrap();

    let path = dir.path().join("model.json");
    let echo = ExtractionEcho { region_map: map, config };
    save_model(&path, &model, &layout, Some(&echo)).unwrap();
    let loaded = load_model(&path).unwrap();

    assert_eq!(loaded.model, model);
    assert_eq!(loaded.layout, layout);
    let back = loaded.extraction.expect("echo was saved");
    assert_eq!(back.region_map.regions(), echo.region_map.regions());
    assert_eq!(back.config, echo.config);

    // without the echo the loader reports its absence
    let bare = dir.path().join("bare.json");
    save_model(&bare, &model, &layout, None).unwrap();
    assert!(load_model(&bare).unwrap().extraction.is_none());
}

#[test]
fn model_loader_rejects_foreign_and_tampered_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.json");
    std::fs::write(&path, "{\"format\":\"other\",\"version\":1}").unwrap();
    assert!(matches!(load_model(&path), Err(CliError::Format { .. })));

    std::fs::write(&path, "not json at all").unwrap();
    assert!(matches!(load_model(&path), Err(CliError::Format { .. })));

    assert!(matches!(
        load_model(Path::new("/nonexistent/model.json")),
        Err(CliError::Io { .. })
    ));
}
