use std::fs;
use std::path::Path;

use latentmap::model::{from_json, to_json};
use latentmap::report::{report_csv, REPORT_HEADER};
use latentmap::{load_dataset, load_latents, load_model, save_dataset, save_latents, save_model, Error};
use latentmap_core::{compare_maps, fit_closed_form, synth_ground_truth, Link, SyntheticSpec, TrainMeta};

fn spec() -> SyntheticSpec {
    SyntheticSpec {
        d: 6,
        a: 3,
        n: 25,
        rho: 0.5,
        noise_sigma: 0.05,
        link: Link::Linear,
        seed: 9,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn dataset_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, _) = synth_ground_truth(&spec()).unwrap();
    let (zp, yp) = (dir.path().join("latents.csv"), dir.path().join("labels.csv"));
    save_dataset(&ds, &zp, &yp).unwrap();
    let back = load_dataset(&zp, &yp).unwrap();
    assert_eq!(back, ds);

    let text = fs::read_to_string(&zp).unwrap();
    assert!(text.starts_with("z0,z1,z2,z3,z4,z5\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 26);
    assert!(fs::read_to_string(&yp).unwrap().starts_with("attr_0,attr_1,attr_2\n"));
}

#[test]
fn saving_into_fresh_directory_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    let z = latentmap_core::Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
    let p = dir.path().join("z.csv");
    save_latents(&p, &z).unwrap();
    assert_eq!(
        fs::read_to_string(&p).unwrap(),
        "z0,z1\n1.0000000000000000e0,2.0000000000000000e0\n"
    );
    assert_eq!(load_latents(&p).unwrap(), z);
}

#[test]
fn out_of_range_label_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.csv", "z0\n0.1\n0.2\n");
    let y = write(dir.path(), "y.csv", "smile,age\n0.5,0.5\n0.5,1.5\n");
    match load_dataset(&z, &y) {
        Err(e @ Error::Cell { line: 3, column: 2, .. }) => {
            assert_eq!(e.exit_code(), 1);
            let msg = e.to_string();
            assert!(msg.contains("y.csv") && msg.contains("1.5"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_numeric_token_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.csv", "z0,z1\n0.1,0.2\n0.3,abc\n");
    match load_latents(&z) {
        Err(Error::Cell {
            line: 3,
            column: 2,
            reason,
            ..
        }) => assert!(reason.contains("abc")),
        other => panic!("{other:?}"),
    }
    let z = write(dir.path(), "n.csv", "z0\nNaN\n");
    assert!(matches!(load_latents(&z), Err(Error::Cell { line: 2, column: 1, .. })));
}

#[test]
fn row_count_mismatch_is_a_dimension_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut zt = String::from("z0\n");
    let mut yt = String::from("a\n");
    for i in 0..10 {
        zt.push_str(&format!("{i}\n"));
        if i < 9 {
            yt.push_str("0.5\n");
        }
    }
    let z = write(dir.path(), "z.csv", &zt);
    let y = write(dir.path(), "y.csv", &yt);
    match load_dataset(&z, &y) {
        Err(Error::Core(latentmap_core::Error::Dimension {
            expected: 10,
            actual: 9,
            ..
        })) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.csv", "z0,z1\n0.1,0.2\n");
    let cases = [
        ("dup.csv", "a,a\n0.5,0.5\n"),
        ("ragged.csv", "a,b\n0.5\n"),
        ("empty.csv", ""),
    ];
    for (name, text) in cases {
        let y = write(dir.path(), name, text);
        let e = load_dataset(&z, &y).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{name}: {e}");
    }
    let bad_header = write(dir.path(), "h.csv", "z0,x1\n0.1,0.2\n");
    assert!(matches!(
        load_latents(&bad_header),
        Err(Error::Cell { line: 1, column: 2, .. })
    ));
    let no_rows = write(dir.path(), "r.csv", "z0\n");
    assert!(load_latents(&no_rows).is_err());
}

#[test]
fn missing_and_unwritable_paths_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let e = load_latents(&dir.path().join("absent.csv")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("absent.csv"));
    let z = latentmap_core::Matrix::from_rows(&[[1.0]]).unwrap();
    let e = save_latents(&dir.path().join("no/such/dir/z.csv"), &z).unwrap_err();
    assert!(matches!(e, Error::Io { .. }));
}

#[test]
fn model_round_trip_preserves_everything() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, truth) = synth_ground_truth(&spec()).unwrap();
    let ols = fit_closed_form(&ds, 1e-10).unwrap();
    let p = dir.path().join("m.json");
    save_model(&p, &ols).unwrap();
    let back = load_model(&p).unwrap();
    assert_eq!(back, ols);
    assert_eq!(to_json(&back), fs::read_to_string(&p).unwrap());

    // no metadata
    let back = from_json(&to_json(&truth), &p).unwrap();
    assert_eq!(back, truth);
}

#[test]
fn model_layout_is_column_major() {
    let (_, truth) = synth_ground_truth(&spec()).unwrap();
    let truth = truth.with_meta(TrainMeta {
        lambda: 2.0,
        iterations: 7,
        final_total_loss: 1.0,
        final_mse: 0.5,
        final_penalty: 0.25,
        seed: 4,
        schedule: "constant".into(),
    });
    let v: serde_json::Value = serde_json::from_str(&to_json(&truth)).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["d"], 6);
    assert_eq!(v["a"], 3);
    assert_eq!(v["lambda"], 2.0);
    assert_eq!(v["meta"]["iterations"], 7);
    assert_eq!(v["meta"]["schedule"], "constant");
    let cols = v["m_columns"].as_array().unwrap();
    assert_eq!(cols.len(), 3);
    for (j, c) in cols.iter().enumerate() {
        let c: Vec<f64> = c.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(c, truth.direction(j));
    }
}

#[test]
fn inconsistent_model_files_are_rejected() {
    let (_, truth) = synth_ground_truth(&spec()).unwrap();
    let good: serde_json::Value = serde_json::from_str(&to_json(&truth)).unwrap();
    let edits: [(&str, serde_json::Value); 5] = [
        ("version", 2.into()),
        ("d", 5.into()),
        ("a", 2.into()),
        ("b", serde_json::json!([0.5, 0.5])),
        ("attributes", serde_json::json!(["x", "x", "y"])),
    ];
    for (field, value) in edits {
        let mut doc = good.clone();
        doc[field] = value;
        let e = from_json(&doc.to_string(), Path::new("m.json")).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{field}: {e}");
    }
    let mut doc = good.clone();
    doc["extra"] = 1.into();
    assert!(from_json(&doc.to_string(), Path::new("m.json")).is_err());
    assert!(from_json("{", Path::new("m.json")).is_err());
}

#[test]
fn report_csv_holds_raw_values() {
    let (ds, truth) = synth_ground_truth(&spec()).unwrap();
    let ols = fit_closed_form(&ds, 1e-10).unwrap();
    // a large edit pushes predictions outside [0, 1]
    let report = compare_maps(&ols, &truth, ds.latents().row(0), "attr_1", 40.0).unwrap();
    let csv = report_csv(&report);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(REPORT_HEADER));
    let mut outside = false;
    for (line, row) in lines.zip(&report.rows) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], row.attribute);
        let v: Vec<f64> = f[1..].iter().map(|t| t.parse().unwrap()).collect();
        assert_eq!(
            v,
            [
                row.original,
                row.tfm_no_reg,
                row.abs_diff_no_reg,
                row.tfm_reg,
                row.abs_diff_reg
            ]
        );
        assert!((v[2] - (v[1] - v[0]).abs()).abs() < 1e-12);
        assert!((v[4] - (v[3] - v[0]).abs()).abs() < 1e-12);
        outside |= !(0.0..=1.0).contains(&v[1]);
    }
    assert!(outside);
}
