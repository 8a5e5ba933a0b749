use aphg::data::{describe, load_csv, load_embedded, write_csv, EMBEDDED};
use aphg::estimation::{fit, FitConfig, ModelKind};
use aphg::Error;

#[test]
fn embedded_sets_survive_a_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in EMBEDDED {
        let d = load_embedded(name).unwrap();
        let path = dir.path().join(format!("{name}.csv"));
        write_csv(&path, &d).unwrap();
        let back = load_csv(&path, None).unwrap();
        assert_eq!(back.values, d.values);
        assert_eq!(describe(&back), describe(&d));
    }
}

#[test]
fn named_column_with_other_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wide.csv");
    let k = load_embedded("kevlar").unwrap();
    let mut body = String::from("id,hours,batch\n");
    for (i, x) in k.values.iter().enumerate() {
        body.push_str(&format!("{i},{x},b{}\n", i % 3));
    }
    std::fs::write(&path, body).unwrap();
    let d = load_csv(&path, Some("hours")).unwrap();
    assert_eq!(d.values, k.values);
    assert_eq!(d.name, "wide");

    let a = fit(&d.values, ModelKind::Bxii, &FitConfig::default()).unwrap();
    let b = fit(&k.values, ModelKind::Bxii, &FitConfig::default()).unwrap();
    assert_eq!(a.theta, b.theta);
}

#[test]
fn bad_rows_are_reported_with_their_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x\n1.5\n2.5\n0\n").unwrap();
    match load_csv(&path, Some("x")) {
        Err(Error::Row { row, .. }) => assert_eq!(row, 3),
        other => panic!("{other:?}"),
    }
}
