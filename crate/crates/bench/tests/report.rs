use mvflow_bench::report::{csv_path, json_path, plotdata_path, Provenance};
use mvflow_bench::{emit_report, read_plotdata, read_report_csv, read_report_json, Format, ReportRow, RunReport, Series};

fn sample() -> RunReport {
    let mut rep = RunReport::new(Provenance {
        experiment: "heat_exponent".into(),
        config_hash: "abc".into(),
        seed: 3,
        grid: "d=1 n=64 L=8".into(),
        version: "0.1.0".into(),
        timestamp: 1,
    });
    rep.push(ReportRow::within("slope", -0.75, -0.7312345678901234, 0.08));
    rep.push(ReportRow::at_most("err", Some(0.0), 1e-300, 1e-6));
    rep.push(ReportRow::at_least("ratio", None, f64::INFINITY, 1.0));
    rep.push(ReportRow::reported("r_squared", None, f64::NAN));
    rep.push(ReportRow::within("bad", 0.0, 2.0, 1.0));
    rep.series.push(Series::new("norm", "t", "norm", vec![(0.01, 4.0), (0.1, 1.0 / 3.0), (1.0, 5e-17)]));
    rep.notes.push("a note".into());
    rep
}

#[test]
fn relations_decide_pass() {
    let rep = sample();
    assert!(rep.row("slope").unwrap().pass);
    assert!(rep.row("err").unwrap().pass);
    assert!(rep.row("ratio").unwrap().pass);
    assert!(rep.row("r_squared").unwrap().pass);
    assert!(!rep.row("bad").unwrap().pass);
    assert!(!rep.all_pass());
    assert_eq!(rep.failures().len(), 1);
}

#[test]
fn json_and_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rep = sample();
    emit_report(&rep, dir.path(), &Format::ALL).unwrap();
    assert_eq!(read_report_json(&json_path(dir.path())).unwrap(), rep);
    assert_eq!(read_report_csv(&csv_path(dir.path())).unwrap(), rep.rows);
    assert_eq!(read_plotdata(&plotdata_path(dir.path(), "norm")).unwrap(), rep.series[0].points);
}

#[test]
fn csv_layout_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    emit_report(&sample(), dir.path(), &[Format::Csv]).unwrap();
    let text = std::fs::read_to_string(csv_path(dir.path())).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "quantity,theory,measured,tol,pass,relation");
    assert_eq!(lines.next().unwrap(), "slope,-0.75,-0.7312345678901234,0.08,true,within");
    assert!(text.contains("r_squared,,nan,,true,reported"));
    assert!(!json_path(dir.path()).exists());
}

#[test]
fn empty_report_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut rep = sample();
    rep.rows.clear();
    rep.series.clear();
    emit_report(&rep, dir.path(), &Format::ALL).unwrap();
    let text = std::fs::read_to_string(csv_path(dir.path())).unwrap();
    assert_eq!(text.trim_end(), "quantity,theory,measured,tol,pass,relation");
    assert!(read_report_csv(&csv_path(dir.path())).unwrap().is_empty());
    assert!(rep.all_pass());
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    std::fs::write(&p, "a,b\n1,2\n").unwrap();
    assert!(read_report_csv(&p).is_err());
    std::fs::write(&p, "quantity,theory,measured,tol,pass,relation\nx,,1,,maybe,within\n").unwrap();
    assert!(read_report_csv(&p).is_err());
    std::fs::write(&p, "1 2 3\n").unwrap();
    assert!(read_plotdata(&p).is_err());
    std::fs::write(&p, "{").unwrap();
    assert!(read_report_json(&p).is_err());
}
