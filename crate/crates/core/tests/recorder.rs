mod common;

use std::fs;

use common::{fixture, run};
use gridres_core::recorder::{summary_lines, write_results};
use gridres_core::scenario::parse_scenario;

#[test]
fn no_recorders_writes_log_and_summary_only() {
    let m = parse_scenario(
        "clock { start '2019-07-01 00:00:00'; stop '2019-07-01 00:10:00'; timestep 60 s; }
         object node { name n1; bustype SWING; nominal_voltage 7200 V; }",
    )
    .unwrap();
    let r = run(&m, None);
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_results(&r, dir.path()).unwrap();
    let names: Vec<_> = manifest
        .iter()
        .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
        .collect();
    assert_eq!(names, ["events.csv", "summary.txt"]);
    assert_eq!(
        fs::read_to_string(dir.path().join("events.csv")).unwrap(),
        "time,target,property,old_value,new_value,origin\n"
    );
}

#[test]
fn every_recorder_gets_one_full_file() {
    let m = fixture("feeder_small.glm");
    let r = run(&m, None);
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_results(&r, dir.path()).unwrap();
    assert_eq!(manifest.len(), m.recorders.len() + 2);
    let mut sorted = manifest.clone();
    sorted.sort();
    assert_eq!(manifest, sorted);
    for rec in &m.recorders {
        let text = fs::read_to_string(dir.path().join(&rec.file)).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, format!("time,{},flags", rec.properties.join(",")));
        let rows: Vec<_> = lines.collect();
        // 10:00 to 13:00 at one minute.
        assert_eq!(rows.len(), 181, "{}", rec.file);
        assert!(rows[0].starts_with("2019-07-01 10:00:00,"));
        assert!(rows[180].starts_with("2019-07-01 13:00:00,"));
    }
}

#[test]
fn scenario1_summary_hits_the_cap() {
    let r = run(&fixture("scenario1.glm"), None);
    let summary = summary_lines(&r);
    let get = |k: &str| {
        summary
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.clone())
    };
    assert_eq!(get("max_clearing_price").as_deref(), Some("0.630000"));
    assert_eq!(get("complete").as_deref(), Some("true"));
    assert_eq!(get("attacks").as_deref(), Some("s1 SELLER_PRICE_OVERRIDE"));
}

#[test]
fn open_meter_records_zero_with_flag() {
    let mut m = fixture("feeder_small.glm");
    m.schedules = parse_scenario("schedule cut { at '2019-07-01 12:00:00' tl4 status OPEN; }")
        .unwrap()
        .schedules;
    let r = run(&m, None);
    let dir = tempfile::tempdir().unwrap();
    write_results(&r, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("tm4_meter.csv")).unwrap();
    let last = text.lines().last().unwrap();
    assert_eq!(last, "2019-07-01 13:00:00,0.00000,0.00000,DEENERGIZED");
    let events = fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(events.contains("2019-07-01 12:00:00,tl4,status,CLOSED,OPEN,schedule"));
}
