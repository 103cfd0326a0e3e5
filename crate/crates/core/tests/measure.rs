//! The estimator, sweeps, fits and the CSV/JSON records.

use loopcell::measure::{extrapolate_points, finite_shift_estimate, measure, read_csv, write_csv, write_json, SweepEntry};
use loopcell::{extrapolate, make_spec, measure_b, sweep, Error, ModelKind};

#[test]
fn derivative_route_agrees_with_finite_shifts() {
    for (kind, l) in [(ModelKind::Dense, 6usize), (ModelKind::Dense, 10), (ModelKind::Dilute, 6)] {
        let spec = make_spec(kind, l).unwrap();
        let b = measure_b(&spec).unwrap().b_n;
        let shifted = finite_shift_estimate(&spec, 1e-3).unwrap();
        assert!((b - shifted).abs() < 1e-5 * b.abs(), "{kind} L={l}: {b} vs {shifted}");
    }
}

#[test]
fn estimator_is_invariant_under_rescaling_and_shifts_of_the_cell() {
    for (kind, l) in [(ModelKind::Dense, 10usize), (ModelKind::Dilute, 8)] {
        let m = measure(&make_spec(kind, l).unwrap()).unwrap();
        let b = m.record.b_n;
        assert!((m.diagnostics.b_rescaled - b).abs() < 1e-12 * b.abs(), "{kind} L={l}");
        assert!((m.diagnostics.b_shifted - b).abs() < 1e-10 * b.abs(), "{kind} L={l}");
        assert!(m.record.mu_sensitivity < 1e-10);
        assert!((m.diagnostics.coupling - 2.0 * make_spec(kind, l).unwrap().gap_scale()).abs() < 1e-10);
    }
}

#[test]
fn synthetic_series_extrapolates_exactly() {
    let points: Vec<(f64, f64)> = (3..9).map(|n| (n as f64, -5.0 + 3.0 / n as f64)).collect();
    let fit = extrapolate_points(&points, 1).unwrap();
    assert!((fit.b_inf + 5.0).abs() < 1e-10);
    let quad: Vec<(f64, f64)> = (3..9).map(|n| (n as f64, -5.0 + 3.0 / n as f64 - 2.0 / (n * n) as f64)).collect();
    let fit = extrapolate_points(&quad, 2).unwrap();
    assert!((fit.b_inf + 5.0).abs() < 1e-10);
    assert_eq!(fit.per_order.len(), 2);
    assert!(fit.rms_residual < 1e-12);
    assert!(matches!(extrapolate_points(&points[..2], 1), Err(Error::InvalidInput(_))));
    assert!(extrapolate_points(&points, 0).is_err());
}

#[test]
fn sweeps_keep_order_and_repeat_exactly() {
    assert!(sweep(ModelKind::Dense, &[]).is_empty());
    let s = sweep(ModelKind::Dense, &[10, 8, 10]);
    assert_eq!(s.iter().map(|e| e.l).collect::<Vec<_>>(), vec![10, 8, 10]);
    assert_eq!(s[0].record, s[2].record);
    let failing = sweep(ModelKind::Dense, &[9]);
    assert!(failing[0].record.is_none() && failing[0].error.is_some());
}

#[test]
fn dense_b_decreases_with_size() {
    let s = sweep(ModelKind::Dense, &[10, 12, 14, 16]);
    let b: Vec<f64> = s.iter().map(|e| e.record.unwrap().b_n).collect();
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
}

#[test]
fn csv_round_trips_and_marks_failures() {
    let mut entries = sweep(ModelKind::Dense, &[6, 10]);
    entries.push(SweepEntry::from_result(ModelKind::Dense, 12, Err(Error::NoJordanCell("synthetic".into()))));
    let mut buf = Vec::new();
    write_csv(&mut buf, &entries).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,L,E0,E_T,Delta_N,b_n,cell_residual,c_estimate,mu_sensitivity,error");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("dense,12,,,,,,,,") && lines[3].contains("synthetic"));
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 2);
    for (r, e) in back.iter().zip(&entries) {
        let orig = e.record.unwrap();
        assert_eq!(r.l, orig.l);
        assert!((r.b_n - orig.b_n).abs() < 1e-8 * orig.b_n.abs());
    }
    let mut again = Vec::new();
    write_csv(&mut again, &entries).unwrap();
    assert_eq!(buf, again);
    let fit = extrapolate(&back, 0);
    assert!(fit.is_err());
}

#[test]
fn json_has_every_record_field() {
    let entries = vec![
        SweepEntry::from_result(ModelKind::Dilute, 6, make_spec(ModelKind::Dilute, 6).and_then(|s| measure_b(&s))),
        SweepEntry::from_result(ModelKind::Dilute, 8, Err(Error::Numerical("bad".into()))),
    ];
    let mut buf = Vec::new();
    write_json(&mut buf, &entries).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let rows = v.as_array().unwrap();
    for key in ["kind", "L", "E0", "E_T", "Delta_N", "b_n", "cell_residual", "c_estimate", "mu_sensitivity"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    assert!(rows[0]["error"].is_null());
    assert_eq!(rows[0]["kind"], ModelKind::Dilute.as_str());
    assert_eq!(rows[1]["L"], 8);
    assert!(rows[1]["error"].as_str().unwrap().contains("bad"));
}
