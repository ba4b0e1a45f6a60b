use chrono::{Days, NaiveDate};
use indexscope_core::panel::{
    align, mean_volatility, read_long, read_wide, to_returns, volatility, write_panel,
    write_raw_long, write_raw_wide, DateRange, RawSeries, ReturnPanel,
};
use proptest::prelude::*;

fn day(k: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 3, 1).unwrap() + Days::new(k)
}

/// Series with a value on each day whose mask bit is set.
fn series_strategy() -> impl Strategy<Value = Vec<RawSeries>> {
    (2usize..5, 5usize..40).prop_flat_map(|(n, len)| {
        prop::collection::vec(prop::collection::vec((any::<bool>(), 1.0f64..1e4), len), n).prop_map(
            move |rows| {
                rows.into_iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let mut obs: Vec<(NaiveDate, f64)> = row
                            .into_iter()
                            .enumerate()
                            .filter(|(_, (keep, _))| *keep)
                            .map(|(t, (_, v))| (day(t as u64), v))
                            .collect();
                        // Keep every series non-empty and starting on day 0.
                        if obs.first().map(|o| o.0) != Some(day(0)) {
                            obs.insert(0, (day(0), 100.0 + i as f64));
                        }
                        RawSeries::new(format!("IX{i}"), obs).unwrap()
                    })
                    .collect()
            },
        )
    })
}

fn naive_moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    (m, (m2 - m * m).sqrt())
}

proptest! {
    #[test]
    fn long_and_wide_round_trip(series in series_strategy()) {
        let mut wide = Vec::new();
        write_raw_wide(&series, &mut wide).unwrap();
        let from_wide = read_wide(wide.as_slice()).unwrap();
        prop_assert!(from_wide.warnings.is_empty());
        prop_assert_eq!(&from_wide.series, &series);

        let mut long = Vec::new();
        write_raw_long(&from_wide.series, &mut long).unwrap();
        let from_long = read_long(long.as_slice()).unwrap();
        prop_assert_eq!(&from_long.series, &series);
    }

    #[test]
    fn alignment_is_idempotent(series in series_strategy(), frac in 0.0f64..1.0) {
        let (panel, _) = align(&series, frac).unwrap();
        let (again, report) = align(&panel.to_raw_series(), frac).unwrap();
        prop_assert_eq!(again.dates(), panel.dates());
        prop_assert_eq!(again.prices(), panel.prices());
        prop_assert_eq!(again.fill_mask(), panel.fill_mask());
        prop_assert!(report.removed.is_empty());
    }

    #[test]
    fn aligned_panel_drops_only_mostly_closed_dates(series in series_strategy(), frac in 0.0f64..1.0) {
        let (panel, report) = align(&series, frac).unwrap();
        let n = series.len() as f64;
        for r in &report.removed {
            prop_assert!(r.closed as f64 / n > frac);
        }
        for (t, filled) in panel.filled_per_date().iter().enumerate() {
            prop_assert!(*filled as f64 / n <= frac, "date {} filled {}", t, filled);
        }
        prop_assert_eq!(panel.n_dates() + report.removed.len(), report.union_dates);
    }

    #[test]
    fn normalized_returns_have_unit_moments(
        rows in prop::collection::vec(prop::collection::vec(-0.1f64..0.1, 30..80), 2..5)
    ) {
        let len = rows.iter().map(Vec::len).min().unwrap();
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r[..len].to_vec()).collect();
        prop_assume!(rows.iter().all(|r| naive_moments(r).1 > 1e-6));
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        let dates = (0..len as u64).map(day).collect();
        let p = ReturnPanel::from_returns(labels, dates, rows).unwrap();
        for (r, g) in p.normalized().iter().zip(p.scaled()) {
            let (m, s) = naive_moments(r);
            prop_assert!(m.abs() < 1e-10);
            prop_assert!((s - 1.0).abs() < 1e-10);
            let (_, sg) = naive_moments(g);
            prop_assert!((sg - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn volatility_matches_double_loop(
        row in prop::collection::vec(-0.05f64..0.05, 60..200),
        window in 2usize..30,
        step in 1usize..30,
    ) {
        let other: Vec<f64> = row.iter().rev().map(|v| v * 0.5 + 0.001).collect();
        let dates: Vec<NaiveDate> = (0..row.len() as u64).map(day).collect();
        let p = ReturnPanel::from_returns(
            vec!["a".into(), "b".into()],
            dates.clone(),
            vec![row.clone(), other.clone()],
        ).unwrap();
        let v = volatility(&p, "a", window, step).unwrap();
        let mut expected = Vec::new();
        let mut start = 0;
        while start + window <= row.len() {
            let mut sum = 0.0;
            for t in start..start + window {
                sum += row[t].abs();
            }
            expected.push((dates[start + window - 1], sum / (window as f64 - 1.0)));
            start += step;
        }
        prop_assert_eq!(v.values.len(), expected.len());
        for ((d, x), (ed, ex)) in v.values.iter().zip(&expected) {
            prop_assert_eq!(d, ed);
            prop_assert!((x - ex).abs() < 1e-12);
        }
        let m = mean_volatility(&p, window, step).unwrap();
        let vb = volatility(&p, "b", window, step).unwrap();
        for ((_, mv), ((_, a), (_, b))) in m.values.iter().zip(v.values.iter().zip(&vb.values)) {
            prop_assert!((mv - 0.5 * (a + b)).abs() < 1e-12);
        }
    }
}

#[test]
fn full_sample_window_count() {
    let len = 3088;
    let row: Vec<f64> = (0..len)
        .map(|t| ((t * 37) % 101) as f64 / 1000.0 - 0.05)
        .collect();
    let p = ReturnPanel::from_returns(
        vec!["a".into(), "b".into()],
        (0..len as u64).map(day).collect(),
        vec![row.clone(), row.iter().map(|v| -v).collect()],
    )
    .unwrap();
    assert_eq!(volatility(&p, "a", 25, 25).unwrap().values.len(), 123);
}

#[test]
fn returns_from_aligned_prices() {
    let a = RawSeries::new("a", vec![(day(0), 100.0), (day(1), 110.0), (day(2), 99.0)]).unwrap();
    let b = RawSeries::new("b", vec![(day(0), 50.0), (day(2), 55.0)]).unwrap();
    let (panel, report) = align(&[a, b], 0.5).unwrap();
    assert_eq!(report.total_filled(), 1);
    let r = to_returns(&panel).unwrap();
    assert!((r.returns()[0][0] - (1.1f64).ln()).abs() < 1e-15);
    assert_eq!(r.returns()[1][0], 0.0);
    assert!((r.returns()[1][1] - (1.1f64).ln()).abs() < 1e-15);
    assert_eq!(r.dates(), &[day(1), day(2)]);
}

#[test]
fn panel_export_writes_mask() {
    let a = RawSeries::new("a", vec![(day(0), 1.5), (day(1), 2.5), (day(2), 3.5)]).unwrap();
    let b = RawSeries::new("b", vec![(day(0), 4.0), (day(2), 5.0)]).unwrap();
    let (panel, _) = align(&[a, b], 0.5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("panel.csv");
    let mask = write_panel(&panel, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "date,a,b\n2001-03-01,1.5,4\n2001-03-02,2.5,4\n2001-03-03,3.5,5\n"
    );
    let mask_text = std::fs::read_to_string(mask).unwrap();
    assert_eq!(
        mask_text,
        "date,a,b\n2001-03-01,0,0\n2001-03-02,0,1\n2001-03-03,0,0\n"
    );
}

#[test]
fn date_range_selection_is_half_open() {
    let dates: Vec<NaiveDate> = (0..10).map(day).collect();
    let r = DateRange::new(day(2), day(5)).unwrap();
    assert_eq!(r.select(&dates), 2..5);
    assert!(r.contains(day(2)) && !r.contains(day(5)));
    assert!(DateRange::new(day(5), day(5)).is_err());
}
