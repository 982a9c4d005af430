use helmsrc::formats::*;
use helmsrc::{
    find_peaks, make_circle_boundary, make_sampling_grid, make_sphere_boundary, CauchyData, DetectionParams, Dim,
    ImagingResult,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, -1e-200f64..1e-200, Just(0.0), Just(-0.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn cauchy_csv_round_trips_bit_for_bit(
        m in 3usize..40,
        radius in 0.1f64..100.0,
        k in 0.01f64..100.0,
        vals in prop::collection::vec(finite(), 160),
        three in any::<bool>(),
    ) {
        let surface = if three {
            make_sphere_boundary([0.1, 0.2, -0.3], radius, 2, m).unwrap()
        } else {
            make_circle_boundary([0.1, 0.2], radius, m).unwrap()
        };
        let n = surface.len();
        let u = (0..n).map(|i| Complex64::new(vals[(4 * i) % 160], vals[(4 * i + 1) % 160])).collect();
        let du = (0..n).map(|i| Complex64::new(vals[(4 * i + 2) % 160], vals[(4 * i + 3) % 160])).collect();
        let data = CauchyData::new(surface, k, u, du).unwrap();
        let mut buf = Vec::new();
        write_cauchy_csv(&data, &mut buf).unwrap();
        let back = read_cauchy_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.u(), data.u());
        prop_assert_eq!(back.dnu_u(), data.dnu_u());
        prop_assert_eq!(back.wavenumber(), data.wavenumber());
        prop_assert_eq!(back.surface().points(), data.surface().points());
        prop_assert_eq!(back.surface().weights(), data.surface().weights());
    }

    #[test]
    fn indicator_binary_round_trips(vals in prop::collection::vec(0.0f64..10.0, 12), normalize in any::<bool>()) {
        let grid = make_sampling_grid(&[-1.0, -2.0], &[1.0, 2.0], &[4, 3]).unwrap();
        let r = ImagingResult::from_values(grid, vals.iter().map(|v| Complex64::new(*v, -v)).collect(), 20.0, 4.0).unwrap();
        let r = if normalize { r.normalized() } else { r };
        let mut buf = Vec::new();
        write_indicator_binary(&r, &mut buf).unwrap();
        let back = read_indicator_binary(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values.as_slice(), r.indicator());
        prop_assert_eq!(back.normalized, normalize);
        prop_assert_eq!(back.dim, Dim::Two);
        prop_assert_eq!(back.lower, vec![-1.0, -2.0]);
        prop_assert_eq!(back.upper, vec![1.0, 2.0]);
        prop_assert_eq!((back.k, back.p), (20.0, 4.0));
    }
}

#[test]
fn peak_records_round_trip() {
    let grid = make_sampling_grid(&[0.0, 0.0], &[4.0, 4.0], &[5, 5]).unwrap();
    let mut v = vec![Complex64::new(0.0, 0.0); 25];
    v[6] = Complex64::new(1.0, 2.0);
    v[18] = Complex64::new(-2.0, 0.5);
    let r = ImagingResult::from_values(grid, v, 3.0, 2.0).unwrap();
    let peaks = helmsrc::estimate_intensities(&find_peaks(&r, &DetectionParams::default()).unwrap(), &r).unwrap();
    let mut buf = Vec::new();
    write_peaks_jsonl(&peaks, Dim::Two, &mut buf).unwrap();
    let recs = read_peaks_jsonl(buf.as_slice()).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].rank, 1);
    assert_eq!(recs[0].location, vec![1.0, 1.0]);
    assert_eq!((recs[0].re_alpha, recs[0].im_alpha), (Some(4.0), Some(8.0)));
    assert_eq!(recs[1].location, vec![3.0, 3.0]);
    assert_eq!(recs[1].re_alpha, Some(-8.0));
}

#[test]
fn imaging_csv_has_one_row_per_grid_point() {
    let grid = make_sampling_grid(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[2, 3, 2]).unwrap();
    let r = ImagingResult::from_values(grid, vec![Complex64::new(1.0, 1.0); 12], 1.0, 4.0).unwrap();
    let mut buf = Vec::new();
    write_imaging_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with(IMAGING_MAGIC));
    assert_eq!(lines.next(), Some("x,y,z,re_i,im_i,indicator"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn truncated_binary_is_an_error() {
    let grid = make_sampling_grid(&[0.0, 0.0], &[1.0, 1.0], &[2, 2]).unwrap();
    let r = ImagingResult::from_values(grid, vec![Complex64::new(1.0, 0.0); 4], 1.0, 4.0).unwrap();
    let mut buf = Vec::new();
    write_indicator_binary(&r, &mut buf).unwrap();
    buf.truncate(buf.len() - 3);
    assert!(read_indicator_binary(buf.as_slice()).is_err());
    assert!(read_indicator_binary(&b"NOTAGRID"[..]).is_err());
}
