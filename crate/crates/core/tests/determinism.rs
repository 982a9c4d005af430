use helmsrc::{
    imaging_map_with, make_circle_boundary, make_sampling_grid, radiate_points_with, Dim, Execution, PointSource,
    PointSourceSet,
};
use num_complex::Complex64;

fn run(exec: Execution) -> (Vec<Complex64>, Vec<Complex64>) {
    let surface = make_circle_boundary([0.0, 0.0], 50.0, 256).unwrap();
    let set = PointSourceSet::new(
        Dim::Two,
        vec![
            PointSource { location: [1.0, -1.0, 0.0], intensity: Complex64::new(4.0, 0.0) },
            PointSource { location: [1.3, 1.0, 0.0], intensity: Complex64::new(3.5, -1.0) },
        ],
        0.3,
    )
    .unwrap();
    let data = radiate_points_with(&set, &surface, 20.0, exec).unwrap();
    let grid = make_sampling_grid(&[-2.0, -2.0], &[2.0, 2.0], &[40, 40]).unwrap();
    let map = imaging_map_with(&grid, &data, 4.0, exec).unwrap();
    (data.u().to_vec(), map.values().to_vec())
}

#[test]
fn results_do_not_depend_on_threads_or_strategy() {
    let reference = run(Execution::Sequential);
    for threads in [1, 2, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = pool.install(|| run(Execution::Parallel));
        assert_eq!(out, reference, "{threads} threads");
    }
}
