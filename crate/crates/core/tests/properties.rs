use std::f64::consts::PI;

use proptest::prelude::*;
use vista_core::map::{
    Codebook, DirectionMode, Image, PixelHit, SemanticPointCloud, TraversalMode, VoxelGrid, VoxelState,
    DEFAULT_BIN_HALF_ANGLE,
};
use vista_core::plan::*;
use vista_core::score::pixel_gain;
use vista_core::{CameraIntrinsics, CameraPose, Ray, ScoreWeights, Vec3};

fn unit() -> impl Strategy<Value = Vec3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            n > 0.1 && n <= 1.0
        })
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adding_a_direction_never_raises_gain(stored in prop::collection::vec(unit(), 1..8), extra in unit(), d in unit()) {
        let before = pixel_gain(stored.iter().copied(), d).unwrap();
        let after = pixel_gain(stored.iter().copied().chain([extra]), d).unwrap();
        prop_assert!(after <= before);
        prop_assert!((0.0..=1.0).contains(&after));
    }

    #[test]
    fn bitmask_gain_within_chord_bound(stored in prop::collection::vec(unit(), 1..6), d in unit()) {
        // A stored direction and its bin representative are at most the bin
        // half-angle apart, so their dot products with any unit candidate
        // differ by at most the chord length 2 sin(alpha / 2).
        let cb = Codebook::<f64>::default();
        let reps: Vec<Vec3<f64>> = stored.iter().map(|&v| cb.direction(cb.bin_of(v))).collect();
        let exact = pixel_gain(stored.iter().copied(), d).unwrap();
        let quantized = pixel_gain(reps, d).unwrap();
        prop_assert!((exact - quantized).abs() <= (DEFAULT_BIN_HALF_ANGLE / 2.0).sin() + 1e-12);
    }
}

#[derive(Clone, Debug)]
enum Op {
    Integrate(Vec<(f64, f64, f64)>, f64),
    Sense(f64, f64, f64, f64),
    Recenter(f64, f64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (prop::collection::vec((0.0..6.0f64, 0.0..6.0f64, 0.0..3.0f64), 1..20), -1.0..1.0f64)
            .prop_map(|(p, c)| Op::Integrate(p, c)),
        (0.5..5.5f64, 0.5..5.5f64, 0.2..2.8f64, -PI..PI).prop_map(|(x, y, z, yaw)| Op::Sense(x, y, z, yaw)),
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| Op::Recenter(x, y)),
    ]
}

fn grid() -> VoxelGrid<f64> {
    VoxelGrid::new(Vec3::new(3.0, 3.0, 1.5), 0.5, [12, 12, 6], DirectionMode::Bitmask).unwrap()
}

fn rank(s: VoxelState) -> u8 {
    match s {
        VoxelState::Unobserved => 0,
        VoxelState::Free => 1,
        VoxelState::Occupied => 2,
    }
}

fn apply(g: &mut VoxelGrid<f64>, op: &Op) -> bool {
    match op {
        Op::Integrate(points, c) => {
            let n = points.len();
            let s = (1.0 - c * c).sqrt();
            let cloud = SemanticPointCloud::new(
                points.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect(),
                vec![[0.2; 3]; n],
                vec![vec![*c, s]; n],
            )
            .unwrap();
            g.integrate_point_cloud(&cloud, &[1.0, 0.0]).unwrap();
            false
        }
        Op::Sense(x, y, z, yaw) => {
            let pose = CameraPose::level(Vec3::new(*x, *y, *z), *yaw);
            let intr = CameraIntrinsics::with_fov(8, 6, PI / 2.0, 6.0).unwrap();
            let depth = g.render(&pose, &intr, vista_core::Channel::Depth).unwrap().into_scalar().unwrap();
            // Depth of the current map as the "measurement": rays end at the
            // first non-free voxel or run to the sensor range.
            let depth = Image { data: depth.data.clone(), ..depth };
            g.carve_free_space(&pose, &intr, &depth).unwrap();
            g.record_view_directions(&pose, &intr);
            false
        }
        Op::Recenter(dx, dy) => {
            let c = g.center();
            g.recenter(Vec3::new(c.x + dx, c.y + dy, c.z)) != [0, 0, 0]
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn voxel_states_and_direction_sets_are_monotone(ops in prop::collection::vec(op(), 1..12)) {
        let mut g = grid();
        for op in &ops {
            let before = g.clone();
            let moved = apply(&mut g, op);
            if moved {
                continue;
            }
            for (a, b) in before.voxels().iter().zip(g.voxels()) {
                prop_assert!(rank(b.state) >= rank(a.state));
                prop_assert!(b.directions.len() >= a.directions.len());
                if b.state != VoxelState::Occupied {
                    prop_assert!(b.directions.is_empty());
                    prop_assert_eq!(b.semantic, 0.0);
                }
            }
        }
    }

    #[test]
    fn render_terminal_matches_traverse(ops in prop::collection::vec(op(), 1..6), yaw in -PI..PI, x in 0.5..5.5f64, y in 0.5..5.5f64) {
        let mut g = grid();
        for op in &ops {
            apply(&mut g, op);
        }
        let pose = CameraPose::level(Vec3::new(x, y, 1.4), yaw);
        let intr = CameraIntrinsics::with_fov(10, 6, PI / 2.0, 5.0).unwrap();
        for dir in intr.world_rays(&pose) {
            let ray = Ray::new(pose.position, dir, intr.max_range).unwrap();
            let tr = g.traverse(&ray, TraversalMode::Render);
            match g.cast(&ray) {
                PixelHit::Occupied { voxel, .. } | PixelHit::Unobserved { voxel, .. } => {
                    prop_assert_eq!(tr.terminal(), Some(voxel));
                    prop_assert!(g.state(voxel) != VoxelState::Free);
                }
                PixelHit::Miss => prop_assert!(tr.voxels.iter().all(|&v| g.state(v) == VoxelState::Free)),
            }
        }
    }
}

/// Random partially explored room: Free interior with random obstacles and a
/// random unexplored region.
fn room(seed_cells: &[(usize, usize, u8)], unknown_from: usize) -> VoxelGrid<f64> {
    let mut g = VoxelGrid::new(Vec3::new(0.0, 0.0, 1.0), 0.5, [16, 16, 2], DirectionMode::Bitmask).unwrap();
    for lin in 0..g.geometry().len() {
        let idx = g.geometry().unlinear(lin);
        if idx[0] < unknown_from {
            g.mark_free(idx);
        }
    }
    for &(i, j, kind) in seed_cells {
        for k in 0..2 {
            g.mark_occupied([i, j, k], if kind == 0 { 0.5 } else { 0.9 }, [0.0; 3]);
        }
    }
    g
}

fn config() -> PlanConfig<f64> {
    PlanConfig {
        z_lo: 0.0,
        z_hi: 2.0,
        flight_z: 1.0,
        top_m: 8,
        semantic_samples: 16,
        gmm_components: 3,
        gmm_max_iter: 50,
        gmm_tol: 1e-4,
        n_traj: 8,
        max_waypoints: 5,
        inflation_radius: 1,
        limits: ControlLimits::new(1.0, 0.6, 1.0).unwrap(),
        render_intrinsics: CameraIntrinsics::with_fov(8, 2, PI / 2.0, 6.0).unwrap(),
        use_semantics: true,
        decay_c: true,
        debug: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planned_trajectories_are_feasible_and_deterministic(
        obstacles in prop::collection::vec((0usize..16, 0usize..16, 0u8..2), 0..20),
        unknown_from in 6usize..16,
        yaw in -PI..PI,
        seed in any::<u64>(),
    ) {
        let g = room(&obstacles, unknown_from);
        let cfg = config();
        let flat = flatten_voxel_grid(&g, cfg.z_lo, cfg.z_hi).unwrap();
        let ok = traversable_mask(&flat, cfg.inflation_radius);
        let Some(start) = (0..ok.len()).find(|&i| ok[i]) else { return Ok(()); };
        let c = flat.cell_center(flat.unlinear(start));
        let cur = PlannerState::new(c.x, c.y, yaw);
        let w = ScoreWeights::new(1.5, 0.9, 0.98).unwrap();
        let out = plan(&cur, &g, &w, &cfg, seed);
        prop_assert_eq!(&out, &plan(&cur, &g, &w, &cfg, seed));
        let max_yaw = cfg.limits.max_yaw_step();
        let max_move = cfg.limits.max_speed * cfg.limits.dt;
        for t in out.candidates.iter().chain([&out.trajectory]) {
            let mut prev = cur;
            for wp in &t.waypoints {
                prop_assert!(vista_core::scalar::wrap_angle(wp.yaw - prev.yaw).abs() <= max_yaw + 1e-12);
                prop_assert!(wp.position().dist(prev.position()) <= max_move + 1e-12);
                if !out.is_recovery() {
                    let cell = flat.cell_of(wp.position()).unwrap();
                    prop_assert!(ok[flat.linear(cell)], "waypoint {:?} in blocked cell", wp);
                }
                prev = *wp;
            }
            prop_assert_eq!(t.poses.len(), t.waypoints.len());
        }
        if let Some(best) = out.best_index {
            let top = out.candidates.iter().map(|t| t.score).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(out.candidates[best].score, top);
            prop_assert!(out.candidates[..best].iter().all(|t| t.score < top));
        }
    }

    #[test]
    fn fitted_mixtures_are_valid(points in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..80), k in 1usize..6, seed in any::<u64>()) {
        let pts: Vec<vista_core::Vec2<f64>> = points.iter().map(|&(x, y)| vista_core::Vec2::new(x, y)).collect();
        let g = fit_gmm_points(&pts, k, 0.01, 50, 1e-4, seed).unwrap();
        let sum: f64 = g.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(g.weights.iter().all(|&w| w >= 0.0));
        for c in &g.covariances {
            prop_assert!(c.cholesky().is_some());
            prop_assert!(c.eigenvalues().0 >= 0.01 * (1.0 - 1e-9));
        }
        prop_assert_eq!(&g, &fit_gmm_points(&pts, k, 0.01, 50, 1e-4, seed).unwrap());
    }
}
