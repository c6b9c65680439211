use proptest::prelude::*;

use slt_core::breakpoints::{select_breakpoints, subdivide, BreakKind, RESIDUAL_TOL};
use slt_core::graph::dijkstra;
use slt_core::io::{from_json, to_canonical_json, PointsFile, TreeFile};
use slt_core::metrics::oracle::{floyd_warshall, kruskal_weight};
use slt_core::mst_path::{dfs_hamiltonian, euclidean_mst};
use slt_core::pipeline::{assemble_slt, PipelineOptions};
use slt_core::pyramid::{greedy_spanner, local_greedy_spanner};
use slt_core::unfolding::build_surfaces;
use slt_core::{Point, PointCloud};

/// Point clouds of 2..=max points in dimension 2..=6 on a coarse lattice
/// with jitter, deduplicated.
fn cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    (2usize..=6).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(-1000i32..1000, d), 2..=max).prop_map(
            move |raw| {
                let mut pts: Vec<Vec<f64>> = raw
                    .into_iter()
                    .map(|c| c.into_iter().map(|x| x as f64 / 997.0).collect())
                    .collect();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                if pts.len() < 2 {
                    let mut other = pts[0].clone();
                    other[0] += 1.0;
                    pts.push(other);
                }
                PointCloud::new(pts.into_iter().map(|c| Point::new(c).unwrap()).collect(), 0)
                    .unwrap()
            },
        )
    })
}

fn eps_strategy() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.16, 0.09, 0.04, 0.01])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prim_matches_kruskal(pts in cloud(40)) {
        let prim = euclidean_mst(&pts).unwrap();
        prop_assert_eq!(prim.edges.len(), pts.len() - 1);
        let k = kruskal_weight(&pts);
        prop_assert!((prim.weight() - k).abs() <= 1e-12 * k.max(1.0));
    }

    #[test]
    fn preorder_path_visits_all_and_doubles(pts in cloud(40)) {
        let tree = euclidean_mst(&pts).unwrap();
        let path = dfs_hamiltonian(&tree, &pts).unwrap();
        let mut order = path.order.clone();
        order.sort_unstable();
        prop_assert_eq!(order, (0..pts.len()).collect::<Vec<_>>());
        prop_assert_eq!(path.order[0], pts.root());
        prop_assert!(path.weight() <= 2.0 * tree.weight() * (1.0 + 1e-12));
    }

    #[test]
    fn break_points_solve_their_equation(pts in cloud(40), eps in eps_strategy()) {
        let tree = euclidean_mst(&pts).unwrap();
        let path = dfs_hamiltonian(&tree, &pts).unwrap();
        let bps = select_breakpoints(&path, eps).unwrap();
        prop_assert_eq!(bps.kinds[0], BreakKind::Root);
        for i in 0..bps.len() - 1 {
            prop_assert!(bps.arc(i) < bps.arc(i + 1));
            if bps.solves_equation(i) {
                prop_assert!(bps.residual(i) <= RESIDUAL_TOL, "residual {}", bps.residual(i));
            }
        }
        prop_assert!(bps.arc(bps.len() - 1) <= path.weight() * (1.0 + 1e-12));
    }

    #[test]
    fn unfolding_preserves_root_distance(pts in cloud(30), eps in eps_strategy()) {
        let tree = euclidean_mst(&pts).unwrap();
        let path = dfs_hamiltonian(&tree, &pts).unwrap();
        let sub = subdivide(&path, &select_breakpoints(&path, eps).unwrap()).unwrap();
        let s = pts.root_point();
        for surf in build_surfaces(&sub, s).unwrap() {
            prop_assert!(surf.total_angle() <= std::f64::consts::PI);
            for j in 0..=surf.cone_count() {
                let q = surf.unfold_ray_vertex(j);
                let p = &sub.hstar.vertices()[surf.ray_vertex[j]];
                let d = s.distance(p);
                prop_assert!((q.norm() - d).abs() <= 1e-9 * d.max(1.0));
                let back = surf.lift(q).unwrap();
                prop_assert!(back.distance(p) <= 1e-9 * d.max(1.0));
            }
        }
    }

    #[test]
    fn pipeline_tree_is_shallow(pts in cloud(30), eps in eps_strategy()) {
        let b = assemble_slt(&pts, eps.min(0.25), &PipelineOptions::default()).unwrap();
        let t = &b.tree;
        prop_assert_eq!(t.edges().len() + 1, t.vertex_count());
        prop_assert!(b.report.max_stretch <= 1.0 + eps);
        prop_assert!(b.report.per_point_stretch.iter().all(|&r| r >= 1.0 - 1e-12));
        prop_assert_eq!(b.report.per_point_stretch[pts.root()], 1.0);
    }

    #[test]
    fn chord_shortcut_keeps_stretch(pts in cloud(20), eps in eps_strategy()) {
        let opts = PipelineOptions { chord_shortcut: true, ..PipelineOptions::default() };
        let b = assemble_slt(&pts, eps, &opts).unwrap();
        prop_assert!(b.report.max_stretch <= 1.0 + eps);
    }

    #[test]
    fn dijkstra_matches_floyd_warshall(pts in cloud(25), eps in eps_strategy()) {
        let b = assemble_slt(&pts, eps, &PipelineOptions::default()).unwrap();
        let g = &b.graph;
        prop_assume!(g.vertex_count() <= 200);
        let edges: Vec<_> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        let fw = floyd_warshall(g.vertex_count(), &edges);
        let dist = dijkstra(&g.adjacency(), g.root()).dist;
        for (a, b) in dist.iter().zip(&fw[g.root()]) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn files_round_trip(pts in cloud(20)) {
        let text = to_canonical_json(&PointsFile::from_cloud(&pts)).unwrap();
        let back: PointsFile = from_json(&text).unwrap();
        prop_assert_eq!(&back.to_cloud().unwrap(), &pts);
        prop_assert_eq!(to_canonical_json(&back).unwrap(), text);

        let b = assemble_slt(&pts, 0.09, &PipelineOptions::default()).unwrap();
        let tree_text = to_canonical_json(&TreeFile::from_graph(&b.tree)).unwrap();
        let tf: TreeFile = from_json(&tree_text).unwrap();
        prop_assert_eq!(&tf.to_graph().unwrap(), &b.tree);
        prop_assert_eq!(to_canonical_json(&tf).unwrap(), tree_text);
    }

    #[test]
    fn greedy_spanner_spans(pts in cloud(30)) {
        let p = pts.points();
        let t = 1.25;
        let edges = greedy_spanner(p, t);
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, p[u].distance(&p[v]))).collect();
        let d = floyd_warshall(p.len(), &weighted);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                prop_assert!(d[i][j] <= t * p[i].distance(&p[j]) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn local_spanner_spans_short_pairs(pts in cloud(30), radius in 0.2f64..2.0) {
        let p = pts.points();
        let t = 1.25;
        let edges = local_greedy_spanner(p, t, radius);
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, p[u].distance(&p[v]))).collect();
        let d = floyd_warshall(p.len(), &weighted);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let e = p[i].distance(&p[j]);
                if e <= radius {
                    prop_assert!(d[i][j] <= t * e * (1.0 + 1e-12));
                }
            }
        }
    }
}
