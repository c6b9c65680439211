//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slt_core::breakpoints::{select_breakpoints, subdivide};
use slt_core::core2d::{
    build_core, chain_weight_bound, core_metrics, core_slt, core_spt,
    level_weight_bound as chain_level_bound, slack_bound, CoreInstance, DEFAULT_LAMBDA,
};
use slt_core::generate::{circle, embed, random};
use slt_core::graph::dijkstra;
use slt_core::io::{to_canonical_json, TreeFile};
use slt_core::metrics::oracle::{floyd_warshall, kruskal_weight};
use slt_core::mst_path::{dfs_hamiltonian, euclidean_mst};
use slt_core::pipeline::{assemble_slt, PipelineOptions, SltBuild, DEFAULT_GAMMA};
use slt_core::pyramid::{
    build_pyramid_core, greedy_spanner, level_weight_bound, lightness_trend,
    pyramid_mst_lower_bound, GridSpec, BASE_SPANNER_T,
};
use slt_core::unfolding::{build_surfaces, halved_sweep_bound, sweep_bound};
use slt_core::{Point, PointCloud};

const DIMS: std::ops::RangeInclusive<usize> = 2..=8;
const SIZES: [usize; 3] = [10, 50, 200];
const EPSILONS: [f64; 3] = [0.25, 0.09, 0.04];
const SEEDS: u64 = 20;
const CIRCLE_EPS: [f64; 3] = [0.16, 0.04, 0.01];

struct Instance {
    label: String,
    eps: f64,
    pts: PointCloud,
}

fn suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for d in DIMS {
        for n in SIZES {
            for eps in EPSILONS {
                for seed in 0..SEEDS {
                    out.push(Instance {
                        label: format!("d={d} n={n} eps={eps} seed={seed}"),
                        eps,
                        pts: random(d, n, seed).expect("random instance"),
                    });
                }
            }
        }
    }
    out
}

struct Line {
    pass: bool,
    text: String,
}

fn line(pass: bool, text: String) -> Line {
    Line { pass, text }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn surface_angle_bound(instances: &[Instance]) -> (Line, String) {
    let t = Instant::now();
    let (mut checked, mut over, mut worst, mut worst_full) = (0usize, 0usize, 0.0f64, 0.0f64);
    for inst in instances {
        let eps_int = inst.eps / DEFAULT_GAMMA;
        let tree = euclidean_mst(&inst.pts).unwrap();
        let path = dfs_hamiltonian(&tree, &inst.pts).unwrap();
        let bps = select_breakpoints(&path, eps_int).unwrap();
        let sub = subdivide(&path, &bps).unwrap();
        let surfaces = build_surfaces(&sub, inst.pts.root_point()).unwrap();
        // split pieces of one sub-path count together
        let mut angle = vec![0.0; sub.segments.len()];
        for s in &surfaces {
            angle[s.subpath] += s.total_angle();
        }
        let last = sub.segments.len() - 1;
        for (i, a) in angle.iter().enumerate().skip(1) {
            if sub.truncated && i == last {
                continue;
            }
            checked += 1;
            if *a > halved_sweep_bound(eps_int) + 1e-9 {
                over += 1;
            }
            worst = worst.max(a / halved_sweep_bound(eps_int));
            worst_full = worst_full.max(a / sweep_bound(eps_int));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (
        line(
            over == 0 && secs < 10.0,
            format!(
                "surface angles: {over}/{checked} surfaces above sqrt(eps)/(2(1-sqrt(eps))), worst angle/bound {worst:.4}, {secs:.2} s"
            ),
        ),
        format!("note: against sqrt(eps)/(1-sqrt(eps)) the worst angle/bound is {worst_full:.4}"),
    )
}

fn isometry(builds: &[(&Instance, SltBuild)]) -> Line {
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for (inst, b) in builds {
        let s = inst.pts.root_point();
        let verts = b.subdivided.hstar.vertices();
        for g in &b.gadgets {
            for (&h, q) in g.inputs.iter().zip(&g.input_plane) {
                let d = s.distance(&verts[h]);
                let rel = (q.norm() - d).abs() / d.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    line(
        worst <= 1e-9 && checked > 0,
        format!("isometry: {checked} unfolded inputs, worst relative distance error {worst:.2e}"),
    )
}

fn doubling(instances: &[Instance]) -> Line {
    let (mut bad, mut worst) = (0usize, 0.0f64);
    for inst in instances {
        let tree = euclidean_mst(&inst.pts).unwrap();
        let path = dfs_hamiltonian(&tree, &inst.pts).unwrap();
        let r = path.weight() / tree.weight();
        worst = worst.max(r);
        if path.weight() > 2.0 * tree.weight() {
            bad += 1;
        }
    }
    line(
        bad == 0,
        format!("path doubling: {bad} instances with w(H) > 2 w(MST), worst ratio {worst:.4}"),
    )
}

fn core_bounds() -> Line {
    let t = Instant::now();
    let lambda = DEFAULT_LAMBDA;
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let mut failures = Vec::new();
    let mut worst_stretch = 0.0f64;
    for eps in [0.25, 0.09, 0.04, 0.01] {
        let params: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let g = build_core(&CoreInstance::unit(eps, lambda, &params).unwrap()).unwrap();
        let m = core_metrics(&g, &core_spt(&g).unwrap()).unwrap();
        for (i, w) in m.level_weights.iter().enumerate() {
            if *w > chain_level_bound(lambda, i) + 1e-12 {
                failures.push(format!("eps={eps} level {i} weight {w}"));
            }
        }
        if m.chain_weight > chain_weight_bound(lambda) {
            failures.push(format!("eps={eps} chain weight {}", m.chain_weight));
        }
        for (i, s) in m.level_slack.iter().enumerate() {
            if *s > slack_bound(g.alpha, lambda, i) + 1e-15 {
                failures.push(format!("eps={eps} level {i} slack {s}"));
            }
        }
        if m.max_stretch > 1.0 + eps {
            failures.push(format!("eps={eps} stretch {}", m.max_stretch));
        }
        worst_stretch = worst_stretch.max((m.max_stretch - 1.0) / eps);
    }
    let secs = t.elapsed().as_secs_f64();
    line(
        failures.is_empty() && secs < 1.0,
        format!(
            "core2d bounds: {} violations {:?}, worst (stretch-1)/eps {worst_stretch:.4}, {:.1} ms",
            failures.len(),
            failures,
            secs * 1e3,
        ),
    )
}

fn stretch(builds: &[(&Instance, SltBuild)], circles: &[(f64, SltBuild)]) -> Line {
    let mut bad = Vec::new();
    let mut worst = (0.0f64, String::new());
    for (inst, b) in builds {
        let r = (b.report.max_stretch - 1.0) / inst.eps;
        if r > worst.0 {
            worst = (r, inst.label.clone());
        }
        if !b.report.within_stretch() {
            bad.push(inst.label.clone());
        }
    }
    for (eps, b) in circles {
        if !b.report.within_stretch() {
            bad.push(format!("circle eps={eps}"));
        }
    }
    line(
        bad.is_empty(),
        format!(
            "pipeline stretch: {} of {} runs above 1+eps, worst (stretch-1)/eps {:.4} at {}",
            bad.len(),
            builds.len() + circles.len(),
            worst.0,
            worst.1
        ),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn lightness_scaling(builds: &[(&Instance, SltBuild)], circles: &[(f64, SltBuild)]) -> Line {
    let fam = &circles[..CIRCLE_EPS.len()];
    let xs: Vec<f64> = fam.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = fam.iter().map(|(_, b)| b.report.lightness.ln()).collect();
    let k = slope(&xs, &ys);
    let lights: Vec<String> = fam
        .iter()
        .map(|(_, b)| format!("{:.4}", b.report.lightness))
        .collect();
    debug_assert!(fam.iter().zip(CIRCLE_EPS).all(|((e, _), f)| *e == f));

    let mut phase_bad = 0;
    let mut worst = 0.0f64;
    let all = builds
        .iter()
        .map(|(i, b)| (i.eps, b))
        .chain(circles.iter().map(|(e, b)| (*e, b)));
    let mut count = 0;
    for (eps, b) in all {
        let eps_int = eps / DEFAULT_GAMMA;
        let bound = (1.0 + 1.0 / eps_int.sqrt()) * 2.0 * b.report.mst_weight;
        let w = b
            .report
            .phase1_weight
            .expect("pipeline sets the phase-1 weight");
        worst = worst.max(w / bound);
        count += 1;
        if w > bound {
            phase_bad += 1;
        }
    }
    line(
        (0.3..=0.7).contains(&k) && phase_bad == 0,
        format!(
            "lightness scaling: circle lightness {lights:?} fitted slope {k:.4} (need [0.3, 0.7]); phase-1 weight above bound in {phase_bad}/{count} runs, worst weight/bound {worst:.4}"
        ),
    )
}

fn dimension_independence() -> Line {
    let mut ratios = Vec::new();
    for (k, eps) in CIRCLE_EPS.iter().enumerate() {
        let c = circle(*eps).unwrap();
        let l2 = assemble_slt(&c, *eps, &PipelineOptions::default())
            .unwrap()
            .report
            .lightness;
        let high = embed(&c, 8, 100 + k as u64).unwrap();
        let l8 = assemble_slt(&high, *eps, &PipelineOptions::default())
            .unwrap()
            .report
            .lightness;
        ratios.push(l8 / l2);
    }
    let ok = ratios.iter().all(|r| *r <= 1.2 && *r >= 1.0 / 1.2);
    line(
        ok,
        format!("dimension independence: lightness ratio d=8 / d=2 {ratios:.6?}"),
    )
}

/// Whether the graph on `pts` with `edges` is a `t`-spanner, checked on
/// every pair with Floyd–Warshall.
fn verified_spanner(pts: &[Point], edges: &[(usize, usize)], t: f64) -> bool {
    let weighted: Vec<_> = edges
        .iter()
        .map(|&(u, v)| (u, v, pts[u].distance(&pts[v])))
        .collect();
    let d = floyd_warshall(pts.len(), &weighted);
    (0..pts.len()).all(|i| {
        (i + 1..pts.len()).all(|j| d[i][j] <= t * pts[i].distance(&pts[j]) * (1.0 + 1e-12))
    })
}

fn pyramid() -> Line {
    let mut notes = Vec::new();
    let mut ok = true;
    for d in [3, 4] {
        for eps in [0.09, 0.04] {
            let grid = GridSpec::for_regime(d, eps).unwrap();
            let pc = build_pyramid_core(d, eps, &grid, DEFAULT_LAMBDA).unwrap();
            let levels_ok = pc
                .level_weights()
                .iter()
                .enumerate()
                .all(|(i, w)| *w <= level_weight_bound(d, DEFAULT_LAMBDA, i) * (1.0 + 1e-12));
            let lb = pyramid_mst_lower_bound(&grid, d, eps).unwrap();
            let stretch_ok = pc.report.within_stretch();
            let mst_ok = pc.report.mst_weight > lb;
            ok &= levels_ok && stretch_ok && mst_ok;
            notes.push(format!(
                "d={d} eps={eps} n={} stretch {:.5} levels {} mst {:.3} > {:.3} lightness {:.3} (trend {:.3})",
                grid.n,
                pc.report.max_stretch,
                if levels_ok { "ok" } else { "over" },
                pc.report.mst_weight,
                lb,
                pc.report.lightness,
                lightness_trend(d, eps)
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut sets = 0;
    for d in [3usize, 4] {
        for n in [5usize, 10, 20, 40] {
            for _ in 0..5 {
                let pts: Vec<Point> = (0..n)
                    .map(|_| {
                        let mut c = vec![0.0];
                        c.extend((1..d).map(|_| rng.gen::<f64>()));
                        Point::new(c).unwrap()
                    })
                    .collect();
                ok &= verified_spanner(&pts, &greedy_spanner(&pts, BASE_SPANNER_T), BASE_SPANNER_T);
                sets += 1;
            }
        }
    }
    // a whole pyramid base graph small enough for the exact spanner
    let small = build_pyramid_core(3, 0.25, &GridSpec::new(9, 3).unwrap(), DEFAULT_LAMBDA).unwrap();
    let ids: Vec<usize> = (1..small.graph.input_count())
        .chain(small.base_grid.iter().copied())
        .collect();
    let local: Vec<Point> = ids.iter().map(|&v| small.graph.point(v).clone()).collect();
    let pos = |v: usize| ids.iter().position(|&x| x == v).unwrap();
    let base: Vec<(usize, usize)> = small
        .base_edges
        .iter()
        .map(|&(u, v)| (pos(u), pos(v)))
        .collect();
    let base_ok = local.len() <= 40 && verified_spanner(&local, &base, BASE_SPANNER_T);
    ok &= base_ok;
    notes.push(format!(
        "5/4-spanner verified on {sets} sets with n <= 40 and on a {}-vertex pyramid base: {}",
        local.len(),
        if base_ok { "ok" } else { "failed" }
    ));
    line(ok, format!("pyramid: {}", notes.join("; ")))
}

fn oracles(builds: &[(&Instance, SltBuild)]) -> Line {
    let mut prim_bad = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(2..=8);
        let n = rng.gen_range(2..=120);
        let pts = random(d, n, 1000 + seed).unwrap();
        let prim = euclidean_mst(&pts).unwrap().weight();
        if !close(prim, kruskal_weight(&pts), 1e-12) {
            prim_bad += 1;
        }
    }
    let (mut graphs, mut dij_bad) = (0, 0);
    for (_, b) in builds {
        for g in [&b.graph, &b.tree] {
            let n = g.vertex_count();
            if n > 200 {
                continue;
            }
            graphs += 1;
            let edges: Vec<_> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
            let fw = floyd_warshall(n, &edges);
            let adj = g.adjacency();
            for (src, fw_row) in fw.iter().enumerate() {
                let dist = dijkstra(&adj, src).dist;
                if dist
                    .iter()
                    .zip(fw_row)
                    .any(|(a, b)| !(a == b || close(*a, *b, 1e-12)))
                {
                    dij_bad += 1;
                    break;
                }
            }
        }
    }
    line(
        prim_bad == 0 && dij_bad == 0 && graphs > 0,
        format!(
            "oracle equivalence: Prim vs Kruskal {prim_bad}/100 mismatches; Dijkstra vs Floyd-Warshall {dij_bad}/{graphs} graphs mismatched"
        ),
    )
}

fn peak_rss_mib() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let kb: f64 = status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()?;
    Some(kb / 1024.0)
}

fn performance() -> Line {
    let pts = random(8, 500, 2024).unwrap();
    let t = Instant::now();
    let b = assemble_slt(&pts, 0.04, &PipelineOptions::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let rss = peak_rss_mib();
    line(
        secs < 10.0 && rss.is_some_and(|m| m < 1024.0),
        format!(
            "performance: n=500 d=8 eps=0.04 in {secs:.3} s, {} graph vertices, peak RSS {}",
            b.graph.vertex_count(),
            rss.map_or("unavailable".to_string(), |m| format!("{m:.1} MiB"))
        ),
    )
}

fn determinism() -> Line {
    let files = || {
        let pts = random(3, 60, 7).unwrap();
        let b = assemble_slt(&pts, 0.04, &PipelineOptions::default()).unwrap();
        let (core_tree, core_report) = core_slt(
            &slt_core::generate::core(0.04, 12).unwrap(),
            0.04,
            DEFAULT_LAMBDA,
        )
        .unwrap();
        let pc =
            build_pyramid_core(3, 0.09, &GridSpec::new(25, 3).unwrap(), DEFAULT_LAMBDA).unwrap();
        [
            to_canonical_json(&TreeFile::from_graph(&b.tree)).unwrap(),
            to_canonical_json(&b.report).unwrap(),
            to_canonical_json(&TreeFile::from_graph(&core_tree)).unwrap(),
            to_canonical_json(&core_report).unwrap(),
            to_canonical_json(&TreeFile::from_graph(&pc.tree)).unwrap(),
            to_canonical_json(&pc.report).unwrap(),
        ]
    };
    let (a, b) = (files(), files());
    let same = a == b;
    let round_trip = a.iter().step_by(2).all(|text| {
        let tf: TreeFile = serde_json::from_str(text).unwrap();
        to_canonical_json(&tf).unwrap() == *text
    });
    line(
        same && round_trip,
        format!(
            "determinism: repeated builds byte-identical {same}, tree files reparse byte-identical {round_trip}"
        ),
    )
}

fn main() {
    let total = Instant::now();
    let instances = suite();
    let mut lines: Vec<(usize, Line)> = Vec::new();

    // run first so the peak memory reading reflects this build alone
    lines.push((10, performance()));
    let (c1, note1) = surface_angle_bound(&instances);
    lines.push((1, c1));
    lines.push((3, doubling(&instances)));
    lines.push((4, core_bounds()));

    let builds: Vec<(&Instance, SltBuild)> = instances
        .iter()
        .map(|i| {
            let b = assemble_slt(&i.pts, i.eps, &PipelineOptions::default())
                .unwrap_or_else(|e| panic!("{}: {e}", i.label));
            (i, b)
        })
        .collect();
    let circles: Vec<(f64, SltBuild)> = CIRCLE_EPS
        .iter()
        .chain(&EPSILONS)
        .map(|&e| {
            (
                e,
                assemble_slt(&circle(e).unwrap(), e, &PipelineOptions::default()).unwrap(),
            )
        })
        .collect();
    lines.push((2, isometry(&builds)));
    lines.push((5, stretch(&builds, &circles)));
    lines.push((6, lightness_scaling(&builds, &circles)));
    lines.push((7, dimension_independence()));
    lines.push((8, pyramid()));
    lines.push((9, oracles(&builds)));
    lines.push((11, determinism()));

    lines.sort_by_key(|(k, _)| *k);
    let passed = lines.iter().filter(|(_, l)| l.pass).count();
    for (k, l) in &lines {
        println!(
            "criterion {k:2} {} {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.text
        );
        if *k == 1 {
            println!("              {note1}");
        }
    }
    println!(
        "acceptance: {passed}/{} criteria pass in {:.1} s",
        lines.len(),
        total.elapsed().as_secs_f64()
    );
    if passed != lines.len() {
        std::process::exit(1);
    }
}
