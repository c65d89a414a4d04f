use std::collections::BTreeSet;

use lenie_core::eval::spearman_corr;
use lenie_core::models::{
    gnn_loss_and_grad, linreg_loss_and_grad, mlp_loss_and_grad, pagerank, personalized_pagerank,
    predict_scores, read_checkpoint, train, write_checkpoint, ModelConfig, ModelKind, NodeFeatureTable,
    RelationalAdjacency,
};
use lenie_core::{Entity, Error, ImportanceLabel, KnowledgeGraph, Relation, Triplet};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, relations: usize, edges: &[(usize, usize, usize)]) -> KnowledgeGraph {
    KnowledgeGraph::new(
        (0..n)
            .map(|id| Entity {
                id,
                name: format!("e{id}"),
                description: None,
                raw_score: None,
            })
            .collect(),
        (0..relations).map(|id| Relation { id, name: format!("r{id}") }).collect(),
        edges
            .iter()
            .map(|&(head, relation, tail)| Triplet { head, relation, tail })
            .collect(),
    )
    .unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, r: usize, m: usize) -> KnowledgeGraph {
    let edges: Vec<_> = (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..r), rng.gen_range(0..n)))
        .collect();
    graph(n, r, &edges)
}

fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0))
}

fn vector(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// `‖analytic − numeric‖ / (‖analytic‖ + ‖numeric‖)` over every parameter,
/// using central differences with step 1e-4.
fn gradient_error(
    params: &[Array2<f64>],
    loss_and_grad: impl Fn(&[Array2<f64>]) -> (f64, Vec<Array2<f64>>),
) -> f64 {
    let eps = 1e-4;
    let (_, analytic) = loss_and_grad(params);
    let (mut diff, mut norm_a, mut norm_n) = (0.0, 0.0, 0.0);
    let mut p = params.to_vec();
    for t in 0..p.len() {
        for idx in 0..p[t].len() {
            let (r, c) = (idx / p[t].ncols(), idx % p[t].ncols());
            let orig = p[t][[r, c]];
            p[t][[r, c]] = orig + eps;
            let up = loss_and_grad(&p).0;
            p[t][[r, c]] = orig - eps;
            let down = loss_and_grad(&p).0;
            p[t][[r, c]] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[t][[r, c]];
            diff += (a - numeric).powi(2);
            norm_a += a * a;
            norm_n += numeric * numeric;
        }
    }
    diff.sqrt() / (norm_a.sqrt() + norm_n.sqrt()).max(1e-12)
}

#[test]
fn linreg_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (n, d) = (rng.gen_range(2..15), rng.gen_range(1..6));
        let x = matrix(&mut rng, n, d);
        let y = vector(&mut rng, n);
        let params = vec![matrix(&mut rng, d, 1), matrix(&mut rng, 1, 1)];
        let err = gradient_error(&params, |p| linreg_loss_and_grad(p, &x, &y, 0.01));
        assert!(err < 1e-4, "{err}");
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..25 {
        let (n, d, h) = (rng.gen_range(2..12), rng.gen_range(1..5), rng.gen_range(1..6));
        let x = matrix(&mut rng, n, d);
        let y = vector(&mut rng, n);
        let params = vec![
            matrix(&mut rng, d, h),
            matrix(&mut rng, 1, h),
            matrix(&mut rng, h, 1),
            matrix(&mut rng, 1, 1),
        ];
        let err = gradient_error(&params, |p| mlp_loss_and_grad(p, &x, &y, 0.003));
        assert!(err < 1e-4, "{err}");
    }
}

fn gnn_params(rng: &mut ChaCha8Rng, d: usize, h: usize, layers: usize, r: usize) -> Vec<Array2<f64>> {
    let mut params = Vec::new();
    for l in 0..layers {
        let fan_in = if l == 0 { d } else { h };
        for _ in 0..=r {
            params.push(matrix(rng, fan_in, h));
        }
        params.push(matrix(rng, 1, h));
    }
    params.push(matrix(rng, h, 1));
    params.push(matrix(rng, 1, 1));
    params
}

#[test]
fn gnn_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..25 {
        let n = rng.gen_range(3..10);
        let r = rng.gen_range(1..4);
        let m = rng.gen_range(0..3 * n);
        let kg = random_graph(&mut rng, n, r, m);
        let adj = RelationalAdjacency::new(&kg, r);
        let (d, h, layers) = (rng.gen_range(1..4), rng.gen_range(1..5), 1 + trial % 3);
        let x = matrix(&mut rng, n, d);
        let train: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.7)).chain([0]).collect::<BTreeSet<_>>().into_iter().collect();
        let y = vector(&mut rng, train.len());
        let params = gnn_params(&mut rng, d, h, layers, r);
        let err = gradient_error(&params, |p| gnn_loss_and_grad(p, &adj, &x, layers, &train, &y, 0.002));
        assert!(err < 1e-4, "trial {trial}: {err}");
    }
}

#[test]
fn edgeless_single_layer_gnn_equals_mlp() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, d, h) = (9, 3, 5);
    let kg = graph(n, 2, &[]);
    let adj = RelationalAdjacency::new(&kg, 2);
    let x = matrix(&mut rng, n, d);
    let y = vector(&mut rng, n);
    let train: Vec<usize> = (0..n).collect();
    let g = gnn_params(&mut rng, d, h, 1, 2);
    let mlp = vec![g[0].clone(), g[3].clone(), g[4].clone(), g[5].clone()];
    let (gl, gg) = gnn_loss_and_grad(&g, &adj, &x, 1, &train, &y, 0.0);
    let (ml, mg) = mlp_loss_and_grad(&mlp, &x, &y, 0.0);
    assert!((gl - ml).abs() < 1e-12);
    for (a, b) in [(&gg[0], &mg[0]), (&gg[3], &mg[1]), (&gg[4], &mg[2]), (&gg[5], &mg[3])] {
        assert!((a - b).iter().all(|v| v.abs() < 1e-12));
    }
    assert!(gg[1].iter().chain(gg[2].iter()).all(|&v| v == 0.0));
}

fn labels_for(nodes: &[usize], y: &[f64]) -> Vec<ImportanceLabel> {
    nodes.iter().zip(y).map(|(&node, &value)| ImportanceLabel { node, value }).collect()
}

fn table(x: &Array2<f64>) -> NodeFeatureTable {
    NodeFeatureTable::new((0..x.nrows()).collect(), x.clone()).unwrap()
}

#[test]
fn linreg_recovers_an_exact_linear_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = matrix(&mut rng, 60, 3);
    let w = [1.5, -2.0, 0.5];
    let y: Vec<f64> = x.rows().into_iter().map(|r| 0.7 + r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).collect();
    let nodes: Vec<usize> = (0..60).collect();
    let cfg = ModelConfig {
        learning_rate: 0.2,
        epochs: 3000,
        l2: 0.0,
        ..ModelConfig::new(ModelKind::Linreg)
    };
    let kg = graph(60, 1, &[]);
    let model = train(&cfg, &kg, &table(&x), &labels_for(&nodes, &y)).unwrap();
    let pred = predict_scores(&model, &kg, &table(&x), &nodes).unwrap();
    for (p, t) in pred.scores.iter().zip(&y) {
        assert!((p - t).abs() < 1e-6, "{p} vs {t}");
    }
    assert!(model.loss_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
}

#[test]
fn constant_labels_give_a_constant_predictor() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = matrix(&mut rng, 10, 2);
    let nodes: Vec<usize> = (0..10).collect();
    let kg = graph(10, 1, &[]);
    let model = train(&ModelConfig::new(ModelKind::Linreg), &kg, &table(&x), &labels_for(&nodes, &[2.5; 10])).unwrap();
    assert_eq!(model.notes.len(), 1);
    let pred = predict_scores(&model, &kg, &table(&x), &nodes).unwrap();
    assert!(pred.scores.iter().all(|&s| s == 2.5));
}

#[test]
fn training_rejects_degenerate_inputs() {
    let kg = graph(3, 1, &[]);
    let x = Array2::zeros((3, 2));
    let one = labels_for(&[0], &[1.0]);
    for kind in [ModelKind::Linreg, ModelKind::Mlp, ModelKind::Gnn] {
        assert!(matches!(train(&ModelConfig::new(kind), &kg, &table(&x), &one), Err(Error::Config(_))));
    }
    let bad = ModelConfig {
        learning_rate: 0.0,
        ..ModelConfig::new(ModelKind::Mlp)
    };
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let missing = labels_for(&[0, 7], &[1.0, 2.0]);
    assert!(train(&ModelConfig::new(ModelKind::Mlp), &kg, &table(&x), &missing).is_err());
}

#[test]
fn huge_learning_rate_reports_divergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = matrix(&mut rng, 20, 4) * 100.0;
    let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let nodes: Vec<usize> = (0..20).collect();
    let cfg = ModelConfig {
        learning_rate: 1e6,
        ..ModelConfig::new(ModelKind::Mlp)
    };
    let err = train(&cfg, &graph(20, 1, &[]), &table(&x), &labels_for(&nodes, &y)).unwrap_err();
    assert!(matches!(err, Error::Training(_)), "{err}");
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Stationary vector of the teleporting walk, solved directly.
fn dense_pagerank(kg: &KnowledgeGraph, teleport: &[f64], damping: f64) -> Vec<f64> {
    let n = kg.num_entities();
    let mut out = vec![0.0; n];
    for t in kg.triplets() {
        out[t.head] += 1.0;
    }
    // x = d (M x + t (dangling · x)) + (1 - d) t
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
        for (j, cell) in row.iter_mut().enumerate() {
            if out[j] == 0.0 {
                *cell -= damping * teleport[i];
            }
        }
    }
    for t in kg.triplets() {
        a[t.tail][t.head] -= damping / out[t.head];
    }
    solve(a, teleport.iter().map(|t| (1.0 - damping) * t).collect())
}

#[test]
fn pagerank_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let m = rng.gen_range(0..200);
        let kg = random_graph(&mut rng, 50, 2, m);
        let r = pagerank(&kg, 0.85, 1e-13, 1000).unwrap();
        assert!(r.converged);
        let oracle = dense_pagerank(&kg, &[1.0 / 50.0; 50], 0.85);
        for (a, b) in r.scores.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let restart: BTreeSet<usize> = (0..50).filter(|_| rng.gen_bool(0.2)).chain([3]).collect();
        let ppr = personalized_pagerank(&kg, &restart, 0.85, 1e-13, 1000).unwrap();
        let mut teleport = vec![0.0; 50];
        for &v in &restart {
            teleport[v] = 1.0 / restart.len() as f64;
        }
        let oracle = dense_pagerank(&kg, &teleport, 0.85);
        for (a, b) in ppr.scores.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((ppr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let everyone: BTreeSet<usize> = (0..50).collect();
        let full = personalized_pagerank(&kg, &everyone, 0.85, 1e-13, 1000).unwrap();
        for (a, b) in full.scores.iter().zip(&r.scores) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn star_center_ranks_first() {
    let edges: Vec<_> = (1..8).map(|leaf| (leaf, 0, 0)).collect();
    let r = pagerank(&graph(8, 1, &edges), 0.85, 1e-12, 500).unwrap();
    assert!((1..8).all(|leaf| r.scores[0] > r.scores[leaf]));
    assert!((2..8).all(|leaf| (r.scores[leaf] - r.scores[1]).abs() < 1e-15));
}

#[test]
fn ppr_leaves_unreachable_component_at_zero() {
    let kg = graph(6, 1, &[(0, 0, 1), (1, 0, 2), (2, 0, 0), (3, 0, 4), (4, 0, 5)]);
    let r = personalized_pagerank(&kg, &BTreeSet::from([0]), 0.85, 1e-12, 500).unwrap();
    assert_eq!(&r.scores[3..], &[0.0, 0.0, 0.0]);
    assert!(r.scores[..3].iter().all(|&s| s > 0.0));
}

fn gnn_config(layers: usize) -> ModelConfig {
    ModelConfig {
        hidden_dim: 8,
        layers,
        epochs: 5,
        learning_rate: 0.01,
        ..ModelConfig::new(ModelKind::Gnn)
    }
}

#[test]
fn gnn_prediction_only_sees_l_hops() {
    let path: Vec<_> = (0..7).map(|i| (i, i % 2, i + 1)).collect();
    let kg = graph(8, 2, &path);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = matrix(&mut rng, 8, 3);
    let nodes: Vec<usize> = (0..8).collect();
    let y: Vec<f64> = (0..8).map(|i| i as f64 / 4.0).collect();
    for layers in 1..=3 {
        let model = train(&gnn_config(layers), &kg, &table(&x), &labels_for(&nodes, &y)).unwrap();
        let base = predict_scores(&model, &kg, &table(&x), &[0]).unwrap().scores[0];
        // Node `layers + 1` is out of range; node `layers` is the farthest in range.
        let mut far = x.clone();
        far.row_mut(layers + 1).fill(9.0);
        let moved = predict_scores(&model, &kg, &table(&far), &[0]).unwrap().scores[0];
        assert_eq!(base, moved, "layers {layers}");
        let mut near = x.clone();
        near.row_mut(layers).fill(9.0);
        let moved = predict_scores(&model, &kg, &table(&near), &[0]).unwrap().scores[0];
        assert_ne!(base, moved, "layers {layers}");
    }
}

#[test]
fn training_is_deterministic_and_checkpoints_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let kg = random_graph(&mut rng, 30, 3, 80);
    let x = matrix(&mut rng, 30, 4);
    let nodes: Vec<usize> = (0..30).step_by(2).collect();
    let y: Vec<f64> = nodes.iter().map(|&v| v as f64 / 10.0).collect();
    let labels = labels_for(&nodes, &y);
    let dir = tempfile::tempdir().unwrap();
    let all: Vec<usize> = (0..30).collect();
    for kind in [ModelKind::Pagerank, ModelKind::Ppr, ModelKind::Linreg, ModelKind::Mlp, ModelKind::Gnn] {
        let cfg = ModelConfig {
            epochs: 20,
            hidden_dim: 6,
            seed: 4,
            ..ModelConfig::new(kind)
        };
        let a = train(&cfg, &kg, &table(&x), &labels).unwrap();
        let b = train(&cfg, &kg, &table(&x), &labels).unwrap();
        assert_eq!(a, b);
        let path = dir.path().join(format!("{}.lenm", kind.as_str()));
        write_checkpoint(&path, &a).unwrap();
        let back = read_checkpoint(&path).unwrap();
        // Payloads are stored as f32.
        assert_eq!((back.kind, back.layers, back.num_relations), (a.kind, a.layers, a.num_relations));
        assert_eq!((back.pr_max_iters, &back.restart), (a.pr_max_iters, &a.restart));
        assert_eq!(back.damping, 0.85f32 as f64);
        assert_eq!(back.params.len(), a.params.len());
        for (p, q) in back.params.iter().zip(&a.params) {
            assert_eq!(p.dim(), q.dim());
            assert!(p.iter().zip(q).all(|(u, v)| *u == *v as f32 as f64));
        }
        let again = dir.path().join("again.lenm");
        write_checkpoint(&again, &back).unwrap();
        assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&path).unwrap());
        let p1 = predict_scores(&a, &kg, &table(&x), &all).unwrap();
        let p2 = predict_scores(&back, &kg, &table(&x), &all).unwrap();
        assert!(p1.scores.iter().zip(&p2.scores).all(|(u, v)| (u - v).abs() <= 1e-5 * (1.0 + u.abs())));
        assert_eq!(p1, predict_scores(&a, &kg, &table(&x), &all).unwrap());
    }
    let garbage = dir.path().join("garbage.lenm");
    std::fs::write(&garbage, b"NOPE").unwrap();
    assert!(matches!(read_checkpoint(&garbage), Err(Error::Format(_))));
}

#[test]
fn gnn_learns_a_planted_neighbourhood_signal() {
    // Target: mean of feature 0 over relation-0 neighbours. Relation 1 is noise.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 300;
    let mut edges = Vec::new();
    for v in 0..n {
        for _ in 0..rng.gen_range(1..5) {
            edges.push((v, 0, rng.gen_range(0..n)));
        }
        for _ in 0..rng.gen_range(0..4) {
            edges.push((v, 1, rng.gen_range(0..n)));
        }
    }
    let kg = graph(n, 2, &edges);
    let x = Array2::from_shape_simple_fn((n, 4), || rng.gen_range(0.0..1.0));
    let mut nb = vec![BTreeSet::new(); n];
    for &(h, r, t) in &edges {
        if r == 0 {
            nb[h].insert(t);
            nb[t].insert(h);
        }
    }
    let y: Vec<f64> = (0..n)
        .map(|v| 2.0 * nb[v].iter().map(|&u| x[[u, 0]]).sum::<f64>() / nb[v].len() as f64)
        .collect();
    let train_nodes: Vec<usize> = (0..n).filter(|v| v % 5 != 0).collect();
    let test_nodes: Vec<usize> = (0..n).filter(|v| v % 5 == 0).collect();
    let labels: Vec<_> = train_nodes.iter().map(|&v| ImportanceLabel { node: v, value: y[v] }).collect();
    let cfg = ModelConfig {
        hidden_dim: 16,
        layers: 1,
        epochs: 2000,
        learning_rate: 0.1,
        ..ModelConfig::new(ModelKind::Gnn)
    };
    let model = train(&cfg, &kg, &table(&x), &labels).unwrap();
    let pred = predict_scores(&model, &kg, &table(&x), &test_nodes).unwrap();
    let truth: Vec<f64> = test_nodes.iter().map(|&v| y[v]).collect();
    let rho = spearman_corr(&pred.scores, &truth).unwrap();
    assert!(rho > 0.9, "spearman {rho}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pagerank_is_a_distribution(seed in any::<u64>(), n in 1usize..25, m in 0usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kg = random_graph(&mut rng, n, 2, m);
        let r = pagerank(&kg, 0.85, 1e-12, 1000).unwrap();
        prop_assert!(r.scores.iter().all(|&s| s > 0.0));
        prop_assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
