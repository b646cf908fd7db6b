//! Independent reference implementations (oracles) checked against the
//! production code paths.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use srf_core::clustering::{optics_order, Metric, OpticsParams};
use srf_core::embedding::DocumentVector;
use srf_core::lexicon::{expand_by_guided_walk, ConceptGraph, EdgeType, Lexicon, WalkConfig};
use srf_core::relatedness::{semantic_relatedness, UserPostIndex};

fn dv(id: &str, v: Vec<f64>) -> DocumentVector {
    DocumentVector {
        doc_id: id.into(),
        vector: v,
        token_count: 1,
    }
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Direct transcription of the relatedness definition: enumerate all cross
/// pairs per common user, count those above the threshold, divide by the
/// user's total posts on both sides, average over users.
fn sr_oracle(
    s1_posts: &[(String, Vec<Vec<f64>>)],
    s2_posts: &[(String, Vec<Vec<f64>>)],
    threshold: f64,
) -> Option<f64> {
    let mut users: Vec<&String> = s1_posts
        .iter()
        .filter(|(u, _)| s2_posts.iter().any(|(v, _)| v == u))
        .map(|(u, _)| u)
        .collect();
    users.sort();
    if users.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for u in &users {
        let p1 = &s1_posts.iter().find(|(x, _)| x == *u).unwrap().1;
        let p2 = &s2_posts.iter().find(|(x, _)| x == *u).unwrap().1;
        let mut hits = 0usize;
        for a in p1 {
            for b in p2 {
                if cos(a, b) > threshold {
                    hits += 1;
                }
            }
        }
        total += hits as f64 / (p1.len() + p2.len()) as f64;
    }
    Some(total / users.len() as f64)
}

#[test]
fn sr_matches_brute_force_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let start = std::time::Instant::now();
    for trial in 0..20 {
        let n_users = rng.gen_range(1..=5);
        let dim = 4;
        let mut index = UserPostIndex::new();
        let mut s1_posts = Vec::new();
        let mut s2_posts = Vec::new();
        for u in 0..n_users {
            let user = format!("u{u}");
            let mut p1 = Vec::new();
            let mut p2 = Vec::new();
            for p in 0..rng.gen_range(1..=4) {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                index.insert(&user, "s1", dv(&format!("u{u}a{p}"), v.clone()));
                p1.push(v);
            }
            for p in 0..rng.gen_range(1..=4) {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                index.insert(&user, "s2", dv(&format!("u{u}b{p}"), v.clone()));
                p2.push(v);
            }
            s1_posts.push((user.clone(), p1));
            s2_posts.push((user, p2));
        }
        let threshold = rng.gen_range(0.0..0.95);
        let (sr, nu) = semantic_relatedness("s1", "s2", &index, threshold).unwrap();
        let expected = sr_oracle(&s1_posts, &s2_posts, threshold).unwrap();
        assert!(
            (sr - expected).abs() < 1e-12,
            "trial {trial}: sr {sr} vs oracle {expected}"
        );
        assert_eq!(nu, n_users);

        // symmetry must be bit-exact
        let (sr_rev, _) = semantic_relatedness("s2", "s1", &index, threshold).unwrap();
        assert_eq!(sr.to_bits(), sr_rev.to_bits(), "trial {trial}: asymmetric SR");
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

// ---------------------------------------------------------------------------
// OPTICS quadratic reference
// ---------------------------------------------------------------------------

struct RefPoint {
    id: String,
    reach: Option<f64>,
    core: Option<f64>,
}

/// Straightforward quadratic-time OPTICS with the same contract: core
/// distance includes the point itself; unprocessed points start in sorted-id
/// order; the seed with the smallest (reachability, id) expands next.
fn optics_reference(vectors: &[DocumentVector], params: &OpticsParams) -> Vec<RefPoint> {
    let n = vectors.len();
    let d = |a: usize, b: usize| params.distance(&vectors[a].vector, &vectors[b].vector).unwrap();
    let core = |p: usize| -> Option<f64> {
        let mut ds: Vec<f64> = (0..n).map(|q| d(p, q)).filter(|&x| x <= params.max_eps).collect();
        if ds.len() < params.min_pts {
            return None;
        }
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(ds[params.min_pts - 1])
    };
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| vectors[a].doc_id.cmp(&vectors[b].doc_id));
    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut out = Vec::new();

    let emit = |p: usize, reach: &[Option<f64>], out: &mut Vec<RefPoint>, core_p: Option<f64>| {
        out.push(RefPoint {
            id: vectors[p].doc_id.clone(),
            reach: reach[p],
            core: core_p,
        });
    };

    for &start in &ids {
        if processed[start] {
            continue;
        }
        processed[start] = true;
        let cd = core(start);
        emit(start, &reach, &mut out, cd);
        // seed list: every unprocessed point with a defined reachability
        let mut current = start;
        let mut current_core = cd;
        loop {
            if let Some(ccd) = current_core {
                for q in 0..n {
                    if processed[q] {
                        continue;
                    }
                    let dist = d(current, q);
                    if dist > params.max_eps {
                        continue;
                    }
                    let r = ccd.max(dist);
                    if reach[q].map_or(true, |old| r < old) {
                        reach[q] = Some(r);
                    }
                }
            }
            // pick the unprocessed point with smallest (reach, id)
            let mut next: Option<usize> = None;
            for q in 0..n {
                if processed[q] || reach[q].is_none() {
                    continue;
                }
                next = match next {
                    None => Some(q),
                    Some(b) => {
                        let (rq, rb) = (reach[q].unwrap(), reach[b].unwrap());
                        if rq < rb
                            || (rq == rb && vectors[q].doc_id < vectors[b].doc_id)
                        {
                            Some(q)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            match next {
                None => break,
                Some(p) => {
                    processed[p] = true;
                    let cd = core(p);
                    emit(p, &reach, &mut out, cd);
                    current = p;
                    current_core = cd;
                }
            }
        }
    }
    out
}

#[test]
fn optics_matches_quadratic_reference() {
    let start = std::time::Instant::now();
    for trial in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
        let mut vectors = Vec::new();
        // three loose groups plus stragglers, 60 points
        for i in 0..60 {
            let center = match i % 3 {
                0 => (0.0, 0.0),
                1 => (5.0, 5.0),
                _ => (10.0, -3.0),
            };
            vectors.push(dv(
                &format!("p{i:02}"),
                vec![
                    center.0 + rng.gen_range(-2.0..2.0),
                    center.1 + rng.gen_range(-2.0..2.0),
                ],
            ));
        }
        let params = OpticsParams {
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::Euclidean,
        };
        let production = optics_order(&vectors, &params).unwrap();
        let reference = optics_reference(&vectors, &params);
        assert_eq!(production.len(), reference.len());
        for (p, r) in production.iter().zip(&reference) {
            assert_eq!(p.doc_id, r.id, "trial {trial}: ordering diverged");
            assert_eq!(p.reachability, r.reach, "trial {trial}: reachability for {}", p.doc_id);
            assert_eq!(p.core_distance, r.core, "trial {trial}: core for {}", p.doc_id);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn blob_boundary_shows_one_spike() {
    // two well-separated blobs: exactly one large reachability jump
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vectors = Vec::new();
    for i in 0..25 {
        let theta: f64 = rng.gen_range(-0.02..0.02);
        vectors.push(dv(&format!("a{i:02}"), vec![theta.cos(), theta.sin()]));
    }
    for i in 0..25 {
        let theta = std::f64::consts::PI + rng.gen_range(-0.02..0.02);
        vectors.push(dv(&format!("b{i:02}"), vec![theta.cos(), theta.sin()]));
    }
    let params = OpticsParams {
        min_pts: 5,
        max_eps: f64::INFINITY,
        metric: Metric::CosineDistance,
    };
    let ordering = optics_order(&vectors, &params).unwrap();
    let spikes = ordering
        .iter()
        .filter(|p| p.reachability.map_or(false, |r| r > 1.0))
        .count();
    assert_eq!(spikes, 1);
}

// ---------------------------------------------------------------------------
// Random-walk stationary distribution oracle
// ---------------------------------------------------------------------------

/// Dense-matrix RWR on a tiny graph: p_{t+1} = r s + (1-r) T' p.
fn rwr_oracle(
    n: usize,
    edges: &[(usize, usize, f64)],
    seeds: &[usize],
    restart: f64,
    iters: usize,
) -> Vec<f64> {
    let mut seed_vec = vec![0.0; n];
    for &s in seeds {
        seed_vec[s] = 1.0 / seeds.len() as f64;
    }
    let mut p = seed_vec.clone();
    for _ in 0..iters {
        let mut next = vec![0.0; n];
        for u in 0..n {
            let out: Vec<&(usize, usize, f64)> =
                edges.iter().filter(|(s, _, _)| *s == u).collect();
            let total: f64 = out.iter().map(|(_, _, w)| w).sum();
            if total > 0.0 {
                for (_, v, w) in out {
                    next[*v] += (1.0 - restart) * p[u] * w / total;
                }
            } else {
                for (i, sv) in seed_vec.iter().enumerate() {
                    next[i] += (1.0 - restart) * p[u] * sv;
                }
            }
        }
        for (i, sv) in seed_vec.iter().enumerate() {
            next[i] += restart * sv;
        }
        p = next;
    }
    p
}

#[test]
fn walk_max_threshold_keeps_only_argmax_nodes() {
    // star graph: seed -> a, b, c (uniform weights); a,b,c tie below the seed
    let mut graph = ConceptGraph::new();
    graph.add_edge("s", "a", EdgeType::IsA, "seed concept", "alpha").unwrap();
    graph.add_edge("s", "b", EdgeType::IsA, "seed concept", "beta").unwrap();
    graph.add_edge("s", "c", EdgeType::IsA, "seed concept", "gamma").unwrap();
    let lex = Lexicon::from_categories("l", vec![("cat", vec!["seed concept"])]);
    let cfg = WalkConfig {
        min_visit_weight: 1.0,
        ..WalkConfig::default()
    };
    let out = expand_by_guided_walk(&lex, &graph, &cfg).unwrap();
    // only nodes tied at the maximum visit frequency survive; the seed node
    // (restart target) holds the max, leaves sit below it
    let terms = &out.categories["cat"];
    assert!(terms.contains_key("seed concept"));
    assert!(!terms.contains_key("alpha"));

    // oracle agreement on the stationary distribution shape
    let p = rwr_oracle(
        4,
        &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
        &[0],
        0.15,
        10_000,
    );
    let max = p.iter().cloned().fold(0.0_f64, f64::max);
    assert!((p[0] - max).abs() < 1e-12);
    assert!(p[1] < max && (p[1] - p[2]).abs() < 1e-12 && (p[2] - p[3]).abs() < 1e-12);
}

#[test]
fn walk_frequencies_match_dense_oracle() {
    // 5-node chain with an association shortcut
    let mut graph = ConceptGraph::new();
    graph.add_edge("n0", "n1", EdgeType::ChildOf, "node zero", "node one").unwrap();
    graph.add_edge("n1", "n2", EdgeType::ChildOf, "node one", "node two").unwrap();
    graph.add_edge("n2", "n3", EdgeType::ChildOf, "node two", "node three").unwrap();
    graph.add_edge("n0", "n4", EdgeType::AssociatedWith, "node zero", "node four").unwrap();
    let lex = Lexicon::from_categories("l", vec![("cat", vec!["node zero"])]);
    let cfg = WalkConfig {
        min_visit_weight: 1e-6,
        ..WalkConfig::default()
    };
    let out = expand_by_guided_walk(&lex, &graph, &cfg).unwrap();

    // node ids interned in edge order: n0, n1, n2, n3, n4
    let p = rwr_oracle(
        5,
        &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 4, 0.5)],
        &[0],
        0.15,
        10_000,
    );
    let max = p.iter().cloned().fold(0.0_f64, f64::max);
    let terms = &out.categories["cat"];
    for (label, idx) in [("node one", 1), ("node two", 2), ("node three", 3), ("node four", 4)] {
        let expected = p[idx] / max;
        let got = terms[label];
        assert!(
            (got - expected).abs() < 1e-9,
            "{label}: got {got}, oracle {expected}"
        );
    }
}
