//! End-to-end acceptance suite. Every criterion prints one PASS/FAIL line
//! (written straight to stdout so it shows even when output is captured) and
//! the test fails if any criterion does.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use conngraph::io::{positive_weight_histogram, truncate_edges};
use conngraph::linalg::{frobenius_distance, frobenius_inner, frobenius_norm};
use conngraph::solvers::{smoothness_gradient, smoothness_objective};
use conngraph::{
    component_count_bfs, connectedness_margin, consensus_design, dykstra_project, is_connected,
    mu_subgradient, mu_value, simulate_consensus, spectral_component_count, spg_learn,
    AdjacencyMatrix, ConsensusProblem, ConstraintSet, ConstraintSpec, SolveReport, SolverOptions,
    SpgProblem, SupportMask, SynthConfig,
};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

// ---------------------------------------------------------------------------
// Criteria 1 and 2: random graph corpus

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AdjacencyMatrix {
    let density = rng.random_range(0.05..0.9);
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(density) {
                let x = rng.random_range(0.1..=10.0);
                w[[i, j]] = x;
                w[[j, i]] = x;
            }
        }
    }
    AdjacencyMatrix::new(w).unwrap()
}

fn corpus() -> Vec<AdjacencyMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240);
    (0..300)
        .map(|i| random_graph(&mut rng, 1 + i % 12))
        .collect()
}

fn nullity_matches_components() -> Outcome {
    let start = Instant::now();
    let graphs = corpus();
    let mut mismatches = 0;
    let mut disconnected = 0;
    for a in &graphs {
        let bfs = component_count_bfs(a, 0.0).count;
        if bfs > 1 {
            disconnected += 1;
        }
        if spectral_component_count(a, 1e-8).map_err(|e| e.to_string())? != bfs {
            mismatches += 1;
        }
    }
    within(Duration::from_secs(10), start.elapsed())?;
    check(
        mismatches == 0,
        format!(
            "{} graphs ({disconnected} disconnected), {mismatches} mismatches, {:.2?}",
            graphs.len(),
            start.elapsed()
        ),
    )
}

fn margin_sign_matches_connectivity() -> Outcome {
    let graphs = corpus();
    let mut mismatches = 0;
    let mut smallest_connected = f64::INFINITY;
    let mut largest_disconnected = f64::NEG_INFINITY;
    for a in &graphs {
        let margin = connectedness_margin(a).map_err(|e| e.to_string())?;
        if component_count_bfs(a, 0.0).is_connected() {
            smallest_connected = smallest_connected.min(margin);
            if margin <= 1e-10 {
                mismatches += 1;
            }
        } else {
            largest_disconnected = largest_disconnected.max(margin);
            if margin > 1e-10 {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!(
            "{} graphs, {mismatches} mismatches; min connected margin {smallest_connected:e}, \
             max disconnected margin {largest_disconnected:e}",
            graphs.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 3: sparsity staircase on a path

fn path(n: usize) -> AdjacencyMatrix {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    AdjacencyMatrix::from_edges(n, &edges).unwrap()
}

fn staircase(designs: &mut Vec<AdjacencyMatrix>) -> Outcome {
    let start = Instant::now();
    let n = 8;
    let opts = SolverOptions::default();
    let mut counts = Vec::new();
    let mut ok = true;
    for k in 2..=n {
        let eta = 1.05 / (n - k + 1) as f64;
        let r = consensus_design(&ConsensusProblem::new(&path(n), eta), &opts)
            .map_err(|e| format!("k = {k}: {e}"))?;
        let count = spectral_component_count(&r.a, 1e-6).map_err(|e| e.to_string())?;
        ok &= count >= k;
        counts.push(format!("k={k}:{count}"));
        designs.push(r.a);
    }
    let r = consensus_design(&ConsensusProblem::new(&path(n), 1.1), &opts)
        .map_err(|e| e.to_string())?;
    let dist = frobenius_distance(r.a.matrix(), &Array2::eye(n));
    designs.push(r.a);
    ok &= dist <= 1e-3;
    within(Duration::from_secs(60), start.elapsed())?;
    check(
        ok,
        format!(
            "components [{}], eta=1.1 gives |A - I| = {dist:e}, {:.2?}",
            counts.join(" "),
            start.elapsed()
        ),
    )
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5: learning from synthetic sinusoids

struct Learned {
    unconstrained: SolveReport,
    constrained: SolveReport,
}

const TRUNCATE: f64 = 0.001;

fn learn_sinusoids() -> Result<(Learned, Duration), String> {
    let start = Instant::now();
    let x =
        conngraph::io::gen_sinusoids(&SynthConfig::new(50, 50, 0)).map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    let unconstrained =
        spg_learn(&SpgProblem::new(x.clone(), false), &opts).map_err(|e| e.to_string())?;
    let constrained = spg_learn(&SpgProblem::new(x, true).with_epsilon(0.01), &opts)
        .map_err(|e| e.to_string())?;
    Ok((
        Learned {
            unconstrained,
            constrained,
        },
        start.elapsed(),
    ))
}

fn learning_structure(run: &Result<(Learned, Duration), String>) -> Outcome {
    let (l, elapsed) = run.as_ref().map_err(Clone::clone)?;
    within(Duration::from_secs(120), *elapsed)?;
    let free_parts = component_count_bfs(&truncate_edges(&l.unconstrained.a, TRUNCATE), 0.0).count;
    let tied_parts = component_count_bfs(&truncate_edges(&l.constrained.a, TRUNCATE), 0.0).count;
    let margin = l.constrained.margin;
    check(
        free_parts >= 2 && margin >= 0.01 - 1e-6 && tied_parts == 1,
        format!(
            "unconstrained: {free_parts} components after truncation; constrained: margin {margin}, \
             {tied_parts} component(s); {elapsed:.2?}"
        ),
    )
}

fn histogram_spread(run: &Result<(Learned, Duration), String>) -> Outcome {
    let (l, _) = run.as_ref().map_err(Clone::clone)?;
    let bins = |r: &SolveReport| {
        positive_weight_histogram(&truncate_edges(&r.a, TRUNCATE), 50).map(|h| h.occupied_bins())
    };
    let free = bins(&l.unconstrained).map_err(|e| e.to_string())?;
    let tied = bins(&l.constrained).map_err(|e| e.to_string())?;
    check(
        tied > free,
        format!("occupied bins of 50: constrained {tied}, unconstrained {free}"),
    )
}

// ---------------------------------------------------------------------------
// Criterion 6: projections

fn random_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array2<f64> {
    let m = Array2::from_shape_fn((n, n), |_| rng.random_range(-scale..scale));
    (&m + &m.t()) * 0.5
}

fn elementary_sets(rng: &mut ChaCha8Rng, n: usize) -> Vec<ConstraintSet> {
    let mut mask = Array2::from_elem((n, n), true);
    for i in 0..n {
        for j in (i + 1)..n {
            let keep = rng.random_bool(0.6);
            mask[[i, j]] = keep;
            mask[[j, i]] = keep;
        }
    }
    vec![
        ConstraintSet::BoxSym {
            zero_diagonal: false,
        },
        ConstraintSet::BoxSym {
            zero_diagonal: true,
        },
        ConstraintSet::Support(SupportMask::new(mask).unwrap()),
        ConstraintSet::RowSumAffine,
        ConstraintSet::SpectralCap { cap: 0.7 },
    ]
}

fn projections_are_projections() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_idem, mut worst_expand, mut worst_vi) =
        (0.0_f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut cases = 0;
    for case in 0..100 {
        let n = 2 + case % 9;
        for set in elementary_sets(&mut rng, n) {
            let proj = |m: &Array2<f64>| set.project(m).map_err(|e| e.to_string());
            let a = random_sym(&mut rng, n, 3.0);
            let b = random_sym(&mut rng, n, 3.0);
            let (pa, pb) = (proj(&a)?, proj(&b)?);
            worst_idem = worst_idem.max(frobenius_distance(&proj(&pa)?, &pa));
            worst_expand =
                worst_expand.max(frobenius_distance(&pa, &pb) - frobenius_distance(&a, &b));
            let z = proj(&random_sym(&mut rng, n, 1.0))?;
            worst_vi = worst_vi.max(frobenius_inner(&(&a - &pa), &(&z - &pa)));
            cases += 1;
        }
    }

    let spec = ConstraintSpec::new()
        .with(ConstraintSet::BoxSym {
            zero_diagonal: true,
        })
        .and_then(|s| s.with(ConstraintSet::RowSumAffine))
        .map_err(|e| e.to_string())?;
    let singletons = [
        array![[0.0, 1.0], [1.0, 0.0]],
        (Array2::<f64>::ones((3, 3)) - Array2::<f64>::eye(3)) * 0.5,
    ];
    let mut worst_singleton = 0.0_f64;
    for expected in &singletons {
        for _ in 0..20 {
            let m = random_sym(&mut rng, expected.nrows(), 3.0);
            let r = dykstra_project(&m, &spec, 1e-10, 10_000).map_err(|e| e.to_string())?;
            worst_singleton = worst_singleton.max(frobenius_distance(&r.result, expected));
        }
    }
    check(
        worst_idem <= 1e-10 && worst_expand <= 1e-10 && worst_vi <= 1e-8 && worst_singleton <= 1e-6,
        format!(
            "{cases} projections: idempotence {worst_idem:e}, expansion {worst_expand:e}, \
             variational {worst_vi:e}; Dykstra singletons off by {worst_singleton:e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 7: subgradient and gradient

/// Symmetric doubly stochastic: a mix of symmetrized permutations.
fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let terms = 1 + rng.random_range(0..4);
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut out = Array2::zeros((n, n));
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        for (i, &p) in perm.iter().enumerate() {
            out[[i, p]] += 0.5 * w / total;
            out[[p, i]] += 0.5 * w / total;
        }
    }
    out
}

fn derivatives_are_correct() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_slack = f64::NEG_INFINITY;
    for case in 0..100 {
        let n = 2 + case % 9;
        let a = random_stochastic(&mut rng, n);
        let b = random_stochastic(&mut rng, n);
        let sg = mu_subgradient(&a).map_err(|e| e.to_string())?;
        let lower = sg.mu + frobenius_inner(&sg.g, &(&b - &a));
        worst_slack = worst_slack.max(lower - mu_value(&b).map_err(|e| e.to_string())?);
    }

    let mut worst_rel = 0.0_f64;
    for _ in 0..20 {
        let (m, n) = (rng.random_range(1..10), rng.random_range(2..9));
        let x = Array2::from_shape_fn((m, n), |_| rng.random_range(-2.0..2.0));
        let a = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
        let d = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        let h = 1e-5;
        let fd = (smoothness_objective(&x, &(&a + &(&d * h)))
            - smoothness_objective(&x, &(&a - &(&d * h))))
            / (2.0 * h);
        let analytic = frobenius_inner(&smoothness_gradient(&x), &d);
        worst_rel = worst_rel.max((fd - analytic).abs() / analytic.abs().max(1.0));
    }
    check(
        worst_slack <= 1e-8 && worst_rel <= 1e-6,
        format!(
            "100 subgradient pairs, worst violation {worst_slack:e}; 20 gradient checks, \
             worst relative error {worst_rel:e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 8: consensus contraction

fn contraction(designs: &mut Vec<AdjacencyMatrix>) -> Outcome {
    let r = consensus_design(
        &ConsensusProblem::new(&path(8), 0.0).connected(0.01),
        &SolverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mu = mu_value(r.a.matrix()).map_err(|e| e.to_string())?;
    if mu >= 1.0 {
        return Err(format!("connected design has mu = {mu}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_ratio = 0.0_f64;
    for _ in 0..20 {
        let x0: Vec<f64> = (0..8).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mean = x0.iter().sum::<f64>() / 8.0;
        let traj = simulate_consensus(&r.a, &x0, 50).map_err(|e| e.to_string())?;
        let dev = |t: usize| {
            traj.row(t)
                .iter()
                .map(|v| (v - mean).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let d0 = dev(0);
        for t in 0..=50 {
            let bound = mu.powi(t as i32) * d0;
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(dev(t) / bound);
            }
        }
    }
    designs.push(r.a);
    for eta in [0.05, 0.3] {
        let r = consensus_design(
            &ConsensusProblem::new(&path(8), eta).connected(0.01),
            &SolverOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        designs.push(r.a);
    }

    // A computed eigenvalue is only accurate to about n·ε·‖A‖, so `μ < 1` is
    // established only when it clears that bound; designs with exactly
    // disconnected components can land one ulp below 1.
    let mut converging = 0;
    let mut rounding_band = 0;
    let mut violations = 0;
    for a in designs.iter() {
        let mu = mu_value(a.matrix()).map_err(|e| e.to_string())?;
        let rounding = 10.0 * a.n() as f64 * f64::EPSILON * frobenius_norm(a.matrix());
        if mu < 1.0 && mu >= 1.0 - rounding {
            rounding_band += 1;
        }
        if mu < 1.0 - rounding {
            converging += 1;
            if !is_connected(a, 1e-8).map_err(|e| e.to_string())? {
                violations += 1;
            }
        }
    }
    check(
        worst_ratio <= 1.0 + 1e-9 && violations == 0,
        format!(
            "mu = {mu}, worst |x(t) - m1| / (mu^t |x(0) - m1|) = {worst_ratio}; \
             {converging} of {} designs have mu < 1 ({rounding_band} more within rounding of 1), \
             {violations} disconnected",
            designs.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI reproducibility

fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_conngraph"))
            .args(args)
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
        }
        Ok(o.stdout)
    };
    run(&["synth", "--seed", "7", "--out", "data.csv"])?;
    run(&["learn", "--input", "data.csv", "--out", "graph.json"])?;
    let check_out = run(&["check", "--graph", "graph.json"])?;
    run(&[
        "export",
        "--graph",
        "graph.json",
        "--format",
        "dot",
        "--out",
        "graph.dot",
    ])?;
    run(&[
        "export",
        "--graph",
        "graph.json",
        "--format",
        "edgelist",
        "--out",
        "edges.csv",
    ])?;
    let mut artifacts = vec![("check".to_string(), check_out)];
    for name in ["data.csv", "graph.json", "graph.dot", "edges.csv"] {
        artifacts.push((
            name.to_string(),
            std::fs::read(dir.join(name)).map_err(|e| e.to_string())?,
        ));
    }
    Ok(artifacts)
}

fn cli_is_reproducible() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = pipeline(first.path())?;
    let b = pipeline(second.path())?;
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
    check(
        differing.is_empty(),
        format!(
            "{} artifacts ({bytes} bytes) per run; differing: {}",
            a.len(),
            if differing.is_empty() {
                "none".to_string()
            } else {
                differing.join(", ")
            }
        ),
    )
}

// ---------------------------------------------------------------------------

fn report(id: u32, name: &str, outcome: &Outcome) {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let line = format!("[{tag}] criterion {id}: {name}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let mut designs = Vec::new();
    let learned = learn_sinusoids();
    let results = [
        (
            1,
            "Laplacian nullity equals component count",
            nullity_matches_components(),
        ),
        (
            2,
            "connectedness margin sign",
            margin_sign_matches_connectivity(),
        ),
        (3, "sparsity staircase on a path", staircase(&mut designs)),
        (
            4,
            "connected learning on synthetic sinusoids",
            learning_structure(&learned),
        ),
        (
            5,
            "constrained weights spread over more bins",
            histogram_spread(&learned),
        ),
        (6, "projection correctness", projections_are_projections()),
        (
            7,
            "subgradient and gradient checks",
            derivatives_are_correct(),
        ),
        (8, "consensus contraction", contraction(&mut designs)),
        (9, "CLI reproducibility", cli_is_reproducible()),
    ];
    for (id, name, outcome) in &results {
        report(*id, name, outcome);
    }
    let failed: Vec<u32> = results
        .iter()
        .filter(|(_, _, o)| o.is_err())
        .map(|(id, _, _)| *id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
