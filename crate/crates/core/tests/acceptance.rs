//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sclab_core::funclass::{
    construct_adversarial_universal, construct_example1_optimal, construct_example2_optimal,
    construct_example4_optimal, construct_relu_adversarial_example4, forward, lipschitz_of_values,
    scaled_indicator_model, ClassTag, FunctionClassSpec, RepresentationModel,
};
use sclab_core::objective::{loss_and_grad, population_loss, train, Objective, TrainConfig};
use sclab_core::posgraph::{connected_components, PositivePairGraph};
use sclab_core::probe::{
    fit_linear_head, measure_assumptions, measure_eigenspace_quantities, probe_model,
    theorem31_bound, theorem42_bound, theorem42_verdict, theorem56_bound, Verdict,
};
use sclab_core::septest::{br_constrained_search, br_oracle_tabular, br_table, estimate_br, BrOptions};
use sclab_core::spectral::{is_eigenfunction, pair_discrepancy, GraphFunction};
use sclab_core::synthdata::{
    component_graph, example1_graph, example1_sign_targets, example2_labels, example3_graph,
    example3_lattice, example4_graph, random_graph, two_level_cluster_graph, ComponentGraphSpec,
    Example1Spec, Example3Spec, Example4Spec, IntraPairRule, SignLabelMap, TwoLevelSpec,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion1() -> Outcome {
    let spec = Example1Spec::new(6, 2, vec![0.5, 1.0]);
    let graph = example1_graph(&spec).map_err(err)?.graph;
    let targets = example1_sign_targets(&graph, &spec);
    let built = construct_example1_optimal(&spec, 2).map_err(err)?;
    let built_err = probe_model(&graph, &built, &targets).map_err(err)?.error;
    let trained = train(
        &graph,
        Objective::Population,
        &FunctionClassSpec::new(ClassTag::Linear, 2),
        1.0,
        &TrainConfig::default(),
    )
    .map_err(err)?;
    let trained_err = probe_model(&graph, &trained.model, &targets).map_err(err)?.error;
    check(
        built_err <= 1e-6 && trained_err <= 1e-6,
        format!(
            "construction error {built_err:.3e}, trained error {trained_err:.3e} (loss {:.3e})",
            trained.loss.total
        ),
    )
}

fn criterion2() -> Outcome {
    let (d, s) = (6, 2);
    let spec = Example1Spec::new(d, s, vec![0.5, 1.0]);
    let graph = example1_graph(&spec).map_err(err)?.graph;
    let targets = example1_sign_targets(&graph, &spec);
    let key: Vec<usize> = (1..d).collect();
    let model = construct_adversarial_universal(&graph, 1 << (d - 1), &key).map_err(err)?;
    let loss = population_loss(&graph, &model, 1.0).map_err(err)?.total;
    let error = probe_model(&graph, &model, &targets).map_err(err)?.error;
    check(
        loss.abs() <= 1e-10 && error >= 1.0 - 1e-8,
        format!("k = {}, loss {loss:.3e}, best-head error {error:.12}", 1 << (d - 1)),
    )
}

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let graphs = 200;
    for t in 0..graphs {
        let n = rng.gen_range(4..40);
        let comps = rng.gen_range(2..=n.min(6));
        let graph = random_graph(n, comps, rng.gen_range(0.1..0.6), 2, t).map_err(err)?;
        let part = connected_components(&graph);
        let levels: Vec<f64> = (0..part.m()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let g = GraphFunction::from_fn(&graph, |i| levels[part.assignment()[i]]);
        let disc = pair_discrepancy(&graph, std::slice::from_ref(&g)).map_err(err)?;
        if disc == 0.0 && !is_eigenfunction(&graph, &g, 0.0, 1e-10).map_err(err)? {
            failures += 1;
        }
        if disc != 0.0 {
            failures += 1;
        }
    }
    check(failures == 0, format!("{graphs} graphs, {failures} failures"))
}

fn criterion4() -> Outcome {
    let class = FunctionClassSpec::new(ClassTag::Linear, 2);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for seed in 0..24u64 {
        let m = 2 + (seed % 3) as usize;
        let cross = 0.002 + 0.004 * (seed / 3) as f64;
        let lg = two_level_cluster_graph(&TwoLevelSpec::new(m, cross, seed)).map_err(err)?;
        let graph = &lg.graph;
        let part = lg.sets.clone().expect("two-level graphs carry their partition");
        let report = measure_assumptions(graph, &part, &class.with_k(m)).map_err(err)?;
        if !report.implementable || !report.beta_certified {
            return Err(format!("seed {seed}: assumptions not met: {report:?}"));
        }
        let bound = theorem31_bound(&report).map_err(err)?;
        let lambda = 1.0;
        if !(lambda > report.alpha / report.p_min) {
            return Err(format!("seed {seed}: lambda below alpha / P_min"));
        }
        let trained = train(graph, Objective::Population, &class.with_k(m), lambda, &TrainConfig::default())
            .map_err(err)?;
        let error = probe_model(graph, &trained.model, &lg.onehots()).map_err(err)?.error;
        if error > bound {
            violations += 1;
        }
        worst = worst.max(error / bound);
        instances += 1;
    }
    check(
        violations == 0,
        format!("{instances} instances, {violations} violations, max error/bound {worst:.3}"),
    )
}

fn criterion5() -> Outcome {
    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut detail = Vec::new();
    for s in 1..=3 {
        let spec = Example1Spec::new(5, s, vec![0.5, 1.0]);
        let graph = example1_graph(&spec).map_err(err)?.graph;
        let targets = example1_sign_targets(&graph, &spec);
        let f_eig = DMatrix::from_fn(graph.n(), s, |i, c| graph.vertex(i).coords()[c]);
        let candidates: Vec<GraphFunction> = (0..10)
            .map(|_| {
                let w: Vec<f64> = (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect();
                GraphFunction::from_fn(&graph, |i| {
                    w.iter().zip(graph.vertex(i).coords()).map(|(a, b)| a * b).sum()
                })
            })
            .collect();
        let report = measure_eigenspace_quantities(&graph, &f_eig, &candidates, &targets).map_err(err)?;
        for lambda in [1.0, 10.0] {
            let trained = train(
                &graph,
                Objective::Population,
                &FunctionClassSpec::new(ClassTag::Linear, s),
                lambda,
                &TrainConfig::default(),
            )
            .map_err(err)?;
            let error = probe_model(&graph, &trained.model, &targets).map_err(err)?.error;
            let bound = theorem42_bound(&report, s, lambda).map_err(err)?;
            if theorem42_verdict(error, &report, bound) != Verdict::Pass {
                violations += 1;
            }
            let rule = if error <= bound { "<=" } else { "vs (exact-zero rule)" };
            detail.push(format!("s={s} lambda={lambda}: {error:.1e} {rule} {bound:.1e}"));
        }
    }
    check(violations == 0, format!("{violations} violations; {}", detail.join(", ")))
}

fn criterion6() -> Outcome {
    let (d, s, k) = (5, 2, 4);
    let spec = Example1Spec::new(d, s, vec![0.5, 1.0]);
    let lg = example2_labels(&spec, &SignLabelMap::xor(s, 0, 1)).map_err(err)?;
    let graph = &lg.graph;
    let built = construct_example2_optimal(&spec, graph, k, lg.classes).map_err(err)?;
    let loss = population_loss(graph, &built.model, 1.0).map_err(err)?.total;
    let error = probe_model(graph, &built.model, &lg.onehots()).map_err(err)?.error;
    let spurious: Vec<usize> = (s..d).collect();
    let adv = construct_adversarial_universal(graph, 1 << (d - s), &spurious).map_err(err)?;
    let adv_loss = population_loss(graph, &adv, 1.0).map_err(err)?.total;
    let adv_error = probe_model(graph, &adv, &lg.onehots()).map_err(err)?.error;
    check(
        loss.abs() <= 1e-10 && error <= 1e-8 && adv_loss.abs() <= 1e-10 && adv_error >= 0.5 - 1e-6,
        format!(
            "bias {:?}, loss {loss:.1e}, error {error:.1e}; lower branch k = {}: loss {adv_loss:.1e}, error {adv_error:.9}",
            built.bias,
            1 << (d - s)
        ),
    )
}

fn criterion7() -> Outcome {
    let (r, rho, gamma) = (3, 0.5, 2.0);
    let sets = example3_lattice(r, 4, 2, rho, gamma);
    let spec = Example3Spec {
        point_sets: sets,
        rho,
        gamma,
        intra_pair_rule: IntraPairRule::SubClusters(vec![vec![0, 0, 1, 1]; r]),
        classes: 2,
        labels: vec![0, 1, 0],
    };
    let lg = example3_graph(&spec).map_err(err)?;
    let graph = &lg.graph;
    let part = lg.sets.clone().expect("example 3 carries its sets");
    let f_eig = scaled_indicator_model(graph, &part).map_err(err)?;
    let values = forward(&f_eig, graph).map_err(err)?;
    let lip = lipschitz_of_values(&values, graph);
    let kappa = (2.0 * r as f64).sqrt() / gamma;
    let ex3_error = fit_linear_head(graph, &values, &lg.onehots(), None).map_err(err)?.error;
    let ex3_bound = theorem56_bound(r, lg.classes, kappa, rho);
    let ex3_ok = lip <= kappa * (1.0 + 1e-12) && ex3_error <= ex3_bound;

    let spec4 = Example4Spec::new(4, 1, 2.0, vec![0.0, 0.5, 1.0]);
    let lg4 = example4_graph(&spec4).map_err(err)?;
    let g4 = &lg4.graph;
    let built = construct_example4_optimal(&spec4, g4, 2).map_err(err)?;
    let loss = population_loss(g4, &built.model, 1.0).map_err(err)?.total;
    let conv_error = probe_model(g4, &built.model, &lg4.onehots()).map_err(err)?.error;
    let mut adv = Vec::new();
    for k in [3, 4] {
        let model = construct_relu_adversarial_example4(&spec4, g4, k).map_err(err)?;
        let l = population_loss(g4, &model, 1.0).map_err(err)?.total;
        let e = probe_model(g4, &model, &lg4.onehots()).map_err(err)?.error;
        adv.push((k, l, e));
    }
    let ex4_ok = loss.abs() <= 1e-10
        && conv_error <= 1e-8
        && adv.iter().all(|&(_, l, e)| l.abs() <= 1e-10 && e >= 0.5 - 1e-6);
    check(
        ex3_ok && ex4_ok,
        format!(
            "lipschitz {lip:.6} <= {kappa:.6}, error {ex3_error:.1e} <= {ex3_bound:.4}; conv loss {loss:.1e}, error {conv_error:.1e}; relu minimizers {}",
            adv.iter()
                .map(|(k, l, e)| format!("k={k}: loss {l:.1e} error {e:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion8() -> Outcome {
    let mut brute_worst: f64 = 0.0;
    let mut brute_cases = 0;
    for n in 2..=6 {
        for seed in 0..3 {
            let comps = 1 + (seed as usize % 2).min(n - 1);
            let graph = random_graph(n, comps, 0.5, 1, 100 + seed).map_err(err)?;
            for r in 1..=n.min(3) {
                let brute = br_constrained_search(&graph, r, 3, seed).map_err(err)?;
                let oracle = br_oracle_tabular(&graph, r).map_err(err)?;
                brute_worst = brute_worst.max((brute - oracle).abs());
                brute_cases += 1;
            }
        }
    }
    if brute_worst > 1e-6 {
        return Err(format!("brute-force disagreement {brute_worst:.3e}"));
    }
    let options = BrOptions {
        seeds_per_cell: 1,
        ..BrOptions::default()
    };
    let class = FunctionClassSpec::new(ClassTag::Tabular, 2);
    let mut worst: f64 = 0.0;
    let mut graphs = 0;
    for t in 0..10u64 {
        let n = 30 + 17 * t as usize;
        let graph = random_graph(n, 1 + (t as usize % 3), 0.08, 2, 800 + t).map_err(err)?;
        for r in [2, 5, 10] {
            let (b, row) = estimate_br(&graph, &class, r, &options).map_err(err)?;
            worst = worst.max((b - row.oracle.expect("tabular rows carry the oracle")).abs());
        }
        graphs += 1;
    }
    check(
        worst <= 1e-3,
        format!(
            "brute force {brute_cases} cases max gap {brute_worst:.1e}; {graphs} trained graphs max |b_r - oracle| {worst:.1e}"
        ),
    )
}

fn criterion9() -> Outcome {
    let lg = component_graph(&ComponentGraphSpec {
        components: 10,
        size: 8,
        d: 12,
        density: 0.5,
        seed: 9,
    })
    .map_err(err)?;
    let graph = &lg.graph;
    let options = BrOptions {
        seeds_per_cell: 1,
        ..BrOptions::default()
    };
    let classes = [
        FunctionClassSpec::new(ClassTag::Tabular, 10),
        FunctionClassSpec::new(ClassTag::Linear, 10),
    ];
    let report = br_table(graph, &classes, &[10, 20], &options).map_err(err)?;
    let get = |class: ClassTag, r: usize| {
        report
            .rows
            .iter()
            .find(|row| row.class == class && row.r == r)
            .and_then(|row| row.b_r)
    };
    let b10 = get(ClassTag::Tabular, 10).ok_or("tabular b_10 missing")?;
    let b20 = get(ClassTag::Tabular, 20).ok_or("tabular b_20 missing")?;
    let gap_ok = b10 <= 0.01 && b20 >= 10.0 * b10 + 0.01;
    let mut monotone = true;
    let mut pairs = Vec::new();
    for r in [10, 20] {
        let tab = get(ClassTag::Tabular, r).unwrap_or(f64::INFINITY);
        let lin = get(ClassTag::Linear, r).unwrap_or(f64::INFINITY);
        monotone &= tab <= lin + 1e-6;
        pairs.push(format!("r={r}: tabular {tab:.4} linear {lin:.4}"));
    }
    check(
        gap_ok && monotone,
        format!("b_10 {b10:.2e}, b_20 {b20:.4}; {}", pairs.join(", ")),
    )
}

fn fd_checks(graph: &PositivePairGraph, class: &FunctionClassSpec, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let x = graph.coordinate_matrix();
    let mut failures = 0;
    for trial in 0..100 {
        let shape = class.shape_for(graph).map_err(err)?;
        let model = RepresentationModel::random(shape, 0.7, 1000 + trial).map_err(err)?;
        let lambda = rng.gen_range(0.1..10.0);
        let (_, grad) = loss_and_grad(graph, &x, &model, Objective::Population, lambda).map_err(err)?;
        let p = rng.gen_range(0..grad.len());
        let h = 1e-6;
        let eval = |delta: f64| -> Result<f64, String> {
            let mut m = model.clone();
            m.params_mut()[p] += delta;
            Ok(population_loss(graph, &m, lambda).map_err(err)?.total)
        };
        let fd = (eval(h)? - eval(-h)?) / (2.0 * h);
        let scale = grad[p].abs().max(fd.abs()).max(1e-6);
        if (fd - grad[p]).abs() / scale > 1e-4 {
            failures += 1;
        }
    }
    Ok(failures)
}

fn criterion10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let graph = random_graph(24, 2, 0.3, 5, 10).map_err(err)?;
    let mut lines = Vec::new();
    let mut total = 0;
    let classes = [
        FunctionClassSpec::new(ClassTag::Linear, 3),
        FunctionClassSpec::new(ClassTag::Relu, 3),
        FunctionClassSpec::conv(3, 2),
        FunctionClassSpec::new(ClassTag::Tabular, 3),
    ];
    for class in &classes {
        let failures = fd_checks(&graph, class, &mut rng)?;
        total += failures;
        lines.push(format!("{} {failures}/100", class.class));
    }
    check(total == 0, format!("failures: {}", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("example 1 zero-error probe", criterion1, Duration::from_secs(30)),
        ("example 1 adversarial universal minimizer", criterion2, Duration::from_secs(30)),
        ("zero discrepancy implies zero eigenvalue", criterion3, Duration::from_secs(60)),
        ("cluster bound on two-level graphs", criterion4, Duration::from_secs(300)),
        ("eigenspace bound with explicit constants", criterion5, Duration::from_secs(120)),
        ("example 2 ReLU construction and lower branch", criterion6, Duration::from_secs(60)),
        ("examples 3 and 4", criterion7, Duration::from_secs(120)),
        ("b_r oracle equivalence", criterion8, Duration::from_secs(600)),
        ("b_r component gap and class monotonicity", criterion9, Duration::from_secs(600)),
        ("finite-difference gradients", criterion10, Duration::from_secs(120)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, msg) = match outcome {
            Ok(m) => (elapsed <= *limit, m),
            Err(m) => (false, m),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {id:>12} {name}: {msg} [{:.1}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
