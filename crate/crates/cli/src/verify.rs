//! Scripted theorem checks with machine-readable verdicts.

use anyhow::anyhow;
use clap::ValueEnum;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sclab_core::funclass::{
    construct_adversarial_universal, construct_example1_optimal, construct_example2_optimal,
    construct_example4_optimal, construct_relu_adversarial_example4, forward, lipschitz_of_values,
    scaled_indicator_model, ClassTag, FunctionClassSpec,
};
use sclab_core::objective::{population_loss, train, Objective};
use sclab_core::posgraph::connected_components;
use sclab_core::probe::{
    fit_linear_head, measure_assumptions, measure_eigenspace_quantities, probe_model,
    theorem31_bound, theorem42_bound, theorem42_verdict, theorem56_bound, Verdict,
};
use sclab_core::spectral::{is_eigenfunction, pair_discrepancy, GraphFunction};
use sclab_core::synthdata::{
    example1_sign_targets, example3_lattice, Example1Spec, Example3Spec, Example4Spec,
    IntraPairRule, SignLabelMap, TwoLevelSpec,
};

use crate::config::{Example2Config, ExampleConfig, ExperimentConfig, RandomGraphConfig};
use crate::run::{build_graph, write_json, Context};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremId {
    Prop4,
    Thm31,
    Thm42,
    Thm52,
    Thm52Lower,
    Thm54,
    Thm54Lower,
    Thm56,
    Thm58,
    Thm58Lower,
}

impl TheoremId {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    fn default_example(self) -> ExampleConfig {
        match self {
            TheoremId::Prop4 => ExampleConfig::Random(RandomGraphConfig {
                n: 40,
                components: 4,
                density: 0.2,
                d: 2,
                seed: 0,
            }),
            TheoremId::Thm31 => ExampleConfig::TwoLevel(TwoLevelSpec::new(3, 0.01, 0)),
            TheoremId::Thm42 => ExampleConfig::Example1(Example1Spec::new(5, 2, vec![0.5, 1.0])),
            TheoremId::Thm52 | TheoremId::Thm52Lower => {
                ExampleConfig::Example1(Example1Spec::new(6, 2, vec![0.5, 1.0]))
            }
            TheoremId::Thm54 | TheoremId::Thm54Lower => ExampleConfig::Example2(Example2Config {
                d: 5,
                s: 2,
                tau_grid: vec![0.5, 1.0],
                label_map: SignLabelMap::xor(2, 0, 1),
            }),
            TheoremId::Thm56 => {
                let (r, rho, gamma) = (3, 0.5, 2.0);
                ExampleConfig::Example3(Example3Spec {
                    point_sets: example3_lattice(r, 4, 2, rho, gamma),
                    rho,
                    gamma,
                    intra_pair_rule: IntraPairRule::SubClusters(vec![vec![0, 0, 1, 1]; r]),
                    classes: 2,
                    labels: vec![0, 1, 0],
                })
            }
            TheoremId::Thm58 | TheoremId::Thm58Lower => {
                ExampleConfig::Example4(Example4Spec::new(4, 1, 2.0, vec![0.0, 0.5, 1.0]))
            }
        }
    }

    fn accepts(self, example: &ExampleConfig) -> bool {
        let expected = self.default_example().kind();
        matches!(self, TheoremId::Prop4 | TheoremId::Thm31) || example.kind() == expected
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub theorem: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub verdict: Verdict,
    pub detail: String,
}

fn report(theorem: TheoremId, measured: f64, bound: f64, verdict: Verdict, detail: String) -> VerifyReport {
    VerifyReport {
        theorem: theorem.name(),
        measured,
        bound,
        pass: verdict == Verdict::Pass,
        verdict,
        detail,
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn spec1(config: &ExperimentConfig) -> Example1Spec {
    match &config.example {
        ExampleConfig::Example1(s) => s.clone(),
        _ => unreachable!("checked by accepts"),
    }
}

pub fn run(ctx: &Context, theorem: TheoremId) -> Result<bool, Failure> {
    let config = match &ctx.config {
        Some(_) => ctx.load_config()?,
        None => {
            let mut c = ExperimentConfig::new(theorem.default_example());
            ctx.apply_overrides(&mut c);
            c
        }
    };
    if !theorem.accepts(&config.example) {
        return Err(Failure::usage(anyhow!(
            "IncompatibleConfig: {} needs example kind {}, got {}",
            theorem.name(),
            theorem.default_example().kind(),
            config.example.kind()
        )));
    }
    let lg = build_graph(&config)?;
    let graph = &lg.graph;
    let lambda = config.lambda;
    let out = match theorem {
        TheoremId::Prop4 => {
            let part = connected_components(graph);
            let mut rng = ChaCha8Rng::seed_from_u64(config.train.seed);
            let mut failures = 0;
            let trials = 200;
            for _ in 0..trials {
                let levels: Vec<f64> = (0..part.m()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let g = GraphFunction::from_fn(graph, |i| levels[part.assignment()[i]]);
                let disc = pair_discrepancy(graph, std::slice::from_ref(&g))?;
                if disc != 0.0 || !is_eigenfunction(graph, &g, 0.0, 1e-10)? {
                    failures += 1;
                }
            }
            report(
                theorem,
                failures as f64,
                0.0,
                pass_if(failures == 0),
                format!("{trials} component-constant functions, {} components", part.m()),
            )
        }
        TheoremId::Thm31 => {
            let part = lg.sets.clone().unwrap_or_else(|| connected_components(graph));
            let class = config
                .class
                .clone()
                .unwrap_or_else(|| FunctionClassSpec::new(ClassTag::Linear, part.m()))
                .with_k(part.m());
            let assumptions = measure_assumptions(graph, &part, &class)?;
            if !assumptions.implementable {
                return Err(anyhow!(
                    "partition is not implementable by the {} class (residual {:.3e})",
                    class.class,
                    assumptions.implementable_residual
                )
                .into());
            }
            let bound = theorem31_bound(&assumptions)?;
            let trained = train(graph, Objective::Population, &class, lambda, &config.train)?;
            let error = probe_model(graph, &trained.model, &lg.onehots())?.error;
            report(
                theorem,
                error,
                bound,
                pass_if(error <= bound),
                format!(
                    "alpha {:.4e}, beta {}{}, P_min {:.4}, P_max {:.4}",
                    assumptions.alpha,
                    assumptions.bound_beta(),
                    if assumptions.beta_certified {
                        String::new()
                    } else {
                        format!(" (tabular stand-in; class estimate {})", assumptions.beta)
                    },
                    assumptions.p_min,
                    assumptions.p_max
                ),
            )
        }
        TheoremId::Thm42 => {
            let spec = spec1(&config);
            let s = spec.s;
            let targets = example1_sign_targets(graph, &spec);
            let f_eig = DMatrix::from_fn(graph.n(), s, |i, c| graph.vertex(i).coords()[c]);
            let mut rng = ChaCha8Rng::seed_from_u64(config.train.seed);
            let candidates: Vec<GraphFunction> = (0..10)
                .map(|_| {
                    let w: Vec<f64> = (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    GraphFunction::from_fn(graph, |i| {
                        w.iter().zip(graph.vertex(i).coords()).map(|(a, b)| a * b).sum()
                    })
                })
                .collect();
            let eig = measure_eigenspace_quantities(graph, &f_eig, &candidates, &targets)?;
            let class = FunctionClassSpec::new(ClassTag::Linear, s);
            let trained = train(graph, Objective::Population, &class, lambda, &config.train)?;
            let error = probe_model(graph, &trained.model, &targets)?.error;
            let bound = theorem42_bound(&eig, s, lambda)?;
            report(
                theorem,
                error,
                bound,
                theorem42_verdict(error, &eig, bound),
                format!(
                    "phi {:.3e}, epsilon {:.3e}, zeta {:.3e}, B {:.4}",
                    eig.phi, eig.epsilon, eig.zeta, eig.b
                ),
            )
        }
        TheoremId::Thm52 => {
            let spec = spec1(&config);
            let targets = example1_sign_targets(graph, &spec);
            let built = construct_example1_optimal(&spec, spec.s)?;
            let built_err = probe_model(graph, &built, &targets)?.error;
            let class = FunctionClassSpec::new(ClassTag::Linear, spec.s);
            let trained = train(graph, Objective::Population, &class, lambda, &config.train)?;
            let trained_err = probe_model(graph, &trained.model, &targets)?.error;
            let measured = built_err.max(trained_err);
            report(
                theorem,
                measured,
                0.0,
                pass_if(measured <= 1e-8),
                format!("construction {built_err:.3e}, trained {trained_err:.3e}"),
            )
        }
        TheoremId::Thm52Lower => {
            let spec = spec1(&config);
            let targets = example1_sign_targets(graph, &spec);
            let key: Vec<usize> = (0..spec.d).filter(|&j| j != spec.label_dim).collect();
            let k = 1 << key.len();
            let model = construct_adversarial_universal(graph, k, &key)?;
            let loss = population_loss(graph, &model, lambda)?.total;
            let error = probe_model(graph, &model, &targets)?.error;
            report(
                theorem,
                error,
                1.0,
                pass_if(loss.abs() <= 1e-10 && error >= 1.0 - 1e-8),
                format!("k = {k}, loss {loss:.3e}"),
            )
        }
        TheoremId::Thm54 | TheoremId::Thm54Lower => {
            let ExampleConfig::Example2(c) = &config.example else {
                unreachable!("checked by accepts")
            };
            let spec = c.spec();
            if theorem == TheoremId::Thm54 {
                let built = construct_example2_optimal(&spec, graph, 1 << spec.s, lg.classes)?;
                let loss = population_loss(graph, &built.model, lambda)?.total;
                let error = probe_model(graph, &built.model, &lg.onehots())?.error;
                report(
                    theorem,
                    error,
                    0.0,
                    pass_if(loss.abs() <= 1e-10 && error <= 1e-8),
                    format!("bias {:?}, loss {loss:.3e}", built.bias),
                )
            } else {
                let spurious: Vec<usize> = (spec.s..spec.d).collect();
                let k = 1 << spurious.len();
                let model = construct_adversarial_universal(graph, k, &spurious)?;
                let loss = population_loss(graph, &model, lambda)?.total;
                let error = probe_model(graph, &model, &lg.onehots())?.error;
                report(
                    theorem,
                    error,
                    0.5,
                    pass_if(loss.abs() <= 1e-10 && error >= 0.5 - 1e-6),
                    format!("k = {k}, loss {loss:.3e}"),
                )
            }
        }
        TheoremId::Thm56 => {
            let ExampleConfig::Example3(spec) = &config.example else {
                unreachable!("checked by accepts")
            };
            let part = lg.sets.clone().ok_or_else(|| anyhow!("example 3 graph without sets"))?;
            let r = spec.r();
            let f_eig = scaled_indicator_model(graph, &part)?;
            let values = forward(&f_eig, graph)?;
            let lip = lipschitz_of_values(&values, graph);
            let kappa = (2.0 * r as f64).sqrt() / spec.gamma;
            let error = fit_linear_head(graph, &values, &lg.onehots(), None)?.error;
            let bound = theorem56_bound(r, lg.classes, kappa, spec.rho);
            report(
                theorem,
                error,
                bound,
                pass_if(lip <= kappa * (1.0 + 1e-12) && error <= bound),
                format!("lipschitz {lip:.6} at kappa {kappa:.6}"),
            )
        }
        TheoremId::Thm58 | TheoremId::Thm58Lower => {
            let ExampleConfig::Example4(spec) = &config.example else {
                unreachable!("checked by accepts")
            };
            if theorem == TheoremId::Thm58 {
                let built = construct_example4_optimal(spec, graph, 1 << spec.s)?;
                let loss = population_loss(graph, &built.model, lambda)?.total;
                let error = probe_model(graph, &built.model, &lg.onehots())?.error;
                report(
                    theorem,
                    error,
                    0.0,
                    pass_if(loss.abs() <= 1e-10 && error <= 1e-8),
                    format!("bias {:?}, loss {loss:.3e}", built.bias),
                )
            } else {
                let k = (spec.d << (spec.s - 1)) - 1;
                let model = construct_relu_adversarial_example4(spec, graph, k)?;
                let loss = population_loss(graph, &model, lambda)?.total;
                let error = probe_model(graph, &model, &lg.onehots())?.error;
                report(
                    theorem,
                    error,
                    0.5,
                    pass_if(loss.abs() <= 1e-10 && error >= 0.5 - 1e-6),
                    format!("k = {k}, loss {loss:.3e}"),
                )
            }
        }
    };
    println!("{}", serde_json::to_string(&out)?);
    let dir = ctx.out_dir(&config)?;
    let file = format!("verify_{}.json", theorem.name());
    write_json(&dir.join(&file), &out)?;
    ctx.finish(&dir, &format!("verify {}", theorem.name()), &config, vec![config.train.seed], &[&file])?;
    Ok(out.pass)
}
