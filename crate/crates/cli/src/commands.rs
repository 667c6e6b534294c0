use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use mixgp::bayesopt::{ego_run, EgoConfig};
use mixgp::benchmarks::{
    pva, relative_rmse_percent, rmse, run_model_benchmark, run_optim_benchmark, BenchmarkProblem, BenchmarkReport,
    KernelChoice, ModelBenchmarkSettings, OptimBenchmarkSettings,
};
use mixgp::design_space::{lhs_sample, read_doe_csv, write_doe_csv, DesignSpace, Doe, Slot};
use mixgp::gp::{self, ContinuousKernel, FitOptions, KernelConfig, TrainedGp};
use mixgp::optim::LocalSearchConfig;
use mixgp::{fmt17, Error, Result};
use serde_json::json;

use crate::evaluator;
use crate::{
    BenchmarkArgs, BenchmarkMode, ContinuousArg, EvaluateArgs, ExportCorrArgs, FitArgs, FitTuning, KernelArgs,
    OptimizeArgs, PredictArgs, SampleArgs, SpaceSource,
};

fn resolve(source: &SpaceSource) -> Result<(DesignSpace, Option<BenchmarkProblem>)> {
    match (&source.space, &source.problem) {
        (Some(path), None) => Ok((DesignSpace::from_json(&fs::read_to_string(path)?)?, None)),
        (None, Some(name)) => {
            let p = BenchmarkProblem::by_name(name)?;
            Ok((p.space.clone(), Some(p)))
        }
        _ => Err(Error::InvalidArgument("give exactly one of --space or --problem".into())),
    }
}

fn kernel_choice(args: &KernelArgs) -> Result<KernelChoice> {
    let name = args.kernel.trim().to_ascii_lowercase();
    match args.pls_levels {
        Some(n) if name.ends_with("-pls") => format!("{name}:{n}").parse(),
        Some(_) => Err(Error::InvalidArgument(format!("--pls-levels does not apply to kernel '{name}'"))),
        None => name.parse(),
    }
}

fn kernel_config(space: &DesignSpace, args: &KernelArgs) -> Result<KernelConfig> {
    let mut config = kernel_choice(args)?.config(space);
    config.continuous_pls = args.continuous_pls;
    config.continuous_kernel = match args.continuous_kernel {
        ContinuousArg::SquaredExponential => ContinuousKernel::SquaredExponential,
        ContinuousArg::AbsoluteExponential => ContinuousKernel::AbsoluteExponential,
    };
    config.validate(space)?;
    Ok(config)
}

fn fit_options(tuning: &FitTuning, seed: u64) -> FitOptions {
    FitOptions {
        starts: tuning.starts,
        seed,
        local: LocalSearchConfig {
            max_evals_cap: tuning.max_evals,
            ..LocalSearchConfig::default()
        },
        ..FitOptions::default()
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_model(path: &Path) -> Result<TrainedGp> {
    TrainedGp::from_json(&fs::read_to_string(path)?)
}

fn read_doe(space: &DesignSpace, path: &Path) -> Result<Doe> {
    read_doe_csv(space, BufReader::new(File::open(path)?))
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let (space, problem) = resolve(&a.source)?;
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let mut doe = lhs_sample(&space, a.n, a.seed)?;
    if a.evaluate {
        let p = problem.ok_or_else(|| Error::InvalidArgument("--evaluate needs --problem".into()))?;
        let y = doe.points.iter().map(|w| p.evaluate(w)).collect::<Result<Vec<_>>>()?;
        doe = Doe::new(doe.points, Some(y))?;
    }
    let mut out = output(a.out.as_deref())?;
    write_doe_csv(&space, &doe, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn fit(a: FitArgs) -> Result<()> {
    let (space, _) = resolve(&a.source)?;
    let config = kernel_config(&space, &a.kernel)?;
    let doe = read_doe(&space, &a.doe)?;
    doe.responses()?;
    let (model, report) = gp::fit(&space, &config, &doe, &fit_options(&a.tuning, a.seed))?;
    fs::write(&a.out, model.to_json()?)?;
    let summary = json!({
        "kernel": kernel_choice(&a.kernel)?.to_string(),
        "n_hyperparameters": report.n_hyperparameters,
        "log_likelihood": report.best_log_likelihood,
        "mu_hat": model.mu_hat(),
        "sigma2_hat": model.sigma2_hat(),
        "nugget": report.nugget,
        "total_evals": report.total_evals,
        "wall_time_secs": report.wall_time_secs,
        "constant_model": report.constant_model,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let points = read_doe(model.space(), &a.points)?;
    let mut w = csv_writer(output(a.out.as_deref())?);
    w.write_record(["mean", "variance"])?;
    for p in &points.points {
        let (m, v) = model.predict(p)?;
        w.write_record([fmt17(m), fmt17(v)])?;
    }
    w.flush()?;
    Ok(())
}

fn csv_writer(out: Box<dyn Write>) -> csv::Writer<Box<dyn Write>> {
    csv::Writer::from_writer(out)
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let problem = BenchmarkProblem::by_name(&a.problem)?;
    if model.space().variables() != problem.space.variables() {
        return Err(Error::InvalidArgument(format!(
            "the model's design space differs from problem '{}'",
            problem.name
        )));
    }
    let grid = problem.validation_set()?;
    let truths = grid.responses()?;
    let (mean, var): (Vec<f64>, Vec<f64>) = grid
        .points
        .iter()
        .map(|w| model.predict(w))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let summary = json!({
        "problem": problem.name,
        "points": truths.len(),
        "rmse": rmse(&mean, truths)?,
        "rmse_percent": relative_rmse_percent(&mean, truths).ok(),
        "pva": pva(&mean, &var, truths).ok(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

pub fn optimize(a: OptimizeArgs) -> Result<()> {
    let (space, problem) = resolve(&a.source)?;
    let config = EgoConfig {
        fit: fit_options(&a.tuning, a.seed),
        ..EgoConfig::new(kernel_config(&space, &a.kernel)?, a.doe_size, a.budget, a.seed)
    };
    let trace = match (&a.evaluator, &problem) {
        (Some(cmd), _) => ego_run(&space, |w| evaluator::evaluate(cmd, &space, w), &config)?,
        (None, Some(p)) => ego_run(&space, |w| p.evaluate(w).map_err(|e| e.to_string()), &config)?,
        (None, None) => {
            return Err(Error::InvalidArgument("--space needs an --evaluator command".into()));
        }
    };
    let mut out = output(a.out.as_deref())?;
    trace.write_csv(&space, &mut out)?;
    out.flush()?;
    if a.out.is_some() {
        println!("{}", trace.summary_json()?);
    } else {
        eprintln!("{}", trace.summary_json()?);
    }
    Ok(())
}

/// File-name friendly form of a kernel label, e.g. `hh-pls-2x2`.
fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    while s.contains("--") {
        s = s.replace("--", "-");
    }
    s.trim_matches('-').to_string()
}

pub fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let problem = BenchmarkProblem::by_name(&a.problem)?;
    let kernels = a.kernels.iter().map(|k| k.parse()).collect::<Result<Vec<KernelChoice>>>()?;
    fs::create_dir_all(&a.out_dir)?;
    let fit = fit_options(&a.tuning, a.seed);
    let report: BenchmarkReport = match a.mode {
        BenchmarkMode::Model => {
            let settings = ModelBenchmarkSettings {
                doe_size: a.doe_size,
                seeds: (a.seed..a.seed + a.seeds).collect(),
                fit,
            };
            let report = run_model_benchmark(&problem, &kernels, &settings)?;
            report.write_model_csv(File::create(a.out_dir.join("model.csv"))?)?;
            let names: Vec<&str> = problem
                .space
                .variables()
                .iter()
                .zip(problem.space.slots())
                .filter(|(_, s)| matches!(s, Slot::Categorical(_)))
                .map(|(v, _)| v.name.as_str())
                .collect();
            for k in &kernels {
                let label = k.to_string();
                if let Some(mats) = report.correlations_for(&label) {
                    for (m, name) in mats.iter().zip(&names) {
                        let path = a.out_dir.join(format!("corr_{}_{}.csv", slug(&label), name));
                        m.write_csv(File::create(path)?)?;
                    }
                }
            }
            report
        }
        BenchmarkMode::Optim => {
            let mut settings = OptimBenchmarkSettings::new(a.doe_sizes.clone(), a.runs, a.budget, a.seed);
            settings.best_at = a.best_at;
            settings.fit = fit;
            let report = run_optim_benchmark(&problem, &kernels, &settings)?;
            report.write_optim_csv(File::create(a.out_dir.join("optim.csv"))?)?;
            let traces = a.out_dir.join("traces");
            fs::create_dir_all(&traces)?;
            for c in &report.optim_cells {
                if let Some(t) = &c.trace {
                    let path = traces.join(format!("{}_n{}_run{}.csv", slug(&c.kernel), c.doe_size, c.run));
                    t.write_csv(&problem.space, File::create(path)?)?;
                }
            }
            report
        }
    };
    let summary = report.summary_json()?;
    fs::write(a.out_dir.join("summary.json"), &summary)?;
    println!("{summary}");
    Ok(())
}

pub fn export_corr(a: ExportCorrArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let space = model.space();
    if space.n_categorical() == 0 {
        return Err(Error::InvalidArgument("the model has no categorical variable".into()));
    }
    let index = match &a.variable {
        None => 0,
        Some(name) => match space.variable(name) {
            Some((i, _)) => match space.slots()[i] {
                Slot::Categorical(k) => k,
                _ => return Err(Error::InvalidArgument(format!("'{name}' is not a categorical variable"))),
            },
            None => return Err(Error::InvalidArgument(format!("unknown variable '{name}'"))),
        },
    };
    let mut out = output(a.out.as_deref())?;
    model.kernel_state().level_matrices[index].write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
