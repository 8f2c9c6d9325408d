use std::io::Write;
use std::path::PathBuf;

use tucker_als::synth::{gen_cp, gen_tucker, CpSpec, TuckerSpec};
use tucker_als::{DenseTensor, Truncation};

use crate::args::{BenchArgs, Method, Suite, Variant};
use crate::commands::{run_with_threads, solve, usage_if_input, Solved};
use crate::error::{CliError, CliResult};
use crate::record::{csv_writer, join, write_row, BENCH_EXTRA, RUN_COLUMNS};

struct Plan {
    methods: Vec<Method>,
    dims: Vec<usize>,
    ranks: Vec<usize>,
    cp_rank: Option<usize>,
    noise: f64,
    repeats: usize,
    threads: Vec<Option<usize>>,
}

impl Plan {
    fn from_args(a: &BenchArgs) -> CliResult<Plan> {
        let methods = match &a.methods {
            Some(list) => list
                .iter()
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Method>().map_err(CliError::Usage))
                .collect::<CliResult<Vec<_>>>()?,
            None if a.suite == Suite::Scaling => vec![
                Method::Single(Variant::ALL[2]),
                Method::Single(Variant::ALL[5]),
            ],
            None => Variant::ALL.into_iter().map(Method::Single).collect(),
        };
        if methods.is_empty() {
            return Err(CliError::Usage(
                "--methods needs at least one method".into(),
            ));
        }
        let (dims, ranks, noise, repeats) = match a.suite {
            Suite::Cp => (vec![20, 20, 2000], vec![4; 3], 1e-4, 20),
            Suite::Tucker => (vec![40; 3], vec![5; 3], 1e-2, 5),
            Suite::Scaling => (vec![1000, 1000, 50], vec![20, 20, 5], 1e-3, 1),
        };
        let dims = a.dims.clone().unwrap_or(dims);
        let cp_rank = (a.suite == Suite::Cp).then(|| a.rank.unwrap_or(4));
        let ranks = match (&a.ranks, cp_rank) {
            (Some(r), _) => r.clone(),
            (None, Some(r)) => vec![r; dims.len()],
            (None, None) if a.dims.is_some() => {
                return Err(CliError::Usage(
                    "--ranks is required together with --dims".into(),
                ))
            }
            (None, None) => ranks,
        };
        let threads = match (&a.threads, a.suite) {
            (Some(list), _) => list.iter().map(|&n| Some(n)).collect(),
            (None, Suite::Scaling) => vec![Some(1), Some(2), Some(4)],
            (None, _) => vec![None],
        };
        let repeats = a.repeats.unwrap_or(repeats);
        if repeats == 0 {
            return Err(CliError::Usage("--repeats must be at least 1".into()));
        }
        Ok(Plan {
            methods,
            dims,
            ranks,
            cp_rank,
            noise: a.noise.unwrap_or(noise),
            repeats,
            threads,
        })
    }

    fn tensor(&self, seed: u64) -> CliResult<DenseTensor> {
        let s = match self.cp_rank {
            Some(r) => gen_cp(&CpSpec::new(self.dims.clone(), r, self.noise, seed)),
            None => gen_tucker(&TuckerSpec::new(
                self.dims.clone(),
                self.ranks.clone(),
                self.noise,
                seed,
            )),
        };
        Ok(s.map_err(usage_if_input)?.noisy)
    }
}

#[derive(Default)]
struct Cell {
    runs: Vec<Solved>,
    failures: usize,
}

fn mean_stdev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() < 2 {
        0.0
    } else {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    };
    (mean, var.sqrt())
}

pub fn bench(a: BenchArgs) -> CliResult<()> {
    let plan = Plan::from_args(&a)?;
    let trunc = Truncation::new(plan.ranks.clone()).map_err(usage_if_input)?;
    let mut cells: Vec<Cell> = (0..plan.threads.len() * plan.methods.len())
        .map(|_| Cell::default())
        .collect();
    for trial in 0..plan.repeats {
        let seed = a.solver.seed + trial as u64;
        let t = plan.tensor(seed)?;
        let solver = crate::args::SolverArgs {
            seed,
            ..a.solver.clone()
        };
        for (ti, &threads) in plan.threads.iter().enumerate() {
            for (mi, &method) in plan.methods.iter().enumerate() {
                let cell = &mut cells[ti * plan.methods.len() + mi];
                let init = Variant::ALL[2];
                match run_with_threads(threads, || solve(&t, &trunc, method, init, 1e-12, &solver))?
                {
                    Ok(s) => cell.runs.push(s),
                    Err(e) => {
                        eprintln!("trial {trial}, threads {threads:?}, {method:?}: {e}");
                        cell.failures += 1;
                    }
                }
            }
        }
    }

    let sink: Box<dyn Write> = match &a.out {
        Some(path) => {
            Box::new(
                std::fs::File::create(path).map_err(|source| tucker_als::Error::Io {
                    path: path.clone(),
                    source,
                })?,
            )
        }
        None => Box::new(std::io::stdout()),
    };
    let label: PathBuf = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let mut w = csv_writer(sink);
    let header: Vec<String> = RUN_COLUMNS
        .iter()
        .chain(BENCH_EXTRA.iter())
        .map(|s| s.to_string())
        .collect();
    write_row(&mut w, &header, &label)?;

    for (ti, threads) in plan.threads.iter().enumerate() {
        for (mi, method) in plan.methods.iter().enumerate() {
            let cell = &cells[ti * plan.methods.len() + mi];
            let baseline = &cells[mi];
            write_row(
                &mut w,
                &cell_row(&plan, cell, baseline, *method, *threads, &a),
                &label,
            )?;
        }
    }
    w.flush().map_err(|e| CliError::Csv {
        path: label.clone(),
        source: e.into(),
    })?;
    Ok(())
}

fn engine_seconds(cell: &Cell) -> Vec<f64> {
    cell.runs.iter().map(|s| s.engine_seconds).collect()
}

/// One aggregated row; `baseline` is the same method at the first thread count.
fn cell_row(
    plan: &Plan,
    cell: &Cell,
    baseline: &Cell,
    method: Method,
    threads: Option<usize>,
    a: &BenchArgs,
) -> Vec<String> {
    let label = match method {
        Method::Single(v) => v.to_string(),
        Method::Hooi => format!("hooi+{}", Variant::ALL[2]),
    };
    let threads = threads
        .unwrap_or_else(rayon::current_num_threads)
        .to_string();
    let Some(first) = cell.runs.first() else {
        let mut row = vec![label, join(&plan.dims, "x"), join(&plan.ranks, "x")];
        row.extend(std::iter::repeat_n(String::new(), 3));
        row.push(threads);
        row.extend(std::iter::repeat_n(String::new(), 3));
        row.push("0".into());
        row.push(cell.failures.to_string());
        row.extend(std::iter::repeat_n(String::new(), 5));
        return row;
    };
    let res: Vec<f64> = cell.runs.iter().map(|s| s.record.rel_residual).collect();
    let secs: Vec<f64> = cell.runs.iter().map(|s| s.record.seconds).collect();
    let (res_mean, res_sd) = mean_stdev(&res);
    let (sec_mean, sec_sd) = mean_stdev(&secs);
    let (als_m, als_sd) = mean_stdev(&engine_seconds(cell));
    let iters = if first.record.iters_per_mode.is_empty() {
        String::new()
    } else {
        (0..plan.dims.len())
            .map(|m| {
                let xs: Vec<f64> = cell
                    .runs
                    .iter()
                    .map(|s| s.record.iters_per_mode[m] as f64)
                    .collect();
                format!("{:.1}", mean_stdev(&xs).0)
            })
            .collect::<Vec<_>>()
            .join(";")
    };
    let speedup = if a.suite == Suite::Scaling && !baseline.runs.is_empty() {
        format!("{:.3}", mean_stdev(&engine_seconds(baseline)).0 / als_m)
    } else {
        String::new()
    };
    vec![
        first.record.method.clone(),
        join(&plan.dims, "x"),
        join(&plan.ranks, "x"),
        first.record.order.clone(),
        first
            .record
            .eta
            .map(|e| format!("{e:e}"))
            .unwrap_or_default(),
        a.solver.seed.to_string(),
        threads,
        format!("{res_mean:e}"),
        format!("{sec_mean:.6}"),
        iters,
        cell.runs.len().to_string(),
        cell.failures.to_string(),
        format!("{res_sd:e}"),
        format!("{sec_sd:.6}"),
        format!("{als_m:.6}"),
        format!("{als_sd:.6}"),
        speedup,
    ]
}
