use std::io::Write;
use std::path::Path;
use std::time::Instant;

use tucker_als::io::{
    read_tensor, read_tucker, tensor_from_bytes, tucker_from_bytes, write_tensor, write_tucker,
};
use tucker_als::parallel::with_threads;
use tucker_als::synth::{gen_cp, gen_tucker, CpSpec, TuckerSpec};
use tucker_als::{
    hooi, relative_error, st_hosvd, t_hosvd, AlsConfig, DecompositionReport, DenseTensor, Error,
    FactorEngine, HooiConfig, ModeOrder, OrderChoice, Truncation, TuckerTensor,
};

use crate::args::{
    CompressArgs, EngineKind, InspectArgs, Method, OrderArg, ReconstructArgs, SolverArgs,
    SynthCommon, SynthKind, Variant,
};
use crate::error::{CliError, CliResult};
use crate::record::{csv_writer, join, write_row, RunRecord, RUN_COLUMNS};

pub fn synth(kind: SynthKind) -> CliResult<()> {
    let (common, generated) = match kind {
        SynthKind::Cp(a) => {
            let spec = CpSpec::new(a.common.dims.clone(), a.rank, a.common.noise, a.common.seed);
            (a.common, gen_cp(&spec))
        }
        SynthKind::Tucker(a) => {
            let spec = TuckerSpec::new(
                a.common.dims.clone(),
                a.ranks,
                a.common.noise,
                a.common.seed,
            );
            (a.common, gen_tucker(&spec))
        }
    };
    let SynthCommon { out, base_out, .. } = common;
    let s = generated.map_err(usage_if_input)?;
    write_tensor(&out, &s.noisy)?;
    if let Some(path) = base_out {
        write_tensor(&path, &s.base)?;
    }
    Ok(())
}

/// Errors caused by bad flags rather than bad numerics or files.
pub fn usage_if_input(e: Error) -> CliError {
    match e.root() {
        Error::InvalidShape(_)
        | Error::InvalidTruncation(_)
        | Error::InvalidConfig(_)
        | Error::InvalidMode { .. }
        | Error::DimensionMismatch(_) => CliError::Usage(e.to_string()),
        _ => CliError::Core(e),
    }
}

pub fn order_choice(arg: &OrderArg) -> CliResult<OrderChoice> {
    match arg {
        OrderArg::Auto => Ok(OrderChoice::Auto),
        OrderArg::Fixed(modes) => Ok(OrderChoice::Fixed(
            ModeOrder::new(modes.clone()).map_err(usage_if_input)?,
        )),
    }
}

fn engine(kind: EngineKind, solver: &SolverArgs) -> FactorEngine {
    match kind {
        EngineKind::Svd => FactorEngine::Svd,
        EngineKind::Eig => FactorEngine::Eig,
        EngineKind::Als => FactorEngine::Als(
            AlsConfig::default()
                .with_eta(solver.eta)
                .with_max_iters(solver.max_iters)
                .with_seed(solver.seed),
        ),
    }
}

pub struct Solved {
    pub tucker: TuckerTensor,
    pub record: RunRecord,
    /// Time spent inside the factor engines.
    pub engine_seconds: f64,
}

fn one_pass(
    t: &DenseTensor,
    trunc: &Truncation,
    v: Variant,
    solver: &SolverArgs,
) -> CliResult<(TuckerTensor, DecompositionReport)> {
    let e = engine(v.engine, solver);
    let out = if v.sequential {
        st_hosvd(
            t,
            trunc,
            &order_choice(&solver.order)?,
            &e,
            solver.singular_vectors,
        )
    } else {
        t_hosvd(t, trunc, &e, solver.singular_vectors)
    };
    out.map_err(usage_if_input)
}

/// Run `method` on the current thread pool.
pub fn solve(
    t: &DenseTensor,
    trunc: &Truncation,
    method: Method,
    init: Variant,
    hooi_tol: f64,
    solver: &SolverArgs,
) -> CliResult<Solved> {
    let start_variant = match method {
        Method::Single(v) => v,
        Method::Hooi => init,
    };
    let (tk, rep) = one_pass(t, trunc, start_variant, solver)?;
    let is_als = start_variant.engine == EngineKind::Als;
    let mut record = RunRecord {
        method: rep.method.clone(),
        dims: t.dims().to_vec(),
        ranks: trunc.ranks().to_vec(),
        order: rep.order.to_string(),
        eta: is_als.then_some(solver.eta),
        seed: solver.seed,
        threads: rayon::current_num_threads(),
        rel_residual: rep.rel_residual,
        seconds: rep.seconds,
        iters_per_mode: if is_als { rep.iterations() } else { Vec::new() },
    };
    let engine_seconds = rep.engine_seconds();
    if method == Method::Single(start_variant) {
        return Ok(Solved {
            tucker: tk,
            record,
            engine_seconds,
        });
    }
    let cfg = HooiConfig {
        tol: hooi_tol,
        ..HooiConfig::default()
    };
    let start = Instant::now();
    let refined = hooi(t, trunc, &tk, &cfg).map_err(usage_if_input)?;
    record.seconds += start.elapsed().as_secs_f64();
    record.method = format!("hooi+{}", rep.method);
    record.rel_residual = refined.rel_residual();
    Ok(Solved {
        tucker: refined.tucker,
        record,
        engine_seconds,
    })
}

pub fn run_with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> CliResult<R> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => Ok(with_threads(n, f)),
        None => Ok(f()),
    }
}

pub fn compress(a: CompressArgs) -> CliResult<()> {
    let t = read_tensor(&a.input)?;
    let trunc = Truncation::new(a.ranks.clone()).map_err(usage_if_input)?;
    let solved = run_with_threads(a.threads, || {
        solve(&t, &trunc, a.method, a.init, a.hooi_tol, &a.solver)
    })??;
    write_tucker(&a.out, &solved.tucker)?;
    let stdout = std::io::stdout();
    let mut w = csv_writer(stdout.lock());
    let label = Path::new("<stdout>");
    if a.header {
        write_row(&mut w, &RUN_COLUMNS.map(String::from), label)?;
    }
    write_row(&mut w, &solved.record.fields(), label)?;
    w.flush().map_err(|e| CliError::Csv {
        path: label.into(),
        source: e.into(),
    })?;
    Ok(())
}

pub fn reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let tk = read_tucker(&a.input)?;
    write_tensor(&a.out, &tk.reconstruct()?)?;
    Ok(())
}

pub fn inspect(a: InspectArgs) -> CliResult<()> {
    let bytes = std::fs::read(&a.input).map_err(|source| Error::Io {
        path: a.input.clone(),
        source,
    })?;
    let mut lines = Vec::new();
    let dense = match bytes.get(..4) {
        Some(b"TNSR") => {
            let t = tensor_from_bytes(&bytes)?;
            lines.push(("kind", "dense".to_string()));
            lines.push(("dims", join(t.dims(), "x")));
            lines.push(("entries", t.data().len().to_string()));
            lines.push(("frobenius_norm", format!("{:e}", t.frobenius_norm())));
            t
        }
        Some(b"TUKR") => {
            let tk = tucker_from_bytes(&bytes)?;
            lines.push(("kind", "tucker".to_string()));
            lines.push(("dims", join(tk.origin_shape().dims(), "x")));
            lines.push(("ranks", join(tk.ranks(), "x")));
            lines.push(("stored_entries", tk.stored_len().to_string()));
            lines.push((
                "compression_ratio",
                format!("{:.3}", tk.compression_ratio()),
            ));
            lines.push(("core_norm", format!("{:e}", tk.core().frobenius_norm())));
            lines.push((
                "orthonormality_defect",
                format!("{:e}", tk.max_orthonormality_defect()),
            ));
            tk.reconstruct()?
        }
        _ => {
            return Err(Error::Format(format!(
                "{} is neither a TNSR nor a TUKR file",
                a.input.display()
            ))
            .into())
        }
    };
    if let Some(path) = &a.reference {
        let reference = read_tensor(path)?;
        lines.push((
            "rel_error",
            format!(
                "{:e}",
                relative_error(&reference, &dense).map_err(usage_if_input)?
            ),
        ));
    }
    let mut out = std::io::stdout().lock();
    for (k, v) in lines {
        let _ = writeln!(out, "{k}: {v}");
    }
    Ok(())
}
