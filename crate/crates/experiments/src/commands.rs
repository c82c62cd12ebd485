//! The six subcommands as library calls writing into `RunConfig::out`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bura_core::bura_coeffs::{error_gap_bound, gap_order, ord, suggest_kprime, to_bura_coefficients};
use bura_core::minimax::io::partial_fractions_to_text;

use crate::approx::Approximator;
use crate::config::RunConfig;
use crate::csv_out::CsvTable;
use crate::error::{io_err, Result, StageExt};
use crate::figure::figure_error_curves;
use crate::solve::run_solve;
use crate::study::{asymptotic_estimate, coefficient_study};
use crate::table::table_min_degree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Approx,
    Coeffs,
    Table1,
    Figure1,
    SuggestKprime,
    Solve,
}

/// What a command produced. `passed` is false when a certificate failed:
/// a non-converged minimax run, a table hole or a violated error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub message: String,
}

pub fn approximator(cfg: &RunConfig) -> Approximator {
    Approximator::new(cfg.iteration_options(), cfg.sampling_plan(), cfg.cache_dir.clone())
}

/// Validates `cfg` and runs one command.
pub fn execute(cfg: &RunConfig, command: Command) -> Result<Outcome> {
    cfg.validate()?;
    let precision = cfg.working_precision()?;
    let apx = approximator(cfg);
    let mut out = Writer::new(&cfg.out)?;
    let mut msg = String::new();
    let passed = match command {
        Command::Approx => {
            let c = &cfg.approx;
            let a = apx.approximate(c.alpha, c.k, precision, None)?;
            out.write("barycentric.txt", &a.text)?;
            out.write("summary.json", &(serde_json::to_string_pretty(&a.summary)? + "\n"))?;
            let s = &a.summary;
            let _ = writeln!(
                msg,
                "alpha={} k={} precision={}: E = {:e} (estimate {:e}), deviation {:e} after {} iterations, converged: {}",
                s.alpha,
                s.k,
                s.precision,
                s.sup_error,
                asymptotic_estimate(s.alpha, s.k),
                s.deviation,
                s.iterations,
                s.converged
            );
            if s.converged {
                let pf = a.partial_fractions()?;
                out.write("partial_fractions.txt", &partial_fractions_to_text(&pf, c.alpha))?;
                for d in pf.diagnostics() {
                    let _ = writeln!(msg, "warning: {d}");
                }
            }
            s.converged
        }
        Command::Coeffs => {
            let c = &cfg.coeffs;
            let study = coefficient_study(&apx, c.alpha, &c.ks, precision, c.lambda1)?;
            out.write("coefficients.csv", &study.to_csv()?)?;
            out.write("coefficients_summary.csv", &study.summary_csv()?)?;
            for e in &study.entries {
                out.write(&format!("coefficients_k{}.txt", e.k), &e.coeffs.to_text())?;
                for d in &e.diagnostics {
                    let _ = writeln!(msg, "k={}: observed monotonicity fails: {d:?}", e.k);
                }
            }
            let _ = writeln!(msg, "|dtilde_1| grows with k: {}", study.dtilde1_grows());
            study.entries.iter().all(|e| e.converged)
        }
        Command::Table1 => {
            let t = &cfg.table1;
            let table = table_min_degree(&apx, &t.alphas, &t.accuracies, precision, t.max_k)?;
            out.write("table1.csv", &table.to_csv()?)?;
            out.write("table1_runs.csv", &table.runs_csv()?)?;
            msg.push_str(&table.to_csv()?);
            table.holes() == 0
        }
        Command::Figure1 => {
            let c = &cfg.figure1;
            let a = apx.approximate(c.alpha, c.k, precision, None)?;
            let coeffs = to_bura_coefficients(&a.partial_fractions()?, c.alpha, 1.0)
                .stage("coefficients", || format!("alpha={}, k={}", c.alpha, c.k))?;
            let data = figure_error_curves(&coeffs, c.kprime, &c.deltas, c.samples, &apx.plan)?;
            out.write("figure1.csv", &data.to_csv()?)?;
            out.write("figure1_summary.csv", &data.summary_csv()?)?;
            let _ = writeln!(msg, "minimax E = {:e}", a.summary.sup_error);
            msg.push_str(&data.summary_csv()?);
            a.summary.converged
        }
        Command::SuggestKprime => {
            let c = &cfg.suggest_kprime;
            let a = apx.approximate(c.alpha, c.k, precision, None)?;
            let coeffs = to_bura_coefficients(&a.partial_fractions()?, c.alpha, 1.0)
                .stage("coefficients", || format!("alpha={}, k={}", c.alpha, c.k))?;
            let target = c.target_order.unwrap_or_else(|| ord(a.summary.sup_error));
            let mut t = CsvTable::new(["kprime", "gap_order", "gap_bound"])?;
            for kp in 1..c.k {
                let o = gap_order(&coeffs, kp, c.delta).stage("gap order", || format!("kprime={kp}"))?;
                t.row([kp.to_string(), o.to_string(), format!("{:e}", error_gap_bound(&coeffs, kp, c.delta))])?;
            }
            out.write("gap_orders.csv", &t.finish()?)?;
            let kp = suggest_kprime(&coeffs, c.delta, target);
            let _ = writeln!(
                msg,
                "alpha={} k={} delta={:e} target order {target}: kprime = {kp}",
                c.alpha, c.k, c.delta
            );
            a.summary.converged
        }
        Command::Solve => {
            let art = run_solve(&apx, &cfg.solve, precision)?;
            out.write("certificates.csv", &art.certificates_csv()?)?;
            out.write("shifts.csv", &art.shifts_csv())?;
            out.write("coefficients.txt", &art.coeffs.to_text())?;
            let s = &cfg.solve;
            let _ = writeln!(
                msg,
                "{}D n={} (lambda1 = {:e}, delta = {:e}), alpha={} k={} kprime={}: E = {:e}{}",
                s.dim,
                s.n,
                art.extremes.lambda1,
                art.extremes.delta,
                s.alpha,
                s.k,
                art.kprime(),
                art.approximation.sup_error,
                art.etilde.map(|e| format!(", Etilde = {e:e}")).unwrap_or_default()
            );
            let wall: f64 = art.runs.iter().map(|r| r.result.wall_time.as_secs_f64()).sum();
            let _ = writeln!(
                msg,
                "{} right-hand sides, worst error/bound {:.3}, {:.2} s in solves: {}",
                art.runs.len(),
                art.worst_ratio(),
                wall,
                if art.passed() { "pass" } else { "FAIL" }
            );
            art.passed()
        }
    };
    Ok(Outcome { files: out.files, passed, message: msg })
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Writer { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }
}
