//! Evaluation of sweep jobs into result tables.

use rayon::prelude::*;
use serde_json::json;

use super::job::{AxisName, ModelKind, SweepJob, Target, DEFAULT_SAMPLES};
use super::table::{Cell, Column, ColumnKind, ResultTable, ERROR_COLUMN};
use super::SweepError;
use crate::annealing::{self, DEGENERACY_TOL, NEAR_DEGENERATE_GAP};
use crate::dynamics::{self, linspace, ModelHandle, OdeOptions, Schedule, Trajectory};
use crate::effective::{effective_gap, effective_hamiltonian, effective_params, EffectiveModel};
use crate::lzs::{self, V_MIN};
use crate::model::{build_hamiltonian, ChainParams};
use crate::operator::{Operator, C64};
use crate::spectrum::{self, matching::TAU_MATCH, Phase};

/// Parameters of one grid point after overlaying axis values on the fixed set.
#[derive(Clone, Debug)]
struct Point {
    n_qubits: usize,
    epsilon: f64,
    gamma: f64,
    g: f64,
    k: Option<f64>,
    s: Option<f64>,
    s_tilde0: f64,
}

impl Point {
    fn chain(&self) -> Result<ChainParams, String> {
        ChainParams::chain(self.n_qubits, self.epsilon, self.gamma, self.g).map_err(|e| e.to_string())
    }

    fn effective(&self) -> Result<EffectiveModel, String> {
        effective_params(&self.chain()?).map_err(|e| e.to_string())
    }

    fn k(&self) -> f64 {
        self.k.expect("validated: k present")
    }
}

fn grid(job: &SweepJob) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &job.axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

fn resolve(job: &SweepJob, values: &[f64]) -> Point {
    let f = &job.fixed;
    let mut p = Point {
        n_qubits: f.n_qubits.unwrap_or(2),
        epsilon: f.epsilon.unwrap_or(0.0),
        gamma: f.gamma.unwrap_or(0.0),
        g: f.g.unwrap_or(1.0),
        k: f.k,
        s: f.s,
        s_tilde0: f.s_tilde0.unwrap_or(0.0),
    };
    for (axis, &v) in job.axes.iter().zip(values) {
        match axis.name {
            AxisName::Gamma => p.gamma = v,
            AxisName::K => p.k = Some(v),
            AxisName::Epsilon => p.epsilon = v,
            AxisName::S => p.s = Some(v),
            AxisName::STilde0 => p.s_tilde0 = v,
        }
    }
    p
}

fn dim(job: &SweepJob) -> usize {
    match job.model {
        ModelKind::Effective => 2,
        ModelKind::Full => 1 << job.fixed.n_qubits.unwrap_or(2),
    }
}

fn population_columns(job: &SweepJob) -> Vec<Column> {
    match job.model {
        ModelKind::Effective => vec![Column::new("p_up", ColumnKind::Real), Column::new("p_down", ColumnKind::Real)],
        ModelKind::Full => (0..dim(job)).map(|i| Column::new(format!("p_{i}"), ColumnKind::Real)).collect(),
    }
}

/// Whether the job produces one row per sample of a single trajectory or EP list.
fn is_list_mode(job: &SweepJob) -> bool {
    job.axes.is_empty() && matches!(job.target, Target::StaticEvolve | Target::DrivenEvolve | Target::EpFind)
}

/// Observable columns, excluding axis and error columns.
fn observable_columns(job: &SweepJob) -> Vec<Column> {
    use ColumnKind::*;
    let list = is_list_mode(job);
    let mut cols = Vec::new();
    match job.target {
        Target::Spectrum => {
            cols.extend((1..=dim(job)).map(|i| Column::new(format!("E{i}"), Complex)));
            cols.push(Column::new("phase", Text));
            cols.push(Column::new("broken_pairs", Int));
        }
        Target::StaticEvolve => {
            if list {
                cols.push(Column::new("t", Real));
            }
            cols.extend(population_columns(job));
            cols.push(Column::new("ln_norm", Real));
            if !list {
                cols.push(Column::new("omega", Real));
                cols.push(Column::new("decay", Real));
            }
        }
        Target::DrivenEvolve => {
            if list {
                let name = if job.model == ModelKind::Effective { "s_tilde" } else { "s" };
                cols.push(Column::new(name, Real));
            }
            cols.extend(population_columns(job));
            cols.push(Column::new("ln_norm", Real));
            if !list && job.model == ModelKind::Effective {
                cols.push(Column::new("validity", Real));
            }
        }
        Target::Lzs => {
            for name in ["exponent", "p_ground", "psi_down_sq", "psi_up_sq", "validity"] {
                cols.push(Column::new(name, Real));
            }
            cols.push(Column::new("trusted", Bool));
        }
        Target::Qaa => {
            cols.push(Column::new("p_ground", Real));
            cols.extend((1..=dim(job)).map(|i| Column::new(format!("a{i}"), Complex)));
            cols.push(Column::new("near_degenerate", Bool));
        }
        Target::EpFind => {
            if list {
                cols.push(Column::new("s_ep", Real));
                cols.push(Column::new("energy", Complex));
                cols.push(Column::new("branch_lo", Int));
                cols.push(Column::new("branch_hi", Int));
            } else {
                cols.push(Column::new("ep_count", Int));
                cols.push(Column::new("s_ep", Text));
            }
        }
    }
    cols
}

fn population_cells(traj_sample: &dynamics::Sample) -> Vec<Cell> {
    let mut cells: Vec<Cell> = traj_sample.populations.iter().map(|&p| Cell::Real(p)).collect();
    cells.push(Cell::Real(traj_sample.ln_norm()));
    cells
}

fn static_setup(job: &SweepJob, p: &Point) -> Result<(Operator, ModelHandle), String> {
    match job.model {
        ModelKind::Effective => {
            let eff = p.effective()?;
            Ok((effective_hamiltonian(&eff, p.s_tilde0), ModelHandle::Effective(eff)))
        }
        ModelKind::Full => {
            let params = p.chain()?;
            let s = p.s.expect("validated: s present");
            Ok((build_hamiltonian(&params, s), ModelHandle::Full(params)))
        }
    }
}

fn driven_model(job: &SweepJob, p: &Point) -> Result<ModelHandle, String> {
    Ok(match job.model {
        ModelKind::Effective => ModelHandle::Effective(p.effective()?),
        ModelKind::Full => ModelHandle::Full(p.chain()?),
    })
}

fn two_lowest_gap(eigs: &mut [C64]) -> (f64, f64) {
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let d = eigs[0] - eigs[1];
    (d.re.abs(), d.im.abs())
}

fn eval_summary(job: &SweepJob, p: &Point) -> Result<Vec<Cell>, String> {
    match job.target {
        Target::StaticEvolve => {
            let (h, model) = static_setup(job, p)?;
            let t_max = job.fixed.t_max.expect("validated: t_max present");
            let traj = dynamics::evolve_static(&h, &model.initial_state(), &[t_max]).map_err(|e| e.to_string())?;
            let mut cells = population_cells(traj.last().unwrap());
            let (omega, decay) = match &model {
                ModelHandle::Effective(eff) => effective_gap(eff, p.s_tilde0),
                ModelHandle::Full(_) => two_lowest_gap(&mut spectrum::eigenvalues(&h).map_err(|e| e.to_string())?),
            };
            cells.push(Cell::Real(omega));
            cells.push(Cell::Real(decay));
            Ok(cells)
        }
        Target::DrivenEvolve => {
            let model = driven_model(job, p)?;
            let (lo, hi) = model.natural_range();
            let traj = dynamics::evolve_driven(&model, Schedule::Linear { k: p.k() }, &model.initial_state(), &[lo, hi])
                .map_err(|e| e.to_string())?;
            let mut cells = population_cells(traj.last().unwrap());
            if let ModelHandle::Effective(eff) = &model {
                let v = lzs::lzs_validity(eff, p.k(), hi).map_err(|e| e.to_string())?;
                cells.push(Cell::Real(v));
            }
            Ok(cells)
        }
        Target::Lzs => {
            let eff = p.effective()?;
            let r = lzs::lzs_probability(&eff, p.k()).map_err(|e| e.to_string())?;
            Ok(vec![
                Cell::Real(r.exponent),
                Cell::Real(r.p_ground),
                Cell::Real(r.psi_down_sq),
                Cell::Real(r.psi_up_sq),
                Cell::Real(r.validity),
                Cell::Bool(r.is_trusted()),
            ])
        }
        Target::Qaa => {
            let r = annealing::run_qaa(&p.chain()?, p.k()).map_err(|e| e.to_string())?;
            let mut cells = vec![Cell::Real(r.p_ground)];
            cells.extend(r.coefficients.iter().map(|&a| Cell::Complex(a)));
            cells.push(Cell::Bool(r.near_degenerate));
            Ok(cells)
        }
        Target::EpFind => {
            let eps = spectrum::find_exceptional_points(&p.chain()?, (0.0, 1.0)).map_err(|e| e.to_string())?;
            let list: Vec<String> = eps.iter().map(|e| format!("{:.16e}", e.s_ep)).collect();
            Ok(vec![Cell::Int(eps.len() as i64), Cell::Text(list.join(";"))])
        }
        Target::Spectrum => unreachable!("spectrum rows are evaluated with a continuity pass"),
    }
}

fn trajectory_rows(job: &SweepJob, p: &Point) -> Result<Vec<Vec<Cell>>, String> {
    let n = job.fixed.t_samples.unwrap_or(DEFAULT_SAMPLES);
    let traj: Trajectory = match job.target {
        Target::StaticEvolve => {
            let (h, model) = static_setup(job, p)?;
            let t = linspace(0.0, job.fixed.t_max.unwrap(), n);
            dynamics::evolve_static(&h, &model.initial_state(), &t).map_err(|e| e.to_string())?
        }
        Target::DrivenEvolve => {
            let model = driven_model(job, p)?;
            let (lo, hi) = model.natural_range();
            dynamics::evolve_driven(&model, Schedule::Linear { k: p.k() }, &model.initial_state(), &linspace(lo, hi, n))
                .map_err(|e| e.to_string())?
        }
        _ => unreachable!(),
    };
    Ok(traj
        .samples
        .iter()
        .map(|s| {
            let mut cells = vec![Cell::Real(s.x)];
            cells.extend(population_cells(s));
            cells
        })
        .collect())
}

fn ep_rows(p: &Point) -> Result<Vec<Vec<Cell>>, String> {
    let eps = spectrum::find_exceptional_points(&p.chain()?, (0.0, 1.0)).map_err(|e| e.to_string())?;
    Ok(eps
        .iter()
        .map(|e| {
            vec![
                Cell::Real(e.s_ep),
                Cell::Complex(e.energy),
                Cell::Int(e.branch_pair.0 as i64),
                Cell::Int(e.branch_pair.1 as i64),
            ]
        })
        .collect())
}

fn spectrum_hamiltonian(job: &SweepJob, p: &Point) -> Result<Operator, String> {
    let s = p.s.expect("validated: s present");
    match job.model {
        ModelKind::Effective => Ok(effective_hamiltonian(&p.effective()?, s)),
        ModelKind::Full => Ok(build_hamiltonian(&p.chain()?, s)),
    }
}

fn sort_re_im(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues at every point, then continuity ordering along the `s` axis.
fn spectrum_rows(job: &SweepJob, points: &[Point]) -> Vec<RowOutcome> {
    let raw: Vec<Result<Vec<C64>, String>> = points
        .par_iter()
        .map(|p| {
            let h = spectrum_hamiltonian(job, p)?;
            let mut e = spectrum::eigenvalues(&h).map_err(|e| e.to_string())?;
            sort_re_im(&mut e);
            Ok(e)
        })
        .collect();
    let mut ordered: Vec<Result<Vec<C64>, String>> = raw;
    let mut row_errors: Vec<Option<String>> = vec![None; points.len()];

    if let Some(s_pos) = job.axes.iter().position(|a| a.name == AxisName::S) {
        let counts: Vec<usize> = job.axes.iter().map(|a| a.count).collect();
        let other = if job.axes.len() == 2 { counts[1 - s_pos] } else { 1 };
        let n_s = counts[s_pos];
        let row_of = |o: usize, i: usize| match (job.axes.len(), s_pos) {
            (1, _) => i,
            (_, 0) => i * counts[1] + o,
            _ => o * counts[1] + i,
        };
        for o in 0..other {
            let rows: Vec<usize> = (0..n_s).map(|i| row_of(o, i)).collect();
            let mut start = 0;
            while start < rows.len() {
                if ordered[rows[start]].is_err() {
                    start += 1;
                    continue;
                }
                let mut end = start;
                while end < rows.len() && ordered[rows[end]].is_ok() {
                    end += 1;
                }
                let run = &rows[start..end];
                let s_vals: Vec<f64> = run.iter().map(|&r| points[r].s.unwrap()).collect();
                let vals: Vec<Vec<C64>> = run.iter().map(|&r| ordered[r].clone().unwrap()).collect();
                match spectrum::order_branches(&s_vals, vals) {
                    Ok(branches) => {
                        for (&r, b) in run.iter().zip(branches) {
                            ordered[r] = Ok(b);
                        }
                    }
                    Err(e @ spectrum::SpectrumError::AmbiguousMatching { index, .. }) => {
                        let msg = e.to_string();
                        for &r in &run[index..] {
                            row_errors[r] = Some(msg.clone());
                        }
                        if let Ok(partial) = spectrum::order_branches(
                            &s_vals[..index],
                            run[..index].iter().map(|&r| ordered[r].clone().unwrap()).collect(),
                        ) {
                            for (&r, b) in run[..index].iter().zip(partial) {
                                ordered[r] = Ok(b);
                            }
                        }
                    }
                    Err(e) => {
                        for &r in run {
                            row_errors[r] = Some(e.to_string());
                        }
                    }
                }
                start = end;
            }
        }
    }

    ordered
        .into_iter()
        .zip(row_errors)
        .map(|(eigs, err)| {
            let eigs = match eigs {
                Ok(e) => e,
                Err(msg) => return RowOutcome::failed(msg),
            };
            let phase = match spectrum::classify_phase(&eigs, spectrum::phase_tolerance(&eigs)) {
                Ok(ph) => ph,
                Err(e) => return RowOutcome::failed(e.to_string()),
            };
            let mut cells: Vec<Cell> = eigs.iter().map(|&e| Cell::Complex(e)).collect();
            cells.push(Cell::Text(match phase {
                Phase::AllReal => "all_real".into(),
                Phase::PartiallyBroken(_) => "broken".into(),
            }));
            cells.push(Cell::Int(phase.broken_pairs() as i64));
            RowOutcome { cells: Some(cells), error: err }
        })
        .collect()
}

/// Computed cells of one row and the error it carries, if any. Rows that
/// fail only the branch-continuity check keep their (unordered) values.
struct RowOutcome {
    cells: Option<Vec<Cell>>,
    error: Option<String>,
}

impl RowOutcome {
    fn failed(msg: String) -> Self {
        Self { cells: None, error: Some(msg) }
    }
}

impl From<Result<Vec<Cell>, String>> for RowOutcome {
    fn from(r: Result<Vec<Cell>, String>) -> Self {
        match r {
            Ok(cells) => Self { cells: Some(cells), error: None },
            Err(msg) => Self::failed(msg),
        }
    }
}

fn tolerances() -> serde_json::Value {
    let ode = OdeOptions::default();
    json!({
        "ode_rtol": ode.rtol,
        "ode_atol": ode.atol,
        "tau_im": spectrum::TAU_IM,
        "tau_conj": spectrum::TAU_CONJ,
        "tau_s": spectrum::TAU_S,
        "tau_ep": spectrum::TAU_EP,
        "ep_overlap": spectrum::EP_OVERLAP,
        "tau_match": TAU_MATCH,
        "tau_exp": dynamics::expm::TAU_EXP,
        "degeneracy_tol": DEGENERACY_TOL,
        "near_degenerate_gap": NEAR_DEGENERATE_GAP,
        "lzs_v_min": V_MIN,
    })
}

pub fn run_sweep(job: &SweepJob) -> Result<ResultTable, SweepError> {
    run_sweep_with(job, None)
}

/// Runs `job` on a pool of `jobs` worker threads (default: all cores).
/// The output does not depend on the number of workers.
pub fn run_sweep_with(job: &SweepJob, jobs: Option<usize>) -> Result<ResultTable, SweepError> {
    job.validate()?;
    if job.target == Target::StaticEvolve && job.model == ModelKind::Full && job.fixed.s.is_none() && !job.has_axis(AxisName::S) {
        return Err(SweepError::Config("static_evolve on the full model needs s".into()));
    }
    let observables = observable_columns(job);
    let keep: Vec<usize> = if job.outputs.is_empty() {
        (0..observables.len()).collect()
    } else {
        job.outputs
            .iter()
            .map(|name| {
                observables
                    .iter()
                    .position(|c| &c.name == name)
                    .ok_or_else(|| SweepError::Config(format!("unknown output {name:?} for target {:?}", job.target)))
            })
            .collect::<Result<_, _>>()?
    };

    let mut columns: Vec<Column> = job.axes.iter().map(|a| Column::new(a.name.as_str(), ColumnKind::Real)).collect();
    columns.extend(keep.iter().map(|&i| observables[i].clone()));
    columns.push(Column::new(ERROR_COLUMN, ColumnKind::Text));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Config(format!("cannot start worker pool: {e}")))?;

    let grid_values = grid(job);
    let points: Vec<Point> = grid_values.iter().map(|v| resolve(job, v)).collect();

    let assemble = |axis_values: &[f64], outcome: RowOutcome| -> Vec<Cell> {
        let mut row: Vec<Cell> = axis_values.iter().map(|&v| Cell::Real(v)).collect();
        match outcome.cells {
            Some(cells) => row.extend(keep.iter().map(|&i| cells[i].clone())),
            None => row.extend(keep.iter().map(|_| Cell::Missing)),
        }
        row.push(Cell::Text(outcome.error.unwrap_or_default()));
        row
    };

    let rows: Vec<Vec<Cell>> = if is_list_mode(job) {
        let p = &points[0];
        let result = match job.target {
            Target::EpFind => ep_rows(p),
            _ => trajectory_rows(job, p),
        };
        match result {
            Ok(rows) => rows.into_iter().map(|cells| assemble(&[], Ok(cells).into())).collect(),
            Err(msg) => vec![assemble(&[], RowOutcome::failed(msg))],
        }
    } else if job.target == Target::Spectrum {
        let results = pool.install(|| spectrum_rows(job, &points));
        grid_values.iter().zip(results).map(|(v, r)| assemble(v, r)).collect()
    } else {
        let results: Vec<Result<Vec<Cell>, String>> =
            pool.install(|| points.par_iter().map(|p| eval_summary(job, p)).collect());
        grid_values.iter().zip(results).map(|(v, r)| assemble(v, r.into())).collect()
    };

    let mut table = ResultTable { columns, rows, metadata: serde_json::Value::Null };
    let failed = table.failed_rows();
    let mut flags = serde_json::Map::new();
    flags.insert("failed_rows".into(), json!(failed.len()));
    if let Some(idx) = table.column_index("trusted") {
        let untrusted = table.rows.iter().filter(|r| matches!(r[idx], Cell::Bool(false))).count();
        flags.insert("lzs_untrusted_rows".into(), json!(untrusted));
    }
    if let Some(idx) = table.column_index("validity") {
        let untrusted = table.rows.iter().filter(|r| matches!(r[idx], Cell::Real(v) if v < V_MIN)).count();
        flags.insert("below_validity_rows".into(), json!(untrusted));
    }
    if let Some(idx) = table.column_index("near_degenerate") {
        let n = table.rows.iter().filter(|r| matches!(r[idx], Cell::Bool(true))).count();
        flags.insert("near_degenerate_rows".into(), json!(n));
    }
    table.metadata = json!({
        "job": job,
        "version": env!("CARGO_PKG_VERSION"),
        "rows": table.rows.len(),
        "columns": table.columns,
        "tolerances": tolerances(),
        "flags": flags,
    });
    Ok(table)
}
