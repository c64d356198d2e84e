//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qreduce::config::{
    CompareParams, HistoriesParams, LambdaMapParams, MatrixSpec, Scalar, SlotSpec, SweepParams, WindowParams,
};
use qreduce::run_config_file;
use qreduce::scenarios::{
    lambda_min_eig_closed_form, run_compare_postulates, run_decoherence_sweep, run_histories_check,
    run_lambda_positivity_map, run_window_scan,
};
use qreduce_core::eigen::unitary_exp;
use qreduce_core::histories::{
    additivity_residual, history_probability_modified, marginalization_residual, HistoryFamily,
};
use qreduce_core::matrix::frobenius_distance;
use qreduce_core::reduction::{unread_mixture_lambda, unread_mixture_standard};
use qreduce_core::sampling::{
    random_block_family, random_density, random_hermitian, random_quasi_positive_matrix, random_rank_one_family,
    random_unitary, rng_from_seed, SimRng,
};
use qreduce_core::state::{evolve, DensityMatrix, ProjectorFamily};
use qreduce_core::{c64, C64};

const IDENTITY_TOL: f64 = 1e-10;
const CAUSAL_FLOOR: f64 = 1e-3;
const CAUSAL_FRACTION: f64 = 0.95;
const SINGLE_EVENT_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const WITNESS_MODIFIED: f64 = -0.099_200_6;
const WITNESS_STANDARD: f64 = 0.103_053_7;
const WITNESS_TOL: f64 = 1e-4;
const SPECTRUM_TOL: f64 = 1e-10;
const MIN_R_SQUARED: f64 = 0.9;
const WINDOW_REL_TOL: f64 = 0.10;
const POSITIVITY_TOL: f64 = 1e-12;
const CLOSED_FORM_TOL: f64 = 1e-10;

type Criterion = (u32, &'static str, fn() -> Check);

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Check {
    Check {
        passed,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let c = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    check(
        c.passed && in_time,
        format!(
            "{}; {:.2}s of {}s budget",
            c.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        ),
    )
}

/// (ρ, rank-1 family, λ) triples in dims 2..=8 with λ spread over [−2, 2].
fn random_triples() -> Vec<(DensityMatrix, ProjectorFamily, f64)> {
    let mut rng: SimRng = rng_from_seed(0xACCE_0001);
    (0..100)
        .map(|i| {
            let dim = 2 + i % 7;
            let lambda = -2.0 + 4.0 * i as f64 / 99.0;
            (
                random_density(&mut rng, dim),
                random_rank_one_family(&mut rng, dim),
                lambda,
            )
        })
        .collect()
}

fn off_block_norm(rho: &DensityMatrix, family: &ProjectorFamily) -> f64 {
    let basis = family.basis_vectors().unwrap();
    let m = rho.matrix();
    let mut sum = 0.0;
    for (i, vi) in basis.iter().enumerate() {
        let rv = m.apply(vi).unwrap();
        for (j, vj) in basis.iter().enumerate() {
            if i != j {
                let elem: C64 = vj.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum();
                sum += elem.norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn criterion_1() -> Check {
    timed(Duration::from_secs(5), || {
        let worst = random_triples()
            .iter()
            .map(|(rho, fam, l)| {
                frobenius_distance(unread_mixture_lambda(rho, fam, *l).unwrap().matrix(), rho.matrix()).unwrap()
            })
            .fold(0.0, f64::max);
        check(worst < IDENTITY_TOL, format!("max ‖unread_λ − ρ‖ = {worst:.3e}"))
    })
}

fn criterion_2() -> Check {
    let triples = random_triples();
    let mut above = 0usize;
    let mut worst_mismatch = 0.0f64;
    for (rho, fam, _) in &triples {
        let d = frobenius_distance(unread_mixture_standard(rho, fam).unwrap().matrix(), rho.matrix()).unwrap();
        if d > CAUSAL_FLOOR {
            above += 1;
        }
        worst_mismatch = worst_mismatch.max((d - off_block_norm(rho, fam)).abs());
    }
    let fraction = above as f64 / triples.len() as f64;
    check(
        fraction >= CAUSAL_FRACTION && worst_mismatch < IDENTITY_TOL,
        format!(
            "{above}/{} distances above {CAUSAL_FLOOR:e}; off-block mismatch {worst_mismatch:.3e}",
            triples.len()
        ),
    )
}

fn criterion_3() -> Check {
    let mut rng = rng_from_seed(0xACCE_0003);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let dim = 2 + i % 4;
        let rho = random_density(&mut rng, dim);
        let h = random_hermitian(&mut rng, dim);
        let t = 0.1 + 0.05 * i as f64;
        let fam = random_rank_one_family(&mut rng, dim);
        let family = HistoryFamily::new(rho.clone(), h.clone(), vec![t], vec![fam.clone()]).unwrap();
        let rho_t = evolve(&rho, &unitary_exp(&h, t).unwrap()).unwrap();
        for k in 0..dim {
            let p = history_probability_modified(&family.history(vec![k]).unwrap()).unwrap();
            let direct = rho_t
                .matrix()
                .trace_product(fam.member(k).unwrap().matrix())
                .unwrap()
                .re;
            worst = worst.max((p - direct).abs());
        }
    }
    check(worst < SINGLE_EVENT_TOL, format!("max |p − Tr[ρP]| = {worst:.3e}"))
}

fn partitions(dim: usize, i: usize) -> Vec<usize> {
    let options: &[&[usize]] = match dim {
        2 => &[&[1, 1]],
        3 => &[&[1, 2], &[2, 1], &[1, 1, 1]],
        _ => &[&[1, 1, 2], &[2, 2], &[1, 3], &[1, 1, 1, 1]],
    };
    options[i % options.len()].to_vec()
}

fn random_family(rng: &mut SimRng, dim: usize, slots: usize, i: usize) -> HistoryFamily {
    let rho = random_density(rng, dim);
    let h = random_hermitian(rng, dim);
    let times: Vec<f64> = (0..slots).map(|s| 0.3 * (s + 1) as f64 + 0.01 * i as f64).collect();
    let fams = (0..slots)
        .map(|s| random_block_family(rng, dim, &partitions(dim, i + s)))
        .collect();
    HistoryFamily::new(rho, h, times, fams).unwrap()
}

fn worst_additivity(fam: &HistoryFamily) -> f64 {
    let mut worst = 0.0f64;
    for (slot, size) in fam.slot_sizes().into_iter().enumerate() {
        for a in 0..size {
            for b in (a + 1)..size {
                worst = worst.max(additivity_residual(fam, slot, (a, b)).unwrap());
            }
        }
    }
    worst
}

fn criterion_4() -> Check {
    let mut rng = rng_from_seed(0xACCE_0004);
    let worst = (0..100)
        .map(|i| worst_additivity(&random_family(&mut rng, 2 + i % 3, 2, i)))
        .fold(0.0, f64::max);
    check(worst < RESIDUAL_TOL, format!("max additivity residual {worst:.3e}"))
}

fn criterion_5() -> Check {
    let mut rng = rng_from_seed(0xACCE_0005);
    let worst = (0..50)
        .map(|i| marginalization_residual(&random_family(&mut rng, 2 + i % 3, 3, i)).unwrap())
        .fold(0.0, f64::max);
    check(
        worst < RESIDUAL_TOL,
        format!("max marginalization residual {worst:.3e}"),
    )
}

fn real_matrix(rows: [[f64; 2]; 2]) -> MatrixSpec {
    MatrixSpec::Rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Scalar(c64(x, 0.0))).collect())
            .collect(),
    )
}

/// `I − 2|v⟩⟨v|` with `v = (cos φ, sin φ)`: `v` is the lower eigenvector.
fn angle_observable(phi: f64) -> MatrixSpec {
    let (s, c) = (2.0 * phi).sin_cos();
    real_matrix([[-c, -s], [-s, c]])
}

fn criterion_6() -> Check {
    let params = HistoriesParams {
        dim: 2,
        initial_state: real_matrix([[1.0, 0.0], [0.0, 0.0]]),
        hamiltonian: real_matrix([[0.0, 0.0], [0.0, 0.0]]),
        slots: vec![
            SlotSpec {
                time: 1.0,
                observable: angle_observable(PI / 4.0),
                partition: vec![vec![0], vec![1]],
            },
            SlotSpec {
                time: 2.0,
                observable: angle_observable(108f64.to_radians()),
                partition: vec![vec![0], vec![1]],
            },
        ],
        tol: 1e-9,
    };
    let out = run_histories_check(&params).unwrap();
    let row = &out.report.results["probability_table"][0];
    let p_mod = row["p_modified"].as_f64().unwrap();
    let p_std = row["p_standard"].as_f64().unwrap();
    let flagged = out
        .report
        .violations
        .iter()
        .any(|v| v["unions"] == serde_json::json!([[0], [0]]) && v["probability"].as_f64() == Some(p_mod));
    let consistent = out.report.results["consistent"].as_bool().unwrap();
    check(
        (p_mod - WITNESS_MODIFIED).abs() < WITNESS_TOL
            && (p_std - WITNESS_STANDARD).abs() < WITNESS_TOL
            && flagged
            && !consistent,
        format!("p_modified = {p_mod:.7}, p_standard = {p_std:.7}, flagged = {flagged}"),
    )
}

fn criterion_7() -> Check {
    let mut rng = rng_from_seed(0xACCE_0007);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let dim = 2 + i % 5;
        let eps = 1e-6 * 10f64.powf(3.0 * i as f64 / 99.0);
        let rho = DensityMatrix::new(random_quasi_positive_matrix(&mut rng, dim, eps)).unwrap();
        let u = random_unitary(&mut rng, dim);
        let after = evolve(&rho, &u).unwrap();
        let shift = rho
            .spectrum()
            .iter()
            .zip(after.spectrum())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(shift);
    }
    check(worst < SPECTRUM_TOL, format!("max eigenvalue shift {worst:.3e}"))
}

fn criterion_8() -> Check {
    timed(Duration::from_secs(60), || {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let out = run_decoherence_sweep(
            &SweepParams {
                a: Scalar(c64(amp, 0.0)),
                b: Scalar(c64(amp, 0.0)),
                n_values: (2..=12).collect(),
                trials: 200,
                t: 1.0,
            },
            2024,
        )
        .unwrap();
        let rows = out.report.results["rows"].as_array().unwrap();
        let medians: Vec<f64> = rows.iter().map(|r| r["median_abs_z"].as_f64().unwrap()).collect();
        let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
        let fit = &out.report.results["log_median_fit"];
        let slope = fit["slope"].as_f64().unwrap();
        let r2 = fit["r_squared"].as_f64().unwrap();
        let deviation = rows
            .iter()
            .map(|r| r["max_oracle_deviation"].as_f64().unwrap())
            .fold(0.0, f64::max);
        check(
            decreasing && slope < 0.0 && r2 >= MIN_R_SQUARED && out.contract_failures.is_empty(),
            format!("slope {slope:.4} nats/qubit, R² {r2:.4}, oracle deviation {deviation:.3e}"),
        )
    })
}

fn criterion_9() -> Check {
    timed(Duration::from_secs(30), || {
        let a2 = 0.5;
        let z_values = vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
        let out = run_window_scan(&WindowParams {
            a2,
            z_values,
            delta_theta: None,
            delta_theta_rel: Some(1.0 / 20.0),
            theta_half_span: 0.05,
            tol: qreduce_core::reduction::DEFAULT_EVENT_TOL,
        })
        .unwrap();
        let fitted = out.report.results["width_slope"].as_f64().unwrap();
        // width = 2·arctan(2|z|/(2|a|²)) ≈ (2/|a|²)·|z|
        let analytic = 2.0 / a2;
        let rel = (fitted - analytic).abs() / analytic;
        let clean = out.warnings.is_empty();
        check(
            rel <= WINDOW_REL_TOL && clean,
            format!(
                "fitted c = {fitted:.4}, analytic c = {analytic}, relative error {:.2}%",
                100.0 * rel
            ),
        )
    })
}

fn criterion_10() -> Check {
    let lambdas: Vec<f64> = (0..=20).map(|k| 1.0 + 0.1 * k as f64).chain([0.0]).collect();
    let ratios: Vec<f64> = (1..=20).map(|k| 0.005 * k as f64).chain([0.2, 0.5, 1.0]).collect();
    let out = run_lambda_positivity_map(&LambdaMapParams {
        lambda_grid: lambdas,
        ratio_grid: ratios,
    })
    .unwrap();
    let mut ok = out.contract_failures.is_empty();
    let mut worst_positive = f64::INFINITY;
    let mut worst_closed = 0.0f64;
    for row in &out.report.table.rows {
        let lambda: f64 = row[0].parse().unwrap();
        let ratio: f64 = row[1].parse().unwrap();
        let min_eig: f64 = row[2].parse().unwrap();
        worst_closed = worst_closed.max((min_eig - lambda_min_eig_closed_form(lambda, ratio)).abs());
        if lambda >= 1.0 && ratio <= 0.1 {
            worst_positive = worst_positive.min(min_eig);
            ok &= min_eig >= -POSITIVITY_TOL;
        }
        if lambda == 0.0 && ratio > 0.0 {
            ok &= min_eig < 0.0 && min_eig.abs() <= ratio * ratio;
        }
    }
    ok &= worst_closed < CLOSED_FORM_TOL;
    check(
        ok,
        format!("min eigenvalue for λ ∈ [1, 3], ratio ≤ 0.1: {worst_positive:.3e}; closed-form deviation {worst_closed:.3e}"),
    )
}

fn run_twice(config: &Path) -> bool {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let (written, _) = run_config_file(config, Some(dir.path()), None).unwrap();
        (
            std::fs::read(written.csv).unwrap(),
            std::fs::read(written.json).unwrap(),
        )
    };
    run() == run()
}

fn criterion_11() -> Check {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<_> = std::fs::read_dir(&configs)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mismatched: Vec<String> = paths
        .iter()
        .filter(|p| !run_twice(p))
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let compare = || {
        run_compare_postulates(&CompareParams {
            a2: 0.3,
            z_values: vec![0.0, 0.01, 0.1],
            lambdas: vec![0.0, 1.0],
        })
        .unwrap()
        .report
    };
    let (a, b) = (compare(), compare());
    let direct_ok = a.table.to_bytes().unwrap() == b.table.to_bytes().unwrap()
        && a.json_bytes().unwrap() == b.json_bytes().unwrap();
    check(
        !paths.is_empty() && mismatched.is_empty() && direct_ok,
        format!(
            "{} configs rerun byte-identically; mismatches: {mismatched:?}",
            paths.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "unread λ-mixture equals ρ", criterion_1),
        (
            2,
            "unread Lüders mixture differs from ρ by the off-block norm",
            criterion_2,
        ),
        (3, "single-event history probability is Tr[ρP]", criterion_3),
        (4, "additivity", criterion_4),
        (5, "marginalization", criterion_5),
        (6, "negative-probability witness at 108°", criterion_6),
        (7, "spectrum conserved under unitary evolution", criterion_7),
        (8, "decoherence suppression", criterion_8),
        (9, "no-event window width", criterion_9),
        (10, "λ-positivity map", criterion_10),
        (11, "deterministic outputs", criterion_11),
    ];
    let mut failures = 0;
    for (n, name, f) in criteria {
        let c = f();
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {verdict}: {name} ({})", c.detail);
        if !c.passed {
            failures += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
