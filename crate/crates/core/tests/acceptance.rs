//! Acceptance suite, run without the libtest harness so that every check
//! prints its `PASS`/`FAIL` line. Exits non-zero if any check fails.

use osmx_core::assembly::{broken_h1_distance, Material, Source};
use osmx_core::ddm::{
    dense_skeleton_operator, estimate_gamma, gmres_solve, lambda_bounds, richardson_solve, richardson_solve_from,
    DdmProblem, SolverConfig,
};
use osmx_core::exchange::{apply_pi, project_single_trace};
use osmx_core::impedance::{ImpedanceKind, ImpedanceSpec};
use osmx_core::mesh::{detect_cross_points, generate_disk_mesh, partition_mesh, PartitionMethod};
use osmx_core::skeleton::InterfacePairing;
use osmx_core::study::{
    run_diagnostics, run_sweep, write_diagnostics_csv, write_history_csv, write_summary_csv, RunConfig, SolverKind,
    SweepAxis,
};
use osmx_core::{MultiTrace, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

const ALL: [ImpedanceKind; 4] = [ImpedanceKind::M, ImpedanceKind::K, ImpedanceKind::W, ImpedanceKind::Lambda];
const SEED: u64 = 20;

fn verdict(id: u32, ok: bool, detail: &str) {
    println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        panic!("criterion {id} failed");
    }
}

fn disk_problem(kappa: C64, j: usize, method: PartitionMethod, kind: ImpedanceKind, n_lambda: f64) -> DdmProblem {
    let h = 2.0 * std::f64::consts::PI / (kappa.re * n_lambda);
    let mesh = generate_disk_mesh(1.0, h).unwrap();
    let part = partition_mesh(&mesh, j, &method).unwrap();
    let mat = Material::homogeneous(&mesh, 1.0, kappa).unwrap();
    let src = Source::plane_wave(&mesh, kappa);
    let spec = ImpedanceSpec::for_wavenumber(kind, kappa.norm()).unwrap();
    DdmProblem::new(mesh, part, mat, src, &spec).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Worst relative defect of the exchange identities over random traces.
fn exchange_defects(pb: &DdmProblem, samples: usize, seed: u64) -> f64 {
    let (map, imp) = (pb.skeleton(), pb.impedance());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = MultiTrace::random(map, &mut rng);
        let nq = imp.th_norm(&q).unwrap();
        let pq = apply_pi(map, imp, &q).unwrap();
        let ppq = apply_pi(map, imp, &pq).unwrap();
        let proj = project_single_trace(map, imp, &q).unwrap();
        let proj2 = project_single_trace(map, imp, &proj).unwrap();
        let comp = &q - &proj;
        let involution = imp.th_norm(&(&ppq - &q)).unwrap() / nq;
        let isometry = rel(imp.th_norm(&pq).unwrap(), nq);
        let idempotence = imp.th_norm(&(&proj2 - &proj)).unwrap() / nq;
        let pyth = {
            let a = imp.th_norm(&proj).unwrap();
            let b = imp.th_norm(&comp).unwrap();
            rel(a * a + b * b, nq * nq)
        };
        worst = worst.max(involution).max(isometry).max(idempotence).max(pyth);
    }
    worst
}

fn criterion_1_csv() -> String {
    let mut out = String::from("impedance,worst_defect\n");
    for kind in ALL {
        let pb = disk_problem(C64::new(1.0, 0.0), 4, PartitionMethod::GraphGrowing, kind, 20.0);
        out += &format!("{kind},{:e}\n", exchange_defects(&pb, 100, SEED));
    }
    out
}

fn criterion_1_exchange_invariants() {
    let start = Instant::now();
    let probe = disk_problem(C64::new(1.0, 0.0), 4, PartitionMethod::GraphGrowing, ImpedanceKind::M, 20.0);
    let cross = detect_cross_points(probe.mesh(), probe.partition());
    let mut worst: f64 = 0.0;
    for kind in ALL {
        let pb = disk_problem(C64::new(1.0, 0.0), 4, PartitionMethod::GraphGrowing, kind, 20.0);
        worst = worst.max(exchange_defects(&pb, 100, SEED));
    }
    let elapsed = start.elapsed();
    let ok = !cross.interior_cross_points.is_empty() && worst <= 1e-11 && elapsed < Duration::from_secs(30);
    verdict(
        1,
        ok,
        &format!(
            "{} interior cross-points, worst exchange identity defect {worst:.2e} (limit 1e-11), {:.1} s (limit 30 s)",
            cross.interior_cross_points.len(),
            elapsed.as_secs_f64()
        ),
    );
}

fn swap_defect(pb: &DdmProblem, samples: usize, seed: u64) -> f64 {
    let (map, imp) = (pb.skeleton(), pb.impedance());
    let pairing = InterfacePairing::new(pb.mesh(), pb.partition(), map).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = MultiTrace::random(map, &mut rng);
        let d = &apply_pi(map, imp, &q).unwrap() - &pairing.swap_apply(&q).unwrap();
        worst = worst.max(imp.th_norm(&d).unwrap() / imp.th_norm(&q).unwrap());
    }
    worst
}

fn criterion_2_csv() -> String {
    let mut out = String::from("j,impedance,worst_defect\n");
    for j in [2, 3] {
        for kind in [ImpedanceKind::M, ImpedanceKind::K, ImpedanceKind::W] {
            let pb = disk_problem(C64::new(1.0, 0.0), j, PartitionMethod::Onion, kind, 20.0);
            out += &format!("{j},{kind},{:e}\n", swap_defect(&pb, 50, SEED));
        }
    }
    out
}

fn criterion_2_swap_equivalence() {
    let mut worst: f64 = 0.0;
    let mut cross_free = true;
    for j in [2, 3] {
        for kind in [ImpedanceKind::M, ImpedanceKind::K, ImpedanceKind::W] {
            let pb = disk_problem(C64::new(1.0, 0.0), j, PartitionMethod::Onion, kind, 20.0);
            cross_free &= detect_cross_points(pb.mesh(), pb.partition()).is_empty();
            worst = worst.max(swap_defect(&pb, 50, SEED));
        }
    }
    verdict(
        2,
        cross_free && worst <= 1e-11,
        &format!("onion J=2,3 with M/K/W: max ||Pi q - X q|| / ||q|| = {worst:.2e} (limit 1e-11)"),
    );
}

fn contraction_excess(pb: &DdmProblem, samples: usize, seed: u64) -> f64 {
    let imp = pb.impedance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let p = MultiTrace::random(pb.skeleton(), &mut rng);
        let sp = pb.apply_scattering(&p).unwrap();
        worst = worst.max(imp.th_norm(&sp).unwrap() / imp.th_norm(&p).unwrap());
    }
    worst
}

fn criterion_3_csv() -> String {
    let mut out = String::from("kappa_im,impedance,max_ratio\n");
    for kappa in [C64::new(3.0, 0.0), C64::new(3.0, 0.5)] {
        for kind in ALL {
            let pb = disk_problem(kappa, 4, PartitionMethod::GraphGrowing, kind, 10.0);
            out += &format!("{},{kind},{:e}\n", kappa.im, contraction_excess(&pb, 100, SEED));
        }
    }
    out
}

fn criterion_3_scattering_contraction() {
    let mut worst: f64 = 0.0;
    for kappa in [C64::new(3.0, 0.0), C64::new(3.0, 0.5)] {
        for kind in ALL {
            let pb = disk_problem(kappa, 4, PartitionMethod::GraphGrowing, kind, 10.0);
            worst = worst.max(contraction_excess(&pb, 100, SEED));
        }
    }
    verdict(3, worst <= 1.0 + 1e-11, &format!("max ||S p|| / ||p|| = {worst:.15} (limit 1 + 1e-11)"));
}

fn criterion_4_run() -> (f64, f64, f64, usize, usize, String) {
    let pb = disk_problem(C64::new(5.0, 0.0), 4, PartitionMethod::GraphGrowing, ImpedanceKind::M, 20.0);
    let reference = pb.compute_reference().unwrap();
    let cfg = SolverConfig { r: 0.5, tol: 1e-8, restart: 20, ..Default::default() };
    let rich = richardson_solve(&pb, &cfg, &reference).unwrap();
    let gm = gmres_solve(&pb, &cfg, &reference).unwrap();
    let gap = broken_h1_distance(pb.mesh(), pb.decomposition(), pb.material(), &rich.u, &gm.u).unwrap()
        / reference.norm;
    let mut csv = Vec::new();
    write_history_csv(&mut csv, &rich.history).unwrap();
    write_history_csv(&mut csv, &gm.history).unwrap();
    let rich_err = if rich.converged { rich.final_error() } else { f64::INFINITY };
    let gm_err = if gm.converged { gm.final_error() } else { f64::INFINITY };
    (rich_err, gm_err, gap, rich.iteration, gm.iteration, String::from_utf8(csv).unwrap())
}

fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let (rich_err, gm_err, gap, rich_it, gm_it, _) = criterion_4_run();
    let elapsed = start.elapsed();
    let ok = rich_err <= 1e-8 && gm_err <= 1e-8 && gap <= 1e-7 && elapsed < Duration::from_secs(120);
    verdict(
        4,
        ok,
        &format!(
            "richardson {rich_it} it, error {rich_err:.2e}; gmres {gm_it} it, error {gm_err:.2e}; \
             driver gap {gap:.2e} (limit 1e-7); {:.1} s (limit 120 s)",
            elapsed.as_secs_f64()
        ),
    );
}

fn tiny_problem() -> DdmProblem {
    disk_problem(C64::new(2.0, 0.0), 3, PartitionMethod::GraphGrowing, ImpedanceKind::M, 8.0)
}

/// Worst observed `‖ε_n‖ / ‖ε_{n−1}‖` minus the theoretical bound.
fn criterion_5_run() -> (usize, f64, f64, f64) {
    let pb = tiny_problem();
    let dim = pb.skeleton().total_trace_dofs();
    let gamma = estimate_gamma(&pb).unwrap();
    let r = 0.5;
    let bound = (1.0 - r * (1.0 - r) * gamma * gamma).sqrt();

    // exact skeleton solution from the dense operator
    let op = dense_skeleton_operator(&pb).unwrap();
    let f = nalgebra::DVector::from_vec(pb.skeleton_rhs().flatten());
    let p_inf = op.lu().solve(&f).unwrap();
    let p_inf = MultiTrace::from_flat(pb.skeleton(), p_inf.as_slice()).unwrap();

    let reference = pb.compute_reference().unwrap();
    let step = SolverConfig { r, tol: 1e-300, max_iter: 1, ..Default::default() };
    let imp = pb.impedance();
    let mut p = MultiTrace::zeros(pb.skeleton());
    let mut prev = imp.th_norm(&(&p - &p_inf)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        p = richardson_solve_from(&pb, &step, &reference, p).unwrap().p;
        let e = imp.th_norm(&(&p - &p_inf)).unwrap();
        if prev < 1e-13 * imp.th_norm(&p_inf).unwrap() {
            break;
        }
        worst = worst.max(e / prev);
        prev = e;
    }
    (dim, gamma, bound, worst)
}

fn criterion_5_rate_bound() {
    let (dim, gamma, bound, worst) = criterion_5_run();
    let ok = dim <= 600 && gamma > 0.0 && gamma <= 2.0 && worst <= bound + 1e-8;
    verdict(
        5,
        ok,
        &format!("dim {dim}, gamma {gamma:.4}, worst step ratio {worst:.6} vs bound {bound:.6}"),
    );
}

fn base_config() -> RunConfig {
    RunConfig { seed: SEED, solver: SolverKind::Gmres, ..Default::default() }
}

fn criterion_6_rows() -> Vec<osmx_core::study::SweepRow> {
    let base = RunConfig { kappa: 1.0, j: 4, ..base_config() };
    run_sweep(&base, SweepAxis::NLambda, &[10.0, 20.0, 40.0], &[ImpedanceKind::M, ImpedanceKind::Lambda], false).unwrap()
}

fn criterion_6_h_dependence() {
    let start = Instant::now();
    let rows = criterion_6_rows();
    let elapsed = start.elapsed();
    let counts = |name: &str| -> Vec<usize> {
        rows.iter().filter(|r| r.impedance == name).map(|r| r.iterations).collect()
    };
    let lam = counts("Lambda");
    let m = counts("M");
    let all_converged = rows.iter().all(|r| r.converged);
    let (lo, hi) = (*lam.iter().min().unwrap() as f64, *lam.iter().max().unwrap() as f64);
    let lam_spread = (hi - lo) / lo;
    let m_growth = m[2] as f64 / m[0] as f64 - 1.0;
    let ok = all_converged && lam_spread < 0.25 && m_growth >= 0.5 && elapsed < Duration::from_secs(600);
    verdict(
        6,
        ok,
        &format!(
            "N_lambda 10/20/40 gmres counts: Lambda {lam:?} (spread {:.0}%, limit 25%), M {m:?} \
             (growth {:.0}%, need 50%); {:.1} s",
            100.0 * lam_spread,
            100.0 * m_growth,
            elapsed.as_secs_f64()
        ),
    );
}

fn criterion_7_rows() -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut schur = Vec::new();
    let mut mass = Vec::new();
    for n_lambda in [10.0, 20.0, 40.0] {
        let pb = disk_problem(C64::new(1.0, 0.0), 4, PartitionMethod::GraphGrowing, ImpedanceKind::Lambda, n_lambda);
        schur.push(lambda_bounds(&pb).unwrap());
        let pb = disk_problem(C64::new(1.0, 0.0), 4, PartitionMethod::GraphGrowing, ImpedanceKind::M, n_lambda);
        mass.push(lambda_bounds(&pb).unwrap());
    }
    (schur, mass)
}

fn criterion_7_lambda_bounds() {
    let (schur, mass) = criterion_7_rows();
    let unit = schur.iter().all(|&(lo, hi)| (lo - 1.0).abs() <= 1e-10 && (hi - 1.0).abs() <= 1e-10);
    let decreasing = mass.windows(2).all(|w| w[1].0 < w[0].0);
    let schur_dev = schur.iter().map(|&(lo, hi)| (lo - 1.0).abs().max((hi - 1.0).abs())).fold(0.0, f64::max);
    let lm: Vec<String> = mass.iter().map(|m| format!("{:.4}", m.0)).collect();
    verdict(
        7,
        unit && decreasing,
        &format!("Lambda max |lambda - 1| = {schur_dev:.1e}; M lambda_minus over N_lambda 10/20/40: {lm:?}"),
    );
}

fn criterion_8_rows() -> Vec<osmx_core::study::SweepRow> {
    let base = RunConfig { kappa: 10.0, j: 10, n_lambda: 25.0, ..base_config() };
    run_sweep(&base, SweepAxis::MuR, &[0.0, 4.0], &ALL, true).unwrap()
}

fn criterion_8_heterogeneous() {
    let rows = criterion_8_rows();
    let count = |name: &str, mu: f64| rows.iter().find(|r| r.impedance == name && r.value == mu).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    let base0 = count("none", 0.0);
    let base4 = count("none", 4.0);
    let base_ratio = base4.iterations as f64 / base0.iterations as f64;
    for kind in ALL {
        let name = kind.to_string();
        let (a, b) = (count(&name, 0.0), count(&name, 4.0));
        let ratio = b.iterations as f64 / a.iterations as f64;
        ok &= a.converged && b.converged && ratio < 3.0 && ratio < base_ratio;
        parts.push(format!("{name} {}->{} (x{ratio:.2})", a.iterations, b.iterations));
    }
    verdict(
        8,
        ok,
        &format!(
            "mu_r 0->4: {}; undecomposed {}->{} (x{base_ratio:.2}, converged {}/{})",
            parts.join(", "),
            base0.iterations,
            base4.iterations,
            base0.converged,
            base4.converged
        ),
    );
}

fn all_outputs() -> Vec<String> {
    let mut out = vec![criterion_1_csv(), criterion_2_csv(), criterion_3_csv(), criterion_4_run().5];
    let (dim, gamma, bound, worst) = criterion_5_run();
    out.push(format!("{dim},{gamma:e},{bound:e},{worst:e}\n"));
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, &criterion_6_rows()).unwrap();
    write_summary_csv(&mut csv, &criterion_8_rows()).unwrap();
    out.push(String::from_utf8(csv).unwrap());
    out.push(format!("{:?}\n", criterion_7_rows()));
    let mut csv = Vec::new();
    let tiny = RunConfig { kappa: 2.0, j: 3, n_lambda: 8.0, ..base_config() };
    write_diagnostics_csv(&mut csv, &run_diagnostics(&tiny, &ALL).unwrap()).unwrap();
    out.push(String::from_utf8(csv).unwrap());
    out
}

fn criterion_9_determinism() {
    let first = all_outputs();
    let second = all_outputs();
    let same = first == second;
    let bytes: usize = first.iter().map(String::len).sum();
    verdict(9, same, &format!("two full runs of criteria 1-8 produced {bytes} bytes of identical CSV output"));
}

fn main() {
    let checks: [(&str, fn()); 9] = [
        ("criterion_1_exchange_invariants", criterion_1_exchange_invariants),
        ("criterion_2_swap_equivalence", criterion_2_swap_equivalence),
        ("criterion_3_scattering_contraction", criterion_3_scattering_contraction),
        ("criterion_4_oracle_equivalence", criterion_4_oracle_equivalence),
        ("criterion_5_rate_bound", criterion_5_rate_bound),
        ("criterion_6_h_dependence", criterion_6_h_dependence),
        ("criterion_7_lambda_bounds", criterion_7_lambda_bounds),
        ("criterion_8_heterogeneous", criterion_8_heterogeneous),
        ("criterion_9_determinism", criterion_9_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if std::panic::catch_unwind(check).is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
