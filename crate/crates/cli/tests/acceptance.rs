//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nhvqe::heatmap::{scan, Engine, HeatmapRequest};
use nhvqe::linalg::{Complex, ComplexMatrix};
use nhvqe::matrix_file::matrix_to_json;
use nhvqe::oracle::{
    char_poly, eig_reference, hermitian_eig_reference, singular_values_jacobi, svd_reference,
};
use nhvqe::proxy::hermitianize;
use nhvqe::vqe::{envelope_gradient, expectation_gradient, minimize_expectation, minimize_shifted, GDConfig};
use nhvqe::ansatz::AnsatzParams;
use nhvqe::proxy::default_pad;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BETA: f64 = 8.0 / 3.0;
const PUBLISHED_TOL: f64 = 0.02;
const ORACLE_TOL: f64 = 1e-4;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    elapsed: Duration,
}

fn nhvqe(args: &[&str], threads: Option<usize>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nhvqe"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    let start = Instant::now();
    let out = cmd.output().expect("spawn nhvqe");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        elapsed: start.elapsed(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_slice(&run.stdout).expect("nhvqe emits one JSON document")
}

fn complex(v: &Value) -> Complex {
    Complex::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

struct PointResult {
    branch: String,
    values: Vec<Complex>,
    conjugate_completed: usize,
    oracle: Vec<Complex>,
    stability: String,
    complete: bool,
}

fn lorenz_points(rho: &str) -> (Vec<PointResult>, Run) {
    let run = nhvqe(&["lorenz", "--rho", rho, "--beta", "8/3", "--point", "all", "--format", "json"], None);
    let doc = json(&run);
    let points = doc["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let est = p["spectrum"]["estimates"].as_array().unwrap();
            PointResult {
                branch: p["branch"].as_str().unwrap().to_owned(),
                values: est.iter().map(|e| complex(&e["value"])).collect(),
                conjugate_completed: est.iter().filter(|e| e["conjugate_completed"] == true).count(),
                oracle: p["oracle"].as_array().unwrap().iter().map(complex).collect(),
                stability: p["spectrum"]["stability"].as_str().unwrap_or("none").to_owned(),
                complete: p["spectrum"]["complete"] == true,
            }
        })
        .collect();
    (points, run)
}

// largest distance from each wanted value to the nearest found value, and
// the count check
fn match_error(found: &[Complex], want: &[Complex]) -> f64 {
    if found.len() != want.len() {
        return f64::INFINITY;
    }
    want.iter()
        .map(|w| found.iter().map(|f| (f - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn reals(xs: &[f64]) -> Vec<Complex> {
    xs.iter().map(|&x| Complex::new(x, 0.0)).collect()
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, n: u32, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} criterion {n:>2}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

/// Checks one ρ against the rounded published values.
fn published_case(
    rho: &str,
    trivial: &[Complex],
    non_trivial: Option<(&[Complex], &str)>,
    trivial_class: Option<&str>,
) -> (bool, String, Run) {
    let (points, run) = lorenz_points(rho);
    let mut ok = run.code == 0;
    let mut notes = Vec::new();
    for p in &points {
        let (want, class) = if p.branch == "trivial" {
            (trivial, trivial_class)
        } else {
            match non_trivial {
                Some((w, c)) => (w, Some(c)),
                None => continue,
            }
        };
        let published = match_error(&p.values, want);
        let oracle = match_error(&p.values, &p.oracle);
        let class_ok = class.is_none_or(|c| c == p.stability);
        ok &= p.complete && published <= PUBLISHED_TOL && oracle <= ORACLE_TOL && class_ok;
        notes.push(format!(
            "{} |Δpublished|={published:.1e} |Δoracle|={oracle:.1e} {}",
            p.branch, p.stability
        ));
    }
    if non_trivial.is_some() {
        ok &= points.len() == 3;
    }
    (ok, notes.join("; "), run)
}

fn criterion_1(r: &mut Report) {
    let (ok, notes, run) = published_case("0.5", &reals(&[-10.52, -2.67, -0.48]), None, None);
    let secs = run.elapsed.as_secs_f64();
    r.line(1, ok && secs < 10.0, format!("rho=0.5 trivial: {notes}; {secs:.2} s (< 10 s)"));
}

fn criterion_2(r: &mut Report) {
    let (ok, notes, _) = published_case(
        "1.1",
        &reals(&[-11.09, -2.67, 0.09]),
        Some((&reals(&[-11.03, -2.44, -0.20]), "StableNode")),
        Some("UnstableSaddle"),
    );
    r.line(2, ok, format!("rho=1.1: {notes}"));
}

fn criterion_3(r: &mut Report) {
    let pair = [Complex::new(-13.65, 0.0), Complex::new(-0.01, 9.58), Complex::new(-0.01, -9.58)];
    let (mut ok, notes, _) = published_case(
        "24.5",
        &reals(&[-21.79, -2.67, 10.79]),
        Some((&pair, "StableSpiral")),
        None,
    );
    let (points, _) = lorenz_points("24.5");
    let completed: Vec<usize> = points
        .iter()
        .filter(|p| p.branch != "trivial")
        .map(|p| p.conjugate_completed)
        .collect();
    ok &= completed.iter().all(|&c| c == 1);
    r.line(3, ok, format!("rho=24.5: {notes}; conjugate-completed per pair {completed:?}"));
}

fn criterion_4(r: &mut Report) {
    let pair = [Complex::new(-13.85, 0.0), Complex::new(0.09, 10.19), Complex::new(0.09, -10.19)];
    let (ok, notes, _) = published_case(
        "28",
        &reals(&[-22.83, -2.67, 11.83]),
        Some((&pair, "UnstableSpiral")),
        Some("UnstableSaddle"),
    );
    r.line(4, ok, format!("rho=28: {notes}"));
}

fn criterion_5(r: &mut Report) {
    let sigma: f64 = 10.0;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (text, rho) in [("0.5", 0.5_f64), ("1.1", 1.1), ("24.5", 24.5), ("28", 28.0)] {
        let (points, run) = lorenz_points(text);
        ok &= run.code == 0;
        let trivial = points.iter().find(|p| p.branch == "trivial").unwrap();
        // the xy block: λ² + (σ+1)λ + σ(1−ρ) = 0
        let b = sigma + 1.0;
        let disc = (b * b - 4.0 * sigma * (1.0 - rho)).sqrt();
        let want = reals(&[-BETA, (-b - disc) / 2.0, (-b + disc) / 2.0]);
        let err = match_error(&trivial.values, &want);
        worst = worst.max(err);
        ok &= err <= ORACLE_TOL;
    }
    r.line(5, ok, format!("trivial points, -beta and quadratic roots: max error {worst:.1e} (<= 1e-4)"));
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex::new(rng.random_range(-3.0..3.0), 0.0);
        for j in i + 1..n {
            let z = Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

fn random_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex::new(rng.random_range(-2.0..2.0), 0.0))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let (mut above, mut below) = (0.0_f64, 0.0_f64);
    let mut ok = true;
    for k in 0..100 {
        let h = random_hermitian(&mut rng, 4);
        let ev = hermitian_eig_reference(&h).unwrap();
        let cfg = GDConfig {
            rng_seed: k,
            ..GDConfig::inner_default()
        };
        let value = minimize_expectation(&h, &cfg, None).unwrap().value;
        let range = ev[3] - ev[0];
        let gap = value - ev[0];
        above = above.max(gap / (1.0 + range));
        below = below.max(-gap);
        ok &= gap <= 1e-6 * (1.0 + range) && gap >= -1e-8;
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        6,
        ok && secs < 60.0,
        format!("100 Hermitian 4x4: max excess {above:.1e}·(1+range), max undershoot {below:.1e}; {secs:.2} s (< 60 s)"),
    );
}

fn criterion_7(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut herm, mut psd, mut zero) = (0.0_f64, f64::INFINITY, 0.0_f64);
    let mut ok = true;
    for k in 0..200 {
        let n = 2 + k % 3;
        let m = random_complex(&mut rng, n, n);
        let eps = Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let h = hermitianize(&m, eps).unwrap();
        let defect = h.max_abs_diff(&h.adjoint());
        let min = hermitian_eig_reference(&h).unwrap()[0];
        herm = herm.max(defect);
        psd = psd.min(min);
        ok &= defect <= 1e-10 && min >= -1e-10;
        let scale = 1.0 + m.frobenius_norm();
        for lambda in eig_reference(&m).unwrap().eigenvalues {
            // smallest eigenvalue of H(λ) as σ_min(M − λI)², without forming H
            let sv = singular_values_jacobi(&m.shifted(lambda).unwrap()).unwrap();
            let at = sv[n - 1] * sv[n - 1] / (scale * scale);
            zero = zero.max(at);
            ok &= at < 1e-18;
        }
    }
    r.line(
        7,
        ok,
        format!("200 (M, eps): Hermitian defect {herm:.1e}, min eigenvalue {psd:.1e}, max min-eig(H(λ))/scale² {zero:.1e} (< 1e-18)"),
    );
}

fn criterion_8(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-4;
    let (mut env_worst, mut inner_worst) = (0.0_f64, 0.0_f64);
    for k in 0..50 {
        let m = random_complex(&mut rng, 2 + k % 3, 2 + k % 3);
        let eps = Complex::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let d = default_pad(&m, 3.0);
        let cfg = GDConfig {
            rng_seed: k as u64,
            max_iterations: 20_000,
            ..GDConfig::inner_default()
        };
        let here = minimize_shifted(&m, eps, d, &cfg, None).unwrap();
        let (gr, gi) = envelope_gradient(&m, eps, here.psi_min.amplitudes()).unwrap();
        let warm = GDConfig { restarts: 0, ..cfg };
        let g = |z: Complex| minimize_shifted(&m, z, d, &warm, Some(&here.theta_star)).unwrap().value;
        let fr = (g(eps + Complex::new(h, 0.0)) - g(eps - Complex::new(h, 0.0))) / (2.0 * h);
        let fi = (g(eps + Complex::new(0.0, h)) - g(eps - Complex::new(0.0, h))) / (2.0 * h);
        env_worst = env_worst.max((gr - fr).hypot(gi - fi) / fr.hypot(fi));

        let herm = random_hermitian(&mut rng, 4);
        let theta = AnsatzParams::new((0..15).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect());
        let coarse = expectation_gradient(&herm, &theta, 1e-5, 3).unwrap();
        let fine = expectation_gradient(&herm, &theta, 1e-6, 3).unwrap();
        let scale = fine.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        for (a, b) in coarse.iter().zip(&fine) {
            inner_worst = inner_worst.max((a - b).abs() / scale);
        }
    }
    r.line(
        8,
        env_worst <= 1e-4 && inner_worst <= 1e-5,
        format!("envelope vs finite differences {env_worst:.1e} (<= 1e-4); inner step 1e-5 vs 1e-6 {inner_worst:.1e} (<= 1e-5)"),
    );
}

// determinant by Gaussian elimination with partial pivoting
fn lu_det(m: &ComplexMatrix) -> Complex {
    let n = m.n_rows();
    let mut a = m.to_rows();
    let mut det = Complex::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                let v = a[c][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

fn criterion_9(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut tr_err, mut det_err) = (0.0_f64, 0.0_f64);
    for k in 0..200 {
        let n = 2 + k % 3;
        let m = random_complex(&mut rng, n, n);
        let ev = eig_reference(&m).unwrap().eigenvalues;
        let sum: Complex = ev.iter().sum();
        let prod: Complex = ev.iter().product();
        tr_err = tr_err.max((sum - m.trace()).norm() / (1.0 + m.trace().norm()));
        let c_n = char_poly(&m).unwrap().root_product();
        let lu = lu_det(&m);
        for det in [c_n, lu] {
            det_err = det_err.max((prod - det).norm() / (1.0 + det.norm()));
        }
    }
    let diag = svd_reference(&ComplexMatrix::from_real_diag(&[3.0, 4.0])).unwrap();
    let nil = svd_reference(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()).unwrap();
    let fixtures = diag == vec![4.0, 3.0] && nil == vec![1.0, 0.0];
    r.line(
        9,
        tr_err <= 1e-8 && det_err <= 1e-8 && fixtures,
        format!("200 matrices: trace {tr_err:.1e}, det (char poly and LU) {det_err:.1e}; svd fixtures {diag:?} {nil:?}"),
    );
}

fn criterion_10(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m = random_real(&mut rng, 3, 3);
    let lambda = eig_reference(&m)
        .unwrap()
        .eigenvalues
        .into_iter()
        .find(|z| z.im.abs() < 1e-12)
        .unwrap()
        .re;
    // node (4, 0) of the 10x6 grid sits on λ
    let step = 0.4;
    let re = (lambda - 4.0 * step, lambda + 5.0 * step);
    let mut e = HeatmapRequest::new(m.clone(), re, (0.0, 2.0), 10, 6);
    e.engine = Some(Engine::Exact);
    let mut v = e.clone();
    v.engine = Some(Engine::Vqe);
    let (exact, vqe) = (scan(&e).unwrap(), scan(&v).unwrap());
    let worst = exact
        .values
        .iter()
        .zip(&vqe.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tol = 1e-5 * m.frobenius_norm().powi(2);
    let on_grid = exact.value(4, 0);
    r.line(
        10,
        worst < tol && on_grid < 1e-10,
        format!("10x6 grid: max |vqe - exact| {worst:.1e} (< {tol:.1e}); exact at eigenvalue {on_grid:.1e} (< 1e-10)"),
    );
}

fn criterion_11(r: &mut Report, dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 0..100 {
        let m = random_real(&mut rng, 3, if k < 50 { 3 } else { 2 });
        let path = dir.join(format!("svd{k}.json"));
        std::fs::write(&path, matrix_to_json(&m)).unwrap();
        let run = nhvqe(&["svd", "--matrix", path.to_str().unwrap(), "--format", "json"], None);
        let doc = json(&run);
        let got: Vec<f64> = doc["singular_values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let want = svd_reference(&m).unwrap();
        ok &= run.code == 0 && got.len() == want.len();
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    r.line(11, ok && worst <= 1e-4, format!("50 3x3 + 50 3x2: max error {worst:.1e} (<= 1e-4)"));
}

fn criterion_12(r: &mut Report, dir: &Path) {
    let matrix = dir.join("det.json");
    std::fs::write(&matrix, matrix_to_json(&random_real(&mut ChaCha8Rng::seed_from_u64(12), 3, 3))).unwrap();
    let m = matrix.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["lorenz", "--rho", "28", "--point", "all", "--format", "json", "--seed", "5"],
        vec!["eigs", "--matrix", m, "--format", "json", "--seed", "5"],
        vec!["svd", "--matrix", m, "--format", "json", "--seed", "5"],
    ];
    let mut ok = true;
    let mut checked = 0;
    for args in &commands {
        let a = nhvqe(args, Some(1));
        let b = nhvqe(args, Some(3));
        ok &= a.code == b.code && a.stdout == b.stdout && !a.stdout.is_empty();
        checked += 1;
    }
    for engine in ["vqe", "exact"] {
        let mut outputs = Vec::new();
        for (k, threads) in [1, 3].into_iter().enumerate() {
            let out = dir.join(format!("heat-{engine}-{k}.csv"));
            let out_s = out.to_str().unwrap().to_owned();
            let args = [
                "heatmap", "--matrix", m, "--re-min", "-2", "--re-max", "2", "--im-min", "0", "--im-max", "1.5",
                "--re-count", "8", "--im-count", "5", "--engine", engine, "--out", &out_s, "--seed", "5",
            ];
            let run = nhvqe(&args, Some(threads));
            ok &= run.code == 0;
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        ok &= outputs[0] == outputs[1] && !outputs[0].is_empty();
        checked += 1;
    }
    r.line(12, ok, format!("{checked} commands byte-identical across two runs (1 and 3 threads)"));
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);
    criterion_11(&mut r, dir.path());
    criterion_12(&mut r, dir.path());
    println!("acceptance: {} of 12 criteria failed", r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
