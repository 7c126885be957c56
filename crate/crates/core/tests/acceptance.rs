//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::time::{Duration, Instant};

use cqed_core::analytic::{
    dispersive_linewidths, fluorescence_intensity, polariton_frequencies, power_broadened_linewidth,
    LinewidthModelParams,
};
use cqed_core::cli::io::dataset_to_csv;
use cqed_core::fit::{excess_broadening, fit_linear, fit_lorentzian, fit_power_broadening, fit_saturation};
use cqed_core::hilbert::DensityMatrix;
use cqed_core::lindblad::{
    build_hamiltonian, build_liouvillian, evolve, solve_steady_state, truncation_check, Liouvillian,
};
use cqed_core::model::{
    angular_frequency_to_wavelength, angular_to_ghz, ghz_to_angular, wavelength_width_to_ghz, DriveSpec,
    DriveTarget, IncoherentChannels, SystemParams,
};
use cqed_core::scan::{
    frequency_window, linear_grid, log_grid, scan_laser, synthesize_noisy, synthetic_linear_linewidths,
    synthetic_linewidths, synthetic_lorentzian, synthetic_saturation, Observable, SpectrumDataset,
};
use cqed_core::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ----------------------------------------------------------------------- 1

/// Roots of det(M − ωI) for M = [[a, g], [g, d]] by Newton's method on the
/// characteristic polynomial, the second with the first divided out
/// (Maehly), then both polished on the full polynomial.
fn newton_eigenvalues(a: C64, d: C64, g: f64) -> [C64; 2] {
    let tr = a + d;
    let det = a * d - g * g;
    let p = |w: C64| w * w - tr * w + det;
    let dp = |w: C64| w * 2.0 - tr;
    let polish = |mut w: C64, deflate: Option<C64>| {
        for _ in 0..200 {
            let mut step = p(w) / dp(w);
            if let Some(r) = deflate {
                let corr = dp(w) / p(w) - 1.0 / (w - r);
                step = 1.0 / corr;
            }
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            w -= step;
            if step.norm() <= 1e-15 * w.norm().max(1.0) {
                break;
            }
        }
        w
    };
    let scale = a.norm().max(d.norm()).max(g).max(1.0);
    let r1 = polish(a + C64::new(0.3, 0.7) * scale * 1e-3, None);
    let r2 = polish(d - C64::new(0.5, 0.2) * scale * 1e-3, Some(r1));
    // undeflated polish; stays put unless r2 drifted
    let r2 = {
        let mut w = r2;
        for _ in 0..3 {
            let q = dp(w);
            if q.norm() == 0.0 {
                break;
            }
            let s = p(w) / q;
            if !(s.norm() < 1e-6 * scale) {
                break;
            }
            w -= s;
        }
        w
    };
    [r1, r2]
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let (mut worst, mut worst_trace) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let p = SystemParams::new(
            rng.random_range(0.0..50.0),
            rng.random_range(0.01..50.0),
            rng.random_range(0.01..50.0),
            0.0,
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
        )
        .unwrap();
        let pair = polariton_frequencies(&p);
        let a = C64::new(p.omega_d, -p.gamma);
        let d = C64::new(p.omega_c, -p.kappa);
        let roots = newton_eigenvalues(a, d, p.g);
        let rel = |x: C64, y: C64| (x - y).norm() / y.norm().max(1.0);
        let e1 = rel(pair.omega_plus, roots[0]).max(rel(pair.omega_minus, roots[1]));
        let e2 = rel(pair.omega_plus, roots[1]).max(rel(pair.omega_minus, roots[0]));
        worst = worst.max(e1.min(e2));
        let sum = pair.omega_plus + pair.omega_minus;
        let expected = C64::new(p.omega_c + p.omega_d, -(p.kappa + p.gamma));
        worst_trace = worst_trace.max((sum - expected).norm() / expected.norm().max(1.0));
    }
    outcome(
        worst <= 1e-10 && worst_trace <= 1e-12,
        format!("max eigenvalue rel err {worst:.2e} (tol 1e-10), trace identity {worst_trace:.2e} (tol 1e-12)"),
    )
}

// ----------------------------------------------------------------------- 2

/// γ ≪ κ: the dispersive formula drops a 2γ(g/δ)² term that would otherwise
/// mask the fourth-order convergence.
fn criterion_2() -> Outcome {
    let (g, kappa, gamma, gamma_d) = (1.0, 1.0, 1e-4, 1.0);
    let mut errs = Vec::new();
    for ratio in [5.0, 10.0, 20.0, 40.0] {
        let delta = ratio * g;
        let p = SystemParams::new(g, kappa, gamma, gamma_d, 0.0, delta).unwrap();
        let exact = -2.0 * polariton_frequencies(&p).qd_like(&p).im + 2.0 * gamma_d;
        let approx = dispersive_linewidths(&p).unwrap().gamma_qd_like;
        errs.push(((approx - exact) / exact).abs());
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    outcome(pass, format!("error ratios per doubling of δ/g: {:?} (need [12, 20])", fmt_all(&ratios)))
}

fn fmt_all(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3}")).collect()
}

// ----------------------------------------------------------------------- 3

const P_TILDES: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
const DEPHASING_RATIOS: [f64; 3] = [0.0, 1.0, 5.0];

fn bare_dot(gamma_ghz: f64, gamma_d_ghz: f64, lambda_nm: f64) -> SystemParams {
    SystemParams::from_ghz(0.0, 20.0, gamma_ghz, gamma_d_ghz, lambda_nm - 0.7, lambda_nm).unwrap()
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for r in DEPHASING_RATIOS {
        let p = bare_dot(0.5, 0.5 * r, 931.9);
        for pt in P_TILDES {
            let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, p.omega_d, p.rabi_for_saturation(pt)).unwrap();
            let ss = solve_steady_state(&p, &drive, &IncoherentChannels::default(), 1).unwrap();
            let expected = fluorescence_intensity(pt).unwrap();
            worst = worst.max((ss.observables.qd_population - expected).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max |ρ_ee − (P̃/2)/(1+P̃)| = {worst:.2e} (tol 1e-8)"))
}

// ----------------------------------------------------------------------- 4

fn scan_fwhm_ghz(scan: &SpectrumDataset) -> f64 {
    let fit = fit_lorentzian(scan).unwrap();
    assert!(fit.converged, "Lorentzian fit did not converge");
    wavelength_width_to_ghz(fit.value("center").unwrap(), fit.value("fwhm").unwrap()).unwrap()
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for r in DEPHASING_RATIOS {
        let p = bare_dot(0.5, 0.5 * r, 931.9);
        for pt in P_TILDES {
            let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, p.omega_d, p.rabi_for_saturation(pt)).unwrap();
            let expected = angular_to_ghz(power_broadened_linewidth(p.gamma, p.gamma_d, pt).unwrap());
            let grid = frequency_window(931.9, 8.0 * expected, 201).unwrap();
            let scan =
                scan_laser(&p, &drive, &IncoherentChannels::default(), &grid, Observable::QdEmission, 1).unwrap();
            worst = worst.max((scan_fwhm_ghz(&scan) / expected - 1.0).abs());
        }
    }
    outcome(worst <= 0.01, format!("max relative FWHM deviation {worst:.2e} (tol 1e-2)"))
}

// ----------------------------------------------------------------------- 5

/// γ ≪ κ ≪ δ, where the leading-order formula applies; at κ comparable to δ
/// the exact excess 2g²(κ−γ)/(δ² + (κ−γ)²) already falls ~8% short.
fn criterion_5() -> Outcome {
    let (g, delta, kappa, gamma) = (1.0, 10.0, 1.0, 0.01);
    let omega_d = ghz_to_angular(321_700.0);
    let coupled =
        SystemParams::new(ghz_to_angular(g), ghz_to_angular(kappa), ghz_to_angular(gamma), 0.0, omega_d - ghz_to_angular(delta), omega_d)
            .unwrap();
    let bare = SystemParams { g: 0.0, ..coupled };
    let center = angular_frequency_to_wavelength(polariton_frequencies(&coupled).qd_like(&coupled).re).unwrap();
    let grid = frequency_window(center, 8.0 * 2.0 * (gamma + 2.0 * g * g * kappa / (delta * delta)), 401).unwrap();
    let bare_center = angular_frequency_to_wavelength(omega_d).unwrap();
    let bare_grid = frequency_window(bare_center, 16.0 * gamma, 401).unwrap();
    // weak drive: P̃ = 1e-4 of the bare dot
    let rabi = bare.rabi_for_saturation(1e-4);
    let measure = |p: &SystemParams, grid: &[f64]| {
        let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, p.omega_d, rabi).unwrap();
        scan_fwhm_ghz(&scan_laser(p, &drive, &IncoherentChannels::default(), grid, Observable::QdEmission, 3).unwrap())
    };
    let excess = measure(&coupled, &grid) - measure(&bare, &bare_grid);
    let expected = 2.0 * (g / delta).powi(2) * kappa;
    let rel = (excess / expected - 1.0).abs();
    outcome(
        rel <= 0.10,
        format!("excess FWHM {excess:.5} GHz vs 2(g/δ)²κ = {expected:.5} GHz, rel dev {rel:.3} (tol 0.10)"),
    )
}

// ----------------------------------------------------------------------- 6

const TABLE1: [(&str, f64, f64); 3] = [("S1", 12.6, 1.96), ("S2", 9.9, 9.8), ("S3", 15.0, 5.8)];

fn criterion_6() -> Outcome {
    let alpha = 0.2;
    // P̃ = αP from 0.05 to 200
    let powers = log_grid(0.05 / alpha, 200.0 / alpha, 150).unwrap();
    let sat = synthetic_saturation(&powers, 1000.0, alpha).unwrap();
    let mut counts = Vec::new();
    for (name, c, d) in TABLE1 {
        let model = LinewidthModelParams::new(ghz_to_angular(c), ghz_to_angular(d), alpha).unwrap();
        let lw = synthetic_linewidths(&powers, &model).unwrap();
        let mut ok = 0;
        for s in 0..100u64 {
            let noisy_sat = synthesize_noisy(&sat, 0.03, 2 * s).unwrap();
            let noisy_lw = synthesize_noisy(&lw, 0.03, 2 * s + 1).unwrap();
            let Ok(fs) = fit_saturation(&noisy_sat) else { continue };
            let Ok(fp) = fit_power_broadening(&noisy_lw, fs.value("alpha").unwrap()) else { continue };
            let rc = (fp.value("delta_omega_c_ghz").unwrap() / c - 1.0).abs();
            let rd = (fp.value("delta_omega_0_ghz").unwrap() / d - 1.0).abs();
            if fs.converged && fp.converged && rc <= 0.05 && rd <= 0.05 {
                ok += 1;
            }
        }
        counts.push((name, ok));
    }
    let pass = counts.iter().all(|(_, k)| *k >= 95);
    let detail: Vec<String> = counts.iter().map(|(n, k)| format!("{n} {k}/100")).collect();
    outcome(pass, format!("trials within 5%: {} (need >= 95)", detail.join(", ")))
}

// ----------------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for w in [0.0879, 0.1517] {
        let grid = linear_grid(931.9 - 4.0 * w, 931.9 + 4.0 * w, 161).unwrap();
        let data = synthetic_lorentzian(&grid, 1000.0, 931.9, w, 20.0).unwrap();
        let fit = fit_lorentzian(&data).unwrap();
        worst = worst.max((fit.value("fwhm").unwrap() / w - 1.0).abs());
    }
    outcome(worst <= 1e-6, format!("max relative FWHM error {worst:.2e} (tol 1e-6)"))
}

// ----------------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let slope = 0.5;
    let powers = linear_grid(0.0, 100.0, 20).unwrap();
    let mut worst = 0.0f64;
    for c0 in [35.6, 50.3] {
        let clean = synthetic_linear_linewidths(&powers, c0, slope).unwrap();
        for seed in 0..20 {
            let noisy = synthesize_noisy(&clean, 0.01, seed).unwrap();
            let fit = fit_linear(&excess_broadening(&noisy, c0).unwrap()).unwrap();
            worst = worst.max((fit.value("slope").unwrap() / slope - 1.0).abs());
        }
    }
    outcome(worst <= 0.05, format!("max relative slope error over 40 trials {worst:.3} (tol 0.05)"))
}

// ----------------------------------------------------------------------- 9

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let channels = IncoherentChannels { transfer_qd_to_cavity: 0.2, transfer_cavity_to_qd: 0.1 };
    let mut notes = Vec::new();
    let mut pass = true;

    // trace and Hermiticity of L(ρ)
    let (mut tr, mut herm) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = SystemParams::new(
            rng.random_range(0.0..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..1.0),
            0.0,
            rng.random_range(-3.0..3.0),
        )
        .unwrap();
        let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, rng.random_range(-3.0..3.0), rng.random_range(0.0..2.0))
            .unwrap();
        let l = build_liouvillian(&build_hamiltonian(&p, &drive, 3).unwrap(), &p, &channels).unwrap();
        let rho = random_hermitian(l.hilbert_dim(), &mut rng);
        let out = l.apply(&rho).unwrap();
        tr = tr.max(out.trace().norm());
        herm = herm.max((&out - out.adjoint()).camax());
    }
    pass &= tr < 1e-12 && herm < 1e-12;
    notes.push(format!("|tr L(ρ)| {tr:.1e}, Hermiticity {herm:.1e}"));

    // steady-state positivity
    let mut min_eig = f64::INFINITY;
    for _ in 0..20 {
        let p = SystemParams::new(
            rng.random_range(0.0..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..1.0),
            0.0,
            rng.random_range(-3.0..3.0),
        )
        .unwrap();
        let target = if rng.random_bool(0.5) { DriveTarget::QdDrive } else { DriveTarget::CavityDrive };
        let drive = DriveSpec::with_rabi(target, rng.random_range(-3.0..3.0), rng.random_range(0.0..1.0)).unwrap();
        let ss = solve_steady_state(&p, &drive, &channels, 4).unwrap();
        min_eig = min_eig.min(ss.rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min));
    }
    pass &= min_eig >= -1e-10;
    notes.push(format!("min steady-state eigenvalue {min_eig:.1e}"));

    // truncation at weak drive
    let p = SystemParams::new(0.5, 1.0, 0.3, 0.1, 0.0, 2.0).unwrap();
    let mut worst_trunc = 0.0f64;
    for target in [DriveTarget::QdDrive, DriveTarget::CavityDrive] {
        let drive = DriveSpec::with_rabi(target, 1.0, 0.01).unwrap();
        let r = truncation_check(&p, &drive, &IncoherentChannels::default(), 3).unwrap();
        worst_trunc = worst_trunc.max(r.delta);
    }
    pass &= worst_trunc < 1e-8;
    notes.push(format!("N vs N+2 change {worst_trunc:.1e}"));

    // closed-system purity
    let p = SystemParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.3).unwrap();
    let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, 0.0, 0.5).unwrap();
    let l = Liouvillian::from_parts(build_hamiltonian(&p, &drive, 2).unwrap(), vec![]).unwrap();
    let traj = evolve(&l, &DensityMatrix::basis_state(6, 4), &[10.0, 25.0, 50.0], 0.002).unwrap();
    let purity_dev = traj.iter().map(|r| (r.purity() - 1.0).abs()).fold(0.0, f64::max);
    pass &= purity_dev < 1e-8;
    notes.push(format!("purity drift {purity_dev:.1e}"));

    outcome(pass, notes.join(", "))
}

// ---------------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let p = SystemParams::from_ghz(5.0, 20.0, 0.5, 0.5, 931.2, 931.9).unwrap();
    let drive = DriveSpec::with_rabi(DriveTarget::QdDrive, p.omega_d, p.rabi_for_saturation(2.0)).unwrap();
    let grid = frequency_window(931.9, 20.0, 201).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let scan =
                scan_laser(&p, &drive, &IncoherentChannels::default(), &grid, Observable::CavityEmission, 2).unwrap();
            dataset_to_csv(&synthesize_noisy(&scan, 0.03, 7).unwrap()).unwrap()
        })
    };
    let one = run(1);
    let again = run(1);
    let four = run(4);
    let many = run(13);
    let pass = one == again && one == four && one == many;
    outcome(pass, format!("{} bytes identical across reruns and 1/4/13 threads: {pass}", one.len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 10] = [
        (1, "polariton eigenvalues", criterion_1, Duration::from_secs(1)),
        (2, "dispersive convergence", criterion_2, Duration::from_secs(1)),
        (3, "saturation steady state", criterion_3, Duration::from_secs(10)),
        (4, "power-broadened scan width", criterion_4, Duration::from_secs(60)),
        (5, "cavity contribution to dot width", criterion_5, Duration::from_secs(60)),
        (6, "synthetic saturation round trip", criterion_6, Duration::from_secs(120)),
        (7, "noiseless Lorentzian widths", criterion_7, Duration::from_secs(1)),
        (8, "linear excess slope", criterion_8, Duration::from_secs(10)),
        (9, "structural invariants", criterion_9, Duration::from_secs(60)),
        (10, "determinism", criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.3} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
