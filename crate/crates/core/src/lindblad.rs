//! Rotating-frame master equation for the driven, lossy dot-cavity system.
//!
//! ```text
//! dρ/dt = −i[H, ρ] + 2κ 𝓛[a] + 2γ 𝓛[σ] + 2γ_d 𝓛[σ†σ] + γ_t 𝓛[a†σ] + γ_r 𝓛[σ†a]
//! 𝓛[c] = cρc† − ½c†cρ − ½ρc†c
//! ```
//!
//! The dephasing term carries rate `2γ_d`, so that the dipole coherence decays
//! at `γ + γ_d` and the zero-power dot linewidth is `2(γ + γ_d)`.
//!
//! Superoperators act on column-stacked density matrices, using
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{DMatrix, DVector};

use crate::hilbert::{DensityMatrix, OperatorMatrix, QdCavitySpace};
use crate::model::{DriveSpec, DriveTarget, IncoherentChannels, SystemParams};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Rotating-frame Hamiltonian (units of ħ, frame of the laser):
///
/// `Δ_d σ†σ + Δ_c a†a + g(σ†a + σa†) + (Ω/2)(x + x†)` with `x = σ` for a dot
/// drive and `x = a` for a cavity drive; `Δ_d = ω_d − ω_l`, `Δ_c = ω_c − ω_l`.
pub fn build_hamiltonian(params: &SystemParams, drive: &DriveSpec, fock_cutoff: usize) -> Result<OperatorMatrix> {
    params.validate()?;
    drive.validate()?;
    let space = QdCavitySpace::new(fock_cutoff)?;
    let detuning_qd = params.omega_d - drive.omega_l;
    let detuning_cav = params.omega_c - drive.omega_l;
    let omega = drive.rabi_frequency(params);

    let sd = space.sigma.adjoint();
    let ad = space.a.adjoint();
    let mut h = space.qd_population().scale_real(detuning_qd);
    h = &h + &space.photon_number().scale_real(detuning_cav);
    if params.g != 0.0 {
        h = &h + &(&(&sd * &space.a) + &(&space.sigma * &ad)).scale_real(params.g);
    }
    if omega != 0.0 {
        let x = match drive.target {
            DriveTarget::QdDrive => &space.sigma + &sd,
            DriveTarget::CavityDrive => &space.a + &ad,
        };
        h = &h + &x.scale_real(0.5 * omega);
    }
    Ok(h)
}

/// One dissipative channel `rate · 𝓛[op]`.
#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub label: &'static str,
    pub rate: f64,
    pub op: OperatorMatrix,
}

/// Dense superoperator together with the ingredients it was built from.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    hilbert_dim: usize,
    matrix: DMatrix<C64>,
    hamiltonian: OperatorMatrix,
    collapse: Vec<CollapseOp>,
}

impl Liouvillian {
    /// Assembles `−i[H, ·] + Σ rate·𝓛[op]`.
    pub fn from_parts(hamiltonian: OperatorMatrix, collapse: Vec<CollapseOp>) -> Result<Self> {
        let d = hamiltonian.dim();
        if let Some(bad) = collapse.iter().find(|c| c.op.dim() != d) {
            return Err(Error::Structural(format!(
                "collapse operator '{}' has dimension {}, Hamiltonian has {}",
                bad.label,
                bad.op.dim(),
                d
            )));
        }
        if let Some(bad) = collapse.iter().find(|c| !(c.rate >= 0.0)) {
            return Err(Error::domain(format!("rate of '{}' must be >= 0", bad.label)));
        }
        let id = DMatrix::<C64>::identity(d, d);
        let h = hamiltonian.matrix();
        let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I);
        for c in collapse.iter().filter(|c| c.rate != 0.0) {
            let op = c.op.matrix();
            let cdc = op.adjoint() * op;
            let half = C64::new(0.5, 0.0);
            let term = op.conjugate().kronecker(op) - id.kronecker(&cdc) * half - cdc.transpose().kronecker(&id) * half;
            l += term * C64::new(c.rate, 0.0);
        }
        Ok(Self { hilbert_dim: d, matrix: l, hamiltonian, collapse })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Dimension of the superoperator, `D²`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[CollapseOp] {
        &self.collapse
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Induced 1-norm (maximum absolute column sum); bounds the spectral radius.
    pub fn norm_one(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `L[ρ]` for an arbitrary square matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.hilbert_dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Structural(format!(
                "matrix is {}x{}, Liouvillian acts on {d}x{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        Ok(DMatrix::from_column_slice(d, d, out.as_slice()))
    }
}

/// Adds the dissipators of the dot-cavity model to a Hamiltonian on the
/// product space.
pub fn build_liouvillian(h: &OperatorMatrix, params: &SystemParams, channels: &IncoherentChannels) -> Result<Liouvillian> {
    params.validate()?;
    channels.validate()?;
    let space = QdCavitySpace::for_dim(h.dim())?;
    let sd = space.sigma.adjoint();
    let ad = space.a.adjoint();
    let collapse = vec![
        CollapseOp { label: "cavity decay", rate: 2.0 * params.kappa, op: space.a.clone() },
        CollapseOp { label: "spontaneous emission", rate: 2.0 * params.gamma, op: space.sigma.clone() },
        CollapseOp { label: "pure dephasing", rate: 2.0 * params.gamma_d, op: space.qd_population() },
        CollapseOp { label: "dot to cavity transfer", rate: channels.transfer_qd_to_cavity, op: &ad * &space.sigma },
        CollapseOp { label: "cavity to dot transfer", rate: channels.transfer_cavity_to_qd, op: &sd * &space.a },
    ];
    Liouvillian::from_parts(h.clone(), collapse)
}

/// Expectation values reported with every steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// ⟨a†a⟩
    pub photon_number: f64,
    /// ⟨σ†σ⟩
    pub qd_population: f64,
    /// ⟨a⟩
    pub cavity_field: C64,
    /// ⟨σ⟩
    pub qd_coherence: C64,
}

impl Observables {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        let space = QdCavitySpace::for_dim(rho.dim())?;
        Ok(Self {
            photon_number: rho.expect(&space.photon_number()).re,
            qd_population: rho.expect(&space.qd_population()).re,
            cavity_field: rho.expect(&space.a),
            qd_coherence: rho.expect(&space.sigma),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖L vec(ρ)‖ (Frobenius).
    pub residual: f64,
    pub observables: Observables,
}

/// Relative pivot below which the trace-constrained system is treated as
/// singular.
const PIVOT_RATIO_TOL: f64 = 1e-12;
/// Residual tolerance relative to ‖L‖.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Solves `L vec(ρ) = 0` with `Tr ρ = 1` by replacing the equation for the
/// (0,0) element with the trace constraint.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let d = l.hilbert_dim;
    let n = d * d;
    let mut m = l.matrix.clone();
    for k in 0..n {
        m[(0, k)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        m[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);

    let lu = m.lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
    let max_pivot = diag.iter().cloned().fold(0.0, f64::max);
    let min_pivot = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let pivot_ratio = if max_pivot > 0.0 { min_pivot / max_pivot } else { 0.0 };
    if pivot_ratio < PIVOT_RATIO_TOL {
        return Err(Error::NonUniqueSteadyState { pivot_ratio });
    }
    let v = lu.solve(&rhs).ok_or(Error::NonUniqueSteadyState { pivot_ratio })?;

    let raw = DMatrix::from_column_slice(d, d, v.as_slice());
    let mut rho = hermitize(&raw);
    let tr = rho.trace();
    rho /= tr;

    let vec_rho = DVector::from_column_slice(rho.as_slice());
    let residual = (&l.matrix * vec_rho).norm();
    let tolerance = STEADY_RESIDUAL_TOL * l.norm();
    if residual > tolerance {
        return Err(Error::SteadyStateResidual { residual, tolerance });
    }
    let rho = DensityMatrix::new(rho)?;
    let observables = Observables::of(&rho)?;
    Ok(SteadyState { rho, residual, observables })
}

/// Builds the model Liouvillian for `params`/`drive` and solves it.
pub fn solve_steady_state(
    params: &SystemParams,
    drive: &DriveSpec,
    channels: &IncoherentChannels,
    fock_cutoff: usize,
) -> Result<SteadyState> {
    let h = build_hamiltonian(params, drive, fock_cutoff)?;
    let l = build_liouvillian(&h, params, channels)?;
    steady_state(&l)
}

/// Trace drift above which integration is abandoned.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Fixed-step RK4 integration of `dρ/dt = L[ρ]`, sampled at `sample_times`
/// (ascending, starting from t = 0).
///
/// The step never exceeds `min(dt_max, 0.1/‖L‖₁)`. Each sample is
/// trace-renormalised after the drift check.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, sample_times: &[f64], dt_max: f64) -> Result<Vec<DensityMatrix>> {
    let d = l.hilbert_dim;
    if rho0.dim() != d {
        return Err(Error::Structural(format!("initial state has dimension {}, expected {d}", rho0.dim())));
    }
    if !(dt_max > 0.0) {
        return Err(Error::domain("dt_max must be > 0"));
    }
    if sample_times.is_empty() || sample_times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::domain("sample times must be finite and >= 0"));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sample times must be ascending"));
    }
    if !(sample_times[sample_times.len() - 1] > 0.0) {
        return Err(Error::domain("final time must be > 0"));
    }
    let norm = l.norm_one();
    let h_max = if norm > 0.0 { dt_max.min(0.1 / norm) } else { dt_max };

    let lm = &l.matrix;
    let mut v = DVector::from_column_slice(rho0.matrix().as_slice());
    let mut t = 0.0;
    let mut out = Vec::with_capacity(sample_times.len());
    for &ts in sample_times {
        let span = ts - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let half = C64::new(0.5 * h, 0.0);
            let full = C64::new(h, 0.0);
            let sixth = C64::new(h / 6.0, 0.0);
            for _ in 0..steps {
                let k1 = lm * &v;
                let k2 = lm * (&v + &k1 * half);
                let k3 = lm * (&v + &k2 * half);
                let k4 = lm * (&v + &k3 * full);
                v += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * sixth;
            }
            let rho = DMatrix::from_column_slice(d, d, v.as_slice());
            let tr = rho.trace();
            let drift = (tr - C64::new(1.0, 0.0)).norm();
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::Integration { drift, dt: h });
            }
            let rho = hermitize(&rho) / tr;
            v = DVector::from_column_slice(rho.as_slice());
            t = ts;
        }
        out.push(DensityMatrix::new_unchecked(DMatrix::from_column_slice(d, d, v.as_slice())));
    }
    Ok(out)
}

/// Outcome of comparing steady states at cutoffs N and N+2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub converged: bool,
    /// Larger of the relative changes in ⟨a†a⟩ and ⟨σ†σ⟩.
    pub delta: f64,
}

pub const TRUNCATION_TOL: f64 = 1e-8;

/// Changes smaller than this in absolute terms count as no change; keeps a
/// vacuum photon number from producing a 0/0 relative change.
const TRUNCATION_ABS_FLOOR: f64 = 1e-14;

fn relative_change(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if diff <= TRUNCATION_ABS_FLOOR {
        0.0
    } else {
        diff / b.abs().max(a.abs())
    }
}

pub fn truncation_check(
    params: &SystemParams,
    drive: &DriveSpec,
    channels: &IncoherentChannels,
    fock_cutoff: usize,
) -> Result<TruncationReport> {
    if fock_cutoff < 2 {
        return Err(Error::domain("truncation check needs N >= 2"));
    }
    let lo = solve_steady_state(params, drive, channels, fock_cutoff)?.observables;
    let hi = solve_steady_state(params, drive, channels, fock_cutoff + 2)?.observables;
    let delta = relative_change(lo.photon_number, hi.photon_number)
        .max(relative_change(lo.qd_population, hi.qd_population));
    Ok(TruncationReport { converged: delta < TRUNCATION_TOL, delta })
}
