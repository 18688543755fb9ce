//! Independent check of the analytic decoherence factor: integrate the
//! atom–field master equation
//!
//! ```text
//! dρ/dt = -i[V, ρ] + γ(2aρa† - a†aρ - ρa†a),   V = Ω[(a†a + 1)|e><e| - a†a|g><g|]
//! ```
//!
//! in a truncated Fock space with fixed-step RK4, trace out the field and
//! compare the atomic coherence with `ζc f(t)`.
//!
//! Composite index is `atom * (n_max + 1) + n` with atom `e = 0`, `g = 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{kron, partial_trace_matrix, ComplexMatrix, DensityMatrix, Subsystem};
use crate::model::{decoherence_factor, PhysicalParams, SingleAtomInit};

/// Required coherent-state mass retained by the truncation.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Upper bound on `Ω dt (n_max + 1)`.
pub const MAX_PHASE_PER_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be positive".into()));
        }
        Ok(Self { n_max })
    }

    /// 16 for `|α| ≤ 1`, otherwise `ceil(|α|² + 8|α| + 8)`.
    pub fn default_for(alpha: Complex64) -> Self {
        let a = alpha.norm();
        let n_max = if a <= 1.0 {
            16
        } else {
            (a * a + 8.0 * a + 8.0).ceil() as usize
        };
        Self { n_max }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Poisson mass `e^{-|α|²} Σ_{n ≤ n_max} |α|^{2n}/n!` kept by the truncation.
    pub fn retained_mass(&self, alpha: Complex64) -> f64 {
        let mean = alpha.norm_sqr();
        let mut term = (-mean).exp();
        let mut mass = term;
        for n in 1..=self.n_max {
            term *= mean / n as f64;
            mass += term;
        }
        mass
    }

    pub fn check(&self, alpha: Complex64) -> Result<()> {
        let mass = self.retained_mass(alpha);
        if mass < 1.0 - TRUNCATION_TOL {
            return Err(Error::TruncationTooSmall {
                mass,
                tolerance: TRUNCATION_TOL,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Step in units of `1/Ω`.
    pub dt: f64,
    /// Keep every `record_every`-th step in [`evolve`] output.
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            record_every: 50,
        }
    }

    pub fn check(&self, fock: &FockSpace) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        let product = self.dt * (fock.n_max + 1) as f64;
        if product > MAX_PHASE_PER_STEP * (1.0 + 1e-12) {
            return Err(Error::StepTooCoarse {
                product,
                limit: MAX_PHASE_PER_STEP,
            });
        }
        Ok(())
    }
}

/// Truncated coherent state, renormalized to unit norm.
pub fn coherent_vector(alpha: Complex64, fock: &FockSpace) -> Result<Vec<Complex64>> {
    fock.check(alpha)?;
    let mut amps = Vec::with_capacity(fock.dim());
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..=fock.n_max {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(amps.into_iter().map(|z| z / norm).collect())
}

fn interaction_diagonal(params: &PhysicalParams, fock: &FockSpace) -> Vec<f64> {
    let omega = params.omega_eff();
    let excited = (0..fock.dim()).map(|n| omega * (n as f64 + 1.0));
    let ground = (0..fock.dim()).map(|n| -omega * n as f64);
    excited.chain(ground).collect()
}

/// Dispersive interaction `V` as a dense (diagonal) matrix.
pub fn build_interaction(params: &PhysicalParams, fock: &FockSpace) -> ComplexMatrix {
    ComplexMatrix::from_diag(&interaction_diagonal(params, fock))
}

/// Field annihilation operator lifted to the atom–field space, `I₂ ⊗ a`.
pub fn lifted_annihilation(fock: &FockSpace) -> ComplexMatrix {
    kron(
        &ComplexMatrix::identity(2),
        &ComplexMatrix::annihilation(fock.n_max),
    )
}

/// Right-hand side of the master equation, using the diagonal structure of
/// `V` and the single off-diagonal band of `a`.
struct Liouvillian {
    v: Vec<f64>,
    photons: Vec<f64>,
    sqrt_next: Vec<f64>,
    gamma: f64,
    block: usize,
}

impl Liouvillian {
    fn new(params: &PhysicalParams, fock: &FockSpace) -> Self {
        let block = fock.dim();
        let photons: Vec<f64> = (0..2 * block).map(|i| (i % block) as f64).collect();
        // sqrt(n + 1) when |n + 1> is retained, else 0
        let sqrt_next = (0..2 * block)
            .map(|i| {
                if i % block + 1 < block {
                    ((i % block) as f64 + 1.0).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            v: interaction_diagonal(params, fock),
            photons,
            sqrt_next,
            gamma: params.gamma(),
            block,
        }
    }

    fn dim(&self) -> usize {
        2 * self.block
    }

    fn apply_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let d = self.dim();
        let minus_i = Complex64::new(0.0, -1.0);
        for i in 0..d {
            for j in 0..d {
                let r = rho[(i, j)];
                let mut val = minus_i * (self.v[i] - self.v[j]) * r;
                if self.gamma != 0.0 {
                    let mut diss = -(self.photons[i] + self.photons[j]) * r;
                    let w = self.sqrt_next[i] * self.sqrt_next[j];
                    if w != 0.0 {
                        diss += 2.0 * w * rho[(i + 1, j + 1)];
                    }
                    val += self.gamma * diss;
                }
                out[(i, j)] = val;
            }
        }
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        self.apply_into(rho, &mut out);
        out
    }
}

/// `dρ/dt` for the atom–field master equation.
pub fn liouvillian_apply(
    rho: &DensityMatrix,
    params: &PhysicalParams,
    fock: &FockSpace,
) -> Result<ComplexMatrix> {
    let expected = 2 * fock.dim();
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected: format!("{expected}x{expected}"),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    Ok(Liouvillian::new(params, fock).apply(rho.matrix()))
}

/// `ρ_atom(0) ⊗ |α><α|`.
pub fn initial_state(
    init: &SingleAtomInit,
    params: &PhysicalParams,
    fock: &FockSpace,
) -> Result<DensityMatrix> {
    let field = coherent_vector(params.alpha(), fock)?;
    let field = ComplexMatrix::outer(&field, &field);
    Ok(DensityMatrix::from_matrix_unchecked(kron(
        &init.matrix(),
        &field,
    )))
}

/// Fixed-step RK4 propagator on the lattice `t_k = k h`.
struct Propagator {
    generator: Liouvillian,
    rho: ComplexMatrix,
    steps_taken: u64,
    h: f64,
    scratch: [ComplexMatrix; 3],
}

impl Propagator {
    fn new(rho: ComplexMatrix, generator: Liouvillian, h: f64) -> Self {
        let d = generator.dim();
        let scratch = [
            ComplexMatrix::zeros(d, d),
            ComplexMatrix::zeros(d, d),
            ComplexMatrix::zeros(d, d),
        ];
        Self {
            generator,
            rho,
            steps_taken: 0,
            h,
            scratch,
        }
    }

    fn time(&self) -> f64 {
        self.steps_taken as f64 * self.h
    }

    fn rk4(
        generator: &Liouvillian,
        rho: &mut ComplexMatrix,
        h: f64,
        scratch: &mut [ComplexMatrix; 3],
    ) {
        let [k, stage, acc] = scratch;
        let n = rho.as_slice().len();

        generator.apply_into(rho, k);
        for idx in 0..n {
            let kv = k.as_slice()[idx];
            acc.as_mut_slice()[idx] = kv;
            stage.as_mut_slice()[idx] = rho.as_slice()[idx] + kv * (0.5 * h);
        }
        generator.apply_into(stage, k);
        for idx in 0..n {
            let kv = k.as_slice()[idx];
            acc.as_mut_slice()[idx] += kv * 2.0;
            stage.as_mut_slice()[idx] = rho.as_slice()[idx] + kv * (0.5 * h);
        }
        generator.apply_into(stage, k);
        for idx in 0..n {
            let kv = k.as_slice()[idx];
            acc.as_mut_slice()[idx] += kv * 2.0;
            stage.as_mut_slice()[idx] = rho.as_slice()[idx] + kv * h;
        }
        generator.apply_into(stage, k);
        for idx in 0..n {
            let total = acc.as_slice()[idx] + k.as_slice()[idx];
            rho.as_mut_slice()[idx] += total * (h / 6.0);
        }
        *rho = rho.hermitian_part();
    }

    fn step(&mut self) {
        Self::rk4(&self.generator, &mut self.rho, self.h, &mut self.scratch);
        self.steps_taken += 1;
    }

    /// State at time `t ≥ current lattice time`, advancing the lattice and
    /// finishing with one partial step if `t` is off-lattice.
    fn state_at(&mut self, t: f64) -> ComplexMatrix {
        let eps = 1e-12 * t.max(1.0);
        while (self.steps_taken + 1) as f64 * self.h <= t + eps {
            self.step();
        }
        let remainder = t - self.time();
        if remainder > eps {
            let mut rho = self.rho.clone();
            Self::rk4(&self.generator, &mut rho, remainder, &mut self.scratch);
            rho
        } else {
            self.rho.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: DensityMatrix,
}

/// Integrates from `ρ_atom(0) ⊗ |α><α|` to `t_end`, returning the initial
/// state, every `record_every`-th step and the final state.
pub fn evolve(
    init: &SingleAtomInit,
    params: &PhysicalParams,
    fock: &FockSpace,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<Snapshot>> {
    cfg.check(fock)?;
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be >= 0, got {t_end}"
        )));
    }
    let start = initial_state(init, params, fock)?;
    let h = cfg.dt / params.omega_eff();
    let mut prop = Propagator::new(start.matrix().clone(), Liouvillian::new(params, fock), h);
    let mut out = vec![Snapshot {
        t: 0.0,
        state: start,
    }];
    let every = cfg.record_every.max(1) as u64;
    let eps = 1e-12 * t_end.max(1.0);
    while (prop.steps_taken + 1) as f64 * h <= t_end + eps {
        prop.step();
        if prop.steps_taken.is_multiple_of(every) {
            out.push(Snapshot {
                t: prop.time(),
                state: DensityMatrix::from_matrix_unchecked(prop.rho.clone()),
            });
        }
    }
    let last_t = out.last().map_or(0.0, |s| s.t);
    if t_end - last_t > eps {
        let rho = prop.state_at(t_end);
        out.push(Snapshot {
            t: t_end,
            state: DensityMatrix::from_matrix_unchecked(rho),
        });
    }
    Ok(out)
}

/// Atomic reduced state of an atom–field snapshot.
pub fn atomic_state(snapshot: &DensityMatrix, fock: &FockSpace) -> Result<DensityMatrix> {
    partial_trace_matrix(snapshot.matrix(), (2, fock.dim()), Subsystem::A)
        .map(DensityMatrix::from_matrix_unchecked)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    /// `max_t |ρ_eg(t) − ζc f(t)|`.
    pub max_deviation: f64,
    /// Largest change of the atomic populations from their initial values.
    pub max_population_drift: f64,
    pub max_trace_error: f64,
    pub samples: usize,
}

/// Integrates the master equation and compares the traced-out atomic
/// coherence with `ζc f(t)` at each time in `t_grid`.
pub fn verify_against_analytic(
    init: &SingleAtomInit,
    params: &PhysicalParams,
    fock: &FockSpace,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    if init.zeta_c().norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "verification needs a nonzero initial coherence".into(),
        ));
    }
    cfg.check(fock)?;
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "t_grid must be non-negative and ascending".into(),
        ));
    }
    let start = initial_state(init, params, fock)?;
    let h = cfg.dt / params.omega_eff();
    let mut prop = Propagator::new(start.into_matrix(), Liouvillian::new(params, fock), h);
    let block = fock.dim();

    let mut report = VerificationReport {
        max_deviation: 0.0,
        max_population_drift: 0.0,
        max_trace_error: 0.0,
        samples: 0,
    };
    for &t in t_grid {
        let rho = prop.state_at(t);
        let coherence: Complex64 = (0..block).map(|n| rho[(n, block + n)]).sum();
        let excited: f64 = (0..block).map(|n| rho[(n, n)].re).sum();
        let ground: f64 = (0..block).map(|n| rho[(block + n, block + n)].re).sum();
        let analytic = init.zeta_c() * decoherence_factor(params, t)?;

        report.max_deviation = report.max_deviation.max((coherence - analytic).norm());
        report.max_population_drift = report
            .max_population_drift
            .max((excited - init.zeta_a()).abs())
            .max((ground - init.zeta_b()).abs());
        report.max_trace_error = report.max_trace_error.max((rho.trace() - 1.0).norm());
        report.samples += 1;
    }
    Ok(report)
}

/// `n` evenly spaced times covering `[0, t_end]`.
pub fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(gamma: f64, alpha: f64) -> PhysicalParams {
        PhysicalParams::scaled(gamma, Complex64::new(alpha, 0.0)).unwrap()
    }

    fn half_coherent() -> SingleAtomInit {
        SingleAtomInit::new(0.5, 0.5, Complex64::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn vacuum_and_coherent_amplitudes() {
        let fock = FockSpace::new(16).unwrap();
        let vac = coherent_vector(Complex64::new(0.0, 0.0), &fock).unwrap();
        assert_abs_diff_eq!(vac[0].re, 1.0);
        assert!(vac[1..].iter().all(|z| z.norm() == 0.0));

        let amps = coherent_vector(Complex64::new(1.0, 0.0), &fock).unwrap();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-14);
        let mut fact = 1.0_f64;
        for (n, a) in amps.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            assert_abs_diff_eq!(a.re, (-0.5_f64).exp() / fact.sqrt(), epsilon = 1e-14);
        }
        assert!(1.0 - fock.retained_mass(Complex64::new(1.0, 0.0)) < 1e-13);
    }

    #[test]
    fn truncation_check_rejects_large_alpha() {
        let fock = FockSpace::new(16).unwrap();
        assert!(matches!(
            coherent_vector(Complex64::new(3.0, 0.0), &fock),
            Err(Error::TruncationTooSmall { .. })
        ));
        let auto = FockSpace::default_for(Complex64::new(3.0, 0.0));
        assert_eq!(auto.n_max, 41);
        assert!(auto.check(Complex64::new(3.0, 0.0)).is_ok());
    }

    #[test]
    fn interaction_entries() {
        let fock = FockSpace::new(16).unwrap();
        let v = build_interaction(
            &PhysicalParams::new(2.0, 0.0, Complex64::new(1.0, 0.0)).unwrap(),
            &fock,
        );
        assert_eq!(v.rows(), 34);
        assert_abs_diff_eq!(v[(0, 0)].re, 2.0);
        assert_abs_diff_eq!(v[(17, 17)].re, 0.0);
        assert_abs_diff_eq!(v[(22, 22)].re, -10.0);
    }

    #[test]
    fn ground_vacuum_is_stationary() {
        let fock = FockSpace::new(4).unwrap();
        let mut m = ComplexMatrix::zeros(10, 10);
        m[(5, 5)] = Complex64::new(1.0, 0.0);
        let rho = DensityMatrix::try_new(m).unwrap();
        let d = liouvillian_apply(&rho, &params(0.3, 1.0), &fock).unwrap();
        assert_eq!(d.frobenius_norm(), 0.0);
    }

    #[test]
    fn lossless_diagonal_state_is_stationary() {
        let fock = FockSpace::new(4).unwrap();
        let diag: Vec<f64> = (0..10).map(|i| (i + 1) as f64 / 55.0).collect();
        let rho = DensityMatrix::try_new(ComplexMatrix::from_diag(&diag)).unwrap();
        let d = liouvillian_apply(&rho, &params(0.0, 1.0), &fock).unwrap();
        assert_eq!(d.frobenius_norm(), 0.0);
    }

    #[test]
    fn structured_generator_matches_dense_operators() {
        let fock = FockSpace::new(12).unwrap();
        let p = PhysicalParams::new(1.3, 0.2, Complex64::new(0.7, 0.1)).unwrap();
        let rho = initial_state(
            &SingleAtomInit::new(0.3, 0.7, Complex64::new(0.2, -0.4)).unwrap(),
            &p,
            &fock,
        )
        .unwrap();

        let v = build_interaction(&p, &fock);
        let a = lifted_annihilation(&fock);
        let ad = a.adjoint();
        let num = ad.matmul(&a);
        let r = rho.matrix();
        let minus_i = Complex64::new(0.0, -1.0);
        let commutator = &v.matmul(r) - &r.matmul(&v);
        let diss = &(&a.matmul(r).matmul(&ad).scale_real(2.0) - &num.matmul(r)) - &r.matmul(&num);
        let dense = &commutator.scale(minus_i) + &diss.scale_real(p.gamma());

        let fast = liouvillian_apply(&rho, &p, &fock).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-14);
        assert!(fast.trace().norm() < 1e-14);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let fock = FockSpace::new(4).unwrap();
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(liouvillian_apply(&rho, &params(0.1, 1.0), &fock).is_err());
    }

    #[test]
    fn evolve_starts_from_product_state() {
        let fock = FockSpace::new(16).unwrap();
        let p = params(0.01, 0.5);
        let snaps = evolve(
            &half_coherent(),
            &p,
            &fock,
            0.0,
            &IntegratorConfig::new(0.002),
        )
        .unwrap();
        assert_eq!(snaps.len(), 1);
        assert!(
            snaps[0]
                .state
                .matrix()
                .max_abs_diff(initial_state(&half_coherent(), &p, &fock).unwrap().matrix())
                == 0.0
        );
    }

    #[test]
    fn lossless_diagonal_init_stays_diagonal() {
        let fock = FockSpace::new(16).unwrap();
        let init = SingleAtomInit::new(0.3, 0.7, Complex64::new(0.0, 0.0)).unwrap();
        let snaps = evolve(
            &init,
            &params(0.0, 1.0),
            &fock,
            2.0,
            &IntegratorConfig::new(0.002),
        )
        .unwrap();
        let last = &snaps.last().unwrap().state;
        let block = fock.dim();
        let cross: f64 = (0..block)
            .flat_map(|n| (0..block).map(move |m| (n, m)))
            .map(|(n, m)| last[(n, block + m)].norm())
            .fold(0.0, f64::max);
        assert_eq!(cross, 0.0);
    }

    #[test]
    fn trace_and_populations_conserved() {
        let fock = FockSpace::new(16).unwrap();
        let snaps = evolve(
            &half_coherent(),
            &params(0.1, 1.0),
            &fock,
            10.0,
            &IntegratorConfig::new(0.002),
        )
        .unwrap();
        assert_abs_diff_eq!(snaps.last().unwrap().t, 10.0, epsilon = 1e-9);
        for s in &snaps {
            assert!((s.state.matrix().trace() - 1.0).norm() < 1e-9);
            assert!(s.state.matrix().hermitian_deviation() < 1e-12);
            let atom = atomic_state(&s.state, &fock).unwrap();
            assert_abs_diff_eq!(atom[(0, 0)].re, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn step_size_invariant_enforced() {
        let fock = FockSpace::new(16).unwrap();
        let err = evolve(
            &half_coherent(),
            &params(0.01, 1.0),
            &fock,
            1.0,
            &IntegratorConfig::new(0.2),
        );
        assert!(matches!(err, Err(Error::StepTooCoarse { .. })));
        // 25 * 0.002 sits exactly on the bound
        assert!(IntegratorConfig::new(0.002)
            .check(&FockSpace::new(24).unwrap())
            .is_ok());
    }

    #[test]
    fn lossless_coherence_modulus() {
        let fock = FockSpace::new(16).unwrap();
        let p = params(0.0, 1.0);
        let times = uniform_times(5.0, 51);
        let r = verify_against_analytic(
            &half_coherent(),
            &p,
            &fock,
            &times,
            &IntegratorConfig::new(0.002),
        )
        .unwrap();
        assert!(r.max_deviation < 1e-6, "deviation {}", r.max_deviation);
        assert!(r.max_population_drift < 1e-9);
    }

    #[test]
    fn off_lattice_samples() {
        let fock = FockSpace::new(16).unwrap();
        let times = [0.0, 0.0031, 0.5, 1.23456];
        let r = verify_against_analytic(
            &half_coherent(),
            &params(0.05, 0.5),
            &fock,
            &times,
            &IntegratorConfig::new(0.002),
        )
        .unwrap();
        assert!(r.max_deviation < 1e-8);
        assert_eq!(r.samples, 4);
    }

    #[test]
    fn verification_needs_coherence() {
        let fock = FockSpace::new(16).unwrap();
        let init = SingleAtomInit::new(1.0, 0.0, Complex64::new(0.0, 0.0)).unwrap();
        assert!(verify_against_analytic(
            &init,
            &params(0.01, 1.0),
            &fock,
            &[1.0],
            &IntegratorConfig::new(0.002)
        )
        .is_err());
    }
}
