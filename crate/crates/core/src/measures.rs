//! Mutual information, measurement-conditioned entropy, classical correlation,
//! quantum discord and concurrence for two-qubit states.
//!
//! Qubit `A` is the first tensor factor, `B` the second. Measurements are
//! rank-one projective measurements on `B`, parameterized by a Bloch
//! direction. All entropies are in bits.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    eigenvalues_2x2, entropy_of_spectrum, hermitian_eigenvalues, kron, partial_trace,
    ComplexMatrix, DensityMatrix, HermitianEigen, Subsystem, PSD_TOL,
};
use crate::model::CorrelationVector;

/// Outcomes with probability at or below this are dropped from the
/// conditional entropy.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-12;

/// Projective measurement along `n = (sinθ cosφ, sinθ sinφ, cosθ)` with
/// projectors `B± = (I ± n·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub theta: f64,
    pub phi: f64,
}

impl Measurement {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Measurement along a unit (or any nonzero) Cartesian direction.
    pub fn along(direction: [f64; 3]) -> Self {
        let [x, y, z] = direction;
        let r = (x * x + y * y + z * z).sqrt();
        Self {
            theta: (z / r).clamp(-1.0, 1.0).acos(),
            phi: y.atan2(x),
        }
        .canonical()
    }

    /// Same measurement with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn canonical(self) -> Self {
        let mut theta = self.theta.rem_euclid(TAU);
        let mut phi = self.phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `[B+, B-]` as 2x2 matrices in the `(|e>, |g>)` basis.
    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        let [x, y, z] = self.direction();
        let half = |s: f64| {
            ComplexMatrix::from_vec(
                2,
                2,
                vec![
                    Complex64::new(0.5 * (1.0 + s * z), 0.0),
                    Complex64::new(0.5 * s * x, -0.5 * s * y),
                    Complex64::new(0.5 * s * x, 0.5 * s * y),
                    Complex64::new(0.5 * (1.0 - s * z), 0.0),
                ],
            )
        };
        [half(1.0), half(-1.0)]
    }

    /// Angle in degrees between the measurement axis and `axis`, ignoring
    /// orientation (antipodal directions define the same measurement).
    pub fn axis_angle_deg(&self, axis: [f64; 3]) -> f64 {
        let n = self.direction();
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let cos = (n[0] * axis[0] + n[1] * axis[1] + n[2] * axis[2]).abs() / norm;
        cos.clamp(0.0, 1.0).acos().to_degrees()
    }
}

#[derive(Debug, Clone)]
pub struct MeasuredOutcome {
    pub probability: f64,
    /// `None` flags an outcome whose probability is negligible.
    pub state: Option<DensityMatrix>,
}

/// Outcome probabilities and normalized post-measurement states.
#[derive(Debug, Clone)]
pub struct MeasuredDecomposition {
    pub outcomes: [MeasuredOutcome; 2],
}

impl MeasuredDecomposition {
    pub fn probabilities(&self) -> [f64; 2] {
        [self.outcomes[0].probability, self.outcomes[1].probability]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub mutual_info: f64,
    pub classical_corr: f64,
    pub discord: f64,
    pub argmin_measurement: Measurement,
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    Ok(())
}

pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let s_a = partial_trace(rho, (2, 2), Subsystem::A)?.entropy()?;
    let s_b = partial_trace(rho, (2, 2), Subsystem::B)?.entropy()?;
    Ok(s_a + s_b - rho.entropy()?)
}

/// Post-measurement decomposition `(I⊗B_i) ρ (I⊗B_i) / p_i`.
pub fn measure_b(rho: &DensityMatrix, m: &Measurement) -> Result<MeasuredDecomposition> {
    require_two_qubits(rho)?;
    let i2 = ComplexMatrix::identity(2);
    let outcome = |proj: &ComplexMatrix| {
        let lifted = kron(&i2, proj);
        let unnormalized = lifted.matmul(rho.matrix()).matmul(&lifted);
        let probability = unnormalized.trace().re;
        let state = (probability > NEGLIGIBLE_PROBABILITY).then(|| {
            DensityMatrix::from_matrix_unchecked(
                unnormalized.scale_real(1.0 / probability).hermitian_part(),
            )
        });
        MeasuredOutcome {
            probability: probability.max(0.0),
            state,
        }
    };
    let [plus, minus] = m.projectors();
    Ok(MeasuredDecomposition {
        outcomes: [outcome(&plus), outcome(&minus)],
    })
}

/// `Σ p_i S(ρ_i)` for the measurement `m` on `B`.
pub fn conditional_entropy(rho: &DensityMatrix, m: &Measurement) -> Result<f64> {
    require_two_qubits(rho)?;
    Ok(ConditionalEntropy::new(rho).eval(m))
}

/// Fast evaluator of the measured conditional entropy.
///
/// Each post-measurement state is `σ_i ⊗ |b_i><b_i|` with `σ_i` the
/// conditional state of `A`, so its entropy is that of the 2x2 `σ_i`.
#[derive(Clone)]
struct ConditionalEntropy {
    rho: [[Complex64; 4]; 4],
}

impl ConditionalEntropy {
    fn new(rho: &DensityMatrix) -> Self {
        let mut r = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = rho[(i, j)];
            }
        }
        Self { rho: r }
    }

    fn eval_theta_phi(&self, theta: f64, phi: f64) -> f64 {
        self.eval(&Measurement::new(theta, phi))
    }

    fn eval(&self, m: &Measurement) -> f64 {
        let [x, y, z] = m.direction();
        let mut total = 0.0;
        for s in [1.0, -1.0] {
            // projector entries P[b'][b]
            let proj = [
                [
                    Complex64::new(0.5 * (1.0 + s * z), 0.0),
                    Complex64::new(0.5 * s * x, -0.5 * s * y),
                ],
                [
                    Complex64::new(0.5 * s * x, 0.5 * s * y),
                    Complex64::new(0.5 * (1.0 - s * z), 0.0),
                ],
            ];
            let mut sigma = [[Complex64::new(0.0, 0.0); 2]; 2];
            for (a, row) in sigma.iter_mut().enumerate() {
                for (a2, cell) in row.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (b2, proj_row) in proj.iter().enumerate() {
                        for (b, &w) in proj_row.iter().enumerate() {
                            acc += self.rho[2 * a + b][2 * a2 + b2] * w;
                        }
                    }
                    *cell = acc;
                }
            }
            let prob = sigma[0][0].re + sigma[1][1].re;
            if prob <= NEGLIGIBLE_PROBABILITY {
                continue;
            }
            let [l0, l1] = eigenvalues_2x2(
                sigma[0][0].re / prob,
                sigma[1][1].re / prob,
                sigma[0][1] / prob,
            );
            total += prob * binary_spectrum_entropy(l0, l1);
        }
        total
    }
}

#[inline]
fn binary_spectrum_entropy(l0: f64, l1: f64) -> f64 {
    let h = |l: f64| if l > 0.0 { -l * l.log2() } else { 0.0 };
    h(l0) + h(l1)
}

/// Search budget for the minimization over measurement directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerConfig {
    /// Grid points in `θ ∈ [0, π/2]`, endpoints included.
    pub grid_theta: usize,
    /// Grid points in `φ ∈ [0, 2π)`.
    pub grid_phi: usize,
    /// Number of best grid points refined by pattern search.
    pub starts: usize,
    pub iterations: usize,
    pub shrink: f64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            grid_theta: 64,
            grid_phi: 128,
            starts: 3,
            iterations: 60,
            shrink: 0.5,
        }
    }
}

impl MinimizerConfig {
    /// Plain grid search with no refinement.
    pub fn grid_only(grid_theta: usize, grid_phi: usize) -> Self {
        Self {
            grid_theta,
            grid_phi,
            starts: 0,
            iterations: 0,
            shrink: 0.5,
        }
    }
}

/// Minimum of the measured conditional entropy and the measurement attaining
/// it.
pub fn minimize_conditional_entropy(
    rho: &DensityMatrix,
    cfg: &MinimizerConfig,
) -> Result<(f64, Measurement)> {
    require_two_qubits(rho)?;
    if cfg.grid_theta < 2 || cfg.grid_phi < 1 {
        return Err(Error::InvalidParameter(
            "minimizer grid needs >= 2 theta and >= 1 phi points".into(),
        ));
    }
    let objective = ConditionalEntropy::new(rho);
    let d_theta = 0.5 * PI / (cfg.grid_theta - 1) as f64;
    let d_phi = TAU / cfg.grid_phi as f64;

    // θ-major scan; keeping the first of equal values breaks ties by
    // smallest θ, then φ.
    let mut grid: Vec<(f64, usize, usize)> = Vec::with_capacity(cfg.grid_theta * cfg.grid_phi);
    for i in 0..cfg.grid_theta {
        let theta = i as f64 * d_theta;
        // all φ collapse at the pole
        let phi_points = if i == 0 { 1 } else { cfg.grid_phi };
        for j in 0..phi_points {
            grid.push((objective.eval_theta_phi(theta, j as f64 * d_phi), i, j));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let (mut best_value, bi, bj) = grid[0];
    let mut best = (bi as f64 * d_theta, bj as f64 * d_phi);

    for &(value, i, j) in grid.iter().take(cfg.starts) {
        let (theta, phi, refined) = pattern_search(
            &objective,
            (i as f64 * d_theta, j as f64 * d_phi),
            value,
            (d_theta, d_phi),
            cfg,
        );
        if refined < best_value {
            best_value = refined;
            best = (theta, phi);
        }
    }
    Ok((best_value, Measurement::new(best.0, best.1).canonical()))
}

fn pattern_search(
    objective: &ConditionalEntropy,
    start: (f64, f64),
    start_value: f64,
    steps: (f64, f64),
    cfg: &MinimizerConfig,
) -> (f64, f64, f64) {
    let (mut theta, mut phi) = start;
    let mut value = start_value;
    let (mut h_theta, mut h_phi) = steps;
    for _ in 0..cfg.iterations {
        let candidates = [
            (theta + h_theta, phi),
            (theta - h_theta, phi),
            (theta, phi + h_phi),
            (theta, phi - h_phi),
        ];
        let mut improved = None;
        for (t, p) in candidates {
            let v = objective.eval_theta_phi(t, p);
            if v < improved.map_or(value, |(_, _, best)| best) {
                improved = Some((t, p, v));
            }
        }
        match improved {
            Some((t, p, v)) => {
                theta = t;
                phi = p;
                value = v;
            }
            None => {
                h_theta *= cfg.shrink;
                h_phi *= cfg.shrink;
            }
        }
    }
    (theta, phi, value)
}

/// `J = S(ρ_A) − min S(ρ|{B_i})` with the default search budget.
pub fn classical_correlation(rho: &DensityMatrix) -> Result<(f64, Measurement)> {
    classical_correlation_with(rho, &MinimizerConfig::default())
}

pub fn classical_correlation_with(
    rho: &DensityMatrix,
    cfg: &MinimizerConfig,
) -> Result<(f64, Measurement)> {
    require_two_qubits(rho)?;
    let s_a = partial_trace(rho, (2, 2), Subsystem::A)?.entropy()?;
    let (min_cond, argmin) = minimize_conditional_entropy(rho, cfg)?;
    Ok((s_a - min_cond, argmin))
}

/// Discord `I − J` with `J` found by numerical minimization.
pub fn discord_numeric(rho: &DensityMatrix) -> Result<CorrelationReport> {
    discord_numeric_with(rho, &MinimizerConfig::default())
}

pub fn discord_numeric_with(
    rho: &DensityMatrix,
    cfg: &MinimizerConfig,
) -> Result<CorrelationReport> {
    let mutual_info = mutual_information(rho)?;
    let (classical_corr, argmin_measurement) = classical_correlation_with(rho, cfg)?;
    Ok(CorrelationReport {
        mutual_info,
        classical_corr,
        discord: mutual_info - classical_corr,
        argmin_measurement,
    })
}

#[inline]
fn x_log2_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Mutual information of a Bell-diagonal state: `¼ Σ u log2 u` over
/// `u = 4λ` for the four Bell-basis weights λ.
pub fn bell_mutual_information(d: &CorrelationVector) -> f64 {
    0.25 * d
        .bell_eigenvalues()
        .iter()
        .map(|&l| x_log2_x((4.0 * l).max(0.0)))
        .sum::<f64>()
}

/// Classical correlation of a Bell-diagonal state, attained by measuring
/// along the axis of the largest `|d_i|`.
pub fn bell_classical_correlation(d: &CorrelationVector) -> f64 {
    let c = d.max_abs().min(1.0);
    0.5 * x_log2_x(1.0 - c) + 0.5 * x_log2_x(1.0 + c)
}

/// Closed-form `(I, J, D)` for a Bell-diagonal state.
pub fn bell_diagonal_correlations(d: &CorrelationVector) -> Result<(f64, f64, f64)> {
    if d.bell_eigenvalues().iter().any(|&l| l < -1e-12) {
        return Err(Error::UnphysicalCorrelations {
            d1: d.d1,
            d2: d.d2,
            d3: d.d3,
        });
    }
    let i = bell_mutual_information(d);
    let j = bell_classical_correlation(d);
    let mut discord = i - j;
    if discord < 0.0 && discord > -1e-12 {
        discord = 0.0;
    }
    Ok((i, j, discord))
}

/// Closed-form discord of a Bell-diagonal state.
pub fn discord_bell_diagonal(d: &CorrelationVector) -> Result<f64> {
    bell_diagonal_correlations(d).map(|(_, _, discord)| discord)
}

/// Wootters concurrence from the spectrum of `√ρ ρ̃ √ρ`, which shares the
/// spectrum of `ρ ρ̃` but is Hermitian.
pub fn concurrence_general(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = kron(&ComplexMatrix::pauli_y(), &ComplexMatrix::pauli_y());
    let flipped = yy.matmul(&rho.matrix().conj()).matmul(&yy);
    let sqrt_rho = HermitianEigen::new(rho.matrix())?.map_spectrum(|l| l.max(0.0).sqrt());
    let m = sqrt_rho.matmul(&flipped).matmul(&sqrt_rho).hermitian_part();
    let mut chi: Vec<f64> = hermitian_eigenvalues(&m)?
        .into_iter()
        .map(|mu| if mu < 0.0 && mu > -PSD_TOL { 0.0 } else { mu })
        .map(|mu| mu.max(0.0).sqrt())
        .collect();
    chi.sort_by(|a, b| b.total_cmp(a));
    Ok((chi[0] - chi[1] - chi[2] - chi[3]).max(0.0))
}

/// Largest entry outside the diagonal and anti-diagonal.
pub fn off_x_magnitude(rho: &DensityMatrix) -> f64 {
    (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && i + j != 3)
        .map(|(i, j)| rho[(i, j)].norm())
        .fold(0.0, f64::max)
}

/// Concurrence of an X state:
/// `2 max{0, |ρ23| − √(ρ11 ρ44), |ρ14| − √(ρ22 ρ33)}`.
pub fn concurrence_xstate(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let max_entry = off_x_magnitude(rho);
    if max_entry > 1e-9 {
        return Err(Error::NotXState { max_entry });
    }
    let d = rho.matrix().diagonal_real();
    let a = rho[(1, 2)].norm() - (d[0] * d[3]).max(0.0).sqrt();
    let b = rho[(0, 3)].norm() - (d[1] * d[2]).max(0.0).sqrt();
    Ok(2.0 * a.max(b).max(0.0))
}

/// Concurrence of the cavity model, `max{0, p|f|² − (1−p)/2}`.
pub fn concurrence_model(p: f64, f_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [0, 1], got {p}"
        )));
    }
    if !(f_sq > 0.0 && f_sq <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "|f|^2 must lie in (0, 1], got {f_sq}"
        )));
    }
    Ok((p * f_sq - (1.0 - p) / 2.0).max(0.0))
}

/// Entropy of a measured post-state; negligible outcomes contribute zero.
pub fn outcome_entropy(outcome: &MeasuredOutcome) -> Result<f64> {
    match &outcome.state {
        Some(s) => entropy_of_spectrum(&s.eigenvalues()),
        None => Ok(0.0),
    }
}
