//! Two atoms, each in its own leaky dispersive cavity prepared in a coherent
//! state.
//!
//! Both cavities share the same coupling, decay rate and coherent amplitude;
//! the engine is hard-wired to that symmetric configuration. Basis ordering
//! for two atoms is `|ee>, |eg>, |ge>, |gg>` and for one atom `|e>, |g>`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DensityMatrix};

/// Bare cavity-QED parameters, kept only for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub g: f64,
    pub delta: f64,
    pub omega: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    omega_eff: f64,
    gamma: f64,
    alpha: Complex64,
    raw: Option<RawParams>,
}

impl PhysicalParams {
    pub fn new(omega_eff: f64, gamma: f64, alpha: Complex64) -> Result<Self> {
        if !(omega_eff > 0.0) || !omega_eff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega_eff must be > 0, got {omega_eff}"
            )));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(Self {
            omega_eff,
            gamma,
            alpha,
            raw: None,
        })
    }

    /// Dimensionless parameters: `Ω = 1`, so times are `Ωt` and `gamma` is `γ/Ω`.
    pub fn scaled(gamma_over_omega: f64, alpha: Complex64) -> Result<Self> {
        Self::new(1.0, gamma_over_omega, alpha)
    }

    /// Derives `Ω = g²/Δ` with `Δ = ω0 - ω`.
    pub fn from_raw(g: f64, omega: f64, omega0: f64, gamma: f64, alpha: Complex64) -> Result<Self> {
        let delta = omega0 - omega;
        let raw = RawParams {
            g,
            delta,
            omega,
            omega0,
        };
        let mut p = Self::new(g * g / delta, gamma, alpha)?;
        p.raw = Some(raw);
        Ok(p)
    }

    /// Attaches raw parameters; `omega_eff` must equal `g²/delta` to 1e-12
    /// relative.
    pub fn with_raw(mut self, raw: RawParams) -> Result<Self> {
        let implied = raw.g * raw.g / raw.delta;
        if ((implied - self.omega_eff) / self.omega_eff).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "omega_eff {} inconsistent with g^2/delta = {implied}",
                self.omega_eff
            )));
        }
        self.raw = Some(raw);
        Ok(self)
    }

    pub fn omega_eff(&self) -> f64 {
        self.omega_eff
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn raw(&self) -> Option<&RawParams> {
        self.raw.as_ref()
    }

    pub fn gamma_over_omega(&self) -> f64 {
        self.gamma / self.omega_eff
    }
}

/// Single-atom initial state `[[ζa, ζc], [ζc*, ζb]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomInit {
    zeta_a: f64,
    zeta_b: f64,
    zeta_c: Complex64,
}

impl SingleAtomInit {
    pub fn new(zeta_a: f64, zeta_b: f64, zeta_c: Complex64) -> Result<Self> {
        if !(0.0..=1.0).contains(&zeta_a) || !(0.0..=1.0).contains(&zeta_b) {
            return Err(Error::InvalidParameter(
                "populations must lie in [0, 1]".into(),
            ));
        }
        if (zeta_a + zeta_b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "populations must sum to 1, got {}",
                zeta_a + zeta_b
            )));
        }
        if zeta_c.norm_sqr() > zeta_a * zeta_b + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "|zeta_c|^2 = {} exceeds zeta_a*zeta_b = {}",
                zeta_c.norm_sqr(),
                zeta_a * zeta_b
            )));
        }
        Ok(Self {
            zeta_a,
            zeta_b,
            zeta_c,
        })
    }

    pub fn zeta_a(&self) -> f64 {
        self.zeta_a
    }

    pub fn zeta_b(&self) -> f64 {
        self.zeta_b
    }

    pub fn zeta_c(&self) -> Complex64 {
        self.zeta_c
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(self.zeta_a, 0.0),
                self.zeta_c,
                self.zeta_c.conj(),
                Complex64::new(self.zeta_b, 0.0),
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Mixture with `(|eg> + |ge>)/√2`.
    Phi,
    /// Mixture with `(|ee> + |gg>)/√2`.
    Psi,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Phi => "phi",
            Family::Psi => "psi",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi" | "Φ" => Ok(Family::Phi),
            "psi" | "Ψ" => Ok(Family::Psi),
            other => Err(Error::InvalidParameter(format!(
                "unknown Werner family {other:?}"
            ))),
        }
    }
}

/// Werner state `p|Bell><Bell| + (1-p) I/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerSpec {
    p: f64,
    family: Family,
}

impl WernerSpec {
    pub fn new(p: f64, family: Family) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "purity p must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self { p, family })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn family(&self) -> Family {
        self.family
    }
}

/// Correlation triple of a Bell-diagonal state
/// `(I + d1 σx⊗σx + d2 σy⊗σy + d3 σz⊗σz) / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationVector {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CorrelationVector {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        let v = Self { d1, d2, d3 };
        let bad = [d1, d2, d3]
            .iter()
            .any(|d| !d.is_finite() || d.abs() > 1.0 + 1e-12)
            || v.bell_eigenvalues().iter().any(|&l| l < -1e-12);
        if bad {
            return Err(Error::UnphysicalCorrelations { d1, d2, d3 });
        }
        Ok(v)
    }

    /// The four spectrum entries `(1 - d1 - d2 - d3)/4`, `(1 - d1 + d2 + d3)/4`,
    /// `(1 + d1 - d2 + d3)/4`, `(1 + d1 + d2 - d3)/4`.
    pub fn bell_eigenvalues(&self) -> [f64; 4] {
        let Self { d1, d2, d3 } = *self;
        [
            (1.0 - d1 - d2 - d3) / 4.0,
            (1.0 - d1 + d2 + d3) / 4.0,
            (1.0 + d1 - d2 + d3) / 4.0,
            (1.0 + d1 + d2 - d3) / 4.0,
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.d1.abs().max(self.d2.abs()).max(self.d3.abs())
    }

    /// Index (0, 1, 2 for x, y, z) of the largest `|d_i|`; `None` on a tie.
    pub fn dominant_axis(&self, tie_tol: f64) -> Option<usize> {
        let abs = [self.d1.abs(), self.d2.abs(), self.d3.abs()];
        let (best, &top) = abs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        let tied = abs
            .iter()
            .enumerate()
            .any(|(i, &x)| i != best && (top - x) <= tie_tol);
        (!tied).then_some(best)
    }

    /// The Bell-diagonal density matrix with these correlations.
    pub fn density_matrix(&self) -> DensityMatrix {
        let Self { d1, d2, d3 } = *self;
        let mut m = ComplexMatrix::from_diag(&[
            (1.0 + d3) / 4.0,
            (1.0 - d3) / 4.0,
            (1.0 - d3) / 4.0,
            (1.0 + d3) / 4.0,
        ]);
        let inner = Complex64::new((d1 + d2) / 4.0, 0.0);
        let outer = Complex64::new((d1 - d2) / 4.0, 0.0);
        m[(1, 2)] = inner;
        m[(2, 1)] = inner;
        m[(0, 3)] = outer;
        m[(3, 0)] = outer;
        DensityMatrix::from_matrix_unchecked(m)
    }
}

/// The complex decoherence factor multiplying the atomic coherence `|e><g|`
/// at time `t` (product of the three exponentials).
pub fn decoherence_factor(params: &PhysicalParams, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be >= 0, got {t}"
        )));
    }
    Ok(decoherence_factor_unchecked(params, t))
}

#[inline]
pub(crate) fn decoherence_factor_unchecked(params: &PhysicalParams, t: f64) -> Complex64 {
    let i = Complex64::i();
    let omega = params.omega_eff;
    let gamma = params.gamma;
    let n_bar = params.alpha.norm_sqr();
    let damp = (-2.0 * gamma * t).exp();
    let kappa = Complex64::new(gamma, omega);

    let first = -i * omega * t + n_bar * (damp - 1.0);
    let second = n_bar * gamma / kappa * (1.0 - (-2.0 * kappa * t).exp());
    let third = n_bar * damp * ((-2.0 * i * omega * t).exp() - 1.0);
    (first + second + third).exp()
}

/// `|f(t)|²`.
pub fn magnitude_sq(params: &PhysicalParams, t: f64) -> Result<f64> {
    decoherence_factor(params, t).map(|f| f.norm_sqr())
}

/// `lim |f(t)|² = exp(-2|α|² Ω²/(Ω² + γ²))` as `t → ∞`. Undefined when the
/// cavities are lossless (the factor is then periodic).
pub fn asymptotic_magnitude_sq(params: &PhysicalParams) -> Result<f64> {
    if params.gamma <= 0.0 {
        return Err(Error::InvalidParameter(
            "long-time limit needs gamma > 0".into(),
        ));
    }
    let w2 = params.omega_eff * params.omega_eff;
    let g2 = params.gamma * params.gamma;
    Ok((-2.0 * params.alpha.norm_sqr() * w2 / (w2 + g2)).exp())
}

/// Reduced atomic state: populations fixed, coherence multiplied by `f(t)`.
pub fn single_atom_state(
    init: &SingleAtomInit,
    params: &PhysicalParams,
    t: f64,
) -> Result<DensityMatrix> {
    let f = decoherence_factor(params, t)?;
    let mut m = init.matrix();
    m[(0, 1)] = init.zeta_c * f;
    m[(1, 0)] = (init.zeta_c * f).conj();
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

pub fn werner_initial(spec: &WernerSpec) -> DensityMatrix {
    let p = spec.p;
    let lo = (1.0 - p) / 4.0;
    let hi = (1.0 + p) / 4.0;
    let coh = Complex64::new(p / 2.0, 0.0);
    let m = match spec.family {
        Family::Phi => {
            let mut m = ComplexMatrix::from_diag(&[lo, hi, hi, lo]);
            m[(1, 2)] = coh;
            m[(2, 1)] = coh;
            m
        }
        Family::Psi => {
            let mut m = ComplexMatrix::from_diag(&[hi, lo, lo, hi]);
            m[(0, 3)] = coh;
            m[(3, 0)] = coh;
            m
        }
    };
    DensityMatrix::from_matrix_unchecked(m)
}

/// Applies the local dephasing map `|e><g| ↦ f|e><g|` to both qubits.
pub fn dephase_both(rho: &DensityMatrix, f: Complex64) -> DensityMatrix {
    // factor picked up by the single-qubit element |a><b|, a, b ∈ {e=0, g=1}
    let local = |a: usize, b: usize| match (a, b) {
        (0, 1) => f,
        (1, 0) => f.conj(),
        _ => Complex64::new(1.0, 0.0),
    };
    let mut m = rho.matrix().clone();
    for row in 0..4 {
        for col in 0..4 {
            let w = local(row >> 1, col >> 1) * local(row & 1, col & 1);
            m[(row, col)] *= w;
        }
    }
    DensityMatrix::from_matrix_unchecked(m)
}

/// Two-atom state at time `t` starting from a Werner state.
pub fn two_atom_state(spec: &WernerSpec, params: &PhysicalParams, t: f64) -> Result<DensityMatrix> {
    let f = decoherence_factor(params, t)?;
    Ok(two_atom_state_for_factor(spec, f))
}

/// Two-atom state for a given value of the decoherence factor.
pub fn two_atom_state_for_factor(spec: &WernerSpec, f: Complex64) -> DensityMatrix {
    dephase_both(&werner_initial(spec), f)
}

/// Correlation triple of an X-form state with equal paired diagonals, after
/// removing the anti-diagonal phases by local z rotations.
pub fn correlation_vector(rho: &DensityMatrix) -> Result<CorrelationVector> {
    const TOL: f64 = 1e-9;
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    let off_x = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && i + j != 3)
        .map(|(i, j)| rho[(i, j)].norm())
        .fold(0.0, f64::max);
    if off_x > TOL {
        return Err(Error::NotBellDiagonal(format!(
            "entry outside the X pattern of size {off_x:.3e}"
        )));
    }
    let diag = rho.matrix().diagonal_real();
    if (diag[0] - diag[3]).abs() > TOL || (diag[1] - diag[2]).abs() > TOL {
        return Err(Error::NotBellDiagonal(format!(
            "unequal paired diagonals {diag:?}"
        )));
    }
    let outer = rho[(0, 3)].norm();
    let inner = rho[(1, 2)].norm();
    let d3 = diag[0] + diag[3] - diag[1] - diag[2];
    CorrelationVector::new(2.0 * (inner + outer), 2.0 * (inner - outer), d3)
}

/// Validity ratio `|Δ| / (√(n+1) g)` of the dispersive approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveReport {
    pub ratio: f64,
    pub warning: bool,
}

pub fn dispersive_validity(params: &PhysicalParams, n_relevant: u64) -> Result<DispersiveReport> {
    let raw = params.raw.ok_or(Error::MissingRawParams)?;
    let ratio = raw.delta.abs() / (((n_relevant + 1) as f64).sqrt() * raw.g.abs());
    Ok(DispersiveReport {
        ratio,
        warning: ratio < 10.0,
    })
}
