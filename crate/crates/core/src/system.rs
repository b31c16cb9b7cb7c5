//! The semi-discrete equation of motion M u'' + C u' + K u = f(t), its
//! first-order state-space form, and separable load models.
//!
//! The state vector stacks the scaled velocity over the displacement,
//! z = [dt * u'; u], so the constant operator reads
//! A = [[-dt M^-1 C, -dt^2 M^-1 K], [I, 0]]. M^-1 is always applied through
//! the cached mass Cholesky, never as an explicit inverse.

use crate::linalg::{self, Factorization, LinalgError, SquareMatrix, Symmetry};
use crate::pade::PolyCoeffs;
use faer::{Col, Mat};
use std::fmt;
use std::sync::Arc;

pub type TimeFunction = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum SystemError {
    Linalg(LinalgError),
    /// A declared load discontinuity falls strictly inside a step.
    StepCrossesDiscontinuity { at: f64, step_start: f64, step_end: f64 },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for SystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemError::Linalg(e) => write!(f, "{e}"),
            SystemError::StepCrossesDiscontinuity { at, step_start, step_end } => write!(
                f,
                "load discontinuity at t = {at} inside step ({step_start}, {step_end}); align step boundaries"
            ),
            SystemError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for SystemError {}

impl From<LinalgError> for SystemError {
    fn from(e: LinalgError) -> Self {
        SystemError::Linalg(e)
    }
}

/// One separable load contribution: a fixed spatial vector scaled by a
/// scalar function of time.
pub struct LoadTerm {
    spatial: Col<f64>,
    time_fn: TimeFunction,
}

/// Load model f(t) = sum_j b_j g_j(t). Instants where any g_j jumps must be
/// declared so the stepper can refuse steps that straddle them.
#[derive(Default)]
pub struct LoadModel {
    terms: Vec<LoadTerm>,
    discontinuities: Vec<f64>,
}

impl LoadModel {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with_term(mut self, spatial: Col<f64>, time_fn: TimeFunction) -> Self {
        self.terms.push(LoadTerm { spatial, time_fn });
        self
    }

    pub fn with_discontinuity(mut self, t: f64) -> Self {
        self.discontinuities.push(t);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn discontinuities(&self) -> &[f64] {
        &self.discontinuities
    }

    pub fn eval(&self, t: f64, n_dof: usize) -> Col<f64> {
        let mut f = Col::zeros(n_dof);
        for term in &self.terms {
            let g = (term.time_fn)(t);
            if g != 0.0 {
                for i in 0..n_dof {
                    f[i] += term.spatial[i] * g;
                }
            }
        }
        f
    }

    /// First declared discontinuity strictly inside the open interval.
    pub fn discontinuity_inside(&self, t_start: f64, t_end: f64) -> Option<f64> {
        self.discontinuities
            .iter()
            .copied()
            .filter(|&t| t > t_start && t < t_end)
            .min_by(f64::total_cmp)
    }
}

/// Kinematic state at one instant, in physical units.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: Col<f64>,
    pub v: Col<f64>,
}

impl State {
    pub fn new(t: f64, u: Col<f64>, v: Col<f64>) -> Self {
        assert_eq!(u.nrows(), v.nrows(), "u and v must have equal length");
        Self { t, u, v }
    }

    pub fn at_rest(n_dof: usize) -> Self {
        Self { t: 0.0, u: Col::zeros(n_dof), v: Col::zeros(n_dof) }
    }

    pub fn n_dof(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite()) && self.v.iter().all(|x| x.is_finite())
    }
}

/// Mass, damping, and stiffness matrices plus the load model, with the mass
/// Cholesky cached at construction. Immutable afterwards.
pub struct StructuralSystem {
    mass: SquareMatrix,
    damping: SquareMatrix,
    stiffness: SquareMatrix,
    load: LoadModel,
    mass_factor: Factorization,
    damping_is_zero: bool,
}

impl StructuralSystem {
    /// Builds the system; the mass matrix must be positive definite
    /// (verified by its Cholesky). Pass None for an undamped system.
    pub fn new(
        mass: SquareMatrix,
        damping: Option<SquareMatrix>,
        stiffness: SquareMatrix,
        load: LoadModel,
    ) -> Result<Self, SystemError> {
        let n = mass.dim();
        if stiffness.dim() != n {
            return Err(SystemError::DimensionMismatch { expected: n, got: stiffness.dim() });
        }
        let damping = match damping {
            Some(c) => {
                if c.dim() != n {
                    return Err(SystemError::DimensionMismatch { expected: n, got: c.dim() });
                }
                c
            }
            None => SquareMatrix::zeros(n, Symmetry::Symmetric),
        };
        let mass = match mass.symmetry() {
            Symmetry::PositiveDefinite => mass,
            _ => SquareMatrix::new(mass.as_ref().to_owned(), Symmetry::PositiveDefinite)?,
        };
        let mass_factor = linalg::factor(&mass)?;
        let damping_is_zero = damping.is_zero();
        Ok(Self { mass, damping, stiffness, load, mass_factor, damping_is_zero })
    }

    pub fn n_dof(&self) -> usize {
        self.mass.dim()
    }

    pub fn mass(&self) -> &SquareMatrix {
        &self.mass
    }

    pub fn damping(&self) -> &SquareMatrix {
        &self.damping
    }

    pub fn stiffness(&self) -> &SquareMatrix {
        &self.stiffness
    }

    pub fn load(&self) -> &LoadModel {
        &self.load
    }

    pub fn has_damping(&self) -> bool {
        !self.damping_is_zero
    }

    pub fn mass_factor(&self) -> &Factorization {
        &self.mass_factor
    }

    pub fn mass_solve(&self, b: &Col<f64>) -> Col<f64> {
        self.mass_factor.solve(b).expect("mass factorization is real and matches n_dof")
    }

    /// Applies the state-space operator: A z = [-dt M^-1 C z1 - dt^2 M^-1 K z2; z1].
    pub fn apply_state_operator(&self, dt: f64, z: &Col<f64>) -> Col<f64> {
        let n = self.n_dof();
        assert_eq!(z.nrows(), 2 * n, "state vector must have length 2 n_dof");
        let z1 = z.subrows(0, n).to_owned();
        let z2 = z.subrows(n, n).to_owned();

        let mut rhs = self.stiffness.as_ref() * &z2;
        for i in 0..n {
            rhs[i] *= -dt * dt;
        }
        if !self.damping_is_zero {
            let cv = self.damping.as_ref() * &z1;
            for i in 0..n {
                rhs[i] -= dt * cv[i];
            }
        }
        let top = self.mass_solve(&rhs);

        let mut out = Col::zeros(2 * n);
        for i in 0..n {
            out[i] = top[i];
            out[n + i] = z1[i];
        }
        out
    }

    /// Evaluates p(A) z by Horner's scheme: deg(p) operator applications.
    pub fn poly_apply(&self, p: &PolyCoeffs, dt: f64, z: &Col<f64>) -> Col<f64> {
        let coeffs = p.coeffs();
        let deg = p.degree();
        let mut acc = z * faer::Scale(coeffs[deg]);
        for k in (0..deg).rev() {
            acc = self.apply_state_operator(dt, &acc);
            if coeffs[k] != 0.0 {
                for i in 0..z.nrows() {
                    acc[i] += coeffs[k] * z[i];
                }
            }
        }
        acc
    }

    /// Polynomial coefficients of the load over one step, in powers of
    /// (s - 1/2) with s the dimensionless step time: f(t(s)) is sampled at
    /// the p_f + 1 Chebyshev points of [0, 1] and fitted exactly.
    pub fn force_coeffs(
        &self,
        t_start: f64,
        dt: f64,
        force_order: usize,
    ) -> Result<Vec<Col<f64>>, SystemError> {
        let n = self.n_dof();
        if let Some(at) = self.load.discontinuity_inside(t_start, t_start + dt) {
            return Err(SystemError::StepCrossesDiscontinuity {
                at,
                step_start: t_start,
                step_end: t_start + dt,
            });
        }
        let n_pts = force_order + 1;
        let nodes: Vec<f64> = (0..n_pts)
            .map(|j| {
                0.5 + 0.5 * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n_pts) as f64).cos()
            })
            .collect();

        // samples: row j holds f(t(s_j))
        let samples: Vec<Col<f64>> = nodes
            .iter()
            .map(|&s| self.load.eval(t_start + s * dt, n))
            .collect();

        if n_pts == 1 {
            return Ok(samples);
        }

        // Vandermonde in powers of (s - 1/2); Chebyshev nodes keep it
        // well conditioned for the small orders used here
        let vand = Mat::from_fn(n_pts, n_pts, |j, k| (nodes[j] - 0.5).powi(k as i32));
        let factor = linalg::factor(&SquareMatrix::new(vand, Symmetry::General)?)?;

        let mut coeffs = vec![Col::<f64>::zeros(n); n_pts];
        let mut rhs = Col::<f64>::zeros(n_pts);
        for dof in 0..n {
            for j in 0..n_pts {
                rhs[j] = samples[j][dof];
            }
            let c = factor.solve(&rhs)?;
            for k in 0..n_pts {
                coeffs[k][dof] = c[k];
            }
        }
        Ok(coeffs)
    }

    /// Acceleration from the equation of motion: M a = f(t) - C v - K u.
    pub fn acceleration(&self, t: f64, u: &Col<f64>, v: &Col<f64>) -> Col<f64> {
        let n = self.n_dof();
        let mut rhs = self.load.eval(t, n);
        let ku = self.stiffness.as_ref() * u;
        for i in 0..n {
            rhs[i] -= ku[i];
        }
        if !self.damping_is_zero {
            let cv = self.damping.as_ref() * v;
            for i in 0..n {
                rhs[i] -= cv[i];
            }
        }
        self.mass_solve(&rhs)
    }
}

/// Single-degree-of-freedom helper used across tests and the convergence
/// study: m u'' + c u' + k u = f(t).
pub fn sdof_system(
    m: f64,
    c: f64,
    k: f64,
    load: LoadModel,
) -> Result<StructuralSystem, SystemError> {
    let mass = SquareMatrix::new(Mat::from_fn(1, 1, |_, _| m), Symmetry::PositiveDefinite)?;
    let stiffness = SquareMatrix::new(Mat::from_fn(1, 1, |_, _| k), Symmetry::Symmetric)?;
    let damping = if c == 0.0 {
        None
    } else {
        Some(SquareMatrix::new(Mat::from_fn(1, 1, |_, _| c), Symmetry::Symmetric)?)
    };
    StructuralSystem::new(mass, damping, stiffness, load)
}
