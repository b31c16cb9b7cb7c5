//! The high-order time stepper. One step of the scheme solves
//! Q(A) z_n = P(A) z_{n-1} + sum_k C_k(A) F_k by factoring the denominator
//! into roots and sweeping one Newmark-sized linear solve per root:
//! (r^2 M + r dt C + dt^2 K) x1 = r M g1 - dt^2 K g2, with conjugate pairs
//! handled jointly in complex arithmetic so the state stays real.
//!
//! All factorizations happen once, at planning time; the run itself is
//! back-substitutions only. An HHT-alpha integrator with the standard
//! second-order parameter choice serves as the reference method.

use crate::linalg::{self, Factorization, LinalgError, SquareMatrix, Symmetry};
use crate::pade::{MixedPadeScheme, PadeError, MAX_DENOMINATOR_ORDER};
use crate::system::{State, StructuralSystem, SystemError};
use faer::{Col, Mat};
use num_complex::Complex64;
use std::fmt;

#[derive(Debug)]
pub enum StepperError {
    Pade(PadeError),
    System(SystemError),
    Linalg(LinalgError),
    /// Shifted coefficient matrix could not be factored; names the root.
    SingularShift { root: Complex64, source: LinalgError },
    /// A pair solve was requested at a root with (near-)zero imaginary part.
    DegeneratePair { root: Complex64 },
    /// Root too close to zero for the back-substitutions that divide by it.
    RootNearZero { root: Complex64 },
    /// The state stopped being finite.
    Divergence { step: usize },
    InvalidConfig(String),
}

impl fmt::Display for StepperError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepperError::Pade(e) => write!(f, "{e}"),
            StepperError::System(e) => write!(f, "{e}"),
            StepperError::Linalg(e) => write!(f, "{e}"),
            StepperError::SingularShift { root, source } => {
                write!(f, "shifted system at root {root} is singular: {source}")
            }
            StepperError::DegeneratePair { root } => {
                write!(f, "conjugate-pair solve at root {root} with vanishing imaginary part")
            }
            StepperError::RootNearZero { root } => {
                write!(f, "denominator root {root} too close to zero")
            }
            StepperError::Divergence { step } => {
                write!(f, "non-finite state at step {step}; integration diverged")
            }
            StepperError::InvalidConfig(msg) => write!(f, "invalid stepper config: {msg}"),
        }
    }
}

impl std::error::Error for StepperError {}

impl From<PadeError> for StepperError {
    fn from(e: PadeError) -> Self {
        StepperError::Pade(e)
    }
}

impl From<SystemError> for StepperError {
    fn from(e: SystemError) -> Self {
        StepperError::System(e)
    }
}

impl From<LinalgError> for StepperError {
    fn from(e: LinalgError) -> Self {
        StepperError::Linalg(e)
    }
}

/// Run parameters. The force-expansion order defaults to min(2M - 2, 4),
/// which keeps every load-polynomial division exact and the force
/// truncation below the scheme order.
#[derive(Debug, Clone)]
pub struct StepperConfig {
    /// Denominator order M of the expansion; the scheme order is 2M at
    /// rho_inf = 1 and 2M - 1 otherwise.
    pub order: usize,
    /// Spectral radius in the high-frequency limit, in [0, 1].
    pub rho_inf: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Force expansion order override; None picks the default.
    pub force_order: Option<usize>,
}

impl StepperConfig {
    pub fn new(order: usize, rho_inf: f64, dt: f64, n_steps: usize) -> Self {
        Self { order, rho_inf, dt, n_steps, force_order: None }
    }

    pub fn default_force_order(order: usize) -> usize {
        (2 * order).saturating_sub(2).min(4)
    }

    pub fn effective_force_order(&self) -> usize {
        self.force_order.unwrap_or_else(|| Self::default_force_order(self.order))
    }

    fn validate(&self) -> Result<(), StepperError> {
        if self.order < 1 || self.order > MAX_DENOMINATOR_ORDER {
            return Err(StepperError::InvalidConfig(format!(
                "order {} outside [1, {MAX_DENOMINATOR_ORDER}]",
                self.order
            )));
        }
        if !(0.0..=1.0).contains(&self.rho_inf) || self.rho_inf.is_nan() {
            return Err(StepperError::InvalidConfig(format!(
                "rho_inf {} outside [0, 1]",
                self.rho_inf
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(StepperError::InvalidConfig(format!("dt {} must be positive", self.dt)));
        }
        if self.effective_force_order() > Self::default_force_order(self.order) {
            return Err(StepperError::InvalidConfig(format!(
                "force order {} exceeds cap {} for order {}",
                self.effective_force_order(),
                Self::default_force_order(self.order),
                self.order
            )));
        }
        Ok(())
    }

    /// Step count covering the duration, rounded to the nearest integer.
    pub fn steps_for_duration(duration: f64, dt: f64) -> usize {
        ((duration / dt).round() as usize).max(1)
    }
}

/// One factored shifted system, either for a real root or for a conjugate
/// pair (stored through its Im > 0 member).
pub struct ShiftSolver {
    root: Complex64,
    factor: Factorization,
}

impl ShiftSolver {
    /// Assembles and factors S(r) = r^2 M + r dt C + dt^2 K.
    pub fn new(sys: &StructuralSystem, root: Complex64, dt: f64) -> Result<Self, StepperError> {
        // both back-substitution paths divide by the root
        if root.norm() < 1e-8 {
            return Err(StepperError::RootNearZero { root });
        }
        let n = sys.n_dof();
        let m = sys.mass().as_ref();
        let k = sys.stiffness().as_ref();
        let c = sys.damping().as_ref();
        let damped = sys.has_damping();

        let factor = if root.im == 0.0 {
            let r = root.re;
            let mut s = Mat::<f64>::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    let mut v = r * r * m[(i, j)] + dt * dt * k[(i, j)];
                    if damped {
                        v += r * dt * c[(i, j)];
                    }
                    s[(i, j)] = v;
                }
            }
            SquareMatrix::new(s, Symmetry::General)
                .and_then(|sm| linalg::factor(&sm))
        } else {
            let r2 = root * root;
            let mut s = Mat::<Complex64>::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    let mut v = r2 * m[(i, j)] + Complex64::new(dt * dt * k[(i, j)], 0.0);
                    if damped {
                        v += root * (dt * c[(i, j)]);
                    }
                    s[(i, j)] = v;
                }
            }
            linalg::factor_complex_owned(s)
        }
        .map_err(|source| StepperError::SingularShift { root, source })?;

        Ok(Self { root, factor })
    }

    pub fn root(&self) -> Complex64 {
        self.root
    }

    pub fn is_real(&self) -> bool {
        self.root.im == 0.0
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factor
    }

    /// Sub-vector products shared by both solve variants: (M g1, K g2).
    fn partitioned_products(sys: &StructuralSystem, g: &Col<f64>) -> (Col<f64>, Col<f64>) {
        let n = sys.n_dof();
        let g1 = g.subrows(0, n).to_owned();
        let g2 = g.subrows(n, n).to_owned();
        let mg1 = sys.mass().as_ref() * &g1;
        let kg2 = sys.stiffness().as_ref() * &g2;
        (mg1, kg2)
    }

    /// Solves (r I - A) x = g for a real root.
    pub fn solve_real(
        &self,
        sys: &StructuralSystem,
        dt: f64,
        g: &Col<f64>,
    ) -> Result<Col<f64>, StepperError> {
        let n = sys.n_dof();
        let r = self.root.re;
        let (mg1, kg2) = Self::partitioned_products(sys, g);
        let rhs = Col::from_fn(n, |i| r * mg1[i] - dt * dt * kg2[i]);
        let x1 = self.factor.solve(&rhs)?;
        let mut x = Col::zeros(2 * n);
        for i in 0..n {
            x[i] = x1[i];
            x[n + i] = (x1[i] + g[n + i]) / r;
        }
        Ok(x)
    }

    /// Solves (r I - A)(conj(r) I - A) x = g for a conjugate pair with one
    /// complex solve; the result is real by construction.
    pub fn solve_pair(
        &self,
        sys: &StructuralSystem,
        dt: f64,
        g: &Col<f64>,
    ) -> Result<Col<f64>, StepperError> {
        let r = self.root;
        if r.im.abs() < 1e-10 * r.norm() {
            return Err(StepperError::DegeneratePair { root: r });
        }
        let n = sys.n_dof();
        let (mg1, kg2) = Self::partitioned_products(sys, g);
        let rhs = Col::from_fn(n, |i| r * mg1[i] - dt * dt * kg2[i]);
        let y1 = self.factor.solve_complex(&rhs)?;
        let mut x = Col::zeros(2 * n);
        for i in 0..n {
            let y2 = (y1[i] + g[n + i]) / r;
            x[i] = -y1[i].im / r.im;
            x[n + i] = -y2.im / r.im;
        }
        Ok(x)
    }

    fn apply(&self, sys: &StructuralSystem, dt: f64, g: &Col<f64>) -> Result<Col<f64>, StepperError> {
        if self.is_real() {
            self.solve_real(sys, dt, g)
        } else {
            self.solve_pair(sys, dt, g)
        }
    }
}

/// Everything a run needs, bound to one system and one step size: the
/// expansion, one factorization per distinct root, and the mass
/// factorization (held by the system). Rebuilding the plan is the only way
/// to change dt.
pub struct StepperPlan {
    scheme: MixedPadeScheme,
    dt: f64,
    force_order: usize,
    solvers: Vec<ShiftSolver>,
    n_dof: usize,
}

impl StepperPlan {
    pub fn new(sys: &StructuralSystem, cfg: &StepperConfig) -> Result<Self, StepperError> {
        cfg.validate()?;
        let force_order = cfg.effective_force_order();
        let scheme = MixedPadeScheme::new(cfg.order, cfg.rho_inf, force_order)?;

        // conjugate pairs are adjacent with the Im > 0 member first, real
        // roots trail; one factorization per pair, one per real root
        let mut solvers = Vec::new();
        let roots = scheme.roots();
        let mut i = 0;
        while i < roots.len() {
            solvers.push(ShiftSolver::new(sys, roots[i], cfg.dt)?);
            i += if roots[i].im != 0.0 { 2 } else { 1 };
        }

        Ok(Self { scheme, dt: cfg.dt, force_order, solvers, n_dof: sys.n_dof() })
    }

    pub fn scheme(&self) -> &MixedPadeScheme {
        &self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn solvers(&self) -> &[ShiftSolver] {
        &self.solvers
    }

    /// (complex-pair factorizations, real factorizations)
    pub fn factor_counts(&self) -> (usize, usize) {
        let complex = self.solvers.iter().filter(|s| !s.is_real()).count();
        (complex, self.solvers.len() - complex)
    }

    /// Assembles b = P(A) z_prev + sum_k C_k(A) [dt^2 M^-1 f_k; 0] for the
    /// step starting at t_prev.
    pub fn build_rhs(
        &self,
        sys: &StructuralSystem,
        z_prev: &Col<f64>,
        t_prev: f64,
    ) -> Result<Col<f64>, StepperError> {
        let n = self.n_dof;
        let mut b = sys.poly_apply(self.scheme.numerator(), self.dt, z_prev);
        if !sys.load().is_zero() {
            let force = sys.force_coeffs(t_prev, self.dt, self.force_order)?;
            for (k, f_k) in force.iter().enumerate() {
                let minv_f = sys.mass_solve(f_k);
                let mut phi = Col::zeros(2 * n);
                for i in 0..n {
                    phi[i] = self.dt * self.dt * minv_f[i];
                }
                let term = sys.poly_apply(&self.scheme.load_polys()[k], self.dt, &phi);
                for i in 0..2 * n {
                    b[i] += term[i];
                }
            }
        }
        Ok(b)
    }

    /// Advances one step: builds the right-hand side and sweeps the
    /// successive solves, pairs first, then real roots.
    pub fn advance(&self, sys: &StructuralSystem, state: &State) -> Result<State, StepperError> {
        let n = self.n_dof;
        let mut z = Col::zeros(2 * n);
        for i in 0..n {
            z[i] = self.dt * state.v[i];
            z[n + i] = state.u[i];
        }
        let mut g = self.build_rhs(sys, &z, state.t)?;
        for solver in &self.solvers {
            g = solver.apply(sys, self.dt, &g)?;
        }
        let u = Col::from_fn(n, |i| g[n + i]);
        let v = Col::from_fn(n, |i| g[i] / self.dt);
        Ok(State::new(state.t + self.dt, u, v))
    }
}

/// State snapshot per step, with the acceleration recovered from the
/// equation of motion so M a = f - C v - K u holds at every record.
#[derive(Debug, Clone)]
pub struct HistoryRecord {
    pub t: f64,
    pub u: Col<f64>,
    pub v: Col<f64>,
    pub a: Col<f64>,
}

/// Runs the scheme for cfg.n_steps fixed steps from the given initial
/// conditions, emitting one record per step.
pub fn integrate(
    sys: &StructuralSystem,
    cfg: &StepperConfig,
    u0: &Col<f64>,
    v0: &Col<f64>,
) -> Result<Vec<HistoryRecord>, StepperError> {
    let plan = StepperPlan::new(sys, cfg)?;
    integrate_with_plan(&plan, sys, cfg.n_steps, u0, v0)
}

/// Integration against an existing plan (factorizations reused).
pub fn integrate_with_plan(
    plan: &StepperPlan,
    sys: &StructuralSystem,
    n_steps: usize,
    u0: &Col<f64>,
    v0: &Col<f64>,
) -> Result<Vec<HistoryRecord>, StepperError> {
    let mut state = State::new(0.0, u0.clone(), v0.clone());
    let mut records = Vec::with_capacity(n_steps);
    for step in 1..=n_steps {
        state = plan.advance(sys, &state)?;
        // pin the clock to an exact multiple so load evaluation does not
        // drift with accumulated addition error
        state.t = step as f64 * plan.dt();
        if !state.is_finite() {
            return Err(StepperError::Divergence { step });
        }
        let a = sys.acceleration(state.t, &state.u, &state.v);
        records.push(HistoryRecord { t: state.t, u: state.u.clone(), v: state.v.clone(), a });
    }
    Ok(records)
}

/// HHT-alpha reference integrator with beta = (1 - alpha)^2 / 4 and
/// gamma = 1/2 - alpha (second-order accurate); alpha = 0 degenerates to
/// the trapezoidal Newmark method. The load is evaluated at
/// t_n + (1 + alpha) dt.
pub fn hht_integrate(
    sys: &StructuralSystem,
    alpha: f64,
    dt: f64,
    n_steps: usize,
    u0: &Col<f64>,
    v0: &Col<f64>,
) -> Result<Vec<HistoryRecord>, StepperError> {
    if !(-1.0 / 3.0..=0.0).contains(&alpha) {
        return Err(StepperError::InvalidConfig(format!("alpha {alpha} outside [-1/3, 0]")));
    }
    if !(dt > 0.0) {
        return Err(StepperError::InvalidConfig(format!("dt {dt} must be positive")));
    }
    let n = sys.n_dof();
    let beta = (1.0 - alpha) * (1.0 - alpha) / 4.0;
    let gamma = 0.5 - alpha;

    // effective matrix M + (1+a) g dt C + (1+a) b dt^2 K, factored once
    let m = sys.mass().as_ref();
    let c = sys.damping().as_ref();
    let k = sys.stiffness().as_ref();
    let mut eff = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut v = m[(i, j)] + (1.0 + alpha) * beta * dt * dt * k[(i, j)];
            if sys.has_damping() {
                v += (1.0 + alpha) * gamma * dt * c[(i, j)];
            }
            eff[(i, j)] = v;
        }
    }
    let eff = linalg::factor(&SquareMatrix::new(eff, Symmetry::General)?)?;

    let mut u = u0.clone();
    let mut v = v0.clone();
    let mut a = sys.acceleration(0.0, &u, &v);
    let mut records = Vec::with_capacity(n_steps);

    for step in 1..=n_steps {
        let t_prev = (step - 1) as f64 * dt;
        let t_next = step as f64 * dt;
        let t_force = t_prev + (1.0 + alpha) * dt;

        let u_pred = Col::from_fn(n, |i| u[i] + dt * v[i] + dt * dt * (0.5 - beta) * a[i]);
        let v_pred = Col::from_fn(n, |i| v[i] + dt * (1.0 - gamma) * a[i]);

        let mut rhs = sys.load().eval(t_force, n);
        let k_upred = sys.stiffness().as_ref() * &u_pred;
        let k_u = sys.stiffness().as_ref() * &u;
        for i in 0..n {
            rhs[i] += alpha * k_u[i] - (1.0 + alpha) * k_upred[i];
        }
        if sys.has_damping() {
            let c_vpred = sys.damping().as_ref() * &v_pred;
            let c_v = sys.damping().as_ref() * &v;
            for i in 0..n {
                rhs[i] += alpha * c_v[i] - (1.0 + alpha) * c_vpred[i];
            }
        }
        let a_next = eff.solve(&rhs)?;

        for i in 0..n {
            u[i] = u_pred[i] + dt * dt * beta * a_next[i];
            v[i] = v_pred[i] + dt * gamma * a_next[i];
        }
        a = a_next;

        if !(u.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
            return Err(StepperError::Divergence { step });
        }
        // records carry the plain-equilibrium acceleration, not the
        // alpha-weighted internal one
        let a_rec = sys.acceleration(t_next, &u, &v);
        records.push(HistoryRecord { t: t_next, u: u.clone(), v: v.clone(), a: a_rec });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generalized_eig;
    use crate::system::{sdof_system, LoadModel};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn col(values: &[f64]) -> Col<f64> {
        Col::from_fn(values.len(), |i| values[i])
    }

    fn sdof(k: f64) -> StructuralSystem {
        sdof_system(1.0, 0.0, k, LoadModel::zero()).unwrap()
    }

    fn random_system(n: usize, rng: &mut ChaCha8Rng) -> StructuralSystem {
        let rand_spd = |rng: &mut ChaCha8Rng| {
            let a = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let mut s = &a * a.transpose();
            for i in 0..n {
                s[(i, i)] += n as f64;
            }
            s
        };
        let mass = SquareMatrix::new(rand_spd(rng), Symmetry::PositiveDefinite).unwrap();
        let stiffness = SquareMatrix::new(rand_spd(rng), Symmetry::Symmetric).unwrap();
        StructuralSystem::new(mass, None, stiffness, LoadModel::zero()).unwrap()
    }

    fn dense_state_operator(sys: &StructuralSystem, dt: f64) -> Mat<f64> {
        let n = sys.n_dof();
        let minv_k = {
            let mut cols = Mat::zeros(n, n);
            for j in 0..n {
                let kj = Col::from_fn(n, |i| sys.stiffness().as_ref()[(i, j)]);
                let x = sys.mass_solve(&kj);
                for i in 0..n {
                    cols[(i, j)] = x[i];
                }
            }
            cols
        };
        Mat::from_fn(2 * n, 2 * n, |i, j| {
            if i < n && j < n {
                0.0
            } else if i < n {
                -dt * dt * minv_k[(i, j - n)]
            } else if j < n {
                if i - n == j { 1.0 } else { 0.0 }
            } else {
                0.0
            }
        })
    }

    #[test]
    fn plan_factorization_counts() {
        let sys = sdof(1.0);
        let plan = StepperPlan::new(&sys, &StepperConfig::new(1, 1.0, 0.1, 1)).unwrap();
        assert_eq!(plan.factor_counts(), (0, 1));
        assert!((plan.solvers()[0].root() - Complex64::new(2.0, 0.0)).norm() < 1e-12);

        let plan = StepperPlan::new(&sys, &StepperConfig::new(2, 0.8, 0.1, 1)).unwrap();
        assert_eq!(plan.factor_counts(), (1, 0));
        let r = plan.solvers()[0].root();
        assert!((r - Complex64::new(2.8, (4.0f64 * 10.8 - 5.6 * 5.6).sqrt() / 2.0)).norm() < 1e-10);

        for rho in [0.0, 0.5, 1.0] {
            let plan = StepperPlan::new(&sys, &StepperConfig::new(3, rho, 0.1, 1)).unwrap();
            assert_eq!(plan.factor_counts(), (1, 1), "rho={rho}");
        }
        // one complex solve per conjugate pair plus one real solve when M is odd
        for m in 1..=MAX_DENOMINATOR_ORDER {
            let plan = StepperPlan::new(&sys, &StepperConfig::new(m, 0.8, 0.1, 1)).unwrap();
            let (complex, real) = plan.factor_counts();
            assert_eq!(complex, m / 2, "M={m}");
            assert_eq!(real, m % 2, "M={m}");
        }
    }

    #[test]
    fn solve_real_root_scalar_algebra() {
        // k = 0: S(r) = r^2 m, so g = [1; 0] maps to [1/r; 1/r^2]
        let sys = sdof(0.0);
        let r = 1.7;
        let solver = ShiftSolver::new(&sys, Complex64::new(r, 0.0), 1.0).unwrap();
        let x = solver.solve_real(&sys, 1.0, &col(&[1.0, 0.0])).unwrap();
        assert!((x[0] - 1.0 / r).abs() < 1e-13);
        assert!((x[1] - 1.0 / (r * r)).abs() < 1e-13);

        let x = solver.solve_real(&sys, 1.0, &Col::zeros(2)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solve_real_root_matches_dense_resolvent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sys = random_system(4, &mut rng);
        let dt = 0.3;
        let r = 2.2;
        let solver = ShiftSolver::new(&sys, Complex64::new(r, 0.0), dt).unwrap();
        let g = Col::from_fn(8, |i| (i as f64 + 0.1).sin());
        let x = solver.solve_real(&sys, dt, &g).unwrap();

        let a = dense_state_operator(&sys, dt);
        let shifted = Mat::<f64>::identity(8, 8) * faer::Scale(r) - &a;
        let resid = &g - &shifted * &x;
        assert!(resid.norm_l2() <= 1e-9 * g.norm_l2(), "rel {}", resid.norm_l2() / g.norm_l2());
    }

    #[test]
    fn solve_pair_zero_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sys = random_system(4, &mut rng);
        let dt = 0.25;
        let r = Complex64::new(2.8, 1.7);
        let solver = ShiftSolver::new(&sys, r, dt).unwrap();

        let x = solver.solve_pair(&sys, dt, &Col::zeros(8)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));

        let g = Col::from_fn(8, |i| (1.1 * i as f64).cos());
        let x = solver.solve_pair(&sys, dt, &g).unwrap();

        // (rI - A)(conj r I - A) = |r|^2 I - 2 Re(r) A + A^2 is real
        let a = dense_state_operator(&sys, dt);
        let prod = Mat::<f64>::identity(8, 8) * faer::Scale(r.norm_sqr())
            - &a * faer::Scale(2.0 * r.re)
            + &a * &a;
        let resid = &g - &prod * &x;
        assert!(resid.norm_l2() <= 1e-8 * g.norm_l2(), "rel {}", resid.norm_l2() / g.norm_l2());
    }

    #[test]
    fn solve_pair_sdof_dense_oracle() {
        // root chosen away from the operator spectrum (A has eigenvalues
        // +-i for this system at dt = 1)
        let sys = sdof(1.0);
        let r = Complex64::new(1.0, 1.0);
        let solver = ShiftSolver::new(&sys, r, 1.0).unwrap();
        let g = col(&[0.7, -0.3]);
        let x = solver.solve_pair(&sys, 1.0, &g).unwrap();

        // dense oracle: |r|^2 I - 2 Re(r) A + A^2 with A = [[0,-1],[1,0]]
        // is [[1, 2], [-2, 1]] for r = 1 + i; solve 2x2 by Cramer
        let m = [[1.0, 2.0], [-2.0, 1.0]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let want0 = (m[1][1] * g[0] - m[0][1] * g[1]) / det;
        let want1 = (-m[1][0] * g[0] + m[0][0] * g[1]) / det;
        assert!((x[0] - want0).abs() < 1e-12);
        assert!((x[1] - want1).abs() < 1e-12);
    }

    #[test]
    fn advance_zero_state_stays_zero() {
        let sys = sdof(1.0);
        let plan = StepperPlan::new(&sys, &StepperConfig::new(3, 0.5, 0.2, 1)).unwrap();
        let next = plan.advance(&sys, &State::at_rest(1)).unwrap();
        assert!(next.u[0] == 0.0 && next.v[0] == 0.0);
    }

    /// Modal projection of a state onto mode j of an undamped system:
    /// w = (phi^T M u) / 2 - i (phi^T M v) / (2 omega).
    fn modal_coordinate(
        phi: &Col<f64>,
        omega: f64,
        sys: &StructuralSystem,
        u: &Col<f64>,
        v: &Col<f64>,
    ) -> Complex64 {
        let mu = sys.mass().as_ref() * u;
        let mv = sys.mass().as_ref() * v;
        let q: f64 = (0..phi.nrows()).map(|i| phi[i] * mu[i]).sum();
        let qdot: f64 = (0..phi.nrows()).map(|i| phi[i] * mv[i]).sum();
        Complex64::new(q / 2.0, -qdot / (2.0 * omega))
    }

    #[test]
    fn free_vibration_follows_the_amplification_factor() {
        // after N steps each modal coordinate must equal R(i omega dt)^N w0
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 6;
        let sys = random_system(n, &mut rng);
        let (omega_sq, phi) = generalized_eig(sys.stiffness(), sys.mass()).unwrap();
        let omega_max = omega_sq.last().unwrap().sqrt();
        let dt = 0.05 * 2.0 * std::f64::consts::PI / omega_max;

        let u0 = Col::from_fn(n, |i| (i as f64 * 0.9).sin() + 0.3);
        let v0 = Col::from_fn(n, |i| (i as f64 * 1.7).cos());
        let n_steps = 20;

        for (order, rho) in [(1, 1.0), (2, 0.8), (3, 0.0), (4, 0.5)] {
            let cfg = StepperConfig::new(order, rho, dt, n_steps);
            let history = integrate(&sys, &cfg, &u0, &v0).unwrap();
            let last = history.last().unwrap();
            let scheme = MixedPadeScheme::new(order, rho, 0).unwrap();

            for j in 0..n {
                let omega = omega_sq[j].sqrt();
                let phi_j = Col::from_fn(n, |i| phi[(i, j)]);
                let w0 = modal_coordinate(&phi_j, omega, &sys, &u0, &v0);
                let w_n = modal_coordinate(&phi_j, omega, &sys, &last.u, &last.v);
                let x = omega * dt / (2.0 * std::f64::consts::PI);
                let want = scheme.amplification_factor(x).unwrap().powi(n_steps as i32) * w0;
                let err = (w_n - want).norm() / want.norm();
                assert!(err <= 1e-8, "order={order} rho={rho} mode {j}: rel err {err:e}");
            }
        }
    }

    #[test]
    fn non_dissipative_run_conserves_modal_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 4;
        let sys = random_system(n, &mut rng);
        let (omega_sq, phi) = generalized_eig(sys.stiffness(), sys.mass()).unwrap();
        let dt = 0.08 * 2.0 * std::f64::consts::PI / omega_sq.last().unwrap().sqrt();

        let u0 = Col::from_fn(n, |i| 1.0 / (i as f64 + 1.0));
        let v0 = Col::zeros(n);
        let cfg = StepperConfig::new(2, 1.0, dt, 40);
        let history = integrate(&sys, &cfg, &u0, &v0).unwrap();

        for j in 0..n {
            let omega = omega_sq[j].sqrt();
            let phi_j = Col::from_fn(n, |i| phi[(i, j)]);
            let mut prev = modal_coordinate(&phi_j, omega, &sys, &u0, &v0).norm();
            for rec in &history {
                let amp = modal_coordinate(&phi_j, omega, &sys, &rec.u, &rec.v).norm();
                assert!((amp - prev).abs() <= 1e-10 * prev.max(1e-30), "mode {j}");
                prev = amp;
            }
        }
    }

    #[test]
    fn one_step_matches_modal_reconstruction() {
        // SDOF with T = 1, one step of the non-dissipative order-2 scheme
        let k = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let sys = sdof(k);
        let dt = 0.1;
        let cfg = StepperConfig::new(2, 1.0, dt, 1);
        let history = integrate(&sys, &cfg, &col(&[1.0]), &col(&[0.0])).unwrap();

        let scheme = MixedPadeScheme::new(2, 1.0, 0).unwrap();
        let r = scheme.amplification_factor(0.1).unwrap();
        // w0 = 1/2 for u0 = 1, v0 = 0; u after one step is 2 Re(R w0) = Re R
        assert!((history[0].u[0] - r.re).abs() <= 1e-10);
        // v recovered from the imaginary part: v = -2 omega Im(R w0)
        let want_v = -r.im * 2.0 * std::f64::consts::PI;
        assert!((history[0].v[0] - want_v).abs() <= 1e-9 * want_v.abs().max(1.0));
    }

    #[test]
    fn zero_load_zero_initial_conditions_zero_history() {
        let sys = sdof(1.0);
        let cfg = StepperConfig::new(2, 0.8, 0.1, 5);
        let history = integrate(&sys, &cfg, &Col::zeros(1), &Col::zeros(1)).unwrap();
        assert_eq!(history.len(), 5);
        for rec in history {
            assert!(rec.u[0] == 0.0 && rec.v[0] == 0.0 && rec.a[0] == 0.0);
        }
    }

    #[test]
    fn acceleration_residual_invariant_under_load() {
        let load = LoadModel::zero().with_term(col(&[1.0]), Arc::new(|t: f64| (3.0 * t).sin()));
        let sys = sdof_system(2.0, 0.3, 5.0, load).unwrap();
        let cfg = StepperConfig::new(3, 0.8, 0.05, 30);
        let history = integrate(&sys, &cfg, &col(&[0.1]), &col(&[0.0])).unwrap();
        for rec in &history {
            let f = (3.0 * rec.t).sin();
            let resid = 2.0 * rec.a[0] + 0.3 * rec.v[0] + 5.0 * rec.u[0] - f;
            assert!(resid.abs() <= 1e-8 * f.abs().max(1.0));
        }
    }

    #[test]
    fn build_rhs_reduces_to_numerator_without_load() {
        let sys = sdof(1.0);
        let plan = StepperPlan::new(&sys, &StepperConfig::new(2, 0.8, 0.3, 1)).unwrap();
        let z = col(&[0.4, -0.2]);
        let b = plan.build_rhs(&sys, &z, 0.0).unwrap();
        let want = sys.poly_apply(plan.scheme().numerator(), 0.3, &z);
        assert!((b[0] - want[0]).abs() < 1e-14 && (b[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn build_rhs_matches_dense_evaluation_with_constant_load() {
        // b = P(A) z + C_0(A) [dt^2 M^-1 f; 0] against explicit dense A
        let load = LoadModel::zero().with_term(col(&[2.0]), Arc::new(|_| 1.0));
        let sys = sdof_system(1.0, 0.0, 1.0, load).unwrap();
        let dt = 0.4;
        let plan = StepperPlan::new(&sys, &StepperConfig::new(1, 1.0, dt, 1)).unwrap();
        let z = col(&[0.3, 0.5]);
        let b = plan.build_rhs(&sys, &z, 0.0).unwrap();

        let a = dense_state_operator(&sys, dt);
        let p = plan.scheme().numerator().coeffs().to_vec();
        let c0 = plan.scheme().load_polys()[0].coeffs().to_vec();
        let id = Mat::<f64>::identity(2, 2);
        let p_a = &id * faer::Scale(p[0]) + &a * faer::Scale(p[1]);
        let c0_a = &id * faer::Scale(c0[0]);
        let phi = col(&[dt * dt * 2.0, 0.0]);
        let want = &p_a * &z + &c0_a * &phi;
        assert!((b[0] - want[0]).abs() < 1e-12);
        assert!((b[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported_with_step_index() {
        // blow the state up through an absurd load amplitude; this checks
        // the finiteness bookkeeping, not scheme stability
        let load = LoadModel::zero().with_term(col(&[f64::MAX]), Arc::new(|_| f64::MAX));
        let sys = sdof_system(1.0, 0.0, 1.0, load).unwrap();
        let cfg = StepperConfig::new(1, 1.0, 0.1, 3);
        match integrate(&sys, &cfg, &Col::zeros(1), &Col::zeros(1)) {
            Err(StepperError::Divergence { step }) => assert_eq!(step, 1),
            Err(other) => panic!("expected divergence, got {other:?}"),
            Ok(_) => panic!("expected divergence"),
        }
    }

    #[test]
    fn config_validation() {
        let sys = sdof(1.0);
        assert!(StepperPlan::new(&sys, &StepperConfig::new(0, 1.0, 0.1, 1)).is_err());
        assert!(StepperPlan::new(&sys, &StepperConfig::new(9, 1.0, 0.1, 1)).is_err());
        assert!(StepperPlan::new(&sys, &StepperConfig::new(2, 1.5, 0.1, 1)).is_err());
        assert!(StepperPlan::new(&sys, &StepperConfig::new(2, 0.8, -0.1, 1)).is_err());
        let mut cfg = StepperConfig::new(2, 0.8, 0.1, 1);
        cfg.force_order = Some(3);
        assert!(StepperPlan::new(&sys, &cfg).is_err());
    }

    #[test]
    fn trapezoidal_hht_preserves_energy() {
        let k = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let sys = sdof(k);
        let history = hht_integrate(&sys, 0.0, 0.05, 100, &col(&[1.0]), &col(&[0.0])).unwrap();
        let energy = |u: f64, v: f64| 0.5 * v * v + 0.5 * k * u * u;
        let e0 = energy(1.0, 0.0);
        let mut prev = e0;
        for rec in &history {
            let e = energy(rec.u[0], rec.v[0]);
            assert!(
                (e - prev).abs() <= 1e-10 * e0,
                "t={}: energy drift {:e}",
                rec.t,
                (e - prev) / e0
            );
            prev = e;
        }
    }

    #[test]
    fn hht_zero_history() {
        let sys = sdof(1.0);
        let history = hht_integrate(&sys, -0.2, 0.1, 4, &Col::zeros(1), &Col::zeros(1)).unwrap();
        for rec in history {
            assert!(rec.u[0] == 0.0 && rec.v[0] == 0.0);
        }
    }

    #[test]
    fn near_zero_root_is_rejected() {
        let sys = sdof(1.0);
        assert!(matches!(
            ShiftSolver::new(&sys, Complex64::new(1e-12, 0.0), 0.1),
            Err(StepperError::RootNearZero { .. })
        ));
    }

    #[test]
    fn plans_and_schemes_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MixedPadeScheme>();
        assert_send_sync::<StepperPlan>();
        assert_send_sync::<StructuralSystem>();
        assert_send_sync::<crate::linalg::Factorization>();
    }

    #[test]
    fn hht_alpha_range_enforced() {
        let sys = sdof(1.0);
        assert!(hht_integrate(&sys, 0.1, 0.1, 1, &Col::zeros(1), &Col::zeros(1)).is_err());
        assert!(hht_integrate(&sys, -0.4, 0.1, 1, &Col::zeros(1), &Col::zeros(1)).is_err());
    }
}
