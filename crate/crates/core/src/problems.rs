//! Desk-scale benchmark problems with analytical references: a stiff
//! two-spring chain driven through a prescribed support, homogeneous and
//! bi-material rods under end step loads, and scalar wave propagation in a
//! clamped square. Meshes use linear elements with consistent mass;
//! boundary conditions are applied by eliminating the fixed DOFs.

use crate::linalg::{LinalgError, SquareMatrix, Symmetry};
use crate::system::{LoadModel, StructuralSystem, SystemError};
use faer::{Col, Mat};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    System(SystemError),
    Linalg(LinalgError),
    TooFewElements { got: usize, min: usize },
    NonPositiveParameter { name: &'static str, value: f64 },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::System(e) => write!(f, "{e}"),
            ProblemError::Linalg(e) => write!(f, "{e}"),
            ProblemError::TooFewElements { got, min } => {
                write!(f, "{got} elements is too few; need at least {min}")
            }
            ProblemError::NonPositiveParameter { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
        }
    }
}

impl std::error::Error for ProblemError {}

impl From<SystemError> for ProblemError {
    fn from(e: SystemError) -> Self {
        ProblemError::System(e)
    }
}

impl From<LinalgError> for ProblemError {
    fn from(e: LinalgError) -> Self {
        ProblemError::Linalg(e)
    }
}

// Stiff-chain constants: a prescribed support motion u1 = sin(omega_p t)
// drives two unit masses through a very stiff spring k1 and a soft one k2.
pub const THREE_DOF_STIFF: f64 = 1e7;
pub const THREE_DOF_SOFT: f64 = 1.0;
pub const THREE_DOF_DRIVE_FREQ: f64 = 1.2;

// Homogeneous rod: fixed-free, end step load.
pub const ROD_LENGTH: f64 = 200.0;
pub const ROD_YOUNG: f64 = 3e7;
pub const ROD_DENSITY: f64 = 0.00073;
pub const ROD_PRESSURE: f64 = 1e4;
pub const ROD_AREA: f64 = 1.0;

// Bi-material rod: two equal segments, wave speeds 40 sqrt(5) and
// 20 sqrt(2), unit density, unit step traction at the free end.
pub const BIMAT_SEGMENT_LENGTH: f64 = 2.0;
pub const BIMAT_DENSITY: f64 = 1.0;
pub const BIMAT_PRESSURE: f64 = 1.0;

pub fn bimat_wave_speed_left() -> f64 {
    40.0 * 5.0f64.sqrt()
}

pub fn bimat_wave_speed_right() -> f64 {
    20.0 * 2.0f64.sqrt()
}

// Scalar wave in the unit square, unit speed, unit initial-velocity patch.
pub const WAVE_SIDE: f64 = 1.0;
pub const WAVE_SPEED: f64 = 1.0;
pub const WAVE_AMPLITUDE: f64 = 1.0;

/// Longitudinal wave speed sqrt(E / rho).
pub fn wave_speed(young: f64, density: f64) -> f64 {
    (young / density).sqrt()
}

/// Time step from a CFL number: dt = cfl * dx / c.
pub fn cfl_to_dt(cfl: f64, c: f64, dx: f64) -> f64 {
    assert!(cfl > 0.0 && c > 0.0 && dx > 0.0, "cfl, wave speed, and element size must be positive");
    cfl * dx / c
}

/// Discrete mechanical energy 0.5 v^T M v + 0.5 u^T K u.
pub fn discrete_energy(sys: &StructuralSystem, u: &Col<f64>, v: &Col<f64>) -> f64 {
    let mv = sys.mass().as_ref() * v;
    let ku = sys.stiffness().as_ref() * u;
    let mut e = 0.0;
    for i in 0..u.nrows() {
        e += 0.5 * v[i] * mv[i] + 0.5 * u[i] * ku[i];
    }
    e
}

/// Analytical reference attached to a benchmark, evaluable per DOF.
pub enum Reference {
    ThreeDofFiltered(ThreeDofReference),
    RodCharacteristics { length: f64, wave_speed: f64, pressure: f64, density: f64 },
    ScalarWaveSeries { length: f64, wave_speed: f64, amplitude: f64, terms: usize },
}

impl Reference {
    /// Reference (u, v) for the given DOF at time t; NaN marks components
    /// the reference does not define.
    pub fn eval_dof(&self, dof: usize, coords: &[[f64; 2]], t: f64) -> (f64, f64) {
        match self {
            Reference::ThreeDofFiltered(r) => {
                let (u, v, _) = r.eval(t);
                (u[dof], v[dof])
            }
            Reference::RodCharacteristics { length, wave_speed, pressure, density } => {
                let x = coords[dof][0];
                let v = rod_reference_velocity(x, t, *length, *wave_speed, *pressure, *density);
                (f64::NAN, v)
            }
            Reference::ScalarWaveSeries { length, wave_speed, amplitude, terms } => {
                let [x, y] = coords[dof];
                scalar_wave_reference(x, y, t, *terms, *length, *wave_speed, *amplitude)
            }
        }
    }
}

/// A benchmark ready to integrate: the assembled system, node coordinates
/// per DOF, probe DOFs, initial conditions, and the analytical reference.
pub struct MeshedModel {
    pub system: StructuralSystem,
    pub coords: Vec<[f64; 2]>,
    pub probes: Vec<usize>,
    pub initial_u: Col<f64>,
    pub initial_v: Col<f64>,
    pub reference: Option<Reference>,
}

// ---------------------------------------------------------------------------
// stiff two-spring chain
// ---------------------------------------------------------------------------

/// Reduced system for the support-driven chain: the massless support DOF is
/// eliminated by moving k1 u1(t) to the load, leaving
/// M = I, K = [[k1+k2, -k2], [-k2, k2]], f = [k1 sin(omega_p t), 0].
pub fn build_three_dof() -> MeshedModel {
    let k1 = THREE_DOF_STIFF;
    let k2 = THREE_DOF_SOFT;
    let mut k = Mat::<f64>::zeros(2, 2);
    k[(0, 0)] = k1 + k2;
    k[(0, 1)] = -k2;
    k[(1, 0)] = -k2;
    k[(1, 1)] = k2;
    let stiffness = SquareMatrix::new(k, Symmetry::Symmetric).expect("symmetric by construction");
    let mass = SquareMatrix::identity(2);

    let spatial = Col::from_fn(2, |i| if i == 0 { k1 } else { 0.0 });
    let load = LoadModel::zero().with_term(spatial, Arc::new(|t: f64| (THREE_DOF_DRIVE_FREQ * t).sin()));
    let system = StructuralSystem::new(mass, None, stiffness, load).expect("mass is identity");

    MeshedModel {
        system,
        coords: vec![[1.0, 0.0], [2.0, 0.0]],
        probes: vec![0, 1],
        initial_u: Col::zeros(2),
        initial_v: Col::zeros(2),
        reference: Some(Reference::ThreeDofFiltered(ThreeDofReference::build())),
    }
}

/// Reaction force transmitted to the support: k1 (u1(t) - u2), the inertia
/// term vanishing with the massless support.
pub fn three_dof_reaction_force(u: &Col<f64>, t: f64) -> f64 {
    THREE_DOF_STIFF * ((THREE_DOF_DRIVE_FREQ * t).sin() - u[0])
}

/// Mode-superposition reference with the high-frequency free vibration
/// removed: mode 1 keeps its full zero-initial-condition response, mode 2
/// keeps only the quasi-static forced part. The filtered history starts
/// with a nonzero velocity at the driven mass even though the underlying
/// problem is at rest, which is exactly the inconsistency the benchmark
/// probes.
pub struct ThreeDofReference {
    omegas: [f64; 2],
    shapes: [[f64; 2]; 2],
    modal_amps: [f64; 2],
}

impl ThreeDofReference {
    fn build() -> Self {
        // Closed-form 2x2 eigensolve. The dense solver's absolute error
        // floor ~||K|| eps would wash out the soft mode at this stiffness
        // ratio, so the quadratic is evaluated in its stable form (product
        // of roots for the small one) and each eigenvector comes from the
        // matrix row that avoids cancellation in its small component.
        let k1 = THREE_DOF_STIFF;
        let k2 = THREE_DOF_SOFT;
        let trace = k1 + 2.0 * k2;
        let det = k2 * (k1 + k2) - k2 * k2;
        let disc = (trace * trace - 4.0 * det).sqrt();
        let s_high = (trace + disc) / 2.0;
        let s_low = det / s_high;
        let omega_sq = [s_low, s_high];

        let mut shapes = [[0.0; 2]; 2];
        let mut modal_amps = [0.0; 2];
        for j in 0..2 {
            // eigenvector of [[k1+k2, -k2], [-k2, k2]]: first row for the
            // soft mode, second row for the stiff one
            let raw = if j == 0 {
                [k2, k1 + k2 - omega_sq[j]]
            } else {
                [k2 - omega_sq[j], k2]
            };
            let norm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
            shapes[j] = [raw[0] / norm, raw[1] / norm];
            // modal force amplitude Gamma_j = phi_j . [k1, 0]
            modal_amps[j] = shapes[j][0] * k1;
        }
        Self { omegas: [omega_sq[0].sqrt(), omega_sq[1].sqrt()], shapes, modal_amps }
    }

    /// (u, v, a) of the filtered reference at time t.
    pub fn eval(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let wp = THREE_DOF_DRIVE_FREQ;
        let mut u = [0.0; 2];
        let mut v = [0.0; 2];
        let mut a = [0.0; 2];

        // mode 1: full forced-plus-transient response from rest
        {
            let w = self.omegas[0];
            let amp = self.modal_amps[0] / (w * w - wp * wp);
            let q = amp * ((wp * t).sin() - (wp / w) * (w * t).sin());
            let qd = amp * wp * ((wp * t).cos() - (w * t).cos());
            let qdd = amp * wp * (-wp * (wp * t).sin() + w * (w * t).sin());
            for i in 0..2 {
                u[i] += self.shapes[0][i] * q;
                v[i] += self.shapes[0][i] * qd;
                a[i] += self.shapes[0][i] * qdd;
            }
        }
        // mode 2: quasi-static forced part only
        {
            let w = self.omegas[1];
            let amp = self.modal_amps[1] / (w * w - wp * wp);
            let q = amp * (wp * t).sin();
            let qd = amp * wp * (wp * t).cos();
            let qdd = -amp * wp * wp * (wp * t).sin();
            for i in 0..2 {
                u[i] += self.shapes[1][i] * q;
                v[i] += self.shapes[1][i] * qd;
                a[i] += self.shapes[1][i] * qdd;
            }
        }
        (u, v, a)
    }
}

/// Filtered reference sampled on a time grid.
pub fn three_dof_reference(t_grid: &[f64]) -> Vec<crate::stepper::HistoryRecord> {
    let reference = ThreeDofReference::build();
    t_grid
        .iter()
        .map(|&t| {
            let (u, v, a) = reference.eval(t);
            crate::stepper::HistoryRecord {
                t,
                u: Col::from_fn(2, |i| u[i]),
                v: Col::from_fn(2, |i| v[i]),
                a: Col::from_fn(2, |i| a[i]),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1D rods
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RodGrading {
    Uniform,
    /// Element length varies sinusoidally with a ~10:1 size ratio.
    Sinusoidal,
}

/// Node coordinates for the rod mesh.
pub fn rod_node_coordinates(n_elements: usize, grading: RodGrading, length: f64) -> Vec<f64> {
    let n = n_elements as f64;
    (0..=n_elements)
        .map(|i| {
            let frac = i as f64 / n;
            match grading {
                RodGrading::Uniform => length * frac,
                RodGrading::Sinusoidal => {
                    length * (frac + 9.0 / (11.0 * 20.0 * PI) * (20.0 * PI * frac).sin().powi(2))
                }
            }
        })
        .collect()
}

/// Assembles a fixed-free chain of 2-node bar elements with consistent
/// mass; per-element Young's modulus and density. Returns (K, M) over the
/// free DOFs (node 0 eliminated).
fn assemble_bar_chain(
    node_x: &[f64],
    young: &[f64],
    density: &[f64],
    area: f64,
) -> (Mat<f64>, Mat<f64>) {
    let n_el = node_x.len() - 1;
    let n_dof = n_el; // node 0 fixed
    let mut k = Mat::<f64>::zeros(n_dof, n_dof);
    let mut m = Mat::<f64>::zeros(n_dof, n_dof);
    for e in 0..n_el {
        let h = node_x[e + 1] - node_x[e];
        let ke = young[e] * area / h;
        let me = density[e] * area * h / 6.0;
        // global DOFs of the element ends; usize::MAX marks the fixed node
        let dofs = [e.checked_sub(1), Some(e)];
        let k_local = [[ke, -ke], [-ke, ke]];
        let m_local = [[2.0 * me, me], [me, 2.0 * me]];
        for (a, da) in dofs.iter().enumerate() {
            let Some(ia) = da else { continue };
            for (b, db) in dofs.iter().enumerate() {
                let Some(ib) = db else { continue };
                k[(*ia, *ib)] += k_local[a][b];
                m[(*ia, *ib)] += m_local[a][b];
            }
        }
    }
    (k, m)
}

/// Homogeneous rod, left end fixed, right end under a step load p H(t).
pub fn build_rod(n_elements: usize, grading: RodGrading) -> Result<MeshedModel, ProblemError> {
    if n_elements < 2 {
        return Err(ProblemError::TooFewElements { got: n_elements, min: 2 });
    }
    let node_x = rod_node_coordinates(n_elements, grading, ROD_LENGTH);
    let young = vec![ROD_YOUNG; n_elements];
    let density = vec![ROD_DENSITY; n_elements];
    let (k, m) = assemble_bar_chain(&node_x, &young, &density, ROD_AREA);

    let n_dof = n_elements;
    let mut end_load = Col::zeros(n_dof);
    end_load[n_dof - 1] = ROD_PRESSURE * ROD_AREA;
    let load = LoadModel::zero()
        .with_term(end_load, Arc::new(|t: f64| if t >= 0.0 { 1.0 } else { 0.0 }))
        .with_discontinuity(0.0);

    let system = StructuralSystem::new(
        SquareMatrix::new(m, Symmetry::PositiveDefinite)?,
        None,
        SquareMatrix::new(k, Symmetry::Symmetric)?,
        load,
    )?;

    // probe at the node closest to the middle of the rod
    let probe = node_x[1..]
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - ROD_LENGTH / 2.0).abs().total_cmp(&(b.1 - ROD_LENGTH / 2.0).abs())
        })
        .map(|(i, _)| i)
        .unwrap();

    Ok(MeshedModel {
        coords: node_x[1..].iter().map(|&x| [x, 0.0]).collect(),
        probes: vec![probe],
        initial_u: Col::zeros(n_dof),
        initial_v: Col::zeros(n_dof),
        reference: Some(Reference::RodCharacteristics {
            length: ROD_LENGTH,
            wave_speed: wave_speed(ROD_YOUNG, ROD_DENSITY),
            pressure: ROD_PRESSURE,
            density: ROD_DENSITY,
        }),
        system,
    })
}

/// Exact velocity of the continuum fixed-free rod under an end step load,
/// by characteristics: at a fixed point the velocity cycles through
/// 0, +p/(rho c), 0, -p/(rho c) as fronts and their reflections pass, with
/// period 4 l / c.
pub fn rod_reference_velocity(
    x: f64,
    t: f64,
    length: f64,
    wave_speed: f64,
    pressure: f64,
    density: f64,
) -> f64 {
    assert!((0.0..=length).contains(&x));
    if t < 0.0 {
        return 0.0;
    }
    let plateau = pressure / (density * wave_speed);
    let cycle = 4.0 * length / wave_speed;
    let tau = t % cycle;
    let arrive_in = (length - x) / wave_speed;
    let arrive_back = (length + x) / wave_speed;
    let arrive_neg = (3.0 * length - x) / wave_speed;
    let arrive_rest = (3.0 * length + x) / wave_speed;
    if tau < arrive_in {
        0.0
    } else if tau < arrive_back {
        plateau
    } else if tau < arrive_neg {
        0.0
    } else if tau < arrive_rest {
        -plateau
    } else {
        0.0
    }
}

/// Two-segment rod with per-segment wave speeds (shared density), fixed at
/// the left end, step traction at the right end; probe at the interface.
pub fn build_two_segment_rod(
    n_per_segment: usize,
    c_left: f64,
    c_right: f64,
    density: f64,
    segment_length: f64,
    pressure: f64,
) -> Result<MeshedModel, ProblemError> {
    if n_per_segment < 2 {
        return Err(ProblemError::TooFewElements { got: n_per_segment, min: 2 });
    }
    for (name, value) in [("c_left", c_left), ("c_right", c_right), ("density", density)] {
        if !(value > 0.0) {
            return Err(ProblemError::NonPositiveParameter { name, value });
        }
    }
    let n_el = 2 * n_per_segment;
    let h = segment_length / n_per_segment as f64;
    let node_x: Vec<f64> = (0..=n_el).map(|i| i as f64 * h).collect();
    let mut young = vec![density * c_left * c_left; n_per_segment];
    young.extend(vec![density * c_right * c_right; n_per_segment]);
    let dens = vec![density; n_el];
    let (k, m) = assemble_bar_chain(&node_x, &young, &dens, 1.0);

    let n_dof = n_el;
    let mut end_load = Col::zeros(n_dof);
    end_load[n_dof - 1] = pressure;
    let load = LoadModel::zero()
        .with_term(end_load, Arc::new(|t: f64| if t >= 0.0 { 1.0 } else { 0.0 }))
        .with_discontinuity(0.0);

    let system = StructuralSystem::new(
        SquareMatrix::new(m, Symmetry::PositiveDefinite)?,
        None,
        SquareMatrix::new(k, Symmetry::Symmetric)?,
        load,
    )?;

    Ok(MeshedModel {
        coords: node_x[1..].iter().map(|&x| [x, 0.0]).collect(),
        probes: vec![n_per_segment - 1], // interface node
        initial_u: Col::zeros(n_dof),
        initial_v: Col::zeros(n_dof),
        reference: None,
        system,
    })
}

/// The bi-material benchmark with its standard constants.
pub fn build_bimaterial_rod(n_per_segment: usize) -> Result<MeshedModel, ProblemError> {
    build_two_segment_rod(
        n_per_segment,
        bimat_wave_speed_left(),
        bimat_wave_speed_right(),
        BIMAT_DENSITY,
        BIMAT_SEGMENT_LENGTH,
        BIMAT_PRESSURE,
    )
}

/// First velocity plateau at the material interface: the incident front
/// from the loaded soft segment transmits v = 2 p / (z1 + z2) into the
/// stiff one, z being the acoustic impedances rho c.
pub fn bimaterial_interface_plateau() -> f64 {
    let z1 = BIMAT_DENSITY * bimat_wave_speed_left();
    let z2 = BIMAT_DENSITY * bimat_wave_speed_right();
    2.0 * BIMAT_PRESSURE / (z1 + z2)
}

// ---------------------------------------------------------------------------
// scalar wave in a clamped square
// ---------------------------------------------------------------------------

/// Clamped unit square meshed with n x n bilinear quadrilaterals; an
/// initial velocity patch of amplitude A covers the central half-side
/// square (patch-edge nodes included at full value). Only interior nodes
/// carry DOFs.
pub fn build_scalar_wave(n_per_side: usize) -> Result<MeshedModel, ProblemError> {
    if n_per_side < 4 {
        return Err(ProblemError::TooFewElements { got: n_per_side, min: 4 });
    }
    let n = n_per_side;
    let h = WAVE_SIDE / n as f64;
    let interior = n - 1;
    let n_dof = interior * interior;

    // interior node (i, j), 1-based grid indices, row-major over j
    let dof_of = |i: usize, j: usize| -> Option<usize> {
        if i == 0 || j == 0 || i == n || j == n {
            None
        } else {
            Some((j - 1) * interior + (i - 1))
        }
    };

    let c2 = WAVE_SPEED * WAVE_SPEED;
    let k_local: [[f64; 4]; 4] = {
        let s = c2 / 6.0;
        [
            [4.0 * s, -s, -2.0 * s, -s],
            [-s, 4.0 * s, -s, -2.0 * s],
            [-2.0 * s, -s, 4.0 * s, -s],
            [-s, -2.0 * s, -s, 4.0 * s],
        ]
    };
    let m_local: [[f64; 4]; 4] = {
        let s = h * h / 36.0;
        [
            [4.0 * s, 2.0 * s, s, 2.0 * s],
            [2.0 * s, 4.0 * s, 2.0 * s, s],
            [s, 2.0 * s, 4.0 * s, 2.0 * s],
            [2.0 * s, s, 2.0 * s, 4.0 * s],
        ]
    };

    let mut k = Mat::<f64>::zeros(n_dof, n_dof);
    let mut m = Mat::<f64>::zeros(n_dof, n_dof);
    for ey in 0..n {
        for ex in 0..n {
            // counterclockwise corners
            let corners = [(ex, ey), (ex + 1, ey), (ex + 1, ey + 1), (ex, ey + 1)];
            for (a, &(ia, ja)) in corners.iter().enumerate() {
                let Some(da) = dof_of(ia, ja) else { continue };
                for (b, &(ib, jb)) in corners.iter().enumerate() {
                    let Some(db) = dof_of(ib, jb) else { continue };
                    k[(da, db)] += k_local[a][b];
                    m[(da, db)] += m_local[a][b];
                }
            }
        }
    }

    let mut coords = vec![[0.0; 2]; n_dof];
    let mut v0 = Col::zeros(n_dof);
    let half = WAVE_SIDE / 2.0;
    let quarter = WAVE_SIDE / 4.0;
    for j in 1..n {
        for i in 1..n {
            let dof = dof_of(i, j).unwrap();
            let x = i as f64 * h;
            let y = j as f64 * h;
            coords[dof] = [x, y];
            if (x - half).abs() <= quarter + 1e-12 && (y - half).abs() <= quarter + 1e-12 {
                v0[dof] = WAVE_AMPLITUDE;
            }
        }
    }

    // probe at the node closest to the center
    let probe = coords
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1[0] - half).powi(2) + (a.1[1] - half).powi(2);
            let db = (b.1[0] - half).powi(2) + (b.1[1] - half).powi(2);
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .unwrap();

    let system = StructuralSystem::new(
        SquareMatrix::new(m, Symmetry::PositiveDefinite)?,
        None,
        SquareMatrix::new(k, Symmetry::Symmetric)?,
        LoadModel::zero(),
    )?;

    Ok(MeshedModel {
        system,
        coords,
        probes: vec![probe],
        initial_u: Col::zeros(n_dof),
        initial_v: v0,
        reference: Some(Reference::ScalarWaveSeries {
            length: WAVE_SIDE,
            wave_speed: WAVE_SPEED,
            amplitude: WAVE_AMPLITUDE,
            terms: 199,
        }),
    })
}

/// Separation-of-variables series for the clamped square with the central
/// initial-velocity patch: returns (u, v) at (x, y, t), truncating both
/// series indices at n_max (even terms vanish).
pub fn scalar_wave_reference(
    x: f64,
    y: f64,
    t: f64,
    n_max: usize,
    length: f64,
    wave_speed: f64,
    amplitude: f64,
) -> (f64, f64) {
    let mut u = 0.0;
    let mut v = 0.0;
    let lead = 16.0 * amplitude / (PI * PI);
    let mut m = 1;
    while m <= n_max {
        let sin_m2 = (m as f64 * PI / 2.0).sin();
        let sin_m4 = (m as f64 * PI / 4.0).sin();
        let sx = (m as f64 * PI * x / length).sin();
        let mut n = 1;
        while n <= n_max {
            let mu = wave_speed * PI / length * ((m * m + n * n) as f64).sqrt();
            let sin_n2 = (n as f64 * PI / 2.0).sin();
            let sin_n4 = (n as f64 * PI / 4.0).sin();
            let sy = (n as f64 * PI * y / length).sin();
            let shape = lead / ((m * n) as f64) * sin_m2 * sin_m4 * sin_n2 * sin_n4 * sx * sy;
            u += shape / mu * (mu * t).sin();
            v += shape * (mu * t).cos();
            n += 2;
        }
        m += 2;
    }
    (u, v)
}
