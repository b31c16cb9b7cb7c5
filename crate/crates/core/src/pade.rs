//! Rational approximations of the matrix exponential used by the time
//! stepper: diagonal, sub-diagonal, and mixed-order expansions as scalar
//! coefficient polynomials, their denominator roots, and the polynomials
//! that weight the force-expansion terms on the stepping right-hand side.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// Largest supported denominator order. Coefficients are exact integers in
/// f64 up to this order; beyond it the factorial ratios start to lose bits.
pub const MAX_DENOMINATOR_ORDER: usize = 8;

/// Relative tolerance for matching complex roots with their conjugates.
const ROOT_PAIRING_TOL: f64 = 1e-10;
/// Roots below this magnitude are rejected (the stepper divides by them).
const ROOT_MAGNITUDE_MIN: f64 = 1e-8;
/// Synthetic-division remainders are exact in theory; this is the allowed
/// floating-point slack, scaled by the numerator's largest coefficient.
const DIVISION_REMAINDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum PadeError {
    /// Requested orders outside 0 <= L <= M <= MAX_DENOMINATOR_ORDER.
    OrderOutOfRange { numerator: usize, denominator: usize },
    /// Spectral-radius weight outside [0, 1].
    WeightOutOfRange(f64),
    /// Force expansion order too large for the expansion order; the
    /// load-polynomial recursion is only exact for p_f <= L + M - 1.
    ForceOrderTooLarge { force_order: usize, max: usize },
    /// A complex denominator root had no conjugate partner within tolerance.
    RootPairing(Complex64),
    /// A denominator root too close to zero for the successive solves.
    RootNearZero(Complex64),
    /// Synthetic division left a non-vanishing remainder at recursion step k.
    DivisionRemainder { k: usize, remainder: f64 },
    /// Denominator polynomial evaluated to (near) zero.
    NearZeroDenominator { x: f64 },
    /// The companion-matrix eigensolver did not converge.
    RootSolverFailed,
    /// Constructed polynomials violate a consistency identity.
    Inconsistent(&'static str),
}

impl fmt::Display for PadeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadeError::OrderOutOfRange { numerator, denominator } => write!(
                f,
                "expansion order ({numerator},{denominator}) outside 0 <= L <= M <= {MAX_DENOMINATOR_ORDER}"
            ),
            PadeError::WeightOutOfRange(w) => {
                write!(f, "high-frequency spectral radius {w} outside [0, 1]")
            }
            PadeError::ForceOrderTooLarge { force_order, max } => {
                write!(f, "force expansion order {force_order} exceeds maximum {max}")
            }
            PadeError::RootPairing(r) => {
                write!(f, "unpaired complex denominator root {r}")
            }
            PadeError::RootNearZero(r) => {
                write!(f, "denominator root {r} too close to zero")
            }
            PadeError::DivisionRemainder { k, remainder } => write!(
                f,
                "load-polynomial recursion left remainder {remainder:e} at step {k}"
            ),
            PadeError::NearZeroDenominator { x } => {
                write!(f, "denominator polynomial vanishes at x = {x}")
            }
            PadeError::RootSolverFailed => write!(f, "companion-matrix eigensolver failed"),
            PadeError::Inconsistent(what) => write!(f, "inconsistent expansion: {what}"),
        }
    }
}

impl std::error::Error for PadeError {}

/// Dense polynomial with real coefficients, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    c: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "polynomial needs at least a constant term");
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: vec![0.0] }
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn constant_term(&self) -> f64 {
        self.c[0]
    }

    pub fn leading_coeff(&self) -> f64 {
        *self.c.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Drops exact trailing zeros (keeps at least the constant term).
    fn trimmed(mut self) -> Self {
        while self.c.len() > 1 && *self.c.last().unwrap() == 0.0 {
            self.c.pop();
        }
        self
    }

    /// Divides by x. Returns the quotient and the remainder (the constant
    /// term, which an exact division leaves at zero).
    fn divide_by_x(&self) -> (PolyCoeffs, f64) {
        let remainder = self.c[0];
        let quotient = if self.c.len() == 1 {
            PolyCoeffs::zero()
        } else {
            PolyCoeffs::new(self.c[1..].to_vec())
        };
        (quotient, remainder)
    }
}

fn check_orders(numerator_order: usize, denominator_order: usize) -> Result<(), PadeError> {
    if numerator_order > denominator_order
        || denominator_order > MAX_DENOMINATOR_ORDER
        || denominator_order == 0
    {
        return Err(PadeError::OrderOutOfRange {
            numerator: numerator_order,
            denominator: denominator_order,
        });
    }
    Ok(())
}

/// Numerator polynomial of the (L, M) expansion of e^x: coefficient i is
/// (M+L-i)! / (i! (L-i)!), built by a multiplicative ratio recurrence so
/// every coefficient stays an exact integer in f64 up to M = 8.
pub fn pade_numerator(numerator_order: usize, denominator_order: usize) -> Result<PolyCoeffs, PadeError> {
    check_orders(numerator_order, denominator_order)?;
    let (l, m) = (numerator_order, denominator_order);
    let mut c = Vec::with_capacity(l + 1);
    // c0 = (M+L)!/L! = (L+1)(L+2)...(L+M)
    let mut coeff: f64 = (l + 1..=l + m).map(|j| j as f64).product();
    c.push(coeff);
    for i in 0..l {
        coeff = coeff * (l - i) as f64 / ((i + 1) * (m + l - i)) as f64;
        c.push(coeff);
    }
    Ok(PolyCoeffs::new(c))
}

/// Denominator polynomial of the (L, M) expansion: coefficient i is
/// (M!/L!) (M+L-i)! / (i! (M-i)!) (-1)^i; the leading coefficient is (-1)^M.
pub fn pade_denominator(numerator_order: usize, denominator_order: usize) -> Result<PolyCoeffs, PadeError> {
    check_orders(numerator_order, denominator_order)?;
    let (l, m) = (numerator_order, denominator_order);
    let mut c = Vec::with_capacity(m + 1);
    // q0 = (M!/L!)(M+L)!/M! = (M+L)!/L!, same constant term as the numerator
    let mut magnitude: f64 = (l + 1..=l + m).map(|j| j as f64).product();
    c.push(magnitude);
    for i in 0..m {
        magnitude = magnitude * (m - i) as f64 / ((i + 1) * (m + l - i)) as f64;
        c.push(if (i + 1) % 2 == 0 { magnitude } else { -magnitude });
    }
    Ok(PolyCoeffs::new(c))
}

/// Weighted blend of the diagonal (M, M) and first sub-diagonal (M-1, M)
/// expansions. The weight is the spectral radius the blend attains in the
/// high-frequency limit: 1 recovers the diagonal family, 0 the sub-diagonal.
pub fn mix(denominator_order: usize, rho_inf: f64) -> Result<(PolyCoeffs, PolyCoeffs), PadeError> {
    if !(0.0..=1.0).contains(&rho_inf) || rho_inf.is_nan() {
        return Err(PadeError::WeightOutOfRange(rho_inf));
    }
    check_orders(denominator_order.saturating_sub(1), denominator_order)?;
    let m = denominator_order;
    let l = m - 1;

    let p_diag = pade_numerator(m, m)?;
    let p_sub = pade_numerator(l, m)?;
    let q_diag = pade_denominator(m, m)?;
    let q_sub = pade_denominator(l, m)?;

    let blend = |hi: &PolyCoeffs, lo: &PolyCoeffs| {
        let mut c = vec![0.0; m + 1];
        for (i, v) in hi.coeffs().iter().enumerate() {
            c[i] += rho_inf * v;
        }
        for (i, v) in lo.coeffs().iter().enumerate() {
            c[i] += (1.0 - rho_inf) * v;
        }
        PolyCoeffs::new(c).trimmed()
    };

    Ok((blend(&p_diag, &p_sub), blend(&q_diag, &q_sub)))
}

/// Roots r_1..r_M of the denominator, with Q(x) = prod_i (r_i - x), found as
/// companion-matrix eigenvalues. Conjugate pairs are snapped to exact
/// conjugacy and ordered: pairs first (ascending |Im|, the Im > 0 member
/// leading), then real roots ascending.
pub fn q_roots(denominator: &PolyCoeffs) -> Result<Vec<Complex64>, PadeError> {
    let m = denominator.degree();
    assert!(m >= 1, "denominator must have degree >= 1");
    let lead = denominator.leading_coeff();

    if m == 1 {
        // q0 + q1 x = 0
        let root = Complex64::new(-denominator.constant_term() / lead, 0.0);
        return order_roots(vec![root]);
    }

    // Companion matrix of the monic polynomial x^M + sum a_i x^i.
    let mut companion = faer::Mat::<f64>::zeros(m, m);
    for i in 1..m {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        companion[(i, m - 1)] = -denominator.coeffs()[i] / lead;
    }
    let eigs = companion
        .eigenvalues()
        .map_err(|_| PadeError::RootSolverFailed)?;
    order_roots(eigs)
}

/// Pair conjugates, snap each pair to exact conjugacy, and apply the
/// deterministic ordering used throughout the stepper.
fn order_roots(raw: Vec<Complex64>) -> Result<Vec<Complex64>, PadeError> {
    let mut reals: Vec<f64> = Vec::new();
    let mut pairs: Vec<(f64, f64)> = Vec::new(); // (re, im > 0)
    let mut pending: Vec<Complex64> = raw;

    while let Some(r) = pending.pop() {
        if r.norm() < ROOT_MAGNITUDE_MIN {
            return Err(PadeError::RootNearZero(r));
        }
        let scale = r.norm().max(1.0);
        if r.im.abs() <= ROOT_PAIRING_TOL * scale {
            reals.push(r.re);
            continue;
        }
        let conj = r.conj();
        let partner = pending
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - conj).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((i, dist)) if dist <= ROOT_PAIRING_TOL * scale => {
                let other = pending.swap_remove(i);
                let re = 0.5 * (r.re + other.re);
                let im = 0.5 * (r.im.abs() + other.im.abs());
                pairs.push((re, im));
            }
            _ => return Err(PadeError::RootPairing(r)),
        }
    }

    pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
    reals.sort_by(f64::total_cmp);

    let mut ordered = Vec::with_capacity(2 * pairs.len() + reals.len());
    for (re, im) in pairs {
        ordered.push(Complex64::new(re, im));
        ordered.push(Complex64::new(re, -im));
    }
    ordered.extend(reals.into_iter().map(|re| Complex64::new(re, 0.0)));
    Ok(ordered)
}

/// Scalar-coefficient forms of the matrices weighting the force-expansion
/// terms. The first entry solves x * C_0 = P - Q (exact because the constant
/// terms cancel); each later entry follows the recursion
/// x * C_k = k C_{k-1} + (-1/2)^k (P - (-1)^k Q).
pub fn load_polys(
    numerator: &PolyCoeffs,
    denominator: &PolyCoeffs,
    force_order: usize,
) -> Result<Vec<PolyCoeffs>, PadeError> {
    let l = numerator.degree().min(denominator.degree() - 1);
    let m = denominator.degree();
    let max_order = l + m - 1;
    if force_order > max_order {
        return Err(PadeError::ForceOrderTooLarge { force_order, max: max_order });
    }

    let scale = numerator.max_abs_coeff();
    let len = m + 1;
    let padded = |p: &PolyCoeffs| {
        let mut c = vec![0.0; len];
        c[..p.coeffs().len()].copy_from_slice(p.coeffs());
        c
    };
    let p = padded(numerator);
    let q = padded(denominator);

    let mut polys: Vec<PolyCoeffs> = Vec::with_capacity(force_order + 1);
    let mut numer = vec![0.0; len];
    for i in 0..len {
        numer[i] = p[i] - q[i];
    }
    let (c0, remainder) = PolyCoeffs::new(numer).divide_by_x();
    if remainder.abs() > DIVISION_REMAINDER_TOL * scale {
        return Err(PadeError::DivisionRemainder { k: 0, remainder });
    }
    polys.push(c0);

    for k in 1..=force_order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let half_pow = (-0.5_f64).powi(k as i32);
        let prev = polys[k - 1].coeffs();
        let mut numer = vec![0.0; len];
        for i in 0..len {
            let from_prev = if i < prev.len() { k as f64 * prev[i] } else { 0.0 };
            numer[i] = from_prev + half_pow * (p[i] - sign * q[i]);
        }
        let (ck, remainder) = PolyCoeffs::new(numer).divide_by_x();
        if remainder.abs() > DIVISION_REMAINDER_TOL * scale {
            return Err(PadeError::DivisionRemainder { k, remainder });
        }
        polys.push(ck);
    }
    Ok(polys)
}

/// A mixed-order expansion bound to a dissipation level, with everything the
/// stepper needs precomputed: both polynomials, the denominator roots, and
/// the load-coefficient polynomials. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MixedPadeScheme {
    numerator_order: usize,
    denominator_order: usize,
    rho_inf: f64,
    numerator: PolyCoeffs,
    denominator: PolyCoeffs,
    roots: Vec<Complex64>,
    load_polys: Vec<PolyCoeffs>,
    force_order: usize,
}

impl MixedPadeScheme {
    pub fn new(denominator_order: usize, rho_inf: f64, force_order: usize) -> Result<Self, PadeError> {
        let (numerator, denominator) = mix(denominator_order, rho_inf)?;
        let roots = q_roots(&denominator)?;
        let load_polys = load_polys(&numerator, &denominator, force_order)?;

        let scheme = Self {
            numerator_order: denominator_order - 1,
            denominator_order,
            rho_inf,
            numerator,
            denominator,
            roots,
            load_polys,
            force_order,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    fn validate(&self) -> Result<(), PadeError> {
        let p = &self.numerator;
        let q = &self.denominator;
        let c0 = p.constant_term();
        if (c0 - q.constant_term()).abs() > 1e-13 * c0.abs() {
            return Err(PadeError::Inconsistent("constant terms differ"));
        }
        let p1 = p.coeffs().get(1).copied().unwrap_or(0.0);
        let q1 = q.coeffs()[1];
        if (p1 - q1 - c0).abs() > 1e-12 * c0.abs() {
            return Err(PadeError::Inconsistent("first-order consistency violated"));
        }
        if q.degree() != self.denominator_order {
            return Err(PadeError::Inconsistent("denominator degree"));
        }
        let expected_p_deg = if self.rho_inf == 0.0 {
            self.numerator_order
        } else {
            self.denominator_order
        };
        if p.degree() != expected_p_deg {
            return Err(PadeError::Inconsistent("numerator degree"));
        }
        if self.roots.len() != self.denominator_order {
            return Err(PadeError::Inconsistent("root count"));
        }
        Ok(())
    }

    pub fn numerator_order(&self) -> usize {
        self.numerator_order
    }

    pub fn denominator_order(&self) -> usize {
        self.denominator_order
    }

    pub fn rho_inf(&self) -> f64 {
        self.rho_inf
    }

    pub fn numerator(&self) -> &PolyCoeffs {
        &self.numerator
    }

    pub fn denominator(&self) -> &PolyCoeffs {
        &self.denominator
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn load_polys(&self) -> &[PolyCoeffs] {
        &self.load_polys
    }

    pub fn force_order(&self) -> usize {
        self.force_order
    }

    /// One-step amplification factor R at the dimensionless step size
    /// x = dt/T, evaluated as P(i 2 pi x) / Q(i 2 pi x).
    pub fn amplification_factor(&self, x: f64) -> Result<Complex64, PadeError> {
        let z = Complex64::new(0.0, 2.0 * PI * x);
        let den = self.denominator.eval_complex(z);
        // never triggers for x >= 0 (roots sit in Re > 0), but guard the
        // division against total cancellation anyway
        let term_scale = self
            .denominator
            .coeffs()
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (k, &c)| m.max(c.abs() * z.norm().powi(k as i32)));
        if !den.is_finite() || den.norm() <= 1e-14 * term_scale {
            return Err(PadeError::NearZeroDenominator { x });
        }
        Ok(self.numerator.eval_complex(z) / den)
    }
}
