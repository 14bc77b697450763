//! Time-dependent validation of the effective squeezing Hamiltonian.
//!
//! Both standing waves drive `sigma_+` with detunings `omega_0 - omega_I =
//! mu + nu` and `omega_0 - omega_II = -(mu + nu)`, so after moving to the
//! interaction picture of the free Hamiltonian the drive envelope is real:
//!
//! `H(t) = 2 Omega cos((mu + nu) t) sum_i sigma_xi cos(k x_i(t))`
//!
//! with `k x_1 = eta (a + a^dag) - eta_r (b + b^dag)`, `k x_2 = eta (a +
//! a^dag) + eta_r (b + b^dag)` and `x_i(t)` carrying the free phases
//! `e^{+-i mu t}`, `e^{+-i nu t}`. The `2 Omega` scaling makes the resonant
//! part exactly `Omega eta eta_r (ab + a^dag b^dag)(sigma_x1 - sigma_x2)`.
//! No rotating-wave truncation is made.
//!
//! `H(t)` only involves `sigma_x1` and `sigma_x2`, so each joint `sigma_x`
//! eigenspace is invariant and evolves under `x_1 C_1 + x_2 C_2` on the
//! motional space alone. [`rwa_infidelity`] exploits this.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{dense_to_csr, Operator};
use crate::operators::{adjoint_csr, pauli, two_ion, PauliAxis};
use crate::propagators::{u_squeeze, EffectiveCoupling};
use crate::protocols::initial_squeeze_state;
use crate::space::SpaceDescriptor;
use crate::state::{inner, MotionalState, StateVector};
use crate::{Tolerances, C64};

/// Largest Lamb-Dicke parameter accepted for simulation.
pub const LAMB_DICKE_LIMIT: f64 = 0.3;
/// Allowed `| ||psi(t1)|| - 1 |` after integration.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

const HBAR: f64 = 1.054_571_817e-34;
const AMU: f64 = 1.660_539_066_60e-27;

/// Trap and laser constants (SI units, angular frequencies in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Ion mass (kg).
    pub mass: f64,
    /// Center-of-mass mode frequency.
    pub mu: f64,
    /// Breathing mode frequency.
    pub nu: f64,
    /// Internal transition frequency.
    pub omega0: f64,
    /// Rabi frequency.
    pub omega: f64,
    /// Effective wavevector (1/m).
    pub k: f64,
    pub eta: f64,
    pub eta_r: f64,
}

impl Default for PhysicalParams {
    /// `mu = 2 pi 1 MHz`, `nu = sqrt(3) mu`, `eta = 0.1`, `Omega = 2 pi 20 kHz`, 40 amu.
    fn default() -> Self {
        let mu = 2.0 * std::f64::consts::PI * 1e6;
        Self::with_lamb_dicke(40.0 * AMU, mu, 3f64.sqrt() * mu, 2.0 * std::f64::consts::PI * 4.11e14, 2.0 * std::f64::consts::PI * 2e4, 0.1, None)
    }
}

impl PhysicalParams {
    /// Derives `eta = k sqrt(hbar / 4 m mu)` and `eta_r = k sqrt(hbar / 4 m nu)`.
    pub fn from_trap(mass: f64, mu: f64, nu: f64, omega0: f64, omega: f64, k: f64) -> Self {
        Self {
            mass,
            mu,
            nu,
            omega0,
            omega,
            k,
            eta: k * (HBAR / (4.0 * mass * mu)).sqrt(),
            eta_r: k * (HBAR / (4.0 * mass * nu)).sqrt(),
        }
    }

    /// Fixes `k` from `eta`. Without an explicit `eta_r` the trap relation
    /// `eta_r = eta sqrt(mu / nu)` is used; an explicit one overrides it.
    pub fn with_lamb_dicke(
        mass: f64,
        mu: f64,
        nu: f64,
        omega0: f64,
        omega: f64,
        eta: f64,
        eta_r: Option<f64>,
    ) -> Self {
        let k = eta * (4.0 * mass * mu / HBAR).sqrt();
        let mut p = Self::from_trap(mass, mu, nu, omega0, omega, k);
        p.eta = eta;
        if let Some(er) = eta_r {
            p.eta_r = er;
        }
        p
    }

    /// `(omega_I, omega_II) = (omega_0 - (mu + nu), omega_0 + (mu + nu))`.
    pub fn laser_frequencies(&self) -> (f64, f64) {
        (self.omega0 - (self.mu + self.nu), self.omega0 + (self.mu + self.nu))
    }

    /// Real drive envelope `Omega sum_L 2 Re e^{i (omega_0 - omega_L) t} / 2`
    /// of `sigma_xi` in the interaction picture.
    pub fn drive(&self, t: f64) -> f64 {
        let (w1, w2) = self.laser_frequencies();
        self.omega * (((self.omega0 - w1) * t).cos() + ((self.omega0 - w2) * t).cos())
    }

    pub fn coupling(&self, t: f64) -> EffectiveCoupling {
        EffectiveCoupling {
            omega: self.omega,
            eta: self.eta,
            eta_r: self.eta_r,
            t,
        }
    }

    /// Interaction time giving squeezing factor `r = 2 Omega eta eta_r t`.
    pub fn time_for_squeezing(&self, r: f64) -> f64 {
        r / (2.0 * self.omega * self.eta * self.eta_r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("mu", self.mu),
            ("nu", self.nu),
            ("omega", self.omega),
            ("k", self.k),
        ] {
            if !v.is_finite() || v < 0.0 || (v == 0.0 && name != "omega") {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.omega0.is_finite() {
            return Err(Error::InvalidArgument("omega0 must be finite".into()));
        }
        let ok = |x: f64| x > 0.0 && x <= LAMB_DICKE_LIMIT;
        if !ok(self.eta) || !ok(self.eta_r) {
            return Err(Error::LambDicke {
                eta: self.eta,
                eta_r: self.eta_r,
                limit: LAMB_DICKE_LIMIT,
            });
        }
        Ok(())
    }
}

/// Treatment of `cos(k x_i)`. Odd orders vanish at the anti-nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionOrder {
    /// `1 - (kx)^2 / 2`
    #[default]
    Second,
    /// `1 - (kx)^2 / 2 + (kx)^4 / 24`
    Fourth,
    /// `cos(kx)` of the truncated position operator.
    ExactCosine,
}

fn position_quadrature(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    })
}

fn matrix_fn(x: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = x.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn kron_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `cos(eta X_c + sign eta_r X_r)` on `mode_c (x) mode_r`, `X = a + a^dag`.
fn motional_cosine(space: SpaceDescriptor, eta: f64, eta_r: f64, sign: f64, order: ExpansionOrder) -> DMatrix<f64> {
    let (dc, dr) = (space.dim_c(), space.dim_r());
    let xc = position_quadrature(dc) * eta;
    let xr = position_quadrature(dr) * (sign * eta_r);
    let (ic, ir) = (DMatrix::identity(dc, dc), DMatrix::identity(dr, dr));
    match order {
        ExpansionOrder::ExactCosine => {
            // the two truncated quadratures commute, so the addition theorem is exact
            let cc = kron_dense(&matrix_fn(&xc, f64::cos), &matrix_fn(&xr, f64::cos));
            let ss = kron_dense(&matrix_fn(&xc, f64::sin), &matrix_fn(&xr, f64::sin));
            cc - ss
        }
        _ => {
            let kx = kron_dense(&xc, &ir) + kron_dense(&ic, &xr);
            let kx2 = &kx * &kx;
            let id = DMatrix::identity(kx.nrows(), kx.nrows());
            let second = id - &kx2 * 0.5;
            if order == ExpansionOrder::Fourth {
                second + (&kx2 * &kx2) / 24.0
            } else {
                second
            }
        }
    }
}

fn to_csr(m: &DMatrix<f64>) -> CsrMatrix<C64> {
    dense_to_csr(&m.map(|x| C64::new(x, 0.0)))
}

/// Interaction-picture Hamiltonian before the rotating-wave approximation.
#[derive(Debug, Clone)]
pub struct InteractionHamiltonian {
    params: PhysicalParams,
    space: SpaceDescriptor,
    /// `cos(k x_1)`, `cos(k x_2)` at `t = 0` on the motional space.
    cosines: [DMatrix<f64>; 2],
}

impl InteractionHamiltonian {
    pub fn new(params: PhysicalParams, order: ExpansionOrder, space: SpaceDescriptor) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            cosines: [
                motional_cosine(space, params.eta, params.eta_r, -1.0, order),
                motional_cosine(space, params.eta, params.eta_r, 1.0, order),
            ],
            params,
            space,
        })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn energies(&self) -> Vec<f64> {
        let dr = self.space.dim_r();
        (0..self.space.motional_dim())
            .map(|j| self.params.mu * (j / dr) as f64 + self.params.nu * (j % dr) as f64)
            .collect()
    }

    /// `H(t)` on the full composite space.
    pub fn at(&self, t: f64) -> Result<Operator> {
        let e = self.energies();
        let f = self.params.drive(t);
        let mut full = Operator::zero(self.space);
        for (i, cos) in self.cosines.iter().enumerate() {
            let phased = DMatrix::from_fn(cos.nrows(), cos.ncols(), |j, k| {
                C64::from_polar(f * cos[(j, k)], (e[j] - e[k]) * t)
            });
            let id = DMatrix::identity(2, 2);
            let sx = pauli(PauliAxis::X);
            let internal = if i == 0 { two_ion(&sx, &id) } else { two_ion(&id, &sx) };
            let term = Operator::internal_motional(self.space, &internal, &dense_to_csr(&phased))?;
            full = &full + &term;
        }
        Ok(full)
    }

    /// Source for the full composite space.
    pub fn full(&self) -> Result<PhasedHamiltonian> {
        let x1 = two_ion(&pauli(PauliAxis::X), &DMatrix::identity(2, 2));
        let x2 = two_ion(&DMatrix::identity(2, 2), &pauli(PauliAxis::X));
        let k = &Operator::internal_motional(self.space, &x1, &to_csr(&self.cosines[0]))?
            + &Operator::internal_motional(self.space, &x2, &to_csr(&self.cosines[1]))?;
        Ok(PhasedHamiltonian::new(self.params, self.space, 4, k.csr().clone()))
    }

    /// Source for the joint `sigma_x` eigenspace with eigenvalues `(x1, x2)`,
    /// acting on the motional space.
    pub fn sector(&self, x1: f64, x2: f64) -> PhasedHamiltonian {
        let k = &self.cosines[0] * x1 + &self.cosines[1] * x2;
        PhasedHamiltonian::new(self.params, self.space, 1, to_csr(&k))
    }
}

/// `H(t)` on the full space for one instant.
pub fn h_int_picture(
    params: &PhysicalParams,
    order: ExpansionOrder,
    space: SpaceDescriptor,
    t: f64,
) -> Result<Operator> {
    InteractionHamiltonian::new(*params, order, space)?.at(t)
}

/// A Hamiltonian that can be applied at any time.
pub trait TimeDependentHamiltonian {
    fn dim(&self) -> usize;
    /// Writes `-i H(t) psi` into `out`.
    fn derivative(&self, t: f64, psi: &DVector<C64>, out: &mut DVector<C64>);
    /// Bound on the fastest rate (rad/s) present in `H(t)`; caps the step.
    fn max_rate(&self) -> f64;
}

/// `H(t) = f(t) e^{i E t} K e^{-i E t}` with a static `K` and diagonal
/// motional energies `E = mu n_c + nu n_r`.
#[derive(Debug, Clone)]
pub struct PhasedHamiltonian {
    params: PhysicalParams,
    dim_c: usize,
    dim_r: usize,
    blocks: usize,
    k: CsrMatrix<C64>,
    k_norm: f64,
}

impl PhasedHamiltonian {
    fn new(params: PhysicalParams, space: SpaceDescriptor, blocks: usize, k: CsrMatrix<C64>) -> Self {
        let k_norm = k
            .row_iter()
            .map(|r| r.values().iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Self {
            params,
            dim_c: space.dim_c(),
            dim_r: space.dim_r(),
            blocks,
            k,
            k_norm,
        }
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        let pc: Vec<C64> = (0..self.dim_c)
            .map(|n| C64::from_polar(1.0, self.params.mu * t * n as f64))
            .collect();
        let pr: Vec<C64> = (0..self.dim_r)
            .map(|n| C64::from_polar(1.0, self.params.nu * t * n as f64))
            .collect();
        let mut out = Vec::with_capacity(self.dim_c * self.dim_r);
        for c in &pc {
            for r in &pr {
                out.push(c * r);
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        let adj = adjoint_csr(&self.k);
        (&self.k - &adj).values().iter().all(|v| v.norm() <= 1e-12)
    }
}

impl TimeDependentHamiltonian for PhasedHamiltonian {
    fn dim(&self) -> usize {
        self.blocks * self.dim_c * self.dim_r
    }

    fn derivative(&self, t: f64, psi: &DVector<C64>, out: &mut DVector<C64>) {
        let phase = self.phases(t);
        let m = phase.len();
        let f = self.params.drive(t);
        let rotated = DVector::from_fn(psi.len(), |j, _| psi[j] * phase[j % m].conj());
        for (j, row) in self.k.row_iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &x) in row.col_indices().iter().zip(row.values()) {
                acc += x * rotated[c];
            }
            // -i f e^{i E_j t} acc
            out[j] = C64::new(0.0, -f) * phase[j % m] * acc;
        }
    }

    fn max_rate(&self) -> f64 {
        let p = &self.params;
        let spread = p.mu * (self.dim_c - 1) as f64 + p.nu * (self.dim_r - 1) as f64;
        spread + (p.mu + p.nu) + 2.0 * p.omega * self.k_norm
    }
}

/// Constant Hamiltonian, mainly as a reference problem.
#[derive(Debug, Clone)]
pub struct ConstantHamiltonian(pub Operator);

impl TimeDependentHamiltonian for ConstantHamiltonian {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn derivative(&self, _t: f64, psi: &DVector<C64>, out: &mut DVector<C64>) {
        crate::operator::spmv(self.0.csr(), psi, out);
        out.apply(|v| *v *= C64::new(0.0, -1.0));
    }

    fn max_rate(&self) -> f64 {
        self.0
            .csr()
            .row_iter()
            .map(|r| r.values().iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EvolutionStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub norm_drift: f64,
}

struct Rk4Scratch {
    k: [DVector<C64>; 4],
    tmp: DVector<C64>,
}

impl Rk4Scratch {
    fn new(dim: usize) -> Self {
        let z = || DVector::zeros(dim);
        Self {
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    /// Classical RK4 step; `k1 = f(t, y)` must already be in `k[0]`.
    fn step<H: TimeDependentHamiltonian + ?Sized>(&mut self, h: &H, t: f64, y: &DVector<C64>, dt: f64) -> DVector<C64> {
        let half = 0.5 * dt;
        self.tmp.copy_from(y);
        self.tmp.axpy(C64::new(half, 0.0), &self.k[0], C64::new(1.0, 0.0));
        let (k0, rest) = self.k.split_at_mut(1);
        h.derivative(t + half, &self.tmp, &mut rest[0]);
        self.tmp.copy_from(y);
        self.tmp.axpy(C64::new(half, 0.0), &rest[0], C64::new(1.0, 0.0));
        h.derivative(t + half, &self.tmp, &mut rest[1]);
        self.tmp.copy_from(y);
        self.tmp.axpy(C64::new(dt, 0.0), &rest[1], C64::new(1.0, 0.0));
        h.derivative(t + dt, &self.tmp, &mut rest[2]);
        let mut out = y.clone();
        let w = dt / 6.0;
        out.axpy(C64::new(w, 0.0), &k0[0], C64::new(1.0, 0.0));
        out.axpy(C64::new(2.0 * w, 0.0), &rest[0], C64::new(1.0, 0.0));
        out.axpy(C64::new(2.0 * w, 0.0), &rest[1], C64::new(1.0, 0.0));
        out.axpy(C64::new(w, 0.0), &rest[2], C64::new(1.0, 0.0));
        out
    }
}

fn check_span(t0: f64, t1: f64) -> Result<()> {
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(Error::InvalidArgument(format!("invalid time span [{t0}, {t1}]")));
    }
    Ok(())
}

fn check_input<H: TimeDependentHamiltonian + ?Sized>(h: &H, psi0: &DVector<C64>) -> Result<()> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.len(),
        });
    }
    let norm_sq = psi0.norm_squared();
    if (norm_sq - 1.0).abs() > crate::state::NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// Adaptive RK4 with step doubling. Each step is accepted when the
/// doubling estimate of its local error is at most `tol dt / (t1 - t0)`,
/// then advanced with the Richardson-extrapolated (fifth-order) value, so
/// the accumulated error stays below `tol`. Steps never exceed
/// `0.5 / max_rate`.
pub fn evolve_vector<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    psi0: &DVector<C64>,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<(DVector<C64>, EvolutionStats)> {
    check_span(t0, t1)?;
    check_input(h, psi0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("integrator tolerance must be positive, got {tol}")));
    }
    let mut stats = EvolutionStats {
        min_step: f64::INFINITY,
        ..Default::default()
    };
    let span = t1 - t0;
    let mut y = psi0.clone();
    if span == 0.0 {
        stats.min_step = 0.0;
        return Ok((y, stats));
    }
    let rate = h.max_rate();
    let cap = if rate > 0.0 { (0.5 / rate).min(span) } else { span };
    let mut scratch = Rk4Scratch::new(h.dim());
    let mut k1 = DVector::zeros(h.dim());
    let mut t = t0;
    let mut dt = cap;
    while t < t1 {
        if dt < span * 1e-13 {
            return Err(Error::StepUnderflow { time: t, step: dt });
        }
        let this = dt.min(t1 - t);
        h.derivative(t, &y, &mut k1);
        scratch.k[0].copy_from(&k1);
        let full = scratch.step(h, t, &y, this);
        scratch.k[0].copy_from(&k1);
        let mid = scratch.step(h, t, &y, 0.5 * this);
        h.derivative(t + 0.5 * this, &mid, &mut scratch.k[0]);
        let two_half = scratch.step(h, t + 0.5 * this, &mid, 0.5 * this);
        let diff = &two_half - &full;
        let err = diff.iter().map(|v| v.norm()).fold(0.0, f64::max) / 15.0;
        let allowed = tol * this / span;
        if err <= allowed {
            y = two_half + diff / C64::new(15.0, 0.0);
            t = if this == t1 - t { t1 } else { t + this };
            stats.accepted_steps += 1;
            stats.min_step = stats.min_step.min(this);
            stats.max_step = stats.max_step.max(this);
        } else {
            stats.rejected_steps += 1;
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 4.0)
        };
        dt = (this * factor).min(cap);
    }
    stats.norm_drift = (y.norm() - 1.0).abs();
    if stats.norm_drift > NORM_DRIFT_TOL {
        return Err(Error::NormDrift {
            drift: stats.norm_drift,
            tolerance: NORM_DRIFT_TOL,
        });
    }
    Ok((y, stats))
}

/// [`evolve_vector`] on composite-space states.
pub fn evolve_td<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<StateVector> {
    let (y, _) = evolve_vector(h, psi0.amplitudes(), t0, t1, tol)?;
    StateVector::from_amplitudes(psi0.space(), y)
}

/// Classical RK4 with `steps` equal steps and no error control.
pub fn evolve_fixed<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    psi0: &DVector<C64>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<DVector<C64>> {
    check_span(t0, t1)?;
    check_input(h, psi0)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut scratch = Rk4Scratch::new(h.dim());
    let mut y = psi0.clone();
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        h.derivative(t, &y, &mut scratch.k[0]);
        y = scratch.step(h, t, &y, dt);
    }
    Ok(y)
}

/// One point of a rotating-wave validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaPoint {
    pub eta: f64,
    pub eta_r: f64,
    pub omega: f64,
    pub nu: f64,
    pub t_final: f64,
    pub infidelity: f64,
    pub stats: EvolutionStats,
}

/// `1 - |<psi_full|psi_eff>|^2` at `t_final`, both evolved from
/// `1/2 (|e> - |g>)(|e> + |g>)|00>`: `psi_full` under [`InteractionHamiltonian`],
/// `psi_eff` under [`u_squeeze`] with `G = -i Omega eta eta_r t_final`.
pub fn rwa_infidelity(
    params: &PhysicalParams,
    space: SpaceDescriptor,
    t_final: f64,
    order: ExpansionOrder,
    tol: &Tolerances,
) -> Result<RwaPoint> {
    let ham = InteractionHamiltonian::new(*params, order, space)?;
    let psi0 = initial_squeeze_state(space);
    // the initial internal state is the sigma_x eigenvector (-1, +1)
    let sector = ham.sector(-1.0, 1.0);
    let vacuum = MotionalState::vacuum(space).flat();
    let (motion, stats) = evolve_vector(&sector, &vacuum, 0.0, t_final, tol.integrator)?;
    let internal = [0.5, 0.5, -0.5, -0.5].map(|x| C64::new(x, 0.0));
    let full = StateVector::product(&internal, &MotionalState::from_flat(space, motion));

    let g = params.coupling(t_final).g();
    let eff = u_squeeze(space, g, tol)?.apply(&psi0)?;
    let overlap = inner(&full, &eff)?.norm_sqr();
    Ok(RwaPoint {
        eta: params.eta,
        eta_r: params.eta_r,
        omega: params.omega,
        nu: params.nu,
        t_final,
        infidelity: (1.0 - overlap).max(0.0),
        stats,
    })
}

/// [`rwa_infidelity`] at the time giving squeezing factor `r`.
pub fn rwa_point(
    params: &PhysicalParams,
    space: SpaceDescriptor,
    r: f64,
    order: ExpansionOrder,
    tol: &Tolerances,
) -> Result<RwaPoint> {
    params.validate()?;
    rwa_infidelity(params, space, params.time_for_squeezing(r), order, tol)
}
