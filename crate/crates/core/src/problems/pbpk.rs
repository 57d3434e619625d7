//! Physiologically based pharmacokinetic model of an orally dosed drug with
//! transporter-mediated hepatic uptake and enterohepatic circulation.
//!
//! State layout (0-based here, 20 states):
//!
//! | index | compartment |
//! |-------|-------------|
//! | 0 | blood (observed) |
//! | 1, 2, 3 | muscle, skin, adipose |
//! | 4, 6, 8, 10, 12 | liver sinusoid segments 1–5 |
//! | 5, 7, 9, 11, 13 | hepatocyte segments 1–5 |
//! | 14, 15, 16 | bile transit compartments |
//! | 17 | intestine (dose site) |
//! | 18, 19 | unused, identically zero |

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ode::{self, DoseEvent, IntegratorConfig, OdeSystem};
use crate::problem::Model;

pub const PBPK_STATES: usize = 20;
pub const PBPK_PARAMS: usize = 9;
pub const PBPK_TIMES: [f64; 10] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 24.0, 36.0, 48.0, 72.0];
const BLOOD: usize = 0;
const INTESTINE: usize = 17;

/// Generating parameters of the synthetic multi-dose dataset.
pub const PBPK_TRUTH: [f64; PBPK_PARAMS] = [1.0, 0.5, 2.0, 0.0, 1.0, 0.7, 3.5, 0.0, -0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoseLevel {
    Low,
    Mid,
    High,
}

impl DoseLevel {
    pub const ALL: [DoseLevel; 3] = [DoseLevel::Low, DoseLevel::Mid, DoseLevel::High];

    pub fn amount(self) -> f64 {
        match self {
            DoseLevel::Low => 30_000.0,
            DoseLevel::Mid => 100_000.0,
            DoseLevel::High => 300_000.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DoseLevel::Low => "low",
            DoseLevel::Mid => "mid",
            DoseLevel::High => "high",
        }
    }
}

/// Physiological constants held fixed during estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physiology {
    pub cl_r: f64,
    pub fa_fg: f64,
    pub kp_a: f64,
    pub kp_m: f64,
    pub kp_s: f64,
    pub q_a: f64,
    pub q_h: f64,
    pub q_m: f64,
    pub q_s: f64,
    pub v_a: f64,
    pub v_hc: f64,
    pub v_he: f64,
    pub v_m: f64,
    pub v_s: f64,
    pub f_b: f64,
    pub f_h: f64,
}

impl Default for Physiology {
    fn default() -> Self {
        Self {
            cl_r: 0.0,
            fa_fg: 0.55,
            kp_a: 0.086,
            kp_m: 0.113,
            kp_s: 0.478,
            q_a: 15.61,
            q_h: 86.94,
            q_m: 44.94,
            q_s: 17.99,
            v_a: 10.01,
            v_hc: 1.218,
            v_he: 0.469,
            v_m: 30.03,
            v_s: 7.77,
            f_b: 0.00617,
            f_h: 0.012,
        }
    }
}

/// Drug-specific kinetic parameters in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinetics {
    pub cl_bile: f64,
    pub cl_met: f64,
    pub km_uptake: f64,
    pub kp_scalar: f64,
    pub ps_dif: f64,
    pub v_b: f64,
    pub vmax_uptake: f64,
    pub ka: f64,
    pub k_bile: f64,
}

impl Kinetics {
    /// Maps the 9 unconstrained estimation parameters: `10^x` for the rate,
    /// volume and Michaelis constants, logistic for the partition scalar.
    pub fn from_params(x: &[f64]) -> Self {
        let p = |v: f64| 10f64.powf(v);
        Self {
            cl_bile: p(x[0]),
            cl_met: p(x[1]),
            km_uptake: p(x[2]),
            kp_scalar: 1.0 / (1.0 + (-x[3]).exp()),
            ps_dif: p(x[4]),
            v_b: p(x[5]),
            vmax_uptake: p(x[6]),
            ka: p(x[7]),
            k_bile: p(x[8]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbpkSystem {
    pub phys: Physiology,
    pub kin: Kinetics,
}

impl PbpkSystem {
    pub fn new(phys: Physiology, kin: Kinetics) -> Self {
        Self { phys, kin }
    }

    /// Saturable uptake rate coefficient `Vmax / (Km + c)` and its
    /// derivative of `c · coeff` with respect to `c`. Negative round-off in
    /// `c` is not allowed to move the pole.
    fn uptake(&self, c: f64) -> (f64, f64) {
        let km = self.kin.km_uptake;
        let denom = km + c.max(0.0);
        let coeff = self.kin.vmax_uptake / denom;
        let slope = if c > 0.0 { self.kin.vmax_uptake * km / (denom * denom) } else { coeff };
        (coeff, slope)
    }
}

impl OdeSystem for PbpkSystem {
    fn dim(&self) -> usize {
        PBPK_STATES
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) {
        let ph = &self.phys;
        let k = &self.kin;
        let kps = k.kp_scalar;
        let seg = ph.v_hc / 5.0;

        du[0] = (ph.q_h * (u[12] - u[0])
            - ph.cl_r * u[0]
            - ph.q_m * (u[0] - u[1] / (ph.kp_m * kps))
            - ph.q_s * (u[0] - u[2] / (ph.kp_s * kps))
            - ph.q_a * (u[0] - u[3] / (ph.kp_a * kps)))
            / k.v_b;
        du[1] = ph.q_m / ph.v_m * (u[0] - u[1] / (ph.kp_m * kps));
        du[2] = ph.q_s / ph.v_s * (u[0] - u[2] / (ph.kp_s * kps));
        du[3] = ph.q_a / ph.v_a * (u[0] - u[3] / (ph.kp_a * kps));

        let hep_out = ph.f_h * (k.ps_dif + k.cl_met + k.cl_bile) / ph.v_he;
        let mut hep_sum = 0.0;
        for i in 0..5 {
            let s = 4 + 2 * i;
            let h = s + 1;
            let (coeff, _) = self.uptake(u[s]);
            let influx = (coeff + ph.f_b * k.ps_dif) * u[s];
            let inflow = if i == 0 { ph.q_h * (u[0] - u[s]) + k.ka * u[INTESTINE] } else { ph.q_h * (u[s - 2] - u[s]) };
            du[s] = -influx / ph.v_hc + ph.f_h * k.ps_dif / ph.v_hc * u[h] + inflow / seg;
            du[h] = influx / ph.v_he - hep_out * u[h];
            hep_sum += u[h];
        }

        du[14] = ph.f_h * k.cl_bile * hep_sum / 5.0 - k.k_bile * u[14];
        du[15] = k.k_bile * (u[14] - u[15]);
        du[16] = k.k_bile * (u[15] - u[16]);
        du[17] = k.k_bile * u[16] - k.ka / ph.fa_fg * u[17];
        du[18] = 0.0;
        du[19] = 0.0;
    }

    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let ph = &self.phys;
        let k = &self.kin;
        let kps = k.kp_scalar;
        let seg = ph.v_hc / 5.0;
        jac.fill(0.0);

        jac[(0, 0)] = -(ph.q_h + ph.cl_r + ph.q_m + ph.q_s + ph.q_a) / k.v_b;
        jac[(0, 1)] = ph.q_m / (ph.kp_m * kps) / k.v_b;
        jac[(0, 2)] = ph.q_s / (ph.kp_s * kps) / k.v_b;
        jac[(0, 3)] = ph.q_a / (ph.kp_a * kps) / k.v_b;
        jac[(0, 12)] = ph.q_h / k.v_b;
        for (row, q, v, kp) in [(1, ph.q_m, ph.v_m, ph.kp_m), (2, ph.q_s, ph.v_s, ph.kp_s), (3, ph.q_a, ph.v_a, ph.kp_a)] {
            jac[(row, 0)] = q / v;
            jac[(row, row)] = -q / v / (kp * kps);
        }

        let hep_out = ph.f_h * (k.ps_dif + k.cl_met + k.cl_bile) / ph.v_he;
        for i in 0..5 {
            let s = 4 + 2 * i;
            let h = s + 1;
            let (_, slope) = self.uptake(u[s]);
            let dinflux = slope + ph.f_b * k.ps_dif;
            jac[(s, s)] = -dinflux / ph.v_hc - ph.q_h / seg;
            jac[(s, h)] = ph.f_h * k.ps_dif / ph.v_hc;
            if i == 0 {
                jac[(s, 0)] = ph.q_h / seg;
                jac[(s, INTESTINE)] = k.ka / seg;
            } else {
                jac[(s, s - 2)] = ph.q_h / seg;
            }
            jac[(h, s)] = dinflux / ph.v_he;
            jac[(h, h)] = -hep_out;
            jac[(14, h)] = ph.f_h * k.cl_bile / 5.0;
        }
        jac[(14, 14)] = -k.k_bile;
        jac[(15, 14)] = k.k_bile;
        jac[(15, 15)] = -k.k_bile;
        jac[(16, 15)] = k.k_bile;
        jac[(16, 16)] = -k.k_bile;
        jac[(17, 16)] = k.k_bile;
        jac[(17, 17)] = -k.ka / ph.fa_fg;
        true
    }

    fn autonomous(&self) -> bool {
        true
    }
}

/// Blood concentration at `times` after a single oral dose, `None` when the
/// integration fails.
pub fn simulate_blood(
    system: &PbpkSystem,
    dose: f64,
    times: &[f64],
    config: &IntegratorConfig,
) -> Option<Vec<f64>> {
    let u0 = [0.0; PBPK_STATES];
    let events = [DoseEvent::set(0.0, INTESTINE, dose)];
    let sol = ode::integrate(system, &u0, &events, times, config).ok()?;
    Some(sol.component(BLOOD))
}

/// Blood concentrations for one dose level, `None` if not evaluable.
pub fn eval_pbpk(x: &[f64], dose: DoseLevel, times: &[f64]) -> Option<Vec<f64>> {
    let system = PbpkSystem::new(Physiology::default(), Kinetics::from_params(x));
    simulate_blood(&system, dose.amount(), times, &IntegratorConfig::default())
}

/// Multi-dose observation model: blood concentrations for the low, mid and
/// high dose concatenated (30 outputs with the default times).
#[derive(Debug, Clone)]
pub struct PbpkModel {
    pub phys: Physiology,
    pub doses: Vec<DoseLevel>,
    pub times: Vec<f64>,
    pub integrator: IntegratorConfig,
}

impl Default for PbpkModel {
    fn default() -> Self {
        Self {
            phys: Physiology::default(),
            doses: DoseLevel::ALL.to_vec(),
            times: PBPK_TIMES.to_vec(),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl PbpkModel {
    /// `(time, dose)` label of each output.
    pub fn observation_labels(&self) -> Vec<(f64, DoseLevel)> {
        self.doses
            .iter()
            .flat_map(|&d| self.times.iter().map(move |&t| (t, d)))
            .collect()
    }
}

impl Model for PbpkModel {
    fn dim_x(&self) -> usize {
        PBPK_PARAMS
    }

    fn dim_y(&self) -> usize {
        self.doses.len() * self.times.len()
    }

    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        let system = PbpkSystem::new(self.phys, Kinetics::from_params(x));
        let mut out = Vec::with_capacity(self.dim_y());
        for dose in &self.doses {
            out.extend(simulate_blood(&system, dose.amount(), &self.times, &self.integrator)?);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_partition_scalar() {
        let k = Kinetics::from_params(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(k.kp_scalar, 0.5);
        for x4 in [-30.0, -3.0, 3.0, 30.0] {
            let mut x = [0.0; 9];
            x[3] = x4;
            let kp = Kinetics::from_params(&x).kp_scalar;
            assert!(kp > 0.0 && kp <= 1.0);
        }
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let sys = PbpkSystem::new(Physiology::default(), Kinetics::from_params(&PBPK_TRUTH));
        let u: Vec<f64> = (0..PBPK_STATES).map(|i| 1.0 + 37.0 * ((i * 7) % 11) as f64).collect();
        let mut jac = DMatrix::zeros(PBPK_STATES, PBPK_STATES);
        assert!(sys.jacobian(0.0, &u, &mut jac));
        let mut f0 = vec![0.0; PBPK_STATES];
        sys.rhs(0.0, &u, &mut f0);
        for j in 0..PBPK_STATES {
            let mut up = u.clone();
            let h = 1e-6 * u[j].abs().max(1.0);
            up[j] += h;
            let mut f1 = vec![0.0; PBPK_STATES];
            sys.rhs(0.0, &up, &mut f1);
            for i in 0..PBPK_STATES {
                let fd = (f1[i] - f0[i]) / h;
                let tol = 1e-5 * jac[(i, j)].abs().max(1.0);
                assert!((fd - jac[(i, j)]).abs() < tol, "J[{i},{j}] = {} vs fd {fd}", jac[(i, j)]);
            }
        }
    }

    #[test]
    fn model_output_dimension() {
        let m = PbpkModel::default();
        assert_eq!(m.dim_y(), 30);
        assert_eq!(m.observation_labels()[10], (2.0, DoseLevel::Mid));
    }
}
