//! Global small-data conditions.
//!
//! The generic constants of the small-data argument are assembled from the
//! sampled embedding constants by explicit Young splittings, each of which
//! spends `nu0/8` of the Stokes dissipation:
//!
//! ```text
//! c_g   = 2 max(1, c_hat)              (|grad eta|_4 + |grad m_a|_4)^2 <= c_g Pi
//! C_th  = 2 e5^2 / theta
//! Ct    = 6 / nu0                      coefficient of |eta|^2, |m_a|^2, |f|^2
//! Kt    = 1 / C_P^2,   Khat = 2 Ct / (theta Kt)
//! K3    = nu1 + 2 nu1' e6b c_g^{1/2}
//! Ch1   = max(54 q^4 / nu0^3, 5 C_th c_g q^4)
//! Ch2   = 54 (2 nu1' e6)^4 c_g^2 / nu0^3
//! Ch3   = 10 C_th c_g
//! Ch4   = Khat e4^2 / alpha1 + 10 C_th c_g (K3^2 + 1/2)
//! Ch5   = Ch6 = max(6 / nu0, 10 C_th c_g)
//! D1 = Ch1,  D2 = max(Ch2, Ch3 / Khat),  D3 = min(nu0 alpha1 / 2, theta Kt / 2)
//! D4 = 4 max(1, e4^2 max(1, c_hat), U c_a^2)
//! D5 = 2 Ch5 |f|^2_{L2(0,inf;L2)} + 2 Ch6 |m_a|^2
//! ```

use super::polynomial::{polynomial_p_roots, CubicRoots};
use super::sampled::SampledConstants;
use crate::domain_grid::{lp_norm, Lp};
use crate::evolution::{GalerkinState, GalerkinSystem};
use crate::operators::constants::{estimate_poincare, Labeled, PoincareClass};
use crate::stationary::{solve_malpha, AuxiliaryMalpha};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallnessConstants {
    pub values: BTreeMap<String, Labeled>,
}

impl SmallnessConstants {
    pub fn get(&self, k: &str) -> f64 {
        self.values.get(k).map_or(f64::NAN, |l| l.value)
    }
}

/// Scalar inputs of the small-data argument.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallDataInputs {
    pub nu0: f64,
    pub nu1: f64,
    pub nu1_prime: f64,
    pub theta: f64,
    pub u_swim: f64,
    pub alpha1: f64,
    pub c_p: f64,
    pub grad_malpha_l4: f64,
    pub malpha_l2: f64,
    /// `|f|^2_{L2(0, inf; L2)}`; infinite unless the schedule ends at zero.
    pub f_sq_integral: f64,
}

pub fn smallness_constants(inp: &SmallDataInputs, s: &SampledConstants) -> SmallnessConstants {
    let (nu0, nu1, nu1p, theta) = (inp.nu0, inp.nu1, inp.nu1_prime, inp.theta);
    let c_hat = s.c_hat.value;
    let cg = 2.0 * c_hat.max(1.0);
    let cth = 2.0 * s.e5.value.powi(2) / theta;
    let ct = 6.0 / nu0;
    let kt = 1.0 / (inp.c_p * inp.c_p);
    let khat = 2.0 * ct / (theta * kt);
    let k3 = nu1 + 2.0 * nu1p * s.e6b.value * cg.sqrt();
    let q4 = s.q_adv.value.powi(4);
    let ch1 = (54.0 * q4 / nu0.powi(3)).max(5.0 * cth * cg * q4);
    let ch2 = 54.0 * (2.0 * nu1p * s.e6.value).powi(4) * cg * cg / nu0.powi(3);
    let ch3 = 10.0 * cth * cg;
    let ch4 = khat * s.e4.value.powi(2) / inp.alpha1 + 10.0 * cth * cg * (k3 * k3 + 0.5);
    let ch5 = (6.0 / nu0).max(10.0 * cth * cg);
    let d1 = ch1;
    let d2 = ch2.max(ch3 / khat);
    let d3 = (nu0 * inp.alpha1 / 2.0).min(theta * kt / 2.0);
    let d4 = 4.0 * 1f64.max(s.e4.value.powi(2) * c_hat.max(1.0)).max(inp.u_swim.abs() * s.c_a.value.powi(2));
    let d5 = 2.0 * ch5 * inp.f_sq_integral + 2.0 * ch5 * inp.malpha_l2.powi(2);
    let mut v = BTreeMap::new();
    let mut put = |k: &str, val: f64, recipe: &str| {
        v.insert(k.to_string(), Labeled::formula(val, recipe));
    };
    put("c_g", cg, "2 max(1, c_hat)");
    put("C_theta", cth, "2 e5^2 / theta");
    put("C_tilde", ct, "6 / nu0");
    put("K_tilde", kt, "1 / C_P^2");
    put("K_hat", khat, "2 C_tilde / (theta K_tilde)");
    put("K3", k3, "nu1 + 2 nu1' e6b c_g^{1/2}");
    put("Ch1", ch1, "max(54 q^4 / nu0^3, 5 C_theta c_g q^4)");
    put("Ch2", ch2, "54 (2 nu1' e6)^4 c_g^2 / nu0^3");
    put("Ch3", ch3, "10 C_theta c_g");
    put("Ch4", ch4, "K_hat e4^2 / alpha1 + 10 C_theta c_g (K3^2 + 1/2)");
    put("Ch5", ch5, "max(6 / nu0, 10 C_theta c_g)");
    put("Ch6", ch5, "equal to Ch5");
    put("D1", d1, "Ch1");
    put("D2", d2, "max(Ch2, Ch3 / K_hat)");
    put("D3", d3, "min(nu0 alpha1 / 2, theta K_tilde / 2)");
    put("D4", d4, "4 max(1, e4^2 max(1, c_hat), U c_a^2)");
    put("D5", d5, "2 Ch5 |f|^2_{L2(0,inf;L2)} + 2 Ch6 |m_alpha|^2");
    for (k, l) in [
        ("c_hat", &s.c_hat),
        ("e4", &s.e4),
        ("e5", &s.e5),
        ("e6", &s.e6),
        ("e6b", &s.e6b),
        ("q_adv", &s.q_adv),
        ("c_a", &s.c_a),
    ] {
        v.insert(k.to_string(), l.clone());
    }
    v.insert("C_P".into(), Labeled::estimate(inp.c_p, "mean-zero scalar Poincare constant"));
    v.insert("alpha1".into(), Labeled::estimate(inp.alpha1, "smallest Stokes eigenvalue"));
    SmallnessConstants { values: v }
}

/// Largest `beta` admitted by the three conditions on beta, taken as equalities.
pub fn beta_max(c: &SmallnessConstants, nu0: f64) -> f64 {
    let ch4 = c.get("Ch4");
    let b2 = if ch4 > 0.0 { (nu0 / (4.0 * ch4)).powi(2) } else { f64::INFINITY };
    let (d2, d3) = (c.get("D2"), c.get("D3"));
    // D2 (b + b^4) = D3/2 has a unique positive root
    let mut lo = 0.0;
    let mut hi = 1.0_f64;
    while d2 * (hi + hi.powi(4)) < 0.5 * d3 && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d2 * (mid + mid.powi(4)) < 0.5 * d3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1f64.min(b2).min(lo)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// `rhs / lhs`; infinite when the left side vanishes.
    pub ratio: f64,
    pub pass: bool,
}

impl Condition {
    /// Strict `lhs < rhs`.
    pub fn strict(name: &str, lhs: f64, rhs: f64) -> Self {
        Condition {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            ratio: if lhs > 0.0 { rhs / lhs } else { f64::INFINITY },
            pass: lhs < rhs,
        }
    }
}

/// Initial-data norms entering the conditions.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct InitialNorms {
    pub du0_sq: f64,
    pub eta0_sq: f64,
    pub lap_eta0_sq: f64,
    pub u0_l4: f64,
    pub grad_eta0_l4: f64,
    pub grad_eta0_sq: f64,
    pub a1_eta0_sq: f64,
}

impl InitialNorms {
    pub fn of_state(sys: &GalerkinSystem, s: &GalerkinState) -> Self {
        let d = &sys.domain;
        let eta = s.eta();
        let g = sys.basis.concentration.reconstruct_with_gradient(d, &eta);
        let ef = sys.basis.concentration.reconstruct(d, &eta);
        let lap = d.laplacian(&ef);
        let n = d.npts();
        let g2: Vec<f64> = (0..n).map(|i| g.phix[i].powi(2) + g.phiz[i].powi(2)).collect();
        InitialNorms {
            du0_sq: 0.5 * s.c.iter().zip(&sys.alpha_v).map(|(c, a)| a * c * c).sum::<f64>(),
            eta0_sq: eta.iter().map(|v| v * v).sum(),
            lap_eta0_sq: d.integrate(&lap.data.iter().map(|v| v * v).collect::<Vec<_>>()),
            u0_l4: lp_norm(d, &sys.velocity(s), Lp::P4),
            grad_eta0_l4: d.integrate(&g2.iter().map(|v| v * v).collect::<Vec<_>>()).max(0.0).powf(0.25),
            grad_eta0_sq: d.integrate(&g2),
            a1_eta0_sq: eta.iter().zip(&sys.beta).map(|(e, b)| (b * e).powi(2)).sum(),
        }
    }

    /// Norms of the datum multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let s2 = s * s;
        InitialNorms {
            du0_sq: self.du0_sq * s2,
            eta0_sq: self.eta0_sq * s2,
            lap_eta0_sq: self.lap_eta0_sq * s2,
            u0_l4: self.u0_l4 * s.abs(),
            grad_eta0_l4: self.grad_eta0_l4 * s.abs(),
            grad_eta0_sq: self.grad_eta0_sq * s2,
            a1_eta0_sq: self.a1_eta0_sq * s2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub beta: f64,
    pub beta_max: f64,
    pub constants: SmallnessConstants,
    pub inputs: SmallDataInputs,
    pub initial: InitialNorms,
    pub roots: Option<CubicRoots>,
    pub z2: Option<f64>,
    pub conditions: Vec<Condition>,
    pub pass: bool,
    /// Smallest `rhs/lhs` over all conditions.
    pub min_ratio: f64,
}

/// `|f|^2` integrated over all time with the configured schedule.
pub fn forcing_sq_integral(sys: &GalerkinSystem) -> f64 {
    let d = &sys.domain;
    let f_sq = d.inner_vec(&sys.f_field, &sys.f_field);
    if f_sq == 0.0 {
        return 0.0;
    }
    let s = &sys.config.forcing.schedule;
    match s.last() {
        None => f64::INFINITY,
        Some(p) if p[1] != 0.0 => f64::INFINITY,
        Some(_) => {
            let mut acc = 0.0;
            for w in s.windows(2) {
                acc += w[0][1].powi(2) * (w[1][0] - w[0][0].max(0.0)).max(0.0);
            }
            f_sq * acc
        }
    }
}

pub fn small_data_inputs(sys: &GalerkinSystem, malpha: &AuxiliaryMalpha) -> Result<SmallDataInputs> {
    let m = &sys.config.model;
    Ok(SmallDataInputs {
        nu0: sys.nu0,
        nu1: sys.viscosity.nu1(),
        nu1_prime: sys.viscosity.nu1_prime(),
        theta: m.theta,
        u_swim: m.u_swim,
        alpha1: sys.alpha_v.iter().cloned().fold(f64::INFINITY, f64::min),
        c_p: estimate_poincare(&sys.domain, PoincareClass::MeanZeroScalar)?.c_p,
        grad_malpha_l4: malpha.diagnostics.grad_l4,
        malpha_l2: malpha.l2(),
        f_sq_integral: forcing_sq_integral(sys),
    })
}

/// Evaluates every small-data condition for the configured data. `beta`
/// defaults to half the largest admissible value.
pub fn global_smallness_check(
    sys: &GalerkinSystem,
    sampled: &SampledConstants,
    beta: Option<f64>,
) -> Result<SmallnessReport> {
    let m = &sys.config.model;
    let owned;
    let malpha = match &sys.malpha {
        Some(a) => a,
        None => {
            owned = solve_malpha(&sys.domain, m.theta, m.u_swim, m.alpha)?;
            &owned
        }
    };
    let inputs = small_data_inputs(sys, malpha)?;
    let s0 = sys.initial_state()?;
    let initial = InitialNorms::of_state(sys, &s0);
    Ok(evaluate_conditions(inputs, initial, sampled, beta))
}

pub fn evaluate_conditions(
    inputs: SmallDataInputs,
    initial: InitialNorms,
    sampled: &SampledConstants,
    beta: Option<f64>,
) -> SmallnessReport {
    let c = smallness_constants(&inputs, sampled);
    let bmax = beta_max(&c, inputs.nu0);
    let beta = beta.unwrap_or(0.5 * bmax);
    let (theta, u) = (inputs.theta, inputs.u_swim.abs());
    let gm4 = inputs.grad_malpha_l4.powi(2);
    let roots = if c.get("D5").is_finite() { polynomial_p_roots(c.get("D1"), c.get("D3"), c.get("D5")).ok() } else { None };
    let z2 = roots.as_ref().and_then(|r| r.z2);
    let mut conds = vec![
        Condition::strict("beta < 1", beta, 1.0),
        Condition::strict("Ch4 beta^{1/2} < nu0/4", c.get("Ch4") * beta.sqrt(), inputs.nu0 / 4.0),
        Condition::strict("D2 (beta + beta^4) < D3/2", c.get("D2") * (beta + beta.powi(4)), c.get("D3") / 2.0),
        Condition::strict("2 U C_P < theta/4", 2.0 * u * inputs.c_p, theta / 4.0),
        Condition::strict("|grad m_a|_4^2 + U C_P/2 < theta K_tilde/2", gm4 + u * inputs.c_p / 2.0, theta * c.get("K_tilde") / 2.0),
        Condition::strict("|grad m_a|_4^2 < beta/8", gm4, beta / 8.0),
        Condition::strict("|A1 eta0|^2 < beta/10", initial.a1_eta0_sq, beta / 10.0),
    ];
    match z2 {
        Some(z2) => {
            let d4 = c.get("D4");
            conds.push(Condition::strict(
                "D4 z2 (1 + |grad m_a|_4^2) + D4 (z2 + U) beta < beta/4",
                d4 * z2 * (1.0 + gm4) + d4 * (z2 + u) * beta,
                beta / 4.0,
            ));
            let dt_eta = 4.0
                * (theta * theta * initial.lap_eta0_sq
                    + initial.u0_l4.powi(2) * initial.grad_eta0_l4.powi(2)
                    + initial.u0_l4.powi(2) * gm4
                    + u * u * initial.grad_eta0_sq);
            conds.push(Condition::strict("|d_t eta0|^2 bound < z2/8", dt_eta, z2 / 8.0));
            conds.push(Condition::strict(
                "|D u0|^2 + K_hat |eta0|^2 < z2/8",
                initial.du0_sq + c.get("K_hat") * initial.eta0_sq,
                z2 / 8.0,
            ));
        }
        None => conds.push(Condition::strict("p has three simple real roots", 1.0, 0.0)),
    }
    let pass = conds.iter().all(|c| c.pass);
    let min_ratio = conds.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    SmallnessReport { beta, beta_max: bmax, constants: c, inputs, initial, roots, z2, conditions: conds, pass, min_ratio }
}
