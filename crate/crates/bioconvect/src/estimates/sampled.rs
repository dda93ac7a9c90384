//! Embedding constants estimated as maxima of Rayleigh-type quotients over
//! random band-limited samples of the Galerkin spaces.

use crate::evolution::{GalerkinState, GalerkinSystem};
use crate::operators::constants::Labeled;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledConstants {
    /// `|grad phi|_4^2 <= c_hat |A1 phi|^2`
    pub c_hat: Labeled,
    /// `|u|_4 <= e4 |D u|`
    pub e4: Labeled,
    /// `|phi|_4 <= e5 |grad phi|`
    pub e5: Labeled,
    /// `|D u|_4 <= e6 |D u|^{1/2} |A u|^{1/2}`
    pub e6: Labeled,
    /// `|D u|_4 <= e6b |A u|`
    pub e6b: Labeled,
    /// `|(u.grad u, A u)| <= q_adv |D u|^{3/2} |A u|^{3/2}`
    pub q_adv: Labeled,
    /// `|grad phi| <= c_a |A1 phi|`
    pub c_a: Labeled,
    /// `a(phi, phi) >= kappa_a |grad phi|^2` (a minimum)
    pub kappa_a: Labeled,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct VelQ {
    e4: f64,
    e6: f64,
    e6b: f64,
    q_adv: f64,
}

#[derive(Clone, Copy, Debug)]
struct ScalQ {
    c_hat: f64,
    e5: f64,
    c_a: f64,
    kappa_a: f64,
}

fn velocity_quotients(sys: &GalerkinSystem, c: &[f64]) -> Option<VelQ> {
    let d = &sys.domain;
    let g = sys.basis.velocity.reconstruct_with_gradient(d, c);
    let ac: Vec<f64> = c.iter().zip(&sys.alpha_v).map(|(x, a)| a * x).collect();
    let au = sys.basis.velocity.reconstruct(d, &ac);
    let du = (0.5 * c.iter().zip(&sys.alpha_v).map(|(x, a)| a * x * x).sum::<f64>()).sqrt();
    let aun = ac.iter().map(|x| x * x).sum::<f64>().sqrt();
    if du <= 1e-300 || aun <= 1e-300 {
        return None;
    }
    let n = d.npts();
    let mut u4 = vec![0.0; n];
    let mut du4 = vec![0.0; n];
    let mut adv = vec![0.0; n];
    for i in 0..n {
        u4[i] = (g.u[i] * g.u[i] + g.w[i] * g.w[i]).powi(2);
        let dxz = 0.5 * (g.uz[i] + g.wx[i]);
        du4[i] = (g.ux[i] * g.ux[i] + g.wz[i] * g.wz[i] + 2.0 * dxz * dxz).powi(2);
        adv[i] = (g.u[i] * g.ux[i] + g.w[i] * g.uz[i]) * au.u.data[i] + (g.u[i] * g.wx[i] + g.w[i] * g.wz[i]) * au.w.data[i];
    }
    let u_l4 = d.integrate(&u4).max(0.0).powf(0.25);
    let du_l4 = d.integrate(&du4).max(0.0).powf(0.25);
    let a = d.integrate(&adv).abs();
    Some(VelQ {
        e4: u_l4 / du,
        e6: du_l4 / (du * aun).sqrt(),
        e6b: du_l4 / aun,
        q_adv: a / (du * aun).powf(1.5),
    })
}

fn scalar_quotients(sys: &GalerkinSystem, dcoef: &[f64]) -> Option<ScalQ> {
    let d = &sys.domain;
    let g = sys.basis.concentration.reconstruct_with_gradient(d, dcoef);
    let a1 = dcoef.iter().zip(&sys.beta).map(|(x, b)| (b * x).powi(2)).sum::<f64>().sqrt();
    let form = dcoef.iter().zip(&sys.beta).map(|(x, b)| b * x * x).sum::<f64>();
    let n = d.npts();
    let g2: Vec<f64> = (0..n).map(|i| g.phix[i] * g.phix[i] + g.phiz[i] * g.phiz[i]).collect();
    let grad = d.integrate(&g2).max(0.0).sqrt();
    if a1 <= 1e-300 || grad <= 1e-300 {
        return None;
    }
    let g4 = d.integrate(&g2.iter().map(|v| v * v).collect::<Vec<_>>()).max(0.0).powf(0.25);
    let p4 = d.integrate(&g.phi.iter().map(|v| v.powi(4)).collect::<Vec<_>>()).max(0.0).powf(0.25);
    Some(ScalQ { c_hat: g4 * g4 / (a1 * a1), e5: p4 / grad, c_a: grad / a1, kappa_a: form / (grad * grad) })
}

fn random_coeffs(rng: &mut ChaCha8Rng, eig: &[f64], k: usize) -> Vec<f64> {
    // smoothness exponent cycles through 0, 1/2, 1
    let p = 0.5 * (k % 3) as f64;
    let e0 = eig[0].max(1e-300);
    eig.iter()
        .map(|&e| {
            let z: f64 = StandardNormal.sample(rng);
            z * (e0 / e.max(e0)).powf(p)
        })
        .collect()
}

impl SampledConstants {
    /// Maxima over every single mode, every adjacent pair, and `samples`
    /// random coefficient vectors.
    pub fn estimate(sys: &GalerkinSystem, samples: usize, seed: u64) -> Self {
        let n = sys.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vel: Vec<Vec<f64>> = Vec::new();
        let mut sca: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            if j + 1 < n {
                let mut p = e.clone();
                p[j + 1] = 1.0;
                vel.push(p.clone());
                sca.push(p);
            }
            vel.push(e.clone());
            sca.push(e);
        }
        for k in 0..samples {
            vel.push(random_coeffs(&mut rng, &sys.alpha_v, k));
            sca.push(random_coeffs(&mut rng, &sys.beta, k));
        }
        let mut out = SampledConstants::empty(vel.len());
        out.absorb(sys, &vel, &sca);
        out
    }

    fn empty(samples: usize) -> Self {
        let z = |name: &str| Labeled::estimate(0.0, name.to_string());
        SampledConstants {
            c_hat: z("max |grad phi|_4^2 / |A1 phi|^2 over sampled concentration coefficients"),
            e4: z("max |u|_4 / |D u| over sampled velocity coefficients"),
            e5: z("max |phi|_4 / |grad phi| over sampled concentration coefficients"),
            e6: z("max |D u|_4 / (|D u| |A u|)^{1/2} over sampled velocity coefficients"),
            e6b: z("max |D u|_4 / |A u| over sampled velocity coefficients"),
            q_adv: z("max |(u.grad u, A u)| / (|D u| |A u|)^{3/2} over sampled velocity coefficients"),
            c_a: z("max |grad phi| / |A1 phi| over sampled concentration coefficients"),
            kappa_a: Labeled::estimate(f64::INFINITY, "min a(phi, phi) / |grad phi|^2 over sampled concentration coefficients"),
            samples,
        }
    }

    fn absorb(&mut self, sys: &GalerkinSystem, vel: &[Vec<f64>], sca: &[Vec<f64>]) {
        for c in vel {
            if let Some(q) = velocity_quotients(sys, c) {
                self.e4.value = self.e4.value.max(q.e4);
                self.e6.value = self.e6.value.max(q.e6);
                self.e6b.value = self.e6b.value.max(q.e6b);
                self.q_adv.value = self.q_adv.value.max(q.q_adv);
            }
        }
        for d in sca {
            if let Some(q) = scalar_quotients(sys, d) {
                self.c_hat.value = self.c_hat.value.max(q.c_hat);
                self.e5.value = self.e5.value.max(q.e5);
                self.c_a.value = self.c_a.value.max(q.c_a);
                self.kappa_a.value = self.kappa_a.value.min(q.kappa_a);
            }
        }
    }

    /// Re-estimation: also takes the quotients of trajectory states.
    pub fn refine_with_states(&mut self, sys: &GalerkinSystem, states: &[GalerkinState]) {
        let vel: Vec<Vec<f64>> = states.iter().map(|s| s.c.clone()).collect();
        let mut sca: Vec<Vec<f64>> = states.iter().map(|s| s.d.clone()).collect();
        sca.extend(states.iter().map(|s| s.eta()));
        self.samples += states.len();
        self.absorb(sys, &vel, &sca);
        for l in [&mut self.c_hat, &mut self.e4, &mut self.e5, &mut self.e6, &mut self.e6b, &mut self.q_adv, &mut self.c_a] {
            if !l.recipe.ends_with("(refined)") {
                l.recipe.push_str(" (refined)");
            }
        }
    }
}
