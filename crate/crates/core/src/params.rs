//! Physical constants, system selection and energy weights.

use std::fmt;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two thermoelastic couplings is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemId {
    /// Type III heat conduction coupled to the rotation through `beta`/`gamma`.
    System1,
    /// Heat conduction acting on the shear force through `mu`.
    System2,
}

impl SystemId {
    pub fn number(self) -> u8 {
        match self {
            SystemId::System1 => 1,
            SystemId::System2 => 2,
        }
    }

    pub fn from_number(k: u8) -> Option<Self> {
        match k {
            1 => Some(SystemId::System1),
            2 => Some(SystemId::System2),
            _ => None,
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "system{}", self.number())
    }
}

/// Physical constants and damping exponents.
///
/// `beta`, `gamma` and `big_k` enter system 1, `mu` enters system 2 and
/// `gamma` doubles as the thermal damping coefficient there. All are stored
/// regardless of the system in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub rho1: T,
    pub rho2: T,
    pub rho3: T,
    pub kappa: T,
    pub b: T,
    pub delta: T,
    pub beta: T,
    pub gamma: T,
    pub mu: T,
    pub mu1: T,
    pub mu2: T,
    pub big_k: T,
    pub tau: T,
    pub sigma: T,
    pub xi: T,
}

impl<T: Num + Clone> ModelParams<T> {
    /// Every constant equal to one, with the given exponents.
    pub fn unit(tau: T, sigma: T, xi: T) -> Self {
        let one = T::one;
        Self {
            rho1: one(),
            rho2: one(),
            rho3: one(),
            kappa: one(),
            b: one(),
            delta: one(),
            beta: one(),
            gamma: one(),
            mu: one(),
            mu1: one(),
            mu2: one(),
            big_k: one(),
            tau,
            sigma,
            xi,
        }
    }

    pub fn with_exponents(mut self, tau: T, sigma: T, xi: T) -> Self {
        self.tau = tau;
        self.sigma = sigma;
        self.xi = xi;
        self
    }

    /// Same couplings with every damping coefficient switched off.
    pub fn conservative(&self, system: SystemId) -> Self {
        let mut p = self.clone();
        p.mu1 = T::zero();
        p.mu2 = T::zero();
        match system {
            SystemId::System1 => p.big_k = T::zero(),
            SystemId::System2 => p.gamma = T::zero(),
        }
        p
    }

    /// Coefficient multiplying `A^xi Theta` in the temperature equation.
    pub fn thermal_damping(&self, system: SystemId) -> T {
        match system {
            SystemId::System1 => self.big_k.clone(),
            SystemId::System2 => self.gamma.clone(),
        }
    }
}

impl<T: Num + Clone + PartialOrd + fmt::Debug> ModelParams<T> {
    /// Structural constants must be positive; damping coefficients may be
    /// zero (the conservative limit); exponents lie in `[0, 1]`.
    pub fn validate(&self, system: SystemId) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let positive = |name: &'static str, v: &T| -> Result<()> {
            if *v > zero {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: format!("{v:?}"),
                    reason: "must be strictly positive",
                })
            }
        };
        let nonneg = |name: &'static str, v: &T| -> Result<()> {
            if *v >= zero {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: format!("{v:?}"),
                    reason: "must be nonnegative",
                })
            }
        };
        let unit_interval = |name: &'static str, v: &T| -> Result<()> {
            if *v >= zero && *v <= one {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: format!("{v:?}"),
                    reason: "must lie in [0, 1]",
                })
            }
        };
        positive("rho1", &self.rho1)?;
        positive("rho2", &self.rho2)?;
        positive("rho3", &self.rho3)?;
        positive("kappa", &self.kappa)?;
        positive("b", &self.b)?;
        positive("delta", &self.delta)?;
        match system {
            // beta and gamma scale the system 1 energy weights.
            SystemId::System1 => {
                positive("beta", &self.beta)?;
                positive("gamma", &self.gamma)?;
                nonneg("mu", &self.mu)?;
            }
            SystemId::System2 => {
                nonneg("beta", &self.beta)?;
                nonneg("gamma", &self.gamma)?;
                nonneg("mu", &self.mu)?;
            }
        }
        nonneg("mu1", &self.mu1)?;
        nonneg("mu2", &self.mu2)?;
        nonneg("big_k", &self.big_k)?;
        unit_interval("tau", &self.tau)?;
        unit_interval("sigma", &self.sigma)?;
        unit_interval("xi", &self.xi)?;
        Ok(())
    }
}

/// Coefficients of the six squared terms of the energy norm:
/// `|Phi|², |Psi|², |D0 phi + psi|², |A^½ psi|², |A^½ theta|², |Theta|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet<T> {
    pub phi_vel: T,
    pub psi_vel: T,
    pub shear: T,
    pub bend: T,
    pub theta_grad: T,
    pub theta_vel: T,
}

impl<T: Clone> WeightSet<T> {
    /// Weights in energy-coordinate order.
    pub fn as_array(&self) -> [T; 6] {
        [
            self.phi_vel.clone(),
            self.psi_vel.clone(),
            self.shear.clone(),
            self.bend.clone(),
            self.theta_grad.clone(),
            self.theta_vel.clone(),
        ]
    }
}

/// Weights under which every coupling term of the generator cancels in
/// `Re <BU, U>`, leaving only the damping terms.
///
/// For system 1 the cancellation conditions
///
/// ```text
/// shear = phi_vel·kappa/rho1 = psi_vel·kappa/rho2
/// bend  = psi_vel·b/rho2
/// psi_vel·beta/rho2 = theta_vel·gamma/rho3
/// theta_grad = theta_vel·delta/rho3
/// ```
///
/// fix the set up to scale; it is normalised so that `phi_vel = rho1·beta·gamma`.
/// Only field operations are used, so exact rational scalars work too.
pub fn derive_weights<T: Num + Clone>(params: &ModelParams<T>, system: SystemId) -> WeightSet<T> {
    let p = params.clone();
    match system {
        SystemId::System2 => WeightSet {
            phi_vel: p.rho1,
            psi_vel: p.rho2,
            shear: p.kappa,
            bend: p.b,
            theta_grad: p.delta,
            theta_vel: p.rho3,
        },
        SystemId::System1 => {
            let bg = p.beta.clone() * p.gamma.clone();
            let bb = p.beta.clone() * p.beta.clone();
            WeightSet {
                phi_vel: p.rho1 * bg.clone(),
                psi_vel: p.rho2 * bg.clone(),
                shear: p.kappa * bg.clone(),
                bend: p.b * bg,
                theta_grad: bb.clone() * p.delta,
                theta_vel: bb * p.rho3,
            }
        }
    }
}

/// Energy-norm coefficients exactly as written for the continuous problem.
///
/// For system 2 these coincide with [`derive_weights`]. For system 1 they
/// differ unless `beta = kappa` and `beta·rho3 = kappa·K`; they are used only
/// by the lemma probes, whose boundedness claims ignore constant factors.
pub fn literal_weights<T: Num + Clone>(params: &ModelParams<T>, system: SystemId) -> WeightSet<T> {
    let p = params.clone();
    match system {
        SystemId::System2 => derive_weights(params, system),
        SystemId::System1 => WeightSet {
            phi_vel: p.rho1 * p.beta.clone() * p.gamma.clone(),
            psi_vel: p.rho2 * p.kappa.clone() * p.gamma.clone(),
            shear: p.beta.clone() * p.kappa.clone() * p.gamma.clone(),
            bend: p.b * p.kappa.clone() * p.gamma,
            theta_grad: p.beta.clone() * p.delta * p.kappa.clone(),
            theta_vel: p.beta * p.kappa * p.big_k,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn unit_weights_collapse_to_one() {
        let p = ModelParams::unit(0.5, 0.5, 0.5);
        let ones = WeightSet {
            phi_vel: 1.0,
            psi_vel: 1.0,
            shear: 1.0,
            bend: 1.0,
            theta_grad: 1.0,
            theta_vel: 1.0,
        };
        assert_eq!(derive_weights(&p, SystemId::System1), ones);
        assert_eq!(derive_weights(&p, SystemId::System2), ones);
    }

    #[test]
    fn system1_weights_with_beta_gamma() {
        let mut p = ModelParams::unit(r(1, 2), r(1, 2), r(1, 2));
        p.beta = r(2, 1);
        p.gamma = r(3, 1);
        let w = derive_weights(&p, SystemId::System1);
        assert_eq!(
            w.as_array(),
            [r(6, 1), r(6, 1), r(6, 1), r(6, 1), r(4, 1), r(4, 1)]
        );
    }

    #[test]
    fn system1_cancellation_constraints_hold_exactly() {
        let p = ModelParams {
            rho1: r(3, 2),
            rho2: r(5, 7),
            rho3: r(11, 3),
            kappa: r(2, 9),
            b: r(13, 5),
            delta: r(7, 4),
            beta: r(5, 3),
            gamma: r(4, 11),
            mu: r(1, 1),
            mu1: r(1, 1),
            mu2: r(1, 1),
            big_k: r(9, 2),
            tau: r(1, 2),
            sigma: r(1, 2),
            xi: r(1, 2),
        };
        let w = derive_weights(&p, SystemId::System1);
        assert_eq!(w.shear, w.phi_vel * p.kappa / p.rho1);
        assert_eq!(w.shear, w.psi_vel * p.kappa / p.rho2);
        assert_eq!(w.bend, w.psi_vel * p.b / p.rho2);
        assert_eq!(w.psi_vel * p.beta / p.rho2, w.theta_vel * p.gamma / p.rho3);
        assert_eq!(w.theta_grad, w.theta_vel * p.delta / p.rho3);
        assert_eq!(w.phi_vel, p.rho1 * p.beta * p.gamma);
    }

    #[test]
    fn system2_weights_are_the_energy_coefficients() {
        let mut p = ModelParams::unit(r(1, 2), r(1, 2), r(1, 2));
        p.rho1 = r(2, 3);
        p.rho2 = r(5, 4);
        p.rho3 = r(7, 8);
        p.kappa = r(9, 10);
        p.b = r(11, 12);
        p.delta = r(13, 14);
        let w = derive_weights(&p, SystemId::System2);
        assert_eq!(w.as_array(), [p.rho1, p.rho2, p.kappa, p.b, p.delta, p.rho3]);
        assert_eq!(literal_weights(&p, SystemId::System2), w);
    }

    #[test]
    fn literal_system1_weights_agree_only_on_the_special_relation() {
        let mut p = ModelParams::unit(r(1, 2), r(1, 2), r(1, 2));
        p.beta = r(2, 1);
        p.kappa = r(2, 1);
        p.rho3 = r(3, 1);
        p.big_k = r(3, 1);
        // beta = kappa and beta·rho3 = kappa·K: proportional sets.
        let d = derive_weights(&p, SystemId::System1).as_array();
        let l = literal_weights(&p, SystemId::System1).as_array();
        let ratio = l[0] / d[0];
        assert!(d.iter().zip(l.iter()).all(|(a, b)| *b == *a * ratio));

        p.kappa = r(3, 1);
        let d = derive_weights(&p, SystemId::System1).as_array();
        let l = literal_weights(&p, SystemId::System1).as_array();
        let ratio = l[0] / d[0];
        assert!(d.iter().zip(l.iter()).any(|(a, b)| *b != *a * ratio));
    }

    #[test]
    fn validation() {
        let p = ModelParams::unit(0.5, 0.5, 0.5);
        assert!(p.validate(SystemId::System1).is_ok());
        assert!(p.conservative(SystemId::System1).validate(SystemId::System1).is_ok());
        assert!(p.conservative(SystemId::System2).validate(SystemId::System2).is_ok());

        let mut bad = p.clone();
        bad.tau = 1.5;
        assert!(matches!(
            bad.validate(SystemId::System1),
            Err(Error::InvalidParameter { name: "tau", .. })
        ));
        let mut bad = p.clone();
        bad.rho2 = 0.0;
        assert!(matches!(
            bad.validate(SystemId::System2),
            Err(Error::InvalidParameter { name: "rho2", .. })
        ));
        let mut bad = p.clone();
        bad.gamma = 0.0;
        assert!(bad.validate(SystemId::System1).is_err());
        assert!(bad.validate(SystemId::System2).is_ok());
        let mut bad = p;
        bad.xi = f64::NAN;
        assert!(bad.validate(SystemId::System2).is_err());
    }

    #[test]
    fn system_id_roundtrip() {
        for s in [SystemId::System1, SystemId::System2] {
            assert_eq!(SystemId::from_number(s.number()), Some(s));
        }
        assert_eq!(SystemId::from_number(3), None);
        assert_eq!(SystemId::System2.to_string(), "system2");
    }
}
