use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `L_smooth + α·L_per + β·L_mge + γ·L_adv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsaskWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for UsaskWeights {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            beta: 0.01,
            gamma: 0.005,
        }
    }
}

/// `λ·L_MSE + δ·L_PL + (1−λ)·L_triplet`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBrainWeights {
    pub lambda: f64,
    pub delta: f64,
    /// Triplet margin.
    pub margin: f64,
}

impl Default for ActionBrainWeights {
    fn default() -> Self {
        Self {
            lambda: 0.6,
            delta: 0.001,
            margin: 0.2,
        }
    }
}

/// `α·L_flare + β·L_ls + γ·L_recon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeviWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for CeviWeights {
    fn default() -> Self {
        Self {
            alpha: 0.33,
            beta: 0.33,
            gamma: 0.33,
        }
    }
}

/// Per-step weights of the recurrent reconstruction loss and the mask-loss
/// multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentWeights {
    pub gammas: Vec<f64>,
    pub mask_lambda: f64,
}

impl Default for RecurrentWeights {
    fn default() -> Self {
        Self {
            gammas: vec![1.0 / 32.0, 1.0 / 8.0, 1.0],
            mask_lambda: 0.1,
        }
    }
}

/// L1 weights inside / outside the flare region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntInsWeights {
    pub inside: f64,
    pub outside: f64,
}

impl Default for AntInsWeights {
    fn default() -> Self {
        Self {
            inside: 5.0,
            outside: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvGroupWeights {
    pub frequency: f64,
}

impl Default for LvGroupWeights {
    fn default() -> Self {
        Self { frequency: 0.1 }
    }
}

/// Every named weight used by the composite losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub usask: UsaskWeights,
    pub actionbrain: ActionBrainWeights,
    pub cevi: CeviWeights,
    pub recurrent: RecurrentWeights,
    pub antins: AntInsWeights,
    pub lvgroup: LvGroupWeights,
    pub charbonnier_eps: f64,
    pub smooth_l1_beta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            usask: UsaskWeights::default(),
            actionbrain: ActionBrainWeights::default(),
            cevi: CeviWeights::default(),
            recurrent: RecurrentWeights::default(),
            antins: AntInsWeights::default(),
            lvgroup: LvGroupWeights::default(),
            charbonnier_eps: 1e-3,
            smooth_l1_beta: 1.0,
        }
    }
}

impl LossWeights {
    /// Overrides one weight by dotted name, e.g. `usask.alpha` or
    /// `recurrent.gammas` (comma-separated list).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parameter(format!("`{key}`: `{value}` is not a number")))
        };
        let slot: &mut f64 = match key {
            "usask.alpha" => &mut self.usask.alpha,
            "usask.beta" => &mut self.usask.beta,
            "usask.gamma" => &mut self.usask.gamma,
            "actionbrain.lambda" => &mut self.actionbrain.lambda,
            "actionbrain.delta" => &mut self.actionbrain.delta,
            "actionbrain.margin" => &mut self.actionbrain.margin,
            "cevi.alpha" => &mut self.cevi.alpha,
            "cevi.beta" => &mut self.cevi.beta,
            "cevi.gamma" => &mut self.cevi.gamma,
            "recurrent.mask_lambda" => &mut self.recurrent.mask_lambda,
            "antins.inside" => &mut self.antins.inside,
            "antins.outside" => &mut self.antins.outside,
            "lvgroup.frequency" => &mut self.lvgroup.frequency,
            "charbonnier_eps" => &mut self.charbonnier_eps,
            "smooth_l1_beta" => &mut self.smooth_l1_beta,
            "recurrent.gammas" => {
                self.recurrent.gammas = value
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            Error::parameter(format!("`{key}`: `{s}` is not a number"))
                        })
                    })
                    .collect::<Result<_>>()?;
                return Ok(());
            }
            other => return Err(Error::parameter(format!("unknown weight `{other}`"))),
        };
        *slot = num()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_published_constants() {
        let w = LossWeights::default();
        assert_eq!((w.usask.alpha, w.usask.beta, w.usask.gamma), (0.01, 0.01, 0.005));
        assert_eq!((w.actionbrain.lambda, w.actionbrain.delta), (0.6, 0.001));
        assert_eq!((w.cevi.alpha, w.cevi.beta, w.cevi.gamma), (0.33, 0.33, 0.33));
        assert_eq!(w.recurrent.gammas, vec![0.03125, 0.125, 1.0]);
        assert_eq!(w.recurrent.mask_lambda, 0.1);
        assert_eq!((w.antins.inside, w.antins.outside), (5.0, 1.0));
        assert_eq!(w.lvgroup.frequency, 0.1);
    }

    #[test]
    fn serde_round_trip() {
        let w = LossWeights::default();
        let json = serde_json::to_string(&w).unwrap();
        let back: LossWeights = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        let partial: LossWeights = serde_json::from_str(r#"{"lvgroup":{"frequency":0.2}}"#).unwrap();
        assert_eq!(partial.lvgroup.frequency, 0.2);
        assert_eq!(partial.usask, w.usask);
        assert!(serde_json::from_str::<LossWeights>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn dotted_overrides() {
        let mut w = LossWeights::default();
        w.set("usask.alpha", "0.5").unwrap();
        w.set("recurrent.gammas", "1, 2").unwrap();
        assert_eq!(w.usask.alpha, 0.5);
        assert_eq!(w.recurrent.gammas, vec![1.0, 2.0]);
        assert!(w.set("usask.zeta", "1").is_err());
        assert!(w.set("usask.beta", "x").is_err());
    }
}
