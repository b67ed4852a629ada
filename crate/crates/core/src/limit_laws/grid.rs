use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A uniform grid `{k delta(T)}` through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", deny_unknown_fields)]
pub enum GridSpec {
    /// `delta(T) = delta0`.
    ConstantSpacing { delta0: f64 },
    /// `delta(T) = D (2 ln T)^{-1/alpha}`, i.e. `D a_T^{-2/alpha}`.
    PickandsSpacing { d: f64 },
    /// `delta(T) = (2 ln T)^{-beta/alpha}`.
    PowerLogSpacing { beta: f64 },
}

/// Asymptotic class of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GridKind {
    Sparse,
    Pickands { d: f64 },
    Dense,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GridSpec::ConstantSpacing { delta0 } => delta0 > 0.0 && delta0.is_finite(),
            GridSpec::PickandsSpacing { d } => d > 0.0 && d.is_finite(),
            GridSpec::PowerLogSpacing { beta } => beta.is_finite() && beta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid grid {self:?}")))
        }
    }

    /// `delta(T)`; needs `T > 1` for the logarithmic forms.
    pub fn spacing_at(&self, t: f64, alpha: f64) -> Result<f64> {
        self.validate()?;
        let two_ln = 2.0 * t.ln();
        match *self {
            GridSpec::ConstantSpacing { delta0 } => Ok(delta0),
            _ if !(two_ln > 0.0) => Err(invalid(format!("horizon must exceed 1, got {t}"))),
            GridSpec::PickandsSpacing { d } => Ok(d * two_ln.powf(-1.0 / alpha)),
            GridSpec::PowerLogSpacing { beta } => Ok(two_ln.powf(-beta / alpha)),
        }
    }
}

/// Limit of `(2 ln T)^{1/alpha} delta(T)`, evaluated symbolically.
pub fn classify_grid(grid: &GridSpec, _alpha: f64) -> Result<GridKind> {
    grid.validate()?;
    match *grid {
        GridSpec::ConstantSpacing { .. } => Ok(GridKind::Sparse),
        GridSpec::PickandsSpacing { d } => Ok(GridKind::Pickands { d }),
        GridSpec::PowerLogSpacing { beta } if beta > 1.0 => Ok(GridKind::Dense),
        GridSpec::PowerLogSpacing { beta } if beta < 1.0 => Ok(GridKind::Sparse),
        GridSpec::PowerLogSpacing { beta } => Err(Error::UnclassifiableGrid(format!(
            "power-log grid with beta = {beta} is a Pickands grid with D = 1; use PickandsSpacing"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_grid(&GridSpec::ConstantSpacing { delta0: 1.0 }, 1.0).unwrap(),
            GridKind::Sparse
        );
        assert_eq!(
            classify_grid(&GridSpec::PickandsSpacing { d: 0.5 }, 1.0).unwrap(),
            GridKind::Pickands { d: 0.5 }
        );
        assert_eq!(
            classify_grid(&GridSpec::PowerLogSpacing { beta: 2.0 }, 1.0).unwrap(),
            GridKind::Dense
        );
        assert_eq!(
            classify_grid(&GridSpec::PowerLogSpacing { beta: 0.5 }, 1.0).unwrap(),
            GridKind::Sparse
        );
        assert!(matches!(
            classify_grid(&GridSpec::PowerLogSpacing { beta: 1.0 }, 1.0),
            Err(Error::UnclassifiableGrid(_))
        ));
    }

    #[test]
    fn limits_match_classes_numerically() {
        // (2 ln T)^{1/alpha} delta(T) along a ladder
        let alpha = 1.5;
        let probe = |g: GridSpec| {
            [1e2, 1e6, 1e12, 1e24]
                .iter()
                .map(|&t: &f64| (2.0 * t.ln()).powf(1.0 / alpha) * g.spacing_at(t, alpha).unwrap())
                .collect::<Vec<_>>()
        };
        let p = probe(GridSpec::PickandsSpacing { d: 0.7 });
        assert!(p.iter().all(|v| (v - 0.7).abs() < 1e-12));
        let d = probe(GridSpec::PowerLogSpacing { beta: 2.0 });
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        let s = probe(GridSpec::ConstantSpacing { delta0: 0.1 });
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn json_form() {
        let g: GridSpec = serde_json::from_str(r#"{"form":"PickandsSpacing","d":0.5}"#).unwrap();
        assert_eq!(g, GridSpec::PickandsSpacing { d: 0.5 });
        assert!(serde_json::from_str::<GridSpec>(r#"{"form":"PickandsSpacing","d":0.5,"q":1}"#).is_err());
    }
}
