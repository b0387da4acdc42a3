use crate::error::{invalid, Result};

/// Schedule of `s` quench stations `λ_i = λ_1 + (i − 1)Δλ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    lambda_start: f64,
    step: f64,
    stations: usize,
}

impl QuenchProtocol {
    pub fn new(lambda_start: f64, step: f64, stations: usize) -> Result<Self> {
        if stations < 2 {
            return Err(invalid(
                "stations",
                format!("need at least 2, got {stations}"),
            ));
        }
        if !lambda_start.is_finite() {
            return Err(invalid("lambda_start", "must be finite"));
        }
        if !step.is_finite() {
            return Err(invalid("step", "must be finite"));
        }
        Ok(Self {
            lambda_start,
            step,
            stations,
        })
    }

    /// Protocol from `start` to `end` in steps of `step`; `end − start` must be
    /// a whole number of steps.
    pub fn spanning(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(invalid("step", "must be positive to span a range"));
        }
        let n = (end - start) / step;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(invalid(
                "step",
                format!("({end} - {start}) / {step} is not a positive integer"),
            ));
        }
        Self::new(start, step, rounded as usize + 1)
    }

    pub fn lambda_start(&self) -> f64 {
        self.lambda_start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn stations(&self) -> usize {
        self.stations
    }

    /// λ at zero-based station `i`.
    pub fn lambda(&self, i: usize) -> f64 {
        self.lambda_start + i as f64 * self.step
    }

    pub fn lambdas(&self) -> Vec<f64> {
        (0..self.stations).map(|i| self.lambda(i)).collect()
    }

    pub fn lambda_end(&self) -> f64 {
        self.lambda(self.stations - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stations() {
        let p = QuenchProtocol::new(13.0, 1.0, 8).unwrap();
        assert_eq!(
            p.lambdas(),
            vec![13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0]
        );
        assert_eq!(QuenchProtocol::spanning(13.0, 20.0, 1.0).unwrap(), p);
        assert!(QuenchProtocol::new(0.0, 1.0, 1).is_err());
        assert!(QuenchProtocol::new(0.0, f64::NAN, 3).is_err());
        assert!(QuenchProtocol::new(0.0, 0.0, 3).is_ok());
        assert!(QuenchProtocol::spanning(0.0, 1.0, 0.3).is_err());
    }
}
