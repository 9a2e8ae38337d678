use std::fmt;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Rate,
    SnrDb,
    Rho,
    Threshold,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::Rate => "rate",
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Rho => "rho",
            SweepVariable::Threshold => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn new(
        variable: SweepVariable,
        start: f64,
        stop: f64,
        points: usize,
        scale: Scale,
    ) -> Result<Self, CliError> {
        let name = variable.column();
        if !(start.is_finite() && stop.is_finite()) {
            return Err(CliError::Usage(format!(
                "{name} sweep bounds must be finite"
            )));
        }
        if points < 2 {
            return Err(CliError::Usage(format!(
                "{name} sweep needs at least 2 points (got {points})"
            )));
        }
        if !(start < stop) {
            return Err(CliError::Usage(format!(
                "{name} sweep needs start < stop (got {start} .. {stop})"
            )));
        }
        if scale == Scale::Log && !(start > 0.0) {
            return Err(CliError::Usage(format!(
                "log-scale {name} sweep needs start > 0 (got {start})"
            )));
        }
        Ok(Self {
            variable,
            start,
            stop,
            points,
            scale,
        })
    }

    /// Grid values in ascending order; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == last {
                    return self.stop;
                }
                let t = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Either a single value or a sweep over one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Fixed(SweepVariable, f64),
    Sweep(SweepSpec),
}

impl Axis {
    pub fn variable(&self) -> SweepVariable {
        match self {
            Axis::Fixed(v, _) => *v,
            Axis::Sweep(s) => s.variable,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Fixed(_, v) => vec![*v],
            Axis::Sweep(s) => s.values(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Axis::Fixed(v, x) => format!("{}={x}", v.column()),
            Axis::Sweep(s) => format!(
                "{} from={} to={} points={} scale={}",
                s.variable.column(),
                s.start,
                s.stop,
                s.points,
                s.scale
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid() {
        let s = SweepSpec::new(SweepVariable::Threshold, 0.0, 20.0, 201, Scale::Linear).unwrap();
        let v = s.values();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[200], 20.0);
        assert!((v[50] - 5.0).abs() < 1e-12);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn log_grid() {
        let s = SweepSpec::new(SweepVariable::Rate, 1e-3, 10.0, 50, Scale::Log).unwrap();
        let v = s.values();
        assert_eq!((v[0], v[49]), (1e-3, 10.0));
        let r = v[1] / v[0];
        assert!(v.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-9));
    }

    #[test]
    fn invalid_specs() {
        assert!(SweepSpec::new(SweepVariable::Threshold, 0.0, 0.0, 2, Scale::Linear).is_err());
        assert!(SweepSpec::new(SweepVariable::Threshold, 0.0, 1.0, 1, Scale::Linear).is_err());
        assert!(SweepSpec::new(SweepVariable::Rate, 0.0, 1.0, 5, Scale::Log).is_err());
        assert!(SweepSpec::new(SweepVariable::Rate, 2.0, 1.0, 5, Scale::Linear).is_err());
    }
}
