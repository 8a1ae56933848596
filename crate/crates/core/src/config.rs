use std::time::Duration;

use crate::error::{Error, Result};

/// Upper bound on extra trips per school beyond the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aat {
    /// As many additional trips as the school's minimum trip count.
    EqualToMnt,
    Fixed(usize),
}

impl Aat {
    pub fn extra(&self, mnt: usize) -> usize {
        match *self {
            Aat::EqualToMnt => mnt,
            Aat::Fixed(n) => n,
        }
    }
}

impl std::str::FromStr for Aat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mnt") {
            return Ok(Aat::EqualToMnt);
        }
        s.parse::<usize>()
            .map(Aat::Fixed)
            .map_err(|_| Error::InvalidConfig(format!("aat must be \"mnt\" or a count, got {s:?}")))
    }
}

impl std::fmt::Display for Aat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Aat::EqualToMnt => write!(f, "mnt"),
            Aat::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// Objective weights and solver limits.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight per bus.
    pub alpha_b: f64,
    /// Weight per trip.
    pub alpha_n: f64,
    /// Weight per trip-to-school compatibility.
    pub alpha_c: f64,
    /// Weight per second of loaded travel.
    pub alpha_t: f64,
    /// Weight per second of deadhead.
    pub alpha_d: f64,
    /// Reduced compatibility weight used by objective adjustment.
    pub alpha_c_oa: f64,
    /// Reduced deadhead weight used by objective adjustment.
    pub alpha_d_oa: f64,
    /// Compatibility weight for compatibility assignment with weight adjustment.
    pub alpha_c_ca: f64,
    /// Maximum ride time in seconds, `None` when disabled.
    pub mrt: Option<i64>,
    pub aat: Aat,
    /// Seconds a trip may start after its school's bell.
    pub buffer: i64,
    /// Wall-clock budget for one heuristic single-school solve.
    pub time_limit_per_subproblem: Duration,
    /// Schools (and trips) up to this many stops are solved exactly.
    pub exact_threshold_stops: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha_b: 1e5,
            alpha_n: 1e5,
            alpha_c: 1e5,
            alpha_t: 1.0,
            alpha_d: 0.5,
            alpha_c_oa: 5e4,
            alpha_d_oa: 0.5,
            alpha_c_ca: 9e4,
            mrt: Some(5400),
            aat: Aat::EqualToMnt,
            buffer: 0,
            time_limit_per_subproblem: Duration::from_secs(30),
            exact_threshold_stops: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("alpha_b", self.alpha_b),
            ("alpha_n", self.alpha_n),
            ("alpha_c", self.alpha_c),
            ("alpha_t", self.alpha_t),
            ("alpha_d", self.alpha_d),
            ("alpha_c_oa", self.alpha_c_oa),
            ("alpha_d_oa", self.alpha_d_oa),
            ("alpha_c_ca", self.alpha_c_ca),
        ];
        for (name, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be finite and non-negative, got {w}")));
            }
        }
        if let Some(mrt) = self.mrt {
            if mrt <= 0 {
                return Err(Error::InvalidConfig(format!("mrt must be positive, got {mrt}")));
            }
        }
        if self.buffer < 0 {
            return Err(Error::InvalidConfig(format!("buffer must be non-negative, got {}", self.buffer)));
        }
        if self.exact_threshold_stops > 16 {
            return Err(Error::InvalidConfig(format!(
                "exact_threshold_stops {} is too large for subset enumeration (max 16)",
                self.exact_threshold_stops
            )));
        }
        Ok(())
    }

    /// Whether the weights follow the ordering that weight adjustment relies on:
    /// `alpha_n = alpha_c > alpha_c_ca > alpha_c_oa` and `alpha_n >> alpha_t > alpha_d`.
    pub fn weight_adjustment_ordering_holds(&self) -> bool {
        self.alpha_n == self.alpha_c
            && self.alpha_c > self.alpha_c_ca
            && self.alpha_c_ca > self.alpha_c_oa
            && self.alpha_n >= 100.0 * self.alpha_t
            && self.alpha_t > self.alpha_d
    }

    /// Trip budget `[MNT, MNT + AAT]` for a school with the given minimum.
    pub fn trip_bounds(&self, mnt: usize) -> (usize, usize) {
        (mnt, mnt + self.aat.extra(mnt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::default();
        assert_eq!((c.alpha_b, c.alpha_n, c.alpha_c), (1e5, 1e5, 1e5));
        assert_eq!((c.alpha_t, c.alpha_d), (1.0, 0.5));
        assert_eq!(c.mrt, Some(5400));
        assert!(c.weight_adjustment_ordering_holds());
        c.validate().unwrap();
    }

    #[test]
    fn aat_parsing() {
        assert_eq!("mnt".parse::<Aat>().unwrap(), Aat::EqualToMnt);
        assert_eq!("3".parse::<Aat>().unwrap(), Aat::Fixed(3));
        assert!("x".parse::<Aat>().is_err());
        assert_eq!(SolverConfig { aat: Aat::Fixed(0), ..Default::default() }.trip_bounds(4), (4, 4));
        assert_eq!(SolverConfig::default().trip_bounds(4), (4, 8));
    }
}
