//! Named groups of checks with scale knobs, as run by the command line.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::krawtchouk::{check_orthogonality, check_symmetries};

use super::{
    verify_contingency_agreement, verify_dual_lift, verify_even_reduction, verify_fourier_symmetries,
    verify_gl_consequences, verify_level_set_identity, verify_strength_theorems, verify_symmetrization_equivalence,
    verify_tensor_feasibility, verify_univariate, LinearCode, Report, Sampling, StrengthOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    /// Partial Fourier symmetry rules and the consequences of GL invariance.
    Fourier,
    /// Krawtchouk identities.
    Krawtchouk,
    /// Program equivalences, tensor witnesses and the even reduction.
    Programs,
    /// Orderings between program values.
    Strength,
    /// Dual feasibility and lifting.
    Dual,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Fourier, Suite::Krawtchouk, Suite::Programs, Suite::Strength, Suite::Dual];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fourier => "fourier",
            Suite::Krawtchouk => "krawtchouk",
            Suite::Programs => "programs",
            Suite::Strength => "strength",
            Suite::Dual => "dual",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    /// Largest `n` used by any check.
    pub max_n: usize,
    pub seed: u64,
    /// Sample count for randomized checks at `r = 3`.
    pub samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { max_n: 13, seed: 2024, samples: 24 }
    }
}

fn upto(max: usize, cap: usize) -> std::ops::RangeInclusive<usize> {
    1..=max.min(cap)
}

/// Run one suite. Parameters beyond `max_n` are skipped.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Report> {
    let mut report = Report::new();
    let m = opts.max_n;
    match suite {
        Suite::Fourier => {
            for n in upto(m, 3) {
                for r in 1..=2 {
                    report.merge(verify_fourier_symmetries(r, n, Sampling::Exhaustive, opts.seed)?);
                    report.merge(verify_gl_consequences(r, n, Sampling::Exhaustive, opts.seed)?);
                }
                let random = Sampling::Random { samples: opts.samples };
                report.merge(verify_fourier_symmetries(3, n, random, opts.seed)?);
                report.merge(verify_gl_consequences(3, n, random, opts.seed)?);
            }
        }
        Suite::Krawtchouk => {
            for n in upto(m, 6) {
                for r in 1..=2 {
                    report.merge(check_orthogonality(r, n)?);
                    report.merge(verify_contingency_agreement(r, n)?);
                    if n <= 4 {
                        report.merge(verify_level_set_identity(r, n)?);
                    }
                }
            }
            for n in upto(m, 8) {
                report.merge(verify_univariate(n)?);
            }
            for n in upto(m, 3) {
                report.merge(check_symmetries(2, n)?);
                report.merge(check_symmetries(3, n)?);
            }
        }
        Suite::Programs => {
            for (r, n, d) in [(1, 3, 2), (1, 4, 2), (2, 3, 2)] {
                if n <= m {
                    report.merge(verify_symmetrization_equivalence(r, n, d)?);
                }
            }
            let repetition = LinearCode::from_generator(&[0b111], 3)?;
            let even = LinearCode::from_generator(&[0b0011, 0b0110, 0b1100], 4)?;
            for (code, d) in [(repetition, 3), (even, 2)] {
                if code.n() <= m {
                    report.merge(verify_tensor_feasibility(&code, 2, d)?);
                }
            }
            for r in 1..=2 {
                for n in upto(m, 10) {
                    for d in (2..=n / 2).step_by(2) {
                        report.merge(verify_even_reduction(r, n, d)?);
                    }
                }
            }
        }
        Suite::Strength => {
            for (n, d) in [(4, 2), (6, 2), (8, 4), (13, 6)] {
                if n <= m {
                    report.merge(verify_strength_theorems(n, d, StrengthOptions::default())?);
                }
            }
        }
        Suite::Dual => {
            for n in 2..=m.min(3) {
                report.merge(verify_dual_lift(1, n, 2)?);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        let opts = SuiteOptions { max_n: 2, ..SuiteOptions::default() };
        for s in Suite::ALL {
            let report = run_suite(s, &opts).unwrap();
            assert!(report.all_passed(), "{s}: {report}");
        }
    }
}
