//! Verification protocol.
//!
//! Four sections, each checked against integer oracles:
//!
//! * every multiplicand/multiplier pair at widths 1-8, both MAC variants;
//! * random pairs at widths 9-16;
//! * random dot products at widths 1-16, checking the result and the
//!   `(n + 1) * width` latency;
//! * random matrix products on the evaluated topologies and on small
//!   generated ones, checking the result, the cycle laws and the readout.
//!
//! Random inputs for case `i` come from a ChaCha8 generator seeded with the
//! suite seed and switched to stream `i`, so any case can be replayed alone.
//! Cases run in parallel but results are folded in case order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitmath::{oracle_dot, oracle_product, RecodeTable, SignedWord};
use crate::error::Result;
use crate::mac::{MacConfig, MacDriver, MacVariant};
use crate::sa::{oracle_matmul, Matrix, SaConfig, SystolicArray};

/// Stream ids are `section << SECTION_SHIFT | case`.
const SECTION_SHIFT: u32 = 40;

/// Generator for one case.
pub fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_word<R: Rng>(rng: &mut R, width: u32) -> SignedWord {
    let v = rng.random_range(SignedWord::min_value(width)..=SignedWord::max_value(width));
    SignedWord::new(v, width).expect("value drawn from the word range")
}

/// Multiplicand and multiplier vectors of length `n`.
pub fn random_dot_operands(
    seed: u64,
    stream: u64,
    n: usize,
    width: u32,
) -> (Vec<SignedWord>, Vec<SignedWord>) {
    let mut rng = case_rng(seed, stream);
    let a = (0..n).map(|_| random_word(&mut rng, width)).collect();
    let b = (0..n).map(|_| random_word(&mut rng, width)).collect();
    (a, b)
}

/// `A (m x n)` and `B (n x p)`.
pub fn random_matmul_operands(
    seed: u64,
    stream: u64,
    (m, n, p): (usize, usize, usize),
    width: u32,
) -> Result<(Matrix, Matrix)> {
    let mut rng = case_rng(seed, stream);
    let a = Matrix::random(&mut rng, m, n, width)?;
    let b = Matrix::random(&mut rng, n, p, width)?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Reduced suite for smoke runs.
    pub quick: bool,
    /// Booth control table used by every Booth unit.
    #[serde(skip)]
    pub recode: RecodeTable,
}

impl VerifyOptions {
    pub fn new(seed: u64, quick: bool) -> Self {
        Self {
            seed,
            quick,
            recode: RecodeTable::BOOTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub case: u64,
    pub description: String,
    pub expected: String,
    pub got: String,
    /// Command line that replays the case.
    pub reproducer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<Failure>,
}

impl SectionReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub quick: bool,
    pub sections: Vec<SectionReport>,
}

impl VerifyReport {
    pub fn total_cases(&self) -> u64 {
        self.sections.iter().map(|s| s.cases).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.sections.iter().map(|s| s.failures).sum()
    }

    pub fn passed(&self) -> bool {
        self.total_failures() == 0
    }

    pub fn first_failure(&self) -> Option<(&'static str, &Failure)> {
        self.sections
            .iter()
            .find_map(|s| s.first_failure.as_ref().map(|f| (s.name, f)))
    }
}

/// Outcome of a batch of cases.
#[derive(Debug, Default)]
struct Tally {
    cases: u64,
    failures: u64,
    first: Option<Failure>,
}

impl Tally {
    fn check(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(failure());
            }
        }
    }

    fn section(name: &'static str, parts: Vec<Tally>) -> SectionReport {
        let mut report = SectionReport {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        };
        for t in parts {
            report.cases += t.cases;
            report.failures += t.failures;
            if report.first_failure.is_none() {
                report.first_failure = t.first;
            }
        }
        report
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        seed: opts.seed,
        quick: opts.quick,
        sections: vec![
            exhaustive_pairs(opts),
            random_pairs(opts),
            dot_products(opts),
            matmuls(opts),
        ],
    }
}

fn driver(variant: MacVariant, opts: &VerifyOptions) -> MacDriver<i64> {
    MacDriver::new(variant, MacConfig::default())
        .expect("default configuration fits i64")
        .with_recode(opts.recode)
}

fn pair_failure(
    case: u64,
    variant: MacVariant,
    a: SignedWord,
    b: SignedWord,
    got: String,
) -> Failure {
    let width = a.width();
    Failure {
        case,
        description: format!(
            "{variant} {width}-bit product {} * {}",
            a.value(),
            b.value()
        ),
        expected: oracle_product(a, b).to_string(),
        got,
        reproducer: format!(
            "bitsmm mac --variant {variant} --a {} --b {} --width {width}",
            a.value(),
            b.value()
        ),
    }
}

fn check_pair(tally: &mut Tally, case: u64, d: &MacDriver<i64>, a: SignedWord, b: SignedWord) {
    let width = a.width();
    match d.multiply(a, b) {
        Ok(run) => tally.check(
            run.result == oracle_product(a, b) as i128 && run.cycles == 2 * width as u64,
            || {
                pair_failure(
                    case,
                    d.variant,
                    a,
                    b,
                    format!("{} in {} cycles", run.result, run.cycles),
                )
            },
        ),
        Err(e) => tally.check(false, || pair_failure(case, d.variant, a, b, e.to_string())),
    }
}

/// Widths covered exhaustively.
pub fn exhaustive_widths(quick: bool) -> std::ops::RangeInclusive<u32> {
    if quick {
        1..=6
    } else {
        1..=8
    }
}

fn exhaustive_pairs(opts: &VerifyOptions) -> SectionReport {
    // one work item per (variant, width, multiplicand)
    let mut items = Vec::new();
    let mut offset = 0u64;
    for variant in MacVariant::ALL {
        for width in exhaustive_widths(opts.quick) {
            for a in SignedWord::min_value(width)..=SignedWord::max_value(width) {
                items.push((variant, width, a, offset));
                offset += 1 << width;
            }
        }
    }
    let parts = items
        .par_iter()
        .map(|&(variant, width, a, offset)| {
            let d = driver(variant, opts);
            let a = SignedWord::new(a, width).expect("in range");
            let mut tally = Tally::default();
            let lo = SignedWord::min_value(width);
            for b in lo..=SignedWord::max_value(width) {
                let b = SignedWord::new(b, width).expect("in range");
                check_pair(&mut tally, offset + (b.value() - lo) as u64, &d, a, b);
            }
            tally
        })
        .collect();
    Tally::section("mac-exhaustive", parts)
}

fn random_pairs(opts: &VerifyOptions) -> SectionReport {
    let per_width = if opts.quick { 10 } else { 100 };
    let mut cases = Vec::new();
    for variant in MacVariant::ALL {
        for width in 9..=16u32 {
            for _ in 0..per_width {
                cases.push((variant, width));
            }
        }
    }
    let parts = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(variant, width))| {
            let mut rng = case_rng(opts.seed, (1 << SECTION_SHIFT) | i as u64);
            let (a, b) = (random_word(&mut rng, width), random_word(&mut rng, width));
            let mut tally = Tally::default();
            check_pair(&mut tally, i as u64, &driver(variant, opts), a, b);
            tally
        })
        .collect();
    Tally::section("mac-random", parts)
}

/// Dot-product lengths checked at every width.
pub fn dot_lengths(quick: bool) -> &'static [usize] {
    if quick {
        &[1, 2, 10]
    } else {
        &[1, 2, 10, 100, 1000]
    }
}

fn dot_products(opts: &VerifyOptions) -> SectionReport {
    let extra = if opts.quick { 1 } else { 3 };
    let mut cases = Vec::new();
    let mut len_rng = case_rng(opts.seed, 2 << SECTION_SHIFT);
    for variant in MacVariant::ALL {
        for width in 1..=16u32 {
            let mut lengths = dot_lengths(opts.quick).to_vec();
            let max = if opts.quick { 100 } else { 1000 };
            lengths.extend((0..extra).map(|_| len_rng.random_range(1..=max)));
            for n in lengths {
                cases.push((variant, width, n));
            }
        }
    }
    let parts = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(variant, width, n))| {
            let stream = (2 << SECTION_SHIFT) | i as u64;
            let (a, b) = random_dot_operands(opts.seed, stream, n, width);
            let expected = oracle_dot(&a, &b);
            let cycles = (n as u64 + 1) * width as u64;
            let failure = |got: String| Failure {
                case: i as u64,
                description: format!("{variant} {width}-bit dot product of length {n}"),
                expected: format!("{expected} in {cycles} cycles"),
                got,
                reproducer: format!(
                    "bitsmm mac --variant {variant} --dot --n {n} --width {width} --seed {} --stream {stream}",
                    opts.seed
                ),
            };
            let mut tally = Tally::default();
            match driver(variant, opts).dot(&a, &b, width) {
                Ok(run) => tally.check(run.result == expected && run.cycles == cycles, || {
                    failure(format!("{} in {} cycles", run.result, run.cycles))
                }),
                Err(e) => tally.check(false, || failure(e.to_string())),
            }
            tally
        })
        .collect();
    Tally::section("dot-product", parts)
}

#[derive(Debug, Clone, Copy)]
struct MatmulCase {
    variant: MacVariant,
    config: SaConfig,
    dims: (usize, usize, usize),
    width: u32,
}

/// Shared dimension used for full-size products on the evaluated topologies.
pub const FULL_SIZE_N: usize = 16;

fn matmul_cases(opts: &VerifyOptions) -> Vec<MatmulCase> {
    let mut rng = case_rng(opts.seed, 3 << SECTION_SHIFT);
    let presets: Vec<SaConfig> = if opts.quick {
        SaConfig::presets()[..1].to_vec()
    } else {
        SaConfig::presets().to_vec()
    };
    let (random_per_topology, generated, max_n) = if opts.quick { (2, 3, 6) } else { (6, 10, 32) };
    let full_n = if opts.quick { 4 } else { FULL_SIZE_N };
    let mut configs = Vec::new();
    for cfg in presets {
        configs.push((cfg, Some((cfg.rows, full_n, cfg.cols, 16))));
        for _ in 0..random_per_topology {
            configs.push((cfg, None));
        }
    }
    for _ in 0..generated {
        let cfg = SaConfig::new(rng.random_range(1..=8), rng.random_range(1..=8))
            .expect("non-empty array");
        configs.push((cfg, None));
    }
    let mut cases = Vec::new();
    for (config, fixed) in configs {
        let (m, n, p, width) = fixed.unwrap_or_else(|| {
            (
                rng.random_range(1..=config.rows),
                rng.random_range(1..=max_n),
                rng.random_range(1..=config.cols),
                rng.random_range(1..=16),
            )
        });
        for variant in MacVariant::ALL {
            cases.push(MatmulCase {
                variant,
                config,
                dims: (m, n, p),
                width,
            });
        }
    }
    cases
}

fn matmuls(opts: &VerifyOptions) -> SectionReport {
    let cases = matmul_cases(opts);
    let parts = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let stream = (3 << SECTION_SHIFT) | i as u64;
            let MatmulCase {
                variant,
                config,
                dims: (m, n, p),
                width,
            } = *case;
            let failure = |expected: String, got: String| Failure {
                case: i as u64,
                description: format!(
                    "{variant} {m}x{n} * {n}x{p} at {width} bits on {}",
                    config.topology()
                ),
                expected,
                got,
                reproducer: format!(
                    "bitsmm matmul --variant {variant} --topo {} --m {m} --n {n} --p {p} --width {width} --seed {} --stream {stream}",
                    config.topology(),
                    opts.seed
                ),
            };
            let mut tally = Tally::default();
            let outcome = random_matmul_operands(opts.seed, stream, (m, n, p), width).and_then(
                |(a, b)| {
                    let mut sa =
                        SystolicArray::<i64>::with_recode(config, variant, opts.recode)?;
                    let run = sa.run_matmul(&a, &b, width)?;
                    Ok((oracle_matmul(&a, &b)?, run))
                },
            );
            match outcome {
                Ok((expected, run)) => {
                    let s = &run.stats;
                    let mut seen = vec![false; config.mac_count()];
                    for beat in &run.beats {
                        seen[beat.row * config.cols + beat.col] = true;
                    }
                    let laws = s.compute_cycles == (n as u64 + 1) * width as u64
                        && s.readout_cycles == config.mac_count() as u64
                        && s.fill_cycles == (m + p - 2) as u64
                        && s.is_consistent()
                        && run.beats.len() == config.mac_count()
                        && seen.iter().all(|&x| x);
                    tally.check(run.c == expected && laws, || {
                        failure(
                            format!("{:?}", expected.as_slice()),
                            format!(
                                "{:?} (fill {}, compute {}, readout {}, total {})",
                                run.c.as_slice(),
                                s.fill_cycles,
                                s.compute_cycles,
                                s.readout_cycles,
                                s.total_cycles
                            ),
                        )
                    });
                }
                Err(e) => tally.check(false, || failure("a result".into(), e.to_string())),
            }
            tally
        })
        .collect();
    Tally::section("matmul", parts)
}

/// Number of pairs in the exhaustive section of the full suite.
pub fn exhaustive_case_count(widths: std::ops::RangeInclusive<u32>) -> u64 {
    MacVariant::ALL.len() as u64 * widths.map(|w| 1u64 << (2 * w)).sum::<u64>()
}

/// Outcome of the Booth-versus-SBMwC array comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub cases: u64,
    pub mismatches: u64,
    pub oracle_mismatches: u64,
    pub first_mismatch: Option<u64>,
}

/// Runs `cases` random products on small random arrays with both MAC
/// variants and compares the outputs.
pub fn variant_equivalence(seed: u64, cases: u64) -> EquivalenceReport {
    let outcomes: Vec<(bool, bool)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, (4 << SECTION_SHIFT) | i);
            let config = SaConfig::new(rng.random_range(1..=4), rng.random_range(1..=4))
                .expect("non-empty array");
            let dims = (
                rng.random_range(1..=config.rows),
                rng.random_range(1..=8),
                rng.random_range(1..=config.cols),
            );
            let width = rng.random_range(1..=16);
            let outcome = (|| -> Result<(bool, bool)> {
                let (a, b) = random_matmul_operands(seed, (5 << SECTION_SHIFT) | i, dims, width)?;
                let booth = SystolicArray::<i64>::new(config, MacVariant::Booth)?
                    .run_matmul(&a, &b, width)?;
                let sbmwc = SystolicArray::<i64>::new(config, MacVariant::Sbmwc)?
                    .run_matmul(&a, &b, width)?;
                Ok((booth.c == sbmwc.c, booth.c == oracle_matmul(&a, &b)?))
            })();
            outcome.unwrap_or((false, false))
        })
        .collect();
    EquivalenceReport {
        cases,
        mismatches: outcomes.iter().filter(|o| !o.0).count() as u64,
        oracle_mismatches: outcomes.iter().filter(|o| !o.1).count() as u64,
        first_mismatch: outcomes.iter().position(|o| !o.0).map(|i| i as u64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmath::BoothAction;

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let opts = VerifyOptions::new(42, true);
        let first = run(&opts);
        assert!(first.passed(), "{:?}", first.first_failure());
        assert_eq!(
            first.sections[0].cases,
            exhaustive_case_count(exhaustive_widths(true))
        );
        assert_eq!(run(&opts), first);
    }

    #[test]
    fn injected_fault_is_reported() {
        let mut opts = VerifyOptions::new(1, true);
        opts.recode = RecodeTable::BOOTH.with_row(true, false, BoothAction::AddM);
        let report = run(&opts);
        assert!(!report.passed());
        let (section, failure) = report.first_failure().unwrap();
        assert_eq!(section, "mac-exhaustive");
        assert!(failure.reproducer.starts_with("bitsmm mac --variant booth"));
        // SBMwC units do not use the table
        assert!(report.sections[0].failures < report.sections[0].cases / 2);
    }

    #[test]
    fn exhaustive_count_formula() {
        assert_eq!(exhaustive_case_count(1..=8), 2 * 87_380);
    }

    #[test]
    fn operands_are_replayable() {
        assert_eq!(
            random_dot_operands(7, 3, 20, 9),
            random_dot_operands(7, 3, 20, 9)
        );
        assert_ne!(
            random_dot_operands(7, 3, 20, 9),
            random_dot_operands(7, 4, 20, 9)
        );
    }

    #[test]
    fn small_equivalence_run() {
        let r = variant_equivalence(3, 200);
        assert_eq!((r.mismatches, r.oracle_mismatches), (0, 0));
    }
}
