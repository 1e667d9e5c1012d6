//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built without the libtest harness so the lines reach the terminal;
//! `cargo test --test acceptance` exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::Instant;

use bitsmm::bitmath::oracle_product;
use bitsmm::perfmodel::{
    self, PerfQuery, ASIC_MAX_FREQ_POINTS, ASIC_TARGET_POINTS, FPGA_POINTS, GOPS_TOLERANCE,
    TOPOLOGIES,
};
use bitsmm::sa::oracle_matmul;
use bitsmm::trace::CsvTraceSink;
use bitsmm::verify::{self, case_rng, random_dot_operands, random_word, VerifyOptions};
use bitsmm::{Array, Driver, MacConfig, MacVariant, Rational, SaConfig, SignedWord};
use num_rational::Ratio;

const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn drivers() -> Vec<Driver> {
    MacVariant::ALL
        .iter()
        .map(|&v| Driver::new(v, MacConfig::default()).unwrap())
        .collect()
}

fn mac_exhaustive() -> Outcome {
    let mut cases = 0u64;
    for d in drivers() {
        for width in 1..=8u32 {
            let lo = SignedWord::min_value(width);
            let hi = SignedWord::max_value(width);
            for a in lo..=hi {
                for b in lo..=hi {
                    let (a, b) = (
                        SignedWord::new(a, width).unwrap(),
                        SignedWord::new(b, width).unwrap(),
                    );
                    let run = d.multiply(a, b).map_err(|e| e.to_string())?;
                    if run.result != oracle_product(a, b) as i128 {
                        return Err(format!(
                            "{} {} * {} at width {width}: got {}",
                            d.unit().variant().name(),
                            a.value(),
                            b.value(),
                            run.result
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} pairs"))
}

fn mac_random() -> Outcome {
    let mut cases = 0u64;
    for d in drivers() {
        for width in 9..=16u32 {
            let mut rng = case_rng(SEED, width as u64);
            for _ in 0..200 {
                let a = random_word(&mut rng, width);
                let b = random_word(&mut rng, width);
                let run = d.multiply(a, b).map_err(|e| e.to_string())?;
                if run.result != oracle_product(a, b) as i128 {
                    return Err(format!(
                        "{} {} * {} at width {width}",
                        d.unit().variant().name(),
                        a.value(),
                        b.value()
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} pairs"))
}

fn dot_latency() -> Outcome {
    let mut cases = 0u64;
    for d in drivers() {
        for width in 1..=16u32 {
            for (i, &n) in [1usize, 2, 10, 100, 1000].iter().enumerate() {
                let (a, b) = random_dot_operands(SEED, (width as u64) << 8 | i as u64, n, width);
                let run = d.dot(&a, &b, width).map_err(|e| e.to_string())?;
                let want = (n as u64 + 1) * width as u64;
                if run.cycles != want {
                    return Err(format!(
                        "width {width}, n {n}: {} cycles, want {want}",
                        run.cycles
                    ));
                }
                if run.result != bitsmm::bitmath::oracle_dot(&a, &b) {
                    return Err(format!("width {width}, n {n}: wrong dot product"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} streams"))
}

fn sa_correctness() -> Outcome {
    let mut cases = 0u64;
    for cfg in SaConfig::presets() {
        for variant in MacVariant::ALL {
            let mut array = Array::new(cfg, variant).map_err(|e| e.to_string())?;
            let mut rng = case_rng(SEED, cfg.mac_count() as u64);
            let mut shapes = vec![(cfg.rows, 8, cfg.cols)];
            for _ in 0..3 {
                use rand::Rng;
                shapes.push((
                    rng.random_range(1..=cfg.rows),
                    rng.random_range(1..=8),
                    rng.random_range(1..=cfg.cols),
                ));
            }
            for (k, &(m, n, p)) in shapes.iter().enumerate() {
                let width = [16, 8, 3, 1][k];
                let (a, b) = verify::random_matmul_operands(SEED, cases, (m, n, p), width)
                    .map_err(|e| e.to_string())?;
                let run = array.run_matmul(&a, &b, width).map_err(|e| e.to_string())?;
                if run.c != oracle_matmul(&a, &b).unwrap() {
                    return Err(format!(
                        "{} {} {m}x{n}x{p} width {width}",
                        variant.name(),
                        cfg.topology()
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} products on 16x4, 32x8, 64x16"))
}

fn readout_law() -> Outcome {
    for cfg in SaConfig::presets() {
        let mut array = Array::new(cfg, MacVariant::Booth).map_err(|e| e.to_string())?;
        let (a, b) = verify::random_matmul_operands(SEED, 7, (cfg.rows, 4, cfg.cols), 8)
            .map_err(|e| e.to_string())?;
        let run = array.run_matmul(&a, &b, 8).map_err(|e| e.to_string())?;
        let cells = (cfg.rows * cfg.cols) as u64;
        if run.stats.readout_cycles != cells || run.beats.len() as u64 != cells {
            return Err(format!("{}: {} beats", cfg.topology(), run.beats.len()));
        }
        if run.beats.windows(2).any(|w| w[1].cycle != w[0].cycle + 1) {
            return Err(format!(
                "{}: beats not on consecutive cycles",
                cfg.topology()
            ));
        }
        if run.beats.last().unwrap().cycle + 1 != run.stats.total_cycles {
            return Err(format!("{}: drain does not end the run", cfg.topology()));
        }
        let seen: HashSet<_> = run.beats.iter().map(|b| (b.row, b.col)).collect();
        if seen.len() as u64 != cells {
            return Err(format!(
                "{}: snake order is not a bijection",
                cfg.topology()
            ));
        }
        if !run.stats.is_consistent() {
            return Err(format!("{}: inconsistent cycle stats", cfg.topology()));
        }
    }
    Ok("rows*cols beats, one per cycle, bijective".into())
}

fn throughput() -> Outcome {
    for p in FPGA_POINTS.iter().chain(&ASIC_TARGET_POINTS) {
        let peak: Rational = perfmodel::peak_op_per_cycle(p.sa_width, p.sa_height, 16);
        let got = perfmodel::gops(&peak, p.freq_mhz * 1_000_000);
        if got != p.gops {
            return Err(format!(
                "{} {} @ {} MHz: {got} != {}",
                p.design, p.platform, p.freq_mhz, p.gops
            ));
        }
    }
    let mut worst = 0.0f64;
    for p in &ASIC_MAX_FREQ_POINTS {
        let got = p.model_gops::<Rational>();
        worst = worst.max((got - p.gops).abs());
        if (got - p.gops).abs() > GOPS_TOLERANCE {
            return Err(format!(
                "{} {} @ {} MHz: {got} vs {}",
                p.design, p.platform, p.freq_mhz, p.gops
            ));
        }
    }
    Ok(format!(
        "300 MHz points exact, max-frequency error {worst:.4} GOPS"
    ))
}

fn throughput_curves() -> Outcome {
    let widths: Vec<u32> = (1..=16).collect();
    let rows =
        perfmodel::sweep::<Rational>(&TOPOLOGIES, &widths, &[], None).map_err(|e| e.to_string())?;
    if rows.len() != 48 {
        return Err(format!("{} rows", rows.len()));
    }
    for r in &rows {
        let want = Ratio::new((r.sa_width * r.sa_height) as i128, r.bit_width as i128);
        if r.op_per_cycle != want {
            return Err(format!(
                "{} width {}: {}",
                r.topology, r.bit_width, r.op_per_cycle
            ));
        }
    }
    let at = |w: u32| {
        rows.iter()
            .find(|r| r.topology == "64x16" && r.bit_width == w)
            .unwrap()
    };
    if at(1).op_per_cycle != Ratio::from_integer(1024)
        || at(16).op_per_cycle != Ratio::from_integer(64)
    {
        return Err("64x16 end points".into());
    }
    Ok("48 points exact, 64x16: 1024 -> 64".into())
}

fn convergence() -> Outcome {
    let mut worst = Ratio::from_integer(1);
    for &(w, h) in &TOPOLOGIES {
        for bits in 1..=16 {
            let q = PerfQuery::full(w, h, bits, 1_000_000);
            let op: Rational = perfmodel::op_per_cycle(&q);
            let peak: Rational = perfmodel::peak_op_per_cycle(w, h, bits);
            let ratio = op / peak;
            worst = worst.min(ratio);
            if ratio < Ratio::new(99, 100) || ratio > Ratio::from_integer(1) {
                return Err(format!("{w}x{h} width {bits}: {ratio}"));
            }
        }
    }
    Ok(format!(
        "worst ratio to peak {:.6}",
        *worst.numer() as f64 / *worst.denom() as f64
    ))
}

fn equivalence() -> Outcome {
    let r = verify::variant_equivalence(SEED, 10_000);
    if r.mismatches == 0 && r.oracle_mismatches == 0 {
        Ok(format!("{} cases identical", r.cases))
    } else {
        Err(format!(
            "{} variant mismatches, {} oracle mismatches, first at case {:?}",
            r.mismatches, r.oracle_mismatches, r.first_mismatch
        ))
    }
}

fn traced_run(seed: u64) -> Result<Vec<u8>, String> {
    let cfg: SaConfig = "16x4".parse().map_err(|e: bitsmm::Error| e.to_string())?;
    let mut array = Array::new(cfg, MacVariant::Sbmwc).map_err(|e| e.to_string())?;
    let (a, b) =
        verify::random_matmul_operands(seed, 0, (4, 6, 16), 12).map_err(|e| e.to_string())?;
    let mut sink = CsvTraceSink::new(Vec::new()).map_err(|e| e.to_string())?;
    let run = array
        .run_matmul_traced(&a, &b, 12, (2, 5), &mut sink)
        .map_err(|e| e.to_string())?;
    let mut bytes = sink.into_inner().map_err(|e| e.to_string())?;
    bytes.extend(format!("{:?}", run).into_bytes());
    Ok(bytes)
}

fn determinism() -> Outcome {
    let opts = VerifyOptions::new(SEED, true);
    let first = format!("{:?}", verify::run(&opts));
    let second = format!("{:?}", verify::run(&opts));
    if first != second {
        return Err("verification reports differ".into());
    }
    if traced_run(SEED)? != traced_run(SEED)? {
        return Err("traces differ".into());
    }
    if traced_run(SEED)? == traced_run(SEED + 1)? {
        return Err("seed has no effect".into());
    }
    Ok("reports and traces byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("mac exhaustive widths 1-8", mac_exhaustive),
        ("mac random widths 9-16", mac_random),
        ("dot-product latency (n+1)*width", dot_latency),
        ("array matmul vs oracle", sa_correctness),
        ("snake readout law", readout_law),
        ("published GOPS points", throughput),
        ("peak throughput curves", throughput_curves),
        ("finite-n model convergence", convergence),
        ("booth/sbmwc equivalence", equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
