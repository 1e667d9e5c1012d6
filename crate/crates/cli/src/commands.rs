use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bitsmm::bitmath::{oracle_dot, oracle_product, BoothAction, RecodeTable};
use bitsmm::perfmodel::{
    self, PerfQuery, PublishedPoint, ASIC_MAX_FREQ_POINTS, ASIC_TARGET_POINTS, FPGA_POINTS,
    TOPOLOGIES,
};
use bitsmm::sa::{oracle_matmul, Grid};
use bitsmm::trace::{CsvTraceSink, TeeSink, TraceSink, VcdTraceSink};
use bitsmm::verify::{self, random_dot_operands, random_matmul_operands, VerifyOptions};
use bitsmm::{Array, Driver, MacConfig, MacVariant, Matrix, Rational, SaConfig, SignedWord};
use serde::Serialize;

use crate::args::{
    MacArgs, MatmulArgs, OperandArgs, SweepArgs, TraceArgs, VerifyArgs, OUT_DIR_ENV,
};
use crate::output::{emit, status};
use crate::{CmdResult, Failure};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn verdict(pass: bool) -> CmdResult {
    if pass {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

#[derive(Serialize)]
struct MacRow {
    variant: &'static str,
    width: u32,
    n: usize,
    a: Option<i64>,
    b: Option<i64>,
    result: i64,
    oracle: i64,
    cycles: u64,
    predicted_cycles: u64,
    status: &'static str,
}

pub fn mac(args: &MacArgs) -> CmdResult {
    let variant = MacVariant::from(args.variant);
    let width = args.width;
    MacConfig::default().check_width(width)?;
    let driver = Driver::new(variant, MacConfig::default())?;
    let (run, oracle, n, a, b) = if args.dot {
        let n = args.n.ok_or_else(|| usage("--dot needs --n"))?;
        let seed = args.seed.ok_or_else(|| usage("--dot needs --seed"))?;
        let (xs, ys) = random_dot_operands(seed, args.stream, n, width);
        (
            driver.dot(&xs, &ys, width)?,
            oracle_dot(&xs, &ys),
            n,
            None,
            None,
        )
    } else {
        let (Some(a), Some(b)) = (args.a, args.b) else {
            return Err(usage("give --a and --b, or --dot"));
        };
        let (x, y) = (SignedWord::new(a, width)?, SignedWord::new(b, width)?);
        let oracle = oracle_product(x, y) as i128;
        (driver.multiply(x, y)?, oracle, 1, Some(a), Some(b))
    };
    let predicted = (n as u64 + 1) * width as u64;
    let pass = run.result == oracle && run.cycles == predicted;
    emit(
        args.format,
        &[MacRow {
            variant: variant.name(),
            width,
            n,
            a,
            b,
            result: run.result as i64,
            oracle: oracle as i64,
            cycles: run.cycles,
            predicted_cycles: predicted,
            status: status(pass),
        }],
    )?;
    verdict(pass)
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let file = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Matrix::read_csv(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Resolves `A`, `B` and the stream width from files, the identity option or
/// the random generator.
fn operands(op: &OperandArgs, cfg: &SaConfig) -> Result<(Matrix, Matrix, u32), Failure> {
    if let (Some(a_path), Some(b_path)) = (&op.a_file, &op.b_file) {
        let (a, b) = (read_matrix(a_path)?, read_matrix(b_path)?);
        let width = op.width.unwrap_or(a.width().max(b.width()));
        return Ok((a, b, width));
    }
    let seed = op
        .seed
        .ok_or_else(|| usage("random matrices need --seed (or use --a-file/--b-file)"))?;
    let width = op
        .width
        .ok_or_else(|| usage("random matrices need --width"))?;
    let m = op.m.unwrap_or(cfg.rows);
    let p = op.p.unwrap_or(cfg.cols);
    if op.identity {
        if op.n.is_some_and(|n| n != m) {
            return Err(usage("--identity makes A square; --n must equal --m"));
        }
        let a = Matrix::identity(m, width)?;
        let b = Matrix::random(&mut verify::case_rng(seed, op.stream), m, p, width)?;
        return Ok((a, b, width));
    }
    let n = op.n.ok_or_else(|| usage("random matrices need --n"))?;
    let (a, b) = random_matmul_operands(seed, op.stream, (m, n, p), width)?;
    Ok((a, b, width))
}

#[derive(Serialize)]
struct MatmulRow {
    variant: &'static str,
    topology: String,
    rows: usize,
    cols: usize,
    m: usize,
    n: usize,
    p: usize,
    width: u32,
    fill_cycles: u64,
    compute_cycles: u64,
    readout_cycles: u64,
    total_cycles: u64,
    measured_op_per_cycle: f64,
    measured_op_per_cycle_without_fill: f64,
    model_op_per_cycle: f64,
    status: &'static str,
}

fn ratio_f64(r: &Rational) -> f64 {
    bitsmm::PerfScalar::to_f64(r)
}

pub fn matmul(args: &MatmulArgs) -> CmdResult {
    let cfg = args.array.config()?;
    let (a, b, width) = operands(&args.operands, &cfg)?;
    let variant = MacVariant::from(args.variant);
    let mut array = Array::new(cfg, variant)?;
    let run = array.run_matmul(&a, &b, width)?;
    let expected = oracle_matmul(&a, &b)?;
    let query = PerfQuery {
        n: a.cols() as u64,
        a_width_elems: b.cols() as u64,
        b_height_elems: a.rows() as u64,
        bit_width: width,
        sa_width: cfg.cols as u64,
        sa_height: cfg.rows as u64,
        freq_hz: None,
    };
    let check = perfmodel::validate_model(&run.stats, &query)?;
    let s = &run.stats;
    let pass = run.c == expected;
    if let Some(path) = &args.c_out {
        write_grid(path, &run.c)?;
    }
    emit(
        args.format,
        &[MatmulRow {
            variant: variant.name(),
            topology: cfg.topology(),
            rows: cfg.rows,
            cols: cfg.cols,
            m: a.rows(),
            n: a.cols(),
            p: b.cols(),
            width,
            fill_cycles: s.fill_cycles,
            compute_cycles: s.compute_cycles,
            readout_cycles: s.readout_cycles,
            total_cycles: s.total_cycles,
            measured_op_per_cycle: ratio_f64(&check.measured_op_per_cycle),
            measured_op_per_cycle_without_fill: ratio_f64(
                &check.measured_op_per_cycle_without_fill,
            ),
            model_op_per_cycle: ratio_f64(&check.model_op_per_cycle),
            status: status(pass),
        }],
    )?;
    verdict(pass)
}

fn write_grid(path: &Path, grid: &Grid<i128>) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in 0..grid.rows() {
        w.write_record((0..grid.cols()).map(|c| grid.get(r, c).to_string()))
            .map_err(|e| usage(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyRow {
    section: &'static str,
    cases: u64,
    failures: u64,
    status: &'static str,
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let mut opts = VerifyOptions::new(args.seed, args.quick);
    if args.inject_fault {
        opts.recode = RecodeTable::BOOTH.with_row(true, false, BoothAction::AddM);
    }
    let report = verify::run(&opts);
    let mut rows: Vec<VerifyRow> = report
        .sections
        .iter()
        .map(|s| VerifyRow {
            section: s.name,
            cases: s.cases,
            failures: s.failures,
            status: status(s.passed()),
        })
        .collect();
    rows.push(VerifyRow {
        section: "total",
        cases: report.total_cases(),
        failures: report.total_failures(),
        status: status(report.passed()),
    });
    emit(args.format, &rows)?;
    if let Some((section, f)) = report.first_failure() {
        eprintln!(
            "first failure in {section}, case {}: {}",
            f.case, f.description
        );
        eprintln!("  expected {}", f.expected);
        eprintln!("  got      {}", f.got);
        eprintln!("  reproduce: {}", f.reproducer);
    }
    verdict(report.passed())
}

#[derive(Serialize)]
struct SweepRow {
    source: String,
    topology: String,
    bit_width: u32,
    n: Option<u64>,
    freq_mhz: Option<u64>,
    op_per_cycle: f64,
    op_per_cycle_exact: String,
    gops: Option<f64>,
    reported_gops: Option<f64>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| usage(format!("bad {what} `{t}`"))))
        .collect()
}

fn parse_widths(s: &str) -> Result<Vec<u32>, Failure> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad width range `{s}`")))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad width range `{s}`")))?;
        return Ok((lo..=hi).collect());
    }
    parse_list(s, "width")
}

fn published_rows(source: &str, points: &[PublishedPoint]) -> Vec<SweepRow> {
    points
        .iter()
        .map(|p| {
            let peak: Rational = perfmodel::peak_op_per_cycle(p.sa_width, p.sa_height, 16);
            SweepRow {
                source: format!("{source}{}", p.platform),
                topology: p.design.to_string(),
                bit_width: 16,
                n: None,
                freq_mhz: Some(p.freq_mhz),
                op_per_cycle: ratio_f64(&peak),
                op_per_cycle_exact: peak.to_string(),
                gops: Some(p.model_gops::<Rational>()),
                reported_gops: Some(p.gops),
            }
        })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> CmdResult {
    let (topologies, widths, freqs, n) = if args.preset.is_some() {
        (TOPOLOGIES.to_vec(), (1..=16).collect(), Vec::new(), None)
    } else {
        let topologies = parse_list::<SaConfig>(&args.topo, "topology")?
            .into_iter()
            .map(|c| (c.cols as u64, c.rows as u64))
            .collect::<Vec<_>>();
        let freqs = parse_list::<u64>(&args.freqs_mhz, "frequency")?
            .into_iter()
            .map(|mhz| mhz * 1_000_000)
            .collect::<Vec<_>>();
        (topologies, parse_widths(&args.widths)?, freqs, args.n)
    };
    if topologies.is_empty() || widths.is_empty() {
        return Err(usage("sweep axes must not be empty"));
    }
    let points = perfmodel::sweep::<Rational>(&topologies, &widths, &freqs, n)?;
    let mut rows: Vec<SweepRow> = points
        .into_iter()
        .map(|p| SweepRow {
            source: "model".into(),
            topology: p.topology,
            bit_width: p.bit_width,
            n: p.n,
            freq_mhz: p.freq_hz.map(|f| f / 1_000_000),
            op_per_cycle: ratio_f64(&p.op_per_cycle),
            op_per_cycle_exact: p.op_per_cycle.to_string(),
            gops: p.gops,
            reported_gops: None,
        })
        .collect();
    if args.preset.is_some() {
        rows.extend(published_rows("", &FPGA_POINTS));
        rows.extend(published_rows("max-freq ", &ASIC_MAX_FREQ_POINTS));
        rows.extend(published_rows("target-freq ", &ASIC_TARGET_POINTS));
    }
    emit(args.format, &rows)
}

fn parse_probe(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("probe `{s}` is not `row,col`"));
    let (r, c) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        r.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    ))
}

fn default_trace_path() -> Result<PathBuf, Failure> {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
            Ok(dir.join("trace.csv"))
        }
        None => Ok(PathBuf::from("trace.csv")),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn trace(args: &TraceArgs) -> CmdResult {
    let cfg = args.topo;
    let probe = parse_probe(&args.probe)?;
    let (a, b, width) = match (args.a, args.b) {
        (Some(x), Some(y)) => {
            let width = args.operands.width.unwrap_or(cfg.b_max());
            // the multiplier streams in from the left, the multiplicand from the top
            (
                Matrix::new(1, 1, width, vec![y])?,
                Matrix::new(1, 1, width, vec![x])?,
                width,
            )
        }
        _ => operands(&args.operands, &cfg)?,
    };
    let out = match &args.out {
        Some(p) => p.clone(),
        None => default_trace_path()?,
    };
    let mut csv_sink = CsvTraceSink::new(create(&out)?)?;
    let mut vcd_sink = match &args.vcd {
        Some(p) => Some(VcdTraceSink::new(
            create(p)?,
            cfg.mac.acc_width(),
            cfg.b_max(),
        )?),
        None => None,
    };
    let mut sinks: Vec<&mut dyn TraceSink> = vec![&mut csv_sink];
    if let Some(v) = vcd_sink.as_mut() {
        sinks.push(v);
    }
    let mut tee = TeeSink::new(sinks);
    let variant = MacVariant::from(args.variant);
    let mut array = Array::new(cfg, variant)?;
    let run = array.run_matmul_traced(&a, &b, width, probe, &mut tee)?;
    drop(tee);
    csv_sink.into_inner()?.flush()?;
    let pass = run.c == oracle_matmul(&a, &b)?;
    eprintln!(
        "{} cycles of MAC ({}, {}) written to {}; result {}",
        run.stats.total_cycles,
        probe.0,
        probe.1,
        out.display(),
        status(pass)
    );
    verdict(pass)
}
