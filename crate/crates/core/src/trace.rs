//! Per-cycle trace records and the sinks that persist them.
//!
//! Every record describes one clock cycle of one observed MAC: the inputs it
//! sampled, the register values *before* the clock edge, and the readout port.
//! Register values are therefore all zero in the first record after a reset.

use std::io::Write;

use vcd::{IdCode, TimescaleUnit, Value};

use crate::error::Result;
use crate::mac::{MacCycleInput, MacSnapshot, StepInfo};

/// CSV column names, in order.
pub const TRACE_HEADER: [&str; 19] = [
    "cycle",
    "phase",
    "row",
    "col",
    "reset",
    "enable",
    "v_t",
    "mc_bit",
    "ml_bit",
    "edge",
    "mul",
    "action",
    "acc",
    "acc_diff",
    "m_mc",
    "mc_reg",
    "mask",
    "s_m",
    "read_port",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Compute,
    Readout,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Compute => "compute",
            Phase::Readout => "readout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub phase: Phase,
    pub row: usize,
    pub col: usize,
    pub input: MacCycleInput,
    pub info: StepInfo,
    pub regs: MacSnapshot,
    /// Value presented on the array output port during this cycle.
    pub read_port: Option<i128>,
}

impl TraceRecord {
    /// Recode action column: Booth action, `DUAL` for an SBMwC cycle that
    /// updates both candidates, `NOP` for an idle multiply cycle, `-` when no
    /// multiplication happened.
    pub fn action_label(&self) -> &'static str {
        if !self.info.mul {
            return "-";
        }
        match self.info.booth {
            Some(a) => a.mnemonic(),
            None if self.input.ml_bit => "DUAL",
            None => "NOP",
        }
    }

    pub fn csv_fields(&self) -> [String; 19] {
        let b = |v: bool| if v { "1" } else { "0" }.to_string();
        [
            self.cycle.to_string(),
            self.phase.name().to_string(),
            self.row.to_string(),
            self.col.to_string(),
            b(self.input.reset),
            b(self.input.enable),
            b(self.input.v_t),
            b(self.input.mc_bit),
            b(self.input.ml_bit),
            b(self.info.edge),
            b(self.info.mul),
            self.action_label().to_string(),
            self.regs.acc.to_string(),
            self.regs
                .acc_diff
                .map(|v| v.to_string())
                .unwrap_or_default(),
            self.regs.m_mc.to_string(),
            format!("{:#x}", self.regs.mc_reg),
            format!("{:#x}", self.regs.mask),
            format!("{:#x}", self.regs.s_m),
            self.read_port.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Keeps records in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub records: Vec<TraceRecord>,
}

impl TraceSink for MemorySink {
    fn record(&mut self, rec: &TraceRecord) -> Result<()> {
        self.records.push(rec.clone());
        Ok(())
    }
}

/// Fans every record out to several sinks.
pub struct TeeSink<'a> {
    sinks: Vec<&'a mut dyn TraceSink>,
}

impl<'a> TeeSink<'a> {
    pub fn new(sinks: Vec<&'a mut dyn TraceSink>) -> Self {
        Self { sinks }
    }
}

impl TraceSink for TeeSink<'_> {
    fn record(&mut self, rec: &TraceRecord) -> Result<()> {
        for s in &mut self.sinks {
            s.record(rec)?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        for s in &mut self.sinks {
            s.finish()?;
        }
        Ok(())
    }
}

pub struct CsvTraceSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvTraceSink<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(TRACE_HEADER)?;
        Ok(Self { writer })
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()).into())
    }
}

impl<W: Write> TraceSink for CsvTraceSink<W> {
    fn record(&mut self, rec: &TraceRecord) -> Result<()> {
        self.writer.write_record(rec.csv_fields())?;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

struct VcdSignal {
    id: IdCode,
    width: u32,
    last: Option<u128>,
}

/// Value-change-dump writer; one timestamp per clock cycle.
pub struct VcdTraceSink<W: Write> {
    writer: vcd::Writer<W>,
    signals: Vec<VcdSignal>,
}

const VCD_SIGNALS: usize = 14;

impl<W: Write> VcdTraceSink<W> {
    /// `acc_width` and `b_max` size the register vectors.
    pub fn new(out: W, acc_width: u32, b_max: u32) -> Result<Self> {
        let mut writer = vcd::Writer::new(out);
        writer.timescale(1, TimescaleUnit::NS)?;
        writer.add_module("bitsmm")?;
        let layout: [(&str, u32); VCD_SIGNALS] = [
            ("reset", 1),
            ("enable", 1),
            ("v_t", 1),
            ("mc_bit", 1),
            ("ml_bit", 1),
            ("edge", 1),
            ("mul", 1),
            ("acc", acc_width),
            ("acc_diff", acc_width),
            ("m_mc", acc_width),
            ("mc_reg", 2 * b_max),
            ("mask", b_max),
            ("s_m", 2 * b_max),
            ("read_port", acc_width),
        ];
        let mut signals = Vec::with_capacity(layout.len());
        for (name, width) in layout {
            let id = writer.add_wire(width, name)?;
            signals.push(VcdSignal {
                id,
                width,
                last: None,
            });
        }
        writer.upscope()?;
        writer.enddefinitions()?;
        Ok(Self { writer, signals })
    }

    fn emit(&mut self, idx: usize, value: u128) -> Result<()> {
        let sig = &mut self.signals[idx];
        if sig.last == Some(value) {
            return Ok(());
        }
        sig.last = Some(value);
        if sig.width == 1 {
            self.writer.change_scalar(sig.id, value & 1 == 1)?;
        } else {
            let width = sig.width;
            let bits = (0..width).rev().map(move |i| {
                if i < 128 && (value >> i) & 1 == 1 {
                    Value::V1
                } else {
                    Value::V0
                }
            });
            self.writer.change_vector(sig.id, bits)?;
        }
        Ok(())
    }
}

impl<W: Write> TraceSink for VcdTraceSink<W> {
    fn record(&mut self, rec: &TraceRecord) -> Result<()> {
        self.writer.timestamp(rec.cycle)?;
        let values: [u128; VCD_SIGNALS] = [
            rec.input.reset as u128,
            rec.input.enable as u128,
            rec.input.v_t as u128,
            rec.input.mc_bit as u128,
            rec.input.ml_bit as u128,
            rec.info.edge as u128,
            rec.info.mul as u128,
            rec.regs.acc as u128,
            rec.regs.acc_diff.unwrap_or(0) as u128,
            rec.regs.m_mc as u128,
            rec.regs.mc_reg,
            rec.regs.mask as u128,
            rec.regs.s_m,
            rec.read_port.unwrap_or(0) as u128,
        ];
        for (i, v) in values.into_iter().enumerate() {
            self.emit(i, v)?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}
