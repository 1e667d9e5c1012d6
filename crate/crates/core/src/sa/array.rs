use crate::bitmath::{RecodeTable, SignedWord};
use crate::error::{Error, Result};
use crate::mac::{
    BitSerialMac, MacCycleInput, MacSnapshot, MacUnit, MacVariant, P2s, ShiftDirection, StepInfo,
};
use crate::scalar::AccWord;
use crate::trace::{Phase, TraceRecord, TraceSink};

use super::readout::{ReadoutBeat, SnakeReadout};
use super::schedule::{EdgeInputs, InputSchedule};
use super::stats::{CycleStats, MacActivity, ToggleCounts};
use super::{Grid, Matrix, SaConfig};

/// Vertical (multiplicand) stream between rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct VLane {
    bit: bool,
    v_t: bool,
    enable: bool,
}

impl VLane {
    fn flips(self, other: VLane) -> u64 {
        (self.bit != other.bit) as u64
            + (self.v_t != other.v_t) as u64
            + (self.enable != other.enable) as u64
    }
}

/// Horizontal (multiplier) stream between columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct HLane {
    bit: bool,
    enable: bool,
}

impl HLane {
    fn flips(self, other: HLane) -> u64 {
        (self.bit != other.bit) as u64 + (self.enable != other.enable) as u64
    }
}

/// One observed MAC for one cycle. `before` holds its registers before the
/// clock edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRecord {
    pub row: usize,
    pub col: usize,
    pub input: MacCycleInput,
    pub info: StepInfo,
    pub before: MacSnapshot,
}

/// Result of one global clock cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaStep {
    pub cycle: u64,
    /// Value on the output port during this cycle.
    pub beat: Option<ReadoutBeat>,
    pub enabled_macs: usize,
    pub probe: Option<ProbeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatmulRun {
    /// `m x p` product gathered from the readout port.
    pub c: Grid<i128>,
    /// Every beat of the drain, in arrival order.
    pub beats: Vec<ReadoutBeat>,
    pub stats: CycleStats,
}

/// Output-stationary bit-serial array.
#[derive(Debug, Clone)]
pub struct SystolicArray<T: AccWord> {
    config: SaConfig,
    variant: MacVariant,
    recode: RecodeTable,
    macs: Grid<MacUnit<T>>,
    /// `(rows-1) x cols`; entry `(r, c)` feeds MAC `(r+1, c)`.
    v_pipes: Grid<VLane>,
    /// `rows x (cols-1)`; entry `(r, c)` feeds MAC `(r, c+1)`.
    h_pipes: Grid<HLane>,
    p2s_v: Vec<P2s>,
    p2s_h: Vec<P2s>,
    /// Column-driver value toggles; flip on every multiplicand load.
    col_vt: Vec<bool>,
    /// Width of the words most recently loaded into a converter.
    width: u32,
    readout: SnakeReadout,
    cycle: u64,
    activity: Grid<MacActivity>,
    toggles: ToggleCounts,
}

impl<T: AccWord> SystolicArray<T> {
    pub fn new(config: SaConfig, variant: MacVariant) -> Result<Self> {
        Self::with_recode(config, variant, RecodeTable::BOOTH)
    }

    /// Builds an array whose Booth units use `recode` (fault-injection hook).
    pub fn with_recode(config: SaConfig, variant: MacVariant, recode: RecodeTable) -> Result<Self> {
        config.mac.validate::<T>()?;
        let (rows, cols) = (config.rows, config.cols);
        Ok(Self {
            config,
            variant,
            recode,
            macs: Grid::from_fn(rows, cols, |_, _| {
                MacUnit::new(variant, &config.mac, recode)
            }),
            v_pipes: Grid::filled(rows - 1, cols, VLane::default()),
            h_pipes: Grid::filled(rows, cols - 1, HLane::default()),
            p2s_v: vec![P2s::new(ShiftDirection::MsbFirstShiftLeft); cols],
            p2s_h: vec![P2s::new(ShiftDirection::LsbFirstShiftRight); rows],
            col_vt: vec![false; cols],
            width: config.mac.b_max,
            readout: SnakeReadout::new(rows, cols),
            cycle: 0,
            activity: Grid::filled(rows, cols, MacActivity::default()),
            toggles: ToggleCounts::default(),
        })
    }

    pub fn config(&self) -> &SaConfig {
        &self.config
    }

    pub fn variant(&self) -> MacVariant {
        self.variant
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn mac(&self, r: usize, c: usize) -> &MacUnit<T> {
        self.macs.get(r, c)
    }

    /// Current result register of every MAC.
    pub fn results(&self) -> Grid<i128> {
        Grid::from_fn(self.config.rows, self.config.cols, |r, c| {
            self.macs.get(r, c).result().to_wide()
        })
    }

    pub fn activity(&self) -> &Grid<MacActivity> {
        &self.activity
    }

    pub fn toggles(&self) -> ToggleCounts {
        self.toggles
    }

    pub fn readout_pending(&self) -> usize {
        self.readout.pending()
    }

    /// Global reset: clears every register, counter and statistic.
    pub fn reset(&mut self) {
        *self = Self::with_recode(self.config, self.variant, self.recode)
            .expect("configuration was validated at construction");
    }

    /// Whether some MAC still has both operand streams arriving, judged from
    /// the propagation registers and, on the edges, the converters.
    pub fn is_busy(&self) -> bool {
        let (rows, cols) = (self.config.rows, self.config.cols);
        (0..rows).any(|r| {
            (0..cols).any(|c| {
                let v = if r == 0 {
                    self.p2s_v[c].valid()
                } else {
                    self.v_pipes.get(r - 1, c).enable
                };
                let h = if c == 0 {
                    self.p2s_h[r].valid()
                } else {
                    self.h_pipes.get(r, c - 1).enable
                };
                v && h
            })
        })
    }

    /// Advances one global clock cycle.
    ///
    /// `read_enable` asserts the readout enable during this cycle: at its
    /// clock edge the chain captures every MAC result, after the MACs have
    /// taken their own step. Values appear at the port from the next cycle.
    pub fn step(&mut self, inputs: &EdgeInputs, read_enable: bool) -> Result<SaStep> {
        self.step_probed(inputs, read_enable, None)
    }

    pub fn step_probed(
        &mut self,
        inputs: &EdgeInputs,
        read_enable: bool,
        probe: Option<(usize, usize)>,
    ) -> Result<SaStep> {
        let (rows, cols) = (self.config.rows, self.config.cols);
        let cycle = self.cycle;
        if inputs.cols.len() != cols || inputs.rows.len() != rows {
            return Err(Error::Config(format!(
                "edge inputs sized {}x{} for a {rows}x{cols} array",
                inputs.rows.len(),
                inputs.cols.len()
            )));
        }

        let mut v_edge = Vec::with_capacity(cols);
        for (c, lane) in inputs.cols.iter().enumerate() {
            if let Some(word) = lane.load {
                self.load(c, word, true)?;
            }
            let hold = self.p2s_v[c].hold();
            let bit = self.p2s_v[c].step();
            self.toggles.p2s += (hold ^ self.p2s_v[c].hold()).count_ones() as u64;
            v_edge.push(VLane {
                bit,
                v_t: self.col_vt[c],
                enable: lane.enable,
            });
        }
        let mut h_edge = Vec::with_capacity(rows);
        for (r, lane) in inputs.rows.iter().enumerate() {
            if let Some(word) = lane.load {
                self.load(r, word, false)?;
            }
            let hold = self.p2s_h[r].hold();
            let bit = self.p2s_h[r].step();
            self.toggles.p2s += (hold ^ self.p2s_h[r].hold()).count_ones() as u64;
            h_edge.push(HLane {
                bit,
                enable: lane.enable,
            });
        }

        let v_in = Grid::from_fn(rows, cols, |r, c| {
            if r == 0 {
                v_edge[c]
            } else {
                *self.v_pipes.get(r - 1, c)
            }
        });
        let h_in = Grid::from_fn(rows, cols, |r, c| {
            if c == 0 {
                h_edge[r]
            } else {
                *self.h_pipes.get(r, c - 1)
            }
        });

        let mut enabled_macs = 0;
        let mut probed = None;
        for r in 0..rows {
            for c in 0..cols {
                let (v, h) = (*v_in.get(r, c), *h_in.get(r, c));
                let input = MacCycleInput {
                    mc_bit: v.bit,
                    ml_bit: h.bit,
                    v_t: v.v_t,
                    enable: v.enable && h.enable,
                    reset: false,
                    width: self.width,
                };
                let mac = self.macs.get_mut(r, c);
                let before = (probe == Some((r, c))).then(|| mac.snapshot());
                let info = mac.step(&input);
                if let Some(before) = before {
                    probed = Some(ProbeRecord {
                        row: r,
                        col: c,
                        input,
                        info,
                        before,
                    });
                }
                if info.enabled {
                    enabled_macs += 1;
                }
                self.toggles.accumulator += info.acc_toggles as u64;
                self.toggles.datapath += info.datapath_toggles as u64;
                record_activity(self.activity.get_mut(r, c), cycle, &info);
            }
        }

        for r in 1..rows {
            for c in 0..cols {
                let slot = self.v_pipes.get_mut(r - 1, c);
                let next = *v_in.get(r - 1, c);
                self.toggles.pipeline += slot.flips(next);
                *slot = next;
            }
        }
        for r in 0..rows {
            for c in 1..cols {
                let slot = self.h_pipes.get_mut(r, c - 1);
                let next = *h_in.get(r, c - 1);
                self.toggles.pipeline += slot.flips(next);
                *slot = next;
            }
        }

        let beat = self.readout.shift(cycle);
        if read_enable {
            if self.readout.draining() || self.is_busy() {
                return Err(Error::ReadoutBusy);
            }
            let macs = &self.macs;
            self.readout
                .capture(|r, c| macs.get(r, c).result().to_wide());
        }

        self.cycle += 1;
        Ok(SaStep {
            cycle,
            beat,
            enabled_macs,
            probe: probed,
        })
    }

    fn load(&mut self, lane: usize, word: SignedWord, vertical: bool) -> Result<()> {
        let p2s = if vertical {
            self.col_vt[lane] = !self.col_vt[lane];
            &mut self.p2s_v[lane]
        } else {
            &mut self.p2s_h[lane]
        };
        p2s.load(word).map_err(|kind| Error::Protocol {
            cycle: self.cycle,
            kind,
        })?;
        self.width = word.width();
        Ok(())
    }

    /// Asserts the readout enable on an idle cycle and drains the chain.
    /// Beats come back in arrival order; each carries its MAC position.
    pub fn read_outputs(&mut self) -> Result<Vec<ReadoutBeat>> {
        let idle = EdgeInputs::idle(&self.config);
        self.step(&idle, true)?;
        self.drain(None)
    }

    fn drain(
        &mut self,
        mut trace: Option<(&mut dyn TraceSink, (usize, usize))>,
    ) -> Result<Vec<ReadoutBeat>> {
        let idle = EdgeInputs::idle(&self.config);
        let mut beats = Vec::with_capacity(self.readout.pending());
        while self.readout.draining() {
            let probe = trace.as_ref().map(|t| t.1);
            let step = self.step_probed(&idle, false, probe)?;
            if let Some((sink, _)) = trace.as_mut() {
                emit(*sink, &step, Phase::Readout)?;
            }
            beats.extend(step.beat);
        }
        Ok(beats)
    }

    /// Resets the array, computes `A * B` and drains the result.
    pub fn run_matmul(&mut self, a: &Matrix, b: &Matrix, width: u32) -> Result<MatmulRun> {
        self.run(a, b, width, None)
    }

    /// As [`run_matmul`](Self::run_matmul), tracing MAC `probe` on every
    /// cycle including the drain.
    pub fn run_matmul_traced(
        &mut self,
        a: &Matrix,
        b: &Matrix,
        width: u32,
        probe: (usize, usize),
        sink: &mut dyn TraceSink,
    ) -> Result<MatmulRun> {
        if probe.0 >= self.config.rows || probe.1 >= self.config.cols {
            return Err(Error::Config(format!(
                "probe ({}, {}) is outside the array",
                probe.0, probe.1
            )));
        }
        self.run(a, b, width, Some((sink, probe)))
    }

    fn run(
        &mut self,
        a: &Matrix,
        b: &Matrix,
        width: u32,
        mut trace: Option<(&mut dyn TraceSink, (usize, usize))>,
    ) -> Result<MatmulRun> {
        let schedule = InputSchedule::new(&self.config, a, b, width)?;
        self.reset();
        let span = schedule.span();
        for t in 0..span {
            let probe = trace.as_ref().map(|t| t.1);
            let step = self.step_probed(&schedule.inputs_at(t), t + 1 == span, probe)?;
            if let Some((sink, _)) = trace.as_mut() {
                emit(*sink, &step, Phase::Compute)?;
            }
        }
        let beats = match trace {
            Some((sink, probe)) => {
                let beats = self.drain(Some((&mut *sink, probe)))?;
                sink.finish()?;
                beats
            }
            None => self.drain(None)?,
        };
        let mut full = Grid::filled(self.config.rows, self.config.cols, 0i128);
        for beat in &beats {
            *full.get_mut(beat.row, beat.col) = beat.value;
        }
        let stats = self.stats(beats.len() as u64);
        Ok(MatmulRun {
            c: full.sub_grid(a.rows(), b.cols()),
            beats,
            stats,
        })
    }

    /// Cycle accounting measured from per-MAC activity.
    pub fn stats(&self, readout_cycles: u64) -> CycleStats {
        let acts = self.activity.as_slice();
        let compute = acts.iter().map(|a| a.enabled_cycles).max().unwrap_or(0);
        let first = acts.iter().filter_map(|a| a.first_enabled).min();
        let last = acts.iter().filter_map(|a| a.last_enabled).max();
        let active_span = match (first, last) {
            (Some(f), Some(l)) => l - f + 1,
            _ => 0,
        };
        CycleStats {
            fill_cycles: active_span - compute,
            compute_cycles: compute,
            readout_cycles,
            total_cycles: self.cycle,
            toggles: self.toggles,
            activity: self.activity.clone(),
        }
    }
}

fn record_activity(act: &mut MacActivity, cycle: u64, info: &StepInfo) {
    if !info.enabled {
        return;
    }
    act.enabled_cycles += 1;
    act.first_enabled.get_or_insert(cycle);
    act.last_enabled = Some(cycle);
    if info.edge {
        act.edges += 1;
        act.first_edge.get_or_insert(cycle);
    }
    if info.mul {
        act.muls += 1;
        act.first_mul.get_or_insert(cycle);
    }
    act.toggles += (info.acc_toggles + info.datapath_toggles) as u64;
}

fn emit(sink: &mut dyn TraceSink, step: &SaStep, phase: Phase) -> Result<()> {
    let p = step.probe.expect("probe requested");
    sink.record(&TraceRecord {
        cycle: step.cycle,
        phase,
        row: p.row,
        col: p.col,
        input: p.input,
        info: p.info,
        regs: p.before,
        read_port: step.beat.map(|b| b.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sa::{oracle_matmul, snake_path};
    use crate::trace::MemorySink;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn array(rows: usize, cols: usize, v: MacVariant) -> SystolicArray<i64> {
        SystolicArray::new(SaConfig::new(rows, cols).unwrap(), v).unwrap()
    }

    #[test]
    fn quiescent_step() {
        let mut sa = array(3, 2, MacVariant::Booth);
        let fresh = sa.clone();
        let step = sa.step(&EdgeInputs::idle(sa.config()), false).unwrap();
        assert_eq!((step.cycle, step.enabled_macs, step.beat), (0, 0, None));
        assert_eq!(sa.cycle(), 1);
        assert_eq!(sa.results(), fresh.results());
        assert_eq!(sa.toggles(), ToggleCounts::default());
    }

    #[test]
    fn single_mac_worked_example() {
        for v in MacVariant::ALL {
            let mut sa = array(1, 1, v);
            let a = Matrix::new(1, 1, 4, vec![-2]).unwrap();
            let b = Matrix::new(1, 1, 4, vec![6]).unwrap();
            let run = sa.run_matmul(&a, &b, 4).unwrap();
            assert_eq!(run.c.as_slice(), &[-12]);
            let s = &run.stats;
            assert_eq!(
                (s.fill_cycles, s.compute_cycles, s.readout_cycles),
                (0, 8, 1)
            );
            assert_eq!(s.total_cycles, 9);
            assert_eq!(run.beats[0].cycle, 8);
        }
    }

    #[test]
    fn two_by_two_sentinels_follow_the_snake() {
        let mut sa = array(2, 2, MacVariant::Sbmwc);
        // B = identity, so C carries the sentinels in A
        let a = Matrix::new(2, 2, 8, vec![11, 12, 21, 22]).unwrap();
        let b = Matrix::identity(2, 8).unwrap();
        let run = sa.run_matmul(&a, &b, 8).unwrap();
        assert_eq!(run.c.as_slice(), &[11, 12, 21, 22]);
        let order: Vec<_> = run.beats.iter().map(|b| (b.row, b.col)).collect();
        let mut path = snake_path(2, 2);
        path.reverse();
        assert_eq!(order, path);
        let cycles: Vec<_> = run.beats.iter().map(|b| b.cycle).collect();
        let first = cycles[0];
        assert_eq!(cycles, (first..first + 4).collect::<Vec<_>>());
    }

    #[test]
    fn skew_cancels_at_every_mac() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = SaConfig::new(4, 5).unwrap();
        for width in [1, 3, 8] {
            let a = Matrix::random(&mut rng, 4, 3, width).unwrap();
            let b = Matrix::random(&mut rng, 3, 5, width).unwrap();
            let mut sa = SystolicArray::<i64>::new(cfg, MacVariant::Booth).unwrap();
            let run = sa.run_matmul(&a, &b, width).unwrap();
            for (r, c, act) in run.stats.activity.iter() {
                assert_eq!(act.lead(), Some(width as u64), "({r}, {c})");
                assert_eq!(act.first_enabled, Some((r + c) as u64));
                assert_eq!(act.enabled_cycles, 4 * width as u64);
            }
        }
    }

    #[test]
    fn matmul_matches_oracle_and_cycle_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg: SaConfig = "16x4".parse().unwrap();
        let a = Matrix::random(&mut rng, 4, 4, 8).unwrap();
        let b = Matrix::random(&mut rng, 4, 4, 8).unwrap();
        for v in MacVariant::ALL {
            let mut sa = SystolicArray::<i64>::new(cfg, v).unwrap();
            let run = sa.run_matmul(&a, &b, 8).unwrap();
            assert_eq!(run.c, oracle_matmul(&a, &b).unwrap());
            let s = &run.stats;
            assert_eq!(s.compute_cycles, 5 * 8);
            assert_eq!(s.fill_cycles, 6);
            assert_eq!(s.readout_cycles, 64);
            assert!(s.is_consistent());
        }
    }

    #[test]
    fn disabled_macs_do_not_toggle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Matrix::random(&mut rng, 2, 6, 7).unwrap();
        let b = Matrix::random(&mut rng, 6, 3, 7).unwrap();
        let mut sa = array(4, 5, MacVariant::Booth);
        let run = sa.run_matmul(&a, &b, 7).unwrap();
        for (r, c, act) in run.stats.activity.iter() {
            if r < 2 && c < 3 {
                assert!(act.toggles > 0);
            } else {
                assert_eq!(*act, MacActivity::default(), "({r}, {c})");
            }
        }
    }

    #[test]
    fn readout_is_rejected_while_busy() {
        let cfg = SaConfig::new(2, 2).unwrap();
        let a = Matrix::new(2, 2, 4, vec![1, 2, 3, 4]).unwrap();
        let schedule = InputSchedule::new(&cfg, &a, &a, 4).unwrap();
        let mut sa = SystolicArray::<i64>::new(cfg, MacVariant::Booth).unwrap();
        sa.step(&schedule.inputs_at(0), false).unwrap();
        assert!(matches!(
            sa.step(&schedule.inputs_at(1), true),
            Err(Error::ReadoutBusy)
        ));
    }

    #[test]
    fn standalone_read_outputs() {
        let mut sa = array(1, 1, MacVariant::Booth);
        let beats = sa.read_outputs().unwrap();
        assert_eq!(beats.len(), 1);
        assert_eq!((beats[0].cycle, beats[0].value), (1, 0));
        let mut sa = array(2, 2, MacVariant::Booth);
        assert!(matches!(
            {
                let idle = EdgeInputs::idle(sa.config());
                sa.step(&idle, true).and_then(|_| sa.step(&idle, true))
            },
            Err(Error::ReadoutBusy)
        ));
    }

    #[test]
    fn probe_trace_length() {
        for width in [1, 4, 16] {
            let mut sa = array(1, 1, MacVariant::Booth);
            let a = Matrix::new(1, 1, width, vec![0]).unwrap();
            let mut sink = MemorySink::default();
            sa.run_matmul_traced(&a, &a, width, (0, 0), &mut sink)
                .unwrap();
            assert_eq!(sink.records.len(), 2 * width as usize + 1);
            assert!(sink.records[0].regs.is_zero());
            assert_eq!(sink.records.last().unwrap().phase, Phase::Readout);
        }
    }

    #[test]
    fn reused_array_gives_identical_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::random(&mut rng, 3, 4, 6).unwrap();
        let b = Matrix::random(&mut rng, 4, 3, 6).unwrap();
        let mut sa = array(3, 3, MacVariant::Sbmwc);
        let first = sa.run_matmul(&a, &b, 6).unwrap();
        let second = sa.run_matmul(&a, &b, 6).unwrap();
        assert_eq!(first, second);
    }
}
