use std::path::PathBuf;

use bitsmm::{MacVariant, SaConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default directory for trace files.
pub const OUT_DIR_ENV: &str = "BITSMM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "bitsmm",
    version,
    about = "Cycle-accurate bit-serial systolic array simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one multiplication or dot product through a single MAC.
    ///
    /// CSV columns: variant,width,n,a,b,result,oracle,cycles,predicted_cycles,status
    Mac(MacArgs),
    /// Multiply two matrices on the array and check against the oracle.
    ///
    /// CSV columns: variant,topology,rows,cols,m,n,p,width,fill_cycles,
    /// compute_cycles,readout_cycles,total_cycles,measured_op_per_cycle,
    /// measured_op_per_cycle_without_fill,model_op_per_cycle,status
    Matmul(MatmulArgs),
    /// Run the full verification suite.
    ///
    /// CSV columns: section,cases,failures,status
    Verify(VerifyArgs),
    /// Evaluate the throughput model over topologies, widths and clocks.
    ///
    /// CSV columns: source,topology,bit_width,n,freq_mhz,op_per_cycle,
    /// op_per_cycle_exact,gops,reported_gops
    Sweep(SweepArgs),
    /// Write a per-cycle trace of one MAC during an array run.
    ///
    /// CSV columns: cycle,phase,row,col,reset,enable,v_t,mc_bit,ml_bit,edge,
    /// mul,action,acc,acc_diff,m_mc,mc_reg,mask,s_m,read_port
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Booth,
    Sbmwc,
}

impl From<VariantArg> for MacVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Booth => MacVariant::Booth,
            VariantArg::Sbmwc => MacVariant::Sbmwc,
        }
    }
}

#[derive(Debug, Args)]
pub struct MacArgs {
    #[arg(long, value_enum, default_value = "booth")]
    pub variant: VariantArg,
    /// Operand width in bits (1-16).
    #[arg(long, default_value_t = 16)]
    pub width: u32,
    /// Multiplicand.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "dot")]
    pub a: Option<i64>,
    /// Multiplier.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "dot")]
    pub b: Option<i64>,
    /// Random dot product instead of a single multiplication.
    #[arg(long, requires_all = ["n", "seed"])]
    pub dot: bool,
    /// Dot-product length.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generator stream; verification reproducers set it.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ArrayArgs {
    /// Array topology as <cols>x<rows>; overrides --rows/--cols.
    #[arg(long)]
    pub topo: Option<SaConfig>,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 16)]
    pub cols: usize,
}

impl ArrayArgs {
    pub fn config(&self) -> bitsmm::Result<SaConfig> {
        match self.topo {
            Some(cfg) => Ok(cfg),
            None => SaConfig::new(self.rows, self.cols),
        }
    }
}

#[derive(Debug, Args)]
pub struct OperandArgs {
    /// Operand width in bits; defaults to the widest input matrix.
    #[arg(long)]
    pub width: Option<u32>,
    /// Rows of A; defaults to the array rows.
    #[arg(long)]
    pub m: Option<usize>,
    /// Shared dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns of B; defaults to the array columns.
    #[arg(long)]
    pub p: Option<usize>,
    /// Seed for random matrices.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Matrix file for A (`width,<bits>` header, then CSV rows).
    #[arg(long, requires = "b_file")]
    pub a_file: Option<PathBuf>,
    #[arg(long, requires = "a_file")]
    pub b_file: Option<PathBuf>,
    /// Use the identity for A (with a random B).
    #[arg(long, conflicts_with = "a_file")]
    pub identity: bool,
}

#[derive(Debug, Args)]
pub struct MatmulArgs {
    #[arg(long, value_enum, default_value = "booth")]
    pub variant: VariantArg,
    #[command(flatten)]
    pub array: ArrayArgs,
    #[command(flatten)]
    pub operands: OperandArgs,
    /// Write the product matrix here as CSV.
    #[arg(long)]
    pub c_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reduced suite.
    #[arg(long)]
    pub quick: bool,
    /// Negative control: swap one Booth control-table row.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Throughput curves of the evaluated topologies and the published
    /// implementation points.
    #[value(alias = "paper")]
    Published,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, conflicts_with_all = ["topo", "widths", "freqs_mhz", "n"])]
    pub preset: Option<Preset>,
    /// Comma-separated topologies (<cols>x<rows>).
    #[arg(long, default_value = "16x4,32x8,64x16")]
    pub topo: String,
    /// Widths as `lo..hi` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "1..16")]
    pub widths: String,
    /// Comma-separated clock frequencies in whole MHz.
    #[arg(long, default_value = "")]
    pub freqs_mhz: String,
    /// Finite shared dimension; peak throughput when omitted.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value = "booth")]
    pub variant: VariantArg,
    /// Array topology as <cols>x<rows>.
    #[arg(long, default_value = "1x1")]
    pub topo: SaConfig,
    /// Single multiplication: multiplicand.
    #[arg(long, allow_negative_numbers = true, requires = "b")]
    pub a: Option<i64>,
    /// Single multiplication: multiplier.
    #[arg(long, allow_negative_numbers = true, requires = "a")]
    pub b: Option<i64>,
    #[command(flatten)]
    pub operands: OperandArgs,
    /// MAC to observe, as `row,col`.
    #[arg(long, default_value = "0,0")]
    pub probe: String,
    /// CSV trace path; defaults to `trace.csv` in $BITSMM_OUT_DIR or the
    /// working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a value-change dump.
    #[arg(long)]
    pub vcd: Option<PathBuf>,
}
