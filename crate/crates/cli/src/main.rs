use clap::{Args, Parser, Subcommand};
use jscatter_cli::{
    cmd_diagnose, cmd_forward, cmd_gallery, cmd_inverse, cmd_roundtrip, CliError, GallerySpec, RunConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Forward and inverse scattering for Jacobi matrices with spectrum [-2, 2].
#[derive(Parser)]
#[command(name = "jscatter", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Points on the unit circle (power of two, at least 64).
    #[arg(long, global = true, default_value_t = 1024)]
    grid: usize,
    /// Hankel truncation M (at most grid/4).
    #[arg(long, global = true, default_value_t = 256)]
    trunc: usize,
    /// Regularization ladder, comma separated and decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_unitarity: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_wronskian: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_roundtrip: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_defect: f64,
    #[arg(long, global = true, default_value_t = 1e-4)]
    tol_gram: f64,
    /// Nodes with |s| below this are masked when dividing by s.
    #[arg(long, global = true, default_value_t = 1e-8)]
    s_floor: f64,
    /// Log-modulus values below -log_floor are clipped.
    #[arg(long, global = true, default_value_t = 50.0)]
    log_floor: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig {
            grid_size: self.grid,
            truncation: self.trunc,
            tol_unitarity: self.tol_unitarity,
            tol_wronskian: self.tol_wronskian,
            tol_roundtrip: self.tol_roundtrip,
            tol_defect: self.tol_defect,
            tol_gram: self.tol_gram,
            s_floor: self.s_floor,
            log_floor: self.log_floor,
            seed: self.seed,
            output_dir: self.out.clone(),
            ..Default::default()
        };
        if let Some(e) = &self.eps {
            c.eps_ladder = e.clone();
        }
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Jacobi file to scattering data, density CSV and residual report.
    Forward { jacobi: PathBuf },
    /// Scattering file to the recovered window and defect report.
    Inverse {
        scattering: PathBuf,
        /// Recover coefficients on [-N, N].
        #[arg(long, default_value_t = 8)]
        half_width: i64,
    },
    /// Forward then inverse, compared with the input.
    Roundtrip { jacobi: PathBuf },
    /// Write the input files of a gallery case.
    Gallery {
        #[command(subcommand)]
        kind: GalleryKind,
    },
    /// A2 trend, Hankel invertibility and uniqueness defect panel.
    Diagnose {
        input: PathBuf,
        /// Random test functions for the weighted inequality.
        #[arg(long, default_value_t = 24)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum GalleryKind {
    Free,
    SingleSite {
        #[arg(long)]
        c: f64,
    },
    RandomWindow {
        #[arg(long, default_value_t = 6)]
        width: usize,
        #[arg(long, default_value_t = 0.3)]
        magnitude: f64,
        /// Defaults to the global --seed.
        #[arg(long)]
        window_seed: Option<u64>,
    },
    BernsteinSzego {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        coeffs: Vec<f64>,
    },
    ExampleNonunique {
        #[arg(long, default_value_t = 0.5)]
        a_plus: f64,
        #[arg(long, default_value_t = 0.5)]
        a_minus: f64,
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SCATTER_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("SCATTER_NUM_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.common.config();
    let run = || {
        configure_threads()?;
        match cli.command {
            Command::Forward { jacobi } => cmd_forward(&jacobi, &cfg),
            Command::Inverse { scattering, half_width } => cmd_inverse(&scattering, half_width, &cfg),
            Command::Roundtrip { jacobi } => cmd_roundtrip(&jacobi, &cfg),
            Command::Diagnose { input, trials } => cmd_diagnose(&input, &cfg, trials),
            Command::Gallery { kind } => {
                let spec = match kind {
                    GalleryKind::Free => GallerySpec::Free,
                    GalleryKind::SingleSite { c } => GallerySpec::SingleSite { c },
                    GalleryKind::RandomWindow { width, magnitude, window_seed } => GallerySpec::RandomWindow {
                        width,
                        magnitude,
                        seed: window_seed.unwrap_or(cfg.seed),
                    },
                    GalleryKind::BernsteinSzego { coeffs } => GallerySpec::BernsteinSzego { coeffs },
                    GalleryKind::ExampleNonunique { a_plus, a_minus, degree } => {
                        GallerySpec::ExampleNonunique { a_plus, a_minus, degree }
                    }
                };
                cmd_gallery(&spec, &cfg)
            }
        }
    };
    match run() {
        Ok(outcome) => {
            print!("{}", outcome.table());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
