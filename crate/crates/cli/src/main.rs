use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod plot;
mod table;

use args::{with_config, Cli, Command};
use plot::{gnuplot_script, Figure};
use table::Table;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(varqfi::Error),
    /// Some table rows failed; the table was still written.
    RowsFailed(usize),
    Io(io::Error),
}

impl From<varqfi::Error> for CliError {
    fn from(e: varqfi::Error) -> Self {
        use varqfi::Error as E;
        match e {
            E::InvalidDimension(_) | E::InvalidParameter { .. } | E::Domain(_) | E::Shape(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) | CliError::RowsFailed(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::RowsFailed(n) => {
                write!(f, "numerical failure in {n} rows; see the error column")
            }
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn emit_table(cli: &Cli, table: &Table, fig: Figure, series: &[f64]) -> Result<(), CliError> {
    match &cli.common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_csv(&mut w)?;
            w.flush()?;
            if let Some(plot) = &cli.common.plot {
                std::fs::write(plot, gnuplot_script(fig, path, series))?;
            }
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let c = &cli.common;
    if !(c.tol_rel > 0.0 && c.tol_rel < 1.0) {
        return Err(CliError::Usage(format!(
            "--tol-rel must lie in (0, 1), got {}",
            c.tol_rel
        )));
    }
    if c.plot.is_some() && c.out.is_none() {
        return Err(CliError::Usage(
            "--plot needs --out so the script can reference the CSV".into(),
        ));
    }
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Fig1(a) => emit_table(cli, &commands::fig1(a)?, Figure::Fig1, &a.n_thermal),
        Command::Fig2(a) => emit_table(
            cli,
            &commands::fig2(a)?,
            Figure::Fig2 { oracle: a.oracle },
            &[],
        ),
        Command::Fig3(a) => {
            let (table, failed) = commands::fig3(a, c.tol_rel)?;
            emit_table(cli, &table, Figure::Fig3, &a.eta)?;
            match failed {
                0 => Ok(()),
                n => Err(CliError::RowsFailed(n)),
            }
        }
        Command::Bound(a) => {
            println!("{}", commands::bound(a)?);
            Ok(())
        }
        Command::Oracle(a) => {
            println!("{}", commands::oracle(a)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let argv = match with_config(std::env::args_os().collect::<Vec<OsString>>()) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("usage error: {m}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
