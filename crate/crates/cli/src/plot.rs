use std::fmt::Write;
use std::path::Path;

use crate::table::fmt_g;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2 { oracle: bool },
    Fig3,
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', "''"))
}

/// Gnuplot script that plots `csv`. `series` holds the `n_T` values for the first
/// figure and the transmissions for the third; it is ignored for the second.
pub fn gnuplot_script(fig: Figure, csv: &Path, series: &[f64]) -> String {
    let data = quote(csv);
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset key top left\n",
    );
    let plots: Vec<String> = match fig {
        Figure::Fig1 => {
            s.push_str("set logscale x\nset xlabel '<n>'\nset ylabel 'Fisher information'\n");
            series
                .iter()
                .flat_map(|&nt| {
                    let v = fmt_g(nt);
                    [
                        format!("{data} using 1:($2=={v} ? $3 : 1/0) with lines title 'C_Q^{{min}}, n_T={v}'"),
                        format!("{data} using 1:($2=={v} ? $4 : 1/0) with lines dashtype 2 title 'F_Q, n_T={v}'"),
                    ]
                })
                .collect()
        }
        Figure::Fig2 { oracle } => {
            s.push_str("set logscale x\nset xlabel '<n>'\nset ylabel 'Fisher information'\n");
            let mut p = vec![
                format!("{data} using 1:2 with lines title 'C_Q^{{min}}'"),
                format!("{data} using 1:3 with lines dashtype 2 title 'I_M'"),
            ];
            if oracle {
                p.push(format!(
                    "{data} using 1:4 with points pointtype 7 title 'oracle F_Q'"
                ));
            }
            p
        }
        Figure::Fig3 => {
            s.push_str("set logscale xy\nset format y '%g'\nset xlabel 'photon flux'\nset ylabel 'MSE bound'\n");
            series
                .iter()
                .map(|&eta| {
                    let v = fmt_g(eta);
                    format!("{data} using 1:($2=={v} ? $3 : 1/0) with linespoints title 'eta={v}'")
                })
                .collect()
        }
    };
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_references_csv_and_columns() {
        let s = gnuplot_script(Figure::Fig3, Path::new("out/it's.csv"), &[0.95, 1.0]);
        assert!(s.contains("'out/it''s.csv' using 1:($2==0.95 ? $3 : 1/0)"));
        assert!(s.contains("$2==1 ?"));
        assert!(s.ends_with('\n'));
        let s = gnuplot_script(Figure::Fig2 { oracle: false }, Path::new("a.csv"), &[]);
        assert!(!s.contains("1:4"));
    }
}
