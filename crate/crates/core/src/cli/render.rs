use std::fmt::Write as _;

use crate::oracle::EmpiricalTailMoments;
use crate::risk_measures::RiskReport;

fn fmt_num(v: f64, prec: usize) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.prec$}")
    }
}

fn row(out: &mut String, label: &str, v: &[f64], prec: usize) {
    let w = prec + 8;
    let _ = write!(out, "{label:<16}");
    for x in v {
        let _ = write!(out, "{:>w$}", fmt_num(*x, prec));
    }
    out.push('\n');
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn matrix(out: &mut String, title: &str, m: &[Vec<f64>], err: Option<&Vec<Vec<f64>>>, prec: usize) {
    out.push('\n');
    out.push_str(title);
    if let Some(e) = err {
        let _ = write!(out, "  (max error {:.1e})", max_abs(e.iter().flatten().copied()));
    }
    out.push('\n');
    for r in m {
        row(out, "", r, prec);
    }
}

pub fn text(r: &RiskReport, prec: usize) -> String {
    let mut out = String::new();
    let md = &r.metadata;
    let _ = writeln!(
        out,
        "{:<16}{} generator, {} skewing, {} root, n = {}",
        "distribution",
        md.generator.name(),
        md.skew.name(),
        md.root.name(),
        r.dimension
    );
    if let Some(q) = &md.quantiles {
        row(&mut out, "quantiles", q, prec);
    }
    row(&mut out, "VaR", &r.var_vector, prec);
    row(&mut out, "lambda", &r.lambda, prec);
    let _ = writeln!(out, "{:<16}{:.6e} ± {:.1e}", "tail prob", r.tail_prob, r.error_bars.tail_prob);
    if !md.converged {
        let _ = writeln!(out, "{:<16}some integrals hit the subdivision budget; see error bars", "warning");
    }
    if let Some(m) = &r.mtce {
        out.push('\n');
        let e = r.error_bars.mtce.as_ref().map(|e| max_abs(e.iter().copied())).unwrap_or(0.0);
        let _ = writeln!(out, "MTCE  (max error {e:.1e})");
        row(&mut out, "", m, prec);
    }
    if let Some(m) = &r.mtcov {
        matrix(&mut out, "MTCov", m, r.error_bars.mtcov.as_ref(), prec);
    }
    if let Some(m) = &r.mtcorr {
        matrix(&mut out, "MTCorr", m, r.error_bars.mtcorr.as_ref(), prec);
    }
    if let Some(t) = r.tv {
        out.push('\n');
        let _ = writeln!(out, "{:<16}{} ± {:.1e}", "TV", fmt_num(t, prec), r.error_bars.tv.unwrap_or(0.0));
    }
    out
}

pub fn csv(r: &RiskReport) -> String {
    let mut out = String::from("measure,i,j,value,error\n");
    let vec = |out: &mut String, name: &str, v: &[f64], e: &[f64]| {
        for (i, (x, err)) in v.iter().zip(e).enumerate() {
            let _ = writeln!(out, "{name},{},,{x},{err}", i + 1);
        }
    };
    let mat = |out: &mut String, name: &str, m: &[Vec<f64>], e: &[Vec<f64>]| {
        for (i, (row, erow)) in m.iter().zip(e).enumerate() {
            for (j, (x, err)) in row.iter().zip(erow).enumerate() {
                let _ = writeln!(out, "{name},{},{},{x},{err}", i + 1, j + 1);
            }
        }
    };
    let eb = &r.error_bars;
    vec(&mut out, "var", &r.var_vector, &eb.var_vector);
    vec(&mut out, "lambda", &r.lambda, &vec![0.0; r.lambda.len()]);
    let _ = writeln!(out, "tail_prob,,,{},{}", r.tail_prob, eb.tail_prob);
    if let (Some(m), Some(e)) = (&r.mtce, &eb.mtce) {
        vec(&mut out, "mtce", m, e);
    }
    if let (Some(m), Some(e)) = (&r.mtcov, &eb.mtcov) {
        mat(&mut out, "mtcov", m, e);
    }
    if let (Some(m), Some(e)) = (&r.mtcorr, &eb.mtcorr) {
        mat(&mut out, "mtcorr", m, e);
    }
    if let (Some(t), Some(e)) = (r.tv, eb.tv) {
        let _ = writeln!(out, "tv,,,{t},{e}");
    }
    out
}

/// One analytic-versus-oracle line.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub entry: String,
    pub analytic: f64,
    pub oracle: f64,
    pub se: f64,
}

impl Comparison {
    /// Within three standard errors; an unusable standard error fails.
    pub fn pass(&self) -> bool {
        self.se.is_finite() && (self.analytic - self.oracle).abs() <= 3.0 * self.se
    }
}

pub fn comparisons(r: &RiskReport, o: &EmpiricalTailMoments) -> Vec<Comparison> {
    let mut out = vec![Comparison {
        entry: "tail_prob".into(),
        analytic: r.tail_prob,
        oracle: o.tail_prob_hat,
        se: o.se_tail_prob,
    }];
    if let Some(m) = &r.mtce {
        for (i, v) in m.iter().enumerate() {
            out.push(Comparison { entry: format!("mtce[{}]", i + 1), analytic: *v, oracle: o.mtce_hat[i], se: o.se_mtce[i] });
        }
    }
    if let Some(m) = &r.mtcov {
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.push(Comparison {
                    entry: format!("mtcov[{},{}]", i + 1, j + 1),
                    analytic: *v,
                    oracle: o.mtcov_hat[i][j],
                    se: o.se_mtcov[i][j],
                });
            }
        }
    }
    out
}

pub fn comparison_text(c: &[Comparison], o: &EmpiricalTailMoments, prec: usize) -> String {
    let mut out = String::new();
    let w = prec + 8;
    let _ = writeln!(
        out,
        "\noracle: kept {} of {} rows\n{:<14}{:>w$}{:>w$}{:>w$}{:>8}  result",
        o.kept_count, o.sample_count, "entry", "analytic", "oracle", "se", "|z|"
    );
    for x in c {
        let z = (x.analytic - x.oracle).abs() / x.se;
        let _ = writeln!(
            out,
            "{:<14}{:>w$}{:>w$}{:>w$}{:>8.2}  {}",
            x.entry,
            fmt_num(x.analytic, prec),
            fmt_num(x.oracle, prec),
            format!("{:.1e}", x.se),
            z,
            if x.pass() { "PASS" } else { "FAIL" }
        );
    }
    let failed = c.iter().filter(|x| !x.pass()).count();
    if failed == 0 {
        let _ = writeln!(out, "all {} entries PASS at 3 SE", c.len());
    } else {
        let _ = writeln!(out, "{failed} of {} entries FAIL at 3 SE", c.len());
    }
    out
}
