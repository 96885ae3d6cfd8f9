//! Training telemetry rows and their CSV encoding.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::optim::StepDiagnostics;

pub const CSV_HEADER: &str = "run_id,optimizer,step,epoch,split,loss,accuracy,lr,s_t,zeta_s,delta_t,rho_t,boost,grad_norm,update_norm";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Optimizer-side values attached to a training row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepTelemetry {
    Zeta(StepDiagnostics),
    Adam {
        lr: f64,
        grad_norm: f64,
        update_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub run_id: String,
    pub optimizer: String,
    pub step: u64,
    pub epoch: usize,
    pub split: Split,
    pub loss: f64,
    pub accuracy: f64,
    /// Absent on evaluation rows.
    pub telemetry: Option<StepTelemetry>,
}

/// Renders `x` with 9 significant digits, `%.9g` style.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl MetricsRecord {
    /// One CSV line without the trailing newline.
    pub fn to_csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
        let (lr, s_t, zeta_s, delta_t, rho_t, boost, grad_norm, update_norm) = match self.telemetry
        {
            None => (None, None, None, None, None, None, None, None),
            Some(StepTelemetry::Zeta(d)) => (
                Some(d.eta_t),
                Some(d.s_t),
                Some(d.zeta_s),
                Some(d.delta_t),
                Some(d.rho_t),
                Some(d.boost),
                Some(d.grad_norm),
                Some(d.update_norm),
            ),
            Some(StepTelemetry::Adam {
                lr,
                grad_norm,
                update_norm,
            }) => (
                Some(lr),
                None,
                None,
                None,
                None,
                None,
                Some(grad_norm),
                Some(update_norm),
            ),
        };
        [
            csv_field(&self.run_id),
            csv_field(&self.optimizer),
            self.step.to_string(),
            self.epoch.to_string(),
            self.split.to_string(),
            fmt_sig9(self.loss),
            fmt_sig9(self.accuracy),
            opt(lr),
            opt(s_t),
            opt(zeta_s),
            opt(delta_t),
            opt(rho_t),
            opt(boost),
            opt(grad_norm),
            opt(update_norm),
        ]
        .join(",")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Streams records to a CSV file, header first.
pub struct MetricsWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        w.write_line(CSV_HEADER)?;
        Ok(w)
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn write(&mut self, record: &MetricsRecord) -> Result<()> {
        self.write_line(&record.to_csv_line())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_metrics_csv(records: &[MetricsRecord], path: &Path) -> Result<()> {
    let mut w = MetricsWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}
