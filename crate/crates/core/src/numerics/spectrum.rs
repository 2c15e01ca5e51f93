//! One-sided energy spectra.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One-sided spectrum: strictly increasing nonnegative frequencies with
/// a nonnegative energy per bin.
///
/// "Frequency" is whatever the producer measured in: temporal frequency
/// for Welch spectra, angular wavenumber for spatial spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub energy: Vec<f64>,
}

impl Spectrum {
    /// Validates and wraps the two columns.
    pub fn new(frequencies: Vec<f64>, energy: Vec<f64>) -> Result<Self> {
        if frequencies.len() != energy.len() {
            return Err(Error::ShapeMismatch {
                context: "spectrum columns",
                expected: frequencies.len(),
                got: energy.len(),
            });
        }
        if frequencies.is_empty() {
            return Err(Error::invalid("spectrum must be nonempty"));
        }
        if frequencies[0] < 0.0 {
            return Err(Error::invalid("spectrum frequencies must be nonnegative"));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "spectrum frequencies must be strictly increasing",
            ));
        }
        if energy.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::invalid("spectrum energy must be nonnegative"));
        }
        Ok(Spectrum {
            frequencies,
            energy,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Total energy integrated bin-by-bin with the spectrum's own bin
    /// width (uniform spacing assumed, taken from the first gap; a
    /// single-bin spectrum integrates with weight 1).
    pub fn integrated(&self) -> f64 {
        let df = if self.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            1.0
        };
        self.energy.iter().sum::<f64>() * df
    }

    /// Writes `frequency,energy` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "frequency,energy")?;
        for (f, e) in self.frequencies.iter().zip(&self.energy) {
            writeln!(w, "{f:e},{e:e}")?;
        }
        Ok(())
    }

    /// Parses the format produced by [`Spectrum::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut freqs = Vec::new();
        let mut energy = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "frequency,energy" {
                    return Err(Error::Format {
                        path: "<csv>".into(),
                        reason: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(f), Some(e), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Format {
                    path: "<csv>".into(),
                    reason: format!("line {} is not two columns", i + 1),
                });
            };
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| Error::Format {
                    path: "<csv>".into(),
                    reason: format!("bad number {s:?} on line {}", i + 1),
                })
            };
            freqs.push(parse(f)?);
            energy.push(parse(e)?);
        }
        Spectrum::new(freqs, energy)
    }
}
