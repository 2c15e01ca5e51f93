//! Stochastic weight averaging.

use super::net::DenseNet;

/// Running arithmetic mean of parameter snapshots:
/// `theta <- (n * theta + w) / (n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwaState {
    /// Network holding the averaged parameters.
    pub average: DenseNet,
    /// Number of snapshots folded in.
    pub n_swa: u64,
}

impl SwaState {
    /// Starts an empty average with the architecture of `net`.
    /// Parameters are ignored until the first [`SwaState::update`].
    pub fn new(net: &DenseNet) -> Self {
        SwaState {
            average: net.clone(),
            n_swa: 0,
        }
    }

    /// Folds one snapshot into the running mean.
    pub fn update(&mut self, snapshot: &DenseNet) {
        assert_eq!(
            self.average.layers.len(),
            snapshot.layers.len(),
            "snapshot architecture changed under SWA"
        );
        let n = self.n_swa as f64;
        let denom = n + 1.0;
        for (avg, cur) in self.average.layers.iter_mut().zip(&snapshot.layers) {
            assert_eq!(avg.weights.raw_dim(), cur.weights.raw_dim());
            if self.n_swa == 0 {
                avg.weights.assign(&cur.weights);
                avg.bias.assign(&cur.bias);
            } else {
                azip_mean(avg.weights.iter_mut(), cur.weights.iter(), n, denom);
                azip_mean(avg.bias.iter_mut(), cur.bias.iter(), n, denom);
            }
        }
        self.n_swa += 1;
    }
}

fn azip_mean<'a>(
    avg: impl Iterator<Item = &'a mut f64>,
    cur: impl Iterator<Item = &'a f64>,
    n: f64,
    denom: f64,
) {
    for (a, &c) in avg.zip(cur) {
        *a = (n * *a + c) / denom;
    }
}
