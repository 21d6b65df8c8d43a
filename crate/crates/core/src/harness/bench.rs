use std::time::Instant;

use crate::alloc::{EfxState, Item, PropxState};
use crate::baselines::{stream_generate, StreamKind, StreamSpec};
use crate::error::Result;
use crate::framework::{potential_step, DeficitModel};

pub const BENCH_SIZES: [usize; 4] = [4, 8, 16, 32];

/// Mean seconds per round at each size, and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub name: &'static str,
    pub sizes: Vec<usize>,
    pub seconds_per_round: Vec<f64>,
    pub slope: f64,
    /// Expected slope range.
    pub range: (f64, f64),
}

impl ScalingReport {
    pub fn in_range(&self) -> bool {
        self.slope >= self.range.0 && self.slope <= self.range.1
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn time_rounds<M: DeficitModel<Input = Item>>(mut model: M, items: &[Item]) -> Result<f64> {
    let start = Instant::now();
    for item in items {
        potential_step(&mut model, item)?;
    }
    Ok(start.elapsed().as_secs_f64() / items.len().max(1) as f64)
}

fn items(n: usize, rounds: usize) -> Result<Vec<Item>> {
    stream_generate(&StreamSpec {
        kind: StreamKind::UniformRandom { scale: 1.0 },
        n,
        length: rounds,
        seed: Some(n as u64),
    })
}

/// Per-round cost of the potential rule for PROPx and EFx across sizes.
pub fn run_bench(rounds: usize) -> Result<Vec<ScalingReport>> {
    let sizes = BENCH_SIZES.to_vec();
    let mut propx = Vec::new();
    let mut efx = Vec::new();
    for &n in &sizes {
        let g = items(n, rounds)?;
        propx.push(time_rounds(PropxState::new(n)?, &g)?);
        efx.push(time_rounds(EfxState::new(n)?, &g)?);
    }
    let xs: Vec<f64> = sizes.iter().map(|n| *n as f64).collect();
    Ok(vec![
        ScalingReport {
            name: "propx",
            sizes: sizes.clone(),
            slope: loglog_slope(&xs, &propx),
            seconds_per_round: propx,
            range: (0.7, 1.4),
        },
        ScalingReport {
            name: "efx",
            sizes,
            slope: loglog_slope(&xs, &efx),
            seconds_per_round: efx,
            range: (1.6, 2.5),
        },
    ])
}
