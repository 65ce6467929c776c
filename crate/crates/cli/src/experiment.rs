//! Seeded Monte Carlo runs. Every sample draws from its own stream
//! `rng::stream(seed, index)`, so results do not depend on thread count.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xlab_core::qstates::{self, XMode, XParams};
use xlab_core::rng::{self, Stream};
use xlab_core::{epuconv, matcore, measures, DensityMatrix, Error};

use crate::config::{ExperimentConfig, Family, System};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub entanglement: f64,
    pub purity: f64,
    pub rank: usize,
    pub family: String,
    pub sample_index: u64,
}

/// Concurrence for two qubits, `E_T1` for a qubit and a qutrit.
pub fn entanglement(system: System, rho: &DensityMatrix) -> Result<f64, Error> {
    match system {
        System::TwoQubit => measures::concurrence(rho),
        System::QubitQutrit => measures::negativity_e(rho),
    }
}

fn uniform_angles(rng: &mut Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() * FRAC_PI_2).collect()
}

/// Redraws until the rank-specific constructor accepts the parameters.
type RankBuilder = fn(usize, &[f64], &[f64]) -> Result<DensityMatrix, Error>;

fn rank_family_state(rng: &mut Stream, rank: usize, build: RankBuilder) -> Result<DensityMatrix, Error> {
    loop {
        let thetas = uniform_angles(rng, rank);
        let probs = qstates::hyperspherical_probs(&uniform_angles(rng, rank - 1));
        match build(rank, &thetas, &probs) {
            Err(Error::DegenerateRank { .. }) | Err(Error::Domain(_)) => continue,
            other => return other,
        }
    }
}

fn grid_point(k: usize, count: usize) -> f64 {
    if count <= 1 {
        1.0
    } else {
        k as f64 / (count - 1) as f64
    }
}

fn draw_state(cfg: &ExperimentConfig, index: u64) -> Result<Option<DensityMatrix>, Error> {
    let dims = cfg.system.dims();
    let mut rng = rng::stream(cfg.seed, index);
    let pick_rank = |rng: &mut Stream| cfg.rank.unwrap_or_else(|| rng.gen_range(1..=cfg.system.dim()));
    let state = match cfg.family {
        Family::General => {
            let rank = pick_rank(&mut rng);
            qstates::random_mixed(&dims, rank, &mut rng)?
        }
        Family::X => match cfg.rank {
            None => qstates::general_x_state(&XParams::random(&mut rng), XMode::Reduced),
            Some(r) => rank_family_state(&mut rng, r, qstates::rank_x_state)?,
        },
        Family::Lx => {
            let rank = pick_rank(&mut rng);
            rank_family_state(&mut rng, rank, qstates::lx_rank_state)?
        }
        Family::Tgx => {
            let rank = pick_rank(&mut rng);
            rank_family_state(&mut rng, rank, qstates::tgx_rank_state)?
        }
        Family::Mems => {
            let lo = cfg.system.min_purity();
            let p = lo + (1.0 - lo) * grid_point(index as usize, cfg.samples);
            match cfg.system {
                System::TwoQubit => qstates::mems_2x2(p)?,
                System::QubitQutrit => qstates::mems_2x3(p)?,
            }
        }
        Family::H => {
            let side = (cfg.samples as f64).sqrt().ceil().max(1.0) as usize;
            let (a, b) = (index as usize / side, index as usize % side);
            let c = grid_point(a, side);
            let p = 0.25 + 0.75 * grid_point(b, side);
            match qstates::h_state(c, p) {
                Ok(h) => h,
                Err(Error::Domain(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(Some(state))
}

fn record(cfg: &ExperimentConfig, index: u64, rho: &DensityMatrix) -> Result<SampleRecord, Error> {
    Ok(SampleRecord {
        entanglement: entanglement(cfg.system, rho)?,
        purity: rho.purity(),
        rank: rho.rank(),
        family: cfg.family.tag().to_string(),
        sample_index: index,
    })
}

/// Draws `cfg.samples` states from the configured family and measures them.
/// For the `h` family, grid points outside the reachable region are skipped.
pub fn run_scatter(cfg: &ExperimentConfig) -> CliResult<Vec<SampleRecord>> {
    cfg.validate()?;
    let out: Result<Vec<Option<SampleRecord>>, Error> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| draw_state(cfg, i)?.map(|rho| record(cfg, i, &rho)).transpose())
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionRecord {
    pub sample_index: u64,
    pub rank: usize,
    pub input_concurrence: f64,
    pub purity: f64,
    pub output_concurrence: Option<f64>,
    pub delta_c: f64,
    pub anti_x: Option<f64>,
    pub spectrum_error: Option<f64>,
    pub attempts: usize,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub sample_index: u64,
    /// Reproduce with `rng::stream(seed, sample_index)`.
    pub seed: u64,
    pub rank: usize,
    pub best_delta_c: f64,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub samples: usize,
    pub successes: usize,
    pub failures: Vec<Failure>,
    pub tol: f64,
    pub budget: usize,
    /// Attempts of successful conversions in power-of-two bins.
    pub attempt_histogram: Vec<HistogramBin>,
    pub max_attempts: usize,
    pub mean_attempts: f64,
    pub max_delta_c: f64,
    pub max_anti_x: f64,
    pub max_spectrum_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub summary: CampaignSummary,
    pub records: Vec<ConversionRecord>,
}

fn convert_one(cfg: &ExperimentConfig, index: u64) -> Result<ConversionRecord, Error> {
    let mut rng = rng::stream(cfg.seed, index);
    let rank = cfg.rank.unwrap_or_else(|| rng.gen_range(1..=4));
    let rho = qstates::random_mixed(&[2, 2], rank, &mut rng)?;
    let c_in = measures::concurrence(&rho)?;
    let base = ConversionRecord {
        sample_index: index,
        rank,
        input_concurrence: c_in,
        purity: rho.purity(),
        output_concurrence: None,
        delta_c: f64::INFINITY,
        anti_x: None,
        spectrum_error: None,
        attempts: 0,
        success: false,
    };
    match epuconv::find_x_equivalent(&rho, cfg.tol, cfg.budget, &mut rng) {
        Ok(res) => {
            let c_out = measures::concurrence_x(&res.converted)?;
            Ok(ConversionRecord {
                output_concurrence: Some(c_out),
                delta_c: (c_out - c_in).abs(),
                anti_x: Some(res.anti_x),
                spectrum_error: Some(matcore::spectrum_distance(&res.converted.spectrum(), &rho.spectrum())),
                attempts: res.attempts,
                success: true,
                ..base
            })
        }
        Err(Error::SearchExhausted { best_delta_c, attempts }) => {
            Ok(ConversionRecord { delta_c: best_delta_c, attempts, ..base })
        }
        Err(e) => Err(e),
    }
}

fn histogram(attempts: impl Iterator<Item = usize>) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = Vec::new();
    for a in attempts {
        let lo = 1usize << (usize::BITS - 1 - a.max(1).leading_zeros());
        match bins.iter_mut().find(|b| b.lo == lo) {
            Some(b) => b.count += 1,
            None => bins.push(HistogramBin { lo, hi: 2 * lo - 1, count: 1 }),
        }
    }
    bins.sort_by_key(|b| b.lo);
    bins
}

/// Converts `cfg.samples` consecutive random two-qubit states to X form.
/// A failed search is recorded and the campaign continues.
pub fn run_conversion_campaign(cfg: &ExperimentConfig) -> CliResult<Campaign> {
    cfg.validate()?;
    if cfg.system != System::TwoQubit {
        return Err(crate::error::CliError::Config("conversion campaigns require system 2x2".into()));
    }
    let records: Result<Vec<ConversionRecord>, Error> =
        (0..cfg.samples as u64).into_par_iter().map(|i| convert_one(cfg, i)).collect();
    let records = records?;
    let ok: Vec<&ConversionRecord> = records.iter().filter(|r| r.success).collect();
    let fmax = |f: fn(&ConversionRecord) -> f64| ok.iter().map(|r| f(r)).fold(0.0, f64::max);
    let summary = CampaignSummary {
        samples: records.len(),
        successes: ok.len(),
        failures: records
            .iter()
            .filter(|r| !r.success)
            .map(|r| Failure {
                sample_index: r.sample_index,
                seed: cfg.seed,
                rank: r.rank,
                best_delta_c: r.delta_c,
                attempts: r.attempts,
            })
            .collect(),
        tol: cfg.tol,
        budget: cfg.budget,
        attempt_histogram: histogram(ok.iter().map(|r| r.attempts)),
        max_attempts: ok.iter().map(|r| r.attempts).max().unwrap_or(0),
        mean_attempts: if ok.is_empty() { 0.0 } else { ok.iter().map(|r| r.attempts as f64).sum::<f64>() / ok.len() as f64 },
        max_delta_c: fmax(|r| r.delta_c),
        max_anti_x: fmax(|r| r.anti_x.unwrap_or(0.0)),
        max_spectrum_error: fmax(|r| r.spectrum_error.unwrap_or(0.0)),
    };
    Ok(Campaign { summary, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins_by_powers_of_two() {
        let h = histogram([1, 2, 3, 4, 9, 300].into_iter());
        let got: Vec<(usize, usize, usize)> = h.iter().map(|b| (b.lo, b.hi, b.count)).collect();
        assert_eq!(got, vec![(1, 1, 1), (2, 3, 2), (4, 7, 1), (8, 15, 1), (256, 511, 1)]);
    }

    #[test]
    fn h_grid_skips_unreachable_points() {
        let cfg = ExperimentConfig { family: Family::H, samples: 100, ..Default::default() };
        let recs = run_scatter(&cfg).unwrap();
        assert!(!recs.is_empty() && recs.len() < 100);
    }
}
