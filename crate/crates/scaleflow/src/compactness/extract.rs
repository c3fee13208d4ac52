//! Convergent-subsequence extraction from bounded trajectory families.
//!
//! The distance is the discrete counterpart of the C0(I_T', H1) cap
//! C1(I_T', H0) norm: the grid maximum over |s| <= T' of the level-1 state
//! gap and the level-0 gap of the finite-difference s-derivatives.
//!
//! Extraction is greedy nearest-neighbor chaining on the strongest (largest
//! T') metric of the ladder: from every start index the chain repeatedly
//! takes the nearest later member, requiring the successive gaps to
//! decrease until they fall below the tolerance; the longest chain wins.
//! Because the grid metrics are monotone in T', a chain Cauchy on the
//! largest window is Cauchy on the whole ladder (the per-rung gaps are
//! still reported).  The candidate limit is the chain's last member and is
//! certified by its flow residual.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::flow::{residual, Trajectory};
use crate::loops::FourierPath;

/// Grid maximum over |s| <= T' of ||a - b||_{H1} and ||ds a - ds b||_{H0},
/// in the offset Sobolev scale.
pub fn trajectory_metric(a: &Trajectory, b: &Trajectory, t_prime: f64, offset: i32) -> Result<f64> {
    if a.samples() != b.samples()
        || (a.t_half() - b.t_half()).abs() > 1e-14
        || a.state(0).dim() != b.state(0).dim()
        || a.state(0).order() != b.state(0).order()
        || a.state(0).boundary() != b.state(0).boundary()
    {
        return Err(Error::precondition(
            "trajectory metric needs matching discretizations",
        ));
    }
    if !(t_prime > 0.0 && t_prime <= a.t_half()) {
        return Err(Error::precondition("trajectory metric needs 0 < T' <= T"));
    }
    let da = a.finite_difference_derivatives()?;
    let db = b.finite_difference_derivatives()?;
    let mut worst: f64 = 0.0;
    for i in 0..a.samples() {
        if a.s_at(i).abs() <= t_prime + 1e-12 {
            let state_gap = FourierPath::lincomb(&[(1.0, a.state(i)), (-1.0, b.state(i))])?
                .sobolev_norm(1 + offset);
            let deriv_gap =
                FourierPath::lincomb(&[(1.0, &da[i]), (-1.0, &db[i])])?.sobolev_norm(offset);
            worst = worst.max(state_gap).max(deriv_gap);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    /// Indices of the extracted subsequence, in family order.
    pub chain: Vec<usize>,
    /// Successive gaps on the strongest window of the ladder.
    pub gaps: Vec<f64>,
    /// Successive gaps per ladder window (same chain).
    pub ladder_gaps: Vec<Vec<f64>>,
    /// Residual of the candidate limit (the chain's last member).
    pub limit_residual: f64,
    pub tolerance: f64,
    /// Whether a Cauchy subsequence was found and its limit certified.
    /// `false` is a legitimate outcome for spread samples of a compact set.
    pub conclusive: bool,
}

fn greedy_chain(dist: &[Vec<f64>], start: usize, tol: f64) -> (Vec<usize>, Vec<f64>) {
    let n = dist.len();
    let mut chain = vec![start];
    let mut gaps = Vec::new();
    let mut prev = f64::INFINITY;
    let mut last = start;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for j in last + 1..n {
            let d = dist[last][j];
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            // gaps must decrease until they sit below the tolerance
            Some((j, d)) if d < prev || d <= tol => {
                chain.push(j);
                gaps.push(d);
                prev = prev.min(d.max(tol));
                last = j;
            }
            _ => break,
        }
    }
    (chain, gaps)
}

/// Extract the largest Cauchy subsequence of a certified family and certify
/// its limit candidate.  Inconclusive extraction (no chain ending below the
/// tolerance) is reported, not raised.
pub fn extract_convergent(
    spec: &FieldSpec,
    family: &[Trajectory],
    t_prime_ladder: &[f64],
    tol: f64,
    offset: i32,
) -> Result<ExtractionReport> {
    if family.len() < 3 {
        return Err(Error::precondition(
            "extraction needs at least three family members",
        ));
    }
    if t_prime_ladder.is_empty() || t_prime_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition(
            "the window ladder must be strictly increasing",
        ));
    }
    let strongest = *t_prime_ladder.last().unwrap();
    let n = family.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = trajectory_metric(&family[i], &family[j], strongest, offset)?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
    for start in 0..n {
        let (chain, gaps) = greedy_chain(&dist, start, tol);
        let ends_below = gaps.last().map_or(false, |g| *g <= tol);
        if !ends_below || chain.len() < 3 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bc, bg)) => {
                chain.len() > bc.len()
                    || (chain.len() == bc.len() && gaps.last().unwrap() < bg.last().unwrap())
            }
        };
        if better {
            best = Some((chain, gaps));
        }
    }

    match best {
        Some((chain, gaps)) => {
            let limit = &family[*chain.last().unwrap()];
            let limit_residual = residual(spec, limit)?;
            let mut ladder_gaps = Vec::new();
            for &tp in t_prime_ladder {
                let mut rung = Vec::new();
                for pair in chain.windows(2) {
                    rung.push(trajectory_metric(
                        &family[pair[0]],
                        &family[pair[1]],
                        tp,
                        offset,
                    )?);
                }
                ladder_gaps.push(rung);
            }
            let conclusive = limit_residual <= tol;
            Ok(ExtractionReport {
                chain,
                gaps,
                ladder_gaps,
                limit_residual,
                tolerance: tol,
                conclusive,
            })
        }
        None => Ok(ExtractionReport {
            chain: Vec::new(),
            gaps: Vec::new(),
            ladder_gaps: Vec::new(),
            limit_residual: f64::INFINITY,
            tolerance: tol,
            conclusive: false,
        }),
    }
}
