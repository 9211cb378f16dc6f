//! Stochastic greedy minimization of the p-frame potential with adaptive
//! step size, restarts, and stability reporting.
//!
//! The scheme is plain random local search on the product of unit spheres:
//! start from a random configuration, repeatedly perturb one component of
//! one vector, renormalize, and keep the move only if the potential strictly
//! decreases. The step size adapts to the recent acceptance rate and the run
//! stops when it underflows `min_step` or the proposal budget runs out.
//! Restarts ([`multi_start`]) guard against landing in a poor local basin
//! and double as a stability probe: the spread of per-run optima and the
//! per-run coherence spectra reveal whether the minimizer (not just the
//! minimum) is unique.
//!
//! Determinism contract: a run is a pure function of `SolverParams`
//! (including `seed`) and the cell `(m, n, p, field)`. Restart `r` of
//! [`multi_start`] uses the stream [`derive_seed`]`(params.seed, r)`, so runs
//! are reproducible individually and independent of execution order.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    gram, normalize, potential, potential_delta, Configuration, FieldTag,
};
use crate::num::{cast, Scalar};

/// Full recompute cadence: wash incremental-update roundoff out of the
/// tracked potential every this many accepted moves.
const RESYNC_ACCEPTS: u32 = 10_000;

/// Tuning knobs for one minimization run.
///
/// The defaults are this implementation's declared constants, chosen by
/// standard adaptive random-search practice (the underlying scheme only
/// prescribes "increase on too many accepts, decrease on too few"). All are
/// overridable; `max_sweeps` is the proposal budget in units of `m·n`
/// proposals, so the default keeps a desk-scale cell comfortably under
/// 2·10⁶ proposals per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// δ₀, the initial perturbation scale.
    pub initial_step: f64,
    /// Terminate once δ falls below this.
    pub min_step: f64,
    /// Proposal budget in sweeps; one sweep is `m·n` proposals.
    pub max_sweeps: u64,
    /// Proposals between acceptance-rate checks.
    pub accept_window: u64,
    /// Rate above which δ grows by `step_up`.
    pub accept_high: f64,
    /// Rate below which δ shrinks by `step_down`.
    pub accept_low: f64,
    pub step_up: f64,
    pub step_down: f64,
    /// Base RNG stream; restart r runs on `derive_seed(seed, r)`.
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            initial_step: 0.5,
            min_step: 1e-9,
            max_sweeps: 40_000,
            accept_window: 200,
            accept_high: 0.5,
            accept_low: 0.05,
            step_up: 1.5,
            step_down: 0.5,
            seed: 1,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = self.initial_step > 0.0
            && self.min_step > 0.0
            && self.max_sweeps >= 1
            && self.accept_window >= 1;
        if !positive {
            return Err(Error::bad_input("step sizes and budgets must be positive"));
        }
        if self.min_step >= self.initial_step {
            return Err(Error::bad_input("min_step must be below initial_step"));
        }
        let rates_ok = 0.0 < self.accept_low
            && self.accept_low < self.accept_high
            && self.accept_high < 1.0;
        if !rates_ok {
            return Err(Error::bad_input("need 0 < accept_low < accept_high < 1"));
        }
        if self.step_up <= 1.0 || !(0.0 < self.step_down && self.step_down < 1.0) {
            return Err(Error::bad_input("need step_up > 1 and 0 < step_down < 1"));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Step size fell below `min_step`.
    StepFloor,
    /// Proposal budget exhausted.
    Budget,
}

/// One sampled point of a run's progress: taken at start, at every
/// acceptance-window boundary, and at termination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TraceSample<T: Scalar> {
    pub proposal: u64,
    /// Incrementally tracked potential (resynced every [`RESYNC_ACCEPTS`]
    /// accepts), so the final sample measures accumulated drift against
    /// `best_potential`, which is always a fresh recomputation.
    pub potential: T,
    pub delta_step: T,
}

/// Outcome of a single minimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SolveReport<T: Scalar> {
    /// Recomputed from `best_config` at termination, not the tracked value.
    pub best_potential: T,
    pub best_config: Configuration<T>,
    pub p: T,
    pub proposals: u64,
    pub accepts: u64,
    pub final_step: T,
    pub termination: Termination,
    /// Present on direct [`minimize`] calls; [`multi_start`] keeps only the
    /// winning run's trace.
    pub trace: Option<Vec<TraceSample<T>>>,
}

/// Aggregate over independent restarts of the same cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct StabilityReport<T: Scalar> {
    pub runs: usize,
    /// Best potential of each run, in run order.
    pub potentials: Vec<T>,
    /// max − min of `potentials`.
    pub spread: T,
    /// The run attaining the minimum (earliest run on ties).
    pub best: SolveReport<T>,
    /// Per-run sorted pairwise coherence moduli: equal potentials with
    /// different spectra mean the minimum is stable but the minimizer isn't.
    pub coherence_spectra: Vec<Vec<T>>,
}

/// Derives the RNG stream for restart `index` from a base seed
/// (splitmix64 increment and finalizer, a standard 64-bit mixer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `m` random unit vectors in `F^n`: every real (and, for the complex
/// field, imaginary) part uniform on [0,1], then each row normalized.
/// Deterministic given the generator state.
pub fn random_configuration<T: Scalar>(
    m: usize,
    n: usize,
    field: FieldTag,
    rng: &mut impl Rng,
) -> Result<Configuration<T>> {
    if m < 1 || n < 1 {
        return Err(Error::bad_input("need m, n ≥ 1"));
    }
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        // an all-zero draw has measure zero but would poison normalize
        let row = loop {
            let raw: Vec<Complex<T>> = (0..n)
                .map(|_| {
                    let re: f64 = rng.gen();
                    let im: f64 = if field.is_real() { 0.0 } else { rng.gen() };
                    Complex::new(cast(re), cast(im))
                })
                .collect();
            match normalize(&raw) {
                Ok(u) => break u,
                Err(Error::ZeroNorm) => continue,
                Err(e) => return Err(e),
            }
        };
        rows.push(row);
    }
    Configuration::new(field, rows)
}

/// One proposal of the greedy scheme: pick a vector index `k` and component
/// `l` uniformly, draw `z` with parts uniform on [−1,1] (imaginary part only
/// for the complex field), and form the candidate `normalize(v_k + δ·z·e_l)`.
/// The move is kept iff the potential strictly decreases.
///
/// Mutates `config` in place on acceptance; returns the acceptance flag and
/// the energy change of the proposed move (0 for a degenerate candidate,
/// which counts as rejected).
pub fn propose<T: Scalar>(
    config: &mut Configuration<T>,
    p: T,
    delta: T,
    rng: &mut impl Rng,
) -> (bool, T) {
    debug_assert!(delta > T::zero());
    let k = rng.gen_range(0..config.m());
    let l = rng.gen_range(0..config.n());
    let z_re: f64 = rng.gen_range(-1.0..1.0);
    let z_im: f64 = if config.field().is_real() { 0.0 } else { rng.gen_range(-1.0..1.0) };
    let z = Complex::new(cast::<T>(z_re), cast::<T>(z_im));

    let mut candidate = config.row(k).to_vec();
    candidate[l] = candidate[l] + z.scale(delta);
    let candidate = match normalize(&candidate) {
        Ok(u) => u,
        Err(_) => return (false, T::zero()),
    };
    let dp = potential_delta(config, p, k, &candidate)
        .expect("candidate row has the configuration's width");
    if dp < T::zero() {
        config.replace_row(k, candidate);
        (true, dp)
    } else {
        (false, dp)
    }
}

/// Runs one greedy minimization of the p-frame potential over `m` unit
/// vectors in `F^n`, from a random start drawn on the `params.seed` stream.
///
/// Proposals continue until the adaptive step falls below `params.min_step`
/// or the budget of `params.max_sweeps · m · n` proposals is exhausted.
/// Every `accept_window` proposals the acceptance rate over that window is
/// compared against `accept_high`/`accept_low` and the step scaled by
/// `step_up`/`step_down` accordingly.
pub fn minimize<T: Scalar>(
    m: usize,
    n: usize,
    p: T,
    field: FieldTag,
    params: &SolverParams,
) -> Result<SolveReport<T>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let budget = params.max_sweeps.saturating_mul(m as u64).saturating_mul(n as u64);

    let mut config = random_configuration::<T>(m, n, field, &mut rng)?;
    let mut tracked = potential(&config, p);
    let mut step = cast::<T>(params.initial_step);
    let min_step = cast::<T>(params.min_step);

    let mut trace = vec![TraceSample { proposal: 0, potential: tracked, delta_step: step }];
    let mut proposals: u64 = 0;
    let mut accepts: u64 = 0;
    let mut window_accepts: u64 = 0;
    let mut accepts_since_sync: u32 = 0;
    let mut termination = Termination::Budget;

    while proposals < budget {
        let (accepted, dp) = propose(&mut config, p, step, &mut rng);
        proposals += 1;
        if accepted {
            accepts += 1;
            window_accepts += 1;
            accepts_since_sync += 1;
            tracked = tracked + dp;
            if accepts_since_sync == RESYNC_ACCEPTS {
                tracked = potential(&config, p);
                accepts_since_sync = 0;
            }
        }
        if proposals.is_multiple_of(params.accept_window) {
            let rate = window_accepts as f64 / params.accept_window as f64;
            if rate > params.accept_high {
                step = step * cast(params.step_up);
            } else if rate < params.accept_low {
                step = step * cast(params.step_down);
            }
            window_accepts = 0;
            trace.push(TraceSample { proposal: proposals, potential: tracked, delta_step: step });
            if step < min_step {
                termination = Termination::StepFloor;
                break;
            }
        }
    }
    if trace.last().map(|t| t.proposal) != Some(proposals) {
        trace.push(TraceSample { proposal: proposals, potential: tracked, delta_step: step });
    }

    Ok(SolveReport {
        best_potential: potential(&config, p),
        best_config: config,
        p,
        proposals,
        accepts,
        final_step: step,
        termination,
        trace: Some(trace),
    })
}

/// Runs `runs` independent minimizations of the same cell on derived seed
/// streams and aggregates them into a [`StabilityReport`].
///
/// Runs execute sequentially here, but each is a pure function of its
/// derived seed and the reduction (min with earliest-run tiebreak) is order
/// independent, so a concurrent driver would produce the identical report.
pub fn multi_start<T: Scalar>(
    m: usize,
    n: usize,
    p: T,
    field: FieldTag,
    params: &SolverParams,
    runs: usize,
) -> Result<StabilityReport<T>> {
    if runs < 1 {
        return Err(Error::bad_input("need at least one run"));
    }
    params.validate()?;

    let mut potentials = Vec::with_capacity(runs);
    let mut coherence_spectra = Vec::with_capacity(runs);
    let mut best: Option<SolveReport<T>> = None;
    for run in 0..runs {
        let mut run_params = params.clone();
        run_params.seed = derive_seed(params.seed, run as u64);
        let report = minimize(m, n, p, field, &run_params)?;
        potentials.push(report.best_potential);
        let mut spectrum = gram(&report.best_config).offdiag_moduli;
        spectrum.sort_by(|a, b| a.partial_cmp(b).expect("finite coherences"));
        coherence_spectra.push(spectrum);
        if best.as_ref().is_none_or(|b| report.best_potential < b.best_potential) {
            best = Some(report);
        }
        // losing reports drop here, traces included, bounding memory
    }
    let best = best.expect("runs ≥ 1");
    let spread = potentials.iter().copied().fold(T::neg_infinity(), T::max)
        - potentials.iter().copied().fold(T::infinity(), T::min);
    Ok(StabilityReport { runs, potentials, spread, best, coherence_spectra })
}
