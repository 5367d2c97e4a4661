//! Transient fault rates, the exponential reliability function, primary/backup time
//! accounting, and the seeded fault sampler used by the simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_range, Error, Result};
use crate::model::{FaultModel, FogNode};

/// Fault rate at a normalized frequency `f_norm` in `[f_min, 1]`.
pub fn fault_rate_freq(fm: &FaultModel, f_norm: f64) -> Result<f64> {
    ensure_range("f_norm", f_norm, fm.f_min, 1.0)?;
    let exponent = fm.d * (1.0 - f_norm) / (1.0 - fm.f_min);
    Ok(fm.lambda0 * 10f64.powf(exponent))
}

/// Fault rate at supply voltage `volts` in `(0, v_max]`, using the voltage sensitivity.
pub fn fault_rate_volt(fm: &FaultModel, node: &FogNode, volts: f64) -> Result<f64> {
    if !(volts > 0.0 && volts <= node.v_max) {
        return Err(Error::OutOfRange {
            quantity: "volts",
            value: volts,
            lo: 0.0,
            hi: node.v_max,
        });
    }
    Ok(fm.lambda0 * 10f64.powf((node.v_max - volts) / fm.d_volt))
}

fn ensure_non_negative(quantity: &'static str, value: f64) -> Result<()> {
    ensure_range(quantity, value, 0.0, f64::INFINITY)
}

/// `exp(-lambda * t)`.
pub fn reliability(lambda: f64, t: f64) -> Result<f64> {
    ensure_non_negative("lambda", lambda)?;
    ensure_non_negative("t", t)?;
    Ok((-lambda * t).exp())
}

/// Probability that at least one fault strikes within `t` seconds.
pub fn fault_probability(lambda: f64, t: f64) -> Result<f64> {
    ensure_non_negative("lambda", lambda)?;
    ensure_non_negative("t", t)?;
    // -expm1 keeps precision for tiny lambda * t.
    Ok(-(-lambda * t).exp_m1())
}

/// Fault probability of one execution of `exec_time` seconds at scale factor `rho`.
pub fn execution_fault_probability(fm: &FaultModel, rho: f64, exec_time: f64) -> Result<f64> {
    fault_probability(fault_rate_freq(fm, rho)?, exec_time)
}

/// Wall time charged to a task under cold primary/backup: time the primary ran plus the
/// backup's full execution (zero when no fault occurred).
pub fn cpb_exec_time(primary_time: f64, backup_time: f64) -> Result<f64> {
    ensure_non_negative("primary_time", primary_time)?;
    ensure_non_negative("backup_time", backup_time)?;
    Ok(primary_time + backup_time)
}

/// Outcome of one fault draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultDraw {
    pub occurred: bool,
    /// Position of the fault as a fraction of the execution, in `[0, 1)`.
    /// Drawn on every call; only meaningful when `occurred`.
    pub elapsed_fraction: f64,
}

/// Seeded source of fault decisions. Each call consumes exactly two draws.
#[derive(Debug, Clone)]
pub struct FaultSampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl FaultSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent sampler for run `run_index` of an experiment seeded with `master`.
    pub fn for_run(master: u64, run_index: u64) -> Self {
        Self::new(derive_seed(master, &[run_index]))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_fault(&mut self, p: f64) -> Result<FaultDraw> {
        ensure_range("p", p, 0.0, 1.0)?;
        let u: f64 = self.rng.gen();
        let elapsed_fraction: f64 = self.rng.gen();
        Ok(FaultDraw {
            occurred: u < p,
            elapsed_fraction,
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices into a stream seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i.wrapping_add(1)))
    })
}
