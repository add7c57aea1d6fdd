//! Rate-versus-distance sweeps and crossover location.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{optimize_mu, OptimizedMu};
use crate::params::ProtocolParams;
use crate::rates::{bell_state_stats, ecs_misaligned_stats, key_rate, plob_bound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Entangled coherent states with single-photon interference.
    Ecs,
    /// Heralded Bell states with two-photon interference.
    Bell,
    /// Repeaterless capacity bound.
    Plob,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Ecs, Protocol::Bell, Protocol::Plob];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ecs => "ecs",
            Protocol::Bell => "bell",
            Protocol::Plob => "plob",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuMode {
    Fixed(f64),
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub l_min_km: f64,
    pub l_max_km: f64,
    pub l_step_km: f64,
    /// Channel and detector parameters; `mu` and `distance_km` are ignored.
    pub base: ProtocolParams,
    pub mu_mode: MuMode,
    pub protocols: Vec<Protocol>,
}

impl SweepConfig {
    /// Defaults: 0–600 km in 5 km steps, μ optimized, all protocols.
    pub fn with_base(base: ProtocolParams) -> Self {
        Self {
            l_min_km: 0.0,
            l_max_km: 600.0,
            l_step_km: 5.0,
            base,
            mu_mode: MuMode::Optimized,
            protocols: Protocol::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.l_min_km >= 0.0 && self.l_min_km <= self.l_max_km && self.l_max_km.is_finite()) {
            return bad(format!(
                "distance range must satisfy 0 <= l_min <= l_max, got [{}, {}]",
                self.l_min_km, self.l_max_km
            ));
        }
        if !(self.l_step_km > 0.0) {
            return bad(format!("l_step must be > 0, got {}", self.l_step_km));
        }
        if self.protocols.is_empty() {
            return bad("at least one protocol is required".into());
        }
        if let MuMode::Fixed(mu) = self.mu_mode {
            self.base.with_mu(mu).validate()?;
        }
        self.base.validate_channel()
    }

    /// Distances `l_min + i·step` up to `l_max` (with a 1e-9 step slack).
    pub fn distances(&self) -> Vec<f64> {
        let count = ((self.l_max_km - self.l_min_km) / self.l_step_km + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.l_min_km + i as f64 * self.l_step_km).collect()
    }

    fn has(&self, p: Protocol) -> bool {
        self.protocols.contains(&p)
    }
}

/// One distance point. Fields of protocols not requested stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub distance_km: f64,
    pub mu: Option<f64>,
    pub q_zz: Option<f64>,
    pub s: Option<f64>,
    pub e_zz: Option<f64>,
    pub rate_ecs: Option<f64>,
    pub rate_bell: Option<f64>,
    pub rate_plob: Option<f64>,
    /// The μ optimizer found no positive rate at this distance.
    #[serde(skip)]
    pub zero_rate: bool,
}

/// Evaluates one distance.
pub fn sweep_row(config: &SweepConfig, distance_km: f64) -> Result<SweepRow> {
    let base = config.base.with_distance(distance_km);
    let eta = base.eta();
    let mut row = SweepRow {
        distance_km,
        mu: None,
        q_zz: None,
        s: None,
        e_zz: None,
        rate_ecs: None,
        rate_bell: None,
        rate_plob: None,
        zero_rate: false,
    };
    if config.has(Protocol::Ecs) {
        let (mu, zero_rate) = match config.mu_mode {
            MuMode::Fixed(mu) => (mu, false),
            MuMode::Optimized => {
                let OptimizedMu { mu, zero_rate, .. } = optimize_mu(distance_km, &base)?;
                (mu, zero_rate)
            }
        };
        let stats = ecs_misaligned_stats(mu, eta, base.p_d, base.e_d)?;
        row.mu = Some(mu);
        row.q_zz = Some(stats.q_zz);
        row.s = Some(stats.s);
        row.e_zz = Some(stats.e_zz);
        row.rate_ecs = Some(key_rate(&stats));
        row.zero_rate = zero_rate;
    }
    if config.has(Protocol::Bell) {
        row.rate_bell = Some(key_rate(&bell_state_stats(eta, base.p_d)?));
    }
    if config.has(Protocol::Plob) {
        row.rate_plob = Some(plob_bound(distance_km, base.beta_db_per_km, base.eta_d)?);
    }
    Ok(row)
}

/// Evaluates every grid distance; rows come back ordered by distance.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config
        .distances()
        .into_par_iter()
        .map(|l| sweep_row(config, l))
        .collect()
}

/// [`sweep`] on a dedicated pool of `jobs` worker threads.
pub fn sweep_with_jobs(config: &SweepConfig, jobs: usize) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| sweep(config))
}

/// Rate of `protocol` at `distance_km`, with μ optimized for ECS.
pub fn protocol_rate(protocol: Protocol, distance_km: f64, base: &ProtocolParams) -> Result<f64> {
    let params = base.with_distance(distance_km);
    params.validate_channel()?;
    match protocol {
        Protocol::Ecs => Ok(optimize_mu(distance_km, &params)?.rate),
        Protocol::Bell => Ok(key_rate(&bell_state_stats(params.eta(), params.p_d)?)),
        Protocol::Plob => plob_bound(distance_km, params.beta_db_per_km, params.eta_d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    /// Distance where `R_first − R_second` changes sign.
    At(f64),
    NoCrossover,
}

/// Bisection resolution of [`find_crossover`], in km.
pub const CROSSOVER_RESOLUTION_KM: f64 = 0.01;

/// Inward steps tried when a bracket endpoint is an exact tie.
const TIE_STEPS: usize = 64;

/// Locates the distance in `bracket` where the first protocol's rate
/// crosses the second's.
pub fn find_crossover(pair: (Protocol, Protocol), base: &ProtocolParams, bracket: (f64, f64)) -> Result<Crossover> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParams(format!("bad bracket [{lo}, {hi}]")));
    }
    let diff = |l: f64| -> Result<f64> { Ok(protocol_rate(pair.0, l, base)? - protocol_rate(pair.1, l, base)?) };
    // An endpoint where both rates vanish carries no sign; walk it inward.
    let step = (hi - lo) / TIE_STEPS as f64;
    let mut f_lo = diff(lo)?;
    let mut f_hi = diff(hi)?;
    for _ in 0..TIE_STEPS {
        if f_hi != 0.0 || hi <= lo {
            break;
        }
        hi -= step;
        f_hi = diff(hi)?;
    }
    for _ in 0..TIE_STEPS {
        if f_lo != 0.0 || lo >= hi {
            break;
        }
        lo += step;
        f_lo = diff(lo)?;
    }
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
        return Ok(Crossover::NoCrossover);
    }
    let lo_sign = f_lo.signum();
    while hi - lo > CROSSOVER_RESOLUTION_KM {
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid)?;
        if f_mid.signum() == lo_sign && f_mid != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Crossover::At(0.5 * (lo + hi)))
}

/// Every crossing in `range`, found by scanning in `scan_step_km` steps and
/// bisecting each sign change. Grid points where the rates tie exactly
/// (typically both zero) are skipped.
pub fn find_crossovers(
    pair: (Protocol, Protocol),
    base: &ProtocolParams,
    range: (f64, f64),
    scan_step_km: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite() && scan_step_km > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bad scan range [{lo}, {hi}] step {scan_step_km}"
        )));
    }
    let grid = SweepConfig {
        l_min_km: lo,
        l_max_km: hi,
        l_step_km: scan_step_km,
        ..SweepConfig::with_base(*base)
    }
    .distances();
    let signs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&l| {
            Ok((
                l,
                (protocol_rate(pair.0, l, base)? - protocol_rate(pair.1, l, base)?).signum(),
            ))
        })
        .filter(|r: &Result<(f64, f64)>| !matches!(r, Ok((_, s)) if *s == 0.0 || s.is_nan()))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for w in signs.windows(2) {
        if w[0].1 != w[1].1 {
            if let Crossover::At(l) = find_crossover(pair, base, (w[0].0, w[1].0))? {
                out.push(l);
            }
        }
    }
    Ok(out)
}

/// Least-squares slope of `log₁₀ R` against distance over a grid, per km.
pub fn log10_rate_slope(
    protocol: Protocol,
    base: &ProtocolParams,
    from_km: f64,
    to_km: f64,
    step_km: f64,
) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut l = from_km;
    while l <= to_km + 1e-9 {
        let r = protocol_rate(protocol, l, base)?;
        if !(r > 0.0) {
            return Err(Error::Domain {
                what: "rate in slope window",
                value: r,
            });
        }
        xs.push(l);
        ys.push(r.log10());
        l += step_km;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(l_min: f64, l_max: f64) -> SweepConfig {
        SweepConfig {
            l_min_km: l_min,
            l_max_km: l_max,
            ..SweepConfig::with_base(ProtocolParams::default())
        }
    }

    #[test]
    fn distance_grid() {
        assert_eq!(short(0.0, 600.0).distances().len(), 121);
        assert_eq!(short(100.0, 100.0).distances(), vec![100.0]);
        let d = short(0.0, 1.0);
        assert_eq!(SweepConfig { l_step_km: 0.1, ..d }.distances().len(), 11);
    }

    #[test]
    fn single_point_sweep() {
        let rows = sweep(&short(100.0, 100.0)).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.rate_ecs.unwrap() > 0.0 && r.rate_bell.unwrap() > 0.0 && r.rate_plob.unwrap() > 0.0);
    }

    #[test]
    fn invalid_configs() {
        let mut c = short(10.0, 5.0);
        assert!(sweep(&c).is_err());
        c = short(0.0, 5.0);
        c.protocols.clear();
        assert!(matches!(sweep(&c), Err(Error::InvalidParams(_))));
        c = short(0.0, 5.0);
        c.l_step_km = 0.0;
        assert!(sweep(&c).is_err());
        c = short(0.0, 5.0);
        c.mu_mode = MuMode::Fixed(-1.0);
        assert!(sweep(&c).is_err());
    }

    #[test]
    fn absent_protocols_stay_empty() {
        let mut c = short(50.0, 60.0);
        c.protocols = vec![Protocol::Plob];
        let rows = sweep(&c).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.mu.is_none() && r.rate_ecs.is_none() && r.rate_bell.is_none()));
        assert!(rows.iter().all(|r| r.rate_plob.is_some()));
    }

    #[test]
    fn fixed_mu_is_reported() {
        let mut c = short(0.0, 20.0);
        c.mu_mode = MuMode::Fixed(0.2);
        let rows = sweep(&c).unwrap();
        assert!(rows.iter().all(|r| r.mu == Some(0.2)));
    }

    #[test]
    fn ordered_and_deterministic_under_parallelism() {
        let c = short(0.0, 300.0);
        let a = sweep_with_jobs(&c, 1).unwrap();
        let b = sweep_with_jobs(&c, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].distance_km < w[1].distance_km));
    }

    #[test]
    fn protocol_against_itself_never_crosses() {
        let p = ProtocolParams::default();
        assert_eq!(
            find_crossover((Protocol::Bell, Protocol::Bell), &p, (50.0, 200.0)).unwrap(),
            Crossover::NoCrossover
        );
    }

    #[test]
    fn scan_finds_both_ecs_bell_crossings() {
        let p = ProtocolParams::default();
        let xs = find_crossovers((Protocol::Ecs, Protocol::Bell), &p, (0.0, 600.0), 10.0).unwrap();
        assert_eq!(xs.len(), 2, "{xs:?}");
        assert!(xs[0] < 150.0 && xs[1] > 400.0);
    }

    #[test]
    fn tied_endpoint_is_walked_inward() {
        let p = ProtocolParams::default();
        // Both rates are zero at 550 km.
        let Crossover::At(l) = find_crossover((Protocol::Ecs, Protocol::Bell), &p, (350.0, 550.0)).unwrap() else {
            panic!("expected a crossing");
        };
        assert!((l - 460.4).abs() < 1.0, "{l}");
    }

    #[test]
    fn bad_bracket_is_an_error() {
        let p = ProtocolParams::default();
        assert!(find_crossover((Protocol::Ecs, Protocol::Bell), &p, (200.0, 50.0)).is_err());
    }
}
