//! Two-axis parameter grids with deterministic CSV output, and the preset
//! maps the CLI exposes.
//!
//! A sweep varies two parameters over a rectangular grid and evaluates one
//! scalar quantity per point. Grid points whose detunings fall inside five
//! inhomogeneous linewidths of a resonance are masked: the dispersive model
//! does not hold there, so the value is recorded as NaN with a mask flag
//! rather than as a misleading number. Points where the elimination itself
//! is singular are masked the same way.
//!
//! Output layout is fixed: values are stored row-major with the y index
//! outer, `values[iy * nx + ix]`, axis values come from the same
//! interpolation everywhere, and numbers are printed with the shortest
//! round-trip formatting. A sweep run twice, with any thread count, produces
//! byte-identical CSV.

use rayon::prelude::*;
use serde::Serialize;

use crate::effective::{transduction_rate, FiveMode};
use crate::error::{Error, Result};
use crate::inout;
use crate::levels::{self, Crossing, Detunings, LevelCurves};
use crate::params::DeviceConfig;

/// Parameter a sweep axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisParam {
    /// Static bias field, tesla.
    Bz,
    /// Microwave cavity frequency, Hz.
    OmegaB,
    /// Spin detuning override, Hz.
    Delta,
    /// Magnon detuning override, Hz.
    DeltaTilde,
    /// Perpendicular exchange strength, Hz.
    JPerp,
    /// Pump Rabi frequency, Hz.
    Rabi,
    /// Microwave external coupling rate, Hz.
    KappaC,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::Bz => "bz",
            AxisParam::OmegaB => "omega_b",
            AxisParam::Delta => "delta",
            AxisParam::DeltaTilde => "delta_tilde",
            AxisParam::JPerp => "j_perp",
            AxisParam::Rabi => "rabi",
            AxisParam::KappaC => "kappa_c",
        }
    }

    pub fn from_name(name: &str) -> Option<AxisParam> {
        Some(match name {
            "bz" => AxisParam::Bz,
            "omega_b" => AxisParam::OmegaB,
            "delta" => AxisParam::Delta,
            "delta_tilde" => AxisParam::DeltaTilde,
            "j_perp" => AxisParam::JPerp,
            "rabi" => AxisParam::Rabi,
            "kappa_c" => AxisParam::KappaC,
            _ => return None,
        })
    }
}

/// Spacing of axis samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisScale {
    Linear,
    Log,
}

impl AxisScale {
    pub fn name(&self) -> &'static str {
        match self {
            AxisScale::Linear => "linear",
            AxisScale::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<AxisScale> {
        Some(match name {
            "linear" => AxisScale::Linear,
            "log" => AxisScale::Log,
            _ => return None,
        })
    }
}

/// One sweep axis: a parameter and its sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl AxisSpec {
    pub fn validate(&self) -> Result<()> {
        let name = self.param.name();
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Validation(format!(
                "{name} axis bounds must be finite"
            )));
        }
        if self.min >= self.max {
            return Err(Error::Validation(format!(
                "{name} axis needs min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::Validation(format!(
                "{name} axis needs at least 2 samples, got {}",
                self.count
            )));
        }
        if self.scale == AxisScale::Log && self.min <= 0.0 {
            return Err(Error::Validation(format!(
                "{name} axis with log spacing needs min > 0, got {}",
                self.min
            )));
        }
        Ok(())
    }

    /// The i-th sample. Endpoints land exactly on `min` and `max`.
    pub fn value_at(&self, i: usize) -> f64 {
        if i == 0 {
            return self.min;
        }
        if i == self.count - 1 {
            return self.max;
        }
        let t = i as f64 / (self.count - 1) as f64;
        match self.scale {
            AxisScale::Linear => self.min + (self.max - self.min) * t,
            AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value_at(i)).collect()
    }
}

/// Scalar evaluated at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Transduction rate magnitude over the pump Rabi frequency.
    SOverOmega,
    /// Transduction rate magnitude, Hz.
    AbsS,
    /// Port-to-port conversion efficiency.
    Efficiency,
    /// Rate magnitude relative to a reference rate.
    RatioToBaseline,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::SOverOmega => "s_over_omega",
            Quantity::AbsS => "abs_s",
            Quantity::Efficiency => "efficiency",
            Quantity::RatioToBaseline => "ratio_to_baseline",
        }
    }

    pub fn from_name(name: &str) -> Option<Quantity> {
        Some(match name {
            "s_over_omega" => Quantity::SOverOmega,
            "abs_s" => Quantity::AbsS,
            "efficiency" => Quantity::Efficiency,
            "ratio_to_baseline" => Quantity::RatioToBaseline,
            _ => return None,
        })
    }
}

/// Knobs shared by every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Optical detuning used at every grid point, Hz.
    pub delta_cap: f64,
    /// Evaluate with the magnet section, when the config has one.
    pub include_magnet: bool,
    /// Force the magnon detuning to track the spin detuning.
    pub tie_delta_tilde: bool,
    /// Pin both microwave-band detunings to fixed values (spin, magnon)
    /// instead of deriving them from the bias field.
    pub fixed_detunings: Option<(f64, f64)>,
    /// Reference rate for [`Quantity::RatioToBaseline`], Hz.
    pub baseline: Option<f64>,
    /// Worker threads; default lets the pool decide.
    pub threads: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            delta_cap: 1e10,
            include_magnet: true,
            tie_delta_tilde: false,
            fixed_detunings: None,
            baseline: None,
            threads: None,
        }
    }
}

/// A completed sweep: the grid definition and one value and mask flag per
/// point, row-major with the y index outer.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub quantity: Quantity,
    pub delta_cap: f64,
    /// Extra header entries, emitted after the fixed ones in order.
    pub extra_header: Vec<(String, String)>,
    pub values: Vec<f64>,
    pub masked: Vec<bool>,
}

impl SweepResult {
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.count + ix
    }
}

fn strip_magnet(cfg: &DeviceConfig, opts: &SweepOptions) -> DeviceConfig {
    let mut cfg = cfg.clone();
    if !opts.include_magnet {
        cfg.magnet = None;
    }
    cfg
}

fn eval_point(
    base: &DeviceConfig,
    x: &AxisSpec,
    xv: f64,
    y: &AxisSpec,
    yv: f64,
    quantity: Quantity,
    opts: &SweepOptions,
) -> Result<(f64, bool)> {
    let mut cfg = base.clone();
    let mut delta_override = None;
    let mut delta_tilde_override = None;
    for (param, v) in [(x.param, xv), (y.param, yv)] {
        match param {
            AxisParam::Bz => cfg.fields.bz = v,
            AxisParam::OmegaB => cfg.cavities.omega_b = v,
            AxisParam::Delta => delta_override = Some(v),
            AxisParam::DeltaTilde => delta_tilde_override = Some(v),
            AxisParam::JPerp => {
                cfg.magnet
                    .as_mut()
                    .expect("magnet presence checked before the sweep")
                    .j_perp = v
            }
            AxisParam::Rabi => cfg.erbium.rabi_pump = v,
            AxisParam::KappaC => cfg.cavities.kappa_b_c = v,
        }
    }
    let derived = levels::detunings(&cfg, cfg.fields.bz)?;
    let (mut delta, mut delta_tilde) = match opts.fixed_detunings {
        Some((d, dt)) => (d, dt),
        None => (derived.spin, derived.magnon),
    };
    if let Some(v) = delta_override {
        delta = v;
    }
    if let Some(v) = delta_tilde_override {
        delta_tilde = v;
    }
    if opts.tie_delta_tilde {
        delta_tilde = delta;
    }
    let mut masked = delta.abs() < 5.0 * cfg.erbium.sigma_b;
    if let Some(m) = &cfg.magnet {
        masked |= delta_tilde.abs() < 5.0 * m.sigma_b_tilde;
    }
    if masked {
        return Ok((f64::NAN, true));
    }
    let det = Detunings {
        spin: delta,
        magnon: delta_tilde,
        optical: opts.delta_cap,
    };
    let modes = FiveMode::from_config(&cfg, &det);
    let s_abs = match transduction_rate(&modes) {
        Ok(s) => s.norm(),
        Err(Error::SingularElimination { .. }) => return Ok((f64::NAN, true)),
        Err(e) => return Err(e),
    };
    let value = match quantity {
        Quantity::AbsS => s_abs,
        Quantity::SOverOmega => {
            if modes.rabi == 0.0 {
                return Ok((f64::NAN, true));
            }
            s_abs / modes.rabi
        }
        Quantity::RatioToBaseline => {
            s_abs / opts.baseline.expect("baseline checked before the sweep")
        }
        Quantity::Efficiency => {
            let c = &cfg.cavities;
            inout::efficiency(s_abs, c.kappa_a_c, c.kappa_a_i, c.kappa_b_c, c.kappa_b_i)?
        }
    };
    Ok((value, false))
}

/// Evaluate `quantity` over the full grid. Deterministic: the same inputs
/// give bitwise-identical results for any thread count.
pub fn run_sweep(
    cfg: &DeviceConfig,
    x: &AxisSpec,
    y: &AxisSpec,
    quantity: Quantity,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let base = strip_magnet(cfg, opts);
    for spec in [x, y] {
        spec.validate()?;
        let name = spec.param.name();
        match spec.param {
            AxisParam::Bz | AxisParam::Rabi | AxisParam::KappaC => {
                if spec.min < 0.0 {
                    return Err(Error::Validation(format!(
                        "{name} axis cannot go negative, min is {}",
                        spec.min
                    )));
                }
            }
            AxisParam::OmegaB => {
                if spec.min <= 0.0 {
                    return Err(Error::Validation(format!(
                        "{name} axis needs positive frequencies, min is {}",
                        spec.min
                    )));
                }
            }
            AxisParam::JPerp => {
                if base.magnet.is_none() {
                    return Err(Error::Validation(
                        "j_perp axis requires a magnet section in the active config".into(),
                    ));
                }
            }
            AxisParam::Delta | AxisParam::DeltaTilde => {}
        }
    }
    if x.param == y.param {
        return Err(Error::Validation(format!(
            "both axes sweep {}; pick two different parameters",
            x.param.name()
        )));
    }
    if !opts.delta_cap.is_finite() || opts.delta_cap == 0.0 {
        return Err(Error::Validation(format!(
            "delta_cap must be finite and nonzero, got {}",
            opts.delta_cap
        )));
    }
    if quantity == Quantity::RatioToBaseline && opts.baseline.is_none() {
        return Err(Error::EmptyBaseline);
    }
    if let Some(b) = opts.baseline {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Validation(format!(
                "baseline must be a positive rate, got {b}"
            )));
        }
    }
    if opts.threads == Some(0) {
        return Err(Error::Validation(
            "threads must be at least 1 when given".into(),
        ));
    }

    let xv = x.values();
    let yv = y.values();
    let total = x.count * y.count;
    let evaluate = |idx: usize| -> Result<(f64, bool)> {
        let (iy, ix) = (idx / x.count, idx % x.count);
        eval_point(&base, x, xv[ix], y, yv[iy], quantity, opts)
    };
    let points: Result<Vec<(f64, bool)>> = match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
            pool.install(|| (0..total).into_par_iter().map(evaluate).collect())
        }
        None => (0..total).into_par_iter().map(evaluate).collect(),
    };
    let points = points?;

    let mut extra_header = Vec::new();
    extra_header.push((
        "include_magnet".to_string(),
        (base.magnet.is_some()).to_string(),
    ));
    if opts.tie_delta_tilde {
        extra_header.push(("tie_delta_tilde".to_string(), "true".to_string()));
    }
    if let Some((d, dt)) = opts.fixed_detunings {
        extra_header.push(("fixed_delta".to_string(), d.to_string()));
        extra_header.push(("fixed_delta_tilde".to_string(), dt.to_string()));
    }
    if let Some(b) = opts.baseline {
        extra_header.push(("baseline".to_string(), b.to_string()));
    }
    Ok(SweepResult {
        x: *x,
        y: *y,
        quantity,
        delta_cap: opts.delta_cap,
        extra_header,
        values: points.iter().map(|p| p.0).collect(),
        masked: points.iter().map(|p| p.1).collect(),
    })
}

/// Render a sweep as CSV. One comment header line, one column header line,
/// then `x,y,value,masked` rows with the y index outer.
pub fn to_csv(r: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# quantity={}, x={}[{}:{}:{}:{}], y={}[{}:{}:{}:{}], delta_cap={}",
        r.quantity.name(),
        r.x.param.name(),
        r.x.min,
        r.x.max,
        r.x.count,
        r.x.scale.name(),
        r.y.param.name(),
        r.y.min,
        r.y.max,
        r.y.count,
        r.y.scale.name(),
        r.delta_cap,
    ));
    for (k, v) in &r.extra_header {
        out.push_str(&format!(", {k}={v}"));
    }
    out.push('\n');
    out.push_str("x,y,value,masked\n");
    let xv = r.x.values();
    let yv = r.y.values();
    for iy in 0..r.y.count {
        for ix in 0..r.x.count {
            let idx = iy * r.x.count + ix;
            out.push_str(&format!(
                "{},{},{},{}\n",
                xv[ix], yv[iy], r.values[idx], r.masked[idx]
            ));
        }
    }
    out
}

fn parse_axis(field: &str, key: &str) -> Result<AxisSpec> {
    let bad = || Error::GridMismatch(format!("malformed {key} axis field: {field}"));
    let (name, rest) = field.split_once('[').ok_or_else(bad)?;
    let inner = rest.strip_suffix(']').ok_or_else(bad)?;
    let parts: Vec<&str> = inner.split(':').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let param = AxisParam::from_name(name).ok_or_else(bad)?;
    let min: f64 = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    let scale = AxisScale::from_name(parts[3]).ok_or_else(bad)?;
    Ok(AxisSpec {
        param,
        min,
        max,
        count,
        scale,
    })
}

/// Parse CSV produced by [`to_csv`]. Re-rendering the result reproduces the
/// input byte for byte.
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| Error::GridMismatch("missing sweep header line".into()))?;
    let mut quantity = None;
    let mut x = None;
    let mut y = None;
    let mut delta_cap = None;
    let mut extra_header = Vec::new();
    for field in header.split(", ") {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::GridMismatch(format!("malformed header field: {field}")))?;
        match key {
            "quantity" => {
                quantity = Some(Quantity::from_name(value).ok_or_else(|| {
                    Error::GridMismatch(format!("unknown quantity: {value}"))
                })?)
            }
            "x" => x = Some(parse_axis(value, "x")?),
            "y" => y = Some(parse_axis(value, "y")?),
            "delta_cap" => {
                delta_cap = Some(value.parse::<f64>().map_err(|_| {
                    Error::GridMismatch(format!("malformed delta_cap: {value}"))
                })?)
            }
            _ => extra_header.push((key.to_string(), value.to_string())),
        }
    }
    let (quantity, x, y, delta_cap) = match (quantity, x, y, delta_cap) {
        (Some(q), Some(x), Some(y), Some(d)) => (q, x, y, d),
        _ => {
            return Err(Error::GridMismatch(
                "header must define quantity, x, y, and delta_cap".into(),
            ))
        }
    };
    x.validate()?;
    y.validate()?;
    match lines.next() {
        Some("x,y,value,masked") => {}
        other => {
            return Err(Error::GridMismatch(format!(
                "expected column header, got {other:?}"
            )))
        }
    }
    let xv = x.values();
    let yv = y.values();
    let total = x.count * y.count;
    let mut values = Vec::with_capacity(total);
    let mut masked = Vec::with_capacity(total);
    for (row, line) in lines.enumerate() {
        if row >= total {
            return Err(Error::GridMismatch(format!(
                "grid holds {total} points but the file has more rows"
            )));
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::GridMismatch(format!(
                "row {row} has {} fields, expected 4",
                parts.len()
            )));
        }
        let bad = |what: &str| Error::GridMismatch(format!("row {row}: malformed {what}"));
        let rx: f64 = parts[0].parse().map_err(|_| bad("x"))?;
        let ry: f64 = parts[1].parse().map_err(|_| bad("y"))?;
        let value: f64 = parts[2].parse().map_err(|_| bad("value"))?;
        let flag = match parts[3] {
            "true" => true,
            "false" => false,
            _ => return Err(bad("mask flag")),
        };
        let (iy, ix) = (row / x.count, row % x.count);
        if rx.to_bits() != xv[ix].to_bits() || ry.to_bits() != yv[iy].to_bits() {
            return Err(Error::GridMismatch(format!(
                "row {row} coordinates ({rx}, {ry}) do not sit on the declared grid"
            )));
        }
        values.push(value);
        masked.push(flag);
    }
    if values.len() != total {
        return Err(Error::GridMismatch(format!(
            "grid holds {total} points but the file has {} rows",
            values.len()
        )));
    }
    Ok(SweepResult {
        x,
        y,
        quantity,
        delta_cap,
        extra_header,
        values,
        masked,
    })
}

/// Location and value of the largest unmasked finite grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMax {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Largest unmasked finite value on the grid; the earliest index wins ties.
pub fn grid_max(r: &SweepResult) -> Option<GridMax> {
    let mut best: Option<GridMax> = None;
    for iy in 0..r.y.count {
        for ix in 0..r.x.count {
            let idx = r.index(ix, iy);
            let v = r.values[idx];
            if r.masked[idx] || !v.is_finite() {
                continue;
            }
            if best.map_or(true, |b| v > b.value) {
                best = Some(GridMax {
                    ix,
                    iy,
                    x: r.x.value_at(ix),
                    y: r.y.value_at(iy),
                    value: v,
                });
            }
        }
    }
    best
}

/// The reference rate for relative sweeps: the largest rate the device
/// reaches on the given grid with the magnet removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselinePoint {
    /// Rate magnitude at the reference point, Hz.
    pub s_abs: f64,
    pub x: f64,
    pub y: f64,
}

/// Run the grid with the magnet stripped and return its maximum rate.
pub fn baseline_max(
    cfg: &DeviceConfig,
    x: &AxisSpec,
    y: &AxisSpec,
    opts: &SweepOptions,
) -> Result<BaselinePoint> {
    let mut bare = opts.clone();
    bare.include_magnet = false;
    bare.baseline = None;
    let result = run_sweep(cfg, x, y, Quantity::AbsS, &bare)?;
    let best = grid_max(&result).ok_or(Error::EmptyBaseline)?;
    Ok(BaselinePoint {
        s_abs: best.value,
        x: best.x,
        y: best.y,
    })
}

const DETUNING_SPAN: f64 = 2.5e9;
const DETUNING_COUNT: usize = 500;
const EXCHANGE_NEAR: (f64, f64) = (5e8, 1e10);
const EXCHANGE_WIDE: (f64, f64) = (1e9, 1e12);
const MATCH_RANGE: (f64, f64) = (1e5, 1e10);

/// Preset outputs the CLI can produce by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Magnon and spin branches versus field, with the crossing.
    Levels,
    /// Rate over pump versus field and cavity frequency, magnet removed.
    FieldMap,
    /// Same map with the magnet active.
    FieldMapMagnet,
    /// Rate over pump versus both detunings, magnet removed.
    DetuningMap,
    /// Same map with the magnet active.
    DetuningMapMagnet,
    /// Rate relative to the bare device versus detuning and exchange.
    ExchangeSweep,
    /// The same ratio over a wide logarithmic exchange range.
    ExchangeSweepWide,
    /// Efficiency versus pump and port coupling, magnet removed.
    MatchMap,
    /// Same map with the magnet active.
    MatchMapMagnet,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Levels,
        Figure::FieldMap,
        Figure::FieldMapMagnet,
        Figure::DetuningMap,
        Figure::DetuningMapMagnet,
        Figure::ExchangeSweep,
        Figure::ExchangeSweepWide,
        Figure::MatchMap,
        Figure::MatchMapMagnet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Levels => "levels",
            Figure::FieldMap => "field-map",
            Figure::FieldMapMagnet => "field-map-magnet",
            Figure::DetuningMap => "detuning-map",
            Figure::DetuningMapMagnet => "detuning-map-magnet",
            Figure::ExchangeSweep => "exchange-sweep",
            Figure::ExchangeSweepWide => "exchange-sweep-wide",
            Figure::MatchMap => "match-map",
            Figure::MatchMapMagnet => "match-map-magnet",
        }
    }

    pub fn from_name(name: &str) -> Option<Figure> {
        Figure::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Grid-size and threading overrides for a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FigureOverrides {
    pub x_count: Option<usize>,
    pub y_count: Option<usize>,
    pub threads: Option<usize>,
}

/// Output of a preset: either sampled level curves or a grid sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum FigureOutput {
    Curves(LevelCurves),
    Grid(SweepResult),
}

impl FigureOutput {
    pub fn to_csv(&self) -> String {
        match self {
            FigureOutput::Grid(r) => to_csv(r),
            FigureOutput::Curves(c) => {
                let mut out = String::new();
                out.push_str(&format!(
                    "# curves=levels, bz=[{}:{}:{}], crossing_bz={}, crossing_frequency={}\n",
                    c.bz[0],
                    c.bz[c.bz.len() - 1],
                    c.bz.len(),
                    c.crossing.bz,
                    c.crossing.frequency,
                ));
                out.push_str("bz,magnon,spin\n");
                for i in 0..c.bz.len() {
                    out.push_str(&format!("{},{},{}\n", c.bz[i], c.magnon[i], c.spin[i]));
                }
                out
            }
        }
    }
}

fn detuning_axes(nx: usize, ny: usize) -> (AxisSpec, AxisSpec) {
    (
        AxisSpec {
            param: AxisParam::Delta,
            min: -DETUNING_SPAN,
            max: DETUNING_SPAN,
            count: nx,
            scale: AxisScale::Linear,
        },
        AxisSpec {
            param: AxisParam::DeltaTilde,
            min: -DETUNING_SPAN,
            max: DETUNING_SPAN,
            count: ny,
            scale: AxisScale::Linear,
        },
    )
}

fn search_crossing(cfg: &DeviceConfig) -> Result<Crossing> {
    levels::crossing_field(cfg, 0.0, 0.5)
}

/// Run one preset. Counts and threads can be overridden; the physics cannot.
pub fn run_figure(
    figure: Figure,
    cfg: &DeviceConfig,
    overrides: &FigureOverrides,
) -> Result<FigureOutput> {
    let nx = |default: usize| overrides.x_count.unwrap_or(default);
    let ny = |default: usize| overrides.y_count.unwrap_or(default);
    let opts_with = |include_magnet: bool| SweepOptions {
        include_magnet,
        threads: overrides.threads,
        ..SweepOptions::default()
    };
    match figure {
        Figure::Levels => {
            let crossing = search_crossing(cfg)?;
            let curves = levels::level_curves(cfg, 0.0, 2.0 * crossing.bz, nx(400))?;
            Ok(FigureOutput::Curves(curves))
        }
        Figure::FieldMap | Figure::FieldMapMagnet => {
            let crossing = search_crossing(cfg)?;
            let x = AxisSpec {
                param: AxisParam::Bz,
                min: 0.5 * crossing.bz,
                max: 1.5 * crossing.bz,
                count: nx(200),
                scale: AxisScale::Linear,
            };
            let y = AxisSpec {
                param: AxisParam::OmegaB,
                min: 0.5 * crossing.frequency,
                max: 1.5 * crossing.frequency,
                count: ny(200),
                scale: AxisScale::Linear,
            };
            let opts = opts_with(figure == Figure::FieldMapMagnet);
            let mut result = run_sweep(cfg, &x, &y, Quantity::SOverOmega, &opts)?;
            result
                .extra_header
                .push(("crossing_bz".to_string(), crossing.bz.to_string()));
            result.extra_header.push((
                "crossing_frequency".to_string(),
                crossing.frequency.to_string(),
            ));
            Ok(FigureOutput::Grid(result))
        }
        Figure::DetuningMap | Figure::DetuningMapMagnet => {
            let (x, y) = detuning_axes(nx(DETUNING_COUNT), ny(DETUNING_COUNT));
            let opts = opts_with(figure == Figure::DetuningMapMagnet);
            Ok(FigureOutput::Grid(run_sweep(
                cfg,
                &x,
                &y,
                Quantity::SOverOmega,
                &opts,
            )?))
        }
        Figure::ExchangeSweep | Figure::ExchangeSweepWide => {
            let (bx, by) = detuning_axes(DETUNING_COUNT, DETUNING_COUNT);
            let baseline = baseline_max(cfg, &bx, &by, &opts_with(false))?;
            let (lo, hi, scale) = if figure == Figure::ExchangeSweep {
                (EXCHANGE_NEAR.0, EXCHANGE_NEAR.1, AxisScale::Linear)
            } else {
                (EXCHANGE_WIDE.0, EXCHANGE_WIDE.1, AxisScale::Log)
            };
            let x = AxisSpec {
                param: AxisParam::Delta,
                min: -DETUNING_SPAN,
                max: DETUNING_SPAN,
                count: nx(200),
                scale: AxisScale::Linear,
            };
            let y = AxisSpec {
                param: AxisParam::JPerp,
                min: lo,
                max: hi,
                count: ny(200),
                scale,
            };
            let opts = SweepOptions {
                tie_delta_tilde: true,
                baseline: Some(baseline.s_abs),
                ..opts_with(true)
            };
            Ok(FigureOutput::Grid(run_sweep(
                cfg,
                &x,
                &y,
                Quantity::RatioToBaseline,
                &opts,
            )?))
        }
        Figure::MatchMap | Figure::MatchMapMagnet => {
            let include_magnet = figure == Figure::MatchMapMagnet;
            let (dx, dy) = detuning_axes(DETUNING_COUNT, DETUNING_COUNT);
            let interior = run_sweep(
                cfg,
                &dx,
                &dy,
                Quantity::SOverOmega,
                &opts_with(include_magnet),
            )?;
            let best = grid_max(&interior).ok_or(Error::EmptyBaseline)?;
            let x = AxisSpec {
                param: AxisParam::Rabi,
                min: MATCH_RANGE.0,
                max: MATCH_RANGE.1,
                count: nx(200),
                scale: AxisScale::Log,
            };
            let y = AxisSpec {
                param: AxisParam::KappaC,
                min: MATCH_RANGE.0,
                max: MATCH_RANGE.1,
                count: ny(200),
                scale: AxisScale::Log,
            };
            let opts = SweepOptions {
                fixed_detunings: Some((best.x, best.y)),
                ..opts_with(include_magnet)
            };
            Ok(FigureOutput::Grid(run_sweep(
                cfg,
                &x,
                &y,
                Quantity::Efficiency,
                &opts,
            )?))
        }
    }
}
