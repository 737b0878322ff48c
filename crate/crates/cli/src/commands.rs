use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use qrlab::continuity::{
    bloch_growth_check, bloch_r, continuity_profile, continuity_profile_at, growth_suite, holder_constant,
    holder_constant_through, local_holder_exponent, q_estimate_grid, zalcman_rescale, BlochSettings, BlochStats,
    ContinuityProfile, GrowthSettings, NormalityVerdict, ProfileSettings, SampleBall, ZalcmanSettings,
};
use qrlab::dynamics::{julia_grid, julia_indicator, JuliaClass, JuliaSettings, Window};
use qrlab::metrics::escher::EscherVerdict;
use qrlab::metrics::{dist_quasihyperbolic, escher_ratio_profile, EscherRay, MetricKind, QhGrid, RayEnd};
use qrlab::zoo::IsometrySampler;
use qrlab::{ExtPoint, MapDescriptor, QrError};

use crate::acceptance;
use crate::config::{invalid, BlochConfig, ConfigError, ExperimentConfig, PointSpec, ProfileConfig, RayEndSpec};
use crate::output::{pgm_bytes, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dist,
    Holder,
    Exponent,
    Normality,
    Qf,
    Bloch,
    Growth,
    BlochCheck,
    Zalcman,
    Escher,
    Julia,
    Acceptance,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] QrError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything traceable to the configuration, 3 for numerical
    /// breakdowns and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(QrError::Numeric(_)) => 3,
            CliError::Model(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything a command produced, held in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: Vec<String>,
    pub tables: Vec<Table>,
    pub pgm: Option<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
    pub summary: BTreeMap<String, Value>,
}

impl Outcome {
    fn say(&mut self, line: impl Into<String>) {
        self.stdout.push(line.into());
    }

    fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }

    fn table(&mut self, t: Table) {
        if !t.rows.is_empty() {
            self.tables.push(t);
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn point_cells(p: &ExtPoint, n: usize) -> Vec<Cell> {
    match p.coords() {
        Some(c) => c.iter().map(|v| Cell::Float(*v)).collect(),
        None => vec![Cell::Text("inf".into()); n],
    }
}

fn coord_headers(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn point_json(p: &ExtPoint) -> Value {
    match p.coords() {
        Some(c) => json!(c),
        None => json!("inf"),
    }
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match command {
        Command::Dist => dist(cfg, &mut out)?,
        Command::Holder => holder(cfg, &mut out)?,
        Command::Exponent => exponent(cfg, &mut out)?,
        Command::Normality => normality(cfg, &mut out)?,
        Command::Qf => qf(cfg, &mut out)?,
        Command::Bloch => bloch(cfg, &mut out)?,
        Command::Growth => growth(cfg, &mut out)?,
        Command::BlochCheck => bloch_check(cfg, &mut out)?,
        Command::Zalcman => zalcman(cfg, &mut out)?,
        Command::Escher => escher(cfg, &mut out)?,
        Command::Julia => julia(cfg, &mut out)?,
        Command::Acceptance => run_acceptance(cfg, &mut out),
    }
    Ok(out)
}

fn dist(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let d = cfg.section(&cfg.dist, "dist")?;
    let metric = d.metric.resolve(n)?;
    let (x, y) = (d.x.resolve(n)?, d.y.resolve(n)?);
    let (value, lower, upper) = if metric.kind == MetricKind::Quasihyperbolic && x != y {
        let (Some(a), Some(b)) = (x.coords(), y.coords()) else {
            return Err(QrError::Domain("quasihyperbolic distance needs finite points".into()).into());
        };
        let est = dist_quasihyperbolic(&metric.region, &x, &y, &QhGrid::default_for(a, b))?;
        (est.value, est.lower_bound, est.upper_bound)
    } else {
        let v = metric.distance(&x, &y)?;
        (v, v, v)
    };
    out.say(format!("{value:.7}"));
    let mut t = Table::new("dist", &["distance", "lower", "upper"]);
    t.push(vec![value.into(), lower.into(), upper.into()]);
    out.table(t);
    out.note("distance", json!(value));
    Ok(())
}

fn holder(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let h = cfg.section(&cfg.holder, "holder")?;
    let f = cfg.map()?;
    let (mi, mo) = (h.metric_in.resolve(n)?, h.metric_out.resolve(n)?);
    if h.center.len() != n {
        return invalid("holder center has the wrong dimension").map_err(Into::into);
    }
    let ball = SampleBall::new(&h.center, h.radius);
    let alpha = h.alpha.unwrap_or(f.alpha);
    let fit = match &h.through {
        Some(p) => holder_constant_through(&f, &mi, &mo, &ball, &p.resolve(n)?, alpha, h.pairs, cfg.seed)?,
        None => holder_constant(&f, &mi, &mo, &ball, alpha, h.pairs, cfg.seed)?,
    };
    out.say(format!("L_hat = {:.7e} (alpha = {alpha:.6}, {} pairs)", fit.l_hat, fit.pair_count));
    let mut t = Table::new("holder", &["alpha", "L_hat", "pairs"]);
    t.push(vec![alpha.into(), fit.l_hat.into(), fit.pair_count.into()]);
    out.table(t);
    out.note("L_hat", json!(fit.l_hat));
    out.note("alpha", json!(alpha));
    if let Some((x, y)) = &fit.argmax {
        out.note("argmax", json!([point_json(x), point_json(y)]));
    }
    Ok(())
}

fn exponent(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let e = cfg.section(&cfg.exponent, "exponent")?;
    let f = cfg.map()?;
    let (mi, mo) = (e.metric_in.resolve(n)?, e.metric_out.resolve(n)?);
    let fit = local_holder_exponent(&f, &mi, &mo, &e.x0.resolve(n)?, &e.scales, e.samples, cfg.seed)?;
    if fit.degenerate {
        out.say("map is constant near x0; no exponent");
    } else {
        out.say(format!(
            "exponent = {:.6} (declared alpha = {:.6})",
            fit.exponent_hat.unwrap_or(f64::NAN),
            f.alpha
        ));
    }
    let mut t = Table::new("exponent", &["scale", "oscillation"]);
    for (s, o) in &fit.scale_table {
        t.push(vec![(*s).into(), (*o).into()]);
    }
    out.table(t);
    out.note("exponent_hat", opt(fit.exponent_hat));
    out.note("residual", opt(fit.residual));
    out.note("degenerate", json!(fit.degenerate));
    out.note("declared_alpha", json!(f.alpha));
    Ok(())
}

pub(crate) fn profile_settings(pc: &ProfileConfig, n: usize) -> Result<ProfileSettings, ConfigError> {
    let mut s = ProfileSettings::new(pc.deltas.clone());
    s.anchors = pc.anchors;
    s.reach = pc.reach;
    s.directions = pc.directions;
    s.threshold_fraction = pc.threshold_fraction;
    s.base_point = pc.base_point.as_ref().map(|p| p.resolve(n)).transpose()?;
    Ok(s)
}

fn run_profile(pc: &ProfileConfig, f: &MapDescriptor, n: usize, seed: u64) -> Result<ContinuityProfile, CliError> {
    let sampler = IsometrySampler::new(pc.space.into(), n, seed);
    let (mi, mo) = (pc.metric_in.resolve(n)?, pc.metric_out.resolve(n)?);
    let settings = profile_settings(pc, n)?;
    let p = match &pc.anchor_points {
        Some(pts) => {
            let anchors = pts.iter().map(|p| p.resolve(n)).collect::<Result<Vec<_>, _>>()?;
            continuity_profile_at(f, &sampler, &mi, &mo, &anchors, &settings, seed.wrapping_add(1))?
        }
        None => continuity_profile(f, &sampler, &mi, &mo, &settings, seed.wrapping_add(1))?,
    };
    Ok(p)
}

fn profile_tables(p: &ContinuityProfile, n: usize, out: &mut Outcome) {
    let mut t = Table::new("profile", &["delta", "omega_hat", "samples"]);
    for (d, w) in p.deltas.iter().zip(&p.omega_hat) {
        t.push(vec![(*d).into(), (*w).into(), p.pairs_per_delta.into()]);
    }
    out.table(t);
    let mut headers = vec!["delta".to_string(), "value".to_string()];
    headers.extend(coord_headers("x", n));
    headers.extend(coord_headers("y", n));
    let hs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut w = Table::new("witnesses", &hs);
    for wit in &p.witnesses {
        let mut row = vec![wit.delta.into(), wit.value.into()];
        row.extend(point_cells(&wit.x, n));
        row.extend(point_cells(&wit.y, n));
        w.push(row);
    }
    out.table(w);
    let verdict = match p.verdict {
        NormalityVerdict::NormalEvidence => "normal-evidence",
        NormalityVerdict::NotNormalEvidence => "not-normal-evidence",
    };
    out.note("verdict", json!(verdict));
    out.note("threshold", json!(p.threshold));
    out.note("witnesses", json!(p.witnesses.len()));
}

fn normality(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let pc = cfg.section(&cfg.normality, "normality")?;
    let f = cfg.map()?;
    let p = run_profile(pc, &f, n, cfg.seed)?;
    profile_tables(&p, n, out);
    out.say(format!(
        "{} ({} witnesses, omega_hat at smallest delta = {:.3e}, threshold {:.3e})",
        out.summary["verdict"].as_str().unwrap_or(""),
        p.witnesses.len(),
        p.omega_hat.last().copied().unwrap_or(f64::NAN),
        p.threshold
    ));
    Ok(())
}

fn qf(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let q = cfg.section(&cfg.qf, "qf")?;
    let f = cfg.map()?;
    let (mi, mo) = (q.metric_in.resolve(n)?, q.metric_out.resolve(n)?);
    let points = q.points.iter().map(|p| p.resolve(n)).collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        return invalid("qf needs at least one point").map_err(Into::into);
    }
    let alpha = q.alpha.unwrap_or(f.alpha);
    let (sup, all) = q_estimate_grid(&f, &mi, &mo, &points, alpha, &q.scales, q.samples, cfg.seed)?;
    let mut headers = coord_headers("x", n);
    headers.push("Q_hat".into());
    let hs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new("qf", &hs);
    for e in &all {
        let mut row = point_cells(&e.point, n);
        row.push(e.value.into());
        t.push(row);
    }
    out.table(t);
    out.say(format!("Q_hat = {sup:.7e} (alpha = {alpha:.6})"));
    out.note("Q_hat", json!(sup));
    out.note("alpha", json!(alpha));
    Ok(())
}

fn bloch_settings(b: &BlochConfig) -> BlochSettings {
    let mut s = BlochSettings::new(b.levels.clone(), b.centers);
    s.ball_samples = b.ball_samples;
    s.probe_centers = b.probe_centers;
    s
}

fn bloch_tables(stats: &BlochStats, out: &mut Outcome) {
    let mut t = Table::new("bloch", &["radius", "axis_diam", "sup_diam"]);
    for e in &stats.little_bloch_curve {
        t.push(vec![e.radius.into(), e.axis_diam.into(), e.sup_diam.into()]);
    }
    out.table(t);
    out.note("R_hat", json!(stats.r_hat));
    out.note("f0_norm", json!(stats.f0_norm));
    out.note("sup_diam", json!(stats.sup_diam));
    out.note("argmax_center", point_json(&stats.argmax_center));
    out.note("bloch_radius_probe", json!(stats.bloch_radius_probe));
    out.note("centers_used", json!(stats.centers_used));
}

fn bloch(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let b = cfg.section(&cfg.bloch, "bloch")?;
    let f = cfg.map()?;
    let stats = bloch_r(&f, &bloch_settings(b), cfg.seed)?;
    out.say(format!(
        "R_hat = {:.7e} over {} centers (|f(0)| = {:.3e})",
        stats.r_hat, stats.centers_used, stats.f0_norm
    ));
    bloch_tables(&stats, out);
    Ok(())
}

fn growth(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let g = cfg.section(&cfg.growth, "growth")?;
    let f = cfg.map()?;
    let mut s = GrowthSettings::new(g.radii.clone());
    s.x0 = g.x0.as_ref().map(|p| p.resolve(n)).transpose()?;
    s.sphere_samples = g.sphere_samples;
    s.mc_samples = g.mc_samples;
    s.tail_fraction = g.tail_fraction;
    let series = growth_suite(&f, &s, cfg.seed)?;
    let mut t = Table::new("growth", &["r", "M", "A", "A_stderr"]);
    for (i, r) in series.radii.iter().enumerate() {
        let a = series.a_values.get(i).map_or(Cell::Empty, |v| Cell::Float(*v));
        let e = series.a_stderr.get(i).map_or(Cell::Empty, |v| Cell::Float(*v));
        t.push(vec![(*r).into(), series.m_values[i].into(), a, e]);
    }
    out.table(t);
    out.say(format!(
        "mu_hat = {:.4}, lambda_hat = {:.4}",
        series.mu_hat.unwrap_or(f64::NAN),
        series.lambda_hat.unwrap_or(f64::NAN)
    ));
    out.note("mu_hat", opt(series.mu_hat));
    out.note("lambda_hat", opt(series.lambda_hat));
    out.note("omega_n", json!(series.omega_n));
    out.note("jacobian_failures", json!(series.jacobian_failures));
    Ok(())
}

fn bloch_check(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let bc = cfg.section(&cfg.bloch_check, "bloch_check")?;
    let f = cfg.map()?;
    let stats = bloch_r(&f, &bloch_settings(&bc.bloch), cfg.seed)?;
    let rows = bloch_growth_check(&f, &bc.radii, &stats, bc.sphere_samples, cfg.seed.wrapping_add(1))?;
    bloch_tables(&stats, out);
    let mut t = Table::new("bloch_check", &["r", "M", "bound", "pass"]);
    for row in &rows {
        t.push(vec![row.r.into(), row.m.into(), row.bound.into(), row.pass.into()]);
        out.checks.push(Check {
            name: format!("growth bound at r = {}", row.r),
            pass: row.pass,
            detail: format!("M = {:.6e}, bound = {:.6e}", row.m, row.bound),
        });
        out.say(format!(
            "r = {}: M = {:.6e}, bound = {:.6e} {}",
            row.r,
            row.m,
            row.bound,
            if row.pass { "ok" } else { "FAILED" }
        ));
    }
    out.table(t);
    Ok(())
}

fn zalcman(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let z = cfg.section(&cfg.zalcman, "zalcman")?;
    let f = cfg.map()?;
    let p = run_profile(&z.profile, &f, n, cfg.seed)?;
    profile_tables(&p, n, out);
    let mut s = ZalcmanSettings::new(z.window);
    s.grid = z.grid;
    s.probes = z.probes;
    s.max_terms = z.max_terms;
    let alpha = z.alpha.unwrap_or(f.alpha);
    let seq = zalcman_rescale(&f, alpha, &p.witnesses, &s, cfg.seed.wrapping_add(2))?;
    let mut t = Table::new(
        "zalcman",
        &["index", "rho", "sigma", "weighted_ratio", "scale_law_error", "holder_excess", "certified"],
    );
    for term in &seq.terms {
        t.push(vec![
            term.index.into(),
            term.rho.into(),
            term.sigma.into(),
            term.weighted_ratio.into(),
            term.scale_law_error.into(),
            term.holder_excess.into(),
            term.is_nonconstant().into(),
        ]);
    }
    out.table(t);
    if seq.yosida_evidence {
        out.say("yosida-evidence: no non-normality witnesses, empty sequence");
    } else {
        out.say(format!(
            "{} terms, scale law to 1e-9: {}, Holder bound: {}",
            seq.terms.len(),
            seq.scale_law_holds(1e-9),
            seq.holder_bound_holds()
        ));
    }
    out.note("yosida_evidence", json!(seq.yosida_evidence));
    out.note("terms", json!(seq.terms.len()));
    out.note("alpha", json!(alpha));
    Ok(())
}

fn escher(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let e = cfg.section(&cfg.escher, "escher")?;
    let (ty, tz) = (e.metric_y.resolve(n)?, e.metric_z.resolve(n)?);
    let center = PointSpec::Coords(e.center.clone()).finite(n)?;
    let end = match &e.end {
        RayEndSpec::Point { point } => RayEnd::Point(PointSpec::Coords(point.clone()).finite(n)?),
        RayEndSpec::Infinity { direction } => RayEnd::Infinity {
            direction: PointSpec::Coords(direction.clone()).finite(n)?,
        },
    };
    let ray = EscherRay {
        center,
        end,
        decades: e.decades,
    };
    let prof = escher_ratio_profile(&ty, &tz, &ray, e.steps)?;
    let mut t = Table::new("escher", &["parameter", "ratio"]);
    for (s, r) in &prof.samples {
        t.push(vec![(*s).into(), (*r).into()]);
    }
    out.table(t);
    let verdict = match prof.verdict {
        EscherVerdict::Evidence => "evidence",
        EscherVerdict::Failure => "failure",
    };
    out.say(format!(
        "escher {verdict}: final ratio {:.3e}",
        prof.samples.last().map_or(f64::NAN, |s| s.1)
    ));
    out.note("verdict", json!(verdict));
    Ok(())
}

fn julia(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let n = cfg.dimension;
    let j = cfg.section(&cfg.julia, "julia")?;
    let f = cfg.map()?;
    let base = j.base.clone().unwrap_or_else(|| vec![0.0; n]);
    if base.len() != n {
        return invalid("julia base has the wrong dimension").map_err(Into::into);
    }
    let window = Window {
        x_range: (j.x_range[0], j.x_range[1]),
        y_range: (j.y_range[0], j.y_range[1]),
        axes: (j.axes[0], j.axes[1]),
        base,
    };
    if j.m_max == 0 {
        return invalid("m_max must be positive").map_err(Into::into);
    }
    let settings = JuliaSettings {
        alpha: j.alpha.unwrap_or(f.alpha),
        r_list: j.r_list.clone(),
        m_list: (1..=j.m_max).collect(),
        samples: j.samples,
        threshold: j.threshold,
    };
    // probe tables first: they are cheap and fail fast on bad points
    let mut probes = Vec::new();
    for (i, p) in j.probes.iter().enumerate() {
        let x = p.resolve(n)?;
        let probe = julia_indicator(&f, &x, &settings, cfg.seed.wrapping_add(i as u64))?;
        let mut t = Table::new(&format!("probe_{i}"), &["m", "r", "L_hat", "ratio"]);
        for e in &probe.table {
            t.push(vec![e.m.into(), e.r.into(), e.l_hat.into(), e.ratio.into()]);
        }
        probes.push((t, probe));
    }
    let grid = julia_grid(&f, &window, j.width, j.height, &settings, cfg.seed)?;
    let mut t = Table::new("julia", &["col", "row", "x", "y", "indicator", "class"]);
    let mut julia_pixels = 0usize;
    for (i, ind) in grid.indicators.iter().enumerate() {
        let c = grid.pixel_center(i);
        let coords = c.coords().unwrap_or(&[]);
        let class = match grid.classification(i) {
            JuliaClass::JuliaEvidence => {
                julia_pixels += 1;
                "julia"
            }
            JuliaClass::FatouEvidence => "fatou",
        };
        t.push(vec![
            (i % grid.width).into(),
            (i / grid.width).into(),
            coords.get(window.axes.0).copied().unwrap_or(f64::NAN).into(),
            coords.get(window.axes.1).copied().unwrap_or(f64::NAN).into(),
            (*ind).into(),
            class.into(),
        ]);
    }
    out.table(t);
    for (t, probe) in probes {
        out.say(format!("probe {:?}: indicator {:.3e}", probe.point, probe.indicator));
        out.table(t);
    }
    out.pgm = Some(("julia.pgm".into(), pgm_bytes(&grid)));
    out.say(format!(
        "{julia_pixels} of {} pixels are julia-evidence (threshold {:.1e})",
        grid.indicators.len(),
        grid.threshold
    ));
    out.note("julia_pixels", json!(julia_pixels));
    out.note("alpha", json!(settings.alpha));
    Ok(())
}

fn run_acceptance(cfg: &ExperimentConfig, out: &mut Outcome) {
    let only = cfg.acceptance.as_ref().and_then(|a| a.only.clone());
    let results = acceptance::run_suite(only.as_deref(), cfg.seed);
    let mut t = Table::new("acceptance", &["id", "name", "pass", "seconds", "limit", "detail"]);
    for r in &results {
        out.say(r.line());
        t.push(vec![
            r.id.into(),
            r.name.into(),
            r.pass.into(),
            r.seconds.into(),
            r.limit.into(),
            r.detail.as_str().into(),
        ]);
        out.checks.push(Check {
            name: r.name.to_string(),
            pass: r.pass,
            detail: r.detail.clone(),
        });
    }
    let passed = results.iter().filter(|r| r.pass).count();
    out.say(format!("{passed}/{} criteria passed", results.len()));
    out.table(t);
}
