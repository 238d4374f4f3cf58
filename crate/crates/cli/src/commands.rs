use antenna_core::beam::{beam_root, BeamMode};
use antenna_core::config::{Config, OutputFormat, Range};
use antenna_core::galerkin::{alpha_limit, GalerkinSystem};
use antenna_core::kernel::{band_edge, shear_kernel, CantileverShape};
use antenna_core::model::CantileverProfile;
use antenna_core::nonlinear::{self as nl, EffectiveParams};
use antenna_core::profile::ProfileField;
use antenna_core::spectrum::{self, Spectrum, SweepParam};
use serde_json::json;

use crate::output::{canonical, Cell, Table};
use crate::{CliError, Command, Grid, Nonlinear};

pub struct Output {
    pub body: String,
    pub rows: Option<usize>,
    pub format: OutputFormat,
    pub warnings: Vec<String>,
}

impl Output {
    fn table(t: Table, format: OutputFormat, warnings: Vec<String>) -> Self {
        Self { body: t.render(format), rows: Some(t.rows.len()), format, warnings }
    }
}

/// Fold subcommand flags into the config so the config hash covers them.
pub fn apply_overrides(config: &mut Config, command: &Command) -> Result<(), CliError> {
    let (n_max, k_max, basis) = match command {
        Command::Modes { n_max, .. } => (*n_max, None, None),
        Command::Spectrum { n_max, k_max } | Command::Sweep { n_max, k_max, .. } => (*n_max, *k_max, None),
        Command::Galerkin { basis_size, k_max } => (None, *k_max, *basis_size),
        _ => (None, None, None),
    };
    for (flag, v) in [("--n-max", n_max), ("--k-max", k_max), ("--basis-size", basis)] {
        if v == Some(0) {
            return Err(CliError::Usage(format!("{flag} must be at least 1")));
        }
    }
    if let Some(n) = n_max {
        config.spectrum.n_max = n;
    }
    if let Some(k) = k_max {
        config.spectrum.k_max = k;
    }
    if let Some(m) = basis {
        config.galerkin.basis_size = m;
    }
    if let Command::Nonlinear(Nonlinear::Response { sigma1, sigma2 }) = command {
        if sigma1.from.is_some() || sigma1.to.is_some() || sigma1.points.is_some() {
            let base = config.nonlinear.sigma1;
            let from = sigma1.from.or(base.map(|r| r.from));
            let to = sigma1.to.or(base.map(|r| r.to));
            let (Some(from), Some(to)) = (from, to) else {
                return Err(CliError::Usage("--from and --to are both needed for a sigma1 sweep".into()));
            };
            let points = sigma1.points.or(base.map(|r| r.points)).unwrap_or(101);
            config.nonlinear.sigma1 = Some(Range { from, to, points });
        }
        if let Some(s2) = sigma2 {
            config.nonlinear.sigma2 = Some(Range::single(*s2));
        }
    }
    Ok(())
}

pub fn dispatch(config: &Config, command: &Command) -> Result<Output, CliError> {
    let format = config.output.format;
    match command {
        Command::Modes { points, .. } => modes(config, *points).map(|t| Output::table(t, format, Vec::new())),
        Command::Kernel { grid, shape } => kernel(config, grid, *shape),
        Command::Spectrum { .. } => spectrum_table(config),
        Command::Sweep { param, from, to, points, .. } => sweep(config, param, Range { from: *from, to: *to, points: *points }),
        Command::Galerkin { .. } => galerkin(config),
        Command::Nonlinear(Nonlinear::Coeffs) => coeffs(config),
        Command::Nonlinear(Nonlinear::Response { .. }) => response(config),
    }
}

fn modes(config: &Config, points: usize) -> Result<Table, CliError> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let mut t = Table::new(["n", "beta", "u", "phi"]);
    for mode in BeamMode::basis(config.boundary, config.spectrum.n_max) {
        for i in 0..points {
            let u = i as f64 / (points - 1) as f64;
            t.push(vec![mode.n().into(), mode.beta().into(), u.into(), mode.phi(u).into()]);
        }
    }
    Ok(t)
}

fn kernel(config: &Config, grid: &Grid, shape: Option<f64>) -> Result<Output, CliError> {
    let format = config.output.format;
    if let Some(gamma) = shape {
        let s = CantileverShape::new(gamma)?;
        let points = grid.points.unwrap_or(201).max(2);
        let mut t = Table::new(["v", "chi"]);
        for i in 0..points {
            let v = i as f64 / (points - 1) as f64;
            t.push(vec![v.into(), s.chi(v).into()]);
        }
        return Ok(Output::table(t, format, Vec::new()));
    }
    let range = Range {
        from: grid.from.unwrap_or(0.0),
        to: grid.to.unwrap_or(band_edge(config.spectrum.k_max) + 1.0),
        points: grid.points.unwrap_or(2001),
    };
    if !(range.from >= 0.0 && range.to > range.from) {
        return Err(CliError::Usage(format!("bad gamma range [{}, {}]", range.from, range.to)));
    }
    let mut t = Table::new(["gamma", "t"]);
    let mut skipped = 0;
    for g in range.values() {
        match shear_kernel(g) {
            Ok(v) => t.push(vec![g.into(), v.into()]),
            Err(antenna_core::Error::PoleProximity { .. }) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!("{skipped} gamma samples inside a band-edge pole window were left out"));
    }
    Ok(Output::table(t, format, warnings))
}

fn solve_spectrum(config: &Config) -> Result<Spectrum, CliError> {
    let (n, k) = (config.spectrum.n_max, config.spectrum.k_max);
    let (g, p, bc) = (&config.geometry, &config.profile, config.boundary);
    match p {
        CantileverProfile::Uniform { .. } => Ok(spectrum::solve_uniform(g, p, bc, n, k)?),
        CantileverProfile::Alternating { .. } => Ok(spectrum::solve_alternating(g, p, bc, n, k)?),
        other => Err(CliError::Usage(format!(
            "the continuum spectrum needs a uniform or alternating profile, got {}; use `galerkin`",
            other.kind()
        ))),
    }
}

fn spectrum_table(config: &Config) -> Result<Output, CliError> {
    let s = solve_spectrum(config)?;
    let mut t = Table::new([
        "n",
        "k",
        "gamma",
        "omega_rad_s",
        "freq_hz",
        "omega_normalized",
        "band_edge_lower",
        "band_edge_upper",
        "valid",
    ]);
    for l in &s.levels {
        t.push(vec![
            l.mode.n.into(),
            l.mode.k.into(),
            l.gamma.into(),
            l.omega.into(),
            l.freq_hz.into(),
            l.omega_normalized.into(),
            l.band_edge_lower.into(),
            l.band_edge_upper.into(),
            l.valid.into(),
        ]);
    }
    let invalid = s.levels.iter().filter(|l| !l.valid).count();
    let mut warnings = Vec::new();
    if invalid > 0 {
        warnings.push(format!(
            "{invalid} levels have n >= N = {} and lie outside the continuum description (valid = false)",
            config.geometry.count_per_side
        ));
    }
    Ok(Output::table(t, config.output.format, warnings))
}

fn sweep(config: &Config, param: &str, range: Range) -> Result<Output, CliError> {
    let param: SweepParam = param.parse()?;
    if range.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let rows = spectrum::sweep(
        &config.geometry,
        &config.profile,
        config.boundary,
        param,
        &range.values(),
        config.spectrum.n_max,
        config.spectrum.k_max,
    )?;
    let mut t = Table::new(["sweep_value", "n", "k", "gamma"]);
    for r in rows {
        t.push(vec![r.value.into(), r.n.into(), r.k.into(), r.gamma.into()]);
    }
    Ok(Output::table(t, config.output.format, Vec::new()))
}

fn galerkin(config: &Config) -> Result<Output, CliError> {
    let g = &config.geometry;
    let m = config.galerkin.basis_size;
    let field = ProfileField::new(g, &config.profile)?;
    let mut alpha_max = alpha_limit(&field, config.spectrum.k_max);
    if !alpha_max.is_finite() {
        // bare beam: just cover the basis
        alpha_max = (beam_root(config.boundary, m) + 1.0) / g.beam_length;
    }
    let system = GalerkinSystem::new(g, &config.profile, config.boundary, config.galerkin)?;
    let sol = system.solve(0.0, alpha_max)?;
    let mut columns = vec!["alpha".to_string(), "omega_rad_s".into(), "dominant_n".into()];
    columns.extend((1..=m).map(|i| format!("participation_{i}")));
    let mut t = Table::new(columns);
    for l in &sol.levels {
        let mut row: Vec<Cell> = vec![l.alpha.into(), l.omega.into(), l.dominant_n.into()];
        row.extend(l.participation.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    Ok(Output::table(t, config.output.format, sol.warnings))
}

struct Device {
    selection: nl::TwoModeSelection,
    integrals: nl::OverlapIntegrals,
}

fn device(config: &Config) -> Result<Device, CliError> {
    let selection = nl::select_modes(&config.geometry, &config.profile, config.boundary)?;
    let integrals = nl::overlap_integrals(&selection)?;
    Ok(Device { selection, integrals })
}

fn params(config: &Config, d: &Device, c_y: f64, c_eta: f64) -> Result<EffectiveParams, CliError> {
    let n = &config.nonlinear;
    Ok(nl::effective_params(&d.selection, &d.integrals, &config.geometry, c_y, c_eta, n.f1, n.f2)?)
}

fn coeffs(config: &Config) -> Result<Output, CliError> {
    let d = device(config)?;
    let nlc = &config.nonlinear;
    let mut warnings = Vec::new();
    if config.output.format == OutputFormat::Csv && config.output.path.is_some() {
        warnings.push("nonlinear coeffs is always written as JSON".into());
    }
    // damping is linear in both viscosities, so report it per unit of each
    let per_c_y = params(config, &d, 1.0, 0.0)?.damping;
    let per_c_eta = params(config, &d, 0.0, 1.0)?.damping;
    let mut p = serde_json::to_value(params(config, &d, nlc.c_y.unwrap_or(0.0), nlc.c_eta.unwrap_or(0.0))?)
        .expect("params serialize");
    if nlc.c_y.is_none() || nlc.c_eta.is_none() {
        p["damping"] = serde_json::Value::Null;
        warnings.push("c_y or c_eta not set: damping left symbolic (see viscosity.damping_per_unit_*)".into());
    }
    let sel = &d.selection;
    let doc = json!({
        "preset": config.preset,
        "provenance": config.provenance(),
        "quadrature": {
            "rule": "composite 32-point Gauss-Legendre",
            "beam_rtol": nl::INTEGRAL_RTOL,
            "cantilever_panels": nl::CANTILEVER_PANELS,
            "cantilever_gap_limit": nl::CANTILEVER_GAP_LIMIT,
            "quadrature_gap": d.integrals.quadrature_gap,
            "closed_form_gap": d.integrals.closed_form_gap(),
        },
        "modes": {
            "beta": sel.beta(),
            "gamma": sel.gamma,
            "omega_rad_s": sel.omega,
            "freq_hz": sel.frequency_hz(),
        },
        "integrals": d.integrals,
        "params": p,
        "viscosity": {
            "c_y": nlc.c_y,
            "c_eta": nlc.c_eta,
            "damping_per_unit_c_y": per_c_y,
            "damping_per_unit_c_eta": per_c_eta,
        },
    });
    Ok(Output { body: canonical(&doc), rows: None, format: OutputFormat::Json, warnings })
}

fn response(config: &Config) -> Result<Output, CliError> {
    let nlc = &config.nonlinear;
    let (Some(c_y), Some(c_eta)) = (nlc.c_y, nlc.c_eta) else {
        return Err(CliError::Usage(
            "nonlinear response needs numeric damping: set nonlinear.c_y and nonlinear.c_eta".into(),
        ));
    };
    let d = device(config)?;
    let p = params(config, &d, c_y, c_eta)?;
    let s1 = nlc.sigma1.unwrap_or(Range::single(0.0)).values();
    let s2 = nlc.sigma2.unwrap_or(Range::single(0.0)).values();
    let grid: Vec<(f64, f64)> = s2.iter().flat_map(|&b| s1.iter().map(move |&a| (a, b))).collect();
    let mut t = Table::new(["sigma1", "sigma2", "a1", "a2", "theta1", "theta2", "branch", "stable_flag"]);
    let mut unconverged = 0;
    for (&(a, b), sol) in grid.iter().zip(nl::scan(&grid, &p, nlc.elimination)) {
        let sol = sol?;
        unconverged += sol.unconverged;
        for [m1, m2] in &sol.pairs {
            let branch = format!("{}{}", m1.branch.symbol(), m2.branch.symbol());
            t.push(vec![
                a.into(),
                b.into(),
                m1.amplitude.into(),
                m2.amplitude.into(),
                m1.phase.into(),
                m2.phase.into(),
                Cell::Text(branch),
                "unknown".into(),
            ]);
        }
    }
    let mut warnings = Vec::new();
    if unconverged > 0 {
        warnings.push(format!(
            "{unconverged} steady-state candidates did not converge within {} Newton iterations",
            nl::MAX_ITERATIONS
        ));
    }
    Ok(Output::table(t, config.output.format, warnings))
}
