use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use molring::coupling::{anisotropy_sweep, effective_coupling_scaled, AnisotropyTemplate, EffectivePair};
use molring::linalg::hermitian_eigendecompose;
use molring::oracle::{cross_validate, ZConvention};
use molring::protocols::{
    fidelity_curve, fluctuation_sweep, make_transfer_program, plan_w_from_center_network, plan_w_from_site, Branch,
    SiteWRequest, WGenerationPlan, WSource,
};
use molring::ring::encode_ring;
use molring::star::{analytic_eigensystem, build_effective_hamiltonian, StarNetwork, StarPropagator, SubspaceState};
use num_complex::Complex64;

use crate::config::{
    AnchorConfig, BranchConfig, CenterTag, GridConfig, Mode, NetworkConfig, RingConfig, SourceConfig, ZConfig,
};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Evolve,
    Wgen,
    SweepFluct,
    Transfer,
    SweepAniso,
    Validate,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub k: Option<u32>,
    pub branch: Option<BranchConfig>,
    pub z_convention: Option<ZConfig>,
}

/// A finished output file, written only once every output is ready.
pub struct Output {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub rows: usize,
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
    rows: usize,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header.iter().map(|h| h.as_ref()))?;
        Ok(Self { writer, rows: 0 })
    }

    fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<(), CliError> {
        self.writer.write_record(fields.iter().map(|f| f.as_ref()))?;
        self.rows += 1;
        Ok(())
    }

    fn finish(self, path: PathBuf) -> Result<Output, CliError> {
        let rows = self.rows;
        let bytes = self.writer.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(Output { path, bytes, rows })
    }
}

/// Full double precision.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Validation(format!("`protocol.{name}` is required for this command")))
}

fn grid(value: &Option<GridConfig>, name: &str) -> Result<Vec<f64>, CliError> {
    required(value, name)?.values(&format!("protocol.{name}"))
}

pub fn network(config: &NetworkConfig) -> Result<StarNetwork, CliError> {
    match config.mode {
        Mode::Effective => {
            let block = config.effective.as_ref().expect("mode checked at parse time");
            match (&block.deltas, block.c) {
                (Some(d), None) => Ok(StarNetwork::new(block.gammas.clone(), d.clone())?),
                (None, Some(c)) => Ok(StarNetwork::constrained(block.gammas.clone(), c)?),
                _ => Err(CliError::Validation(
                    "`effective` needs exactly one of `deltas` and `c`".into(),
                )),
            }
        }
        Mode::Microscopic => {
            let block = config.microscopic.as_ref().expect("mode checked at parse time");
            if block.circumjacent.is_empty() {
                return Err(CliError::Validation("`microscopic.circumjacent` is empty".into()));
            }
            let center = encode_ring(&block.center.spec()?)?;
            let pairs = block
                .circumjacent
                .iter()
                .map(|c| {
                    let ring = if c.ring == block.center {
                        None
                    } else {
                        Some(encode_ring(&c.ring.spec()?)?)
                    };
                    let elements = &ring.as_ref().unwrap_or(&center).elements;
                    let linkers: Vec<_> = c.linkers.iter().map(|l| l.linker()).collect();
                    Ok(effective_coupling_scaled(
                        elements,
                        &center.elements,
                        &linkers,
                        block.gamma_scale,
                    )?)
                })
                .collect::<Result<Vec<EffectivePair>, CliError>>()?;
            Ok(StarNetwork::from_pairs(&pairs)?)
        }
    }
}

fn source_index(config: &NetworkConfig, net: &StarNetwork) -> Result<usize, CliError> {
    match required(&config.protocol.source, "source")? {
        SourceConfig::Named(CenterTag::Center) => Ok(net.center()),
        SourceConfig::Site(i) if i < net.n() => Ok(i),
        SourceConfig::Site(i) => Err(CliError::Validation(format!(
            "source {i} is outside the {} circumjacent sites",
            net.n()
        ))),
    }
}

pub fn run(
    command: Command,
    config: &NetworkConfig,
    overrides: Overrides,
    out: &Path,
) -> Result<Vec<Output>, CliError> {
    let out = out.to_path_buf();
    match command {
        Command::SweepAniso => sweep_aniso(config, out).map(|o| vec![o]),
        _ => {
            let net = network(config)?;
            match command {
                Command::Spectrum => spectrum(&net, out).map(|o| vec![o]),
                Command::Evolve => evolve(config, &net, out).map(|o| vec![o]),
                Command::Wgen => wgen(config, &net, overrides, out).map(|o| vec![o]),
                Command::SweepFluct => sweep_fluct(config, &net, overrides, out).map(|o| vec![o]),
                Command::Transfer => transfer(config, &net, out),
                Command::Validate => validate(config, &net, overrides, out).map(|o| vec![o]),
                Command::SweepAniso => unreachable!(),
            }
        }
    }
}

fn spectrum(net: &StarNetwork, out: PathBuf) -> Result<Output, CliError> {
    let es = hermitian_eigendecompose(&build_effective_hamiltonian(net))?;
    let analytic = if net.satisfies_constraint() && net.omega() > 0.0 {
        Some(analytic_eigensystem(net)?.sorted_values())
    } else {
        None
    };
    let mut header = vec!["index".to_string(), "eigenvalue".into(), "analytic_eigenvalue".into()];
    for q in 0..net.dim() {
        header.push(format!("v{q}_re"));
        header.push(format!("v{q}_im"));
    }
    let mut table = Table::new(&header)?;
    for k in 0..es.dim() {
        let v = es.vector(k);
        // fix the phase so the largest component is real and positive
        let lead = v
            .iter()
            .cloned()
            .fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
        let phase = if lead.norm() > 0.0 {
            lead.conj() / lead.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut row = vec![k.to_string(), num(es.values()[k]), opt(analytic.as_ref().map(|a| a[k]))];
        for z in v {
            let z = z * phase;
            row.push(num(z.re));
            row.push(num(z.im));
        }
        table.row(&row)?;
    }
    table.finish(out)
}

fn evolve(config: &NetworkConfig, net: &StarNetwork, out: PathBuf) -> Result<Output, CliError> {
    let source = source_index(config, net)?;
    let times = grid(&config.protocol.t_grid, "t_grid")?;
    let prop = StarPropagator::new(net)?;
    let start = SubspaceState::basis(net.dim(), source)?;
    let mut header = vec!["t".to_string()];
    for q in 0..net.dim() {
        header.push(format!("a{q}_re"));
        header.push(format!("a{q}_im"));
    }
    let mut table = Table::new(&header)?;
    for &t in &times {
        let s = prop.evolve(&start, t)?;
        let mut row = vec![num(t)];
        for z in s.amplitudes() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        table.row(&row)?;
    }
    table.finish(out)
}

fn plan(config: &NetworkConfig, net: &StarNetwork, overrides: Overrides) -> Result<WGenerationPlan, CliError> {
    let p = &config.protocol;
    let source = source_index(config, net)?;
    let k = overrides.k.or(p.k);
    if source == net.center() {
        return Ok(plan_w_from_center_network(net, k.unwrap_or(0))?);
    }
    if !net.satisfies_constraint() {
        return Err(CliError::Validation(
            "site-sourced W generation needs gamma_i (1 + delta_i) equal on every site".into(),
        ));
    }
    let anchor = required(&p.anchor, "anchor")?;
    let gamma = match anchor {
        AnchorConfig::Source => net.gammas()[source],
        AnchorConfig::Others => net.gammas()[if source == 0 { 1 } else { 0 }],
    };
    Ok(plan_w_from_site(&SiteWRequest {
        n: net.n(),
        source,
        c: net.c(),
        gamma,
        anchor: anchor.into(),
        k,
        branch: overrides.branch.or(p.branch).map(Branch::from).unwrap_or_default(),
    })?)
}

fn wgen(config: &NetworkConfig, net: &StarNetwork, overrides: Overrides, out: PathBuf) -> Result<Output, CliError> {
    let plan = plan(config, net, overrides)?;
    let mut table = Table::new(&["key", "value"])?;
    let source = match plan.source {
        WSource::Center => "center".to_string(),
        WSource::Site(i) => i.to_string(),
    };
    table.row(&["source".to_string(), source])?;
    table.row(&["k".to_string(), plan.k.to_string()])?;
    table.row(&["p".to_string(), opt(plan.p)])?;
    table.row(&["chi".to_string(), num(plan.chi)])?;
    table.row(&["t_w".to_string(), num(plan.t_w)])?;
    table.row(&["omega".to_string(), num(plan.network.omega())])?;
    table.row(&["c".to_string(), num(plan.network.c())])?;
    table.row(&["predicted_error".to_string(), num(plan.predicted_error)])?;
    for (i, (g, d)) in plan.network.gammas().iter().zip(plan.network.deltas()).enumerate() {
        table.row(&[format!("gamma_{i}"), num(*g)])?;
        table.row(&[format!("delta_{i}"), num(*d)])?;
    }
    table.finish(out)
}

fn sweep_fluct(
    config: &NetworkConfig,
    net: &StarNetwork,
    overrides: Overrides,
    out: PathBuf,
) -> Result<Output, CliError> {
    let deltas = grid(&config.protocol.delta_grid, "delta_grid")?;
    let plan = plan(config, net, overrides)?;
    let WSource::Site(source) = plan.source else {
        return Err(CliError::Validation(
            "the fluctuation sweep needs a site-sourced plan".into(),
        ));
    };
    let site = config.protocol.fluctuating_site.unwrap_or(source);
    let points = fluctuation_sweep(&plan, site, &deltas)?;
    let mut table = Table::new(&["delta", "E_r"])?;
    for p in points {
        table.row(&[num(p.delta), num(p.error)])?;
    }
    table.finish(out)
}

/// `<out>.program.csv` next to the main output.
pub fn program_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.program.csv"))
}

fn transfer(config: &NetworkConfig, net: &StarNetwork, out: PathBuf) -> Result<Vec<Output>, CliError> {
    let times = grid(&config.protocol.t_grid, "t_grid")?;
    let t = config
        .protocol
        .transfer
        .as_ref()
        .ok_or_else(|| CliError::Validation("`protocol.transfer` is required for this command".into()))?;
    if !net.satisfies_constraint() {
        return Err(CliError::Validation(
            "transfer needs gamma_i (1 + delta_i) equal on every site to fix C".into(),
        ));
    }
    let amplitudes = match (&t.amplitudes, t.alpha) {
        (Some(a), None) => a.clone(),
        (None, Some(alpha)) if t.l == 2 => vec![alpha.sin(), alpha.cos()],
        (None, Some(_)) => return Err(CliError::Validation("`alpha` only applies to l = 2".into())),
        _ => {
            return Err(CliError::Validation(
                "`protocol.transfer` needs exactly one of `alpha` and `amplitudes`".into(),
            ))
        }
    };
    let program = make_transfer_program(net.n(), t.l, &amplitudes, t.gamma_scale, net.c())?;
    let curve = fidelity_curve(&program, &times)?;
    let mut table = Table::new(&["t", "F_return", "F_target"])?;
    for j in 0..times.len() {
        table.row(&[
            num(curve.times[j]),
            num(curve.return_fidelity[j]),
            num(curve.target_fidelity[j]),
        ])?;
    }
    let mut dump = Table::new(&["site", "gamma", "delta"])?;
    for (i, (g, d)) in program
        .network
        .gammas()
        .iter()
        .zip(program.network.deltas())
        .enumerate()
    {
        dump.row(&[i.to_string(), num(*g), num(*d)])?;
    }
    eprintln!(
        "transfer time {:.16e} (bright-mode half period {:.16e})",
        program.t_transfer,
        2.0 * PI / program.network.omega()
    );
    let dump_path = program_path(&out);
    Ok(vec![table.finish(out)?, dump.finish(dump_path)?])
}

fn sweep_aniso(config: &NetworkConfig, out: PathBuf) -> Result<Output, CliError> {
    let block = config
        .microscopic
        .as_ref()
        .ok_or_else(|| CliError::Validation("the anisotropy sweep needs `mode = microscopic`".into()))?;
    let RingConfig::CrNi(params) = &block.center else {
        return Err(CliError::Validation(
            "the anisotropy sweep needs a `cr_ni` center ring".into(),
        ));
    };
    let first = block
        .circumjacent
        .first()
        .ok_or_else(|| CliError::Validation("`microscopic.circumjacent` is empty".into()))?;
    if first.ring != block.center {
        return Err(CliError::Validation(
            "the anisotropy sweep couples two identical rings; the first circumjacent ring must equal the center"
                .into(),
        ));
    }
    let a = config
        .protocol
        .anisotropy
        .as_ref()
        .ok_or_else(|| CliError::Validation("`protocol.anisotropy` is required for this command".into()))?;
    let (grid, ratio) = a.grid.sweep_grid()?;
    let template = AnisotropyTemplate {
        ring: params.params(),
        linkers: first.linkers.iter().map(|l| l.linker()).collect(),
        ratio,
        gamma_scale: block.gamma_scale,
    };
    let rows = anisotropy_sweep(&template, &grid)?;
    let mut table = Table::new(&["a", "d", "b", "gamma", "delta", "gap", "status"])?;
    for r in rows {
        let (gamma, delta, gap, status) = match &r.outcome {
            Ok(p) => (num(p.gamma), num(p.delta), num(p.gap), "ok".to_string()),
            Err(e) => (String::new(), String::new(), String::new(), format!("error: {e}")),
        };
        table.row(&[num(r.a), num(r.d), opt(r.b), gamma, delta, gap, status])?;
    }
    table.finish(out)
}

fn validate(config: &NetworkConfig, net: &StarNetwork, overrides: Overrides, out: PathBuf) -> Result<Output, CliError> {
    let source = source_index(config, net)?;
    let times = grid(&config.protocol.t_grid, "t_grid")?;
    let convention: ZConvention = overrides
        .z_convention
        .or(config.protocol.z_convention)
        .map(ZConvention::from)
        .unwrap_or_default();
    let report = cross_validate(net, &SubspaceState::basis(net.dim(), source)?, &times, convention)?;
    let mut table = Table::new(&["check", "max_deviation", "threshold", "pass"])?;
    for row in &report.rows {
        let pass = match row.pass() {
            Some(true) => "true",
            Some(false) => "false",
            None => "reported",
        };
        table.row(&[
            row.check.to_string(),
            num(row.max_deviation),
            opt(row.threshold),
            pass.to_string(),
        ])?;
    }
    table.finish(out)
}
