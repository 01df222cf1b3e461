//! One function per subcommand. Each returns the files it wrote and whether
//! the run counts as a success.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use bellturb::bellstate::{general_correlation, mixture_weights};
use bellturb::chsh::{bell_at, try_maximize_bell};
use bellturb::estimation::{estimate_moment, pdtc_moments_from_counts, simulate_photocounts};
use bellturb::figures::{fig2, fig3, pdc_figure, Curve, FigureData};
use bellturb::pdc::{self, SqueezingParam};
use bellturb::validation::{run_matrix, standard_matrix};
use bellturb::{DetectionMode, DetectorBank, DetectorParams, Pdtc};
use rayon::prelude::*;

use crate::config::{mode_name, PdtcKind, RunConfig, Scale, SourceKindName, SweepParameter};
use crate::output::{figure_csv, figure_svg, table_csv, write_file, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    CsvSvg,
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub out_dir: &'a Path,
    pub seed: u64,
    pub format: Format,
}

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub success: bool,
    pub summary: Vec<String>,
}

impl Context<'_> {
    fn provenance(&self, command: &str) -> Provenance {
        let mut p = Provenance::default();
        p.push("command", command)
            .push("crate_version", env!("CARGO_PKG_VERSION"))
            .push("seed", self.seed);
        p
    }

    fn emit_figure(&self, name: &str, fig: &FigureData, prov: &Provenance) -> Result<Vec<PathBuf>> {
        let mut files = vec![write_file(
            &self.out_dir.join(format!("{name}.csv")),
            &figure_csv(fig, prov),
        )?];
        if self.format == Format::CsvSvg {
            files.push(write_file(
                &self.out_dir.join(format!("{name}.svg")),
                &figure_svg(fig),
            )?);
        }
        Ok(files)
    }
}

fn figure_outcome(files: Vec<PathBuf>) -> Outcome {
    Outcome {
        files,
        success: true,
        summary: Vec::new(),
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run_fig2(ctx: &Context) -> Result<Outcome> {
    let params = ctx.config.fig2.params();
    let mut prov = ctx.provenance("fig2");
    prov.push("contrasts", join(&params.contrasts))
        .push("points", params.points);
    let fig = fig2(&params)?;
    Ok(figure_outcome(ctx.emit_figure("fig2", &fig, &prov)?))
}

pub fn run_fig3(ctx: &Context) -> Result<Outcome> {
    let params = ctx.config.fig3.params();
    let mut prov = ctx.provenance("fig3");
    prov.push("eta_c", params.eta_c)
        .push("theta_bar", params.theta_bar)
        .push("sigmas", join(&params.sigmas))
        .push("noise_min", params.noise_min)
        .push("noise_max", params.noise_max)
        .push("points", params.points)
        .push("mode", mode_name(params.mode))
        .push("channel", "lognormal correlated");
    let fig = fig3(&params)?;
    Ok(figure_outcome(ctx.emit_figure("fig3", &fig, &prov)?))
}

pub fn run_pdc_figure(ctx: &Context, name: &str, mode: DetectionMode) -> Result<Outcome> {
    let section = match mode {
        DetectionMode::Pnr => &ctx.config.fig4,
        DetectionMode::OnOff => &ctx.config.fig5,
    };
    let params = section.params(mode);
    let mut prov = ctx.provenance(name);
    prov.push("theta_bar", params.theta_bar)
        .push("sigmas", join(&params.sigmas))
        .push("noise", params.noise)
        .push("eta_c", params.eta_c)
        .push("tanh_min", params.tanh_min)
        .push("tanh_max", params.tanh_max)
        .push("points", params.points)
        .push("phi", params.phi)
        .push("mode", mode_name(mode))
        .push("channel", "lognormal correlated");
    let fig = pdc_figure(&params)?;
    Ok(figure_outcome(ctx.emit_figure(name, &fig, &prov)?))
}

pub fn run_oracle_check(ctx: &Context) -> Result<Outcome> {
    let sec = &ctx.config.oracle_check;
    let cases = standard_matrix(sec.bell_tuples, sec.pdc_tuples);
    let reports = run_matrix(&cases, ctx.seed, sec.perturbation)?;
    let mut prov = ctx.provenance("oracle-check");
    prov.push("bell_tuples", sec.bell_tuples)
        .push("pdc_tuples", sec.pdc_tuples)
        .push("perturbation", sec.perturbation)
        .push("channel", "dirac");
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.case.source.name().to_string(),
                mode_name(r.case.mode).to_string(),
                if r.case.equal_detectors {
                    "equal"
                } else {
                    "unequal"
                }
                .to_string(),
                r.case.tuples.to_string(),
                format!("{:e}", r.max_deviation),
                format!("{:e}", r.threshold),
                if r.passed() { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let summary = rows.iter().map(|r| r.join(" ")).collect();
    let csv = table_csv(
        &prov,
        &[
            "source",
            "mode",
            "detectors",
            "tuples",
            "max_deviation",
            "threshold",
            "status",
        ],
        &rows,
    );
    Ok(Outcome {
        files: vec![write_file(&ctx.out_dir.join("oracle_check.csv"), &csv)?],
        success: reports.iter().all(|r| r.passed()),
        summary,
    })
}

pub fn run_estimate(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let pdtc = cfg.pdtc.build(&cfg.base_dir)?;
    let probe = cfg.probe.build(&pdtc, ctx.seed)?;
    let records = simulate_photocounts(&probe, &pdtc);
    let est = pdtc_moments_from_counts(&records, &probe)?;
    let mut prov = ctx.provenance("estimate");
    prov.push("pdtc", pdtc_description(&cfg.pdtc.kind, cfg))
        .push("alpha_a_sq", probe.alpha_a_sq)
        .push("alpha_b_sq", probe.alpha_b_sq)
        .push("eta_c", probe.eta_c)
        .push("shots", probe.shots)
        .push("ill_conditioned_a", est.ill_conditioned_a)
        .push("ill_conditioned_b", est.ill_conditioned_b);
    let third = estimate_moment(&records, &probe, 3, 0)?;
    let entries = [
        ("eta_a", 1, 0, est.eta_a),
        ("eta_b", 0, 1, est.eta_b),
        ("eta_a_eta_b", 1, 1, est.eta_ab),
        ("eta_a^2", 2, 0, est.eta_a2),
        ("eta_b^2", 0, 2, est.eta_b2),
        ("eta_a^3", 3, 0, third),
    ];
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (name, n, m, value) in entries {
        let exact = pdtc.moment(n, m)?;
        let rel = (value - exact) / exact;
        rows.push(vec![
            name.to_string(),
            n.to_string(),
            m.to_string(),
            value.to_string(),
            exact.to_string(),
            rel.to_string(),
        ]);
        summary.push(format!(
            "<{name}> estimate={value:e} exact={exact:e} rel_err={rel:+.3e}"
        ));
    }
    let csv = table_csv(
        &prov,
        &["moment", "n", "m", "estimate", "exact", "relative_error"],
        &rows,
    );
    Ok(Outcome {
        files: vec![write_file(&ctx.out_dir.join("estimate.csv"), &csv)?],
        success: true,
        summary,
    })
}

fn pdtc_description(kind: &PdtcKind, cfg: &RunConfig) -> String {
    let p = &cfg.pdtc;
    match kind {
        PdtcKind::Dirac => format!("dirac eta_a={} eta_b={}", p.eta_a, p.eta_b),
        PdtcKind::Lognormal => format!(
            "lognormal theta_bar={} sigma={} correlated={}",
            p.theta_bar, p.sigma, p.correlated
        ),
        PdtcKind::Empirical => format!(
            "empirical samples_path={}",
            p.samples_path
                .as_deref()
                .map(|s| s.display().to_string())
                .unwrap_or_default()
        ),
    }
}

/// Model parameters at one sweep point.
struct SweepPoint {
    bank: DetectorBank,
    pdtc: Pdtc,
    source: SourceKindName,
    tanh_chi: f64,
    phi: f64,
}

fn sweep_point(cfg: &RunConfig, parameter: SweepParameter, x: f64) -> Result<SweepPoint> {
    let mut pdtc_sec = cfg.pdtc.clone();
    let mut bank = cfg.detectors.bank()?;
    let mut tanh_chi = cfg.source.tanh_chi;
    let mut phi = cfg.source.phi;
    let map_bank = |bank: &mut DetectorBank,
                    f: &dyn Fn(DetectorParams) -> bellturb::Result<DetectorParams>|
     -> Result<()> {
        bank.t_a = f(bank.t_a)?;
        bank.r_a = f(bank.r_a)?;
        bank.t_b = f(bank.t_b)?;
        bank.r_b = f(bank.r_b)?;
        Ok(())
    };
    match parameter {
        SweepParameter::TanhChi => {
            if cfg.source.kind != SourceKindName::Pdc {
                bail!("sweep over tanh_chi needs source.kind = \"pdc\"");
            }
            tanh_chi = x;
        }
        SweepParameter::Phi => phi = x,
        SweepParameter::Noise => map_bank(&mut bank, &|d| DetectorParams::new(d.eta(), x))?,
        SweepParameter::Eta => map_bank(&mut bank, &|d| DetectorParams::new(x, d.noise()))?,
        SweepParameter::ThetaBar | SweepParameter::Sigma => {
            if pdtc_sec.kind != PdtcKind::Lognormal {
                bail!(
                    "sweep over {} needs pdtc.kind = \"lognormal\"",
                    parameter.name()
                );
            }
            if parameter == SweepParameter::ThetaBar {
                pdtc_sec.theta_bar = x;
            } else {
                pdtc_sec.sigma = x;
            }
        }
    }
    Ok(SweepPoint {
        bank,
        pdtc: pdtc_sec.build(&cfg.base_dir)?,
        source: cfg.source.kind,
        tanh_chi,
        phi,
    })
}

/// `[B at configured settings, maximal B, E(a1, b1)]` at one point.
fn sweep_values(p: &SweepPoint, settings: &bellturb::AngleSettings) -> Result<[f64; 3]> {
    match p.source {
        SourceKindName::Bell => {
            let w = mixture_weights(&p.pdtc)?;
            let model = |a: f64, b: f64| Ok(general_correlation(&p.bank, &w, a, b, p.phi)?.0);
            let fixed = bell_at(model, settings)?;
            let best = try_maximize_bell(model)?.value;
            Ok([fixed, best, model(settings.a1, settings.b1)?])
        }
        SourceKindName::Pdc => {
            let t = SqueezingParam::new(p.tanh_chi)?;
            let model = |a: f64, b: f64| pdc::correlation(&p.bank, &p.pdtc, t, a, b, p.phi);
            let fixed = bell_at(model, settings)?;
            let best = try_maximize_bell(model)?.value;
            Ok([fixed, best, model(settings.a1, settings.b1)?])
        }
    }
}

pub fn run_sweep(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let sw = &cfg.sweep;
    let grid = sw.grid()?;
    let settings = cfg.angles.settings();
    // Validate the whole grid before spending time on maximization.
    let points = grid
        .iter()
        .map(|&x| sweep_point(cfg, sw.parameter, x))
        .collect::<Result<Vec<_>>>()?;
    let values = points
        .par_iter()
        .map(|p| sweep_values(p, &settings))
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let curve = |label: &str, k: usize| Curve {
        label: label.to_string(),
        values: values.iter().map(|v| v[k]).collect(),
    };
    let fig = FigureData {
        title: format!("Sweep over {}", sw.parameter.name()),
        x_label: sw.parameter.name().to_string(),
        y_label: "B / E".into(),
        log_x: sw.scale == Scale::Log,
        x: grid,
        curves: vec![
            curve("B at configured angles", 0),
            curve("maximal B", 1),
            curve("E(a1 b1)", 2),
        ],
    };
    let mut prov = ctx.provenance("sweep");
    let bank = cfg.detectors.bank()?;
    prov.push("parameter", sw.parameter.name())
        .push(
            "scale",
            if sw.scale == Scale::Log {
                "log"
            } else {
                "linear"
            },
        )
        .push(
            "source",
            match cfg.source.kind {
                SourceKindName::Bell => "bell",
                SourceKindName::Pdc => "pdc",
            },
        )
        .push("tanh_chi", cfg.source.tanh_chi)
        .push("phi", cfg.source.phi)
        .push("pdtc", pdtc_description(&cfg.pdtc.kind, cfg))
        .push("mode", mode_name(bank.mode))
        .push(
            "detectors",
            bank.as_array()
                .iter()
                .map(|d| format!("{}:{}", d.eta(), d.noise()))
                .collect::<Vec<_>>()
                .join(";"),
        )
        .push(
            "angles",
            join(&[settings.a1, settings.b1, settings.a2, settings.b2]),
        );
    Ok(figure_outcome(ctx.emit_figure("sweep", &fig, &prov)?))
}
