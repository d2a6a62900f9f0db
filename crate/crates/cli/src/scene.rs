//! Turns validated scene values into core objects.

use std::f64::consts::PI;

use reparam_core::backgrounds::{make_preset, Preset, PresetSpec};
use reparam_core::brane::{BraneLagrangian, BraneQuadrature, Embedding, FormCoefficients};
use reparam_core::dynamics::{GaugeChoice, State};
use reparam_core::tensor::binomial;
use reparam_core::{Jet2, Lagrangian, Term};

use crate::config::{BraneConfig, EmbeddingKind, Form, GaugeKind, LagrangianConfig, SceneConfig};
use crate::CliError;

pub fn preset(spec: &PresetSpec) -> Result<Preset, CliError> {
    make_preset(spec).map_err(CliError::from_setup)
}

/// The preset's terms, filtered, reweighted, un-rooted and powered as the
/// `[lagrangian]` section asks.
pub fn lagrangian(p: &Preset, cfg: &LagrangianConfig) -> Result<Lagrangian, CliError> {
    let available: Vec<_> = p
        .lagrangian
        .terms()
        .iter()
        .filter_map(|t| match t {
            Term::Canonical(c) => Some(c.clone()),
            _ => None,
        })
        .collect();
    let chosen = match &cfg.orders {
        None => available,
        Some(orders) => orders
            .iter()
            .map(|&n| {
                available
                    .iter()
                    .find(|c| c.order() == n)
                    .cloned()
                    .ok_or_else(|| {
                        CliError::Config(format!("preset `{}` has no order-{n} field", p.name))
                    })
            })
            .collect::<Result<_, _>>()?,
    };
    let mut l = Lagrangian::new(p.dim);
    for (i, term) in chosen.into_iter().enumerate() {
        let term = match &cfg.weights {
            Some(w) => term.with_weight(w[i]),
            None => term,
        };
        let term = match cfg.form {
            Form::Root => Term::Canonical(term),
            Form::Monomial => Term::Monomial(term),
        };
        l = l.with_term(term).map_err(CliError::from_setup)?;
    }
    if cfg.power != 1.0 {
        l = l.powered(cfg.power);
    }
    Ok(l)
}

pub fn gauge(kind: &GaugeKind, l: &Lagrangian) -> Result<GaugeChoice, CliError> {
    let g = match kind {
        GaugeKind::ProperTime => GaugeChoice::ProperTime,
        GaugeKind::TermConst(n) => GaugeChoice::TermConst(*n),
        GaugeKind::LagrangianConst => GaugeChoice::LagrangianConst,
        GaugeKind::Direct => GaugeChoice::Direct,
    };
    g.validate(l).map_err(CliError::from_setup)?;
    Ok(g)
}

pub fn initial_state(cfg: &SceneConfig, dim: usize) -> Result<State, CliError> {
    let init = cfg.initial()?;
    if init.x0.len() != dim {
        return Err(CliError::Config(format!(
            "[initial] has {} components, the scene is {dim}-dimensional",
            init.x0.len()
        )));
    }
    Ok(State::new(init.tau0, init.x0.clone(), init.v0.clone()))
}

/// Everything a dynamics command needs.
pub struct Dynamics {
    pub spec: PresetSpec,
    pub preset: Preset,
    pub lagrangian: Lagrangian,
    pub gauge: GaugeChoice,
}

impl Dynamics {
    /// A scalar preset parameter as given in the scene.
    pub fn param(&self, key: &str) -> Option<f64> {
        match self.spec.params.get(key).map(Vec::as_slice) {
            Some([v]) => Some(*v),
            _ => None,
        }
    }
}

pub fn dynamics(cfg: &SceneConfig) -> Result<Dynamics, CliError> {
    let preset = preset(&cfg.target)?;
    let lagrangian = lagrangian(&preset, &cfg.lagrangian)?;
    let gauge = gauge(&cfg.gauge, &lagrangian)?;
    Ok(Dynamics {
        spec: cfg.target.clone(),
        preset,
        lagrangian,
        gauge,
    })
}

/// Worldsheet embeddings on the unit square, target dimension 4.
pub fn embedding(b: &BraneConfig) -> Result<Embedding, CliError> {
    let (rho, amp) = (b.rho, b.amplitude);
    let e = match b.embedding {
        EmbeddingKind::FlatSheet => Embedding::affine(
            2,
            4,
            vec![0.0; 4],
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ),
        EmbeddingKind::Cylinder => Embedding::new(2, 4, move |z| {
            let ang = &z[1] * (2.0 * PI);
            vec![
                z[0].clone(),
                ang.cos() * rho,
                ang.sin() * rho,
                Jet2::constant(0.0),
            ]
        }),
        EmbeddingKind::WaveSheet => Embedding::new(2, 4, move |z| {
            let phase = &z[1] * (2.0 * PI);
            vec![
                z[0].clone(),
                z[1].clone(),
                phase.sin() * amp,
                &z[0] * &z[1] * amp,
            ]
        }),
    };
    e.map_err(CliError::from_setup)
}

/// Exact action of the embedding under the Nambu-Goto term alone, when known.
pub fn area_oracle(b: &BraneConfig) -> Option<f64> {
    if b.one_form.is_some() {
        return None;
    }
    let area = match b.embedding {
        EmbeddingKind::FlatSheet => 1.0,
        EmbeddingKind::Cylinder => 2.0 * PI * b.rho,
        EmbeddingKind::WaveSheet => return None,
    };
    // the ordered-tuple contraction carries D! = 2 under the root
    let norm = match b.normalization {
        reparam_core::brane::DngNormalization::Paper => 2f64.sqrt(),
        reparam_core::brane::DngNormalization::CauchyBinet => 1.0,
    };
    Some(b.tension * area * norm)
}

pub fn brane_lagrangian(b: &BraneConfig, p: &Preset) -> Result<BraneLagrangian, CliError> {
    let g = p.metric.clone().ok_or_else(|| {
        CliError::Config(format!("preset `{}` has no metric for a brane", p.name))
    })?;
    if p.dim != 4 {
        return Err(CliError::Config(
            "brane scenes need a 4-dimensional target".into(),
        ));
    }
    let mut bl = BraneLagrangian::nambu_goto(2, g, b.normalization)
        .map_err(CliError::from_setup)?
        .with_tension(b.tension);
    if let Some(c) = &b.one_form {
        if c.len() != binomial(4, 2) {
            return Err(CliError::Config(format!(
                "[brane] one_form needs {} coefficients (sorted index pairs)",
                binomial(4, 2)
            )));
        }
        let form = FormCoefficients::constant(4, 2, c.clone()).map_err(CliError::from_setup)?;
        bl = bl.with_one_form(form).map_err(CliError::from_setup)?;
    }
    Ok(bl)
}

pub fn brane_quadrature(cfg: &SceneConfig) -> BraneQuadrature {
    BraneQuadrature {
        order: cfg.quadrature.order,
        panels: cfg.quadrature.panels,
        refine: cfg.quadrature.refine,
        tol: cfg.quadrature.tol,
    }
}
