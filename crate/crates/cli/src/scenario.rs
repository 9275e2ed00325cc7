//! Builds the fields a configuration describes.

use std::sync::Arc;

use dhm_core::exact::{
    conformal_map_field, perturbed_constant_pair, random_smooth_pair, trivial_pairs, twistor_pushforward, RationalMap,
    TrivialPair,
};
use dhm_core::solver::SolverConfig;
use dhm_core::spinor::Spinor;
use dhm_core::{DomainChart, MapField, Topology, TwistedSpinorField};

use crate::config::{RunConfig, ScenarioKind};

pub fn chart(cfg: &RunConfig, n: usize) -> dhm_core::Result<Arc<DomainChart>> {
    let c = &cfg.chart;
    let chart = match c.topology {
        Topology::Torus => DomainChart::torus(n, c.side)?,
        Topology::Disk => DomainChart::disk(n)?,
    };
    let chart = match c.window {
        Some(w) => chart.with_window(w)?,
        None => chart,
    };
    Ok(Arc::new(chart))
}

fn constant_spinor(cfg: &RunConfig) -> Vec<Spinor> {
    cfg.scenario.direction.iter().map(|d| cfg.scenario.spinor * *d).collect()
}

/// The scenario's fields on an `n × n` grid.
pub fn build(cfg: &RunConfig, n: usize) -> dhm_core::Result<(MapField, TwistedSpinorField)> {
    let chart = chart(cfg, n)?;
    let s = &cfg.scenario;
    match s.kind {
        ScenarioKind::Twistor | ScenarioKind::HarmonicMap => {
            let rmap = RationalMap::new(s.numerator.clone(), s.denominator.clone())?;
            let phi = conformal_map_field(&rmap, chart)?;
            if s.kind == ScenarioKind::Twistor {
                let psi = twistor_pushforward(&phi, s.psi0, s.psi1);
                Ok((phi, psi))
            } else {
                trivial_pairs(TrivialPair::HarmonicMap { map: phi })
            }
        }
        ScenarioKind::Constant => {
            let spinor = constant_spinor(cfg).into_iter().map(|v| vec![v; chart.len()]).collect();
            trivial_pairs(TrivialPair::ConstantMapHarmonicSpinor {
                chart,
                target: cfg.target,
                point: s.point.clone(),
                spinor,
                tol: 1e-12,
            })
        }
        ScenarioKind::Perturbation => {
            perturbed_constant_pair(chart, cfg.target, &s.point, &constant_spinor(cfg), s.amplitude, cfg.seed)
        }
        ScenarioKind::Random => random_smooth_pair(chart, cfg.target, cfg.seed),
    }
}

pub fn solver_config(cfg: &RunConfig, chart: &DomainChart) -> SolverConfig {
    let o = &cfg.solver;
    let mut sc = SolverConfig::for_chart(chart);
    if let Some(dt) = o.dt {
        sc.dt = dt;
    }
    sc.max_iters = o.max_iters;
    sc.residual_tol = o.residual_tol;
    sc.reproject_every = o.reproject_every;
    sc.spinor_norm_target = o.spinor_norm_target;
    sc.power_iters = o.power_iters;
    sc.seed = cfg.seed;
    sc.inner_tol = o.inner_tol;
    sc.inner_max_iters = o.inner_max_iters;
    sc.trace_every = o.trace_every;
    sc
}
