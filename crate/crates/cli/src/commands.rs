use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use netrepr::session::{
    default_density_request, export_view, load_session, run_pipeline, save_session, DensityRequest, ExportFormat,
    Registry, Service, SessionConfig,
};
use netrepr::synth::{planted_network, PlantedConfig};
use netrepr::viz::RatioMode;

/// Runs Steps 1–4 for `config` and saves the session under `sessions`.
/// Returns the session directory.
pub fn run(config: &Path, sessions: &Path) -> Result<PathBuf> {
    let cfg = SessionConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
    let name = cfg.name.clone();
    let session = run_pipeline(cfg)?;
    let dir = sessions.join(&name);
    let manifest = save_session(&session, &dir)?;
    let m = &session.metrics;
    println!("session {name} saved to {}", dir.display());
    println!("  digest {}", manifest.digest);
    println!(
        "  instances: {} class 0, {} class 1, {} excluded; {} features",
        session.labeling.class0_ids.len(),
        session.labeling.class1_ids.len(),
        session.labeling.excluded_ids.len(),
        session.features.n_cols()
    );
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
    println!(
        "  step 2 accuracy {} (held out {}), step 3 accuracy {} (held out {})",
        pct(m.step2_accuracy),
        pct(m.step2_holdout_accuracy),
        pct(m.step3_accuracy),
        pct(m.step3_holdout_accuracy)
    );
    if let Some(r) = &session.ranking {
        let top: Vec<String> = r.entries.iter().take(5).map(|e| format!("{} ({:.3})", e.name, e.mean_abs_shap)).collect();
        println!("  top attributes: {}", top.join(", "));
    }
    Ok(dir)
}

pub fn serve(host: &str, port: u16, sessions: &Path) -> Result<()> {
    let (listener, addr) = crate::server::bind(host, port).with_context(|| format!("binding {host}:{port}"))?;
    let service = Service::new(Arc::new(Registry::new(sessions)));
    println!("listening on ws://{addr}");
    log::info!("serving sessions from {}", sessions.display());
    crate::server::serve(listener, service)?;
    Ok(())
}

pub struct DensityAxes {
    pub x: Option<String>,
    pub y: Option<String>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub equal_weighted: bool,
}

pub fn export(session_dir: &Path, view: &str, out: &Path, axes: DensityAxes) -> Result<()> {
    let session = load_session(session_dir).with_context(|| format!("loading {}", session_dir.display()))?;
    let format = ExportFormat::from_path(out)?;
    let density = if view == "density" {
        let mut req = match (&axes.x, &axes.y) {
            (_, Some(y)) => DensityRequest::new(axes.x.clone().unwrap_or_else(|| "representation".into()), y.clone()),
            (Some(_), None) => bail!("--x needs a matching --y"),
            (None, None) => default_density_request(&session)?,
        };
        req.width = axes.width;
        req.height = axes.height;
        if axes.equal_weighted {
            req.mode = Some(RatioMode::EqualWeighted);
        }
        Some(req)
    } else {
        None
    };
    let bytes = export_view(&session, view, density.as_ref(), format)?;
    std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn synth(out: &Path, cfg: &PlantedConfig) -> Result<()> {
    let net = planted_network(cfg)?;
    std::fs::write(out, net.to_json_string()).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} ({} nodes, {} links)", out.display(), net.node_count(), net.link_count());
    Ok(())
}
