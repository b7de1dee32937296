use uwjam_core::analysis::{AnalysisReport, SimulationResult};
use uwjam_core::channel_model::PerMode;
use uwjam_core::game_solver::GameConfig;
use uwjam_core::scenario::ScenarioConfig;

/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// CSV text with `#` comment lines echoing the effective configuration.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn bare() -> Self {
        Self { text: String::new() }
    }

    pub fn new(command: &str, scenario: &ScenarioConfig, mode: PerMode) -> Self {
        let mut csv = Self::bare();
        csv.comment(&format!("uwjam {command} {}", env!("CARGO_PKG_VERSION")));
        csv.comment(&format!("per_mode: {mode}"));
        csv.comment(&format!("config: {}", serde_json::to_string(scenario).expect("scenario serialises")));
        csv
    }

    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn header(&mut self, cols: &[&str]) {
        self.text.push_str(&cols.join(","));
        self.text.push('\n');
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// One row of the evaluate / simulate / sensitivity / mismatch outputs.
pub struct ReportRow {
    distance_m: f64,
    alpha: f64,
    gamma: String,
    lifetime: f64,
    lifetime_ci: f64,
    psucc: f64,
    psucc_ci: f64,
    sigma: f64,
    solve_model: PerMode,
    true_model: PerMode,
    jammer: String,
    psucc_subgame: f64,
    mean_tx: f64,
    lifetime_analytic: f64,
    psucc_analytic: f64,
    runs: u64,
}

impl ReportRow {
    pub const COLUMNS: &'static [&'static str] = &[
        "distance_m",
        "alpha",
        "gamma",
        "lifetime",
        "lifetime_ci",
        "psucc",
        "psucc_ci",
        "sigma",
        "solve_model",
        "true_model",
        "jammer",
        "psucc_subgame",
        "mean_tx",
        "lifetime_analytic",
        "psucc_analytic",
        "runs",
    ];

    /// Exact values from the recursions; intervals are zero.
    pub fn analytic(distance_m: f64, solve_model: PerMode, true_model: PerMode, r: &AnalysisReport) -> Self {
        Self {
            distance_m,
            alpha: r.config.alpha,
            gamma: r.config.horizon.to_string(),
            lifetime: r.lifetime,
            lifetime_ci: 0.0,
            psucc: r.success_prob,
            psucc_ci: 0.0,
            sigma: 0.0,
            solve_model,
            true_model,
            jammer: r.config.jammer.to_string(),
            psucc_subgame: r.subgame_success,
            mean_tx: r.mean_tx,
            lifetime_analytic: r.lifetime,
            psucc_analytic: r.success_prob,
            runs: 0,
        }
    }

    pub fn simulated(distance_m: f64, mode: PerMode, r: &AnalysisReport, sim: &SimulationResult) -> Self {
        Self {
            lifetime: sim.mean_lifetime,
            lifetime_ci: sim.lifetime_ci,
            psucc: sim.success_rate,
            psucc_ci: sim.success_ci,
            sigma: sim.sigma,
            runs: sim.runs,
            ..Self::analytic(distance_m, mode, mode, r)
        }
    }

    pub fn cells(&self) -> Vec<String> {
        vec![
            num(self.distance_m),
            num(self.alpha),
            self.gamma.clone(),
            num(self.lifetime),
            num(self.lifetime_ci),
            num(self.psucc),
            num(self.psucc_ci),
            num(self.sigma),
            self.solve_model.to_string(),
            self.true_model.to_string(),
            self.jammer.clone(),
            num(self.psucc_subgame),
            num(self.mean_tx),
            num(self.lifetime_analytic),
            num(self.psucc_analytic),
            self.runs.to_string(),
        ]
    }
}

/// Fields where two game configurations differ, as `name: a != b`.
pub fn config_diff(expected: &GameConfig, found: &GameConfig) -> Vec<String> {
    let a = serde_json::to_value(expected).expect("config serialises");
    let b = serde_json::to_value(found).expect("config serialises");
    let (Some(a), Some(b)) = (a.as_object(), b.as_object()) else {
        return vec!["unreadable configuration".into()];
    };
    a.iter()
        .filter_map(|(k, va)| {
            let vb = b.get(k).cloned().unwrap_or(serde_json::Value::Null);
            (*va != vb).then(|| format!("{k}: scenario {va} != table {vb}"))
        })
        .collect()
}
