//! Samples each market model and reports how correlated the lists are.

use predmatch::generators::{sample_uniform, MarketModel, RatingTable, TierParams};
use predmatch::{run_da, Instance, Side};

/// Mean position of the first-listed hospital of resident 0 across all lists.
fn consensus(inst: &Instance) -> f64 {
    let top = inst.resident_list(0)[0];
    (0..inst.n()).map(|r| inst.resident_rank(r, top).unwrap() as f64).sum::<f64>() / inst.n() as f64
}

fn main() {
    let n = 200;
    let models = [
        MarketModel::Uniform,
        MarketModel::Mallows { phi: 0.2 },
        MarketModel::Mallows { phi: 0.9 },
        MarketModel::Tiered(TierParams::default()),
        MarketModel::Rating(RatingTable::default()),
    ];
    for model in &models {
        let inst = model.sample(n, 5).unwrap();
        let (_, stats) = run_da(&inst, Side::Residents);
        println!("{:<8} {:<8} consensus rank {:>6.1}, DA proposals {}", model.name(), model_param(model), consensus(&inst), stats.proposals);
    }
    assert_eq!(sample_uniform(n, 5), MarketModel::Uniform.sample(n, 5).unwrap());
}

fn model_param(model: &MarketModel) -> String {
    match model {
        MarketModel::Mallows { phi } => format!("phi={phi}"),
        _ => String::new(),
    }
}
