//! Recursive one- and four-step forecasts from the TC-TVP-VAR and the three
//! baselines, scored by RMSE and CRPS.

use std::sync::Arc;

use rand::SeedableRng;
use tctvp::analysis::{
    recursive_forecast, score, FlatVarForecaster, Forecaster, HorizonMode, MinnesotaForecaster,
    StdTvpForecaster, TcForecaster, TcHyper,
};
use tctvp::baselines::{MinnesotaSpec, StdTvpSpec};
use tctvp::sampler::{ChainConfig, ModelMoments};
use tctvp::theory::{simulate, NkModel, NkTheta};

fn main() -> tctvp::Result<()> {
    let (pre, p) = (20, 2);
    let model = NkModel::new(vec![]);
    let th = NkTheta::reference();
    let rows = 130;
    let data = simulate(
        &model.solve_theta(&th, rows)?,
        rows,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(21),
    )?
    .obs;
    let tc = TcForecaster {
        p,
        presample: pre,
        provider: Arc::new(ModelMoments {
            model: Arc::new(model),
            p,
        }),
        hyper: TcHyper::MlGrid {
            lambdas: vec![1.0, 3.0, 10.0, 30.0],
            gammas: vec![0.0, 1.0, 3.0, 10.0],
            theta: th.to_vec(),
        },
        freeze: false,
    };
    let chain = ChainConfig {
        iterations: 600,
        burn_in: 300,
        thin: 3,
        ..Default::default()
    };
    let std = StdTvpForecaster {
        p,
        presample: pre,
        spec: StdTvpSpec::default(),
        chain,
        freeze: false,
    };
    let minn = MinnesotaForecaster {
        p,
        presample: pre,
        spec: MinnesotaSpec::default(),
    };
    let flat = FlatVarForecaster { p, presample: pre };
    let models: [&dyn Forecaster; 4] = [&tc, &std, &minn, &flat];
    let names = vec!["ygr".to_string(), "infl".into(), "int".into()];
    let origins: Vec<usize> = (110..125).collect();
    let run = recursive_forecast(
        &models,
        &data,
        &names,
        &origins,
        &[1, 4],
        HorizonMode::Point,
        300,
        5,
    )?;
    println!(
        "{:<12} {:<5} {:>2} {:>8} {:>8}",
        "model", "var", "h", "RMSE", "CRPS"
    );
    for r in score(&run)? {
        println!(
            "{:<12} {:<5} {:>2} {:>8.3} {:>8.3}",
            r.model, r.variable, r.horizon, r.rmse, r.crps
        );
    }
    Ok(())
}
