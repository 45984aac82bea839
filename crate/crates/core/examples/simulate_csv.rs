//! Simulate the NK observables with a ZLB episode, write them as CSV and
//! read them back.

use rand::SeedableRng;
use tctvp::io::{emit_csv, ingest_reader, TimeSeriesPanel};
use tctvp::theory::{simulate, NkModel, NkTheta, ZlbEpisode};

fn main() -> tctvp::Result<()> {
    let model = NkModel::new(vec![ZlbEpisode {
        start: 30,
        length: 6,
        horizon: 4,
    }]);
    let sol = model.solve_theta(&NkTheta::reference(), 40)?;
    let path = simulate(&sol, 40, &mut rand_chacha::ChaCha8Rng::seed_from_u64(12))?;
    let panel =
        TimeSeriesPanel::from_matrix(path.obs, vec!["ygr".into(), "infl".into(), "int".into()], 0);
    let mut buf = Vec::new();
    emit_csv(&panel, &mut buf)?;
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().skip(28).take(10) {
        println!("{line}");
    }
    let back = ingest_reader(text.as_bytes(), &[])?;
    assert_eq!(back.values, panel.values);
    println!("round trip exact over {} rows", back.n_rows());
    Ok(())
}
