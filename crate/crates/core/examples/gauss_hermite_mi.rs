//! Mutual information of a four-level Gaussian mixture as the levels are
//! pulled together, at several quadrature orders.
use flash_dva::info::{hermite_rule, mutual_information_gh, GaussianMixtureModel};

fn main() -> flash_dva::Result<()> {
    let levels = [2.8, 5.2, 6.4, 7.86];
    let sigmas = [0.35, 0.05, 0.05, 0.05];
    let rules: Vec<_> = [8, 16, 32, 64].iter().map(|&n| hermite_rule(n)).collect::<Result<_, _>>()?;
    println!("alpha   n=8      n=16     n=32     n=64");
    for alpha in [0.1, 0.2, 0.3, 0.4, 0.6, 1.0] {
        let model = GaussianMixtureModel::scaled_levels(alpha, &levels, sigmas);
        let row: Vec<String> = rules.iter().map(|r| format!("{:.5}", mutual_information_gh(&model, r))).collect();
        println!("{alpha:<6}  {}", row.join("  "));
    }
    Ok(())
}
