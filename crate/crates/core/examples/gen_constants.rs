// temporary generator: prints the generated.rs body
fn main() {
    let fit = mi_core::numerics::fit_capacity_coefficients().unwrap();
    let rule = mi_core::numerics::gauss_hermite_rule(500).unwrap();
    let wsum: f64 = rule.weights.iter().sum();
    let nsum: f64 = rule.nodes.iter().map(|x| x.abs()).sum();
    println!("pub const CAPACITY_FIT_COEFFICIENTS: [f64; 8] = [");
    for c in fit.coefficients { println!("    {:e},", c); }
    println!("];");
    println!("pub const CAPACITY_FIT_MAX_ABS_ERROR: f64 = {:e};", fit.max_abs_error);
    println!("pub const GH500_WEIGHT_SUM: f64 = {:e};", wsum);
    println!("pub const GH500_NODE_ABS_SUM: f64 = {:e};", nsum);
    println!("pub const GH500_MAX_NODE: f64 = {:e};", rule.nodes[499]);
}
