fn main() {
    let alphas: Vec<f64> = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75];
    let t0 = std::time::Instant::now();
    let b = polyfair::bounds::random_cluster_bounds(10000, 1000, 20, 40, 0.2, &alphas).unwrap();
    println!("solved in {:?}", t0.elapsed());
    for p in &b.points {
        println!(
            "alpha={:.2} logpi0-=({:.2}) logpi0+=({:.2}) rate_lo=({:.4}, {:.4}) rate_hi=({:.4}, {:.4})",
            p.alpha, p.log_pi0_minus, p.log_pi0_plus,
            p.rate_lower(0), p.rate_lower(1), p.rate_upper(0), p.rate_upper(1)
        );
    }
}
