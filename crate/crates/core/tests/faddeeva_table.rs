use decay_core::complexfn::faddeeva;
use decay_core::Complex64;

const TABLE: &str = include_str!("../data/faddeeva_reference.csv");

fn reference() -> Vec<(Complex64, Complex64)> {
    TABLE
        .lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|s| s.trim().parse().unwrap()).collect();
            (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
        })
        .collect()
}

#[test]
fn matches_reference_grid() {
    let rows = reference();
    assert_eq!(rows.len(), 41 * 41);
    let mut worst = (0.0, Complex64::new(0.0, 0.0));
    for (z, w_ref) in rows {
        let w = faddeeva(z).unwrap();
        let err = (w - w_ref).norm() / w_ref.norm();
        if err > worst.0 {
            worst = (err, z);
        }
    }
    assert!(worst.0 <= 1e-12, "worst relative error {:e} at z = {}", worst.0, worst.1);
}
