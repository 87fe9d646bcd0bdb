use selfnorm_core::contfrac::{cf_digits, gauss_mass, pi_grid_point, PiPrecision, GRID_SIZE};
use selfnorm_core::engine::{run_cf_table, CfTableConfig};

/// `#{W ≥ t}` over the 3182 grid points for t = 0, 0.1, …, 1.0, 1.2, 1.4,
/// produced by a separate exact-arithmetic implementation of the same
/// pipeline.
const GOLDEN: [[u64; 13]; 4] = [
    [1619, 1530, 1445, 1317, 1204, 1085, 950, 828, 692, 562, 449, 263, 143],
    [1605, 1515, 1415, 1322, 1219, 1087, 957, 809, 680, 545, 436, 256, 124],
    [1626, 1531, 1421, 1337, 1230, 1112, 967, 844, 718, 580, 447, 252, 123],
    [1583, 1484, 1402, 1323, 1240, 1124, 1008, 907, 777, 639, 509, 298, 140],
];

#[test]
fn default_table_matches_golden_counts() {
    let table = run_cf_table(&CfTableConfig::default(), 0).unwrap();
    assert_eq!(table.rows.len(), 4);
    for (row, want) in table.rows.iter().zip(GOLDEN) {
        let got: Vec<u64> = row.cells.iter().map(|c| c.count).collect();
        assert_eq!(got, want, "m = {}", row.m);
        assert_eq!(row.k, 30 / (2 * row.m));
        assert!(row.cells.iter().all(|c| c.total == 3182 && c.degenerate == 0));
    }
}

#[test]
fn table_bytes_do_not_depend_on_workers() {
    let cfg = CfTableConfig::default();
    let one = run_cf_table(&cfg, 1).unwrap();
    for workers in [2, 8] {
        let other = run_cf_table(&cfg, workers).unwrap();
        assert_eq!(one.to_csv(), other.to_csv());
        assert_eq!(one.to_json(), other.to_json());
    }
}

#[test]
fn higher_precision_pi_gives_same_table() {
    let a = run_cf_table(&CfTableConfig::default(), 0).unwrap();
    let b = run_cf_table(
        &CfTableConfig {
            precision: PiPrecision::Digits300,
            ..Default::default()
        },
        0,
    )
    .unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn grid_digits_are_stable_to_depth_30() {
    for i in 1..=GRID_SIZE {
        let a = cf_digits(&pi_grid_point(i, PiPrecision::Digits200).unwrap(), 30).unwrap();
        let b = cf_digits(&pi_grid_point(i, PiPrecision::Digits300).unwrap(), 30).unwrap();
        assert_eq!(a.digits.len(), 30);
        assert_eq!(a.digits, b.digits, "index {i}");
    }
}

/// Pooled over digit positions, digit frequencies on the grid follow the Gauss
/// measure. (The first digit alone does not: the grid is uniform on (0,1).)
#[test]
fn pooled_digit_frequencies_follow_gauss_measure() {
    let depth = 30;
    let mut freq = [0u64; 6];
    for i in 1..=GRID_SIZE {
        let cf = cf_digits(&pi_grid_point(i, PiPrecision::Digits200).unwrap(), depth).unwrap();
        for d in cf.to_u64().unwrap() {
            if d <= 5 {
                freq[d as usize] += 1;
            }
        }
    }
    let total = (GRID_SIZE * depth) as f64;
    for (j, &count) in freq.iter().enumerate().skip(1) {
        let got = count as f64 / total;
        let want = gauss_mass(j as u64).unwrap();
        assert!((got - want).abs() < 0.02, "j = {j}: {got} vs {want}");
    }
}
