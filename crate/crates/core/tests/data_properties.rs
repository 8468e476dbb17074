//! CSV round-trips, transposition and contamination structure as properties.

use std::collections::BTreeSet;

use metascale::synth::{contaminate, outlier_count, ContaminationPlan};
use metascale::{transpose_for_classification, MetaboliteMatrix};
use ndarray::Array2;
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = Array2<f64>> {
    (1usize..6, 2usize..7).prop_flat_map(|(r, c)| {
        prop::collection::vec(
            prop_oneof![
                any::<f64>().prop_filter("finite", |v| v.is_finite()),
                -1e3f64..1e3,
                Just(0.0),
                Just(-0.0),
                Just(f64::MIN_POSITIVE),
            ],
            r * c,
        )
        .prop_map(move |v| Array2::from_shape_vec((r, c), v).unwrap())
    })
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(values in matrix_strategy(), transpose in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = MetaboliteMatrix::from_array(values).unwrap();
        m.write_csv(&path).unwrap();
        let back = MetaboliteMatrix::read_csv(&path, false).unwrap();
        prop_assert_eq!(back.metabolite_ids(), m.metabolite_ids());
        prop_assert_eq!(back.sample_ids(), m.sample_ids());
        for (a, b) in back.values().iter().zip(m.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.digest(), m.digest());
        if transpose {
            // a sample-major copy read back with transposition is the same matrix
            let t = transpose_for_classification(m.values());
            let mut text = String::from("sample_id");
            for id in m.metabolite_ids() {
                text.push(',');
                text.push_str(id);
            }
            text.push('\n');
            for (j, row) in t.rows().into_iter().enumerate() {
                text.push_str(&m.sample_ids()[j]);
                for v in row {
                    text.push_str(&format!(",{v:?}"));
                }
                text.push('\n');
            }
            std::fs::write(&path, text).unwrap();
            let flipped = MetaboliteMatrix::read_csv(&path, true).unwrap();
            prop_assert_eq!(flipped.digest(), m.digest());
        }
    }

    #[test]
    fn transpose_is_an_involution(values in matrix_strategy()) {
        let t = transpose_for_classification(&values);
        prop_assert_eq!(t.dim(), (values.ncols(), values.nrows()));
        prop_assert_eq!(transpose_for_classification(&t), values);
    }

    #[test]
    fn contamination_nests_and_spares_other_cells(
        rows in 2usize..15,
        cols in 2usize..15,
        seed in any::<u64>(),
        cumulative in any::<bool>(),
    ) {
        let values = Array2::from_shape_fn((rows, cols), |(i, j)| ((i * 31 + j * 17) % 23) as f64);
        let m = MetaboliteMatrix::from_array(values).unwrap();
        let plan = ContaminationPlan { rates: vec![0.05, 0.2, 0.5], seed, cumulative, ..ContaminationPlan::default() };
        let out = contaminate(&m, &plan).unwrap();
        let n_cells = rows * cols;
        let mut previous: BTreeSet<(usize, usize)> = BTreeSet::new();
        for c in &out {
            let cells: BTreeSet<(usize, usize)> = c.outlier_cells.iter().copied().collect();
            prop_assert_eq!(cells.len(), c.outlier_cells.len());
            prop_assert_eq!(cells.len(), outlier_count(c.rate, n_cells));
            prop_assert_eq!(cells.len(), (c.rate * n_cells as f64 + 1e-9).floor() as usize);
            if cumulative {
                prop_assert!(previous.is_subset(&cells));
            }
            for ((i, j), v) in c.matrix.values().indexed_iter() {
                if !cells.contains(&(i, j)) {
                    prop_assert_eq!(v.to_bits(), m.values()[(i, j)].to_bits());
                }
            }
            previous = cells;
        }
        let again = contaminate(&m, &plan).unwrap();
        prop_assert_eq!(out, again);
    }
}
