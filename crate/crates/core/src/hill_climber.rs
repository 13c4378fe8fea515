//! Single-pass redundancy removal, and the fitness the GA optimises.

use crate::decoder::{decode, CostRankTable, Variant};
use crate::genome::Genome;
use crate::instance::{Instance, Solution};

/// Visits the chosen columns once, most expensive first, dropping every
/// column whose rows are all covered at least twice at that moment.
///
/// Equal costs are visited by descending column index. The result is
/// feasible and irredundant.
///
/// # Panics
///
/// If `solution` is not feasible.
pub fn remove_redundant(instance: &Instance, mut solution: Solution) -> Solution {
    assert!(solution.is_feasible(), "redundancy removal needs a feasible cover");
    let mut order = solution.chosen().to_vec();
    order.sort_unstable_by(|&a, &b| instance.cost(b).cmp(&instance.cost(a)).then(b.cmp(&a)));
    for col in order {
        if solution.is_redundant(instance, col) {
            solution.remove(instance, col);
        }
    }
    solution
}

/// Decodes `genome` and removes redundant columns; the cost of the result is
/// the genome's fitness.
pub fn fitness(instance: &Instance, genome: &Genome, variant: Variant, table: &CostRankTable) -> Solution {
    remove_redundant(instance, decode(instance, genome, variant, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::CrossoverKind;
    use crate::instance::tests::minimal;

    #[test]
    fn irredundant_input_is_unchanged() {
        let inst = minimal();
        let sol = inst.evaluate(&[1, 2]).unwrap();
        assert_eq!(remove_redundant(&inst, sol.clone()), sol);
    }

    #[test]
    fn expensive_duplicate_is_dropped_first() {
        // A = col 0 covers rows {0, 1} at cost 9, B = col 1 covers {0, 1, 2} at cost 4
        let inst = Instance::from_columns(3, vec![9, 4], vec![vec![0, 1], vec![0, 1, 2]]).unwrap();
        let out = remove_redundant(&inst, inst.evaluate(&[0, 1]).unwrap());
        assert_eq!(out.chosen(), &[1]);
        assert_eq!(out.cost(), 4);
    }

    #[test]
    fn all_columns_on_minimal_instance() {
        let inst = minimal();
        let out = remove_redundant(&inst, inst.evaluate(&[0, 1, 2, 3]).unwrap());
        assert_eq!(out.chosen(), &[1, 2]);
        assert_eq!(out.cost(), 4);
        assert_eq!(out.cover_count(), &[1, 1, 1]);
    }

    #[test]
    fn cost_ties_visit_higher_index_first() {
        // both columns cover the only row at the same cost; the higher index goes
        let inst = Instance::from_rows(vec![3, 3], vec![vec![0, 1]]).unwrap();
        let out = remove_redundant(&inst, inst.evaluate(&[0, 1]).unwrap());
        assert_eq!(out.chosen(), &[0]);
    }

    #[test]
    #[should_panic(expected = "feasible")]
    fn infeasible_input_panics() {
        let inst = minimal();
        remove_redundant(&inst, inst.evaluate(&[0]).unwrap());
    }

    #[test]
    fn fitness_of_dominant_column() {
        let inst = Instance::from_rows(vec![2, 5, 5], vec![vec![0, 1], vec![0, 2]]).unwrap();
        let table = CostRankTable::new(&inst);
        let g = Genome { perm: vec![1, 0], weights: [1.0, 1.0, 1.0, 1.0], crossover: CrossoverKind::Pmx };
        for v in Variant::ALL {
            assert_eq!(fitness(&inst, &g, v, &table).cost(), 2);
        }
    }
}
