// Relative index Ind(P; Q) = Tr(P − Q) of projections: spectral projections
// of one Hamiltonian, the identities on random triples, and the equality of
// the branch crossing count with Tr P^c on the exact toy model.

use qhedge::cli::{random_triples, TripleSummary};
use qhedge::hamiltonian::HermitianMatrix;
use qhedge::index::{
    crossing_vs_index, fermi_levels, relative_index, spectral_projection, CrossingIndex,
};
use qhedge::toymodel::toy_branchset;
use qhedge::Result;

pub fn run_example() -> Result<(i64, TripleSummary, Vec<CrossingIndex>)> {
    let h = HermitianMatrix::from_diagonal(&[-1.0, 0.1, 0.3, 0.6, 0.8, 2.0]);
    let p1 = spectral_projection(&h, 0.0)?;
    let p2 = spectral_projection(&h, 1.0)?;
    // four levels lie in ]0, 1]
    let ind = relative_index(&p1, &p2)?;

    let triples = random_triples(2024, 100, 10)?;

    let bs = toy_branchset(-5, 5, 10.0, 0.1, 64)?;
    let crossings = fermi_levels(&bs, 5)
        .into_iter()
        .map(|f| crossing_vs_index(&bs, f))
        .collect::<Result<Vec<_>>>()?;
    Ok((ind, triples, crossings))
}

fn main() -> Result<()> {
    let (ind, t, c) = run_example()?;
    println!("Ind(P_0; P_1) = {ind}");
    println!("{t:?}");
    for x in c {
        println!(
            "E_F = {:.4}: crossings {}, Tr P^c {}",
            x.fermi, x.q_branches, x.q_index
        );
    }
    Ok(())
}
