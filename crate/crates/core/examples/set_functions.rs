//! Facility location, FLQMI and FLCG on small hand-made kernels, with the
//! mutual-information and conditional-gain identities.

use streamline_core::kernel::SimilarityMatrix;
use streamline_core::submodular::{
    marginal_gain, scg_value, smi_value, SetFunction, SetFunctionInstance,
};

fn main() -> streamline_core::Result<()> {
    let ground = SimilarityMatrix::from_rows(vec![
        vec![1.0, 0.5, 0.1],
        vec![0.5, 1.0, 0.3],
        vec![0.1, 0.3, 1.0],
    ])?;
    let query = SimilarityMatrix::from_rows(vec![vec![0.9], vec![0.4], vec![0.0]])?;

    let fl = SetFunctionInstance::facility_location(ground.clone());
    let qmi = SetFunctionInstance::flqmi(query.clone());
    let cg = SetFunctionInstance::flcg(ground, query)?;

    for a in [vec![], vec![0], vec![2], vec![0, 2], vec![0, 1, 2]] {
        println!(
            "A = {a:?}: FL {:.2}  FLQMI {:.2}  FLCG {:.2}",
            fl.value(&a)?,
            qmi.value(&a)?,
            cg.value(&a)?
        );
    }

    println!("gain of 1 given {{0}}: {:.2}", marginal_gain(&fl, &[0], 1)?);
    println!("gain of 1 given {{0, 2}}: {:.2}", marginal_gain(&fl, &[0, 2], 1)?);
    println!("I(A; B) for A = {{0}}, B = {{1}}: {:.2}", smi_value(&fl, &[0], &[1])?);
    println!("H(A | B) for A = {{2}}, B = {{0}}: {:.2}", scg_value(&fl, &[2], &[0])?);
    Ok(())
}
