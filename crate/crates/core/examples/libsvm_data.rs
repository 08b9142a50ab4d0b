//! Reading and writing LIBSVM sparse files, label mapping and feature scaling.
//!
//! cargo run --release --example libsvm_data [path/to/file.libsvm]

use curvopt::data::{apply_scale, binarize_labels, load_libsvm, max_abs, parse_libsvm_str, write_libsvm, LabelRule};

fn main() -> curvopt::Result<()> {
    let text = "+1 1:0.5 3:2\n-1 2:1 # comment\n+1 3:-4 5:1\n";
    let ds = parse_libsvm_str(text, Some(5))?;
    println!("{} rows, {} features, {} stored values", ds.n(), ds.d(), ds.nnz());
    let ds = binarize_labels(&ds, LabelRule::PlusMinusToZeroOne)?;
    let scaled = apply_scale(&ds, &max_abs(&ds));
    println!("labels {:?}, row 2 after scaling {:?}", scaled.labels(), scaled.dense_row(2));
    let mut out = Vec::new();
    write_libsvm(&scaled, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    if let Some(path) = std::env::args().nth(1) {
        let ds = load_libsvm(path.as_ref(), None)?;
        let positives = ds.labels().iter().filter(|&&y| y > 0.0).count();
        println!("{path}: {} rows, {} features, {positives} positive", ds.n(), ds.d());
    }
    Ok(())
}
