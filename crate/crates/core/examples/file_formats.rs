//! Writing and reading dictionaries, training sets, codes and PGM images.

use sparsedict::denoise::{load_pgm, save_pgm, GrayImage};
use sparsedict::io;
use sparsedict::synthesis::SyntheticSpec;

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("sparsedict-formats");
    std::fs::create_dir_all(&dir)?;

    let spec = SyntheticSpec {
        dim: 8,
        atoms: 16,
        signals: 100,
        sparsity: 3,
        seed: 2,
    };
    let (dict, data, codes) = spec.generate()?;
    io::write_dictionary(dir.join("d.sdict"), &dict)?;
    io::write_training_set(dir.join("y.sdata"), &data)?;
    io::write_codes(dir.join("x.scode"), &codes)?;
    assert_eq!(io::read_dictionary(dir.join("d.sdict"))?, dict);
    assert_eq!(io::read_training_set(dir.join("y.sdata"))?, data);
    assert_eq!(io::read_codes(dir.join("x.scode"))?, codes);

    let img = GrayImage::from_fn(32, 16, |r, c| ((r * 16 + c * 3) % 256) as f64)?;
    save_pgm(&img, dir.join("ramp.pgm"))?;
    assert_eq!(load_pgm(dir.join("ramp.pgm"))?, img);

    for name in ["d.sdict", "y.sdata", "x.scode", "ramp.pgm"] {
        println!("{name}: {} bytes", std::fs::metadata(dir.join(name))?.len());
    }
    Ok(())
}
