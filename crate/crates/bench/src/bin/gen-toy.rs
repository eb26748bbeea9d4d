//! Writes the bundled toy dataset: `gen-toy <out_dir>`.

use std::path::PathBuf;

use biasgen_bench::{norm_dict_tsv, toy_data, TOY_DICT_ENTRIES, TOY_PAIRS, TOY_PARAGRAPHS, TOY_SEED};
use biasgen_core::corpus::write_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os().nth(1).map(PathBuf::from).ok_or("usage: gen-toy <out_dir>")?;
    std::fs::create_dir_all(&out)?;
    let data = toy_data(TOY_SEED, TOY_PARAGRAPHS, TOY_PAIRS, TOY_DICT_ENTRIES);
    for (i, rows) in data.sources.iter().enumerate() {
        let name = format!("corruptions_{}.tsv", ["asr_a", "asr_b"][i]);
        write_table(out.join(name), rows)?;
    }
    std::fs::write(out.join("corpus.txt"), data.paragraphs.join("\n") + "\n")?;
    std::fs::write(out.join("norm_dict.tsv"), norm_dict_tsv(&data.norm_dict))?;
    Ok(())
}
