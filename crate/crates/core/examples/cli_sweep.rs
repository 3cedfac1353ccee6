//! Drive the command-line front end in-process: write a chain file and
//! sweep tail bounds over `n`.

use markov_bounds::cli::{run_with, ChainSpecFile};
use markov_bounds::fixtures::CHAIN_A_SPEC;

fn main() {
    let spec = ChainSpecFile::parse(CHAIN_A_SPEC).expect("fixture parses");
    let path = std::env::temp_dir().join("markov-bounds-chain-a.json");
    std::fs::write(&path, spec.to_json()).expect("temp dir is writable");
    let p = path.to_str().expect("utf-8 path");

    let mut out = Vec::new();
    let mut err = Vec::new();
    for args in [
        vec!["inspect"],
        vec!["tail", "10", "0.6", "--with-oracle"],
        vec!["sweep", "tail", "--n", "5,10,15", "--x", "0.6,0.8", "--with-oracle"],
        vec!["sweep", "ht", "--n", "200,1000", "--x", "0.011"],
    ] {
        let argv = ["markov-bounds", "--spec", p].into_iter().chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        println!("$ markov-bounds {} → exit {code}", args.join(" "));
        print!("{}", String::from_utf8_lossy(&out));
        out.clear();
    }
    let _ = std::fs::remove_file(path);
}
