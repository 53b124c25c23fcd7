//! Drive the command-line front end in-process.
//!
//! `cargo run --example cli -- analyze crates/core/fixtures/m3.pmcs`

fn main() {
    let mut args: Vec<String> = std::env::args().collect();
    if args.len() == 1 {
        let m3 = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/m3.pmcs");
        args.extend(["--json".into(), "analyze".into(), m3.into()]);
    }
    let out = pmcs::cli::run(args);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
