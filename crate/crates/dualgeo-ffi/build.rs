use std::env;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    match cbindgen::generate(&crate_dir) {
        Ok(header) => {
            header.write_to_file(format!("{crate_dir}/include/dualgeo.h"));
        }
        Err(err) => panic!("cbindgen failed: {err}"),
    }
}
