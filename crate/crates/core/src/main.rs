fn main() {
    std::process::exit(toricpos::cli::main());
}
