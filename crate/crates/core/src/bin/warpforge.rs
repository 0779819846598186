fn main() {
    std::process::exit(warpforge::cli::main());
}
