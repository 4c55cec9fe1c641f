fn main() {
    std::process::exit(poqlab::cli::main());
}
