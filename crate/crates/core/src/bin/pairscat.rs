fn main() {
    std::process::exit(pairscat::cli::main_with_args(std::env::args_os()));
}
